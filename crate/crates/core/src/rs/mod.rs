//! Reed–Solomon outer code with Guruswami–Sudan list recovery, the CRC used
//! to filter candidates, and the coset/prefix scheme that spreads users over
//! cosets of a small-field RS code.

mod coset;
mod crc;
mod gs;

pub use coset::{coset_decode, coset_encode, CosetScheme, CosetSchemeConfig, PayloadMode};
pub use crc::{crc_attach, crc_check, crc_polynomial, crc_remainder};
pub use gs::{gs_factor, gs_interpolate, InterpolationPoint};

use alloc::vec::Vec;

use crate::achannel::ReceivedLists;
use crate::error::{check_len, domain, Result};
use crate::gf::{Gf, GaloisField, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsCodeSpec {
    field: GaloisField,
    l: usize,
    k_o: usize,
    locators: Vec<Gf>,
}

impl RsCodeSpec {
    /// `[L, k_O]` code with locators `beta_j` = the `j`-th field element in
    /// index order (`0, 1, ..., L - 1`).
    pub fn new(field: GaloisField, l: usize, k_o: usize) -> Result<Self> {
        if l > field.size() {
            return Err(domain(alloc::format!("length {l} exceeds field size {}", field.size())));
        }
        let locators = (0..l as u32).map(|v| field.element(v)).collect::<Result<Vec<_>>>()?;
        Self::with_locators(field, k_o, locators)
    }

    pub fn with_locators(field: GaloisField, k_o: usize, locators: Vec<Gf>) -> Result<Self> {
        let l = locators.len();
        if k_o == 0 || k_o > l {
            return Err(domain(alloc::format!("need 1 <= k_O <= L, got k_O = {k_o}, L = {l}")));
        }
        let mut sorted: Vec<u16> = locators.iter().map(|g| g.value()).collect();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) || locators.iter().any(|&b| !field.contains(b)) {
            return Err(domain("locators must be distinct field elements"));
        }
        Ok(RsCodeSpec { field, l, k_o, locators })
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        self.l == 0
    }

    pub fn k_o(&self) -> usize {
        self.k_o
    }

    pub fn locators(&self) -> &[Gf] {
        &self.locators
    }
}

/// Evaluate the message polynomial (coefficients lowest degree first) at the
/// locators.
pub fn rs_encode(spec: &RsCodeSpec, message: &[Gf]) -> Result<Vec<Gf>> {
    check_len(spec.k_o, message.len())?;
    let f = Polynomial::new(message.to_vec());
    spec.locators.iter().map(|&b| f.eval(&spec.field, b)).collect()
}

/// `Q x L` multiplicities, `m` on every listed symbol and zero elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicityMatrix {
    q: usize,
    l: usize,
    entries: Vec<u32>,
}

impl MultiplicityMatrix {
    pub fn from_lists(y: &ReceivedLists, q: usize, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(domain("multiplicity must be positive"));
        }
        let l = y.len();
        let mut entries = alloc::vec![0u32; q * l];
        for (j, slot) in y.slots().iter().enumerate() {
            for s in slot.iter() {
                if s as usize >= q {
                    return Err(domain(alloc::format!("symbol {s} outside field of size {q}")));
                }
                entries[s as usize * l + j] = m;
            }
        }
        Ok(MultiplicityMatrix { q, l, entries })
    }

    pub fn get(&self, symbol: usize, position: usize) -> u32 {
        self.entries[symbol * self.l + position]
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        self.l == 0
    }

    /// Number of linear constraints `C(M) = 1/2 sum m (m + 1)`.
    pub fn cost(&self) -> u64 {
        self.entries.iter().map(|&m| m as u64 * (m as u64 + 1) / 2).sum()
    }

    /// Dot product `(M, C)` with the indicator matrix of a codeword.
    pub fn score(&self, codeword: &[Gf]) -> u64 {
        codeword.iter().enumerate().map(|(j, c)| self.get(c.value() as usize, j) as u64).sum()
    }
}

/// Sufficient condition for `codeword` to be in the recovered list.
pub fn gs_condition(mult: &MultiplicityMatrix, codeword: &[Gf], k_o: usize) -> bool {
    let s = mult.score(codeword) as f64;
    s >= libm::sqrt(2.0 * (k_o as f64 - 1.0) * mult.cost() as f64)
}

/// `sqrt(2 C(M) / (k_O - 1))`.
pub fn list_size_bound(cost: u64, k_o: usize) -> f64 {
    libm::sqrt(2.0 * cost as f64 / (k_o as f64 - 1.0))
}

/// Largest number of uncovered positions still guaranteed to be corrected
/// when every list holds `list_size` symbols.
pub fn gs_error_radius(l: usize, k_o: usize, list_size: usize, m: u32) -> f64 {
    let m = m as f64;
    l as f64 * (1.0 - libm::sqrt((k_o as f64 - 1.0) / l as f64 * list_size as f64 * (m + 1.0) / m))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recovered {
    pub message: Vec<Gf>,
    pub codeword: Vec<Gf>,
}

/// Guruswami–Sudan list recovery with uniform multiplicity `m`.
pub fn list_recover(spec: &RsCodeSpec, y: &ReceivedLists, m: u32) -> Result<Vec<Recovered>> {
    check_len(spec.l, y.len())?;
    if spec.k_o < 2 {
        return Err(domain("list recovery needs k_O >= 2"));
    }
    let mult = MultiplicityMatrix::from_lists(y, spec.field.size(), m)?;
    let mut points = Vec::new();
    for (j, slot) in y.slots().iter().enumerate() {
        for s in slot.iter() {
            points.push(InterpolationPoint { x: spec.locators[j], y: Gf(s as u16), m: mult.get(s as usize, j) });
        }
    }
    let q_poly = gs_interpolate(&spec.field, &points, spec.k_o)?;
    gs_factor(&spec.field, &q_poly, spec.k_o)?
        .into_iter()
        .map(|f| {
            let mut message = f.coeffs().to_vec();
            message.resize(spec.k_o, Gf::ZERO);
            let codeword = rs_encode(spec, &message)?;
            Ok(Recovered { message, codeword })
        })
        .collect()
}

/// Rate check for applying GS list recovery directly over the slot alphabet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveFeasibility {
    pub k_o: usize,
    pub rate: f64,
    /// `R_O <= 1 / K_a`, necessary for any error correction with lists of
    /// size `K_a`.
    pub feasible: bool,
    pub error_radius: f64,
}

pub fn naive_feasibility(c: u32, k: u32, ka: u32, l: usize, m: u32) -> NaiveFeasibility {
    let k_o = k.div_ceil(c) as usize;
    let rate = k_o as f64 / l as f64;
    NaiveFeasibility {
        k_o,
        rate,
        feasible: rate <= 1.0 / ka as f64,
        error_radius: gs_error_radius(l, k_o, ka as usize, m),
    }
}
