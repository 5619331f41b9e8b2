//! The outer channel seen by the outer code.
//!
//! Each slot first behaves as an A-channel (the receiver sees the set union
//! of the symbols sent by the active users). The set is then corrupted element
//! by element: present symbols vanish with probability `p_m`, absent ones
//! appear with probability `p_f`. Symbols are `0..Q`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{check_len, domain, Result};
use crate::math::{binary_entropy, powu};

/// Above this alphabet size insertions are drawn as a binomial count instead
/// of one Bernoulli trial per absent symbol.
pub const EXACT_NOISE_MAX_Q: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterChannelParams {
    pub q: u64,
    pub ka: u32,
    pub p_m: f64,
    pub p_f: f64,
}

impl OuterChannelParams {
    pub fn new(q: u64, ka: u32, p_m: f64, p_f: f64) -> Result<Self> {
        let p = OuterChannelParams { q, ka, p_m, p_f };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(domain("alphabet size Q must be at least 2"));
        }
        if self.ka < 1 {
            return Err(domain("need at least one active user"));
        }
        check_probability("p_m", self.p_m)?;
        check_probability("p_f", self.p_f)
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(domain(alloc::format!("{name} = {p} is not a probability")))
    }
}

/// A set of slot symbols, kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SlotSymbolSet {
    members: Vec<u32>,
}

impl SlotSymbolSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Collect symbols into a set, rejecting any symbol `>= q`.
    pub fn from_symbols(symbols: impl IntoIterator<Item = u32>, q: u64) -> Result<Self> {
        let mut members: Vec<u32> = symbols.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&s| s as u64 >= q) {
            return Err(domain(alloc::format!("symbol {bad} outside alphabet of size {q}")));
        }
        members.sort_unstable();
        members.dedup();
        Ok(SlotSymbolSet { members })
    }

    /// Build from symbols already known to be in range.
    pub(crate) fn from_sorted_unique(members: Vec<u32>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        SlotSymbolSet { members }
    }

    #[inline]
    pub fn contains(&self, s: u32) -> bool {
        self.members.binary_search(&s).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.members
    }
}

/// Per-slot symbol lists `(Y_1, ..., Y_L)`, the input of every outer decoder.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReceivedLists {
    slots: Vec<SlotSymbolSet>,
}

impl ReceivedLists {
    pub fn new(slots: Vec<SlotSymbolSet>) -> Result<Self> {
        if slots.is_empty() {
            return Err(domain("received lists need at least one slot"));
        }
        Ok(ReceivedLists { slots })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot(&self, i: usize) -> &SlotSymbolSet {
        &self.slots[i]
    }

    pub fn slots(&self) -> &[SlotSymbolSet] {
        &self.slots
    }
}

/// Output of the noiseless A-channel: the set of distinct transmitted symbols.
pub fn a_channel_union(transmitted: &[u32], q: u64) -> Result<SlotSymbolSet> {
    SlotSymbolSet::from_symbols(transmitted.iter().copied(), q)
}

/// Pass an A-channel output through the miss/false-alarm noise.
pub fn apply_symbol_noise<R: Rng + ?Sized>(
    ya: &SlotSymbolSet,
    params: &OuterChannelParams,
    rng: &mut R,
) -> SlotSymbolSet {
    if params.q <= EXACT_NOISE_MAX_Q || params.p_f > 0.5 {
        noise_exact(ya, params, rng)
    } else {
        noise_sampled(ya, params, rng)
    }
}

fn noise_exact<R: Rng + ?Sized>(ya: &SlotSymbolSet, params: &OuterChannelParams, rng: &mut R) -> SlotSymbolSet {
    let mut out = Vec::with_capacity(ya.len() + 4);
    let mut members = ya.as_slice().iter().peekable();
    for x in 0..params.q {
        let x = x as u32;
        let present = members.next_if_eq(&&x).is_some();
        let keep = if present { !rng.random_bool(params.p_m) } else { rng.random_bool(params.p_f) };
        if keep {
            out.push(x);
        }
    }
    SlotSymbolSet::from_sorted_unique(out)
}

fn noise_sampled<R: Rng + ?Sized>(ya: &SlotSymbolSet, params: &OuterChannelParams, rng: &mut R) -> SlotSymbolSet {
    let mut out: BTreeSet<u32> = ya.iter().filter(|_| !rng.random_bool(params.p_m)).collect();
    let absent = params.q - ya.len() as u64;
    let inserted = Binomial::new(absent, params.p_f).map(|b| b.sample(rng)).unwrap_or(0);
    let mut added = 0;
    while added < inserted {
        let x = rng.random_range(0..params.q) as u32;
        if !ya.contains(x) && out.insert(x) {
            added += 1;
        }
    }
    SlotSymbolSet::from_sorted_unique(out.into_iter().collect())
}

/// Number of positions whose codeword symbol is missing from the slot list.
pub fn list_cover_distance(y: &ReceivedLists, x: &[u32]) -> Result<usize> {
    check_len(y.len(), x.len())?;
    Ok(y.slots.iter().zip(x).filter(|(s, &v)| !s.contains(v)).count())
}

/// Probability that a fixed, non-transmitted symbol shows up in a slot list
/// when `r` distinct messages were sent.
pub fn mu_r(q: u64, r: u64, p_m: f64, p_f: f64) -> f64 {
    let absent = powu((q as f64 - 1.0) / q as f64, r);
    ((1.0 - absent) * (1.0 - p_m) + absent * p_f).clamp(0.0, 1.0)
}

/// Estimate of the uniform-input capacity of the outer channel, in bits per
/// slot (all users together). It comes from an upper bound on `H(Y)` and can
/// be negative; it is returned as is.
pub fn capacity_estimate(params: &OuterChannelParams) -> f64 {
    let q = params.q as f64;
    let absent = powu((q - 1.0) / q, params.ka as u64);
    let mu = mu_r(params.q, params.ka as u64, params.p_m, params.p_f);
    q * binary_entropy(mu) - q * (1.0 - absent) * binary_entropy(params.p_m) - q * absent * binary_entropy(params.p_f)
}

/// Concatenated-scheme rate per user in bits per channel use:
/// `C_u / (K_a log2 Q) * R_I` with inner rate `R_I = log2 Q / n_1`.
pub fn concatenated_rate(capacity: f64, ka: u32, n1: usize) -> f64 {
    capacity / (ka as f64 * n1 as f64)
}
