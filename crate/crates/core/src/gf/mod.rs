//! GF(2^m) arithmetic for `1 <= m <= 16`, plus univariate and bivariate
//! polynomials over those fields.
//!
//! Elements use the polynomial basis: bit `i` of the integer value is the
//! coefficient of `x^i`. Multiplication goes through log/antilog tables built
//! from a fixed primitive polynomial per degree.

mod poly;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Result};

pub use poly::{BivariatePolynomial, Polynomial};

/// A field element. Only meaningful together with the [`GaloisField`] that
/// produced it; the value is always `< 2^m` for that field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Gf(pub u16);

impl Gf {
    pub const ZERO: Gf = Gf(0);
    pub const ONE: Gf = Gf(1);

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl core::ops::Add for Gf {
    type Output = Gf;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf) -> Gf {
        Gf(self.0 ^ rhs.0)
    }
}

impl core::ops::AddAssign for Gf {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Gf) {
        self.0 ^= rhs.0;
    }
}

/// Primitive polynomials, one per degree, as bit masks including the leading term.
const PRIMITIVE_POLYNOMIALS: [u32; 17] = [
    0,
    0x3,     // x + 1
    0x7,     // x^2 + x + 1
    0xB,     // x^3 + x + 1
    0x13,    // x^4 + x + 1
    0x25,    // x^5 + x^2 + 1
    0x43,    // x^6 + x + 1
    0x83,    // x^7 + x + 1
    0x11D,   // x^8 + x^4 + x^3 + x^2 + 1
    0x211,   // x^9 + x^4 + 1
    0x409,   // x^10 + x^3 + 1
    0x805,   // x^11 + x^2 + 1
    0x1053,  // x^12 + x^6 + x^4 + x + 1
    0x201B,  // x^13 + x^4 + x^3 + x + 1
    0x4443,  // x^14 + x^10 + x^6 + x + 1
    0x8003,  // x^15 + x + 1
    0x1100B, // x^16 + x^12 + x^3 + x + 1
];

/// The built-in primitive polynomial for GF(2^m).
pub fn primitive_polynomial(m: u32) -> Option<u32> {
    PRIMITIVE_POLYNOMIALS.get(m as usize).copied().filter(|&p| p != 0)
}

/// GF(2^m) with precomputed log/antilog tables. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisField {
    m: u32,
    modulus: u32,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl GaloisField {
    /// The field of size `2^m` with the built-in primitive polynomial.
    pub fn new(m: u32) -> Result<Self> {
        let modulus = primitive_polynomial(m)
            .ok_or_else(|| domain(alloc::format!("unsupported extension degree m = {m}")))?;
        Self::with_modulus(m, modulus)
    }

    /// Build the field from an explicit modulus. The modulus must be primitive:
    /// `x` has to generate the whole multiplicative group, which is checked
    /// exhaustively.
    pub fn with_modulus(m: u32, modulus: u32) -> Result<Self> {
        if !(1..=16).contains(&m) {
            return Err(domain(alloc::format!("extension degree {m} outside 1..=16")));
        }
        if modulus >> m != 1 {
            return Err(domain(alloc::format!("modulus {modulus:#x} is not of degree {m}")));
        }
        let size = 1usize << m;
        let order = size - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; size];
        let mut seen = vec![false; size];
        let mut acc: u32 = 1;
        for (i, e) in exp.iter_mut().take(order).enumerate() {
            if seen[acc as usize] || acc == 0 {
                return Err(domain(alloc::format!("modulus {modulus:#x} is not primitive")));
            }
            seen[acc as usize] = true;
            *e = acc as u16;
            log[acc as usize] = i as u16;
            acc <<= 1;
            if acc >> m != 0 {
                acc ^= modulus;
            }
        }
        if acc != 1 {
            return Err(domain(alloc::format!("modulus {modulus:#x} is not primitive")));
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(GaloisField { m, modulus, exp, log })
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Number of elements, `2^m`.
    #[inline]
    pub fn size(&self) -> usize {
        1usize << self.m
    }

    /// Wrap an integer as an element, rejecting values outside the field.
    pub fn element(&self, value: u32) -> Result<Gf> {
        if (value as usize) < self.size() {
            Ok(Gf(value as u16))
        } else {
            Err(domain(alloc::format!("{value} is not an element of GF(2^{})", self.m)))
        }
    }

    #[inline]
    pub fn contains(&self, a: Gf) -> bool {
        (a.0 as usize) < self.size()
    }

    /// All field elements in index order `0, 1, ..., 2^m - 1`.
    pub fn elements(&self) -> impl Iterator<Item = Gf> + '_ {
        (0..self.size()).map(|v| Gf(v as u16))
    }

    #[inline]
    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a.0 == 0 || b.0 == 0 {
            return Gf::ZERO;
        }
        let s = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        Gf(self.exp[s])
    }

    pub fn inv(&self, a: Gf) -> Result<Gf> {
        if a.0 == 0 {
            return Err(domain("inverse of zero"));
        }
        let order = self.size() - 1;
        let l = self.log[a.0 as usize] as usize;
        Ok(Gf(self.exp[(order - l) % order]))
    }

    pub fn div(&self, a: Gf, b: Gf) -> Result<Gf> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Gf, e: u64) -> Gf {
        if e == 0 {
            return Gf::ONE;
        }
        if a.0 == 0 {
            return Gf::ZERO;
        }
        let order = (self.size() - 1) as u64;
        let l = self.log[a.0 as usize] as u64;
        Gf(self.exp[((l * (e % order)) % order) as usize])
    }

    /// `alpha^i` for the primitive element `alpha = x`.
    pub fn alpha_pow(&self, i: usize) -> Gf {
        Gf(self.exp[i % (self.size() - 1)])
    }
}
