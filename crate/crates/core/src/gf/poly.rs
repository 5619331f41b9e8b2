use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{Gf, GaloisField};
use crate::error::{domain, Result};

/// Univariate polynomial, coefficients lowest degree first. The zero polynomial
/// is the empty coefficient vector; otherwise the last coefficient is nonzero.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<Gf>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Gf>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Gf) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::new(vec![Gf::ZERO, Gf::ONE])
    }

    pub fn coeffs(&self) -> &[Gf] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> Gf {
        self.coeffs.get(i).copied().unwrap_or(Gf::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation. Fails if `x` or any coefficient lies outside `field`.
    pub fn eval(&self, field: &GaloisField, x: Gf) -> Result<Gf> {
        if !field.contains(x) || self.coeffs.iter().any(|&c| !field.contains(c)) {
            return Err(domain("polynomial and point are not over the same field"));
        }
        Ok(self.eval_unchecked(field, x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, field: &GaloisField, x: Gf) -> Gf {
        self.coeffs.iter().rev().fold(Gf::ZERO, |acc, &c| field.mul(acc, x) + c)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn scale(&self, field: &GaloisField, a: Gf) -> Polynomial {
        if a.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { coeffs: self.coeffs.iter().map(|&c| field.mul(c, a)).collect() }
    }

    pub fn mul(&self, field: &GaloisField, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Gf::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += field.mul(a, b);
            }
        }
        Polynomial::new(out)
    }

    /// `(x - beta) * self`.
    pub fn mul_linear(&self, field: &GaloisField, beta: Gf) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Gf::ZERO; self.coeffs.len() + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i + 1] += c;
            out[i] += field.mul(c, beta);
        }
        Polynomial::new(out)
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![Gf::ZERO; k];
        coeffs.extend_from_slice(&self.coeffs);
        Polynomial { coeffs }
    }

    /// Largest `r` such that `x^r` divides `self` (zero for the zero polynomial).
    pub fn x_valuation(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Divide by `x^r`; the low coefficients must be zero.
    pub(crate) fn unshift(&self, r: usize) -> Polynomial {
        Polynomial { coeffs: self.coeffs[r.min(self.coeffs.len())..].to_vec() }
    }
}

/// Sparse bivariate polynomial `Q(x, y) = sum q_{a,b} x^a y^b`, keyed by
/// `(deg_x, deg_y)`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BivariatePolynomial {
    terms: BTreeMap<(u32, u32), Gf>,
}

impl BivariatePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Gf)>) -> Self {
        let mut p = Self::zero();
        for (k, v) in terms {
            p.add_term(k.0, k.1, v);
        }
        p
    }

    /// Add `c x^a y^b` to the polynomial.
    pub fn add_term(&mut self, a: u32, b: u32, c: Gf) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((a, b)).or_insert(Gf::ZERO);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn coeff(&self, a: u32, b: u32) -> Gf {
        self.terms.get(&(a, b)).copied().unwrap_or(Gf::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, Gf)> + '_ {
        self.terms.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn y_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, b)| b).max()
    }

    /// `(1, k_o - 1)`-weighted degree: the maximum of `a + (k_o - 1) b` over
    /// the monomials present.
    pub fn weighted_degree(&self, k_o: u32) -> Result<u64> {
        if k_o == 0 {
            return Err(domain("weighted degree needs k_o >= 1"));
        }
        self.terms
            .keys()
            .map(|&(a, b)| a as u64 + (k_o as u64 - 1) * b as u64)
            .max()
            .ok_or_else(|| domain("weighted degree of the zero polynomial"))
    }

    /// Dense view: entry `j` is the coefficient of `y^j` as a polynomial in `x`.
    pub fn y_coeffs(&self) -> Vec<Polynomial> {
        let Some(dy) = self.y_degree() else {
            return Vec::new();
        };
        let mut rows: Vec<Vec<Gf>> = vec![Vec::new(); dy as usize + 1];
        for (&(a, b), &c) in &self.terms {
            let row = &mut rows[b as usize];
            if row.len() <= a as usize {
                row.resize(a as usize + 1, Gf::ZERO);
            }
            row[a as usize] = c;
        }
        rows.into_iter().map(Polynomial::new).collect()
    }

    pub fn from_y_coeffs(rows: &[Polynomial]) -> Self {
        let mut terms = BTreeMap::new();
        for (b, row) in rows.iter().enumerate() {
            for (a, &c) in row.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    terms.insert((a as u32, b as u32), c);
                }
            }
        }
        BivariatePolynomial { terms }
    }

    pub fn eval(&self, field: &GaloisField, x: Gf, y: Gf) -> Gf {
        self.terms.iter().fold(Gf::ZERO, |acc, (&(a, b), &c)| {
            acc + field.mul(c, field.mul(field.pow(x, a as u64), field.pow(y, b as u64)))
        })
    }

    /// `Q(x, f(x))` as a univariate polynomial.
    pub fn substitute_y(&self, field: &GaloisField, f: &Polynomial) -> Polynomial {
        let rows = self.y_coeffs();
        rows.iter().rev().fold(Polynomial::zero(), |acc, row| acc.mul(field, f).add(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf16() -> GaloisField {
        GaloisField::new(4).unwrap()
    }

    fn power_sum(field: &GaloisField, p: &Polynomial, x: Gf) -> Gf {
        p.coeffs()
            .iter()
            .enumerate()
            .fold(Gf::ZERO, |acc, (i, &c)| acc + field.mul(c, field.pow(x, i as u64)))
    }

    #[test]
    fn normalization_drops_trailing_zeros() {
        let p = Polynomial::new(vec![Gf(1), Gf(0), Gf(0)]);
        assert_eq!(p.degree(), Some(0));
        assert!(Polynomial::new(vec![Gf(0)]).is_zero());
        assert_eq!(Polynomial::zero().degree(), None);
    }

    #[test]
    fn eval_constant_and_identity() {
        let f = gf16();
        for x in f.elements() {
            assert_eq!(Polynomial::constant(Gf(9)).eval(&f, x).unwrap(), Gf(9));
            assert_eq!(Polynomial::x().eval(&f, x).unwrap(), x);
        }
    }

    #[test]
    fn eval_rejects_foreign_elements() {
        let f = gf16();
        assert!(Polynomial::x().eval(&f, Gf(16)).is_err());
        assert!(Polynomial::constant(Gf(40)).eval(&f, Gf(1)).is_err());
    }

    #[test]
    fn weighted_degree_examples() {
        let y = BivariatePolynomial::from_terms([((0, 1), Gf(1))]);
        assert_eq!(y.weighted_degree(3).unwrap(), 2);
        let x2 = BivariatePolynomial::from_terms([((2, 0), Gf(1))]);
        for k in 1..6 {
            assert_eq!(x2.weighted_degree(k).unwrap(), 2);
        }
        let xy2 = BivariatePolynomial::from_terms([((1, 2), Gf(3))]);
        assert_eq!(xy2.weighted_degree(4).unwrap(), 7);
        assert!(BivariatePolynomial::zero().weighted_degree(2).is_err());
    }

    #[test]
    fn bivariate_never_stores_zero() {
        let mut q = BivariatePolynomial::zero();
        q.add_term(1, 1, Gf(5));
        q.add_term(1, 1, Gf(5));
        assert!(q.is_zero());
        q.add_term(0, 0, Gf(0));
        assert!(q.is_zero());
    }

    #[test]
    fn dense_round_trip_and_substitution() {
        let f = gf16();
        // (y - (x + 1)) * (y - 3)
        let lin1 = [Polynomial::new(vec![Gf(1), Gf(1)]), Polynomial::constant(Gf(1))];
        let lin2 = [Polynomial::constant(Gf(3)), Polynomial::constant(Gf(1))];
        let prod = vec![
            lin1[0].mul(&f, &lin2[0]),
            lin1[0].mul(&f, &lin2[1]).add(&lin1[1].mul(&f, &lin2[0])),
            lin1[1].mul(&f, &lin2[1]),
        ];
        let q = BivariatePolynomial::from_y_coeffs(&prod);
        assert_eq!(q.y_coeffs(), prod);
        assert!(q.substitute_y(&f, &Polynomial::new(vec![Gf(1), Gf(1)])).is_zero());
        assert!(q.substitute_y(&f, &Polynomial::constant(Gf(3))).is_zero());
        assert!(!q.substitute_y(&f, &Polynomial::constant(Gf(2))).is_zero());
    }

    proptest! {
        #[test]
        fn horner_matches_power_sum(c in proptest::collection::vec(0u16..16, 4)) {
            let f = gf16();
            let p = Polynomial::new(c.into_iter().map(Gf).collect());
            for x in f.elements() {
                prop_assert_eq!(p.eval(&f, x).unwrap(), power_sum(&f, &p, x));
            }
        }

        #[test]
        fn eval_is_multiplicative(a in proptest::collection::vec(0u16..256, 0..6),
                                  b in proptest::collection::vec(0u16..256, 0..6),
                                  x in 0u16..256) {
            let f = GaloisField::new(8).unwrap();
            let pa = Polynomial::new(a.into_iter().map(Gf).collect());
            let pb = Polynomial::new(b.into_iter().map(Gf).collect());
            let x = Gf(x);
            prop_assert_eq!(
                pa.mul(&f, &pb).eval(&f, x).unwrap(),
                f.mul(pa.eval(&f, x).unwrap(), pb.eval(&f, x).unwrap())
            );
        }

        #[test]
        fn mul_linear_vanishes_at_root(a in proptest::collection::vec(0u16..16, 1..5), beta in 0u16..16) {
            let f = gf16();
            let p = Polynomial::new(a.into_iter().map(Gf).collect());
            prop_assert!(p.mul_linear(&f, Gf(beta)).eval(&f, Gf(beta)).unwrap().is_zero());
        }
    }
}
