//! Guruswami–Sudan interpolation (Kötter's iterative algorithm) and
//! Roth–Ruckenstein factorization.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Result};
use crate::gf::{BivariatePolynomial, Gf, GaloisField, Polynomial};

/// `Q(x, y)` must vanish at `(x, y)` with multiplicity `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterpolationPoint {
    pub x: Gf,
    pub y: Gf,
    pub m: u32,
}

/// `C(n, k) mod 2` by Lucas' theorem.
#[inline]
fn binom_odd(n: usize, k: usize) -> bool {
    k & !n == 0
}

/// Dense bivariate polynomial: `rows[b][a]` is the coefficient of `x^a y^b`.
#[derive(Clone)]
struct Dense {
    rows: Vec<Vec<Gf>>,
}

impl Dense {
    fn y_power(j: usize) -> Self {
        let mut rows = vec![Vec::new(); j + 1];
        rows[j] = vec![Gf::ONE];
        Dense { rows }
    }

    fn weighted_degree(&self, w: usize) -> usize {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(b, row)| row.iter().rposition(|c| !c.is_zero()).map(|a| a + w * b))
            .max()
            .unwrap_or(0)
    }

    /// Hasse derivative `D_{a,b}` evaluated at `(x, y)`.
    fn hasse(&self, field: &GaloisField, a: usize, b: usize, x: Gf, y: Gf) -> Gf {
        let mut acc = Gf::ZERO;
        let mut y_pow = Gf::ONE;
        for (j, row) in self.rows.iter().enumerate().skip(b) {
            if binom_odd(j, b) {
                let mut inner = Gf::ZERO;
                let mut x_pow = Gf::ONE;
                for (i, &c) in row.iter().enumerate().skip(a) {
                    if binom_odd(i, a) && !c.is_zero() {
                        inner += field.mul(c, x_pow);
                    }
                    x_pow = field.mul(x_pow, x);
                }
                acc += field.mul(inner, y_pow);
            }
            y_pow = field.mul(y_pow, y);
        }
        acc
    }

    /// `self <- s * self + t * other`.
    fn combine(&mut self, field: &GaloisField, s: Gf, t: Gf, other: &Dense) {
        if self.rows.len() < other.rows.len() {
            self.rows.resize(other.rows.len(), Vec::new());
        }
        for row in self.rows.iter_mut() {
            for c in row.iter_mut() {
                *c = field.mul(*c, s);
            }
        }
        for (row, orow) in self.rows.iter_mut().zip(&other.rows) {
            if row.len() < orow.len() {
                row.resize(orow.len(), Gf::ZERO);
            }
            for (c, &o) in row.iter_mut().zip(orow) {
                *c += field.mul(o, t);
            }
        }
    }

    /// `self <- (x - beta) * self`.
    fn mul_linear(&mut self, field: &GaloisField, beta: Gf) {
        for row in self.rows.iter_mut() {
            if row.is_empty() {
                continue;
            }
            row.push(Gf::ZERO);
            for i in (0..row.len()).rev() {
                let lower = if i > 0 { row[i - 1] } else { Gf::ZERO };
                row[i] = lower + field.mul(row[i], beta);
            }
        }
    }

    fn to_bivariate(&self) -> BivariatePolynomial {
        BivariatePolynomial::from_terms(self.rows.iter().enumerate().flat_map(|(b, row)| {
            row.iter().enumerate().map(move |(a, &c)| ((a as u32, b as u32), c))
        }))
    }
}

/// Number of monomials of `(1, w)`-weighted degree at most `d`.
fn monomial_count(d: u64, w: u64) -> u64 {
    (0..=d / w).map(|b| d - w * b + 1).sum()
}

/// Minimal `(1, k_O - 1)`-weighted degree interpolation polynomial through
/// the points with the given multiplicities.
///
/// Constraints are processed point by point, `y`-derivative order outer and
/// `x`-derivative order inner, so multiplying the pivot by `(x - beta)` never
/// breaks a constraint already met.
pub fn gs_interpolate(field: &GaloisField, points: &[InterpolationPoint], k_o: usize) -> Result<BivariatePolynomial> {
    if k_o < 2 {
        return Err(domain("interpolation needs k_O >= 2"));
    }
    let active: Vec<&InterpolationPoint> = points.iter().filter(|p| p.m > 0).collect();
    if active.is_empty() {
        return Err(domain("no interpolation constraints"));
    }
    let mut keys: Vec<(u16, u16)> = active.iter().map(|p| (p.x.value(), p.y.value())).collect();
    keys.sort_unstable();
    if keys.windows(2).any(|w| w[0] == w[1]) {
        return Err(domain("interpolation points must be distinct"));
    }
    if active.iter().any(|p| !field.contains(p.x) || !field.contains(p.y)) {
        return Err(domain("interpolation point outside the field"));
    }
    let w = (k_o - 1) as u64;
    let cost: u64 = active.iter().map(|p| p.m as u64 * (p.m as u64 + 1) / 2).sum();
    let mut d_min = 0u64;
    while monomial_count(d_min, w) <= cost {
        d_min += 1;
    }
    let ell = (d_min / w) as usize;

    let mut basis: Vec<Dense> = (0..=ell).map(Dense::y_power).collect();
    let mut wdeg: Vec<usize> = (0..=ell).map(|j| j * w as usize).collect();
    let mut delta = vec![Gf::ZERO; ell + 1];
    for p in &active {
        let m = p.m as usize;
        for b in 0..m {
            for a in 0..m - b {
                for (d, g) in delta.iter_mut().zip(&basis) {
                    *d = g.hasse(field, a, b, p.x, p.y);
                }
                let Some(pivot) = (0..=ell).filter(|&j| !delta[j].is_zero()).min_by_key(|&j| (wdeg[j], j)) else {
                    continue;
                };
                let pivot_poly = basis[pivot].clone();
                for j in 0..=ell {
                    if j != pivot && !delta[j].is_zero() {
                        basis[j].combine(field, delta[pivot], delta[j], &pivot_poly);
                    }
                }
                basis[pivot].mul_linear(field, p.x);
                wdeg[pivot] += 1;
            }
        }
    }
    let best = (0..=ell).min_by_key(|&j| (basis[j].weighted_degree(w as usize), j)).unwrap_or(0);
    Ok(basis[best].to_bivariate())
}

/// All `f` with `deg f < k_O` such that `y - f(x)` divides `q_poly`,
/// sorted and without duplicates.
pub fn gs_factor(field: &GaloisField, q_poly: &BivariatePolynomial, k_o: usize) -> Result<Vec<Polynomial>> {
    if q_poly.is_zero() {
        return Err(domain("cannot factor the zero polynomial"));
    }
    if k_o == 0 {
        return Ok(Vec::new());
    }
    let mut found = Vec::new();
    let mut prefix = Vec::with_capacity(k_o);
    roth_ruckenstein(field, q_poly.y_coeffs(), k_o, &mut prefix, &mut found);
    let mut out: Vec<Polynomial> =
        found.into_iter().map(Polynomial::new).filter(|f| q_poly.substitute_y(field, f).is_zero()).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

fn roth_ruckenstein(field: &GaloisField, rows: Vec<Polynomial>, k: usize, prefix: &mut Vec<Gf>, out: &mut Vec<Vec<Gf>>) {
    let v = rows.iter().filter(|r| !r.is_zero()).map(|r| r.x_valuation()).min().unwrap_or(0);
    let rows: Vec<Polynomial> = rows.iter().map(|r| r.unshift(v)).collect();
    let at_zero = Polynomial::new(rows.iter().map(|r| r.coeff(0)).collect());
    if at_zero.degree().unwrap_or(0) == 0 {
        return;
    }
    for gamma in field.elements() {
        if !at_zero.eval_unchecked(field, gamma).is_zero() {
            continue;
        }
        prefix.push(gamma);
        if prefix.len() == k {
            out.push(prefix.clone());
        } else {
            // Q(x, x y + gamma).
            let mut next: Vec<Vec<Gf>> = vec![Vec::new(); rows.len()];
            for (b, row) in rows.iter().enumerate() {
                if row.is_zero() {
                    continue;
                }
                let mut g_pow = Gf::ONE;
                for i in (0..=b).rev() {
                    if binom_odd(b, i) && !g_pow.is_zero() {
                        let target = &mut next[i];
                        if target.len() < row.coeffs().len() + i {
                            target.resize(row.coeffs().len() + i, Gf::ZERO);
                        }
                        for (a, &c) in row.coeffs().iter().enumerate() {
                            target[a + i] += field.mul(c, g_pow);
                        }
                    }
                    g_pow = field.mul(g_pow, gamma);
                }
            }
            roth_ruckenstein(field, next.into_iter().map(Polynomial::new).collect(), k, prefix, out);
        }
        prefix.pop();
    }
}
