//! Small numeric kernels shared by the bound evaluators and the simulators.

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * libm::log2(p) - (1.0 - p) * libm::log2(1.0 - p)
}

/// `x^n` with the convention `0^0 = 1`.
pub(crate) fn powu(x: f64, n: u64) -> f64 {
    if n == 0 {
        1.0
    } else {
        libm::pow(x, n as f64)
    }
}

pub(crate) fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Binomial coefficient as a float; exact for the moderate arguments used here.
pub(crate) fn choose(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 1000 {
        let mut acc = 1.0f64;
        for i in 0..k {
            acc = acc * (n - i) as f64 / (i + 1) as f64;
        }
        if acc < 9.0e15 {
            libm::round(acc)
        } else {
            acc
        }
    } else {
        libm::exp(ln_choose(n, k))
    }
}

/// `C(n, i) p^i (1-p)^(n-i)`.
pub(crate) fn binom_pmf(n: u64, i: u64, p: f64) -> f64 {
    if i > n {
        return 0.0;
    }
    choose(n, i) * powu(p, i) * powu(1.0 - p, n - i)
}

/// `Pr[Bin(n, p) <= t]`.
pub(crate) fn binom_cdf(n: u64, t: u64, p: f64) -> f64 {
    let top = t.min(n);
    let mut acc = 0.0;
    for i in 0..=top {
        acc += binom_pmf(n, i, p);
    }
    acc.min(1.0)
}

/// `Pr[Bin(n, p) > t]`, summed from the upper tail.
pub(crate) fn binom_sf(n: u64, t: u64, p: f64) -> f64 {
    if t >= n {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in (t + 1)..=n {
        acc += binom_pmf(n, i, p);
    }
    acc.min(1.0)
}

/// `(1 - 1/m)^k` for possibly astronomically large `m`.
pub(crate) fn miss_all(m: f64, k: u64) -> f64 {
    if m <= 1.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    libm::exp(k as f64 * libm::log1p(-1.0 / m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_edges() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn choose_small_values() {
        assert_eq!(choose(5, 2), 10.0);
        assert_eq!(choose(13, 0), 1.0);
        let c = choose(100, 50);
        assert!((c / 100891344545564193334812497256.0 - 1.0).abs() < 1e-12);
        assert_eq!(choose(3, 4), 0.0);
    }

    #[test]
    fn tails_are_complementary() {
        for &(n, t, p) in &[(13u64, 0u64, 0.02), (20, 3, 0.3), (7, 6, 0.9)] {
            let s = binom_cdf(n, t, p) + binom_sf(n, t, p);
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
