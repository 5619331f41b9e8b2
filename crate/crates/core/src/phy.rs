//! Inner slot code: a random spherical codebook, the slot-level fading
//! multiple-access channel, OMP list decoding and ROC estimation.
//!
//! Signals are complex baseband with unit-variance noise per dimension, so
//! the SNR is set entirely by the per-symbol power `P`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Result};
use crate::rng::{domain as stream_domain, stream};

/// Largest alphabet for which the codebook Gram matrix is precomputed.
pub const GRAM_MAX_Q: usize = 4096;

/// Relative norm below which a selected column is treated as linearly
/// dependent on the previous selections.
pub const SINGULAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelKind {
    /// Quasi-static Rayleigh fading, one `CN(0,1)` gain per user and frame.
    Rayleigh,
    /// Gaussian MAC: all gains equal one.
    Awgn,
}

/// `E_b/N_0 = P n / k`, solved for `P`.
pub fn power_from_ebno(ebno_db: f64, n: usize, k: u32) -> f64 {
    libm::pow(10.0, ebno_db / 10.0) * k as f64 / n as f64
}

pub fn ebno_from_power(power: f64, n: usize, k: u32) -> f64 {
    10.0 * libm::log10(power * n as f64 / k as f64)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerCodebook {
    n1: usize,
    q: usize,
    power: f64,
    seed: u64,
    /// Column-major, `q` columns of length `n1`.
    columns: Vec<Complex64>,
    /// `gram[i * q + j] = <a_i, a_j>` when `q <= GRAM_MAX_Q`.
    gram: Option<Vec<Complex64>>,
}

/// Codebook with columns uniform on the complex sphere of squared radius
/// `n1 P`.
pub fn gen_codebook(n1: usize, q: usize, power: f64, seed: u64) -> Result<InnerCodebook> {
    if n1 == 0 || q < 2 || power <= 0.0 || !power.is_finite() {
        return Err(domain("need n1 >= 1, Q >= 2 and finite P > 0"));
    }
    let mut rng = stream(seed, stream_domain::CODEBOOK, 0);
    let radius = libm::sqrt(n1 as f64 * power);
    let mut columns = Vec::with_capacity(n1 * q);
    for _ in 0..q {
        let start = columns.len();
        columns.extend((0..n1).map(|_| complex_normal(&mut rng)));
        let col = &mut columns[start..];
        let scale = radius / libm::sqrt(norm_sqr(col));
        col.iter_mut().for_each(|x| *x *= scale);
    }
    let mut cb = InnerCodebook { n1, q, power, seed, columns, gram: None };
    if q <= GRAM_MAX_Q {
        cb.gram = Some(cb.compute_gram());
    }
    Ok(cb)
}

impl InnerCodebook {
    /// Build from explicit columns (column-major). Used for test fixtures.
    pub fn from_columns(n1: usize, q: usize, columns: Vec<Complex64>) -> Result<Self> {
        if n1 == 0 || q < 1 || columns.len() != n1 * q {
            return Err(domain("column buffer does not match n1 x Q"));
        }
        let power = norm_sqr(&columns[..n1]) / n1 as f64;
        let mut cb = InnerCodebook { n1, q, power, seed: 0, columns, gram: None };
        if q <= GRAM_MAX_Q {
            cb.gram = Some(cb.compute_gram());
        }
        Ok(cb)
    }

    fn compute_gram(&self) -> Vec<Complex64> {
        let q = self.q;
        let mut g = vec![Complex64::new(0.0, 0.0); q * q];
        for i in 0..q {
            for j in i..q {
                let v = dot(self.column(i), self.column(j));
                g[i * q + j] = v;
                g[j * q + i] = v.conj();
            }
        }
        g
    }

    /// Same directions at a different power; avoids redrawing and
    /// recomputing the Gram matrix when only the SNR changes.
    pub fn rescaled(&self, power: f64) -> Result<InnerCodebook> {
        if power <= 0.0 || !power.is_finite() {
            return Err(domain("power must be finite and positive"));
        }
        let a = libm::sqrt(power / self.power);
        let g = power / self.power;
        Ok(InnerCodebook {
            n1: self.n1,
            q: self.q,
            power,
            seed: self.seed,
            columns: self.columns.iter().map(|x| x * a).collect(),
            gram: self.gram.as_ref().map(|m| m.iter().map(|x| x * g).collect()),
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn column(&self, i: usize) -> &[Complex64] {
        &self.columns[i * self.n1..(i + 1) * self.n1]
    }

    pub fn has_gram(&self) -> bool {
        self.gram.is_some()
    }
}

/// Per-user channel gains for one frame.
pub fn draw_gains<R: Rng + ?Sized>(ka: usize, channel: ChannelKind, rng: &mut R) -> Vec<Complex64> {
    match channel {
        ChannelKind::Rayleigh => (0..ka).map(|_| complex_normal(rng)).collect(),
        ChannelKind::Awgn => vec![Complex64::new(1.0, 0.0); ka],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotObservation {
    pub y: Vec<Complex64>,
}

/// `sum_i H_i a_{X_i}` without noise.
pub fn superpose(codebook: &InnerCodebook, symbols: &[u32], gains: &[Complex64]) -> Result<SlotObservation> {
    if symbols.len() != gains.len() {
        return Err(domain("one gain per transmitted symbol is required"));
    }
    let mut y = vec![Complex64::new(0.0, 0.0); codebook.n1];
    for (&s, &h) in symbols.iter().zip(gains) {
        if s as usize >= codebook.q {
            return Err(domain(alloc::format!("symbol {s} outside codebook of size {}", codebook.q)));
        }
        for (yi, a) in y.iter_mut().zip(codebook.column(s as usize)) {
            *yi += h * a;
        }
    }
    Ok(SlotObservation { y })
}

/// One slot of the fading MAC: superposition plus `CN(0, I)` noise. The
/// caller owns the gains so that they stay fixed across a frame.
pub fn transmit_slot<R: Rng + ?Sized>(
    codebook: &InnerCodebook,
    symbols: &[u32],
    gains: &[Complex64],
    rng: &mut R,
) -> Result<SlotObservation> {
    let mut obs = superpose(codebook, symbols, gains)?;
    for yi in obs.y.iter_mut() {
        *yi += complex_normal(rng);
    }
    Ok(obs)
}

/// Orthogonal matching pursuit returning the first `k0` selected columns in
/// selection order.
///
/// Correlations `<a_i, r>` are updated incrementally from an orthonormal
/// basis of the selected columns (modified Gram-Schmidt, applied twice). A
/// column whose orthogonal component falls below [`SINGULAR_TOL`] relative to
/// its norm is still reported but adds nothing to the basis, which is the
/// minimum-norm least-squares behaviour. Ties go to the lowest index.
pub fn omp_decode(codebook: &InnerCodebook, y: &SlotObservation, k0: usize) -> Result<Vec<usize>> {
    let (n1, q) = (codebook.n1, codebook.q);
    if k0 == 0 || k0 > q {
        return Err(domain(alloc::format!("list size {k0} outside 1..={q}")));
    }
    if y.y.len() != n1 {
        return Err(domain("observation length differs from slot length"));
    }
    let mut corr: Vec<Complex64> = (0..q).map(|i| dot(codebook.column(i), &y.y)).collect();
    let mut selected = vec![false; q];
    let mut order = Vec::with_capacity(k0);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    // w[j][i] = <a_i, q_j>, kept only when the Gram matrix is available.
    let mut w: Vec<Vec<Complex64>> = Vec::new();
    let mut v = vec![Complex64::new(0.0, 0.0); n1];
    let mut h = Vec::new();

    while order.len() < k0 {
        let mut best = usize::MAX;
        let mut best_val = -1.0f64;
        for (i, c) in corr.iter().enumerate() {
            if !selected[i] {
                let m = c.norm_sqr();
                if m > best_val {
                    best = i;
                    best_val = m;
                }
            }
        }
        selected[best] = true;
        order.push(best);
        if basis.len() >= n1 {
            continue;
        }

        let a = codebook.column(best);
        v.copy_from_slice(a);
        h.clear();
        h.resize(basis.len(), Complex64::new(0.0, 0.0));
        for _pass in 0..2 {
            for (j, qj) in basis.iter().enumerate() {
                let c = dot(qj, &v);
                h[j] += c;
                for (vi, qi) in v.iter_mut().zip(qj) {
                    *vi -= qi * c;
                }
            }
        }
        let nv = libm::sqrt(norm_sqr(&v));
        if nv <= SINGULAR_TOL * libm::sqrt(norm_sqr(a)) {
            continue;
        }
        let qn: Vec<Complex64> = v.iter().map(|x| x / nv).collect();
        let proj = dot(&qn, &y.y);
        match &codebook.gram {
            Some(g) => {
                let col: Vec<Complex64> = (0..q)
                    .map(|i| {
                        let mut s = g[i * q + best];
                        for (wj, hj) in w.iter().zip(&h) {
                            s -= wj[i] * hj;
                        }
                        s / nv
                    })
                    .collect();
                for (c, wi) in corr.iter_mut().zip(&col) {
                    *c -= wi * proj;
                }
                w.push(col);
            }
            None => {
                for (i, c) in corr.iter_mut().enumerate() {
                    *c -= dot(codebook.column(i), &qn) * proj;
                }
            }
        }
        basis.push(qn);
    }
    Ok(order)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub k0: u32,
    pub p_m: f64,
    pub p_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocMeta {
    pub ebno_db: f64,
    pub l: u32,
    pub n1: usize,
    pub q: usize,
    pub ka: u32,
    pub channel: ChannelKind,
}

/// Measured inner-decoder operating points, sorted by `K_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocTable {
    meta: RocMeta,
    rows: Vec<RocPoint>,
}

impl RocTable {
    /// Rows must have distinct `K_0`, probabilities in `[0, 1]`, and satisfy
    /// the nested-list ordering (`p_m` nonincreasing, `p_f` nondecreasing).
    pub fn new(meta: RocMeta, mut rows: Vec<RocPoint>) -> Result<Self> {
        rows.sort_by_key(|r| r.k0);
        for r in &rows {
            if !(0.0..=1.0).contains(&r.p_m) || !(0.0..=1.0).contains(&r.p_f) {
                return Err(domain(alloc::format!("K0 = {}: probabilities out of range", r.k0)));
            }
        }
        for pair in rows.windows(2) {
            if pair[0].k0 == pair[1].k0 {
                return Err(domain(alloc::format!("duplicate K0 = {}", pair[0].k0)));
            }
            if pair[1].p_m > pair[0].p_m || pair[1].p_f < pair[0].p_f {
                return Err(domain(alloc::format!("ROC not monotone at K0 = {}", pair[1].k0)));
            }
        }
        Ok(RocTable { meta, rows })
    }

    pub fn meta(&self) -> &RocMeta {
        &self.meta
    }

    pub fn rows(&self) -> &[RocPoint] {
        &self.rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocParams {
    pub n1: usize,
    pub q: usize,
    pub power: f64,
    pub ka: u32,
    pub channel: ChannelKind,
    pub k0_max: usize,
    pub trials: u64,
    pub seed: u64,
}

impl RocParams {
    pub fn validate(&self) -> Result<()> {
        if self.k0_max == 0 || self.k0_max > self.q || self.trials == 0 || self.ka == 0 {
            return Err(domain("need 1 <= K0_max <= Q, trials >= 1 and K_a >= 1"));
        }
        Ok(())
    }
}

/// Mergeable tallies behind a ROC table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RocCounters {
    pub trials: u64,
    /// Distinct transmitted symbols summed over trials.
    pub transmitted: u64,
    /// Non-transmitted symbols summed over trials.
    pub silent: u64,
    /// `misses[j]`: transmitted symbols absent from the first `j + 1` picks.
    pub misses: Vec<u64>,
    /// `false_picks[j]`: non-transmitted symbols among the first `j + 1` picks.
    pub false_picks: Vec<u64>,
}

impl RocCounters {
    pub fn new(k0_max: usize) -> Self {
        RocCounters { trials: 0, transmitted: 0, silent: 0, misses: vec![0; k0_max], false_picks: vec![0; k0_max] }
    }

    pub fn merge(&mut self, other: &RocCounters) {
        self.trials += other.trials;
        self.transmitted += other.transmitted;
        self.silent += other.silent;
        for (a, b) in self.misses.iter_mut().zip(&other.misses) {
            *a += b;
        }
        for (a, b) in self.false_picks.iter_mut().zip(&other.false_picks) {
            *a += b;
        }
    }

    /// Tally one OMP selection order against the transmitted symbols.
    pub fn record(&mut self, q: usize, transmitted: &[u32], order: &[usize]) {
        let mut sent: Vec<u32> = transmitted.to_vec();
        sent.sort_unstable();
        sent.dedup();
        let d = sent.len() as u64;
        self.trials += 1;
        self.transmitted += d;
        self.silent += q as u64 - d;
        let mut hits = 0u64;
        for (j, &s) in order.iter().take(self.misses.len()).enumerate() {
            if sent.binary_search(&(s as u32)).is_ok() {
                hits += 1;
            }
            self.misses[j] += d - hits;
            self.false_picks[j] += (j as u64 + 1) - hits;
        }
    }

    pub fn table(&self, meta: RocMeta) -> Result<RocTable> {
        let rows = (0..self.misses.len())
            .map(|j| RocPoint {
                k0: j as u32 + 1,
                p_m: ratio(self.misses[j], self.transmitted),
                p_f: ratio(self.false_picks[j], self.silent),
            })
            .collect();
        RocTable::new(meta, rows)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Run ROC trials `range` against a fixed codebook. Trial `i` uses its own
/// stream, so any partition of the trial range merges to the same counters.
pub fn roc_trials(codebook: &InnerCodebook, params: &RocParams, range: core::ops::Range<u64>) -> Result<RocCounters> {
    params.validate()?;
    let mut counters = RocCounters::new(params.k0_max);
    let mut symbols = vec![0u32; params.ka as usize];
    for i in range {
        let mut rng = stream(params.seed, stream_domain::ROC_TRIAL, i);
        for s in symbols.iter_mut() {
            *s = rng.random_range(0..params.q as u32);
        }
        let gains = draw_gains(symbols.len(), params.channel, &mut rng);
        let obs = transmit_slot(codebook, &symbols, &gains, &mut rng)?;
        let order = omp_decode(codebook, &obs, params.k0_max)?;
        counters.record(params.q, &symbols, &order);
    }
    Ok(counters)
}

/// Sequential ROC estimate: one OMP run per trial yields every `K_0 <= K0_max`.
pub fn estimate_roc(params: &RocParams, ebno_db: f64, l: u32) -> Result<RocTable> {
    params.validate()?;
    let codebook = gen_codebook(params.n1, params.q, params.power, params.seed)?;
    let counters = roc_trials(&codebook, params, 0..params.trials)?;
    counters.table(RocMeta { ebno_db, l, n1: params.n1, q: params.q, ka: params.ka, channel: params.channel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::domain::TEST;
    use proptest::prelude::{prop_assert_eq, proptest, ProptestConfig};

    #[test]
    fn codebook_on_power_shell() {
        let cb = gen_codebook(37, 64, 2.5, 9).unwrap();
        for i in 0..64 {
            let e = norm_sqr(cb.column(i));
            assert!((e / (37.0 * 2.5) - 1.0).abs() < 1e-9);
        }
        assert_eq!(cb, gen_codebook(37, 64, 2.5, 9).unwrap());
        assert_ne!(cb, gen_codebook(37, 64, 2.5, 10).unwrap());
        let r = cb.rescaled(0.5).unwrap();
        assert!((norm_sqr(r.column(3)) / (37.0 * 0.5) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_columns_nearly_orthogonal() {
        let n1 = 50;
        let cb = gen_codebook(n1, 400, 1.0, 3).unwrap();
        let mut rng = stream(1, TEST, 0);
        let pairs = 10_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..pairs {
            let i = rng.random_range(0..400);
            let mut j = rng.random_range(0..400);
            while j == i {
                j = rng.random_range(0..400);
            }
            let v = dot(cb.column(i), cb.column(j)).norm_sqr() / (n1 as f64 * n1 as f64);
            acc += v;
            acc2 += v * v;
        }
        let mean = acc / pairs as f64;
        let sd = libm::sqrt(acc2 / pairs as f64 - mean * mean);
        // Pairs are drawn from a finite dictionary, so allow a wider band.
        assert!((mean - 1.0 / n1 as f64).abs() < 4.0 * sd / libm::sqrt(pairs as f64) + 2e-3, "{mean}");
    }

    #[test]
    fn noise_only_energy() {
        let cb = gen_codebook(32, 16, 1.0, 0).unwrap();
        let mut rng = stream(2, TEST, 0);
        let trials = 10_000;
        let e: f64 = (0..trials).map(|_| norm_sqr(&transmit_slot(&cb, &[], &[], &mut rng).unwrap().y)).sum();
        let mean = e / trials as f64;
        // ||z||^2 ~ Gamma(32, 1): sd = sqrt(32).
        assert!((mean - 32.0).abs() < 3.0 * libm::sqrt(32.0 / trials as f64));
    }

    #[test]
    fn rayleigh_received_energy() {
        let (n1, ka, p) = (24usize, 5usize, 0.7);
        let cb = gen_codebook(n1, 128, p, 4).unwrap();
        let mut rng = stream(3, TEST, 0);
        let trials = 10_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..trials {
            let syms: Vec<u32> = (0..ka).map(|_| rng.random_range(0..128)).collect();
            let gains = draw_gains(ka, ChannelKind::Rayleigh, &mut rng);
            let e = norm_sqr(&transmit_slot(&cb, &syms, &gains, &mut rng).unwrap().y);
            acc += e;
            acc2 += e * e;
        }
        let mean = acc / trials as f64;
        let sd = libm::sqrt(acc2 / trials as f64 - mean * mean);
        let expected = n1 as f64 * (ka as f64 * p + 1.0);
        assert!((mean - expected).abs() < 3.0 * sd / libm::sqrt(trials as f64), "{mean} vs {expected}");
    }

    #[test]
    fn noiseless_awgn_is_codeword() {
        let cb = gen_codebook(16, 32, 1.0, 5).unwrap();
        let gains = draw_gains(1, ChannelKind::Awgn, &mut stream(0, TEST, 0));
        let obs = superpose(&cb, &[7], &gains).unwrap();
        assert_eq!(obs.y.as_slice(), cb.column(7));
        assert!(superpose(&cb, &[32], &gains).is_err());
    }

    #[test]
    fn awgn_equals_rayleigh_with_unit_gains() {
        let cb = gen_codebook(16, 32, 1.0, 5).unwrap();
        let ones = draw_gains(3, ChannelKind::Awgn, &mut stream(0, TEST, 0));
        let a = transmit_slot(&cb, &[1, 2, 3], &ones, &mut stream(9, TEST, 1)).unwrap();
        let b = transmit_slot(&cb, &[1, 2, 3], &[Complex64::new(1.0, 0.0); 3], &mut stream(9, TEST, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn omp_single_user_first_pick() {
        let cb = gen_codebook(20, 64, 1.0, 6).unwrap();
        let obs = superpose(&cb, &[42], &[Complex64::new(0.01, -0.3)]).unwrap();
        assert_eq!(omp_decode(&cb, &obs, 5).unwrap()[0], 42);
    }

    fn orthonormal_fixture(n1: usize, q: usize) -> InnerCodebook {
        // Columns are scaled standard basis vectors with phases.
        let mut cols = vec![Complex64::new(0.0, 0.0); n1 * q];
        for i in 0..q {
            cols[i * n1 + i] = Complex64::from_polar(3.0, i as f64);
        }
        InnerCodebook::from_columns(n1, q, cols).unwrap()
    }

    #[test]
    fn omp_exact_recovery_on_orthogonal_codebook() {
        let cb = orthonormal_fixture(12, 10);
        let sent = [8u32, 1, 5, 3];
        let gains = [Complex64::new(0.5, 0.1), Complex64::new(-1.0, 0.2), Complex64::new(0.0, 2.0), Complex64::new(0.3, 0.3)];
        let obs = superpose(&cb, &sent, &gains).unwrap();
        let mut got = omp_decode(&cb, &obs, 4).unwrap();
        got.sort_unstable();
        assert_eq!(got, vec![1, 3, 5, 8]);
    }

    #[test]
    fn omp_handles_full_list_and_singular_columns() {
        let cb = gen_codebook(4, 12, 1.0, 8).unwrap();
        let obs = transmit_slot(&cb, &[2, 3], &[Complex64::new(1.0, 0.0); 2], &mut stream(0, TEST, 2)).unwrap();
        let order = omp_decode(&cb, &obs, 12).unwrap();
        let mut sorted = order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn omp_gram_and_direct_paths_agree() {
        let cb = gen_codebook(30, 80, 2.0, 12).unwrap();
        let mut direct = cb.clone();
        direct.gram = None;
        let mut rng = stream(4, TEST, 0);
        for _ in 0..50 {
            let syms: Vec<u32> = (0..6).map(|_| rng.random_range(0..80)).collect();
            let gains = draw_gains(6, ChannelKind::Rayleigh, &mut rng);
            let obs = transmit_slot(&cb, &syms, &gains, &mut rng).unwrap();
            assert_eq!(omp_decode(&cb, &obs, 15).unwrap(), omp_decode(&direct, &obs, 15).unwrap());
        }
    }

    #[test]
    fn omp_high_snr_rayleigh_miss_rate() {
        let params = RocParams {
            n1: 64,
            q: 256,
            power: 10.0,
            ka: 8,
            channel: ChannelKind::Rayleigh,
            k0_max: 16,
            trials: 10_000,
            seed: 21,
        };
        let roc = estimate_roc(&params, 0.0, 1).unwrap();
        let pm = roc.rows()[15].p_m;
        assert!(pm < 0.05, "p_m at K0 = 16 is {pm}");
    }

    #[test]
    fn roc_edge_and_monotone() {
        let params =
            RocParams { n1: 8, q: 16, power: 1.0, ka: 3, channel: ChannelKind::Rayleigh, k0_max: 16, trials: 200, seed: 5 };
        let roc = estimate_roc(&params, 0.0, 1).unwrap();
        let last = roc.rows().last().unwrap();
        assert_eq!((last.p_m, last.p_f), (0.0, 1.0));
        for w in roc.rows().windows(2) {
            assert!(w[1].p_m <= w[0].p_m && w[1].p_f >= w[0].p_f);
        }
    }

    #[test]
    fn roc_split_merge_is_deterministic() {
        let params =
            RocParams { n1: 20, q: 64, power: 2.0, ka: 4, channel: ChannelKind::Awgn, k0_max: 10, trials: 60, seed: 7 };
        let cb = gen_codebook(20, 64, 2.0, 7).unwrap();
        let whole = roc_trials(&cb, &params, 0..60).unwrap();
        let mut parts = roc_trials(&cb, &params, 40..60).unwrap();
        parts.merge(&roc_trials(&cb, &params, 0..40).unwrap());
        assert_eq!(whole, parts);
    }

    #[test]
    fn awgn_roc_regression() {
        let params = RocParams {
            n1: 128,
            q: 1024,
            power: 0.15,
            ka: 10,
            channel: ChannelKind::Awgn,
            k0_max: 20,
            trials: 200,
            seed: 2024,
        };
        let roc = estimate_roc(&params, 0.0, 1).unwrap();
        let at = |k0: usize| roc.rows()[k0 - 1];
        // 200 trials x 10 users with 10 slot collisions: 1990 distinct symbols.
        assert_eq!(at(10).p_m, 64.0 / 1990.0);
        assert_eq!(at(15).p_m, 35.0 / 1990.0);
        assert_eq!(at(20).p_m, 33.0 / 1990.0);
        assert!((at(10).p_f - 0.000364873526946).abs() < 1e-12);
        assert!((at(20).p_f - 0.010073467777723).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn omp_nested_lists(seed in 0u64..1000, k0 in 1usize..20, extra in 1usize..10) {
            let cb = gen_codebook(16, 48, 1.5, seed).unwrap();
            let mut rng = stream(seed, TEST, 7);
            let syms: Vec<u32> = (0..5).map(|_| rng.random_range(0..48)).collect();
            let gains = draw_gains(5, ChannelKind::Rayleigh, &mut rng);
            let obs = transmit_slot(&cb, &syms, &gains, &mut rng).unwrap();
            let short = omp_decode(&cb, &obs, k0).unwrap();
            let long = omp_decode(&cb, &obs, k0 + extra).unwrap();
            prop_assert_eq!(&long[..k0], &short[..]);
        }
    }
}
