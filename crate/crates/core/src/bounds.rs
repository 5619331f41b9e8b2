//! Closed-form evaluators for the outer-code achievability bounds and the
//! minimum-energy search built on top of them.
//!
//! * [`rcb_error_prob`], [`rcb_false_alarm`], [`rcb_false_alarm_corollary`]:
//!   random coding bound for list-recoverable codes over the i.i.d. uniform
//!   codebook ensemble, exact and large-`M` forms.
//! * [`expected_paths`], [`ttree_bound`]: the bound on the number of decoding
//!   paths of the t-tree decoder over random block upper-triangular generators.
//! * [`greedy_bit_allocation`]: slot-by-slot bit assignment under a path budget.
//! * [`min_ebno_search`]: smallest `E_b/N_0` on a grid meeting PUPE/FAR targets
//!   given inner-decoder ROC tables.
//!
//! Note on [`ttree_bound`]: the path bound `v_L` counts every surviving
//! candidate, transmitted ones included, so it is reported verbatim as the
//! false-alarm bound while [`TreeBound::false_paths`] drops the full-match
//! term and bounds only the expected number of false candidates. The search
//! uses the latter.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::achannel::{check_probability, mu_r};
use crate::error::{domain, Error, Result};
use crate::math::{binom_cdf, binom_pmf, binom_sf, choose, ln_choose, miss_all, powu};
use crate::phy::RocTable;

/// Exact evaluation is only offered up to this message size.
pub const EXACT_MAX_LOG2_M: u32 = 40;

/// Distribution of the number of distinct messages when `ka` users pick
/// uniformly among `m` messages: entry `r` is `Pr[|{W_1..W_ka}| = r]`.
///
/// Uses the occupancy recursion, which only adds nonnegative terms and stays
/// accurate for any `m` (including `2^100`).
pub fn distinct_count_distribution(m: f64, ka: u32) -> Vec<f64> {
    let ka = ka as usize;
    let mut p = alloc::vec![0.0f64; ka + 1];
    p[0] = 1.0;
    for draws in 0..ka {
        for r in (0..=draws + 1).rev() {
            let stay = if r <= draws { p[r] * (r as f64 / m) } else { 0.0 };
            let grow = if r >= 1 { p[r - 1] * ((m - (r - 1) as f64).max(0.0) / m) } else { 0.0 };
            p[r] = stay + grow;
        }
    }
    p
}

/// `nu_r = Pr[exactly r distinct messages among K_a]`.
pub fn nu_r(m: f64, ka: u32, r: u32) -> Result<f64> {
    if r == 0 || r as f64 > m || r > ka {
        return Err(domain(alloc::format!("r = {r} outside 1..=min(M, K_a)")));
    }
    Ok(distinct_count_distribution(m, ka)[r as usize])
}

/// Inclusion–exclusion form `C(M,r) sum_i (-1)^i C(r,i) ((r-i)/M)^K_a`,
/// accumulated in the log domain with the sign carried separately. Only well
/// conditioned for small `r`; kept as an independent cross-check.
pub fn nu_r_inclusion_exclusion(m: u64, ka: u32, r: u32) -> f64 {
    if r == 0 || r as u64 > m || r > ka {
        return 0.0;
    }
    let ln_prefix = ln_choose(m, r as u64);
    let mut pos = 0.0f64;
    let mut neg = 0.0f64;
    let mut comp_pos = 0.0f64;
    let mut comp_neg = 0.0f64;
    for i in 0..r {
        let ln_term =
            ln_prefix + ln_choose(r as u64, i as u64) + ka as f64 * libm::log((r - i) as f64 / m as f64);
        let term = libm::exp(ln_term);
        // Kahan summation per sign.
        let (acc, comp) = if i % 2 == 0 { (&mut pos, &mut comp_pos) } else { (&mut neg, &mut comp_neg) };
        let yv = term - *comp;
        let tv = *acc + yv;
        *comp = (tv - *acc) - yv;
        *acc = tv;
    }
    pos - neg
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcbConfig {
    /// Message bits `k`; the codebook has `M = 2^k` rows.
    pub log2_m: u32,
    pub l: u32,
    pub q: u64,
    pub t: u32,
    pub ka: u32,
    pub p_m: f64,
    pub p_f: f64,
}

impl RcbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t > self.l {
            return Err(domain("t must not exceed L"));
        }
        if self.l == 0 || self.q < 2 || self.ka == 0 {
            return Err(domain("need L >= 1, Q >= 2 and K_a >= 1"));
        }
        check_probability("p_m", self.p_m)?;
        check_probability("p_f", self.p_f)
    }

    pub fn m(&self) -> f64 {
        libm::exp2(self.log2_m as f64)
    }
}

/// Per-user error probability of a single-user list decoder correcting `t`
/// misses: `Pr[Bin(L, p_m) > t]`.
pub fn rcb_error_prob(l: u32, t: u32, p_m: f64) -> f64 {
    binom_sf(l as u64, t as u64, p_m)
}

/// Exact random-coding bound on the expected number of false messages.
pub fn rcb_false_alarm(cfg: &RcbConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.log2_m > EXACT_MAX_LOG2_M {
        return Err(Error::Unsupported(alloc::format!(
            "k = {} > {EXACT_MAX_LOG2_M}; use the corollary evaluator",
            cfg.log2_m
        )));
    }
    let m = cfg.m();
    let nu = distinct_count_distribution(m, cfg.ka);
    let mut acc = 0.0;
    for r in 1..=cfg.ka.min(m as u32) {
        let mu = mu_r(cfg.q, r as u64, cfg.p_m, cfg.p_f);
        acc += nu[r as usize] * (m - r as f64) * binom_cdf(cfg.l as u64, cfg.t as u64, 1.0 - mu);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorollaryBound {
    /// `(M - K_a) Pr[Bin(L, 1 - mu_Ka) <= t] + p'`.
    pub pf: f64,
    pub union_term: f64,
    /// Probability that two users picked the same message.
    pub p_collision: f64,
    /// The simpler cap `C(K_a, 2) / M` on the collision probability.
    pub p_collision_cap: f64,
}

/// Large-`M` form of the false-alarm bound, valid for any message size.
pub fn rcb_false_alarm_corollary(cfg: &RcbConfig) -> Result<CorollaryBound> {
    cfg.validate()?;
    let m = cfg.m();
    let mu = mu_r(cfg.q, cfg.ka as u64, cfg.p_m, cfg.p_f);
    let union_term = (m - cfg.ka as f64).max(0.0) * binom_cdf(cfg.l as u64, cfg.t as u64, 1.0 - mu);
    let ln_distinct: f64 = (0..cfg.ka).map(|i| libm::log1p(-(i as f64) / m)).sum();
    let p_collision = -libm::expm1(ln_distinct);
    let p_collision_cap = choose(cfg.ka as u64, 2) / m;
    Ok(CorollaryBound { pf: union_term + p_collision, union_term, p_collision, p_collision_cap })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeBoundConfig {
    /// Bits carried by each slot, `b_1..b_L`.
    pub bit_allocation: Vec<u32>,
    /// Bits per symbol; `Q = 2^c`.
    pub c: u32,
    pub ka: u32,
    pub p_m: f64,
    pub p_f: f64,
    pub t: u32,
}

impl TreeBoundConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bit_allocation.is_empty() {
            return Err(domain("bit allocation must cover at least one slot"));
        }
        if self.c == 0 || self.c > 63 || self.ka == 0 {
            return Err(domain("need 1 <= c <= 63 and K_a >= 1"));
        }
        check_probability("p_m", self.p_m)?;
        check_probability("p_f", self.p_f)
    }

    pub fn len(&self) -> usize {
        self.bit_allocation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bit_allocation.is_empty()
    }

    pub fn total_bits(&self) -> u32 {
        self.bit_allocation.iter().sum()
    }

    /// `M_l = 2^{B_l}` with `B_l = b_1 + ... + b_l` (`M_0 = 1`).
    fn prefix_sizes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut acc = 0u32;
        out.push(1.0);
        for &b in &self.bit_allocation {
            acc += b;
            out.push(libm::exp2(acc as f64));
        }
        out
    }

    /// Upper bounds on `Pr[symbol absent]` and `Pr[symbol present]` in a slot
    /// past the longest prefix match.
    pub fn gammas(&self) -> (f64, f64) {
        let q = libm::exp2(self.c as f64);
        let share = self.ka as f64 / q;
        let g1 = share * self.p_m + (1.0 - 1.0 / q) * (1.0 - self.p_f);
        let g2 = share * (1.0 - self.p_m) + (1.0 - 1.0 / q) * self.p_f;
        (g1, g2)
    }
}

/// `(rho_j, lambda_j)` for `j = 0..=l`.
pub fn path_terms(cfg: &TreeBoundConfig, l: usize) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    if l == 0 || l > cfg.len() {
        return Err(domain(alloc::format!("level {l} outside 1..={}", cfg.len())));
    }
    let sizes = cfg.prefix_sizes();
    let ka = cfg.ka as u64;
    let (g1, g2) = cfg.gammas();
    let t = cfg.t as usize;
    let mut out = Vec::with_capacity(l + 1);
    for j in 0..=l {
        let lambda = if j == 0 {
            miss_all(sizes[1], ka)
        } else if j < l {
            miss_all(sizes[j + 1], ka) - miss_all(sizes[j], ka)
        } else {
            1.0 - miss_all(sizes[l], ka)
        };
        let mut rho = 0.0;
        for x in 0..=j.min(t) {
            let px = binom_pmf(j as u64, x as u64, cfg.p_m);
            for y in 0..=(l - j).min(t - x) {
                let rest = (l - j - y) as u64;
                rho += px * choose((l - j) as u64, y as u64) * powu(g1, y as u64) * powu(g2, rest);
            }
        }
        out.push((rho, lambda));
    }
    Ok(out)
}

/// Bound `v_l` on the expected number of level-`l` survivors of the t-tree
/// decoder, `M_l sum_j rho_j lambda_j`. `l` is 1-based.
pub fn expected_paths(cfg: &TreeBoundConfig, l: usize) -> Result<f64> {
    let m_l = cfg.prefix_sizes()[l.min(cfg.len())];
    Ok(m_l * path_terms(cfg, l)?.iter().map(|(r, lam)| r * lam).sum::<f64>())
}

/// Level-`l` path bound without the full-match term: bounds the expected
/// number of surviving prefixes that belong to no transmitted message.
pub fn expected_false_paths(cfg: &TreeBoundConfig, l: usize) -> Result<f64> {
    let m_l = cfg.prefix_sizes()[l.min(cfg.len())];
    let terms = path_terms(cfg, l)?;
    Ok(m_l * terms[..l].iter().map(|(r, lam)| r * lam).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeBound {
    pub pe: f64,
    /// `v_L` as stated: bounds every surviving candidate.
    pub pf_bound: f64,
    /// `v_L` without the full-match term.
    pub false_paths: f64,
    /// `max_l v_l`, the decoder's path budget requirement.
    pub max_paths: f64,
}

pub fn ttree_bound(cfg: &TreeBoundConfig) -> Result<TreeBound> {
    cfg.validate()?;
    let l = cfg.len();
    let mut max_paths = 0.0f64;
    for level in 1..=l {
        max_paths = max_paths.max(expected_paths(cfg, level)?);
    }
    Ok(TreeBound {
        pe: rcb_error_prob(l as u32, cfg.t, cfg.p_m),
        pf_bound: expected_paths(cfg, l)?,
        false_paths: expected_false_paths(cfg, l)?,
        max_paths,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyParams {
    pub k: u32,
    pub c: u32,
    pub ka: u32,
    pub p_m: f64,
    pub p_f: f64,
    pub t: u32,
    /// Path budget; `f64::INFINITY` for none.
    pub v_star: f64,
    pub l_max: u32,
}

/// Assign to each slot in turn the largest `b_l <= c` keeping `v_l <= v_star`.
/// Returns the allocation once all `k` bits are placed, or `None` when the
/// slots run out first.
pub fn greedy_bit_allocation(p: &GreedyParams) -> Option<Vec<u32>> {
    let mut cfg = TreeBoundConfig { bit_allocation: Vec::new(), c: p.c, ka: p.ka, p_m: p.p_m, p_f: p.p_f, t: p.t };
    let mut placed = 0u32;
    for _ in 0..p.l_max {
        let remaining = p.k - placed;
        cfg.bit_allocation.push(0);
        let level = cfg.len();
        let mut chosen = None;
        for b in (0..=remaining.min(p.c)).rev() {
            *cfg.bit_allocation.last_mut().unwrap() = b;
            if expected_paths(&cfg, level).is_ok_and(|v| v <= p.v_star) {
                chosen = Some(b);
                break;
            }
        }
        let b = chosen?;
        *cfg.bit_allocation.last_mut().unwrap() = b;
        placed += b;
        if placed == p.k {
            return Some(cfg.bit_allocation);
        }
    }
    None
}

/// Greedy allocation over exactly `l` slots: trailing slots carry no
/// information bits and must also respect the path budget.
pub fn allocation_for_length(p: &GreedyParams, l: u32) -> Option<Vec<u32>> {
    let mut alloc = greedy_bit_allocation(&GreedyParams { l_max: l, ..*p })?;
    let mut cfg = TreeBoundConfig { bit_allocation: alloc.clone(), c: p.c, ka: p.ka, p_m: p.p_m, p_f: p.p_f, t: p.t };
    while alloc.len() < l as usize {
        alloc.push(0);
        cfg.bit_allocation.push(0);
        if !expected_paths(&cfg, alloc.len()).is_ok_and(|v| v <= p.v_star) {
            return None;
        }
    }
    Some(alloc)
}

/// Which bound turns an inner-decoder ROC point into `(P_e, P_f)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundEvaluator {
    /// Random coding bound; `exact` selects the full sum (small `M` only),
    /// otherwise the corollary form.
    Rcb { exact: bool },
    /// t-tree bound with greedy allocation under the path budget `v_star`.
    TTree { v_star: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpec {
    pub k: u32,
    /// Bits per slot symbol, `Q = 2^c`.
    pub c: u32,
    pub ka: u32,
    pub t: u32,
    pub evaluator: BoundEvaluator,
    pub pe_target: f64,
    pub pf_target: f64,
    /// Admissible ROC points satisfy `P_f < ratio * P_e`.
    pub pf_pe_ratio: f64,
    /// Candidate `E_b/N_0` values; searched in increasing order.
    pub ebno_grid: Vec<f64>,
    pub l_min: u32,
    pub l_max: u32,
}

impl SearchSpec {
    /// Targets `P_e < 0.1`, `P_f < 1e-3`, ratio `1e-2`, `L` from `ceil(k/c)`.
    pub fn with_defaults(k: u32, c: u32, ka: u32, t: u32, evaluator: BoundEvaluator, ebno_grid: Vec<f64>, l_max: u32) -> Self {
        SearchSpec {
            k,
            c,
            ka,
            t,
            evaluator,
            pe_target: 0.1,
            pf_target: 1e-3,
            pf_pe_ratio: 1e-2,
            ebno_grid,
            l_min: k.div_ceil(c).max(1),
            l_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub ebno_db: f64,
    pub l: u32,
    pub k0: u32,
    pub p_m: f64,
    pub p_f: f64,
    pub pe: f64,
    pub pf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Feasible(OperatingPoint),
    /// No grid point meets the targets; the required `E_b/N_0` is unbounded
    /// on this grid.
    Saturated,
}

/// Source of ROC tables indexed by `(E_b/N_0, L)`. Implementations may
/// compute tables lazily.
pub trait RocFamily {
    fn roc(&mut self, ebno_db: f64, l: u32) -> Option<&RocTable>;
}

/// Map key for an `E_b/N_0` value: thousandths of a dB.
pub fn ebno_key(ebno_db: f64) -> i64 {
    libm::round(ebno_db * 1000.0) as i64
}

impl RocFamily for BTreeMap<(i64, u32), RocTable> {
    fn roc(&mut self, ebno_db: f64, l: u32) -> Option<&RocTable> {
        self.get(&(ebno_key(ebno_db), l))
    }
}

/// `(P_e, P_f)` of one ROC point under the chosen bound, `None` when the
/// bound cannot be formed (t-tree allocation infeasible).
pub fn evaluate_roc_point(spec: &SearchSpec, l: u32, p_m: f64, p_f: f64) -> Option<(f64, f64)> {
    if spec.t > l {
        return None;
    }
    let pe = rcb_error_prob(l, spec.t, p_m);
    let pf = match spec.evaluator {
        BoundEvaluator::Rcb { exact } => {
            let cfg = RcbConfig { log2_m: spec.k, l, q: 1u64 << spec.c, t: spec.t, ka: spec.ka, p_m, p_f };
            if exact {
                rcb_false_alarm(&cfg).ok()?
            } else {
                rcb_false_alarm_corollary(&cfg).ok()?.pf
            }
        }
        BoundEvaluator::TTree { v_star } => {
            let g = GreedyParams { k: spec.k, c: spec.c, ka: spec.ka, p_m, p_f, t: spec.t, v_star, l_max: l };
            let alloc = allocation_for_length(&g, l)?;
            let cfg = TreeBoundConfig { bit_allocation: alloc, c: spec.c, ka: spec.ka, p_m, p_f, t: spec.t };
            expected_false_paths(&cfg, l as usize).ok()?
        }
    };
    Some((pe, pf))
}

/// Best admissible ROC point for a fixed slot count: minimal `P_e` among
/// points with `P_f < ratio * P_e`, ties to the smaller `K_0`.
pub fn best_over_k0(spec: &SearchSpec, ebno_db: f64, l: u32, roc: &RocTable) -> Option<OperatingPoint> {
    let mut best: Option<OperatingPoint> = None;
    for row in roc.rows() {
        let Some((pe, pf)) = evaluate_roc_point(spec, l, row.p_m, row.p_f) else { continue };
        if pf.partial_cmp(&(spec.pf_pe_ratio * pe)) != Some(core::cmp::Ordering::Less) {
            continue;
        }
        if best.is_none_or(|b| pe < b.pe) {
            best = Some(OperatingPoint { ebno_db, l, k0: row.k0, p_m: row.p_m, p_f: row.p_f, pe, pf });
        }
    }
    best
}

fn pe_of(p: &Option<OperatingPoint>) -> f64 {
    p.map_or(1.0, |p| p.pe)
}

/// Best point over the slot count at one `E_b/N_0`.
///
/// Walks `L` upward from `l_min` and stops at the first local minimum whose
/// right neighbour is strictly worse; one extra probe past it checks the
/// single-minimum assumption and triggers a full scan if it fails.
pub fn best_over_l(spec: &SearchSpec, family: &mut dyn RocFamily, ebno_db: f64) -> Option<OperatingPoint> {
    let mut eval = |l: u32| family.roc(ebno_db, l).and_then(|roc| best_over_k0(spec, ebno_db, l, roc));
    let mut best: Option<OperatingPoint> = None;
    let mut prev_pe = f64::INFINITY;
    let mut l = spec.l_min;
    let mut stopped_at = None;
    while l <= spec.l_max {
        let p = eval(l);
        let pe = pe_of(&p);
        if pe < pe_of(&best) {
            best = p;
        }
        if pe > prev_pe && prev_pe <= pe_of(&best) {
            stopped_at = Some(l);
            break;
        }
        prev_pe = pe;
        l += 1;
    }
    if let Some(stop) = stopped_at {
        if stop < spec.l_max {
            let probe = eval(stop + 1);
            if pe_of(&probe) < pe_of(&best) {
                best = probe;
                for l in stop + 2..=spec.l_max {
                    let p = eval(l);
                    if pe_of(&p) < pe_of(&best) {
                        best = p;
                    }
                }
            }
        }
    }
    best
}

/// Smallest grid `E_b/N_0` at which some `(L, K_0)` meets `P_e < pe_target`
/// and `P_f < pf_target`.
pub fn min_ebno_search(spec: &SearchSpec, family: &mut dyn RocFamily) -> SearchOutcome {
    let mut grid = spec.ebno_grid.clone();
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    for ebno in grid {
        if let Some(p) = best_over_l(spec, family, ebno) {
            if p.pe < spec.pe_target && p.pf < spec.pf_target {
                return SearchOutcome::Feasible(p);
            }
        }
    }
    SearchOutcome::Saturated
}
