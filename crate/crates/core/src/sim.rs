//! Frame-level Monte Carlo: messages -> outer encoder -> slot channel ->
//! inner list decoder (or the abstract outer channel) -> outer decoder.
//!
//! Frame `i` draws all of its randomness from stream `(seed, FRAME, i)`, so
//! [`Scenario::run_range`] over any partition of the frames merges to the
//! same counters.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::achannel::{a_channel_union, apply_symbol_noise, OuterChannelParams, ReceivedLists, SlotSymbolSet};
use crate::error::{domain, Error, Result};
use crate::phy::{draw_gains, gen_codebook, omp_decode, power_from_ebno, transmit_slot, ChannelKind, InnerCodebook};
use crate::rng::{domain as stream_domain, stream};
use crate::rs::{coset_decode, coset_encode, CosetScheme, CosetSchemeConfig};
use crate::ttree::{build_generator, decode, encode, TreeCodeSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum LinkModel {
    /// Skip the physical layer: slot lists come from the A-channel with
    /// per-element miss/false-alarm noise.
    Abstract { p_m: f64, p_f: f64 },
    /// Spherical inner code over the fading MAC with OMP list size `k0`.
    Physical { channel: ChannelKind, ebno_db: f64, n: usize, k0: usize, codebook_seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OuterScheme {
    TTree { allocation: Vec<u32>, c: u32, t: u32, path_cap: Option<usize>, generator_seed: u64 },
    RsCoset { config: CosetSchemeConfig, m: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub ka: u32,
    pub link: LinkModel,
    pub outer: OuterScheme,
    pub trials: u64,
    pub seed: u64,
    /// Keep only the `K_a` candidates closest to the slot lists (t-tree only).
    pub truncate_to_ka: bool,
}

impl ScenarioConfig {
    pub fn k(&self) -> u32 {
        match &self.outer {
            OuterScheme::TTree { allocation, .. } => allocation.iter().sum(),
            OuterScheme::RsCoset { config, .. } => config.k,
        }
    }

    pub fn c(&self) -> u32 {
        match &self.outer {
            OuterScheme::TTree { c, .. } => *c,
            OuterScheme::RsCoset { config, .. } => config.c,
        }
    }

    pub fn l(&self) -> usize {
        match &self.outer {
            OuterScheme::TTree { allocation, .. } => allocation.len(),
            OuterScheme::RsCoset { config, .. } => config.l,
        }
    }

    /// Error-correction budget of the outer decoder (`None` for RS, whose
    /// radius depends on the list sizes).
    pub fn t(&self) -> Option<u32> {
        match &self.outer {
            OuterScheme::TTree { t, .. } => Some(*t),
            OuterScheme::RsCoset { .. } => None,
        }
    }

    /// `E_b/N_0` to report: the simulated value plus any charged-CRC penalty.
    pub fn reported_ebno_db(&self) -> Option<f64> {
        let LinkModel::Physical { ebno_db, .. } = self.link else { return None };
        Some(match &self.outer {
            OuterScheme::RsCoset { config, .. } => ebno_db + config.ebno_correction_db(),
            OuterScheme::TTree { .. } => ebno_db,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.ka == 0 {
            return Err(domain("need at least one active user"));
        }
        if self.trials == 0 {
            return Err(domain("need at least one trial"));
        }
        if self.c() > 24 {
            return Err(domain("slot alphabets above 2^24 are not simulated"));
        }
        match &self.outer {
            OuterScheme::TTree { t, allocation, path_cap, .. } => {
                if *t as usize > allocation.len() {
                    return Err(domain("t must not exceed L"));
                }
                if *path_cap == Some(0) {
                    return Err(domain("path cap must be at least 1"));
                }
            }
            OuterScheme::RsCoset { config, m } => {
                config.validate()?;
                if *m == 0 {
                    return Err(domain("multiplicity must be positive"));
                }
                if self.truncate_to_ka {
                    return Err(Error::Unsupported("truncation is only defined for the t-tree decoder".into()));
                }
            }
        }
        match self.link {
            LinkModel::Abstract { p_m, p_f } => {
                OuterChannelParams::new(1 << self.c(), self.ka, p_m, p_f)?;
            }
            LinkModel::Physical { n, k0, ebno_db, .. } => {
                let l = self.l();
                if n == 0 || n % l != 0 {
                    return Err(domain(alloc::format!("frame length {n} is not a multiple of L = {l}")));
                }
                if k0 == 0 || k0 > 1usize << self.c() {
                    return Err(domain("need 1 <= K0 <= Q"));
                }
                if !ebno_db.is_finite() {
                    return Err(domain("E_b/N_0 must be finite"));
                }
            }
        }
        Ok(())
    }
}

enum Outer {
    Tree { spec: TreeCodeSpec, t: u32, path_cap: Option<usize> },
    Rs { scheme: CosetScheme, m: u32 },
}

/// A configuration with its codes and codebook built, ready to run frames.
pub struct Scenario {
    cfg: ScenarioConfig,
    outer: Outer,
    codebook: Option<InnerCodebook>,
}

/// Outcome of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameOutcome {
    /// Users whose message is absent from the decoder output.
    pub missed: u32,
    /// Output messages that nobody sent.
    pub false_count: u32,
    /// The t-tree path cap was hit.
    pub overflow: bool,
}

/// Mergeable frame tallies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameCounters {
    pub frames: u64,
    pub users: u64,
    pub missed: u64,
    pub false_total: u64,
    pub false_sq: u64,
    pub frames_with_false: u64,
    pub overflow_frames: u64,
}

impl FrameCounters {
    pub fn record(&mut self, ka: u32, o: &FrameOutcome) {
        self.frames += 1;
        self.users += ka as u64;
        self.missed += o.missed as u64;
        self.false_total += o.false_count as u64;
        self.false_sq += (o.false_count as u64).pow(2);
        self.frames_with_false += (o.false_count > 0) as u64;
        self.overflow_frames += o.overflow as u64;
    }

    pub fn merge(&mut self, other: &FrameCounters) {
        self.frames += other.frames;
        self.users += other.users;
        self.missed += other.missed;
        self.false_total += other.false_total;
        self.false_sq += other.false_sq;
        self.frames_with_false += other.frames_with_false;
        self.overflow_frames += other.overflow_frames;
    }

    pub fn result(&self) -> SimResult {
        let n = self.frames.max(1) as f64;
        let mean = self.false_total as f64 / n;
        let var = (self.false_sq as f64 / n - mean * mean).max(0.0);
        let half = Z95 * libm::sqrt(var / n);
        SimResult {
            pupe: wilson(self.missed, self.users),
            far_frame: wilson(self.frames_with_false, self.frames),
            false_mean: Interval { estimate: mean, lower: (mean - half).max(0.0), upper: mean + half },
            trials: self.frames,
            overflow_frames: self.overflow_frames,
        }
    }
}

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn half_width(&self) -> f64 {
        (self.upper - self.lower) / 2.0
    }
}

/// Wilson score interval at 95% for `successes` out of `n`.
pub fn wilson(successes: u64, n: u64) -> Interval {
    if n == 0 {
        return Interval { estimate: 0.0, lower: 0.0, upper: 1.0 };
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * libm::sqrt(p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)) / denom;
    let lower = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let upper = if successes == n { 1.0 } else { (center + half).min(1.0) };
    Interval { estimate: p, lower, upper }
}

/// PUPE and FAR estimates. PUPE and the frame FAR use Wilson intervals
/// (PUPE treats the `K_a` users of a frame as independent); the mean false
/// count uses a normal interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub pupe: Interval,
    pub far_frame: Interval,
    pub false_mean: Interval,
    pub trials: u64,
    pub overflow_frames: u64,
}

impl Scenario {
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let outer = match &cfg.outer {
            OuterScheme::TTree { allocation, c, t, path_cap, generator_seed } => {
                Outer::Tree { spec: build_generator(allocation, *c, *generator_seed)?, t: *t, path_cap: *path_cap }
            }
            OuterScheme::RsCoset { config, m } => Outer::Rs { scheme: CosetScheme::new(*config)?, m: *m },
        };
        let codebook = match cfg.link {
            LinkModel::Physical { ebno_db, n, codebook_seed, .. } => {
                let power = power_from_ebno(ebno_db, n, cfg.k());
                Some(gen_codebook(n / cfg.l(), 1 << cfg.c(), power, codebook_seed)?)
            }
            LinkModel::Abstract { .. } => None,
        };
        Ok(Scenario { cfg, outer, codebook })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    /// Frame `index` of the scenario.
    pub fn run_frame_trial(&self, index: u64) -> Result<FrameOutcome> {
        let cfg = &self.cfg;
        let mut rng = stream(cfg.seed, stream_domain::FRAME, index);
        let k = cfg.k();
        let msg_mask = if k == 128 { u128::MAX } else { (1u128 << k) - 1 };
        let messages: Vec<u128> = (0..cfg.ka).map(|_| rng.random::<u128>() & msg_mask).collect();
        let words: Vec<Vec<u32>> = match &self.outer {
            Outer::Tree { spec, .. } => messages.iter().map(|&u| encode(spec, u)).collect::<Result<_>>()?,
            Outer::Rs { scheme, .. } => {
                let x_p = scheme.config().x_p;
                messages
                    .iter()
                    .map(|&u| coset_encode(scheme, u, rng.random_range(0..1u32 << x_p)))
                    .collect::<Result<_>>()?
            }
        };
        let y = self.slot_lists(&words, &mut rng)?;
        let (mut output, overflow): (Vec<u128>, bool) = match &self.outer {
            Outer::Tree { spec, t, path_cap } => {
                let out = decode(spec, &y, *t, *path_cap)?;
                let mut ranked = out.messages;
                if cfg.truncate_to_ka {
                    ranked.sort_unstable_by_key(|&(u, d)| (d, u));
                    ranked.truncate(cfg.ka as usize);
                }
                (ranked.into_iter().map(|(u, _)| u).collect(), out.overflow)
            }
            Outer::Rs { scheme, m } => (coset_decode(scheme, &y, *m)?, false),
        };
        output.sort_unstable();
        let missed = messages.iter().filter(|u| output.binary_search(u).is_err()).count() as u32;
        let mut sent = messages.clone();
        sent.sort_unstable();
        let false_count = output.iter().filter(|u| sent.binary_search(u).is_err()).count() as u32;
        Ok(FrameOutcome { missed, false_count, overflow })
    }

    fn slot_lists<R: Rng>(&self, words: &[Vec<u32>], rng: &mut R) -> Result<ReceivedLists> {
        let cfg = &self.cfg;
        let q = 1u64 << cfg.c();
        let l = cfg.l();
        let column = |j: usize| -> Vec<u32> { words.iter().map(|w| w[j]).collect() };
        let slots = match (&cfg.link, &self.codebook) {
            (LinkModel::Abstract { p_m, p_f }, _) => {
                let params = OuterChannelParams::new(q, cfg.ka, *p_m, *p_f)?;
                (0..l)
                    .map(|j| Ok(apply_symbol_noise(&a_channel_union(&column(j), q)?, &params, rng)))
                    .collect::<Result<Vec<_>>>()?
            }
            (LinkModel::Physical { channel, k0, .. }, Some(cb)) => {
                let gains: Vec<Complex64> = draw_gains(cfg.ka as usize, *channel, rng);
                (0..l)
                    .map(|j| {
                        let obs = transmit_slot(cb, &column(j), &gains, rng)?;
                        let picks = omp_decode(cb, &obs, *k0)?;
                        SlotSymbolSet::from_symbols(picks.into_iter().map(|s| s as u32), q)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            (LinkModel::Physical { .. }, None) => unreachable!("physical scenarios always carry a codebook"),
        };
        ReceivedLists::new(slots)
    }

    pub fn run_range(&self, range: core::ops::Range<u64>) -> Result<FrameCounters> {
        let mut counters = FrameCounters::default();
        for i in range {
            counters.record(self.cfg.ka, &self.run_frame_trial(i)?);
        }
        Ok(counters)
    }
}

/// Sequential estimate over `cfg.trials` frames.
pub fn estimate_rates(cfg: &ScenarioConfig) -> Result<SimResult> {
    let scenario = Scenario::new(cfg.clone())?;
    Ok(scenario.run_range(0..cfg.trials)?.result())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::rcb_error_prob;
    use crate::rs::PayloadMode;
    use alloc::vec;

    fn abstract_tree(p_m: f64, p_f: f64, t: u32, ka: u32, trials: u64, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            ka,
            link: LinkModel::Abstract { p_m, p_f },
            outer: OuterScheme::TTree { allocation: vec![4, 4, 2, 2, 0, 0], c: 5, t, path_cap: None, generator_seed: 3 },
            trials,
            seed,
            truncate_to_ka: false,
        }
    }

    #[test]
    fn noiseless_abstract_is_error_free() {
        let cfg = abstract_tree(0.0, 0.0, 0, 3, 200, 1);
        let scenario = Scenario::new(cfg.clone()).unwrap();
        let mut any_collision_free = false;
        for i in 0..200 {
            let o = scenario.run_frame_trial(i).unwrap();
            assert_eq!(o.missed, 0);
            any_collision_free |= o.false_count == 0;
        }
        assert!(any_collision_free);
        let r = estimate_rates(&cfg).unwrap();
        assert_eq!(r.pupe.estimate, 0.0);
        assert!(r.far_frame.estimate <= r.false_mean.estimate);
    }

    #[test]
    fn abstract_pupe_matches_binomial_tail() {
        for (i, (p_m, t)) in [(0.05, 0u32), (0.1, 1), (0.2, 2), (0.15, 0)].into_iter().enumerate() {
            let cfg = abstract_tree(p_m, 0.01, t, 4, 3000, 10 + i as u64);
            let r = estimate_rates(&cfg).unwrap();
            let p = rcb_error_prob(6, t, p_m);
            let n = (cfg.trials * cfg.ka as u64) as f64;
            // Users in a frame share slot lists; allow for the frame-level clustering.
            let sd = libm::sqrt(p * (1.0 - p) / n * cfg.ka as f64);
            assert!((r.pupe.estimate - p).abs() < 3.0 * sd, "p_m {p_m} t {t}: {} vs {p}", r.pupe.estimate);
        }
    }

    #[test]
    fn split_runs_merge_identically() {
        let cfg = abstract_tree(0.1, 0.02, 1, 5, 100, 7);
        let s = Scenario::new(cfg).unwrap();
        let whole = s.run_range(0..100).unwrap();
        let mut parts = s.run_range(70..100).unwrap();
        parts.merge(&s.run_range(0..70).unwrap());
        assert_eq!(whole, parts);
    }

    #[test]
    fn identical_messages_charge_both_users() {
        // k = 1: with three users at least two share a message.
        let cfg = ScenarioConfig {
            ka: 3,
            link: LinkModel::Abstract { p_m: 1.0, p_f: 0.0 },
            outer: OuterScheme::TTree { allocation: vec![1, 0], c: 2, t: 0, path_cap: None, generator_seed: 0 },
            trials: 10,
            seed: 0,
            truncate_to_ka: false,
        };
        let s = Scenario::new(cfg).unwrap();
        for i in 0..10 {
            assert_eq!(s.run_frame_trial(i).unwrap().missed, 3);
        }
    }

    #[test]
    fn truncation_limits_output() {
        let mut cfg = abstract_tree(0.0, 0.3, 2, 3, 50, 4);
        let loose = estimate_rates(&cfg).unwrap();
        cfg.truncate_to_ka = true;
        let tight = estimate_rates(&cfg).unwrap();
        assert!(tight.false_mean.estimate <= loose.false_mean.estimate);
    }

    #[test]
    fn physical_rs_coset_runs() {
        let cfg = ScenarioConfig {
            ka: 3,
            link: LinkModel::Physical { channel: ChannelKind::Awgn, ebno_db: 12.0, n: 16 * 40, k0: 3, codebook_seed: 2 },
            outer: OuterScheme::RsCoset {
                config: CosetSchemeConfig { c: 8, x_p: 2, k: 24, h: 6, k_o: 5, l: 16, mode: PayloadMode::Carried },
                m: 1,
            },
            trials: 20,
            seed: 5,
            truncate_to_ka: false,
        };
        let r = estimate_rates(&cfg).unwrap();
        assert!(r.pupe.estimate < 0.05, "{:?}", r.pupe);
        assert!(cfg.reported_ebno_db().unwrap() == 12.0);
    }

    #[test]
    fn wilson_interval_properties() {
        let w = wilson(0, 100);
        assert_eq!(w.estimate, 0.0);
        assert!(w.lower == 0.0 && w.upper > 0.0 && w.upper < 0.05);
        let w = wilson(50, 100);
        assert!((w.lower + w.upper - 1.0).abs() < 1e-12);
        assert!(w.lower < 0.5 && w.upper > 0.5);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let mut cfg = abstract_tree(0.1, 0.1, 7, 2, 10, 0);
        assert!(cfg.validate().is_err());
        cfg.outer = OuterScheme::TTree { allocation: vec![4, 4], c: 5, t: 0, path_cap: None, generator_seed: 0 };
        cfg.link = LinkModel::Physical { channel: ChannelKind::Rayleigh, ebno_db: 3.0, n: 101, k0: 4, codebook_seed: 0 };
        assert!(cfg.validate().is_err());
    }
}
