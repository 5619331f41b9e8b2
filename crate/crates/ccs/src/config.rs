//! JSON job configurations.
//!
//! Parsing is strict: unknown keys are rejected and every physical parameter
//! must be spelled out. Enums are externally tagged, e.g.
//! `{"abstract": {"p_m": 0.05, "p_f": 0.001}}`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ccs_core::bounds::{BoundEvaluator, SearchSpec, EXACT_MAX_LOG2_M};
use ccs_core::phy::ChannelKind;
use ccs_core::rs::{CosetSchemeConfig, PayloadMode};
use ccs_core::sim::{LinkModel, OuterScheme, ScenarioConfig};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl From<ccs_core::Error> for ConfigError {
    fn from(e: ccs_core::Error) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Read and strictly parse a JSON config. Parse errors carry line and column.
pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
    parse(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, serde_json::Error> {
    serde_json::from_str(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Rayleigh,
    Awgn,
}

impl From<Channel> for ChannelKind {
    fn from(c: Channel) -> Self {
        match c {
            Channel::Rayleigh => ChannelKind::Rayleigh,
            Channel::Awgn => ChannelKind::Awgn,
        }
    }
}

fn check_prob(name: &str, p: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {p} is not a probability")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityJob {
    pub q: u64,
    pub ka: u32,
    pub points: Vec<CapacityPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityPoint {
    pub n1: usize,
    pub p_m: f64,
    pub p_f: f64,
}

impl CapacityJob {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.q < 2 || self.ka == 0 {
            return Err(invalid("need q >= 2 and ka >= 1"));
        }
        for p in &self.points {
            check_prob("p_m", p.p_m)?;
            check_prob("p_f", p.p_f)?;
            if p.n1 == 0 {
                return Err(invalid("n1 must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RcbMode {
    Exact,
    Corollary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RcbJob {
    /// Message bits, `M = 2^k`.
    pub k: u32,
    pub q: u64,
    pub ka: u32,
    pub mode: RcbMode,
    pub points: Vec<RcbPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RcbPoint {
    #[serde(rename = "L")]
    pub l: u32,
    pub t: u32,
    pub p_m: f64,
    pub p_f: f64,
}

impl RcbJob {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.mode == RcbMode::Exact && self.k > EXACT_MAX_LOG2_M {
            return Err(invalid(format!(
                "exact mode supports k <= {EXACT_MAX_LOG2_M}; use \"mode\": \"corollary\""
            )));
        }
        for p in &self.points {
            self.core(p).validate()?;
        }
        Ok(())
    }

    pub fn core(&self, p: &RcbPoint) -> ccs_core::bounds::RcbConfig {
        ccs_core::bounds::RcbConfig { log2_m: self.k, l: p.l, q: self.q, t: p.t, ka: self.ka, p_m: p.p_m, p_f: p.p_f }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeBoundJob {
    pub allocation: Vec<u32>,
    pub c: u32,
    pub ka: u32,
    pub t: u32,
    pub p_m: f64,
    pub p_f: f64,
}

impl TreeBoundJob {
    pub fn core(&self) -> ccs_core::bounds::TreeBoundConfig {
        ccs_core::bounds::TreeBoundConfig {
            bit_allocation: self.allocation.clone(),
            c: self.c,
            ka: self.ka,
            p_m: self.p_m,
            p_f: self.p_f,
            t: self.t,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        Ok(self.core().validate()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocJob {
    pub k: u32,
    pub c: u32,
    pub ka: u32,
    pub t: u32,
    pub p_m: f64,
    pub p_f: f64,
    /// Path budget `V*`.
    pub v_star: f64,
    pub l_max: u32,
}

impl AllocJob {
    pub fn core(&self) -> ccs_core::bounds::GreedyParams {
        ccs_core::bounds::GreedyParams {
            k: self.k,
            c: self.c,
            ka: self.ka,
            p_m: self.p_m,
            p_f: self.p_f,
            t: self.t,
            v_star: self.v_star,
            l_max: self.l_max,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check_prob("p_m", self.p_m)?;
        check_prob("p_f", self.p_f)?;
        if self.k == 0 || self.c == 0 || self.c > 32 || self.ka == 0 || self.l_max == 0 {
            return Err(invalid("need k >= 1, 1 <= c <= 32, ka >= 1 and l_max >= 1"));
        }
        if self.v_star.is_nan() || self.v_star <= 0.0 {
            return Err(invalid("v_star must be positive"));
        }
        Ok(())
    }
}

/// Slot geometry shared by ROC and optimisation jobs: a frame of `n` channel
/// uses split into `L` slots of `floor(n / L)` uses each.
pub fn slot_length(n: usize, l: u32) -> usize {
    n / l as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RocJob {
    pub q: usize,
    pub ka: u32,
    pub channel: Channel,
    /// Information bits per user; fixes the energy accounting.
    pub k: u32,
    /// Frame length in channel uses.
    pub n: usize,
    #[serde(rename = "L")]
    pub l: Vec<u32>,
    pub ebno_db: Vec<f64>,
    pub k0_max: usize,
    pub trials: u64,
    pub seed: u64,
}

impl RocJob {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.q < 2 || self.ka == 0 || self.k == 0 || self.trials == 0 {
            return Err(invalid("need q >= 2, ka >= 1, k >= 1 and trials >= 1"));
        }
        if self.k0_max == 0 || self.k0_max > self.q {
            return Err(invalid("need 1 <= k0_max <= q"));
        }
        if self.l.is_empty() || self.ebno_db.is_empty() {
            return Err(invalid("L and ebno_db must be non-empty"));
        }
        for &l in &self.l {
            if l == 0 || slot_length(self.n, l) == 0 {
                return Err(invalid(format!("L = {l} leaves no channel uses per slot")));
            }
        }
        if self.ebno_db.iter().any(|e| !e.is_finite()) {
            return Err(invalid("ebno_db values must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Link {
    Abstract { p_m: f64, p_f: f64 },
    Physical { channel: Channel, ebno_db: f64, n: usize, k0: usize, codebook_seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Charged,
    Carried,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Outer {
    Ttree {
        allocation: Vec<u32>,
        c: u32,
        t: u32,
        /// Absent or `null`: uncapped.
        path_cap: Option<usize>,
        generator_seed: u64,
    },
    RsCoset {
        c: u32,
        x_p: u32,
        k: u32,
        h: u32,
        k_o: usize,
        #[serde(rename = "L")]
        l: usize,
        payload: Payload,
        /// Uniform GS multiplicity.
        m: u32,
    },
}

impl Outer {
    pub fn scheme_name(&self) -> &'static str {
        match self {
            Outer::Ttree { .. } => "ttree",
            Outer::RsCoset { .. } => "rs_coset",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateJob {
    pub ka: u32,
    pub link: Link,
    pub outer: Outer,
    pub trials: u64,
    pub seed: u64,
    pub truncate_to_ka: bool,
    /// Sweep grid for a physical link; each value replaces `link.ebno_db`.
    /// Absent or `null`: a single run.
    pub ebno_grid: Option<Vec<f64>>,
}

impl SimulateJob {
    /// One scenario per grid cell, in grid order.
    pub fn scenarios(&self) -> Result<Vec<ScenarioConfig>, ConfigError> {
        let base = self.scenario(None);
        let cells = match (&self.ebno_grid, &self.link) {
            (None, _) => vec![base],
            (Some(_), Link::Abstract { .. }) => return Err(invalid("ebno_grid needs a physical link")),
            (Some(grid), Link::Physical { .. }) => {
                if grid.is_empty() {
                    return Err(invalid("ebno_grid must be non-empty"));
                }
                grid.iter().map(|&e| self.scenario(Some(e))).collect()
            }
        };
        for c in &cells {
            c.validate()?;
        }
        Ok(cells)
    }

    fn scenario(&self, ebno_override: Option<f64>) -> ScenarioConfig {
        let link = match self.link {
            Link::Abstract { p_m, p_f } => LinkModel::Abstract { p_m, p_f },
            Link::Physical { channel, ebno_db, n, k0, codebook_seed } => LinkModel::Physical {
                channel: channel.into(),
                ebno_db: ebno_override.unwrap_or(ebno_db),
                n,
                k0,
                codebook_seed,
            },
        };
        let outer = match &self.outer {
            Outer::Ttree { allocation, c, t, path_cap, generator_seed } => OuterScheme::TTree {
                allocation: allocation.clone(),
                c: *c,
                t: *t,
                path_cap: *path_cap,
                generator_seed: *generator_seed,
            },
            Outer::RsCoset { c, x_p, k, h, k_o, l, payload, m } => OuterScheme::RsCoset {
                config: CosetSchemeConfig {
                    c: *c,
                    x_p: *x_p,
                    k: *k,
                    h: *h,
                    k_o: *k_o,
                    l: *l,
                    mode: match payload {
                        Payload::Charged => PayloadMode::Charged,
                        Payload::Carried => PayloadMode::Carried,
                    },
                },
                m: *m,
            },
        };
        ScenarioConfig {
            ka: self.ka,
            link,
            outer,
            trials: self.trials,
            seed: self.seed,
            truncate_to_ka: self.truncate_to_ka,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Evaluator {
    Rcb { exact: bool },
    Ttree { v_star: f64 },
}

impl From<Evaluator> for BoundEvaluator {
    fn from(e: Evaluator) -> Self {
        match e {
            Evaluator::Rcb { exact } => BoundEvaluator::Rcb { exact },
            Evaluator::Ttree { v_star } => BoundEvaluator::TTree { v_star },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Targets {
    pub pe: f64,
    pub pf: f64,
    /// Admissible ROC points satisfy `P_f < pf_pe_ratio * P_e`.
    pub pf_pe_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RocSource {
    /// Estimate tables on demand.
    Simulate { k0_max: usize, trials: u64, seed: u64 },
    /// Precomputed ROC CSV; relative paths resolve against the config file.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeJob {
    pub k: u32,
    /// Bits per slot symbol, `Q = 2^c`.
    pub c: u32,
    pub ka: u32,
    pub t: Vec<u32>,
    pub channel: Channel,
    pub n: usize,
    pub evaluator: Evaluator,
    pub ebno_db: Vec<f64>,
    pub l_min: u32,
    pub l_max: u32,
    pub targets: Targets,
    pub roc: RocSource,
}

impl OptimizeJob {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 || self.k > 128 || self.c == 0 || self.c > 16 || self.ka == 0 {
            return Err(invalid("need 1 <= k <= 128, 1 <= c <= 16 and ka >= 1"));
        }
        if self.t.is_empty() || self.ebno_db.is_empty() {
            return Err(invalid("t and ebno_db must be non-empty"));
        }
        if self.ebno_db.iter().any(|e| !e.is_finite()) {
            return Err(invalid("ebno_db values must be finite"));
        }
        if self.l_min == 0 || self.l_min > self.l_max || slot_length(self.n, self.l_max) == 0 {
            return Err(invalid("need 1 <= l_min <= l_max and n >= l_max"));
        }
        if let Evaluator::Rcb { exact: true } = self.evaluator {
            if self.k > EXACT_MAX_LOG2_M {
                return Err(invalid(format!("exact RCB supports k <= {EXACT_MAX_LOG2_M}")));
            }
        }
        if let Evaluator::Ttree { v_star } = self.evaluator {
            if v_star.is_nan() || v_star <= 0.0 {
                return Err(invalid("v_star must be positive"));
            }
        }
        let tg = self.targets;
        if !(tg.pe > 0.0 && tg.pf > 0.0 && tg.pf_pe_ratio > 0.0) {
            return Err(invalid("targets must be positive"));
        }
        if let RocSource::Simulate { k0_max, trials, .. } = self.roc {
            if k0_max == 0 || k0_max > 1 << self.c || trials == 0 {
                return Err(invalid("need 1 <= k0_max <= 2^c and trials >= 1"));
            }
        }
        Ok(())
    }

    pub fn search_spec(&self, t: u32) -> SearchSpec {
        SearchSpec {
            k: self.k,
            c: self.c,
            ka: self.ka,
            t,
            evaluator: self.evaluator.into(),
            pe_target: self.targets.pe,
            pf_target: self.targets.pf,
            pf_pe_ratio: self.targets.pf_pe_ratio,
            ebno_grid: self.ebno_db.clone(),
            l_min: self.l_min,
            l_max: self.l_max,
        }
    }
}

/// Accepted keys per job, as printed by `--help`.
pub mod keys {
    pub const CAPACITY: &str = "\
Config keys (JSON, all required):
  q        slot alphabet size Q
  ka       active users K_a
  points   list of {n1, p_m, p_f}: slot length and inner-decoder operating point";

    pub const RCB: &str = "\
Config keys (JSON, all required):
  k        message bits (M = 2^k)
  q        slot alphabet size Q
  ka       active users K_a
  mode     \"exact\" (k <= 40) or \"corollary\"
  points   list of {L, t, p_m, p_f}";

    pub const TTREE_BOUND: &str = "\
Config keys (JSON, all required):
  allocation  information bits per slot b_1..b_L
  c           bits per slot symbol
  ka          active users K_a
  t           uncovered positions tolerated
  p_m         inner miss probability
  p_f         inner false-alarm probability";

    pub const ALLOC: &str = "\
Config keys (JSON, all required):
  k        message bits
  c        bits per slot symbol
  ka       active users K_a
  t        uncovered positions tolerated
  p_m      inner miss probability
  p_f      inner false-alarm probability
  v_star   path budget V*
  l_max    largest slot count tried";

    pub const ROC: &str = "\
Config keys (JSON, all required):
  q        codebook size Q
  ka       active users K_a
  channel  \"rayleigh\" or \"awgn\"
  k        information bits per user (energy accounting)
  n        frame length; each of the L slots gets floor(n / L) channel uses
  L        list of slot counts
  ebno_db  list of E_b/N_0 values in dB
  k0_max   largest OMP list size recorded
  trials   slots simulated per (ebno_db, L)
  seed     master seed (overridden by --seed / CCS_SEED)";

    pub const SIMULATE: &str = "\
Config keys (JSON):
  ka             active users K_a
  link           {\"abstract\": {p_m, p_f}} or
                 {\"physical\": {channel, ebno_db, n, k0, codebook_seed}}
  outer          {\"ttree\": {allocation, c, t, path_cap, generator_seed}} or
                 {\"rs_coset\": {c, x_p, k, h, k_o, L, payload, m}}
                 payload is \"charged\" or \"carried\"; path_cap may be null
  trials         frames per grid cell
  seed           master seed (overridden by --seed / CCS_SEED)
  truncate_to_ka keep only the K_a closest t-tree candidates
  ebno_grid      optional list of E_b/N_0 values swept over a physical link";

    pub const OPTIMIZE: &str = "\
Config keys (JSON, all required):
  k          message bits
  c          bits per slot symbol (Q = 2^c)
  ka         active users K_a
  t          list of error budgets, one output row each
  channel    \"rayleigh\" or \"awgn\"
  n          frame length in channel uses
  evaluator  {\"rcb\": {exact}} or {\"ttree\": {v_star}}
  ebno_db    E_b/N_0 grid in dB
  l_min      smallest slot count
  l_max      largest slot count
  targets    {pe, pf, pf_pe_ratio}
  roc        {\"simulate\": {k0_max, trials, seed}} or {\"csv\": {path}}";
}
