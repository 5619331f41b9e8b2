//! Parallel Monte Carlo drivers.
//!
//! Work is cut into fixed-size chunks of trial indices that do not depend on
//! the worker count, and chunk counters are merged in index order, so results
//! are identical for any `--workers`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use ccs_core::bounds::{ebno_key, RocFamily};
use ccs_core::phy::{gen_codebook, power_from_ebno, roc_trials, ChannelKind, InnerCodebook, RocCounters, RocMeta, RocParams, RocTable};
use ccs_core::sim::{FrameCounters, Scenario, ScenarioConfig, SimResult};

use crate::config::slot_length;

const ROC_CHUNK: u64 = 16;
const FRAME_CHUNK: u64 = 8;

/// Thread pool with `workers` threads; `0` means one per available core.
pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build()
}

fn chunks(total: u64, size: u64) -> Vec<std::ops::Range<u64>> {
    (0..total.div_ceil(size)).map(|i| i * size..((i + 1) * size).min(total)).collect()
}

pub fn par_roc_counters(codebook: &InnerCodebook, params: &RocParams) -> ccs_core::Result<RocCounters> {
    let parts: Vec<ccs_core::Result<RocCounters>> =
        chunks(params.trials, ROC_CHUNK).into_par_iter().map(|r| roc_trials(codebook, params, r)).collect();
    let mut total = RocCounters::new(params.k0_max);
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

pub fn par_frame_counters(scenario: &Scenario) -> ccs_core::Result<FrameCounters> {
    let trials = scenario.config().trials;
    let parts: Vec<ccs_core::Result<FrameCounters>> =
        chunks(trials, FRAME_CHUNK).into_par_iter().map(|r| scenario.run_range(r)).collect();
    let mut total = FrameCounters::default();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

pub fn par_estimate_rates(cfg: &ScenarioConfig) -> ccs_core::Result<SimResult> {
    let scenario = Scenario::new(cfg.clone())?;
    Ok(par_frame_counters(&scenario)?.result())
}

/// ROC geometry for a family of `(E_b/N_0, L)` tables over a frame of `n`
/// channel uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocGeometry {
    pub q: usize,
    pub ka: u32,
    pub channel: ChannelKind,
    pub k: u32,
    pub n: usize,
    pub k0_max: usize,
    pub trials: u64,
    pub seed: u64,
}

impl RocGeometry {
    /// Slot length `floor(n / L)` and the power giving `ebno_db` over the
    /// `L * n1` channel uses actually spent.
    pub fn slot(&self, ebno_db: f64, l: u32) -> (usize, f64) {
        let n1 = slot_length(self.n, l);
        (n1, power_from_ebno(ebno_db, n1 * l as usize, self.k))
    }
}

/// ROC tables estimated on first use. One unit-power codebook is drawn per
/// slot length and rescaled for each SNR, so all points at a given `L` share
/// codebook directions and trial randomness.
pub struct SimulatedRocFamily {
    geometry: RocGeometry,
    codebooks: HashMap<usize, InnerCodebook>,
    tables: BTreeMap<(i64, u32), RocTable>,
    error: Option<ccs_core::Error>,
}

impl SimulatedRocFamily {
    pub fn new(geometry: RocGeometry) -> Self {
        SimulatedRocFamily { geometry, codebooks: HashMap::new(), tables: BTreeMap::new(), error: None }
    }

    pub fn table(&mut self, ebno_db: f64, l: u32) -> ccs_core::Result<&RocTable> {
        let key = (ebno_key(ebno_db), l);
        if !self.tables.contains_key(&key) {
            let table = self.estimate(ebno_db, l)?;
            self.tables.insert(key, table);
        }
        Ok(&self.tables[&key])
    }

    fn estimate(&mut self, ebno_db: f64, l: u32) -> ccs_core::Result<RocTable> {
        let g = self.geometry;
        let (n1, power) = g.slot(ebno_db, l);
        let base = match self.codebooks.entry(n1) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => e.insert(gen_codebook(n1, g.q, 1.0, g.seed)?),
        };
        let codebook = base.rescaled(power)?;
        let params = RocParams {
            n1,
            q: g.q,
            power,
            ka: g.ka,
            channel: g.channel,
            k0_max: g.k0_max,
            trials: g.trials,
            seed: g.seed,
        };
        let counters = par_roc_counters(&codebook, &params)?;
        counters.table(RocMeta { ebno_db, l, n1, q: g.q, ka: g.ka, channel: g.channel })
    }

    /// Every table computed so far, ordered by `(E_b/N_0, L)`.
    pub fn tables(&self) -> impl Iterator<Item = &RocTable> {
        self.tables.values()
    }

    /// First estimation failure, if any. Lookups after a failure return `None`.
    pub fn take_error(&mut self) -> Option<ccs_core::Error> {
        self.error.take()
    }
}

impl RocFamily for SimulatedRocFamily {
    fn roc(&mut self, ebno_db: f64, l: u32) -> Option<&RocTable> {
        if self.error.is_some() {
            return None;
        }
        let key = (ebno_key(ebno_db), l);
        if let Err(e) = self.table(ebno_db, l) {
            self.error = Some(e);
            return None;
        }
        self.tables.get(&key)
    }
}
