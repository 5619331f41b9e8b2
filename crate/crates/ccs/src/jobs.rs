//! One function per CLI subcommand: validated config in, CSV rows out.
//! Parallel work runs on the caller's current rayon pool.

use std::path::Path;

use ccs_core::achannel::{capacity_estimate, concatenated_rate, OuterChannelParams};
use ccs_core::bounds::{
    expected_false_paths, expected_paths, greedy_bit_allocation, rcb_error_prob, rcb_false_alarm,
    rcb_false_alarm_corollary, min_ebno_search, ttree_bound, RocFamily, SearchOutcome, TreeBoundConfig,
};
use ccs_core::phy::RocMeta;
use ccs_core::sim::{LinkModel, ScenarioConfig, SimResult};

use crate::config::{AllocJob, CapacityJob, ConfigError, OptimizeJob, RcbJob, RcbMode, RocJob, RocSource, SimulateJob, TreeBoundJob};
use crate::drivers::{par_estimate_rates, RocGeometry, SimulatedRocFamily};
use crate::formats::{self, AllocRow, CapacityRow, CsvRecord, CurveRow, FormatError, RocRow, SimRow, TreeBoundRow};

#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Compute(#[from] ccs_core::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
}

pub fn capacity(job: &CapacityJob) -> Result<Vec<CapacityRow>, JobError> {
    job.validate()?;
    job.points
        .iter()
        .map(|p| {
            let params = OuterChannelParams::new(job.q, job.ka, p.p_m, p.p_f)?;
            let c = capacity_estimate(&params);
            Ok(CapacityRow {
                q: job.q,
                ka: job.ka,
                n1: p.n1,
                p_m: p.p_m,
                p_f: p.p_f,
                capacity: c,
                rate: concatenated_rate(c, job.ka, p.n1),
            })
        })
        .collect()
}

pub fn rcb(job: &RcbJob) -> Result<Vec<CurveRow>, JobError> {
    job.validate()?;
    job.points
        .iter()
        .map(|p| {
            let cfg = job.core(p);
            let pf = match job.mode {
                RcbMode::Exact => rcb_false_alarm(&cfg)?,
                RcbMode::Corollary => rcb_false_alarm_corollary(&cfg)?.pf,
            };
            Ok(CurveRow {
                ka: job.ka,
                t: p.t,
                ebno_db: None,
                l: Some(p.l),
                k0: None,
                pe: Some(rcb_error_prob(p.l, p.t, p.p_m)),
                pf: Some(pf),
            })
        })
        .collect()
}

pub fn tree_bound(job: &TreeBoundJob) -> Result<Vec<TreeBoundRow>, JobError> {
    job.validate()?;
    let cfg = job.core();
    let total = ttree_bound(&cfg)?;
    (1..=cfg.len())
        .map(|level| {
            Ok(TreeBoundRow {
                level: level as u32,
                bits: cfg.bit_allocation[level - 1],
                v_bar: expected_paths(&cfg, level)?,
                v_bar_false: expected_false_paths(&cfg, level)?,
                pe: total.pe,
                pf: total.pf_bound,
            })
        })
        .collect()
}

pub fn alloc(job: &AllocJob) -> Result<AllocRow, JobError> {
    job.validate()?;
    let p = job.core();
    let mut row = AllocRow { ka: job.ka, t: job.t, v_star: job.v_star, l: None, allocation: None, max_paths: None };
    if let Some(a) = greedy_bit_allocation(&p) {
        let cfg = TreeBoundConfig { bit_allocation: a.clone(), c: p.c, ka: p.ka, p_m: p.p_m, p_f: p.p_f, t: p.t };
        row.max_paths = Some(ttree_bound(&cfg)?.max_paths);
        row.l = Some(a.len() as u32);
        row.allocation = Some(a);
    }
    Ok(row)
}

fn roc_geometry(job: &RocJob) -> RocGeometry {
    RocGeometry {
        q: job.q,
        ka: job.ka,
        channel: job.channel.into(),
        k: job.k,
        n: job.n,
        k0_max: job.k0_max,
        trials: job.trials,
        seed: job.seed,
    }
}

/// Rows ordered by `L`, then `E_b/N_0` in config order, then `K_0`.
pub fn roc(job: &RocJob) -> Result<Vec<RocRow>, JobError> {
    job.validate()?;
    let mut family = SimulatedRocFamily::new(roc_geometry(job));
    let mut rows = Vec::new();
    for &l in &job.l {
        for &e in &job.ebno_db {
            rows.extend(formats::roc_rows(family.table(e, l)?));
        }
    }
    Ok(rows)
}

/// Row for `cfg` with the estimates zeroed.
fn blank_row(cfg: &ScenarioConfig, scheme: &str) -> SimRow {
    SimRow {
        scheme: scheme.into(),
        ka: cfg.ka,
        t: cfg.t(),
        ebno_db: cfg.reported_ebno_db(),
        l: cfg.l() as u32,
        k0: match cfg.link {
            LinkModel::Physical { k0, .. } => Some(k0 as u32),
            LinkModel::Abstract { .. } => None,
        },
        pupe: 0.0,
        pupe_ci: 0.0,
        far_frame: 0.0,
        false_mean: 0.0,
        trials: cfg.trials,
        seed: cfg.seed,
    }
}

pub fn sim_row(cfg: &ScenarioConfig, scheme: &str, r: &SimResult) -> SimRow {
    SimRow {
        pupe: r.pupe.estimate,
        pupe_ci: r.pupe.half_width(),
        far_frame: r.far_frame.estimate,
        false_mean: r.false_mean.estimate,
        trials: r.trials,
        ..blank_row(cfg, scheme)
    }
}

/// Columns identifying a sweep cell: everything except the estimates.
fn cell_key(row: &SimRow) -> Vec<String> {
    let f = row.fields();
    [0, 1, 2, 3, 4, 5, 10, 11].iter().map(|&i| f[i].clone()).collect()
}

/// One row per grid cell. Cells already present in `done` (same scheme,
/// parameters, trial count and seed) are reused instead of re-simulated;
/// this assumes `done` came from the same config.
pub fn simulate(job: &SimulateJob, done: &[SimRow]) -> Result<(Vec<SimRow>, usize), JobError> {
    let scheme = job.outer.scheme_name();
    let mut rows = Vec::new();
    let mut reused = 0;
    for cfg in job.scenarios()? {
        let key = cell_key(&blank_row(&cfg, scheme));
        if let Some(prev) = done.iter().find(|r| cell_key(r) == key) {
            rows.push(prev.clone());
            reused += 1;
            continue;
        }
        rows.push(sim_row(&cfg, scheme, &par_estimate_rates(&cfg)?));
    }
    Ok((rows, reused))
}

/// Minimum feasible `E_b/N_0` per `t`. ROC tables come from `family`, which
/// is shared across all `t` so each `(E_b/N_0, L)` is estimated once.
pub fn optimize_with(job: &OptimizeJob, family: &mut dyn RocFamily) -> Vec<CurveRow> {
    job.t
        .iter()
        .map(|&t| match min_ebno_search(&job.search_spec(t), family) {
            SearchOutcome::Feasible(p) => CurveRow {
                ka: job.ka,
                t,
                ebno_db: Some(p.ebno_db),
                l: Some(p.l),
                k0: Some(p.k0),
                pe: Some(p.pe),
                pf: Some(p.pf),
            },
            SearchOutcome::Saturated => saturated(job.ka, t),
        })
        .collect()
}

pub fn saturated(ka: u32, t: u32) -> CurveRow {
    CurveRow { ka, t, ebno_db: Some(f64::INFINITY), l: None, k0: None, pe: None, pf: None }
}

/// Run the search with the configured ROC source. `base` resolves a relative
/// CSV path.
pub fn optimize(job: &OptimizeJob, base: &Path) -> Result<Vec<CurveRow>, JobError> {
    job.validate()?;
    match &job.roc {
        RocSource::Simulate { k0_max, trials, seed } => {
            let mut family = SimulatedRocFamily::new(RocGeometry {
                q: 1 << job.c,
                ka: job.ka,
                channel: job.channel.into(),
                k: job.k,
                n: job.n,
                k0_max: *k0_max,
                trials: *trials,
                seed: *seed,
            });
            let rows = optimize_with(job, &mut family);
            if let Some(e) = family.take_error() {
                return Err(e.into());
            }
            Ok(rows)
        }
        RocSource::Csv { path } => {
            let path = base.join(path);
            let rows = formats::read::<RocRow>(&path)?;
            let template =
                RocMeta { ebno_db: 0.0, l: 0, n1: 0, q: 1 << job.c, ka: job.ka, channel: job.channel.into() };
            let mut family = formats::roc_family(&rows, template, job.n)?;
            Ok(optimize_with(job, &mut family))
        }
    }
}
