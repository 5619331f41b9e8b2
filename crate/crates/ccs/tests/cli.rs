use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ccs::formats::{self, CsvRecord, CurveRow, SimRow};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn ccs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccs")).args(args).env_remove("CCS_SEED").output().expect("binary runs")
}

fn run_job(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    ccs(&args)
}

fn assert_ok(o: &Output) {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn rcb_single_point_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let o = run_job("rcb", &fixture("rcb.json"), &out, &[]);
    assert_ok(&o);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("Ka,t,ebno_db,L,K0,Pe,Pf\n"));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1);
}

#[test]
fn simulate_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in ["simulate.json", "sweep.json", "rs_coset.json"] {
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        assert_ok(&run_job("simulate", &fixture(cfg), &a, &["--workers", "1"]));
        assert_ok(&run_job("simulate", &fixture(cfg), &b, &["--workers", "3"]));
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{cfg}");
    }
}

#[test]
fn optimize_reproduces_pinned_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("opt.csv");
    let o = run_job("optimize", &fixture("optimize.json"), &out, &["--workers", "2"]);
    assert_ok(&o);
    let expected = std::fs::read_to_string(fixture("optimize.expected.csv")).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), expected);
    let rows: Vec<CurveRow> = formats::read(&out).unwrap();
    assert!(rows[0].is_saturated());
    let p = &rows[1];
    let (pe, pf) = (p.pe.unwrap(), p.pf.unwrap());
    assert!(pe < 0.1 && pf < 1e-3 && pf < 0.01 * pe);
}

#[test]
fn optimize_from_roc_csv_matches_simulated_family() {
    // A ROC file produced by `roc` with the same geometry and seed must lead
    // to the same optimum as on-demand estimation.
    let dir = tempfile::tempdir().unwrap();
    let roc_cfg = write(
        dir.path(),
        "roc.json",
        r#"{"q": 256, "ka": 8, "channel": "rayleigh", "k": 24, "n": 960,
            "L": [5, 6, 7, 8, 9, 10, 11, 12],
            "ebno_db": [4, 6, 8, 10, 12, 14, 16, 18, 20],
            "k0_max": 24, "trials": 200, "seed": 11}"#,
    );
    assert_ok(&run_job("roc", &roc_cfg, &dir.path().join("family.csv"), &[]));
    let mut opt: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("optimize.json")).unwrap()).unwrap();
    opt["roc"] = serde_json::json!({"csv": {"path": "family.csv"}});
    let cfg = write(dir.path(), "opt.json", &opt.to_string());
    let out = dir.path().join("opt.csv");
    assert_ok(&run_job("optimize", &cfg, &out, &[]));
    let expected = std::fs::read_to_string(fixture("optimize.expected.csv")).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), expected);
}

#[test]
fn every_emitted_csv_round_trips() {
    fn check<T: CsvRecord>(path: &Path) {
        let bytes = std::fs::read(path).unwrap();
        let rows: Vec<T> = formats::read(path).unwrap();
        assert_eq!(formats::to_bytes(&rows).unwrap(), bytes, "{}", path.display());
    }
    let dir = tempfile::tempdir().unwrap();
    let out = |n: &str| dir.path().join(n);
    let jobs = [
        ("capacity", "capacity.json"),
        ("rcb", "rcb.json"),
        ("ttree-bound", "ttree_bound.json"),
        ("alloc", "alloc.json"),
        ("roc", "roc.json"),
        ("simulate", "sweep.json"),
        ("optimize", "optimize.json"),
    ];
    for (cmd, cfg) in jobs {
        assert_ok(&run_job(cmd, &fixture(cfg), &out(cmd), &[]));
    }
    check::<formats::CapacityRow>(&out("capacity"));
    check::<CurveRow>(&out("rcb"));
    check::<formats::TreeBoundRow>(&out("ttree-bound"));
    check::<formats::AllocRow>(&out("alloc"));
    check::<formats::RocRow>(&out("roc"));
    check::<SimRow>(&out("simulate"));
    check::<CurveRow>(&out("optimize"));
}

fn collect_keys(v: &serde_json::Value, keys: &mut Vec<String>) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, v) in m {
                keys.push(k.clone());
                collect_keys(v, keys);
            }
        }
        serde_json::Value::Array(a) => a.iter().for_each(|v| collect_keys(v, keys)),
        _ => {}
    }
}

#[test]
fn help_lists_every_key() {
    let cases = [
        ("capacity", vec!["capacity.json"]),
        ("rcb", vec!["rcb.json"]),
        ("ttree-bound", vec!["ttree_bound.json"]),
        ("alloc", vec!["alloc.json"]),
        ("roc", vec!["roc.json"]),
        ("simulate", vec!["simulate.json", "sweep.json", "rs_coset.json"]),
        ("optimize", vec!["optimize.json"]),
    ];
    for (cmd, configs) in cases {
        let o = ccs(&[cmd, "--help"]);
        assert_ok(&o);
        let help = String::from_utf8(o.stdout).unwrap();
        let mut keys = Vec::new();
        for c in configs {
            let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(fixture(c)).unwrap()).unwrap();
            collect_keys(&v, &mut keys);
        }
        for k in keys {
            assert!(help.contains(&k), "`{cmd} --help` does not mention {k}");
        }
        for flag in ["--config", "--out", "--seed", "--workers"] {
            assert!(help.contains(flag), "`{cmd} --help` does not mention {flag}");
        }
    }
    assert_ok(&ccs(&["--help"]));
}

#[test]
fn malformed_json_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", "{\n  \"q\": 8,\n  \"ka\": ,\n}");
    let o = run_job("capacity", &cfg, &dir.path().join("o.csv"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("column"), "{err}");
    assert!(!dir.path().join("o.csv").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let unknown = write(dir.path(), "u.json", r#"{"q": 8, "ka": 2, "points": [], "extra": 1}"#);
    assert_eq!(run_job("capacity", &unknown, &out, &[]).status.code(), Some(2));
    let invalid = write(dir.path(), "i.json", r#"{"q": 8, "ka": 2, "points": [{"n1": 4, "p_m": 1.5, "p_f": 0}]}"#);
    assert_eq!(run_job("capacity", &invalid, &out, &[]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(run_job("capacity", &missing, &out, &[]).status.code(), Some(2));
    let mut opt: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("optimize.json")).unwrap()).unwrap();
    opt["roc"] = serde_json::json!({"csv": {"path": "absent.csv"}});
    let cfg = write(dir.path(), "opt.json", &opt.to_string());
    assert_eq!(run_job("optimize", &cfg, &out, &[]).status.code(), Some(2));
    assert_eq!(ccs(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ccs(&["rcb", "--config", "x.json"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing-dir").join("o.csv");
    let o = run_job("capacity", &fixture("capacity.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("simulate.json");
    let base = dir.path().join("base.csv");
    let flag = dir.path().join("flag.csv");
    let env = dir.path().join("env.csv");
    let both = dir.path().join("both.csv");
    assert_ok(&run_job("simulate", &cfg, &base, &[]));
    assert_ok(&run_job("simulate", &cfg, &flag, &["--seed", "99"]));
    let with_env = |out: &Path, extra: &[&str]| {
        let mut args = vec!["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_ccs")).args(&args).env("CCS_SEED", "99").output().unwrap()
    };
    assert_ok(&with_env(&env, &[]));
    assert_ok(&with_env(&both, &["--seed", "17"]));
    let read = |p: &Path| -> Vec<SimRow> { formats::read(p).unwrap() };
    assert_eq!(read(&base)[0].seed, 17);
    assert_eq!(read(&flag)[0].seed, 99);
    assert_eq!(std::fs::read(&flag).unwrap(), std::fs::read(&env).unwrap());
    assert_eq!(std::fs::read(&base).unwrap(), std::fs::read(&both).unwrap());
    assert_ne!(read(&base)[0].pupe, read(&flag)[0].pupe);
}

#[test]
fn sweep_resumes_from_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.csv");
    assert_ok(&run_job("simulate", &fixture("sweep.json"), &full, &[]));
    let rows: Vec<SimRow> = formats::read(&full).unwrap();
    assert_eq!(rows.len(), 3);

    // Keep the first cell only, with a marker value that a rerun would not produce.
    let mut first = rows[0].clone();
    first.pupe = 0.123456789;
    let partial = dir.path().join("partial.csv");
    formats::write(&partial, std::slice::from_ref(&first)).unwrap();
    let o = run_job("simulate", &fixture("sweep.json"), &partial, &["--resume"]);
    assert_ok(&o);
    assert!(String::from_utf8_lossy(&o.stdout).contains("1 resumed"));
    let resumed: Vec<SimRow> = formats::read(&partial).unwrap();
    assert_eq!(resumed[0], first);
    assert_eq!(resumed[1..], rows[1..]);

    // Without --resume the output is recomputed from scratch.
    assert_ok(&run_job("simulate", &fixture("sweep.json"), &partial, &[]));
    assert_eq!(std::fs::read(&partial).unwrap(), std::fs::read(&full).unwrap());
}
