use std::path::PathBuf;
use std::process::Command;

use nccz::report::CheckStatus;
use nccz_cli::config::{Experiment, Format, OperatorKind};
use nccz_cli::report::{
    from_json, to_csv, to_json, to_summary, Counts, ExperimentResult, CSV_HEADER, SCHEMA,
};
use nccz_cli::{assemble_config, emit_report, parse_config, run_experiment, CliError, Config};
use serde_json::Value;

/// Desk-size config; `extra` lines override the base as flags would.
fn small(exp: &str, extra: &str) -> Config {
    let base = format!("experiment = {exp}\ngrid.K = 4\ngrid.d = 2\nensemble.samples = 6\n");
    let o: Vec<(String, String)> = extra
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    assemble_config(Some(&base), &o).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("nccz-cli-{}-{name}", std::process::id()))
}

#[test]
fn minimal_config_gets_defaults() {
    let c = parse_config("experiment=cz_identities\ngrid.d=2\ngrid.K=4\n").unwrap();
    let mut want = Config::new(Experiment::CzIdentities);
    want.d = 2;
    want.depth = 4;
    assert_eq!(c, want);
    assert_eq!(c.n, 1);
    assert_eq!(c.s_max, None);
    assert_eq!(c.format, Format::Json);
}

#[test]
fn comments_and_whitespace() {
    let c = parse_config("# header\n\n  experiment =  gundy  \n# seed = 4\nseed=9\n").unwrap();
    assert_eq!(c.experiment, Experiment::Gundy);
    assert_eq!(c.seed, 9);
}

#[test]
fn unknown_experiment_lists_names() {
    let e = parse_config("experiment=nosuch\n").unwrap_err().to_string();
    assert!(e.contains("nosuch"));
    for x in Experiment::ALL {
        assert!(e.contains(x.name()), "{e}");
    }
}

#[test]
fn rejections() {
    let bad = [
        ("grid.d = 2\n", "missing `experiment`"),
        ("experiment = gundy\ngrid.q = 1\n", "unknown key `grid.q`"),
        ("experiment = gundy\ngrid.n = 3\n", "grid.n"),
        ("experiment = gundy\ngrid.K = 0\n", "grid.K"),
        ("experiment = gundy\ngrid.K = 9\ngrid.n = 2\n", "grid.K"),
        ("experiment = gundy\ngrid.d = 0\n", "grid.d"),
        ("experiment = gundy\ngrid.d = two\n", "grid.d"),
        ("experiment = gundy\nseed = -1\n", "seed"),
        (
            "experiment = gundy\nlambda.ell_min = 4\nlambda.ell_max = 2\n",
            "empty λ grid",
        ),
        (
            "experiment = gundy\nlacunary.s_min = 0\nlambda.ell_min = 0\n",
            "must exceed",
        ),
        (
            "experiment = gundy\nlacunary.s_max = 2\n",
            "exceeds lacunary.s_max",
        ),
        (
            "experiment = gundy\noperator.kind = file\n",
            "operator.file",
        ),
        ("experiment = gundy\noperator.r = 4\n", "shift complexity"),
        ("experiment = gundy\ntol.identity = 0\n", "tol.identity"),
        ("experiment = gundy\nprobe.part = middle\n", "probe.part"),
        ("experiment = gundy\natoms.kind = round\n", "atoms.kind"),
        ("experiment = gundy\noutput.format = xml\n", "output.format"),
        ("experiment = gundy\nversion = 2\n", "version"),
        ("experiment = gundy\nseed = 1\nseed = 2\n", "already set"),
        ("experiment = gundy\njust text\n", "key = value"),
    ];
    for (text, needle) in bad {
        let e = parse_config(text).unwrap_err();
        assert!(matches!(e, CliError::Config { .. }));
        assert!(e.to_string().contains(needle), "{text:?}: {e}");
    }
    // line numbers point at the offending line
    let e = parse_config("experiment = gundy\n\nbogus = 1\n")
        .unwrap_err()
        .to_string();
    assert!(e.starts_with("config line 3"), "{e}");
}

#[test]
fn canonical_round_trip() {
    let mut c = Config::new(Experiment::WeakTypeScan);
    c.seed = 123;
    c.n = 2;
    c.depth = 3;
    c.s_max = Some(7);
    c.spike_scale = 0.1 + 0.2;
    c.op_kind = OperatorKind::RandomShift;
    c.op_scale = std::f64::consts::FRAC_1_SQRT_2;
    c.ledger = Some("/tmp/ledger.jsonl".into());
    c.atom_kind = Some(nccz::hardy::AtomKind::PerrinR);
    c.tol_inequality = 0.0;
    let text = c.to_text();
    let back = parse_config(&text).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.to_text(), text);
    for e in Experiment::ALL {
        let d = Config::new(*e);
        assert_eq!(parse_config(&d.to_text()).unwrap(), d);
    }
}

#[test]
fn flags_override_config() {
    let file = "experiment = gundy\nseed = 1\ngrid.d = 3\n";
    let o = vec![
        ("experiment".to_string(), "cz_identities".to_string()),
        ("seed".to_string(), "5".to_string()),
    ];
    let c = assemble_config(Some(file), &o).unwrap();
    assert_eq!(c.experiment, Experiment::CzIdentities);
    assert_eq!(c.seed, 5);
    assert_eq!(c.d, 3);
    // the experiment may come from flags alone
    let c = assemble_config(None, &o[..1]).unwrap();
    assert_eq!(c, Config::new(Experiment::CzIdentities));
}

fn statuses(r: &ExperimentResult) -> Vec<CheckStatus> {
    r.records.iter().map(|x| x.status).collect()
}

#[test]
fn scalar_cz_all_pass() {
    let c = small("cz_identities", "grid.d = 1\nensemble.samples = 20\n");
    let r = run_experiment(&c).unwrap();
    assert_eq!(r.failures(), 0, "{:#?}", r.records);
    assert!(r
        .records
        .iter()
        .any(|x| x.name == "scalar_off_diagonal" && x.status == CheckStatus::Pass));
    assert!(r.records.iter().any(|x| x.name == "g_d_l2"));
}

#[test]
fn dilation_at_zero_matches_qhat() {
    let c = small("dilation_lemma", "dilation.s = 0\n");
    let r = run_experiment(&c).unwrap();
    let rec = r
        .records
        .iter()
        .find(|x| x.name == "zeta_equals_qhat")
        .unwrap();
    assert_eq!(rec.status, CheckStatus::Pass);
    assert_eq!(r.failures(), 0);
    // no such record away from s = 0
    let r = run_experiment(&small("dilation_lemma", "dilation.s = 2\n")).unwrap();
    assert!(r.records.iter().all(|x| x.name != "zeta_equals_qhat"));
    assert_eq!(r.failures(), 0);
}

#[test]
fn weak_scan_bytes_repeat() {
    let c = small("weak_type_scan", "seed = 42\n");
    let a = to_json(&run_experiment(&c).unwrap()).unwrap();
    let b = to_json(&run_experiment(&c).unwrap()).unwrap();
    assert_eq!(a, b);
    // thread count does not leak into the report
    let mut one = c.clone();
    one.jobs = 1;
    let mut four = c.clone();
    four.jobs = 4;
    assert_eq!(to_json(&run_experiment(&one).unwrap()).unwrap(), a);
    assert_eq!(to_json(&run_experiment(&four).unwrap()).unwrap(), a);
    // and all of its records are measured-only
    let r = from_json(&a).unwrap();
    assert!(statuses(&r).iter().all(|s| *s == CheckStatus::Measured));
    let mut other = c.clone();
    other.seed = 43;
    assert_ne!(to_json(&run_experiment(&other).unwrap()).unwrap(), a);
}

#[test]
fn every_experiment_runs_clean() {
    for e in Experiment::ALL {
        let c = small(e.name(), "");
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.failures(), 0, "{}: {:#?}", e.name(), r.records);
        assert!(!r.records.is_empty(), "{}", e.name());
        check_schema(&serde_json::from_str(&to_json(&r).unwrap()).unwrap()).unwrap();
    }
}

#[test]
fn open_problem_probes_never_fail() {
    // large ratios, tiny ceiling: still measured-only
    for e in [
        "truncation_probe",
        "weak_type_scan",
        "leftright_cz",
        "gundy",
    ] {
        let c = small(e, "probe.ceiling = 1e-9\nensemble.spike_scale = 500\n");
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.failures(), 0, "{e}");
        let measured = r
            .records
            .iter()
            .filter(|x| x.status == CheckStatus::Measured)
            .count();
        assert!(measured >= 3, "{e}");
    }
}

#[test]
fn sample_errors_become_records() {
    // s_max pinned below what spiked samples need
    let c = small(
        "lacunary_identities",
        "lacunary.s_max = 3\nensemble.spike_scale = 1000\n",
    );
    let r = run_experiment(&c).unwrap();
    assert!(r.counts.error > 0);
    let e = r
        .records
        .iter()
        .find(|x| x.status == CheckStatus::Error)
        .unwrap();
    assert!(e.note.as_ref().unwrap().contains("lacunary range"), "{e:?}");
    assert!(r.failures() > 0);
}

#[test]
fn operator_file_round_trip() {
    let c = small(
        "haar_shift_annihilation",
        "operator.kind = random_shift\nseed = 3\n",
    );
    let direct = run_experiment(&c).unwrap();
    // write the same operator out and read it back through operator.kind = file
    let mut rng = nccz::probes::sample_rng(3, 1 << 40);
    let op = nccz::operators::HaarShiftSpec::random_normalized(
        &mut rng,
        c.grid(),
        2,
        0,
        1,
        nccz::operators::Side::Column,
    )
    .unwrap();
    let path = tmp("shift.op");
    std::fs::write(&path, nccz::operators::OperatorSpec::Shift(op).to_text()).unwrap();
    let f = small(
        "haar_shift_annihilation",
        &format!(
            "operator.kind = file\noperator.file = {}\nseed = 3\n",
            path.display()
        ),
    );
    let via_file = run_experiment(&f).unwrap();
    let strip = |r: &ExperimentResult| -> Vec<(Option<f64>, CheckStatus)> {
        r.records.iter().map(|x| (x.value, x.status)).collect()
    };
    assert_eq!(strip(&direct), strip(&via_file));

    // wrong d: a setup error record, not a crash
    let bad = small(
        "haar_shift_annihilation",
        &format!(
            "operator.kind = file\noperator.file = {}\ngrid.d = 3\n",
            path.display()
        ),
    );
    let r = run_experiment(&bad).unwrap();
    assert_eq!(r.counts.error, 1);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn truncation_ledger_written() {
    let path = tmp("ledger.jsonl");
    let c = small(
        "truncation_probe",
        &format!("probe.ledger = {}\n", path.display()),
    );
    let r = run_experiment(&c).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let rows = nccz::probes::read_ledger(&text).unwrap();
    let n = r
        .records
        .iter()
        .find(|x| x.name == "ledger_records")
        .unwrap()
        .value
        .unwrap();
    assert_eq!(rows.len() as f64, n);
    std::fs::remove_file(&path).unwrap();
}

fn empty_result() -> ExperimentResult {
    ExperimentResult::new(
        &Config::new(Experiment::Gundy),
        nccz::report::ProbeReport::new("gundy"),
    )
}

#[test]
fn empty_result_is_valid() {
    let r = empty_result();
    let json = to_json(&r).unwrap();
    let v: Value = serde_json::from_str(&json).unwrap();
    check_schema(&v).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 0);
    assert_eq!(r.counts, Counts::default());
    assert_eq!(from_json(&json).unwrap(), r);
    assert_eq!(to_csv(&r).unwrap().lines().count(), 1);
    assert!(to_summary(&r).contains("pass 0  fail 0  measured 0  error 0"));
}

#[test]
fn json_to_csv_keeps_records() {
    let r = run_experiment(&small("atom_bounds", "ensemble.samples = 3\n")).unwrap();
    let back = from_json(&to_json(&r).unwrap()).unwrap();
    assert_eq!(back, r);
    let csv = to_csv(&back).unwrap();
    let mut rd = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let rows: Vec<csv::StringRecord> = rd.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), r.records.len());
    for (row, rec) in rows.iter().zip(&r.records) {
        assert_eq!(&row[1], rec.name);
        let v: Option<f64> = (!row[4].is_empty()).then(|| row[4].parse().unwrap());
        assert_eq!(v, rec.value);
    }
}

#[test]
fn unwritable_path_rejected() {
    let r = empty_result();
    let p = PathBuf::from("/nonexistent-dir/x/report.json");
    let e = emit_report(&r, Format::Json, Some(&p)).unwrap_err();
    assert!(matches!(e, CliError::Io { .. }));
    let ok = tmp("report.json");
    emit_report(&r, Format::Json, Some(&ok)).unwrap();
    assert_eq!(
        from_json(&std::fs::read_to_string(&ok).unwrap()).unwrap(),
        r
    );
    std::fs::remove_file(&ok).unwrap();
}

/// Checker for the documented report schema, independent of the serde types.
fn check_schema(v: &Value) -> Result<(), String> {
    let o = v.as_object().ok_or("top level is not an object")?;
    let keys = [
        "schema",
        "version",
        "experiment",
        "config",
        "counts",
        "records",
        "series",
    ];
    let mut got: Vec<&str> = o.keys().map(|k| k.as_str()).collect();
    got.sort_unstable();
    let mut want = keys.to_vec();
    want.sort_unstable();
    if got != want {
        return Err(format!("keys {got:?}"));
    }
    if o["schema"] != SCHEMA {
        return Err("schema tag".into());
    }
    if !o["version"].is_string() {
        return Err("version".into());
    }
    let exp = o["experiment"].as_str().ok_or("experiment")?;
    if !Experiment::ALL.iter().any(|e| e.name() == exp) {
        return Err(format!("unknown experiment {exp}"));
    }
    let cfg = o["config"].as_object().ok_or("config")?;
    if cfg.values().any(|x| !x.is_string())
        || cfg.get("experiment").and_then(Value::as_str) != Some(exp)
    {
        return Err("config echo".into());
    }
    let recs = o["records"].as_array().ok_or("records")?;
    let mut tally = [0u64; 4];
    let names = ["pass", "fail", "measured", "error"];
    for r in recs {
        let r = r.as_object().ok_or("record")?;
        for k in r.keys() {
            if !["name", "anchor", "value", "bound", "status", "note"].contains(&k.as_str()) {
                return Err(format!("record key {k}"));
            }
        }
        for k in ["name", "anchor"] {
            if r.get(k).and_then(Value::as_str).is_none_or(str::is_empty) {
                return Err(format!("record {k}"));
            }
        }
        for k in ["value", "bound"] {
            let x = r.get(k).ok_or(format!("record {k} missing"))?;
            if !(x.is_null() || x.is_f64() || x.is_i64() || x.is_u64()) {
                return Err(format!("record {k} type"));
            }
        }
        let st = r.get("status").and_then(Value::as_str).ok_or("status")?;
        let i = names
            .iter()
            .position(|n| *n == st)
            .ok_or(format!("status {st}"))?;
        tally[i] += 1;
        if st == "error" && r.get("note").and_then(Value::as_str).is_none() {
            return Err("error record without note".into());
        }
    }
    let counts = o["counts"].as_object().ok_or("counts")?;
    for (i, n) in names.iter().enumerate() {
        if counts.get(*n).and_then(Value::as_u64) != Some(tally[i]) {
            return Err(format!("count {n}"));
        }
    }
    for (k, s) in o["series"].as_object().ok_or("series")? {
        let s = s.as_array().ok_or(format!("series {k}"))?;
        if s.iter().any(|x| !(x.is_null() || x.is_number())) {
            return Err(format!("series {k} entry"));
        }
    }
    Ok(())
}

#[test]
fn schema_checker_rejects_damage() {
    let r = run_experiment(&small("gundy", "")).unwrap();
    let good: Value = serde_json::from_str(&to_json(&r).unwrap()).unwrap();
    check_schema(&good).unwrap();
    let mut v = good.clone();
    v["records"][0]["status"] = "maybe".into();
    assert!(check_schema(&v).is_err());
    let mut v = good.clone();
    v["counts"]["pass"] = 999.into();
    assert!(check_schema(&v).is_err());
    let mut v = good.clone();
    v.as_object_mut().unwrap().remove("series");
    assert!(check_schema(&v).is_err());
    let mut v = good;
    v["schema"] = "other/9".into();
    assert!(check_schema(&v).is_err());
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nccz"))
}

#[test]
fn binary_exit_codes_and_flags() {
    let cfg = tmp("run.cfg");
    std::fs::write(
        &cfg,
        "experiment = gundy\ngrid.K = 4\nensemble.samples = 4\nseed = 1\n",
    )
    .unwrap();
    let out = tmp("run.json");
    let st = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--experiment",
            "cz_identities",
        ])
        .args(["--seed", "8", "--jobs", "2", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let r = from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.experiment, "cz_identities");
    assert_eq!(r.config["seed"], "8");
    assert_eq!(r.config["ensemble.samples"], "4");

    let o = bin().args(["--experiment", "nosuch"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cuculescu_bounds"));

    let o = bin()
        .args(["--config", "/nonexistent.cfg"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    // a failing asserted check sets a nonzero status
    let st = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--set",
            "tol.identity=1e-300",
        ])
        .args([
            "--set",
            "ensemble.spike_scale=300",
            "--format",
            "csv",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));

    let st = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            "/nonexistent-dir/r.json",
        ])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));

    let o = bin()
        .args(["--experiment", "gundy", "--print-config"])
        .output()
        .unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(parse_config(&text).unwrap(), Config::new(Experiment::Gundy));

    let o = bin().arg("--list").output().unwrap();
    assert_eq!(
        String::from_utf8(o.stdout).unwrap().lines().count(),
        Experiment::ALL.len()
    );
    std::fs::remove_file(&cfg).unwrap();
    std::fs::remove_file(&out).unwrap();
}
