use semitrace::config::{KappaSpec, PieceSpec, Reference};
use semitrace::{
    convergence_study, emit_report, run_experiment, run_experiment_with, Execution, Experiment, ExperimentConfig, Format, HarnessError,
    TraceReport,
};
use std::process::Command;

fn without_timings(mut r: TraceReport) -> TraceReport {
    for row in &mut r.rows {
        row.runtime_s = 0.0;
    }
    r
}

fn quick_fio() -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(Experiment::FioTrace);
    c.h = vec![0.4, 0.2, 0.1];
    c.tolerance.rel = 0.5;
    c
}

#[test]
fn reports_are_deterministic() {
    let mut c = ExperimentConfig::defaults(Experiment::Gutzwiller);
    c.gutzwiller.as_mut().unwrap().jitter = 0.01;
    c.seed = 7;
    let a = without_timings(run_experiment_with(&c, Execution::Serial).unwrap());
    let b = without_timings(run_experiment_with(&c, Execution::Serial).unwrap());
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.seed, 7);

    // the seed moves the Newton start, not the orbit
    c.seed = 8;
    let other = without_timings(run_experiment(&c).unwrap());
    assert_ne!(other.config_hash, a.config_hash);
    for (x, y) in a.rows.iter().zip(&other.rows) {
        assert!((x.rel_err - y.rel_err).abs() < 1e-6);
    }
}

#[test]
fn parallel_matches_serial() {
    for c in [quick_fio(), ExperimentConfig::defaults(Experiment::Orbit), ExperimentConfig::defaults(Experiment::Poisson)] {
        let serial = without_timings(run_experiment_with(&c, Execution::Serial).unwrap());
        let parallel = without_timings(run_experiment_with(&c, Execution::Parallel).unwrap());
        assert_eq!(serial.to_json(), parallel.to_json());
    }
}

#[test]
fn json_round_trips_byte_identically() {
    let r = run_experiment(&quick_fio()).unwrap();
    let text = r.to_json();
    let back = TraceReport::from_json(&text).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.to_json(), text);

    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["config_hash", "seed", "experiment", "rows", "slope", "pass"] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(v["experiment"], "fio-trace");
    assert_eq!(v["rows"][0]["lhs"].as_array().unwrap().len(), 2);
    assert!(v["slope"]["half_width"].is_number());
}

#[test]
fn csv_and_plot_data_layout() {
    let r = run_experiment(&quick_fio()).unwrap();
    let csv = r.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "h,lhs_re,lhs_im,rhs_re,rhs_im,abs_err,rel_err,runtime_s");
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 8);
        let mantissa = fields[0].split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17);
    }
    // 17 significant digits round-trip exactly
    let parsed: Vec<f64> = lines[1].split(',').map(|f| f.parse().unwrap()).collect();
    let row = &r.rows[0];
    assert_eq!(parsed, [row.h, row.lhs[0], row.lhs[1], row.rhs[0], row.rhs[1], row.abs_err, row.rel_err, row.runtime_s]);

    let plot = r.to_plot_data();
    let data: Vec<&str> = plot.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 3);
    assert!(plot.starts_with("# "));
    assert!(data.iter().all(|l| l.split_whitespace().count() == 2));
}

#[test]
fn emit_writes_one_file_per_format() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&ExperimentConfig::defaults(Experiment::Poisson)).unwrap();
    let written = emit_report(&r, &[Format::Json, Format::Csv, Format::PlotData], dir.path()).unwrap();
    let names: Vec<String> = written.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["poisson.json", "poisson.csv", "poisson.dat"]);
    let text = std::fs::read_to_string(&written[0]).unwrap();
    assert_eq!(TraceReport::from_json(&text).unwrap(), r);

    let blocked = dir.path().join("poisson.json").join("sub");
    assert!(matches!(emit_report(&r, &[Format::Json], &blocked), Err(HarnessError::Io { .. })));
}

#[test]
fn poisson_example_passes_at_quadrature_accuracy() {
    let r = run_experiment(&ExperimentConfig::defaults(Experiment::Poisson)).unwrap();
    assert!(r.pass);
    assert!(r.slope.is_none());
    assert!(r.rows.iter().all(|row| row.rel_err <= 1e-8));
}

#[test]
fn overlapping_window_is_refused_with_the_periods() {
    let mut c = ExperimentConfig::defaults(Experiment::Gutzwiller);
    c.test_function = vec![PieceSpec { center: 5.0, half_width: 2.0, amplitude: [1.0, 0.0] }];
    match run_experiment(&c) {
        Err(HarnessError::Core { path, cause }) => {
            assert_eq!(path, "test_function");
            assert!(cause.to_string().contains("4.44288"), "{cause}");
        }
        other => panic!("expected a refusal, got {other:?}"),
    }
}

#[test]
fn harmonic_bohr_table_is_exact() {
    let mut c = ExperimentConfig::defaults(Experiment::Bohr);
    c.h = vec![0.05];
    c.scalar.as_mut().unwrap().potential = vec![0.0, 0.0, 1.0];
    let b = c.bohr.as_mut().unwrap();
    (b.lo, b.hi, b.reference) = (0.5, 3.0, Reference::Analytic);
    c.tolerance.abs = 1e-10;
    let r = run_experiment(&c).unwrap();
    assert!(r.pass && r.rows[0].abs_err <= 1e-10, "{:?}", r.rows);
    // the worst level sits on the 2h(n + ½) lattice
    let n = (r.rows[0].lhs[0] / 0.1 - 0.5).round();
    assert!((r.rows[0].lhs[0] - 0.1 * (n + 0.5)).abs() < 1e-12);
}

#[test]
fn config_values_reach_the_computation() {
    // tolerances
    let base = run_experiment(&quick_fio()).unwrap();
    assert!(base.pass);
    let mut strict = quick_fio();
    strict.tolerance.rel = 1e-3;
    assert!(!run_experiment(&strict).unwrap().pass);
    let mut steep = quick_fio();
    steep.tolerance.slope.as_mut().unwrap().value = 3.0;
    assert!(!run_experiment(&steep).unwrap().pass);

    // model parameters
    let mut wider = quick_fio();
    wider.fio.as_mut().unwrap().amplitude_width2 = 0.25;
    assert_ne!(run_experiment(&wider).unwrap().rows[0].lhs, base.rows[0].lhs);
    let mut coarse = quick_fio();
    coarse.fio.as_mut().unwrap().points = Some(50);
    assert!(matches!(run_experiment(&coarse), Err(HarnessError::Core { path, .. }) if path == "fio"));

    let mut g = ExperimentConfig::defaults(Experiment::Gutzwiller);
    g.h = vec![0.02];
    g.gutzwiller.as_mut().unwrap().truncation_scale = 0.5;
    assert!(matches!(run_experiment(&g), Err(HarnessError::Core { path, .. }) if path.starts_with("gutzwiller")));

    let mut w = ExperimentConfig::defaults(Experiment::WeylCheck);
    w.h = vec![0.2];
    let a = run_experiment(&w).unwrap().rows[0].abs_err;
    w.weyl.as_mut().unwrap().kappa = KappaSpec::Affine { scale: 1.0, shift: 0.0 };
    assert!(run_experiment(&w).unwrap().rows[0].abs_err < 1e-3 * a);

    let mut o = ExperimentConfig::defaults(Experiment::Orbit);
    let before = run_experiment(&o).unwrap().rows[0].rhs[0];
    o.orbit.as_mut().unwrap().energy = 2.0;
    assert_ne!(run_experiment(&o).unwrap().rows[0].rhs[0], before);
}

#[test]
fn invalid_configs_are_rejected() {
    let mut c = ExperimentConfig::defaults(Experiment::Poisson);
    c.h = vec![0.1, 0.2];
    assert!(matches!(c.validate(), Err(HarnessError::Config { path, .. }) if path == "h[1]"));
    c.h = vec![0.1, -0.05];
    assert!(matches!(c.validate(), Err(HarnessError::Config { path, .. }) if path == "h[1]"));
    c.h = vec![0.1];
    c.n = 0;
    assert!(matches!(c.validate(), Err(HarnessError::Config { path, .. }) if path == "n"));

    let study = ExperimentConfig::defaults(Experiment::MonodromyIntegral);
    assert!(convergence_study(&study).is_err());
    let mut narrow = quick_fio();
    narrow.h = vec![0.2, 0.15, 0.1];
    assert!(matches!(convergence_study(&narrow), Err(HarnessError::Config { path, .. }) if path == "h"));
    assert!(convergence_study(&quick_fio()).unwrap().slope.is_some());

    let e = ExperimentConfig::from_toml_over_defaults(Experiment::Poisson, "experiment = \"bohr\"").unwrap_err();
    assert!(matches!(e, HarnessError::Config { path, .. } if path == "experiment"));
    assert!(matches!(ExperimentConfig::from_toml_over_defaults(Experiment::Poisson, "bogus = 1"), Err(HarnessError::Parse(_))));
}

#[test]
fn toml_overlay_keeps_untouched_defaults() {
    let c = ExperimentConfig::from_toml_over_defaults(Experiment::FioTrace, "h = [0.3, 0.1]\n[fio]\nhalf_width = 6.0\n").unwrap();
    let d = ExperimentConfig::defaults(Experiment::FioTrace);
    assert_eq!(c.h, [0.3, 0.1]);
    assert_eq!(c.fio.as_ref().unwrap().half_width, 6.0);
    assert_eq!(c.fio.as_ref().unwrap().alpha, d.fio.as_ref().unwrap().alpha);
    assert_eq!(c.tolerance, d.tolerance);

    for e in Experiment::ALL {
        let d = ExperimentConfig::defaults(e);
        assert_eq!(ExperimentConfig::from_toml_over_defaults(e, &d.to_toml()).unwrap(), d);
    }
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_semitrace");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let ok = Command::new(bin).args(["poisson", "--out", out, "--format", "json,csv", "--emit-plot-data"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    for ext in ["json", "csv", "dat"] {
        assert!(dir.path().join(format!("poisson.{ext}")).exists());
    }

    let strict = dir.path().join("strict.toml");
    std::fs::write(&strict, "[tolerance]\nrel = 1e-4\n").unwrap();
    let fail = Command::new(bin)
        .args(["fio-trace", "--h-list", "0.4,0.2,0.1", "--out", out, "--config", strict.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(1));

    let bad = Command::new(bin).args(["orbit", "--h-list", "0.1,0.2", "--out", out]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("h[1]"));

    let defaults = Command::new(bin).args(["defaults", "weyl-check"]).output().unwrap();
    let text = String::from_utf8(defaults.stdout).unwrap();
    assert_eq!(ExperimentConfig::from_toml_over_defaults(Experiment::WeylCheck, &text).unwrap(), ExperimentConfig::defaults(Experiment::WeylCheck));
}
