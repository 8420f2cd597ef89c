use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dca_core::ingest_report::{write_history_csv, IngestError};
use dca_core::{parse_history, running_cumulative, ProductionHistory};
use proptest::prelude::*;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn dca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dca"))
        .args(args)
        .output()
        .expect("dca binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn csv_round_trip(
        steps in prop::collection::vec(0.01..30.0f64, 3..60),
        rates in prop::collection::vec(1e-4..1e3f64, 60),
        np in prop::option::of(0.0..1e5f64),
    ) {
        let mut t = 0.0;
        let times: Vec<f64> = steps.iter().map(|s| { t += s; t }).collect();
        let history = ProductionHistory::from_columns(&times, &rates[..times.len()])
            .unwrap()
            .with_np(np)
            .unwrap();
        let mut buf = Vec::new();
        write_history_csv(&history, &mut buf).unwrap();
        let parsed = parse_history(buf.as_slice(), "w").unwrap();
        prop_assert_eq!(parsed.dropped_rows, 0);
        prop_assert_eq!(&parsed.well.history, &history);
        prop_assert_eq!(parsed.well.np, np);
    }

    #[test]
    fn running_cumulative_is_non_decreasing(
        steps in prop::collection::vec(0.01..30.0f64, 1..60),
        rates in prop::collection::vec(1e-4..1e3f64, 61),
    ) {
        let mut t = 0.0;
        let times: Vec<f64> = std::iter::once(0.0)
            .chain(steps.iter().map(|s| { t += s; t }))
            .collect();
        let history = ProductionHistory::from_columns(&times, &rates[..times.len()]).unwrap();
        let cum = running_cumulative(&history);
        prop_assert_eq!(cum[0].1, 0.0);
        for w in cum.windows(2) {
            prop_assert!(w[1].1 > w[0].1);
        }
    }
}

#[test]
fn dates_become_day_offsets() {
    let csv =
        "date,rate_mmscfd\n2017-03-09,5\n2017-03-11,4\n2017-03-11T12:00:00,3.5\n2017-04-09,3\n";
    let parsed = parse_history(csv.as_bytes(), "w").unwrap();
    let t: Vec<f64> = parsed.well.history.times().collect();
    assert_eq!(t, vec![0.0, 2.0, 2.5, 31.0]);
}

#[test]
fn non_positive_rates_are_dropped_and_counted() {
    let csv = "t_days,rate_mmscfd\n0,5\n1,0\n2,4\n3,-1\n4,3\n";
    let parsed = parse_history(csv.as_bytes(), "w").unwrap();
    assert_eq!(parsed.dropped_rows, 2);
    assert_eq!(parsed.well.history.len(), 3);
}

#[test]
fn ingest_rejections() {
    type Check = fn(&IngestError) -> bool;
    let cases: [(&str, Check); 5] = [
        ("t_days,rate\n0,1\n", |e| {
            matches!(e, IngestError::MissingColumn(_))
        }),
        ("rate_mmscfd\n1\n2\n3\n", |e| {
            matches!(e, IngestError::MissingColumn(_))
        }),
        ("t_days,rate_mmscfd\n0,5\n2,4\n1,3\n", |e| {
            matches!(e, IngestError::NonMonotonic { line: 4, .. })
        }),
        ("t_days,rate_mmscfd\n0,5\n1,abc\n2,3\n", |e| {
            matches!(e, IngestError::Malformed { line: 3, .. })
        }),
        ("t_days,rate_mmscfd\n0,5\n1,0\n2,3\n", |e| {
            matches!(e, IngestError::TooFewRows { usable: 2 })
        }),
    ];
    for (csv, check) in cases {
        let err = parse_history(csv.as_bytes(), "w").unwrap_err();
        assert!(check(&err), "{csv:?} gave {err:?}");
    }
}

#[test]
fn fixture_parses() {
    let file = std::fs::File::open(fixture("well5_synthetic.csv")).unwrap();
    let parsed = parse_history(file, "well5").unwrap();
    assert_eq!(parsed.well.history.len(), 76);
    assert_eq!(parsed.well.history.span(), Some((0.0, 150.0)));
    assert_eq!(parsed.well.np, Some(862.6667));
}

#[test]
fn compare_writes_complete_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = dca(&[
        "compare",
        "--input",
        fixture("well5_synthetic.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        status.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );

    let report = read_json(&out);
    assert_eq!(report["well_id"], "well5_synthetic");
    assert_eq!(report["np_mmscf"], 862.667);
    assert_eq!(report["q_ab_mmscfd"], 0.03);
    assert_eq!(report["q_start_mmscfd"], 2.8462);
    assert!(report["actual_life_days"].is_null());
    let models = report["models"].as_array().unwrap();
    let kinds: Vec<&str> = models.iter().map(|m| m["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["exponential", "harmonic", "hyperbolic"]);
    for m in models {
        assert_eq!(m["status"], "ok");
        for key in [
            "qi",
            "di_per_day",
            "r_squared",
            "rmse_mmscfd",
            "qf_mmscf",
            "delta_t_days",
            "eur_mmscf",
        ] {
            assert!(m[key].is_number(), "{key} in {m}");
        }
        assert!(m["life_accuracy"].is_null());
    }
    assert_eq!(report["selected_model"], "hyperbolic");
    assert!(report["selection_reason"].is_string());
}

#[test]
fn holdout_sets_life_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = dca(&[
        "compare",
        "--input",
        fixture("well5_synthetic.csv").to_str().unwrap(),
        "--holdout",
        fixture("well5_holdout.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0));
    let report = read_json(&out);
    assert_eq!(report["actual_life_days"], 1520.0);
    for m in report["models"].as_array().unwrap() {
        let acc = m["life_accuracy"].as_f64().unwrap();
        let dt = m["delta_t_days"].as_f64().unwrap();
        assert!(
            (acc - (1.0 - (dt - 1520.0).abs() / 1520.0)).abs() < 1e-4,
            "{m}"
        );
    }
    // The generating model should also predict the observed life best.
    let acc = |i: usize| report["models"][i]["life_accuracy"].as_f64().unwrap();
    assert!(acc(2) > acc(0) && acc(2) > acc(1), "{report}");
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let config = dir.path().join("dca.toml");
    std::fs::write(
        &config,
        format!(
            "input = {:?}\nout = {:?}\nq_ab = 0.5\nmodel = \"exp,hyp\"\n",
            fixture("well5_synthetic.csv"),
            out
        ),
    )
    .unwrap();

    let run = dca(&["--config", config.to_str().unwrap(), "compare"]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let report = read_json(&out);
    assert_eq!(report["q_ab_mmscfd"], 0.5);
    assert_eq!(report["models"].as_array().unwrap().len(), 2);

    let run = dca(&[
        "--config",
        config.to_str().unwrap(),
        "compare",
        "--q-ab",
        "0.1",
    ]);
    assert_eq!(run.status.code(), Some(0));
    assert_eq!(read_json(&out)["q_ab_mmscfd"], 0.1);

    std::fs::write(&config, "bogus_key = 1\n").unwrap();
    let run = dca(&["--config", config.to_str().unwrap(), "compare"]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn fit_and_forecast_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("well5_synthetic.csv");
    let fit_out = dir.path().join("fit.json");
    let run = dca(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--model",
        "hyp",
        "--smooth-window",
        "5",
        "--window",
        "10:140",
        "--out",
        fit_out.to_str().unwrap(),
    ]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let fit = read_json(&fit_out);
    let text = fit.to_string();
    assert!(text.contains("hyperbolic"), "{text}");

    let fc_out = dir.path().join("forecast.json");
    let run = dca(&[
        "forecast",
        "--input",
        input.to_str().unwrap(),
        "--np",
        "1000",
        "--step",
        "30",
        "--out",
        fc_out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&run.stderr).contains("overrides"));
    let fc = read_json(&fc_out).to_string();
    assert!(
        fc.contains("exponential") && fc.contains("harmonic"),
        "{fc}"
    );
}

#[test]
fn plot_data_to_stdout() {
    let input = fixture("well5_synthetic.csv");
    let run = dca(&[
        "plot-data",
        "--input",
        input.to_str().unwrap(),
        "--kind",
        "semilog",
        "--model",
        "exp,hyp",
        "--out",
        "-",
    ]);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t_days,observed_log10_rate,exponential_fitted_log10_rate,hyperbolic_fitted_log10_rate"
    );
    assert_eq!(lines.count(), 76);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let out = out.to_str().unwrap();

    let missing = dca(&["compare", "--input", "/nonexistent.csv", "--out", out]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());

    let bad_model = dca(&[
        "fit",
        "--input",
        fixture("well5_synthetic.csv").to_str().unwrap(),
        "--model",
        "cubic",
        "--out",
        out,
    ]);
    assert_eq!(bad_model.status.code(), Some(2));

    let even_window = dca(&[
        "fit",
        "--input",
        fixture("well5_synthetic.csv").to_str().unwrap(),
        "--smooth-window",
        "4",
        "--out",
        out,
    ]);
    assert_eq!(even_window.status.code(), Some(2));

    // Rising rates: no model can describe a decline.
    let rising = dir.path().join("rising.csv");
    std::fs::write(&rising, "t_days,rate_mmscfd\n0,1\n1,2\n2,3\n3,4\n4,5\n").unwrap();
    let failed = dca(&[
        "compare",
        "--input",
        rising.to_str().unwrap(),
        "--q-start",
        "5",
        "--out",
        out,
    ]);
    assert_eq!(
        failed.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&failed.stderr)
    );
    let failed = dca(&["fit", "--input", rising.to_str().unwrap(), "--out", out]);
    assert_eq!(failed.status.code(), Some(3));
}
