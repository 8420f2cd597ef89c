//! JSON documents written by the `fit`, `forecast` and `compare` commands.
//!
//! Field order is fixed by struct declaration order, and every number is
//! rounded to six significant digits before serialization, so identical
//! inputs always produce identical bytes.

use std::io::{self, Write};

use serde::Serialize;

use crate::arps::DeclineKind;
use crate::fitting::FitResult;
use crate::forecasting::{AnalysisReport, Forecast, ModelOutcome};

/// Rounds to six significant digits; non-finite values become `null`.
pub fn sig6(x: f64) -> Option<f64> {
    if !x.is_finite() {
        return None;
    }
    format!("{x:.5e}").parse().ok()
}

fn opt6(x: Option<f64>) -> Option<f64> {
    x.and_then(sig6)
}

const STATUS_OK: &str = "ok";
const STATUS_FAILED: &str = "fit_failed";

#[derive(Debug, Serialize)]
struct ReportDoc<'a> {
    well_id: &'a str,
    np_mmscf: Option<f64>,
    q_ab_mmscfd: Option<f64>,
    q_start_mmscfd: Option<f64>,
    actual_life_days: Option<f64>,
    models: Vec<ReportModel>,
    selected_model: DeclineKind,
    selection_reason: &'a str,
}

#[derive(Debug, Default, Serialize)]
struct ReportModel {
    kind: Option<DeclineKind>,
    qi: Option<f64>,
    di_per_day: Option<f64>,
    b: Option<f64>,
    r_squared: Option<f64>,
    rmse_mmscfd: Option<f64>,
    qf_mmscf: Option<f64>,
    delta_t_days: Option<f64>,
    eur_mmscf: Option<f64>,
    life_accuracy: Option<f64>,
    status: &'static str,
    diagnostic: Option<String>,
}

fn write_json<W: Write, S: Serialize>(doc: &S, mut destination: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut destination, doc)?;
    destination.write_all(b"\n")?;
    destination.flush()
}

fn to_string<S: Serialize>(doc: &S) -> String {
    let mut buf = Vec::new();
    write_json(doc, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn report_doc<'a>(well_id: &'a str, report: &'a AnalysisReport<f64>) -> ReportDoc<'a> {
    let models = report
        .entries
        .iter()
        .map(|entry| match &entry.outcome {
            ModelOutcome::Forecast(f) => ReportModel {
                kind: Some(entry.kind),
                qi: sig6(f.params.qi()),
                di_per_day: sig6(f.params.di()),
                b: sig6(f.params.b()),
                r_squared: opt6(f.r_squared),
                rmse_mmscfd: opt6(f.rmse),
                qf_mmscf: sig6(f.qf),
                delta_t_days: sig6(f.delta_t),
                eur_mmscf: opt6(f.eur),
                life_accuracy: opt6(f.life_accuracy),
                status: STATUS_OK,
                diagnostic: None,
            },
            ModelOutcome::Failed(msg) => ReportModel {
                kind: Some(entry.kind),
                status: STATUS_FAILED,
                diagnostic: Some(msg.clone()),
                ..ReportModel::default()
            },
        })
        .collect();
    ReportDoc {
        well_id,
        np_mmscf: opt6(report.np),
        q_ab_mmscfd: sig6(report.q_ab),
        q_start_mmscfd: sig6(report.q_start),
        actual_life_days: opt6(report.actual_life),
        models,
        selected_model: report.selected_model,
        selection_reason: &report.selection_reason,
    }
}

/// The model-comparison document.
pub fn report_json(well_id: &str, report: &AnalysisReport<f64>) -> String {
    to_string(&report_doc(well_id, report))
}

pub fn emit_report<W: Write>(
    well_id: &str,
    report: &AnalysisReport<f64>,
    destination: W,
) -> io::Result<()> {
    write_json(&report_doc(well_id, report), destination)
}

#[derive(Debug, Serialize)]
struct FitDoc<'a> {
    well_id: &'a str,
    smoothing_window: Option<usize>,
    window_days: Option<[f64; 2]>,
    models: Vec<FitModel>,
}

#[derive(Debug, Default, Serialize)]
struct FitModel {
    kind: Option<DeclineKind>,
    qi: Option<f64>,
    di_per_day: Option<f64>,
    b: Option<f64>,
    transformed_intercept: Option<f64>,
    transformed_slope: Option<f64>,
    r_squared: Option<f64>,
    rmse_mmscfd: Option<f64>,
    n_points: Option<usize>,
    t_min_days: Option<f64>,
    t_max_days: Option<f64>,
    iterations: Option<usize>,
    status: &'static str,
    diagnostic: Option<String>,
}

/// Outcome of fitting one model, as written by `dca fit`.
pub type FitOutcome = (DeclineKind, Result<FitResult<f64>, String>);

pub fn fit_json(
    well_id: &str,
    smoothing_window: Option<usize>,
    window: Option<(f64, f64)>,
    fits: &[FitOutcome],
) -> String {
    let models = fits
        .iter()
        .map(|(kind, outcome)| match outcome {
            Ok(fit) => FitModel {
                kind: Some(*kind),
                qi: sig6(fit.params.qi()),
                di_per_day: sig6(fit.params.di()),
                b: sig6(fit.params.b()),
                transformed_intercept: sig6(fit.transformed_intercept),
                transformed_slope: sig6(fit.transformed_slope),
                r_squared: opt6(fit.r_squared),
                rmse_mmscfd: sig6(fit.rmse),
                n_points: Some(fit.n_points),
                t_min_days: sig6(fit.window.0),
                t_max_days: sig6(fit.window.1),
                iterations: Some(fit.iterations),
                status: STATUS_OK,
                diagnostic: None,
            },
            Err(msg) => FitModel {
                kind: Some(*kind),
                status: STATUS_FAILED,
                diagnostic: Some(msg.clone()),
                ..FitModel::default()
            },
        })
        .collect();
    to_string(&FitDoc {
        well_id,
        smoothing_window,
        window_days: window.map(|(a, b)| [a, b]),
        models,
    })
}

#[derive(Debug, Serialize)]
struct ForecastDoc<'a> {
    well_id: &'a str,
    np_mmscf: Option<f64>,
    q_start_mmscfd: Option<f64>,
    q_ab_mmscfd: Option<f64>,
    step_days: Option<f64>,
    models: Vec<ForecastModel>,
}

#[derive(Debug, Default, Serialize)]
struct ForecastModel {
    kind: Option<DeclineKind>,
    qi: Option<f64>,
    di_per_day: Option<f64>,
    b: Option<f64>,
    qf_mmscf: Option<f64>,
    delta_t_days: Option<f64>,
    eur_mmscf: Option<f64>,
    status: &'static str,
    diagnostic: Option<String>,
    points: Vec<[Option<f64>; 2]>,
}

/// Outcome of forecasting one model, as written by `dca forecast`.
pub type ForecastOutcome = (DeclineKind, Result<(FitResult<f64>, Forecast<f64>), String>);

pub struct ForecastHeader<'a> {
    pub well_id: &'a str,
    pub np: Option<f64>,
    pub q_start: f64,
    pub q_ab: f64,
    pub step: f64,
}

pub fn forecast_json(header: &ForecastHeader<'_>, outcomes: &[ForecastOutcome]) -> String {
    let models = outcomes
        .iter()
        .map(|(kind, outcome)| match outcome {
            Ok((fit, fc)) => ForecastModel {
                kind: Some(*kind),
                qi: sig6(fit.params.qi()),
                di_per_day: sig6(fit.params.di()),
                b: sig6(fit.params.b()),
                qf_mmscf: sig6(fc.qf),
                delta_t_days: sig6(fc.delta_t),
                eur_mmscf: opt6(fc.eur),
                status: STATUS_OK,
                diagnostic: None,
                points: fc.points.iter().map(|&(t, q)| [sig6(t), sig6(q)]).collect(),
            },
            Err(msg) => ForecastModel {
                kind: Some(*kind),
                status: STATUS_FAILED,
                diagnostic: Some(msg.clone()),
                ..ForecastModel::default()
            },
        })
        .collect();
    to_string(&ForecastDoc {
        well_id: header.well_id,
        np_mmscf: opt6(header.np),
        q_start_mmscfd: sig6(header.q_start),
        q_ab_mmscfd: sig6(header.q_ab),
        step_days: sig6(header.step),
        models,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arps::DeclineParameters;
    use crate::forecasting::{compare_parameters, ForecastSpec, ModelEntry};

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(11620.26), Some(11620.3));
        assert_eq!(sig6(0.0134), Some(0.0134));
        assert_eq!(sig6(1.0 / 3.0), Some(0.333333));
        assert_eq!(sig6(22611.49), Some(22611.5));
        assert_eq!(sig6(f64::NAN), None);
    }

    fn worked_example_report() -> AnalysisReport<f64> {
        let params = [
            DeclineParameters::exponential(11.339, 0.0134).unwrap(),
            DeclineParameters::harmonic(19.69, 0.0039).unwrap(),
            DeclineParameters::hyperbolic(2.6755, 0.0039, 2e-5).unwrap(),
        ];
        let spec = ForecastSpec::new(2.6755, 0.03, 1.0).unwrap();
        compare_parameters(&params, &spec, Some(10941.9205), None).unwrap()
    }

    #[test]
    fn worked_example_json() {
        let json = report_json("well-5", &worked_example_report());
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let hyp = &v["models"][2];
        assert_eq!(hyp["kind"], "hyperbolic");
        let eur = hyp["eur_mmscf"].as_f64().unwrap();
        assert!((eur - 11620.3).abs() < 0.15, "{eur}");
        assert_eq!(hyp["status"], "ok");
        assert_eq!(v["np_mmscf"].as_f64(), Some(10941.9));
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 8);
        let order = [
            "\"well_id\"",
            "\"np_mmscf\"",
            "\"q_ab_mmscfd\"",
            "\"models\"",
            "\"selected_model\"",
            "\"selection_reason\"",
        ];
        let positions: Vec<usize> = order.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn failed_entry_has_null_numbers() {
        let mut report = worked_example_report();
        report.entries[1] = ModelEntry {
            kind: DeclineKind::Harmonic,
            outcome: ModelOutcome::Failed("no decline detected".into()),
        };
        let v: serde_json::Value = serde_json::from_str(&report_json("w", &report)).unwrap();
        let harm = &v["models"][1];
        assert_eq!(harm["status"], "fit_failed");
        assert_eq!(harm["diagnostic"], "no decline detected");
        for key in [
            "qi",
            "di_per_day",
            "b",
            "qf_mmscf",
            "delta_t_days",
            "eur_mmscf",
        ] {
            assert!(harm[key].is_null(), "{key}");
        }
    }

    #[test]
    fn identical_bytes() {
        assert_eq!(
            report_json("well-5", &worked_example_report()),
            report_json("well-5", &worked_example_report())
        );
    }
}
