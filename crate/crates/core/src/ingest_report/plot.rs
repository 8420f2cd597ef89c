use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::fitting::FitResult;
use crate::ingest_report::ingest::{running_cumulative, WellInput};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Rate against time.
    CartesianRateTime,
    /// `log10` rate against time.
    SemilogRateTime,
    /// Rate against cumulative production.
    RateCumulative,
}

impl PlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlotKind::CartesianRateTime => "cartesian",
            PlotKind::SemilogRateTime => "semilog",
            PlotKind::RateCumulative => "rate-cum",
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown plot kind '{0}' (expected cartesian, semilog or rate-cum)")]
pub struct UnknownPlotKind(pub String);

impl FromStr for PlotKind {
    type Err = UnknownPlotKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cartesian" | "cartesian_rate_time" => Ok(PlotKind::CartesianRateTime),
            "semilog" | "semilog_rate_time" => Ok(PlotKind::SemilogRateTime),
            "rate-cum" | "rate_cum" | "rate_cumulative" => Ok(PlotKind::RateCumulative),
            _ => Err(UnknownPlotKind(s.to_string())),
        }
    }
}

/// Plot-ready table: observed values plus one overlay column per fit.
/// Cells are empty where a fitted model is undefined (before its window).
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub kind: PlotKind,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

pub fn plot_series(well: &WellInput, fits: &[FitResult<f64>], kind: PlotKind) -> PlotSeries {
    let history = &well.history;
    let value = |q: f64| match kind {
        PlotKind::SemilogRateTime => q.log10(),
        _ => q,
    };
    let (x_name, observed_name, suffix) = match kind {
        PlotKind::CartesianRateTime => ("t_days", "observed", "fitted"),
        PlotKind::SemilogRateTime => ("t_days", "observed_log10_rate", "fitted_log10_rate"),
        PlotKind::RateCumulative => ("cumulative_mmscf", "observed_rate", "fitted_rate"),
    };
    let mut header = vec![x_name.to_string(), observed_name.to_string()];
    header.extend(fits.iter().map(|f| format!("{}_{suffix}", f.params.kind())));

    let cumulative = running_cumulative(history);
    let rows = history
        .records()
        .iter()
        .zip(&cumulative)
        .map(|(rec, &(_, cum))| {
            let x = match kind {
                PlotKind::RateCumulative => cum,
                _ => rec.t,
            };
            let mut row = vec![Some(x), Some(value(rec.rate))];
            row.extend(
                fits.iter()
                    .map(|fit| fit.params.rate_at(rec.t - fit.window.0).ok().map(value)),
            );
            row
        })
        .collect();
    PlotSeries { kind, header, rows }
}

/// Writes `series` as CSV. Numbers use the shortest round-trip form.
pub fn write_plot_csv<W: Write>(series: &PlotSeries, destination: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(destination);
    w.write_record(&series.header)?;
    for row in &series.rows {
        w.write_record(
            row.iter()
                .map(|c| c.map_or_else(String::new, |v| v.to_string())),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_plot_series<W: Write>(
    well: &WellInput,
    fits: &[FitResult<f64>],
    kind: PlotKind,
    destination: W,
) -> csv::Result<()> {
    write_plot_csv(&plot_series(well, fits, kind), destination)
}
