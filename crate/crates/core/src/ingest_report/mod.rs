//! CSV ingestion, JSON reports and plot-data tables. Everything here works in
//! `f64`.

pub mod ingest;
pub mod plot;
pub mod report;

pub use ingest::{
    parse_history, running_cumulative, write_history_csv, IngestError, ParsedWell, WellInput,
};
pub use plot::{emit_plot_series, plot_series, write_plot_csv, PlotKind, PlotSeries};
pub use report::{emit_report, fit_json, forecast_json, report_json, sig6};
