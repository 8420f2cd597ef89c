use std::io::{Read, Write};

use chrono::{NaiveDate, NaiveDateTime};

use crate::error::DcaError;
use crate::fitting::{ProductionHistory, ProductionRecord};
use crate::scalar::Scalar;

pub const COL_DATE: &str = "date";
pub const COL_T_DAYS: &str = "t_days";
pub const COL_RATE: &str = "rate_mmscfd";
pub const COL_CUMULATIVE: &str = "cumulative_mmscf";

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("could not read CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("missing required column: {0}")]
    MissingColumn(&'static str),

    #[error("line {line}, column '{column}': cannot parse '{value}'")]
    Malformed {
        line: u64,
        column: &'static str,
        value: String,
    },

    #[error("line {line}: time {t} does not follow previous time {previous}")]
    NonMonotonic { line: u64, previous: f64, t: f64 },

    #[error("only {usable} usable rows, at least 3 are required")]
    TooFewRows { usable: usize },

    #[error("well id must not be empty")]
    EmptyWellId,

    #[error(transparent)]
    History(#[from] DcaError),
}

/// One well's observations plus caller-level overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct WellInput {
    pub well_id: String,
    pub history: ProductionHistory<f64>,
    /// Cumulative production to date, mmscf.
    pub np: Option<f64>,
    /// Abandonment-rate override, mmscf/day.
    pub q_ab: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedWell {
    pub well: WellInput,
    /// Rows dropped because their rate was zero or negative.
    pub dropped_rows: usize,
}

enum TimeColumn {
    Days(usize),
    Date(usize),
}

fn parse_number(raw: &str, line: u64, column: &'static str) -> Result<f64, IngestError> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| IngestError::Malformed {
            line,
            column,
            value: raw.to_string(),
        })
}

fn parse_date(raw: &str, line: u64) -> Result<NaiveDateTime, IngestError> {
    let s = raw.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight is valid"))
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S"))
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S"))
        .map_err(|_| IngestError::Malformed {
            line,
            column: COL_DATE,
            value: raw.to_string(),
        })
}

/// Reads a headered production CSV.
///
/// Time comes from `t_days`, or from ISO-8601 `date` values converted to
/// days since the first row. Rows whose `rate_mmscfd` is zero or negative
/// are dropped and counted. When a `cumulative_mmscf` column is present its
/// value on the final row becomes `np`.
pub fn parse_history<R: Read>(source: R, well_id: &str) -> Result<ParsedWell, IngestError> {
    if well_id.trim().is_empty() {
        return Err(IngestError::EmptyWellId);
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));

    let rate_col = find(COL_RATE).ok_or(IngestError::MissingColumn(COL_RATE))?;
    let time_col = match (find(COL_T_DAYS), find(COL_DATE)) {
        (Some(i), _) => TimeColumn::Days(i),
        (None, Some(i)) => TimeColumn::Date(i),
        (None, None) => return Err(IngestError::MissingColumn("t_days or date")),
    };
    let cum_col = find(COL_CUMULATIVE);

    let mut records = Vec::new();
    let mut dropped_rows = 0;
    let mut first_date: Option<NaiveDateTime> = None;
    let mut previous: Option<f64> = None;
    let mut last_cumulative: Option<f64> = None;

    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| row.get(i).unwrap_or("");

        let t = match time_col {
            TimeColumn::Days(i) => parse_number(field(i), line, COL_T_DAYS)?,
            TimeColumn::Date(i) => {
                let at = parse_date(field(i), line)?;
                let origin = *first_date.get_or_insert(at);
                (at - origin).num_seconds() as f64 / 86_400.0
            }
        };
        if let Some(prev) = previous {
            if t <= prev {
                return Err(IngestError::NonMonotonic {
                    line,
                    previous: prev,
                    t,
                });
            }
        }
        previous = Some(t);

        last_cumulative = match cum_col.map(field) {
            Some(raw) if !raw.trim().is_empty() => Some(parse_number(raw, line, COL_CUMULATIVE)?),
            _ => None,
        };

        let rate = parse_number(field(rate_col), line, COL_RATE)?;
        if rate <= 0.0 {
            dropped_rows += 1;
            continue;
        }
        records.push(ProductionRecord::new(t, rate));
    }

    if records.len() < 3 {
        return Err(IngestError::TooFewRows {
            usable: records.len(),
        });
    }
    let history = ProductionHistory::new(records, last_cumulative)?;
    Ok(ParsedWell {
        well: WellInput {
            well_id: well_id.to_string(),
            np: history.np(),
            history,
            q_ab: None,
        },
        dropped_rows,
    })
}

/// Writes a history in the `t_days, rate_mmscfd` layout read by
/// [`parse_history`]. `np`, when known, goes on the final row's
/// `cumulative_mmscf`.
pub fn write_history_csv<W: Write>(
    history: &ProductionHistory<f64>,
    destination: W,
) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(destination);
    let with_np = history.np().is_some();
    if with_np {
        w.write_record([COL_T_DAYS, COL_RATE, COL_CUMULATIVE])?;
    } else {
        w.write_record([COL_T_DAYS, COL_RATE])?;
    }
    let n = history.len();
    for (i, r) in history.records().iter().enumerate() {
        let (t, rate) = (r.t.to_string(), r.rate.to_string());
        if with_np {
            let cum = match history.np() {
                Some(np) if i + 1 == n => np.to_string(),
                _ => String::new(),
            };
            w.write_record([t, rate, cum])?;
        } else {
            w.write_record([t, rate])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Trapezoidal cumulative volume paired with each record's rate; starts at 0.
pub fn running_cumulative<T: Scalar>(history: &ProductionHistory<T>) -> Vec<(T, T)> {
    let mut total = T::zero();
    let mut out = Vec::with_capacity(history.len());
    let mut prev: Option<&ProductionRecord<T>> = None;
    for rec in history.records() {
        if let Some(p) = prev {
            total = total + (p.rate + rec.rate) / T::lit(2.0) * (rec.t - p.t);
        }
        out.push((rec.rate, total));
        prev = Some(rec);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(csv: &str) -> Result<ParsedWell, IngestError> {
        parse_history(csv.as_bytes(), "well-5")
    }

    #[test]
    fn day_offsets() {
        let p = parse("t_days,rate_mmscfd\n0,5\n1,4\n2,3\n").unwrap();
        assert_eq!(p.well.history.len(), 3);
        assert_eq!(p.well.np, None);
        assert_eq!(p.dropped_rows, 0);
    }

    #[test]
    fn dates_become_day_offsets() {
        let p =
            parse("date,rate_mmscfd\n2017-08-06,2.7655\n2017-08-07,2.7\n2017-08-10,2.6\n").unwrap();
        let t: Vec<f64> = p.well.history.times().collect();
        assert_eq!(t, vec![0.0, 1.0, 4.0]);
    }

    #[test]
    fn zero_rate_rows_dropped() {
        let p = parse("t_days,rate_mmscfd\n0,5\n1,4\n2,0\n3,3\n4,2.5\n").unwrap();
        assert_eq!(p.well.history.len(), 4);
        assert_eq!(p.dropped_rows, 1);
    }

    #[test]
    fn cumulative_from_final_row() {
        let p = parse("t_days,rate_mmscfd,cumulative_mmscf\n0,5,0\n1,4,4.5\n2,3,8\n").unwrap();
        assert_eq!(p.well.np, Some(8.0));
        assert_eq!(p.well.history.np(), Some(8.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse("t_days,q\n0,1\n"),
            Err(IngestError::MissingColumn(COL_RATE))
        ));
        assert!(matches!(
            parse("when,rate_mmscfd\n0,1\n"),
            Err(IngestError::MissingColumn(_))
        ));
        assert!(matches!(
            parse("t_days,rate_mmscfd\n0,5\n2,4\n1,3\n"),
            Err(IngestError::NonMonotonic { line: 4, .. })
        ));
        assert!(matches!(
            parse("t_days,rate_mmscfd\n0,5\n1,4\n"),
            Err(IngestError::TooFewRows { usable: 2 })
        ));
        match parse("t_days,rate_mmscfd\n0,5\n1,abc\n2,3\n") {
            Err(IngestError::Malformed {
                line,
                column,
                value,
            }) => {
                assert_eq!((line, column, value.as_str()), (3, COL_RATE, "abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("date,rate_mmscfd\n2017-13-01,5\n"),
            Err(IngestError::Malformed {
                column: COL_DATE,
                ..
            })
        ));
        assert!(matches!(
            parse_history("t_days,rate_mmscfd\n0,1\n".as_bytes(), " "),
            Err(IngestError::EmptyWellId)
        ));
    }

    #[test]
    fn running_cumulative_examples() {
        let h = ProductionHistory::from_columns(&[0.0, 1.0], &[2.0, 2.0]).unwrap();
        assert_eq!(running_cumulative(&h), vec![(2.0, 0.0), (2.0, 2.0)]);
        let h = ProductionHistory::from_columns(&[0.0, 2.0], &[4.0, 2.0]).unwrap();
        assert_eq!(running_cumulative(&h), vec![(4.0, 0.0), (2.0, 6.0)]);
        let h = ProductionHistory::from_columns(&[3.0], &[4.0]).unwrap();
        assert_eq!(running_cumulative(&h), vec![(4.0, 0.0)]);
    }
}
