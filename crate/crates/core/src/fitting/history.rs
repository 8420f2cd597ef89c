use crate::error::{DcaError, Result};
use crate::scalar::Scalar;

/// One observed rate, `t` days after the first record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductionRecord<T> {
    pub t: T,
    pub rate: T,
}

impl<T> ProductionRecord<T> {
    pub fn new(t: T, rate: T) -> Self {
        Self { t, rate }
    }
}

/// Time-ordered rate observations for one well.
///
/// Construction checks that times are finite, non-negative and strictly
/// increasing and that every rate is positive. Once built the history is
/// immutable; transformations return new histories.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductionHistory<T> {
    records: Vec<ProductionRecord<T>>,
    np: Option<T>,
}

impl<T: Scalar> ProductionHistory<T> {
    pub fn new(records: Vec<ProductionRecord<T>>, np: Option<T>) -> Result<Self> {
        for (index, rec) in records.iter().enumerate() {
            if !(rec.t.is_finite() && rec.t >= T::zero()) {
                return Err(DcaError::InvalidTime {
                    index,
                    t: rec.t.as_f64(),
                });
            }
            if !(rec.rate.is_finite() && rec.rate > T::zero()) {
                return Err(DcaError::InvalidRate {
                    t: rec.t.as_f64(),
                    rate: rec.rate.as_f64(),
                });
            }
        }
        for (index, pair) in records.windows(2).enumerate() {
            if pair[1].t <= pair[0].t {
                return Err(DcaError::NonMonotonicTime {
                    index: index + 1,
                    previous: pair[0].t.as_f64(),
                    t: pair[1].t.as_f64(),
                });
            }
        }
        if let Some(np) = np {
            if !(np.is_finite() && np >= T::zero()) {
                return Err(DcaError::NegativeVolume(np.as_f64()));
            }
        }
        Ok(Self { records, np })
    }

    /// Builds a history from parallel time and rate columns.
    pub fn from_columns(times: &[T], rates: &[T]) -> Result<Self> {
        assert_eq!(times.len(), rates.len(), "column lengths differ");
        let records = times
            .iter()
            .zip(rates)
            .map(|(&t, &rate)| ProductionRecord::new(t, rate))
            .collect();
        Self::new(records, None)
    }

    pub fn with_np(mut self, np: Option<T>) -> Result<Self> {
        if let Some(v) = np {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(DcaError::NegativeVolume(v.as_f64()));
            }
        }
        self.np = np;
        Ok(self)
    }

    pub fn records(&self) -> &[ProductionRecord<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Cumulative production to date, when known.
    pub fn np(&self) -> Option<T> {
        self.np
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = T> + '_ {
        self.records.iter().map(|r| r.t)
    }

    pub fn rates(&self) -> impl ExactSizeIterator<Item = T> + '_ {
        self.records.iter().map(|r| r.rate)
    }

    pub fn first(&self) -> Option<&ProductionRecord<T>> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&ProductionRecord<T>> {
        self.records.last()
    }

    /// `(t_min, t_max)` spanned by the records.
    pub fn span(&self) -> Option<(T, T)> {
        Some((self.first()?.t, self.last()?.t))
    }

    /// Records with `t_min <= t <= t_max`. Times are left as they are; fits
    /// measure elapsed time from the first record of whatever they are given.
    pub fn window(&self, t_min: T, t_max: T) -> Result<Self> {
        let invalid = || DcaError::InvalidWindow {
            t_min: t_min.as_f64(),
            t_max: t_max.as_f64(),
        };
        if t_min.is_nan() || t_max.is_nan() || t_min > t_max {
            return Err(invalid());
        }
        let records: Vec<_> = self
            .records
            .iter()
            .filter(|r| r.t >= t_min && r.t <= t_max)
            .copied()
            .collect();
        if records.is_empty() {
            return Err(invalid());
        }
        Ok(Self {
            records,
            np: self.np,
        })
    }

    /// Same history with every rate replaced.
    pub(crate) fn with_rates(&self, rates: Vec<T>) -> Result<Self> {
        debug_assert_eq!(rates.len(), self.records.len());
        let records = self
            .records
            .iter()
            .zip(rates)
            .map(|(r, rate)| ProductionRecord::new(r.t, rate))
            .collect();
        Self::new(records, self.np)
    }

    /// Elapsed time of each record since the first one.
    pub(crate) fn elapsed(&self) -> Vec<T> {
        let origin = self.first().map_or(T::zero(), |r| r.t);
        self.times().map(|t| t - origin).collect()
    }

    pub(crate) fn require(&self, required: usize) -> Result<()> {
        if self.len() < required {
            return Err(DcaError::InsufficientRecords {
                required,
                got: self.len(),
            });
        }
        Ok(())
    }
}
