use crate::error::{DcaError, Result};
use crate::fitting::ProductionHistory;
use crate::scalar::Scalar;

/// Centered moving-average settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoothingSpec {
    window: usize,
    enabled: bool,
}

impl SmoothingSpec {
    /// An enabled smoother; `window` must be odd and at least 3.
    pub fn new(window: usize) -> Result<Self> {
        if window < 3 || window.is_multiple_of(2) {
            return Err(DcaError::InvalidSmoothing(format!(
                "window must be odd and at least 3, got {window}"
            )));
        }
        Ok(Self {
            window,
            enabled: true,
        })
    }

    pub fn disabled() -> Self {
        Self {
            window: 1,
            enabled: false,
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }
}

impl Default for SmoothingSpec {
    fn default() -> Self {
        Self::disabled()
    }
}

/// Replaces each rate with the mean over a centered window. Near the ends the
/// window is cut short rather than padded, so the first and last rates are
/// one-sided means.
pub fn smooth<T: Scalar>(
    history: &ProductionHistory<T>,
    spec: &SmoothingSpec,
) -> Result<ProductionHistory<T>> {
    if !spec.is_enabled() {
        return Ok(history.clone());
    }
    let rates: Vec<T> = history.rates().collect();
    if spec.window() > rates.len() {
        return Err(DcaError::InvalidSmoothing(format!(
            "window {} exceeds record count {}",
            spec.window(),
            rates.len()
        )));
    }
    let half = spec.window() / 2;
    let smoothed = (0..rates.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(rates.len() - 1);
            let slice = &rates[lo..=hi];
            // Exact fixed point on constant runs; summation could drift.
            if slice.iter().all(|&r| r == slice[0]) {
                return slice[0];
            }
            slice.iter().fold(T::zero(), |acc, &r| acc + r) / T::from_count(slice.len())
        })
        .collect();
    history.with_rates(smoothed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn history(rates: &[f64]) -> ProductionHistory<f64> {
        let times: Vec<f64> = (0..rates.len()).map(|i| i as f64).collect();
        ProductionHistory::from_columns(&times, rates).unwrap()
    }

    fn smoothed(rates: &[f64], window: usize) -> Vec<f64> {
        smooth(&history(rates), &SmoothingSpec::new(window).unwrap())
            .unwrap()
            .rates()
            .collect()
    }

    #[test]
    fn boundary_truncation() {
        assert_eq!(smoothed(&[1.0, 2.0, 3.0], 3), vec![1.5, 2.0, 2.5]);
    }

    #[test]
    fn constant_fixed_point() {
        assert_eq!(smoothed(&[4.0; 4], 3), vec![4.0; 4]);
        let odd = [0.1 + 0.2; 9];
        assert_eq!(smoothed(&odd, 5), odd.to_vec());
    }

    #[test]
    fn alternating_series() {
        let out = smoothed(&[10.0, 2.0, 10.0, 2.0, 10.0], 3);
        let expected = [6.0, 22.0 / 3.0, 14.0 / 3.0, 22.0 / 3.0, 6.0];
        for (a, b) in out.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn spec_validation() {
        assert!(SmoothingSpec::new(2).is_err());
        assert!(SmoothingSpec::new(1).is_err());
        assert!(SmoothingSpec::new(5).is_ok());
        let too_wide = SmoothingSpec::new(5).unwrap();
        assert!(smooth(&history(&[3.0, 2.0, 1.0]), &too_wide).is_err());
    }

    #[test]
    fn timestamps_and_count_preserved() {
        let h = history(&[5.0, 4.0, 6.0, 3.0, 2.0]);
        let s = smooth(&h, &SmoothingSpec::new(3).unwrap()).unwrap();
        assert_eq!(s.len(), h.len());
        assert_eq!(s.times().collect::<Vec<_>>(), h.times().collect::<Vec<_>>());
    }

    #[test]
    fn disabled_is_identity() {
        let h = history(&[5.0, 4.0, 6.0]);
        assert_eq!(smooth(&h, &SmoothingSpec::disabled()).unwrap(), h);
    }
}
