//! Parameter estimation from observed production.
//!
//! Exponential and harmonic declines become straight lines under a change of
//! variable and are fitted by ordinary least squares:
//!
//! * exponential: `log10 q = log10 qi - (di / ln 10) t`
//! * harmonic: `1/q = 1/qi + (di/qi) t`
//!
//! The hyperbolic decline is fitted by bounded Levenberg-Marquardt on the
//! squared rate residuals. Its fitted line is reported in the space
//! `q^-b = qi^-b + qi^-b b di t`, which reduces to the harmonic line at b = 1.
//!
//! All fits measure time from the first record they are given, so `qi` is
//! the model rate at the start of the fitted window.

mod history;
pub mod lm;
pub mod regression;
mod smoothing;

pub use history::{ProductionHistory, ProductionRecord};
pub use smoothing::{smooth, SmoothingSpec};

use crate::arps::{DeclineKind, DeclineParameters};
use crate::error::{DcaError, Result};
use crate::scalar::Scalar;

use lm::{LeastSquaresProblem, LmOptions};
use regression::{ordinary_least_squares, Line};

/// Fitted parameters together with their regression diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub params: DeclineParameters<T>,
    /// Intercept of the fitted line in the model's linearizing space.
    pub transformed_intercept: T,
    /// Slope of the fitted line in the model's linearizing space.
    pub transformed_slope: T,
    /// `None` when the observed rates have zero variance.
    pub r_squared: Option<T>,
    pub rmse: T,
    pub n_points: usize,
    pub window: (T, T),
    /// Optimizer iterations; zero for the closed-form fits.
    pub iterations: usize,
}

/// Coefficient of determination and root-mean-square error, both in rate
/// space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Goodness<T> {
    /// `None` marks an undefined R² (observed rates without variance).
    pub r_squared: Option<T>,
    pub rmse: T,
}

/// Options shared by the fitters.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions<T> {
    pub smoothing: SmoothingSpec,
    /// Inclusive `(t_min, t_max)` restriction applied after smoothing.
    pub window: Option<(T, T)>,
    pub lm: LmOptions<T>,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            smoothing: SmoothingSpec::disabled(),
            window: None,
            lm: LmOptions::default(),
        }
    }
}

/// Smoothing and windowing as configured in `options`.
pub fn prepare<T: Scalar>(
    history: &ProductionHistory<T>,
    options: &FitOptions<T>,
) -> Result<ProductionHistory<T>> {
    let smoothed = smooth(history, &options.smoothing)?;
    match options.window {
        Some((lo, hi)) => smoothed.window(lo, hi),
        None => Ok(smoothed),
    }
}

/// Prepares the history and dispatches to the fitter for `kind`.
pub fn fit<T: Scalar>(
    history: &ProductionHistory<T>,
    kind: DeclineKind,
    options: &FitOptions<T>,
) -> Result<FitResult<T>> {
    let prepared = prepare(history, options)?;
    match kind {
        DeclineKind::Exponential => fit_exponential(&prepared),
        DeclineKind::Harmonic => fit_harmonic(&prepared),
        DeclineKind::Hyperbolic => fit_hyperbolic_with(&prepared, &options.lm),
    }
}

/// Exponential model from a base-10 semilog line `log10 q = a + s t`.
pub fn exponential_from_semilog<T: Scalar>(line: Line<T>) -> Result<DeclineParameters<T>> {
    let di = crate::arps::nominal_decline_from_semilog_slope(line.slope)?;
    DeclineParameters::exponential(T::lit(10.0).powf(line.intercept), di)
}

/// Harmonic model from a reciprocal-rate line `1/q = a + s t`:
/// `qi = 1/a`, `di = s/a`.
pub fn harmonic_from_reciprocal<T: Scalar>(line: Line<T>) -> Result<DeclineParameters<T>> {
    if !(line.slope > T::zero()) {
        return Err(DcaError::NoDecline {
            slope: line.slope.as_f64(),
        });
    }
    if !(line.intercept > T::zero()) {
        return Err(DcaError::NonPositiveIntercept {
            intercept: line.intercept.as_f64(),
        });
    }
    DeclineParameters::harmonic(line.intercept.recip(), line.slope / line.intercept)
}

fn window_of<T: Scalar>(history: &ProductionHistory<T>) -> (T, T) {
    history.span().unwrap_or((T::zero(), T::zero()))
}

/// Least-squares line through `(t, log10 q)`.
pub fn fit_exponential<T: Scalar>(history: &ProductionHistory<T>) -> Result<FitResult<T>> {
    history.require(3)?;
    let t = history.elapsed();
    let ln_q: Vec<T> = history.rates().map(|q| q.ln()).collect();
    let line = ordinary_least_squares(&t, &ln_q)?;
    if !(line.slope < T::zero()) {
        return Err(DcaError::NoDecline {
            slope: (line.slope / T::LN_10()).as_f64(),
        });
    }
    let params = DeclineParameters::exponential(line.intercept.exp(), -line.slope)?;
    finish(
        history,
        params,
        line.intercept / T::LN_10(),
        line.slope / T::LN_10(),
        0,
    )
}

/// Least-squares line through `(t, 1/q)`.
pub fn fit_harmonic<T: Scalar>(history: &ProductionHistory<T>) -> Result<FitResult<T>> {
    history.require(3)?;
    let t = history.elapsed();
    let inv_q: Vec<T> = history.rates().map(|q| q.recip()).collect();
    let line = ordinary_least_squares(&t, &inv_q)?;
    let params = harmonic_from_reciprocal(line)?;
    finish(history, params, line.intercept, line.slope, 0)
}

/// Bounded nonlinear least squares over `(qi, di, b)` with default options.
pub fn fit_hyperbolic<T: Scalar>(history: &ProductionHistory<T>) -> Result<FitResult<T>> {
    fit_hyperbolic_with(history, &LmOptions::default())
}

/// Lower bound on the fitted hyperbolic exponent.
pub const B_MIN: f64 = 1e-9;
/// Upper bound is `1 - B_MIN`, or the largest value below one in the scalar.
fn b_max<T: Scalar>() -> T {
    (T::one() - T::lit(B_MIN)).min(T::one() - T::epsilon())
}

pub fn fit_hyperbolic_with<T: Scalar>(
    history: &ProductionHistory<T>,
    options: &LmOptions<T>,
) -> Result<FitResult<T>> {
    history.require(4)?;
    let start = fit_exponential(history)?.params;
    let problem = HyperbolicProblem {
        t: history.elapsed(),
        q: history.rates().collect(),
    };
    let initial = [start.qi(), start.di(), T::lit(0.5)];
    let report = lm::minimize(&problem, initial, options);
    let [qi, di, b] = report.params;
    if !report.converged {
        return Err(DcaError::NotConverged {
            iterations: report.iterations,
            qi: qi.as_f64(),
            di: di.as_f64(),
            b: b.as_f64(),
            sse: report.sse.as_f64(),
        });
    }
    let params = DeclineParameters::hyperbolic(qi, di, b)?;
    let intercept = qi.powf(-b);
    finish(
        history,
        params,
        intercept,
        intercept * b * di,
        report.iterations,
    )
}

fn finish<T: Scalar>(
    history: &ProductionHistory<T>,
    params: DeclineParameters<T>,
    transformed_intercept: T,
    transformed_slope: T,
    iterations: usize,
) -> Result<FitResult<T>> {
    let g = goodness(history, &params)?;
    Ok(FitResult {
        params,
        transformed_intercept,
        transformed_slope,
        r_squared: g.r_squared,
        rmse: g.rmse,
        n_points: history.len(),
        window: window_of(history),
        iterations,
    })
}

/// R² and RMSE of `params` against the observed rates, with the model's
/// `t = 0` at the first record.
pub fn goodness<T: Scalar>(
    history: &ProductionHistory<T>,
    params: &DeclineParameters<T>,
) -> Result<Goodness<T>> {
    history.require(1)?;
    let observed: Vec<T> = history.rates().collect();
    let predicted = history
        .elapsed()
        .into_iter()
        .map(|t| params.rate_at(t))
        .collect::<Result<Vec<T>>>()?;
    Ok(goodness_of(&observed, &predicted))
}

pub(crate) fn goodness_of<T: Scalar>(observed: &[T], predicted: &[T]) -> Goodness<T> {
    let n = T::from_count(observed.len());
    let mean = observed.iter().fold(T::zero(), |acc, &v| acc + v) / n;
    let ss_res = observed
        .iter()
        .zip(predicted)
        .fold(T::zero(), |acc, (&o, &p)| acc + (o - p) * (o - p));
    let constant = observed.iter().all(|&v| v == observed[0]);
    let ss_tot = observed
        .iter()
        .fold(T::zero(), |acc, &o| acc + (o - mean) * (o - mean));
    let r_squared = if constant || !(ss_tot > T::zero()) {
        None
    } else {
        Some(T::one() - ss_res / ss_tot)
    };
    Goodness {
        r_squared,
        rmse: (ss_res / n).sqrt(),
    }
}

/// Residuals `model(t) - q` of the hyperbolic rate in `(qi, di, b)`.
struct HyperbolicProblem<T> {
    t: Vec<T>,
    q: Vec<T>,
}

/// `(ln(1+u) - u/(1+u)) / u²`, the bracket in `∂q/∂b`, without cancellation
/// for small `u`.
fn b_sensitivity_kernel<T: Scalar>(u: T) -> T {
    if u.abs() < T::lit(0.05) {
        // Σ_{k≥2} (-1)^k (k-1)/k u^(k-2)
        let mut sum = T::zero();
        let mut power = T::one();
        for k in 2..16u32 {
            let kf = T::lit(f64::from(k));
            let term = (kf - T::one()) / kf * power;
            sum = if k % 2 == 0 { sum + term } else { sum - term };
            power = power * u;
        }
        sum
    } else {
        (u.ln_1p() - u / (T::one() + u)) / (u * u)
    }
}

impl<T: Scalar> LeastSquaresProblem<T, 3> for HyperbolicProblem<T> {
    fn residual_count(&self) -> usize {
        self.t.len()
    }

    fn residuals(&self, x: &[T; 3], out: &mut [T]) {
        let [qi, di, b] = *x;
        for ((o, &t), &q) in out.iter_mut().zip(&self.t).zip(&self.q) {
            *o = crate::arps::hyperbolic_rate(qi, di, b, t) - q;
        }
    }

    fn jacobian(&self, x: &[T; 3], out: &mut [[T; 3]]) {
        let [qi, di, b] = *x;
        for (row, &t) in out.iter_mut().zip(&self.t) {
            let u = b * di * t;
            let q = crate::arps::hyperbolic_rate(qi, di, b, t);
            let dt = di * t;
            *row = [
                q / qi,
                -q * t / (T::one() + u),
                q * dt * dt * b_sensitivity_kernel(u),
            ];
        }
    }

    fn bounds(&self) -> [(T, T); 3] {
        let tiny = T::lit(1e-12);
        let q_scale = self.q.iter().fold(T::zero(), |acc, &v| acc.max(v));
        [
            (q_scale * tiny, T::infinity()),
            (tiny, T::infinity()),
            (T::lit(B_MIN), b_max()),
        ]
    }
}
