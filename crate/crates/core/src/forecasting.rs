//! Forward projections from fitted declines: rate series to abandonment,
//! remaining volume, remaining life, EUR and the multi-model comparison.

use crate::arps::{DeclineKind, DeclineParameters, RateInterval};
use crate::error::{DcaError, Result};
use crate::fitting::{self, FitOptions, FitResult, ProductionHistory};
use crate::scalar::Scalar;

/// Default economic-limit rate, mmscf/day.
pub const DEFAULT_ABANDONMENT_RATE: f64 = 0.03;
/// Default forecast sampling interval, days.
pub const DEFAULT_STEP: f64 = 1.0;

/// Where a forecast starts, where it stops, and how finely it is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastSpec<T> {
    q_start: T,
    q_ab: T,
    step: T,
}

impl<T: Scalar> ForecastSpec<T> {
    pub fn new(q_start: T, q_ab: T, step: T) -> Result<Self> {
        if !(q_ab.is_finite() && q_ab > T::zero()) {
            return Err(DcaError::InvalidForecast(format!(
                "abandonment rate must be positive, got {q_ab}"
            )));
        }
        if !(q_start.is_finite() && q_start > q_ab) {
            return Err(DcaError::InvalidForecast(format!(
                "current rate {q_start} must exceed abandonment rate {q_ab}"
            )));
        }
        if !(step.is_finite() && step > T::zero()) {
            return Err(DcaError::InvalidForecast(format!(
                "step must be positive, got {step}"
            )));
        }
        Ok(Self {
            q_start,
            q_ab,
            step,
        })
    }

    /// Starts at `q_start` with the default abandonment rate and step.
    pub fn from_current_rate(q_start: T) -> Result<Self> {
        Self::new(
            q_start,
            T::lit(DEFAULT_ABANDONMENT_RATE),
            T::lit(DEFAULT_STEP),
        )
    }

    pub fn q_start(&self) -> T {
        self.q_start
    }

    pub fn q_ab(&self) -> T {
        self.q_ab
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn interval(&self) -> RateInterval<T> {
        RateInterval::new(self.q_start, self.q_ab).expect("spec invariants imply a valid interval")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forecast<T> {
    /// `(t, rate)` from `(0, q_start)` to `(delta_t, q_ab)`, rates strictly
    /// decreasing.
    pub points: Vec<(T, T)>,
    pub delta_t: T,
    pub qf: T,
    pub eur: Option<T>,
}

/// Estimated ultimate recovery: production to date plus remaining volume.
pub fn eur<T: Scalar>(np: T, qf: T) -> Result<T> {
    for v in [np, qf] {
        if !(v >= T::zero()) || !v.is_finite() {
            return Err(DcaError::NegativeVolume(v.as_f64()));
        }
    }
    Ok(np + qf)
}

/// Projects `params`, re-anchored at the spec's current rate, down to the
/// abandonment rate.
pub fn forecast<T: Scalar>(
    params: &DeclineParameters<T>,
    spec: &ForecastSpec<T>,
    np: Option<T>,
) -> Result<Forecast<T>> {
    let interval = spec.interval();
    let delta_t = params.time_between_rates(&interval);
    let qf = params.cumulative_between(&interval);
    let eur = np.map(|np| eur(np, qf)).transpose()?;

    let anchored = params.reanchored(spec.q_start)?;
    let mut points = vec![(T::zero(), spec.q_start)];
    for k in 1usize.. {
        let t = spec.step * T::from_count(k);
        if t >= delta_t {
            break;
        }
        let rate = anchored.rate_at(t)?;
        if rate <= spec.q_ab {
            break;
        }
        points.push((t, rate));
    }
    points.push((delta_t, spec.q_ab));

    Ok(Forecast {
        points,
        delta_t,
        qf,
        eur,
    })
}

/// `1 - |predicted - actual| / actual`: how close a predicted remaining life
/// came to the life later observed.
pub fn life_accuracy<T: Scalar>(predicted_days: T, actual_days: T) -> Result<T> {
    if !(actual_days > T::zero()) || !actual_days.is_finite() {
        return Err(DcaError::InvalidForecast(format!(
            "actual life must be positive, got {actual_days}"
        )));
    }
    Ok(T::one() - (predicted_days - actual_days).abs() / actual_days)
}

/// Observed remaining life in a holdout history: elapsed time from its first
/// record to the first record at or below `q_ab`. `None` if the holdout never
/// reaches abandonment.
pub fn observed_life<T: Scalar>(holdout: &ProductionHistory<T>, q_ab: T) -> Option<T> {
    let origin = holdout.first()?.t;
    holdout
        .records()
        .iter()
        .find(|r| r.rate <= q_ab)
        .map(|r| r.t - origin)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelForecast<T> {
    pub params: DeclineParameters<T>,
    /// Present when the parameters came from a fit.
    pub fit: Option<FitResult<T>>,
    pub qf: T,
    pub delta_t: T,
    pub eur: Option<T>,
    pub r_squared: Option<T>,
    pub rmse: Option<T>,
    pub life_accuracy: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelOutcome<T> {
    Forecast(ModelForecast<T>),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEntry<T> {
    pub kind: DeclineKind,
    pub outcome: ModelOutcome<T>,
}

impl<T> ModelEntry<T> {
    pub fn forecast(&self) -> Option<&ModelForecast<T>> {
        match &self.outcome {
            ModelOutcome::Forecast(f) => Some(f),
            ModelOutcome::Failed(_) => None,
        }
    }
}

/// Side-by-side remaining volume, life and EUR for each requested model.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport<T> {
    pub entries: Vec<ModelEntry<T>>,
    pub selected_model: DeclineKind,
    pub selection_reason: String,
    pub q_start: T,
    pub q_ab: T,
    pub np: Option<T>,
    /// Remaining life observed in a holdout history, when one was supplied.
    pub actual_life: Option<T>,
}

impl<T: Scalar> AnalysisReport<T> {
    pub fn entry(&self, kind: DeclineKind) -> Option<&ModelEntry<T>> {
        self.entries.iter().find(|e| e.kind == kind)
    }

    /// Scores every model's predicted life against an observed one.
    pub fn with_actual_life(mut self, actual_days: T) -> Result<Self> {
        for entry in &mut self.entries {
            if let ModelOutcome::Forecast(f) = &mut entry.outcome {
                f.life_accuracy = Some(life_accuracy(f.delta_t, actual_days)?);
            }
        }
        self.actual_life = Some(actual_days);
        Ok(self)
    }
}

fn dedup(models: &[DeclineKind]) -> Vec<DeclineKind> {
    let mut out = Vec::with_capacity(models.len());
    for &m in models {
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

fn project<T: Scalar>(
    params: DeclineParameters<T>,
    fit: Option<FitResult<T>>,
    spec: &ForecastSpec<T>,
    np: Option<T>,
    history: Option<&ProductionHistory<T>>,
) -> Result<ModelForecast<T>> {
    let interval = spec.interval();
    let qf = params.cumulative_between(&interval);
    let (r_squared, rmse) = match (&fit, history) {
        (Some(fit), _) => (fit.r_squared, Some(fit.rmse)),
        (None, Some(h)) => {
            let g = fitting::goodness(h, &params)?;
            (g.r_squared, Some(g.rmse))
        }
        (None, None) => (None, None),
    };
    Ok(ModelForecast {
        params,
        fit,
        qf,
        delta_t: params.time_between_rates(&interval),
        eur: np.map(|np| eur(np, qf)).transpose()?,
        r_squared,
        rmse,
        life_accuracy: None,
    })
}

/// Fits every requested model to `history` and forecasts each from `spec`.
/// `history.np()` supplies the production to date for EUR.
pub fn compare_models<T: Scalar>(
    history: &ProductionHistory<T>,
    spec: &ForecastSpec<T>,
    models: &[DeclineKind],
) -> Result<AnalysisReport<T>> {
    compare_models_with(history, spec, models, &FitOptions::default())
}

pub fn compare_models_with<T: Scalar>(
    history: &ProductionHistory<T>,
    spec: &ForecastSpec<T>,
    models: &[DeclineKind],
    options: &FitOptions<T>,
) -> Result<AnalysisReport<T>> {
    let models = dedup(models);
    if models.is_empty() {
        return Err(DcaError::NoModels);
    }
    let entries = models
        .iter()
        .map(|&kind| {
            let outcome = fitting::fit(history, kind, options)
                .and_then(|fit| project(fit.params, Some(fit), spec, history.np(), None));
            ModelEntry {
                kind,
                outcome: match outcome {
                    Ok(f) => ModelOutcome::Forecast(f),
                    Err(e) => ModelOutcome::Failed(e.to_string()),
                },
            }
        })
        .collect();
    assemble(entries, spec, history.np())
}

/// Forecasts caller-supplied parameter sets without fitting. When `history`
/// is given each set is scored against it.
pub fn compare_parameters<T: Scalar>(
    params: &[DeclineParameters<T>],
    spec: &ForecastSpec<T>,
    np: Option<T>,
    history: Option<&ProductionHistory<T>>,
) -> Result<AnalysisReport<T>> {
    if params.is_empty() {
        return Err(DcaError::NoModels);
    }
    let entries = params
        .iter()
        .map(|&p| {
            let outcome = match project(p, None, spec, np, history) {
                Ok(f) => ModelOutcome::Forecast(f),
                Err(e) => ModelOutcome::Failed(e.to_string()),
            };
            ModelEntry {
                kind: p.kind(),
                outcome,
            }
        })
        .collect();
    assemble(entries, spec, np)
}

fn assemble<T: Scalar>(
    entries: Vec<ModelEntry<T>>,
    spec: &ForecastSpec<T>,
    np: Option<T>,
) -> Result<AnalysisReport<T>> {
    let (selected_model, selection_reason) = select(&entries)?;
    Ok(AnalysisReport {
        entries,
        selected_model,
        selection_reason,
        q_start: spec.q_start(),
        q_ab: spec.q_ab(),
        np,
        actual_life: None,
    })
}

/// RMSE values this close (relative) count as a tie.
const RMSE_TIE: f64 = 1e-9;

fn select<T: Scalar>(entries: &[ModelEntry<T>]) -> Result<(DeclineKind, String)> {
    let candidates: Vec<(DeclineKind, &ModelForecast<T>)> = entries
        .iter()
        .filter_map(|e| e.forecast().map(|f| (e.kind, f)))
        .collect();
    if candidates.is_empty() {
        let reasons = entries
            .iter()
            .filter_map(|e| match &e.outcome {
                ModelOutcome::Failed(msg) => Some(format!("{}: {msg}", e.kind)),
                ModelOutcome::Forecast(_) => None,
            })
            .collect::<Vec<_>>()
            .join("; ");
        return Err(DcaError::AllModelsFailed(reasons));
    }
    if candidates.len() == 1 {
        return Ok((
            candidates[0].0,
            "only model with a successful fit".to_string(),
        ));
    }

    let scored: Vec<(DeclineKind, T, Option<T>)> = candidates
        .iter()
        .filter_map(|(k, f)| f.rmse.map(|rmse| (*k, rmse, f.r_squared)))
        .collect();
    if scored.is_empty() {
        let best = candidates
            .iter()
            .min_by_key(|(k, _)| k.preference_rank())
            .map(|(k, _)| *k)
            .expect("non-empty");
        return Ok((
            best,
            "no goodness-of-fit data; chosen by model preference order".to_string(),
        ));
    }

    let tied = |a: T, b: T| (a - b).abs() <= T::lit(RMSE_TIE) * a.max(b);
    let mut best = scored[0];
    let mut reason = "lowest in-sample RMSE";
    for &cand in &scored[1..] {
        let (kind, rmse, r2) = cand;
        if !tied(rmse, best.1) {
            if rmse < best.1 {
                best = cand;
                reason = "lowest in-sample RMSE";
            }
            continue;
        }
        let cand_r2 = r2.unwrap_or(T::neg_infinity());
        let best_r2 = best.2.unwrap_or(T::neg_infinity());
        if cand_r2 != best_r2 {
            if cand_r2 > best_r2 {
                best = cand;
            }
            reason = "RMSE tie broken by higher R²";
        } else {
            if kind.preference_rank() < best.0.preference_rank() {
                best = cand;
            }
            reason = "RMSE and R² tie broken by model preference order";
        }
    }
    let rmse = best.1;
    Ok((best.0, format!("{reason} ({} rmse = {rmse:.6})", best.0)))
}
