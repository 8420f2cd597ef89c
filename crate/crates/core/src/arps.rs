//! Closed-form Arps decline kernels.
//!
//! Three rate-time relations share the parameters `qi` (initial rate,
//! mmscf/day), `di` (nominal decline, 1/day) and the exponent `b`:
//!
//! | kind        | b         | rate at t                     |
//! |-------------|-----------|-------------------------------|
//! | exponential | 0         | `qi * exp(-di t)`             |
//! | hyperbolic  | (0, 1)    | `qi * (1 + b di t)^(-1/b)`    |
//! | harmonic    | 1         | `qi / (1 + di t)`             |
//!
//! Volume and time between two rates are always computed on a
//! [`RateInterval`] whose start rate stands in for `qi`, so a decline fitted
//! from the first record can be projected forward from the well's current
//! rate without refitting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DcaError, Result};
use crate::scalar::Scalar;

/// Hyperbolic exponents closer than this to 0 or 1 are evaluated with the
/// exponential or harmonic closed form.
pub const LIMIT_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeclineKind {
    Exponential,
    Harmonic,
    Hyperbolic,
}

impl DeclineKind {
    pub const ALL: [DeclineKind; 3] = [
        DeclineKind::Exponential,
        DeclineKind::Harmonic,
        DeclineKind::Hyperbolic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DeclineKind::Exponential => "exponential",
            DeclineKind::Harmonic => "harmonic",
            DeclineKind::Hyperbolic => "hyperbolic",
        }
    }

    /// Number of parameters estimated when fitting this model.
    pub fn free_parameters(self) -> usize {
        match self {
            DeclineKind::Exponential | DeclineKind::Harmonic => 2,
            DeclineKind::Hyperbolic => 3,
        }
    }

    /// Position in the model-selection tie-break order (lower wins).
    pub fn preference_rank(self) -> u8 {
        match self {
            DeclineKind::Exponential => 0,
            DeclineKind::Hyperbolic => 1,
            DeclineKind::Harmonic => 2,
        }
    }
}

impl fmt::Display for DeclineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown decline model '{0}' (expected exp, harm or hyp)")]
pub struct UnknownKind(pub String);

impl FromStr for DeclineKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(DeclineKind::Exponential),
            "harm" | "harmonic" => Ok(DeclineKind::Harmonic),
            "hyp" | "hyperbolic" => Ok(DeclineKind::Hyperbolic),
            _ => Err(UnknownKind(s.to_string())),
        }
    }
}

/// A validated Arps model.
///
/// The exponent always agrees with the kind: exactly 0 for exponential,
/// exactly 1 for harmonic, strictly inside (0, 1) for hyperbolic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeclineParameters<T> {
    kind: DeclineKind,
    qi: T,
    di: T,
    b: T,
}

impl<T: Scalar> DeclineParameters<T> {
    pub fn exponential(qi: T, di: T) -> Result<Self> {
        Self::new(DeclineKind::Exponential, qi, di, T::zero())
    }

    pub fn harmonic(qi: T, di: T) -> Result<Self> {
        Self::new(DeclineKind::Harmonic, qi, di, T::one())
    }

    pub fn hyperbolic(qi: T, di: T, b: T) -> Result<Self> {
        Self::new(DeclineKind::Hyperbolic, qi, di, b)
    }

    pub fn new(kind: DeclineKind, qi: T, di: T, b: T) -> Result<Self> {
        let invalid = |reason: String| DcaError::InvalidParameters { kind, reason };
        if !(qi.is_finite() && qi > T::zero()) {
            return Err(invalid(format!("qi must be positive, got {qi}")));
        }
        if !(di.is_finite() && di > T::zero()) {
            return Err(invalid(format!("di must be positive, got {di}")));
        }
        let b_ok = match kind {
            DeclineKind::Exponential => b == T::zero(),
            DeclineKind::Harmonic => b == T::one(),
            DeclineKind::Hyperbolic => b > T::zero() && b < T::one(),
        };
        if !b_ok {
            let expected = match kind {
                DeclineKind::Exponential => "exactly 0",
                DeclineKind::Harmonic => "exactly 1",
                DeclineKind::Hyperbolic => "strictly between 0 and 1",
            };
            return Err(invalid(format!("b must be {expected}, got {b}")));
        }
        Ok(Self { kind, qi, di, b })
    }

    pub fn kind(&self) -> DeclineKind {
        self.kind
    }

    pub fn qi(&self) -> T {
        self.qi
    }

    pub fn di(&self) -> T {
        self.di
    }

    pub fn b(&self) -> T {
        self.b
    }

    /// Same decline with the initial rate replaced by `q_start`.
    pub fn reanchored(&self, q_start: T) -> Result<Self> {
        Self::new(self.kind, q_start, self.di, self.b)
    }

    /// The closed form actually used for evaluation. Hyperbolic exponents
    /// within [`LIMIT_EPSILON`] of either end collapse onto the limit model.
    fn evaluation_form(&self) -> DeclineKind {
        match self.kind {
            DeclineKind::Hyperbolic => {
                let eps = T::lit(LIMIT_EPSILON);
                if self.b < eps {
                    DeclineKind::Exponential
                } else if T::one() - self.b < eps {
                    DeclineKind::Harmonic
                } else {
                    DeclineKind::Hyperbolic
                }
            }
            other => other,
        }
    }

    /// Model rate after `t` days of decline.
    pub fn rate_at(&self, t: T) -> Result<T> {
        if !(t >= T::zero()) {
            return Err(DcaError::NegativeTime(t.as_f64()));
        }
        Ok(match self.evaluation_form() {
            DeclineKind::Exponential => self.qi * (-self.di * t).exp(),
            DeclineKind::Harmonic => self.qi / (T::one() + self.di * t),
            DeclineKind::Hyperbolic => hyperbolic_rate(self.qi, self.di, self.b, t),
        })
    }

    /// Volume produced while the rate declines from `interval.q_start()` to
    /// `interval.q_ab()`, with the decline re-anchored at the start rate.
    pub fn cumulative_between(&self, interval: &RateInterval<T>) -> T {
        let (qs, qab, di) = (interval.q_start, interval.q_ab, self.di);
        if qs == qab {
            return T::zero();
        }
        match self.evaluation_form() {
            DeclineKind::Exponential => (qs - qab) / di,
            DeclineKind::Harmonic => qs / di * (qs / qab).ln(),
            DeclineKind::Hyperbolic => {
                // 1 - (qab/qs)^(1-b), kept accurate when 1-b is small.
                let one_minus_b = T::one() - self.b;
                let shrink = -(one_minus_b * (qab / qs).ln()).exp_m1();
                qs / (one_minus_b * di) * shrink
            }
        }
    }

    /// Days for the re-anchored decline to fall from `interval.q_start()` to
    /// `interval.q_ab()`.
    pub fn time_between_rates(&self, interval: &RateInterval<T>) -> T {
        let (qs, qab, di) = (interval.q_start, interval.q_ab, self.di);
        if qs == qab {
            return T::zero();
        }
        match self.evaluation_form() {
            DeclineKind::Exponential => (qs / qab).ln() / di,
            DeclineKind::Harmonic => qs / di * (qab.recip() - qs.recip()),
            DeclineKind::Hyperbolic => (self.b * (qs / qab).ln()).exp_m1() / (self.b * di),
        }
    }
}

/// `qi * (1 + b di t)^(-1/b)` evaluated through `ln_1p` so small `b` stays
/// accurate.
pub(crate) fn hyperbolic_rate<T: Scalar>(qi: T, di: T, b: T, t: T) -> T {
    qi * (-(b * di * t).ln_1p() / b).exp()
}

/// Rate window for volume and remaining-life calculations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInterval<T> {
    q_start: T,
    q_ab: T,
}

impl<T: Scalar> RateInterval<T> {
    pub fn new(q_start: T, q_ab: T) -> Result<Self> {
        if !(q_ab.is_finite() && q_ab > T::zero()) {
            return Err(DcaError::InvalidInterval(format!(
                "abandonment rate must be positive, got {q_ab}"
            )));
        }
        if !q_start.is_finite() || q_start < q_ab {
            return Err(DcaError::InvalidInterval(format!(
                "start rate {q_start} is below abandonment rate {q_ab}"
            )));
        }
        Ok(Self { q_start, q_ab })
    }

    pub fn q_start(&self) -> T {
        self.q_start
    }

    pub fn q_ab(&self) -> T {
        self.q_ab
    }
}

/// Converts the slope of a base-10 semilog rate-time line into a nominal
/// exponential decline rate.
pub fn nominal_decline_from_semilog_slope<T: Scalar>(slope: T) -> Result<T> {
    if !(slope < T::zero()) {
        return Err(DcaError::NoDecline {
            slope: slope.as_f64(),
        });
    }
    Ok(-slope * T::LN_10())
}
