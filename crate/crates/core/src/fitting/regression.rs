use crate::error::{DcaError, Result};
use crate::scalar::Scalar;

/// Straight line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line<T> {
    pub intercept: T,
    pub slope: T,
}

impl<T: Scalar> Line<T> {
    pub fn eval(&self, x: T) -> T {
        self.intercept + self.slope * x
    }
}

fn mean<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, &v| acc + v) / T::from_count(values.len())
}

/// Ordinary least squares of `y` on `x`, computed on mean-centered data.
pub fn ordinary_least_squares<T: Scalar>(x: &[T], y: &[T]) -> Result<Line<T>> {
    assert_eq!(x.len(), y.len(), "regression columns differ in length");
    if x.len() < 2 {
        return Err(DcaError::InsufficientRecords {
            required: 2,
            got: x.len(),
        });
    }
    let x_bar = mean(x);
    let y_bar = mean(y);
    let (sxx, sxy) = x
        .iter()
        .zip(y)
        .fold((T::zero(), T::zero()), |(sxx, sxy), (&xi, &yi)| {
            let dx = xi - x_bar;
            (sxx + dx * dx, sxy + dx * (yi - y_bar))
        });
    if !(sxx > T::zero()) {
        return Err(DcaError::DegenerateTime);
    }
    let slope = if y.iter().all(|&v| v == y[0]) {
        T::zero()
    } else {
        sxy / sxx
    };
    Ok(Line {
        intercept: y_bar - slope * x_bar,
        slope,
    })
}
