//! Box-constrained Levenberg-Marquardt for small, dense problems.
//!
//! Each iteration solves `(JᵀJ + λ·diag(JᵀJ)) δ = -Jᵀr` and projects the
//! trial point back into the parameter box. Parameters sitting on a bound
//! whose gradient points outward are frozen for that iteration. A step is
//! accepted only when it lowers the sum of squared residuals; otherwise λ
//! grows tenfold.

#![allow(clippy::needless_range_loop)]

use crate::scalar::Scalar;

/// A least-squares problem in `N` bounded parameters.
pub trait LeastSquaresProblem<T: Scalar, const N: usize> {
    fn residual_count(&self) -> usize;

    /// Writes `r_i(x)` into `out`.
    fn residuals(&self, x: &[T; N], out: &mut [T]);

    /// Writes row `i` of the Jacobian `∂r_i/∂x` into `out[i]`.
    fn jacobian(&self, x: &[T; N], out: &mut [[T; N]]);

    /// Inclusive lower and upper bound for each parameter.
    fn bounds(&self) -> [(T, T); N];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions<T> {
    pub max_iterations: usize,
    /// Relative step size and relative loss change must both fall below this.
    pub tolerance: T,
    pub initial_lambda: T,
}

impl<T: Scalar> Default for LmOptions<T> {
    fn default() -> Self {
        // 1e-10 is below f32 resolution; fall back to a few ulps there.
        let floor = T::epsilon() * T::lit(16.0);
        Self {
            max_iterations: 200,
            tolerance: T::lit(1e-10).max(floor),
            initial_lambda: T::lit(1e-3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmReport<T, const N: usize> {
    pub params: [T; N],
    /// Sum of squared residuals at `params`.
    pub sse: T,
    pub iterations: usize,
    pub converged: bool,
}

const MAX_LAMBDA: f64 = 1e20;

fn sum_squares<T: Scalar>(r: &[T]) -> T {
    r.iter().fold(T::zero(), |acc, &v| acc + v * v)
}

fn project<T: Scalar, const N: usize>(x: &mut [T; N], bounds: &[(T, T); N]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *xi = xi.max(lo).min(hi);
    }
}

/// Largest per-component change relative to the component's magnitude.
fn relative_step<T: Scalar, const N: usize>(from: &[T; N], to: &[T; N]) -> T {
    from.iter().zip(to).fold(T::zero(), |acc, (&a, &b)| {
        let scale = a.abs().max(b.abs()).max(T::min_positive_value());
        acc.max((b - a).abs() / scale)
    })
}

/// Gaussian elimination with partial pivoting. Returns `None` when the
/// system is singular.
fn solve<T: Scalar, const N: usize>(mut a: [[T; N]; N], mut rhs: [T; N]) -> Option<[T; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(a[pivot][col].abs() > T::zero()) || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..N {
            let factor = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] = a[row][k] - factor * a[col][k];
            }
            rhs[row] = rhs[row] - factor * rhs[col];
        }
    }
    let mut x = [T::zero(); N];
    for row in (0..N).rev() {
        let tail = (row + 1..N).fold(T::zero(), |acc, k| acc + a[row][k] * x[k]);
        x[row] = (rhs[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

pub fn minimize<T, P, const N: usize>(
    problem: &P,
    initial: [T; N],
    options: &LmOptions<T>,
) -> LmReport<T, N>
where
    T: Scalar,
    P: LeastSquaresProblem<T, N>,
{
    let m = problem.residual_count();
    let bounds = problem.bounds();
    let tol = options.tolerance;

    let mut x = initial;
    project(&mut x, &bounds);
    let mut r = vec![T::zero(); m];
    let mut trial_r = vec![T::zero(); m];
    let mut jac = vec![[T::zero(); N]; m];
    problem.residuals(&x, &mut r);
    let mut sse = sum_squares(&r);
    let mut lambda = options.initial_lambda;

    let done = |x: [T; N], sse: T, iterations: usize, converged: bool| LmReport {
        params: x,
        sse,
        iterations,
        converged,
    };

    if sse == T::zero() {
        return done(x, sse, 0, true);
    }

    for iteration in 1..=options.max_iterations {
        problem.jacobian(&x, &mut jac);
        let mut jtj = [[T::zero(); N]; N];
        let mut grad = [T::zero(); N];
        for (row, &ri) in jac.iter().zip(&r) {
            for a in 0..N {
                grad[a] = grad[a] + row[a] * ri;
                for b in 0..N {
                    jtj[a][b] = jtj[a][b] + row[a] * row[b];
                }
            }
        }
        // Parameters pinned at a bound with the descent direction pointing
        // out of the box are held fixed for this iteration.
        let active: [bool; N] = std::array::from_fn(|k| {
            let (lo, hi) = bounds[k];
            (x[k] <= lo && grad[k] > T::zero()) || (x[k] >= hi && grad[k] < T::zero())
        });
        if (0..N).all(|k| active[k] || grad[k] == T::zero()) {
            return done(x, sse, iteration, true);
        }

        loop {
            let mut damped = jtj;
            let mut neg_grad = grad.map(|g| -g);
            for k in 0..N {
                if active[k] {
                    for j in 0..N {
                        damped[k][j] = T::zero();
                        damped[j][k] = T::zero();
                    }
                    damped[k][k] = T::one();
                    neg_grad[k] = T::zero();
                } else {
                    let diag = jtj[k][k].max(T::epsilon());
                    damped[k][k] = damped[k][k] + lambda * diag;
                }
            }
            let step = solve(damped, neg_grad);

            let mut trial = x;
            if let Some(step) = step {
                for (t, s) in trial.iter_mut().zip(step) {
                    *t = *t + s;
                }
                project(&mut trial, &bounds);
            }
            let step_size = relative_step(&x, &trial);

            problem.residuals(&trial, &mut trial_r);
            let trial_sse = sum_squares(&trial_r);

            if step.is_some() && trial_sse.is_finite() && trial_sse < sse {
                let loss_change = (sse - trial_sse) / sse;
                x = trial;
                std::mem::swap(&mut r, &mut trial_r);
                sse = trial_sse;
                lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                if sse == T::zero() || (step_size < tol && loss_change < tol) {
                    return done(x, sse, iteration, true);
                }
                break;
            }

            // No decrease available at this resolution: the current point is
            // a stationary point of the box-constrained problem.
            if step.is_some() && step_size < tol {
                return done(x, sse, iteration, true);
            }
            lambda = lambda * T::lit(10.0);
            if lambda > T::lit(MAX_LAMBDA) {
                return done(x, sse, iteration, true);
            }
        }
    }
    done(x, sse, options.max_iterations, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rosenbrock as residuals: r = (10 (y - x²), 1 - x).
    struct Rosenbrock {
        lower: [f64; 2],
    }

    impl LeastSquaresProblem<f64, 2> for Rosenbrock {
        fn residual_count(&self) -> usize {
            2
        }

        fn residuals(&self, p: &[f64; 2], out: &mut [f64]) {
            out[0] = 10.0 * (p[1] - p[0] * p[0]);
            out[1] = 1.0 - p[0];
        }

        fn jacobian(&self, p: &[f64; 2], out: &mut [[f64; 2]]) {
            out[0] = [-20.0 * p[0], 10.0];
            out[1] = [-1.0, 0.0];
        }

        fn bounds(&self) -> [(f64, f64); 2] {
            [(self.lower[0], 10.0), (self.lower[1], 10.0)]
        }
    }

    #[test]
    fn unconstrained_minimum() {
        let problem = Rosenbrock {
            lower: [-10.0, -10.0],
        };
        let report = minimize(&problem, [-1.2, 1.0], &LmOptions::default());
        assert!(report.converged);
        assert!((report.params[0] - 1.0).abs() < 1e-8, "{:?}", report);
        assert!((report.params[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn active_bound() {
        // Minimum sits outside the box; the solver stops on the boundary.
        let problem = Rosenbrock {
            lower: [1.5, -10.0],
        };
        let report = minimize(&problem, [2.0, 3.0], &LmOptions::default());
        assert!(report.converged);
        assert_eq!(report.params[0], 1.5);
        assert!((report.params[1] - 2.25).abs() < 1e-6);
    }

    #[test]
    fn iteration_budget_exhausted() {
        let problem = Rosenbrock {
            lower: [-10.0, -10.0],
        };
        let options = LmOptions {
            max_iterations: 1,
            ..LmOptions::default()
        };
        let report = minimize(&problem, [-1.2, 1.0], &options);
        assert!(!report.converged);
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn solver_handles_pivoting() {
        let a = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 2.0]];
        let x = solve(a, [3.0, 4.0, 8.0]).unwrap();
        assert_eq!(x, [4.0, 3.0, 4.0]);
        assert!(solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_none());
    }
}
