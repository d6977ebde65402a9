//! Convergence measurement: per-point metrics extracted from trajectories
//! and log-domain rate fitting.
//!
//! Two fits cover the two regimes this crate's method exhibits: a linear
//! fit of `ln v` against the abscissa for geometric (strongly monotone)
//! convergence, and a fit of `ln v` against `ln k` for polynomial
//! (merely convex-concave) convergence. Both fit the second half of the
//! series so early transients do not pollute the asymptotic estimate.

use crate::error::{Error, Result};
use crate::problems::SaddleProblem;
use crate::solver::Trajectory;

/// Squared Euclidean distance.
pub fn distance_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The duality gap at `z`, or an error naming the missing certificate.
pub fn gap_of(problem: &SaddleProblem, z: &[f64]) -> Result<f64> {
    problem
        .gap(z)
        .ok_or_else(|| Error::MetricUnavailable("no duality-gap certificate for this problem".into()))
}

/// Metrics of one trajectory point.
#[derive(Clone, Debug)]
pub struct MetricPoint {
    pub iteration: u64,
    pub comm_rounds: u64,
    /// Squared distance of the mean iterate to the known solution, when one
    /// is attached to the problem.
    pub dist_sq: Option<f64>,
    /// Duality gap of the ergodic average, when the problem has a gap
    /// certificate.
    pub gap: Option<f64>,
    /// Mean squared node disagreement.
    pub consensus: f64,
}

/// Evaluate every recorded trajectory point against the problem's available
/// oracles.
pub fn evaluate(problem: &SaddleProblem, trajectory: &Trajectory) -> Vec<MetricPoint> {
    trajectory
        .points
        .iter()
        .map(|pt| MetricPoint {
            iteration: pt.iteration,
            comm_rounds: pt.comm_rounds,
            dist_sq: problem.solution().map(|z| distance_sq(&pt.mean_iterate, z)),
            gap: problem.gap(&pt.ergodic_average),
            consensus: pt.consensus_error,
        })
        .collect()
}

/// Least-squares slope of `ln value` against the abscissa, fitted over the
/// second half of `series`: the per-unit geometric rate (negative when the
/// series decays). Needs at least 10 points, with positive values and at
/// least two distinct abscissae in the fitted half.
pub fn fit_linear_rate(series: &[(f64, f64)]) -> Result<f64> {
    let tail = fitted_tail(series)?;
    slope_of_logs(tail, false)
}

/// Least-squares slope of `ln value` against `ln abscissa`, fitted over the
/// second half of `series`: the polynomial decay exponent (for example `-1`
/// for a `1/k` series). Needs at least 10 points, with positive abscissae
/// and values and at least two distinct abscissae in the fitted half.
pub fn fit_sublinear_rate(series: &[(f64, f64)]) -> Result<f64> {
    let tail = fitted_tail(series)?;
    slope_of_logs(tail, true)
}

fn fitted_tail(series: &[(f64, f64)]) -> Result<&[(f64, f64)]> {
    if series.len() < 10 {
        return Err(Error::invalid(format!(
            "rate fitting needs at least 10 points, got {}",
            series.len()
        )));
    }
    Ok(&series[series.len() / 2..])
}

fn slope_of_logs(points: &[(f64, f64)], log_abscissa: bool) -> Result<f64> {
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(x, v) in points {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!(
                "rate fitting needs positive finite values, got {v} in the fitted half"
            )));
        }
        let x = if log_abscissa {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::invalid(format!(
                    "polynomial rate fitting needs positive abscissae, got {x}"
                )));
            }
            x.ln()
        } else {
            if !x.is_finite() {
                return Err(Error::invalid(format!("rate fitting needs finite abscissae, got {x}")));
            }
            x
        };
        xs.push(x);
        ys.push(v.ln());
    }
    let n = xs.len() as f64;
    let mean_x: f64 = xs.iter().sum::<f64>() / n;
    let mean_y: f64 = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx <= 0.0 {
        return Err(Error::invalid("rate fitting needs at least two distinct abscissae"));
    }
    Ok(sxy / sxx)
}
