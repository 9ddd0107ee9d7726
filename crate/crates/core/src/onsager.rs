//! Onsager's free energy by quadrature, the critical point and duality.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

pub const QUADRATURE_START: usize = 256;
pub const QUADRATURE_CAP: usize = 2048;
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    /// Nodes per axis of the finest grid used.
    pub nodes: usize,
    /// Change between the two finest grids.
    pub change: f64,
    pub converged: bool,
}

/// Mean of the log-integrand over an `n x n` periodic grid, halved.
///
/// Nodes sit at cell midpoints, so no node lands on the zero of the
/// integrand at the critical point.
fn grid_value(beta: f64, n: usize) -> f64 {
    let c = (2.0 * beta).cosh();
    let a = 4.0 * c * c;
    let b = 4.0 * (2.0 * beta).sinh();
    let cosines: Vec<f64> = (0..n).map(|k| (2.0 * PI * (k as f64 + 0.5) / n as f64).cos()).collect();
    let mut sum = 0.0;
    for &c1 in &cosines {
        let mut row = 0.0;
        for &c2 in &cosines {
            row += (a - b * (c1 + c2)).ln();
        }
        sum += row;
    }
    sum / (2.0 * (n * n) as f64)
}

/// `-beta f(beta)` with convergence details.
///
/// Doubles the grid from 256 per axis until two successive values agree to
/// `1e-8`, stopping at 2048. Near the critical point the integrand has a log
/// singularity and the result comes back with `converged == false`.
pub fn onsager_quadrature(beta: f64) -> Result<Quadrature> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("inverse temperature must be positive, got {beta}")));
    }
    let mut n = QUADRATURE_START;
    let mut prev = grid_value(beta, n);
    loop {
        n *= 2;
        let next = grid_value(beta, n);
        let change = (next - prev).abs();
        if change < QUADRATURE_TOLERANCE || n >= QUADRATURE_CAP {
            return Ok(Quadrature { value: next, nodes: n, change, converged: change < QUADRATURE_TOLERANCE });
        }
        prev = next;
    }
}

pub fn onsager_integral(beta: f64) -> Result<f64> {
    onsager_quadrature(beta).map(|q| q.value)
}

/// Root of `exp(-2 beta) = tanh(beta)` by bisection.
pub fn critical_beta_bisection() -> f64 {
    let h = |b: f64| (-2.0 * b).exp() - b.tanh();
    let (mut lo, mut hi) = (0.1, 1.0);
    while hi - lo > 1e-16 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `ln(1 + sqrt 2) / 2`.
pub fn critical_beta() -> f64 {
    (1.0 + std::f64::consts::SQRT_2).ln() / 2.0
}

/// The dual inverse temperature, defined by `exp(-2 beta*) = tanh(beta)`.
pub fn dual_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("inverse temperature must be positive, got {beta}")));
    }
    Ok(-0.5 * beta.tanh().ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_beta_limit() {
        let v = onsager_integral(1e-6).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn low_temperature_tends_to_two_beta() {
        let v = onsager_integral(3.0).unwrap();
        assert!((v - 6.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(onsager_integral(0.0).is_err());
        assert!(onsager_integral(-1.0).is_err());
        assert!(onsager_integral(f64::NAN).is_err());
    }

    #[test]
    fn converges_away_from_critical_point() {
        for beta in [0.2, 0.3, 0.7, 0.9] {
            let q = onsager_quadrature(beta).unwrap();
            assert!(q.converged, "{beta}: {q:?}");
        }
    }

    #[test]
    fn critical_point_and_duality() {
        let bc = critical_beta_bisection();
        assert!((bc - critical_beta()).abs() < 1e-12);
        assert!((bc.tanh() - (std::f64::consts::SQRT_2 - 1.0)).abs() < 1e-12);
        assert!((dual_beta(bc).unwrap() - bc).abs() < 1e-12);
        for beta in [0.2, 0.5, 1.3] {
            let back = dual_beta(dual_beta(beta).unwrap()).unwrap();
            assert!((back - beta).abs() < 1e-12);
        }
    }
}
