//! Topological pressure of `−σ log Jᵘ` from periodic orbits, and closed
//! forms for linear maps.

use serde::Serialize;

use crate::orbits::{periodic_points, PeriodicOrbitSet};
use crate::sum::log_sum_exp;
use crate::torus::{AnosovMap, HyperbolicSplitting, IntMatrix};
use crate::{Error, Result};

/// `(1/n) log Σ_{Aⁿx=x} exp(−σ log Jᵘ_n(x))` over a computed orbit set.
pub fn pressure_from_set(set: &PeriodicOrbitSet, sigma: f64) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptyOrbitSet);
    }
    let terms: Vec<f64> = set.jac_u.iter().map(|j| -sigma * j.ln()).collect();
    Ok(log_sum_exp(&terms) / set.period as f64)
}

pub fn pressure_estimate(map: &AnosovMap, sigma: f64, n: usize) -> Result<f64> {
    pressure_from_set(&periodic_points(map, n)?, sigma)
}

/// `P(−σ log Jᵘ) = (1 − σ) log |μ|` for a linear hyperbolic map.
pub fn linear_pressure_closed_form(m: IntMatrix, sigma: f64) -> Result<f64> {
    let s = HyperbolicSplitting::new(&m)?;
    Ok((1.0 - sigma) * s.expanding.abs().ln())
}

/// `(e^{(5/2)P(−2 log Jᵘ)}, e^{(1/2)P(−2 log Jᵘ)})`, which equal
/// `(λ^{−5/2}, λ^{−1/2})` for a linear map.
pub fn rate_thresholds(m: IntMatrix) -> Result<(f64, f64)> {
    let p = linear_pressure_closed_form(m, 2.0)?;
    Ok(((2.5 * p).exp(), (0.5 * p).exp()))
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureRow {
    pub n: usize,
    pub sigma: f64,
    pub estimate: f64,
    pub closed_form: f64,
    pub gap: f64,
}

/// Estimates on a σ-grid from one orbit set, against the linear closed form
/// of the map's linear part.
pub fn pressure_table(map: &AnosovMap, n: usize, sigmas: &[f64]) -> Result<Vec<PressureRow>> {
    let set = periodic_points(map, n)?;
    sigmas
        .iter()
        .map(|&sigma| {
            let estimate = pressure_from_set(&set, sigma)?;
            let closed_form = linear_pressure_closed_form(map.matrix(), sigma)?;
            Ok(PressureRow {
                n,
                sigma,
                estimate,
                closed_form,
                gap: estimate - closed_form,
            })
        })
        .collect()
}
