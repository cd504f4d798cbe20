//! Averaging `|S(n, q)|²` over the frequency `q` against a smooth bump.
//!
//! With `ψ = φ₀ ⋆ φ₀` and `ψ̂ = (φ̂₀)² ≥ 0`, Poisson summation gives
//! `(1/T) Σ_q ψ(q/T) |S(n,q)|² = Σ_{x,y} w_x w_y Σ_p ψ̂(2πT(p − Δ_{xy}))`
//! where `w = 1/|det(I − DAⁿ)|` and `Δ_{xy}` is the difference of Birkhoff
//! sums. Dropping every term except `x = y`, `p = 0` leaves
//! `ψ̂(0)·Σ w_x²` as a lower bound.

use std::f64::consts::PI;

use serde::Serialize;

use crate::exec::map_indexed;
use crate::orbits::periodic_points;
use crate::sum::neumaier;
use crate::torus::{AnosovMap, TrigPoly};
use crate::{Error, Result};

pub const DEFAULT_BUMP_NODES: usize = 2001;
/// Terms `p ≠ 0` kept in the tail estimate, on each side.
const TAIL_TERMS: i64 = 3;
/// Periodic-point count above which the `O(#Fix²)` Poisson route is skipped.
const POISSON_MAX_POINTS: usize = 64;
const POSITIVITY_SLACK: f64 = 1e-12;

fn phi0(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// `ψ = φ₀ ⋆ φ₀` for `φ₀(x) = e^{−1/(1−x²)}` on `(−1, 1)`, built from
/// samples of `φ₀` on a uniform grid.
#[derive(Clone, Debug)]
pub struct Bump {
    nodes: usize,
    /// `φ₀` at `−1 + i·h`.
    phi: Vec<f64>,
    h: f64,
    /// `ψ` at `−2 + k·2h`.
    psi: Vec<f64>,
}

impl Bump {
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes < 5 {
            return Err(Error::InvalidInput(format!("bump grid needs at least 5 nodes, got {nodes}")));
        }
        let h = 2.0 / (nodes - 1) as f64;
        let phi: Vec<f64> = (0..nodes).map(|i| phi0(-1.0 + i as f64 * h)).collect();
        let mut bump = Bump {
            nodes,
            phi,
            h,
            psi: Vec::new(),
        };
        bump.psi = (0..nodes)
            .map(|k| bump.psi(-2.0 + k as f64 * 2.0 * h))
            .collect();
        Ok(bump)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// `∫ φ₀` by the trapezoid rule (the endpoints vanish).
    pub fn phi_integral(&self) -> f64 {
        self.h * neumaier(self.phi.iter().copied())
    }

    /// `ψ(t) = ∫ φ₀(s) φ₀(t − s) ds`.
    pub fn psi(&self, t: f64) -> f64 {
        if t.abs() >= 2.0 {
            return 0.0;
        }
        self.h
            * neumaier(
                self.phi
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p * phi0(t - (-1.0 + i as f64 * self.h))),
            )
    }

    /// `ψ̂(ξ) = ∫ ψ(x) e^{−ixξ} dx` from the sampled `ψ`.
    pub fn psi_hat(&self, xi: f64) -> f64 {
        let step = 2.0 * self.h;
        step * neumaier(
            self.psi
                .iter()
                .enumerate()
                .map(|(k, p)| p * ((-2.0 + k as f64 * step) * xi).cos()),
        )
    }

    /// Frequencies up to half the Nyquist limit of the `ψ` samples, where
    /// [`Bump::psi_hat`] is free of aliasing.
    pub fn resolved_band(&self) -> f64 {
        PI / (4.0 * self.h)
    }

    /// `ψ̂(ξ)`, failing when the sampled transform is negative beyond
    /// round-off.
    pub fn psi_hat_checked(&self, xi: f64) -> Result<f64> {
        let v = self.psi_hat(xi);
        if v < -POSITIVITY_SLACK {
            return Err(Error::BumpGridTooCoarse {
                nodes: self.nodes,
                xi,
                value: v,
            });
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AverageReport {
    pub n: usize,
    pub t: f64,
    pub bump_nodes: usize,
    pub points: usize,
    /// `(1/T) Σ_{|q| ≤ 2T} ψ(q/T) |S(n,q)|²`.
    pub lhs: f64,
    /// `ψ̂(0)·Σ w² − tail`.
    pub rhs: f64,
    pub psi_hat0: f64,
    /// `Σ w²`.
    pub diagonal: f64,
    /// `Σ w² · Σ_{0<|p|≤3} |ψ̂(2πTp)|`.
    pub tail: f64,
    /// The left side again, through the Poisson-summed double sum over
    /// periodic points; absent for large point sets.
    pub poisson_route: Option<f64>,
    pub passed: bool,
}

pub fn frequency_average(
    map: &AnosovMap,
    tau: &TrigPoly,
    n: usize,
    t: f64,
    bump_nodes: usize,
) -> Result<AverageReport> {
    if !(t >= 4.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("averaging scale T must be >= 4, got {t}")));
    }
    let bump = Bump::new(bump_nodes)?;
    let set = periodic_points(map, n)?;
    let birkhoff = set.birkhoff_sums(map, tau);

    let q_max = (2.0 * t).floor() as i64;
    let terms = map_indexed((2 * q_max + 1) as usize, |i| {
        let q = i as i64 - q_max;
        bump.psi(q as f64 / t) * set.trace_sum_from(&birkhoff, q).norm_sqr()
    });
    let lhs = neumaier(terms) / t;

    let diagonal = set.diagonal_sum();
    let psi_hat0 = bump.psi_hat_checked(0.0)?;
    let mut tail_sum = 0.0;
    for p in 1..=TAIL_TERMS {
        tail_sum += 2.0 * bump.psi_hat_checked(2.0 * PI * t * p as f64)?.abs();
    }
    let tail = diagonal * tail_sum;
    let rhs = psi_hat0 * diagonal - tail;

    let poisson_route = if set.len() <= POISSON_MAX_POINTS {
        Some(poisson_double_sum(&bump, &set.weights, &birkhoff, t)?)
    } else {
        None
    };

    Ok(AverageReport {
        n,
        t,
        bump_nodes,
        points: set.len(),
        lhs,
        rhs,
        psi_hat0,
        diagonal,
        tail,
        poisson_route,
        passed: lhs >= rhs,
    })
}

fn poisson_double_sum(bump: &Bump, dets: &[f64], birkhoff: &[f64], t: f64) -> Result<f64> {
    let rows: Vec<Result<f64>> = map_indexed(dets.len(), |i| {
        let mut row = Vec::with_capacity(dets.len());
        for j in 0..dets.len() {
            // ψ̂ is negligible outside the resolved band
            let delta = birkhoff[i] - birkhoff[j];
            let width = (bump.resolved_band() / (2.0 * PI * t)).floor() as i64;
            let centre = delta.round() as i64;
            let mut s = Vec::new();
            for p in centre - width - 1..=centre + width + 1 {
                let xi = 2.0 * PI * t * (p as f64 - delta);
                if xi.abs() <= bump.resolved_band() {
                    s.push(bump.psi_hat_checked(xi)?);
                }
            }
            row.push(neumaier(s) / (dets[i] * dets[j]));
        }
        Ok(neumaier(row))
    });
    let rows: Result<Vec<f64>> = rows.into_iter().collect();
    Ok(neumaier(rows?))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Simpson's rule oracle for `∫ φ₀`.
    fn simpson_phi(m: usize) -> f64 {
        let h = 2.0 / m as f64;
        let mut s = 0.0;
        for i in 0..=m {
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * phi0(-1.0 + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn psi_hat_at_zero_is_squared_mass() {
        let bump = Bump::new(DEFAULT_BUMP_NODES).unwrap();
        let mass = simpson_phi(20000);
        assert!((mass - 0.443994).abs() < 1e-5, "{mass}");
        assert!((bump.phi_integral() - mass).abs() < 1e-10);
        assert!((bump.psi_hat(0.0) - mass * mass).abs() < 1e-10);
        assert!((bump.psi_hat(0.0) - 0.19713).abs() < 1e-4);
    }

    #[test]
    fn psi_is_even_supported_and_matches_transform_of_square() {
        let bump = Bump::new(801).unwrap();
        assert_eq!(bump.psi(2.0), 0.0);
        assert!((bump.psi(0.7) - bump.psi(-0.7)).abs() < 1e-15);
        // ψ̂(ξ) = φ̂₀(ξ)², with φ̂₀ by a finer independent trapezoid
        for xi in [0.0, 3.0, 11.0, 40.0] {
            let m = 8000;
            let h = 2.0 / m as f64;
            let hat: f64 = (0..=m)
                .map(|i| {
                    let x = -1.0 + i as f64 * h;
                    phi0(x) * (x * xi).cos()
                })
                .sum::<f64>()
                * h;
            assert!((bump.psi_hat(xi) - hat * hat).abs() < 1e-10, "ξ = {xi}");
        }
    }

    #[test]
    fn untwisted_average_is_the_bump_sum() {
        let cat = AnosovMap::cat();
        let r = frequency_average(&cat, &TrigPoly::zero(), 2, 8.0, 1001).unwrap();
        let bump = Bump::new(1001).unwrap();
        // S(n, q) = Σ 1/|det| = 1 for the cat map
        let direct: f64 = (-16..=16).map(|q| bump.psi(q as f64 / 8.0)).sum::<f64>() / 8.0;
        assert!((r.lhs - direct).abs() < 1e-12);
        assert!((r.diagonal - 0.2).abs() < 1e-12);
        assert!(r.passed);
        assert!((r.poisson_route.unwrap() - r.lhs).abs() < 1e-9);
    }

    #[test]
    fn twisted_routes_agree() {
        let cat = AnosovMap::cat();
        let tau = TrigPoly::cos([1, 0], 0.5);
        for n in [2, 3] {
            let r = frequency_average(&cat, &tau, n, 8.0, 1001).unwrap();
            assert!(r.passed, "{r:?}");
            assert!((r.poisson_route.unwrap() - r.lhs).abs() < 1e-9, "{r:?}");
        }
        assert!(frequency_average(&cat, &tau, 2, 3.0, 1001).is_err());
    }
}
