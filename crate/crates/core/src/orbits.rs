//! Periodic points of `A`: exact lattice enumeration for the linear part,
//! Newton continuation for perturbed maps, unstable directions and the
//! orbit sums of the trace formula.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::exec::{map_indexed, try_map_indexed};
use crate::sum::neumaier_complex;
use crate::torus::{reduce_point, torus_distance, wrap_signed, AnosovMap, IntMatrix, TrigPoly};
use crate::{Error, Result};

/// Enumeration refuses sets larger than this unless asked explicitly.
pub const DEFAULT_POINT_LIMIT: u128 = 4_000_000;

pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;
const COLLISION_DISTANCE: f64 = 1e-8;
const FRAME_TOL: f64 = 1e-10;
const FRAME_MAX_ITER: usize = 200;

/// Exact description of the period-n points of a linear map: every point is
/// `numerator / denominator` coordinatewise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePoints {
    pub denominator: u128,
    pub numerators: Vec<[u128; 2]>,
    /// `|det(I − Mⁿ)|`, the common weight of every point.
    pub weight: u128,
    matrix: IntMatrix,
}

impl LatticePoints {
    /// Numerators of `A^k x` for the point with index `i`.
    fn orbit(&self, i: usize, len: usize) -> impl Iterator<Item = [u128; 2]> + '_ {
        let d = self.denominator as i128;
        let m = self.matrix.0;
        let mut cur = self.numerators[i];
        (0..len).map(move |_| {
            let out = cur;
            let x = [cur[0] as i128, cur[1] as i128];
            let y0 = (m[0][0] as i128 * x[0] + m[0][1] as i128 * x[1]).rem_euclid(d);
            let y1 = (m[1][0] as i128 * x[0] + m[1][1] as i128 * x[1]).rem_euclid(d);
            cur = [y0 as u128, y1 as u128];
            out
        })
    }
}

/// All period-n points of a map with per-point orbit data, in lexicographic
/// order.
#[derive(Clone, Debug)]
pub struct PeriodicOrbitSet {
    pub period: usize,
    pub points: Vec<[f64; 2]>,
    /// `|det(I − D_x Aⁿ)|`.
    pub weights: Vec<f64>,
    /// `Jᵘ(x)·Jᵘ(Ax)···Jᵘ(Aⁿ⁻¹x)`, the expanding multiplier of `D_x Aⁿ`.
    pub jac_u: Vec<f64>,
    /// `|Aⁿx − x|` on the torus after enumeration or refinement.
    pub residuals: Vec<f64>,
    /// `τ⁽ⁿ⁾(x)` for the observable last passed to [`Self::with_birkhoff`].
    pub birkhoff: Option<Vec<f64>>,
    lattice: Option<LatticePoints>,
}

impl PeriodicOrbitSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact data when the set came from [`enumerate_linear`] unchanged.
    pub fn lattice(&self) -> Option<&LatticePoints> {
        self.lattice.as_ref()
    }

    /// `Σ 1/|det(I − D_x Aⁿ)|` as an exact fraction `(count, weight)`, for
    /// linear maps only.
    pub fn rational_weight_sum(&self) -> Option<(u128, u128)> {
        self.lattice.as_ref().map(|l| {
            let count = l.numerators.len() as u128;
            let g = gcd(count, l.weight);
            (count / g, l.weight / g)
        })
    }

    /// Birkhoff sums `τ⁽ⁿ⁾(x)` for every point. Linear sets follow their
    /// orbits in exact integer arithmetic.
    pub fn birkhoff_sums(&self, map: &AnosovMap, tau: &TrigPoly) -> Vec<f64> {
        let n = self.period;
        match &self.lattice {
            Some(l) => {
                let d = l.denominator as f64;
                map_indexed(self.len(), |i| {
                    let mut acc = 0.0;
                    for p in l.orbit(i, n) {
                        acc += tau.eval_real([p[0] as f64 / d, p[1] as f64 / d]);
                    }
                    acc
                })
            }
            None => map_indexed(self.len(), |i| {
                crate::torus::birkhoff_sum(map, tau, self.points[i], n)
            }),
        }
    }

    /// Fills the Birkhoff cache for `tau`.
    pub fn with_birkhoff(mut self, map: &AnosovMap, tau: &TrigPoly) -> Self {
        self.birkhoff = Some(self.birkhoff_sums(map, tau));
        self
    }

    /// `Σ e^{2πiq τ⁽ⁿ⁾(x)} / |det(I − D_x Aⁿ)|` given the Birkhoff sums.
    pub fn trace_sum_from(&self, birkhoff: &[f64], q: i64) -> Complex64 {
        let phase = |b: f64| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * q as f64 * b);
        match &self.lattice {
            // equal weights: sum the phases first so q = 0 gives count/weight exactly
            Some(l) => {
                let s = neumaier_complex(birkhoff.iter().map(|&b| phase(b)));
                s / l.weight as f64
            }
            None => neumaier_complex(
                birkhoff
                    .iter()
                    .zip(&self.weights)
                    .map(|(&b, &w)| phase(b) / w),
            ),
        }
    }

    pub fn trace_sum(&self, map: &AnosovMap, tau: &TrigPoly, q: i64) -> Complex64 {
        match &self.birkhoff {
            Some(b) => self.trace_sum_from(b, q),
            None => self.trace_sum_from(&self.birkhoff_sums(map, tau), q),
        }
    }

    /// `Σ 1/|det(I − D_x Aⁿ)|²`, the diagonal term of `|trace sum|²`.
    pub fn diagonal_sum(&self) -> f64 {
        crate::sum::neumaier(self.weights.iter().map(|w| 1.0 / (w * w)))
    }

    /// Writes columns `n, x1, x2, weight, jac_u, birkhoff`; the last column
    /// is empty when no Birkhoff sums are cached.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "x1", "x2", "weight", "jac_u", "birkhoff"])?;
        for i in 0..self.len() {
            let b = self
                .birkhoff
                .as_ref()
                .map(|b| format!("{:.17e}", b[i]))
                .unwrap_or_default();
            w.write_record([
                self.period.to_string(),
                format!("{:.17e}", self.points[i][0]),
                format!("{:.17e}", self.points[i][1]),
                format!("{:.17e}", self.weights[i]),
                format!("{:.17e}", self.jac_u[i]),
                b,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(g, u, v)` with `g = ua + vb ≥ 0`.
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// The expanding eigenvalue modulus of a real 2×2 matrix with real spectrum.
pub(crate) fn expanding_multiplier(j: [[f64; 2]; 2]) -> f64 {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    (tr.abs() + disc) / 2.0
}

fn det_i_minus(j: [[f64; 2]; 2]) -> f64 {
    ((1.0 - j[0][0]) * (1.0 - j[1][1]) - j[0][1] * j[1][0]).abs()
}

/// Solutions of `(Mⁿ − I)x ∈ Z²` in `[0,1)²`, in exact integer arithmetic.
pub fn enumerate_linear(m: IntMatrix, n: usize) -> Result<PeriodicOrbitSet> {
    enumerate_linear_with_limit(m, n, DEFAULT_POINT_LIMIT)
}

pub fn enumerate_linear_with_limit(
    m: IntMatrix,
    n: usize,
    limit: u128,
) -> Result<PeriodicOrbitSet> {
    if n == 0 {
        return Err(Error::InvalidInput("period must be at least 1".into()));
    }
    if !m.is_hyperbolic() {
        return Err(Error::NotHyperbolic(m.0));
    }
    let p = m.checked_pow(n)?.0;
    let b = [
        [p[0][0] as i128 - 1, p[0][1] as i128],
        [p[1][0] as i128, p[1][1] as i128 - 1],
    ];
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let d = det.unsigned_abs();
    if d > limit {
        return Err(Error::TooManyPoints {
            period: n,
            count: d,
            limit,
        });
    }
    // x = B⁻¹k = adj(B)k / det. Reduce the columns of adj(B) to Hermite
    // form (h11, h21), (0, h22); the lattice adj(B)Z² mod d is then
    // { i·c1 + j·c2 : 0 ≤ i < d/h11, 0 ≤ j < d/h22 }.
    let adj = [[b[1][1], -b[0][1]], [-b[1][0], b[0][0]]];
    let (g, u, v) = ext_gcd(adj[0][0], adj[0][1]);
    let c1 = [g, u * adj[1][0] + v * adj[1][1]];
    let c2 = [
        0,
        (-adj[0][1] / g) * adj[1][0] + (adj[0][0] / g) * adj[1][1],
    ];
    let h11 = g;
    let h22 = c2[1].abs();
    let di = d as i128;
    let (ni, nj) = (di / h11, di / h22);
    let mut numerators = Vec::with_capacity(d as usize);
    for i in 0..ni {
        for j in 0..nj {
            let x0 = (i * c1[0]).rem_euclid(di);
            let x1 = (i * c1[1] + j * h22).rem_euclid(di);
            numerators.push([x0 as u128, x1 as u128]);
        }
    }
    numerators.sort_unstable();
    numerators.dedup();
    debug_assert_eq!(numerators.len() as u128, d);
    let df = d as f64;
    let points: Vec<[f64; 2]> = numerators
        .iter()
        .map(|k| [k[0] as f64 / df, k[1] as f64 / df])
        .collect();
    let count = points.len();
    let mu = crate::torus::HyperbolicSplitting::new(&m)?.expanding.abs();
    Ok(PeriodicOrbitSet {
        period: n,
        points,
        weights: vec![df; count],
        jac_u: vec![mu.powi(n as i32); count],
        residuals: vec![0.0; count],
        birkhoff: None,
        lattice: Some(LatticePoints {
            denominator: d,
            numerators,
            weight: d,
            matrix: m,
        }),
    })
}

/// `Aⁿx − x` as a signed displacement on the torus, with `D_x Aⁿ`.
fn newton_residual(map: &AnosovMap, x: [f64; 2], n: usize) -> ([f64; 2], [[f64; 2]; 2]) {
    let (y, j) = map.iterate_with_jacobian(x, n);
    ([wrap_signed(y[0] - x[0]), wrap_signed(y[1] - x[1])], j)
}

/// Rounding floor for `|Aⁿx − x|`: each step reduces mod 1 and the error
/// grows with the Jacobian norm.
fn residual_floor(j: [[f64; 2]; 2]) -> f64 {
    let norm = j.iter().flatten().map(|v| v.abs()).sum::<f64>();
    8.0 * f64::EPSILON * norm.max(1.0)
}

/// Converged point and residual, or the last iterate, residual and
/// iteration count.
type NewtonOutcome = std::result::Result<([f64; 2], f64), ([f64; 2], f64, usize)>;

fn newton_point(map: &AnosovMap, seed: [f64; 2], n: usize, tol: f64) -> NewtonOutcome {
    let mut x = seed;
    let mut last = f64::INFINITY;
    for it in 0..=NEWTON_MAX_ITER {
        let (f, j) = newton_residual(map, x, n);
        let res = f[0].hypot(f[1]);
        if res < tol.max(residual_floor(j)) {
            return Ok((x, res));
        }
        if it == NEWTON_MAX_ITER || !res.is_finite() {
            return Err((x, res, it));
        }
        last = res;
        let a = [[j[0][0] - 1.0, j[0][1]], [j[1][0], j[1][1] - 1.0]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let dx = [
            -(a[1][1] * f[0] - a[0][1] * f[1]) / det,
            -(-a[1][0] * f[0] + a[0][0] * f[1]) / det,
        ];
        x = reduce_point([x[0] + dx[0], x[1] + dx[1]]);
    }
    Err((x, last, NEWTON_MAX_ITER))
}

fn check_collisions(points: &[[f64; 2]], origin: &[usize]) -> Result<()> {
    // neighbours in lexicographic order, plus the wrap across x1 = 0
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
    let m = order.len();
    for k in 0..m {
        let i = order[k];
        let mut l = k + 1;
        loop {
            let j = order[l % m];
            if l % m == k {
                break;
            }
            let dx = wrap_signed(points[j][0] - points[i][0]).abs();
            if dx > COLLISION_DISTANCE {
                break;
            }
            let d = torus_distance(points[i], points[j]);
            if d < COLLISION_DISTANCE {
                return Err(Error::PointCollision {
                    first: origin[i].min(origin[j]),
                    second: origin[i].max(origin[j]),
                    distance: d,
                });
            }
            l += 1;
        }
    }
    Ok(())
}

/// Newton refinement of linear-map seeds to periodic points of `map`.
///
/// Direct Newton from the seeds is tried first. If a seed diverges or two
/// points merge, the perturbation is switched on gradually (8, then 64
/// continuation steps).
pub fn refine_newton(
    map: &AnosovMap,
    seeds: &PeriodicOrbitSet,
    tol: f64,
) -> Result<PeriodicOrbitSet> {
    if map.is_linear() {
        return Ok(seeds.clone());
    }
    let mut last_err = None;
    for steps in [1usize, 8, 64] {
        match refine_continuation(map, seeds, tol, steps) {
            Ok(set) => return Ok(set),
            Err(e @ (Error::NewtonDiverged { .. } | Error::PointCollision { .. })) => {
                last_err = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn refine_continuation(
    map: &AnosovMap,
    seeds: &PeriodicOrbitSet,
    tol: f64,
    steps: usize,
) -> Result<PeriodicOrbitSet> {
    let n = seeds.period;
    let stages = (1..=steps)
        .map(|s| map.scaled(s as f64 / steps as f64))
        .collect::<Result<Vec<_>>>()?;
    let refined = try_map_indexed(seeds.len(), |i| {
        let mut x = seeds.points[i];
        let mut res = 0.0;
        for stage in &stages {
            (x, res) = newton_point(stage, x, n, tol).map_err(|(x, residual, iterations)| {
                Error::NewtonDiverged {
                    seed: i,
                    x,
                    iterations,
                    residual,
                }
            })?;
        }
        Ok::<_, Error>((x, res))
    })?;
    let points: Vec<[f64; 2]> = refined.iter().map(|r| r.0).collect();
    let origin: Vec<usize> = (0..points.len()).collect();
    check_collisions(&points, &origin)?;
    build_set(map, n, refined)
}

fn build_set(map: &AnosovMap, n: usize, refined: Vec<([f64; 2], f64)>) -> Result<PeriodicOrbitSet> {
    let mut data: Vec<([f64; 2], f64, f64, f64)> = map_indexed(refined.len(), |i| {
        let (x, res) = refined[i];
        let (_, j) = map.iterate_with_jacobian(x, n);
        (x, det_i_minus(j), expanding_multiplier(j), res)
    });
    data.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1])));
    for (i, d) in data.iter().enumerate() {
        if !(d.1 > 0.0) {
            return Err(Error::NotExpanding { index: i, value: d.1 });
        }
    }
    Ok(PeriodicOrbitSet {
        period: n,
        points: data.iter().map(|d| d.0).collect(),
        weights: data.iter().map(|d| d.1).collect(),
        jac_u: data.iter().map(|d| d.2).collect(),
        residuals: data.iter().map(|d| d.3).collect(),
        birkhoff: None,
        lattice: None,
    })
}

/// Period-n points of `map`: exact for the linear part, refined otherwise.
pub fn periodic_points(map: &AnosovMap, n: usize) -> Result<PeriodicOrbitSet> {
    let seeds = enumerate_linear(map.matrix(), n)?;
    refine_newton(map, &seeds, DEFAULT_NEWTON_TOL)
}

/// `Σ_{Aⁿx=x} e^{2πiq τ⁽ⁿ⁾(x)} / |det(I − D_x Aⁿ)|`.
pub fn orbit_trace_sum(map: &AnosovMap, tau: &TrigPoly, q: i64, n: usize) -> Result<Complex64> {
    Ok(periodic_points(map, n)?.trace_sum(map, tau, q))
}

/// Unit vectors spanning `Eᵘ_x` and the one-step unstable jacobians.
#[derive(Clone, Debug, Serialize)]
pub struct UnstableFrame {
    pub directions: Vec<[f64; 2]>,
    /// `Jᵘ(x) = |D_x A u(x)|`.
    pub jacobians: Vec<f64>,
}

fn apply(j: [[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [j[0][0] * v[0] + j[0][1] * v[1], j[1][0] * v[0] + j[1][1] * v[1]]
}

fn normalize(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// Unstable direction at `x` by forward power iteration of the Jacobian
/// cocycle over one period, started from the linear unstable eigenvector.
pub fn unstable_direction(map: &AnosovMap, x: [f64; 2], n: usize) -> Option<[f64; 2]> {
    let (_, j) = map.iterate_with_jacobian(x, n);
    let mut u = map.splitting().unstable;
    for _ in 0..FRAME_MAX_ITER {
        let mut next = normalize(apply(j, u));
        if next[0] * u[0] + next[1] * u[1] < 0.0 {
            next = [-next[0], -next[1]];
        }
        let change = (next[0] - u[0]).hypot(next[1] - u[1]);
        u = next;
        if change < FRAME_TOL {
            return Some(u);
        }
    }
    None
}

pub fn unstable_frame(map: &AnosovMap, set: &PeriodicOrbitSet) -> Result<UnstableFrame> {
    let n = set.period;
    let out = try_map_indexed(set.len(), |i| {
        let x = set.points[i];
        let u = unstable_direction(map, x, n).ok_or(Error::FrameNotConverged {
            index: i,
            iterations: FRAME_MAX_ITER,
        })?;
        let du = apply(map.jacobian(x), u);
        let ju = du[0].hypot(du[1]);
        if !(ju > 1.0) {
            return Err(Error::NotExpanding { index: i, value: ju });
        }
        Ok::<_, Error>((u, ju))
    })?;
    Ok(UnstableFrame {
        directions: out.iter().map(|o| o.0).collect(),
        jacobians: out.iter().map(|o| o.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{Shear, ShearAxis};

    fn shear_map(eps: f64) -> AnosovMap {
        AnosovMap::cat()
            .with_shear(Shear::sine(ShearAxis::First, eps))
            .unwrap()
    }

    /// Brute-force lattice scan: `x = k/d` with `(Mⁿ − I)x ∈ Z²`.
    fn brute_count(m: IntMatrix, n: usize) -> usize {
        let p = m.checked_pow(n).unwrap().0;
        let b = [[p[0][0] - 1, p[0][1]], [p[1][0], p[1][1] - 1]];
        let d = (b[0][0] * b[1][1] - b[0][1] * b[1][0]).abs();
        let mut c = 0;
        for i in 0..d {
            for k in 0..d {
                if (b[0][0] * i + b[0][1] * k) % d == 0 && (b[1][0] * i + b[1][1] * k) % d == 0 {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn cat_counts() {
        let expected = [1, 5, 16, 45, 121];
        for (n, &e) in (1..=5).zip(&expected) {
            let s = enumerate_linear(IntMatrix::CAT, n).unwrap();
            assert_eq!(s.len(), e);
            assert_eq!(brute_count(IntMatrix::CAT, n), e);
            assert!(s.weights.iter().all(|&w| w == e as f64));
        }
        let s = enumerate_linear(IntMatrix::CAT, 1).unwrap();
        assert_eq!(s.points, vec![[0.0, 0.0]]);
    }

    #[test]
    fn other_matrices_match_brute_force() {
        for m in [IntMatrix([[3, 1], [2, 1]]), IntMatrix([[3, 1], [1, 0]]), IntMatrix([[-3, 2], [1, -1]])] {
            for n in 1..=4 {
                let s = enumerate_linear(m, n).unwrap();
                assert_eq!(s.len(), brute_count(m, n), "{m:?} n={n}");
                for x in &s.points {
                    let y = AnosovMap::linear(m).unwrap().iterate(*x, n);
                    assert!(torus_distance(*x, y) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn overflow_and_limit() {
        assert!(matches!(enumerate_linear(IntMatrix::CAT, 80), Err(Error::PowerOverflow { .. })));
        assert!(matches!(
            enumerate_linear_with_limit(IntMatrix::CAT, 10, 1000),
            Err(Error::TooManyPoints { .. })
        ));
    }

    #[test]
    fn rational_trace_is_one() {
        let cat = AnosovMap::cat();
        for n in 1..=8 {
            let s = enumerate_linear(IntMatrix::CAT, n).unwrap();
            assert_eq!(s.rational_weight_sum(), Some((1, 1)));
            assert_eq!(s.trace_sum(&cat, &TrigPoly::zero(), 0), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn fixed_point_phase() {
        let cat = AnosovMap::cat();
        let tau = TrigPoly::cos([1, 0], 0.5);
        let t = orbit_trace_sum(&cat, &tau, 1, 1).unwrap();
        assert!((t - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn refinement_identity_and_counts() {
        let seeds = enumerate_linear(IntMatrix::CAT, 3).unwrap();
        let same = refine_newton(&AnosovMap::cat(), &seeds, 1e-12).unwrap();
        assert_eq!(same.points, seeds.points);

        let a = shear_map(0.01);
        let s = refine_newton(&a, &enumerate_linear(IntMatrix::CAT, 2).unwrap(), 1e-12).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.residuals.iter().all(|&r| r < 1e-12));
        assert!(s.points.contains(&[0.0, 0.0]));
    }

    #[test]
    fn refined_sets_are_invariant() {
        let a = shear_map(0.01);
        for n in 1..=5 {
            let s = periodic_points(&a, n).unwrap();
            assert_eq!(s.len(), enumerate_linear(IntMatrix::CAT, n).unwrap().len());
            for x in &s.points {
                let y = a.eval(*x);
                let hit = s.points.iter().any(|p| torus_distance(*p, y) < 1e-9);
                assert!(hit);
            }
        }
    }

    #[test]
    fn linear_unstable_jacobian_is_lambda() {
        let lambda = (3.0 + 5f64.sqrt()) / 2.0;
        let cat = AnosovMap::cat();
        let s = enumerate_linear(IntMatrix::CAT, 3).unwrap();
        let f = unstable_frame(&cat, &s).unwrap();
        assert!(f.jacobians.iter().all(|j| (j - lambda).abs() < 1e-12));
    }

    #[test]
    fn perturbed_frame_is_invariant_and_multiplicative() {
        let lambda = (3.0 + 5f64.sqrt()) / 2.0;
        let a = shear_map(0.01);
        let n = 4;
        let s = periodic_points(&a, n).unwrap();
        let f = unstable_frame(&a, &s).unwrap();
        for (i, x) in s.points.iter().enumerate() {
            assert!((f.jacobians[i] - lambda).abs() < 0.1);
            // D_x A u(x) ∥ u(Ax)
            let du = normalize(apply(a.jacobian(*x), f.directions[i]));
            let y = a.eval(*x);
            let uy = unstable_direction(&a, y, n).unwrap();
            let cross = du[0] * uy[1] - du[1] * uy[0];
            assert!(cross.abs() < 1e-8);
            // product of Jᵘ along the orbit
            let mut prod = 1.0;
            let mut z = *x;
            for _ in 0..n {
                let u = unstable_direction(&a, z, n).unwrap();
                let v = apply(a.jacobian(z), u);
                prod *= v[0].hypot(v[1]);
                z = a.eval(z);
            }
            assert!((prod - s.jac_u[i]).abs() < 1e-8 * prod);
        }
    }

    #[test]
    fn negated_charge_conjugates() {
        let a = shear_map(0.01);
        let tau = TrigPoly::cos([1, 0], 0.5);
        let s = periodic_points(&a, 3).unwrap().with_birkhoff(&a, &tau);
        let b = s.birkhoff.clone().unwrap();
        let p = s.trace_sum_from(&b, 2);
        let m = s.trace_sum_from(&b, -2);
        assert!((p - m.conj()).norm() < 1e-14);
    }

    #[test]
    fn csv_columns() {
        let cat = AnosovMap::cat();
        let s = enumerate_linear(IntMatrix::CAT, 2)
            .unwrap()
            .with_birkhoff(&cat, &TrigPoly::cos([1, 0], 1.0));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,x1,x2,weight,jac_u,birkhoff\n"));
        assert_eq!(text.lines().count(), 6);
    }
}
