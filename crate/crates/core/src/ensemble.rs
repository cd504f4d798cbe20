//! Gaussian random trigonometric polynomials `P_N = Σ X_j φ_j` over the
//! real Laplace eigenbasis, and the statistics of their periodic-orbit
//! trace sums.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::exec::map_indexed;
use crate::orbits::{periodic_points, PeriodicOrbitSet};
use crate::sum::{neumaier, neumaier_complex, Neumaier};
use crate::torus::{complexified_sup_norm, AnosovMap, Freq, TrigPoly};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Constant,
    Cos,
    Sin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BasisLabel {
    pub alpha: Freq,
    pub kind: Kind,
}

/// Real orthonormal Laplace eigenfunctions with eigenvalue at most `N`:
/// the constant, then `√2 cos(2πα·x)`, `√2 sin(2πα·x)` for one
/// lexicographically positive `α` per antipodal pair, ordered by `|α|²`
/// then `α`.
#[derive(Clone, Debug, Serialize)]
pub struct LaplaceEigenbasis {
    pub cutoff: f64,
    pub labels: Vec<BasisLabel>,
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub functions: Vec<TrigPoly>,
}

pub fn build_eigenbasis(cutoff: f64) -> Result<LaplaceEigenbasis> {
    if !(cutoff >= 0.0) || !cutoff.is_finite() {
        return Err(Error::InvalidInput(format!("cutoff must be finite and >= 0, got {cutoff}")));
    }
    // relative slack so that N = 4π²·m computed in floating point keeps |α|² = m
    let bound = cutoff / (4.0 * PI * PI) * (1.0 + 1e-12);
    let r = bound.sqrt().floor() as i64;
    let mut reps: Vec<Freq> = Vec::new();
    for a in 0..=r {
        for b in -r..=r {
            let positive = a > 0 || (a == 0 && b > 0);
            if positive && ((a * a + b * b) as f64) <= bound {
                reps.push([a, b]);
            }
        }
    }
    reps.sort_by_key(|a| (a[0] * a[0] + a[1] * a[1], *a));
    let mut labels = vec![BasisLabel {
        alpha: [0, 0],
        kind: Kind::Constant,
    }];
    let mut eigenvalues = vec![0.0];
    let mut functions = vec![TrigPoly::constant(1.0)];
    let s2 = 2f64.sqrt();
    for alpha in reps {
        let lambda = 4.0 * PI * PI * (alpha[0] * alpha[0] + alpha[1] * alpha[1]) as f64;
        for kind in [Kind::Cos, Kind::Sin] {
            labels.push(BasisLabel { alpha, kind });
            eigenvalues.push(lambda);
            functions.push(match kind {
                Kind::Cos => TrigPoly::cos(alpha, s2),
                _ => TrigPoly::sin(alpha, s2),
            });
        }
    }
    Ok(LaplaceEigenbasis {
        cutoff,
        labels,
        eigenvalues,
        functions,
    })
}

impl LaplaceEigenbasis {
    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    /// Largest `|Gram − I|` entry for the midpoint rule on a `G × G` grid,
    /// which is exact for these frequencies when `G` exceeds twice the
    /// largest one.
    pub fn gram_defect(&self) -> f64 {
        let kmax = self
            .labels
            .iter()
            .map(|l| l.alpha[0].abs().max(l.alpha[1].abs()))
            .max()
            .unwrap_or(0) as usize;
        let g = 2 * kmax + 2;
        let pts: Vec<[f64; 2]> = (0..g * g)
            .map(|s| [(s / g) as f64 / g as f64, (s % g) as f64 / g as f64])
            .collect();
        let vals: Vec<Vec<f64>> = self
            .functions
            .iter()
            .map(|f| pts.iter().map(|&x| f.eval_real(x)).collect())
            .collect();
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..=i {
                let ip = neumaier(vals[i].iter().zip(&vals[j]).map(|(a, b)| a * b)) / (g * g) as f64;
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }

    /// `P = Σ X_j φ_j`.
    pub fn combine(&self, coeffs: &[f64]) -> TrigPoly {
        let mut terms = Vec::new();
        for (f, &x) in self.functions.iter().zip(coeffs) {
            terms.extend(f.terms().map(|(a, c)| (a, c * x)));
        }
        TrigPoly::from_terms(terms)
    }

    /// `φ_j(x)` for every basis function.
    pub fn values(&self, x: [f64; 2]) -> Vec<f64> {
        self.functions.iter().map(|f| f.eval_real(x)).collect()
    }

    /// `φ_j⁽ⁿ⁾(x)` for every basis function.
    pub fn birkhoff_values(&self, map: &AnosovMap, x: [f64; 2], n: usize) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim()];
        let mut y = crate::torus::reduce_point(x);
        for _ in 0..n {
            for (a, f) in acc.iter_mut().zip(&self.functions) {
                *a += f.eval_real(y);
            }
            y = map.eval(y);
        }
        acc
    }
}

/// The independent stream for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn sample_coefficients(basis: &LaplaceEigenbasis, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..basis.dim()).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn sample(basis: &LaplaceEigenbasis, rng: &mut ChaCha8Rng) -> TrigPoly {
    basis.combine(&sample_coefficients(basis, rng))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `Σ_j (φ_j⁽ⁿ⁾(x) − φ_j⁽ⁿ⁾(y))²`, the variance of `P⁽ⁿ⁾(x) − P⁽ⁿ⁾(y)`.
pub fn sigma2_pair(basis: &LaplaceEigenbasis, map: &AnosovMap, x: [f64; 2], y: [f64; 2], n: usize) -> f64 {
    sq_dist(&basis.birkhoff_values(map, x, n), &basis.birkhoff_values(map, y, n))
}

/// Birkhoff vectors `(φ_j⁽ⁿ⁾(x))_j` for every point of an orbit set.
fn birkhoff_vectors(basis: &LaplaceEigenbasis, map: &AnosovMap, set: &PeriodicOrbitSet) -> Vec<Vec<f64>> {
    map_indexed(set.len(), |i| basis.birkhoff_values(map, set.points[i], set.period))
}

/// `E|S|²` for `S = Σ e^{2πiq P⁽ⁿ⁾(x)}/|det(I − D_x Aⁿ)|`, from the
/// Gaussian characteristic function: the sum over ordered pairs of
/// `exp(−2π²q²σ²(x,x′)) / (|det_x|·|det_x′|)`.
pub fn expected_trace_sq(basis: &LaplaceEigenbasis, map: &AnosovMap, q: i64, n: usize) -> Result<f64> {
    let set = periodic_points(map, n)?;
    Ok(expected_trace_sq_on(basis, map, &set, q))
}

pub fn expected_trace_sq_on(basis: &LaplaceEigenbasis, map: &AnosovMap, set: &PeriodicOrbitSet, q: i64) -> f64 {
    let v = birkhoff_vectors(basis, map, set);
    let c = 2.0 * PI * PI * (q * q) as f64;
    let rows = map_indexed(set.len(), |i| {
        neumaier((0..set.len()).map(|j| {
            (-c * sq_dist(&v[i], &v[j])).exp() / (set.weights[i] * set.weights[j])
        }))
    });
    neumaier(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub cutoff: f64,
    pub samples: usize,
    pub seed: u64,
    pub q: i64,
    pub n: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

fn mean_and_error(values: &[f64]) -> McEstimate {
    let m = values.len();
    let mean = neumaier(values.iter().copied()) / m as f64;
    let var = if m > 1 {
        neumaier(values.iter().map(|v| (v - mean) * (v - mean))) / (m - 1) as f64
    } else {
        0.0
    };
    McEstimate {
        mean,
        std_error: (var / m as f64).sqrt(),
        samples: m,
    }
}

/// Sample mean of `|S|²` over `config.samples` independent roofs.
pub fn monte_carlo_trace_sq(config: &EnsembleConfig, map: &AnosovMap) -> Result<McEstimate> {
    if config.samples == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let basis = build_eigenbasis(config.cutoff)?;
    let set = periodic_points(map, config.n)?;
    let v = birkhoff_vectors(&basis, map, &set);
    let q = config.q as f64;
    let values = map_indexed(config.samples, |s| {
        let x = sample_coefficients(&basis, &mut sample_rng(config.seed, s as u64));
        let t = neumaier_complex(v.iter().zip(&set.weights).map(|(vi, w)| {
            let p: f64 = vi.iter().zip(&x).map(|(a, b)| a * b).sum();
            Complex64::from_polar(1.0 / w, 2.0 * PI * q * p)
        }));
        t.norm_sqr()
    });
    Ok(mean_and_error(&values))
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentRow {
    pub p: u32,
    pub mean: f64,
    /// Largest relative distance of the running mean from the final mean
    /// over the last quarter of the samples.
    pub drift: f64,
    pub stable: bool,
}

/// Empirical `E‖P_N‖_{r,∞}^p` for even `p ≤ p_max`.
pub fn moment_check(basis: &LaplaceEigenbasis, r: f64, p_max: u32, samples: usize, seed: u64) -> Vec<MomentRow> {
    let norms = map_indexed(samples, |s| {
        complexified_sup_norm(&sample(basis, &mut sample_rng(seed, s as u64)), r)
    });
    (0..=p_max)
        .step_by(2)
        .map(|p| {
            let mut acc = Neumaier::default();
            let mut running = Vec::with_capacity(samples);
            for (i, v) in norms.iter().enumerate() {
                acc.add(v.powi(p as i32));
                running.push(acc.value() / (i + 1) as f64);
            }
            let mean = running.last().copied().unwrap_or(f64::NAN);
            let drift = running[samples - samples / 4 - 1..]
                .iter()
                .map(|m| ((m - mean) / mean).abs())
                .fold(0.0, f64::max);
            MomentRow {
                p,
                mean,
                drift,
                stable: mean.is_finite() && drift < 0.1,
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DiophantineScore {
    pub score: f64,
    pub worst_alpha: Freq,
    pub m0: f64,
    pub alpha_max: i64,
    /// `score ≥ 1`.
    pub passed: bool,
}

/// Frequencies with `2 ≤ |α|₁ ≤ α_max`, one per pair `±α`.
fn half_plane(alpha_max: i64) -> impl Iterator<Item = Freq> {
    (0..=alpha_max).flat_map(move |a| {
        (-alpha_max..=alpha_max).filter_map(move |b| {
            let l1 = a + b.abs();
            ((a > 0 || b > 0) && (2..=alpha_max).contains(&l1)).then_some([a, b])
        })
    })
}

/// `min_{2 ≤ |α|₁ ≤ α_max} |α₁v₁ + α₂v₂|·|α|₁^{m0}`. A falsifier of the
/// diophantine property only: passing says nothing about larger `α`.
pub fn diophantine_check(v: [f64; 2], m0: f64, alpha_max: i64) -> DiophantineScore {
    let mut best = (f64::INFINITY, [0, 0]);
    for a in half_plane(alpha_max) {
        let l1 = (a[0].abs() + a[1].abs()) as f64;
        let s = (a[0] as f64 * v[0] + a[1] as f64 * v[1]).abs() * l1.powf(m0);
        if s < best.0 {
            best = (s, a);
        }
    }
    DiophantineScore {
        score: best.0,
        worst_alpha: best.1,
        m0,
        alpha_max,
        passed: best.0 >= 1.0,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VarianceBound {
    pub min_ratio: f64,
    pub worst_alpha: Freq,
    pub passed: bool,
}

/// `min σ²(α)/|α|₁²` over `2 ≤ |α|₁ ≤ α_max` with
/// `σ²(α) = Σ_j (α₁φ_j⁽ⁿ⁾(x) + α₂φ_j⁽ⁿ⁾(y))²`.
pub fn variance_bound_check(
    basis: &LaplaceEigenbasis,
    map: &AnosovMap,
    x: [f64; 2],
    y: [f64; 2],
    n: usize,
    alpha_max: i64,
) -> Result<VarianceBound> {
    let u = basis.birkhoff_values(map, x, n);
    let v = basis.birkhoff_values(map, y, n);
    let uu: f64 = u.iter().map(|a| a * a).sum();
    let vv: f64 = v.iter().map(|a| a * a).sum();
    let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    if uu == 0.0 && vv == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let mut best = (f64::INFINITY, [0, 0]);
    for a in half_plane(alpha_max) {
        let (a1, a2) = (a[0] as f64, a[1] as f64);
        let s2 = a1 * a1 * uu + 2.0 * a1 * a2 * uv + a2 * a2 * vv;
        let ratio = s2 / (a1.abs() + a2.abs()).powi(2);
        if ratio < best.0 {
            best = (ratio, a);
        }
    }
    Ok(VarianceBound {
        min_ratio: best.0,
        worst_alpha: best.1,
        passed: best.0 > 0.0,
    })
}

/// `σ²(α)` for a single frequency, summed directly over the basis.
pub fn sigma2_alpha(basis: &LaplaceEigenbasis, map: &AnosovMap, x: [f64; 2], y: [f64; 2], n: usize, alpha: Freq) -> f64 {
    let u = basis.birkhoff_values(map, x, n);
    let v = basis.birkhoff_values(map, y, n);
    u.iter()
        .zip(&v)
        .map(|(a, b)| {
            let s = alpha[0] as f64 * a + alpha[1] as f64 * b;
            s * s
        })
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct RateRow {
    pub m0: f64,
    pub probability: f64,
    pub reference: f64,
}

/// Fraction of sampled roofs whose Birkhoff pair `(τ⁽ⁿ⁾(x), τ⁽ⁿ⁾(y))`
/// fails [`diophantine_check`] at each exponent, next to `2^{−m0}`.
pub fn nondiophantine_rate(
    config: &EnsembleConfig,
    map: &AnosovMap,
    x: [f64; 2],
    y: [f64; 2],
    m0_range: &[f64],
    alpha_max: i64,
) -> Result<Vec<RateRow>> {
    let basis = build_eigenbasis(config.cutoff)?;
    let u = basis.birkhoff_values(map, x, config.n);
    let v = basis.birkhoff_values(map, y, config.n);
    let fails = map_indexed(config.samples, |s| {
        let c = sample_coefficients(&basis, &mut sample_rng(config.seed, s as u64));
        let pair = [
            u.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>(),
            v.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>(),
        ];
        m0_range
            .iter()
            .map(|&m0| !diophantine_check(pair, m0, alpha_max).passed)
            .collect::<Vec<bool>>()
    });
    Ok(m0_range
        .iter()
        .enumerate()
        .map(|(k, &m0)| RateRow {
            m0,
            probability: fails.iter().filter(|f| f[k]).count() as f64 / config.samples as f64,
            reference: 2f64.powf(-m0),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::enumerate_linear;
    use crate::torus::IntMatrix;

    const FOUR_PI2: f64 = 4.0 * PI * PI;

    #[test]
    fn basis_dimensions() {
        assert_eq!(build_eigenbasis(2.0 * PI * PI).unwrap().dim(), 1);
        assert_eq!(build_eigenbasis(FOUR_PI2).unwrap().dim(), 5);
        assert_eq!(build_eigenbasis(2.0 * FOUR_PI2).unwrap().dim(), 9);
        // lattice count oracle for a larger disc
        let n = 30.0 * FOUR_PI2;
        let pts = (-6i64..=6)
            .flat_map(|a| (-6i64..=6).map(move |b| a * a + b * b))
            .filter(|s| (1..=30).contains(s))
            .count();
        assert_eq!(build_eigenbasis(n).unwrap().dim(), 1 + pts);
    }

    #[test]
    fn basis_is_orthonormal() {
        for n in [FOUR_PI2, 5.0 * FOUR_PI2, 13.0 * FOUR_PI2] {
            assert!(build_eigenbasis(n).unwrap().gram_defect() < 1e-10);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_real() {
        let b = build_eigenbasis(2.0 * FOUR_PI2).unwrap();
        let p1 = sample(&b, &mut sample_rng(7, 3));
        let p2 = sample(&b, &mut sample_rng(7, 3));
        let p3 = sample(&b, &mut sample_rng(7, 4));
        assert_eq!(p1, p2);
        assert_ne!(p1, p3);
        assert!(p1.is_real(1e-15));
    }

    #[test]
    fn pointwise_mean_and_variance() {
        let b = build_eigenbasis(2.0 * FOUR_PI2).unwrap();
        let x = [0.17, 0.61];
        let m = 10_000;
        let vals: Vec<f64> = (0..m)
            .map(|s| sample(&b, &mut sample_rng(1, s)).eval_real(x))
            .collect();
        let mean = vals.iter().sum::<f64>() / m as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let expected: f64 = b.values(x).iter().map(|v| v * v).sum();
        assert!(mean.abs() < 4.0 / (m as f64).sqrt() * expected.sqrt());
        assert!((var / expected - 1.0).abs() < 0.05);
    }

    #[test]
    fn sigma2_properties() {
        let b = build_eigenbasis(FOUR_PI2).unwrap();
        let cat = AnosovMap::cat();
        let (x, y) = ([0.2, 0.4], [0.4, 0.8]);
        assert_eq!(sigma2_pair(&b, &cat, x, x, 2), 0.0);
        assert_eq!(sigma2_pair(&b, &cat, x, y, 2), sigma2_pair(&b, &cat, y, x, 2));
        // against the sample variance of P⁽ⁿ⁾(x) − P⁽ⁿ⁾(y)
        let m = 10_000;
        let d: Vec<f64> = (0..m)
            .map(|s| {
                let p = sample(&b, &mut sample_rng(2, s));
                crate::torus::birkhoff_sum(&cat, &p, x, 3) - crate::torus::birkhoff_sum(&cat, &p, y, 3)
            })
            .collect();
        let mean = d.iter().sum::<f64>() / m as f64;
        let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let s2 = sigma2_pair(&b, &cat, x, y, 3);
        assert!((var / s2 - 1.0).abs() < 0.05, "{var} vs {s2}");
    }

    #[test]
    fn expected_trace_limits() {
        let b = build_eigenbasis(FOUR_PI2).unwrap();
        let cat = AnosovMap::cat();
        for n in 1..=4 {
            assert!((expected_trace_sq(&b, &cat, 0, n).unwrap() - 1.0).abs() < 1e-12);
        }
        let set = enumerate_linear(IntMatrix::CAT, 2).unwrap();
        let diag = set.diagonal_sum();
        assert!((diag - 0.2).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for q in 0..8 {
            let e = expected_trace_sq_on(&b, &cat, &set, q);
            assert!(e >= diag - 1e-15 && e <= last + 1e-15);
            last = e;
        }
    }

    #[test]
    fn monte_carlo_basics() {
        let cat = AnosovMap::cat();
        let mut cfg = EnsembleConfig {
            cutoff: FOUR_PI2,
            samples: 200,
            seed: 5,
            q: 0,
            n: 2,
        };
        let e = monte_carlo_trace_sq(&cfg, &cat).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-12 && e.std_error < 1e-12);
        cfg.q = 1;
        cfg.samples = 2000;
        let a = monte_carlo_trace_sq(&cfg, &cat).unwrap();
        cfg.samples = 4000;
        let b = monte_carlo_trace_sq(&cfg, &cat).unwrap();
        let ratio = b.std_error / a.std_error;
        assert!((ratio * 2f64.sqrt() - 1.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn moments() {
        let b = build_eigenbasis(FOUR_PI2).unwrap();
        let rows = moment_check(&b, 0.02, 4, 4000, 9);
        assert_eq!(rows[0].mean, 1.0);
        assert!(rows[1].stable && rows[1].mean.is_finite());
        assert!(rows[2].mean >= rows[1].mean * rows[1].mean);
    }

    #[test]
    fn diophantine_examples() {
        assert_eq!(diophantine_check([1.0, 1.0], 3.0, 50).score, 0.0);
        assert_eq!(diophantine_check([0.5, 0.25], 1.0, 50).score, 0.0);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let d = diophantine_check([1.0, phi], 1.0, 100);
        assert!(d.score > 0.3, "{d:?}");
    }

    #[test]
    fn variance_form() {
        let b = build_eigenbasis(2.0 * FOUR_PI2).unwrap();
        let cat = AnosovMap::cat();
        let (x, y) = ([0.2, 0.4], [0.4, 0.8]);
        let direct: f64 = b.birkhoff_values(&cat, x, 2).iter().map(|v| v * v).sum();
        assert!((sigma2_alpha(&b, &cat, x, y, 2, [1, 0]) - direct).abs() < 1e-12);
        assert_eq!(
            sigma2_alpha(&b, &cat, x, y, 2, [3, -2]),
            sigma2_alpha(&b, &cat, x, y, 2, [-3, 2])
        );
        let vb = variance_bound_check(&b, &cat, x, y, 2, 50).unwrap();
        assert!(vb.passed && vb.min_ratio > 0.0);
        // the constant alone cannot separate two points of equal period
        let c = variance_bound_check(&build_eigenbasis(0.0).unwrap(), &cat, x, y, 2, 5).unwrap();
        assert_eq!(c.min_ratio, 0.0);
    }

    #[test]
    fn rates_are_monotone() {
        let cat = AnosovMap::cat();
        let cfg = EnsembleConfig {
            cutoff: 2.0 * FOUR_PI2,
            samples: 300,
            seed: 11,
            q: 1,
            n: 2,
        };
        let rows = nondiophantine_rate(&cfg, &cat, [0.2, 0.4], [0.4, 0.8], &[2.0, 3.0, 4.0, 6.0, 12.0], 60).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].probability <= w[0].probability);
        }
        assert!(rows[0].probability <= 1.0);
        assert_eq!(rows.last().unwrap().probability, 0.0);
    }
}
