use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use super::{assemble_auto, fredholm, TruncatedOperator};
use crate::aniso::WeightScheme;
use crate::fit::{least_squares, LineFit};
use crate::torus::{AnosovMap, TrigPoly};
use crate::{Error, Result};

/// Eigenvalues below this fraction of the top singular value are treated as
/// unresolved.
pub const RESOLVED_FRACTION: f64 = 1e-12;
/// Tolerance between the two trace routes.
pub const TRACE_AGREEMENT: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub q: i64,
    pub k: usize,
    pub r: f64,
    pub grid: usize,
    pub aliasing_tail: f64,
    /// Sorted by decreasing modulus, ties by argument.
    pub eigenvalues: Vec<Complex64>,
    /// Decreasing.
    pub singular_values: Vec<f64>,
    pub spectral_radius: f64,
    /// Number of eigenvalues with modulus at least `1e-12·μ₁`.
    pub resolved: usize,
    /// `Tr(Tⁿ)` for `n = 1..=n_max` from eigenvalue power sums.
    pub traces: Vec<Complex64>,
    /// `|Tr(T²)|` difference between the power sum and `Σ T_ij T_ji`.
    pub trace_check_n2: f64,
    /// Coefficients of `det(I − ζT)` up to degree `n_max`.
    pub fredholm: Vec<Complex64>,
    /// `log|λ_k|` against `√k` over the resolved range.
    pub eigen_decay: Option<LineFit>,
    /// Frequencies `α` of the box with `Mᵀα` also in the box. The other
    /// columns only carry the tail of the twist, so singular values past
    /// this index describe the truncation rather than the operator.
    pub structural_rank: usize,
    /// `log μ_n` against `√n` for `10 ≤ n ≤ min(resolved, structural rank)`.
    pub singular_decay: Option<LineFit>,
}

pub(crate) fn sort_by_modulus(v: &mut [Complex64]) {
    v.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(a.arg().total_cmp(&b.arg()))
    });
}

pub(crate) fn eigenvalues(m: &Mat<Complex64>) -> Result<Vec<Complex64>> {
    let mut ev = m
        .eigenvalues()
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    sort_by_modulus(&mut ev);
    Ok(ev)
}

pub(crate) fn singular_values(m: &Mat<Complex64>) -> Result<Vec<f64>> {
    let mut sv = m
        .singular_values()
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

pub fn trace_by_power_sum(eigenvalues: &[Complex64], n: usize) -> Complex64 {
    crate::sum::neumaier_complex(eigenvalues.iter().map(|l| l.powu(n as u32)))
}

/// `Tr(Tⁿ)` from explicit matrix products.
pub fn trace_by_matrix_power(t: &TruncatedOperator, n: usize) -> Complex64 {
    let m = &t.matrix;
    let d = t.dim();
    match n {
        0 => Complex64::new(d as f64, 0.0),
        1 => t.trace(),
        2 => {
            let mut acc = Complex64::default();
            for i in 0..d {
                for j in 0..d {
                    acc += m[(i, j)] * m[(j, i)];
                }
            }
            acc
        }
        _ => {
            let mut p = m.clone();
            for _ in 1..n {
                p = &p * m;
            }
            (0..d).map(|i| p[(i, i)]).sum()
        }
    }
}

/// `Tr(Tⁿ)` by both routes; fails when they differ by more than
/// `1e-8·max(1, |Tr|)`.
pub fn matrix_trace(t: &TruncatedOperator, n: usize) -> Result<Complex64> {
    let ev = eigenvalues(&t.matrix)?;
    let power_sum = trace_by_power_sum(&ev, n);
    let matrix_power = trace_by_matrix_power(t, n);
    if (power_sum - matrix_power).norm() > TRACE_AGREEMENT * matrix_power.norm().max(1.0) {
        return Err(Error::TraceMismatch {
            n,
            power_sum,
            matrix_power,
        });
    }
    Ok(matrix_power)
}

fn sqrt_fit(values: &[f64], first: usize) -> Option<LineFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = values
        .iter()
        .enumerate()
        .skip(first)
        .map(|(i, v)| (((i + 1) as f64).sqrt(), v.ln()))
        .unzip();
    least_squares(&xs, &ys)
}

/// Number of box frequencies whose image under `Mᵀ` stays in the box.
pub fn structural_rank(t: &TruncatedOperator) -> usize {
    let mt = t.info.map.matrix.transpose();
    t.bx.iter().filter(|&a| t.bx.contains(mt.apply(a))).count()
}

/// Full spectral data with traces and Fredholm coefficients up to `n_max`.
pub fn spectrum(t: &TruncatedOperator, n_max: usize) -> Result<SpectralReport> {
    let eigenvalues = eigenvalues(&t.matrix)?;
    let singular_values = singular_values(&t.matrix)?;
    let mu1 = singular_values.first().copied().unwrap_or(0.0);
    let floor = RESOLVED_FRACTION * mu1;
    let resolved = eigenvalues.iter().take_while(|l| l.norm() >= floor).count();
    let resolved_sv = singular_values.iter().take_while(|&&s| s >= floor).count();
    let structural_rank = structural_rank(t);
    let traces: Vec<Complex64> = (1..=n_max).map(|n| trace_by_power_sum(&eigenvalues, n)).collect();
    let trace_check_n2 = (trace_by_power_sum(&eigenvalues, 2) - trace_by_matrix_power(t, 2)).norm();
    let moduli: Vec<f64> = eigenvalues[..resolved].iter().map(|l| l.norm()).collect();
    Ok(SpectralReport {
        q: t.info.q,
        k: t.info.k,
        r: t.info.r,
        grid: t.info.grid,
        aliasing_tail: t.info.aliasing_tail,
        spectral_radius: eigenvalues.first().map(|l| l.norm()).unwrap_or(0.0),
        resolved,
        fredholm: fredholm(&traces, n_max),
        traces,
        trace_check_n2,
        eigen_decay: sqrt_fit(&moduli, 0),
        singular_decay: sqrt_fit(&singular_values[..resolved_sv.min(structural_rank)], 9),
        structural_rank,
        eigenvalues,
        singular_values,
    })
}

/// Exponential decay of the entry envelope: for each `s = |α|₁ + |β|₁` the
/// largest `|T[β,α]|`, fitted as `log max ≈ a + slope·s`. Bins whose
/// envelope is below `1e-13` of the overall maximum are ignored.
pub fn entry_decay_fit(t: &TruncatedOperator) -> Option<LineFit> {
    let k = t.bx.k;
    let mut envelope = vec![0.0f64; 4 * k + 1];
    for (j, a) in t.bx.iter().enumerate() {
        for (i, b) in t.bx.iter().enumerate() {
            let s = (a[0].abs() + a[1].abs() + b[0].abs() + b[1].abs()) as usize;
            envelope[s] = envelope[s].max(t.matrix[(i, j)].norm());
        }
    }
    let top = envelope.iter().copied().fold(0.0, f64::max);
    let (xs, ys): (Vec<f64>, Vec<f64>) = envelope
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 1e-13 * top)
        .map(|(s, v)| (s as f64, v.ln()))
        .unzip();
    least_squares(&xs, &ys)
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceGrowthRow {
    pub n: usize,
    pub root: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceGrowthReport {
    pub spectral_radius: f64,
    pub slack: f64,
    pub rows: Vec<TraceGrowthRow>,
    pub passed: bool,
}

/// Checks `|Tr(Tⁿ)|^{1/n} ≤ ρ + 0.02` for `n` in the upper half of the
/// computed range.
pub fn trace_growth_check(report: &SpectralReport) -> TraceGrowthReport {
    let slack = 0.02;
    let n_max = report.traces.len();
    let rows: Vec<TraceGrowthRow> = (n_max.div_ceil(2).max(1)..=n_max)
        .map(|n| {
            let root = report.traces[n - 1].norm().powf(1.0 / n as f64);
            TraceGrowthRow {
                n,
                root,
                passed: root <= report.spectral_radius + slack,
            }
        })
        .collect();
    TraceGrowthReport {
        spectral_radius: report.spectral_radius,
        slack,
        passed: rows.iter().all(|r| r.passed),
        rows,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KStability {
    pub k1: usize,
    pub k2: usize,
    pub moduli_k1: Vec<f64>,
    pub moduli_k2: Vec<f64>,
    pub change: f64,
    pub limit: f64,
}

/// Compares the top `count` eigenvalue moduli at truncations `k1` and `k2`;
/// fails with [`Error::Unstable`] when they move by more than `limit`.
#[allow(clippy::too_many_arguments)]
pub fn k_stability(
    map: &AnosovMap,
    tau: &TrigPoly,
    q: i64,
    scheme: &WeightScheme,
    k1: usize,
    k2: usize,
    min_grid: usize,
    count: usize,
    limit: f64,
) -> Result<KStability> {
    let top = |k: usize| -> Result<Vec<f64>> {
        let t = assemble_auto(map, tau, q, scheme, k, min_grid)?;
        Ok(eigenvalues(&t.matrix)?
            .iter()
            .take(count)
            .map(|l| l.norm())
            .collect())
    };
    let (a, b) = (top(k1)?, top(k2)?);
    let change = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if !(change < limit) {
        return Err(Error::Unstable {
            k1,
            k2,
            change,
            limit,
        });
    }
    Ok(KStability {
        k1,
        k2,
        moduli_k1: a,
        moduli_k2: b,
        change,
        limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::IntMatrix;

    fn cat_op(tau: &TrigPoly, q: i64, k: usize) -> TruncatedOperator {
        let s = WeightScheme::new(IntMatrix::CAT, 0.02).unwrap();
        assemble_auto(&AnosovMap::cat(), tau, q, &s, k, 64).unwrap()
    }

    #[test]
    fn structural_rank_counts_columns_kept_in_the_box() {
        // in the 3×3 box, (Mᵀ)α stays inside for α = 0, ±(0,1), ±(1,−1)
        assert_eq!(structural_rank(&cat_op(&TrigPoly::zero(), 0, 1)), 5);
        let t = cat_op(&TrigPoly::zero(), 0, 6);
        let zero_cols = t.column_norms().iter().filter(|&&c| c == 0.0).count();
        assert_eq!(structural_rank(&t) + zero_cols, t.dim());
    }

    #[test]
    fn untwisted_cat_spectrum() {
        let t = cat_op(&TrigPoly::zero(), 0, 8);
        let rep = spectrum(&t, 6).unwrap();
        assert!((rep.eigenvalues[0] - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!((rep.spectral_radius - 1.0).abs() < 1e-10);
        for tr in &rep.traces {
            assert!((tr - Complex64::new(1.0, 0.0)).norm() < 1e-8);
        }
        // singular values are the weight ratios of the permutation
        let s = WeightScheme::new(IntMatrix::CAT, 0.02).unwrap();
        let mt = IntMatrix::CAT.transpose();
        let mut ratios: Vec<f64> = t
            .bx
            .iter()
            .filter(|&a| t.bx.contains(mt.apply(a)))
            .map(|a| s.weight(a) / s.weight(mt.apply(a)))
            .collect();
        ratios.sort_by(|a, b| b.total_cmp(a));
        for (x, y) in ratios.iter().zip(&rep.singular_values) {
            assert!((x - y).abs() < 1e-12);
        }
        let growth = trace_growth_check(&rep);
        assert!(growth.passed);
    }

    #[test]
    fn report_invariants() {
        let tau = TrigPoly::cos([1, 0], 0.5);
        let t = cat_op(&tau, 1, 8);
        let rep = spectrum(&t, 4).unwrap();
        let sum: Complex64 = rep.eigenvalues.iter().sum();
        assert!((sum - t.trace()).norm() < 1e-8);
        assert!(rep.singular_values[0] >= rep.spectral_radius - 1e-12);
        assert!(rep.trace_check_n2 < 1e-8);
        let mut pe = 1.0;
        let mut ps = 1.0;
        for (l, s) in rep.eigenvalues.iter().zip(&rep.singular_values) {
            pe *= l.norm();
            ps *= s;
            assert!(pe <= ps * (1.0 + 1e-9) + 1e-300);
        }
        assert!(rep.spectral_radius <= 1.0 + 1e-8);
    }

    #[test]
    fn constant_roof_rotates_the_spectrum() {
        let c = 0.21;
        let q = 2;
        let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * q as f64 * c);
        let base = TrigPoly::cos([1, 0], 0.5);
        let shifted = &base + &TrigPoly::constant(c);
        for (t0, t1, q0) in [(TrigPoly::zero(), TrigPoly::constant(c), 0), (base.clone(), shifted, q)] {
            let a = spectrum(&cat_op(&t0, q0, 8), 3).unwrap();
            let b = spectrum(&cat_op(&t1, q, 8), 3).unwrap();
            // eigenvalues of nilpotent blocks are ill-conditioned; compare
            // the well-separated part
            for la in a.eigenvalues.iter().filter(|l| l.norm() > 1e-3) {
                let target = la * phase;
                assert!(b.eigenvalues.iter().any(|lb| (lb - target).norm() < 1e-9));
            }
            for (x, y) in a.traces.iter().zip(&b.traces) {
                assert!((x.norm() - y.norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn both_trace_routes_agree() {
        let t = cat_op(&TrigPoly::cos([1, 0], 0.5), 1, 6);
        for n in 1..=4 {
            matrix_trace(&t, n).unwrap();
        }
        let tm = cat_op(&TrigPoly::cos([1, 0], 0.5), -1, 6);
        for n in 1..=3 {
            let a = matrix_trace(&t, n).unwrap();
            let b = matrix_trace(&tm, n).unwrap();
            assert!((a - b.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn k_gate_reports_failure() {
        let s = WeightScheme::new(IntMatrix::CAT, 0.02).unwrap();
        let tau = TrigPoly::cos([1, 0], 0.5);
        let ok = k_stability(&AnosovMap::cat(), &tau, 1, &s, 8, 12, 64, 5, 1e-6).unwrap();
        assert!(ok.change < 1e-6);
        let bad = k_stability(&AnosovMap::cat(), &tau, 6, &s, 2, 4, 64, 5, 1e-12);
        assert!(matches!(bad, Err(Error::Unstable { .. })));
    }
}
