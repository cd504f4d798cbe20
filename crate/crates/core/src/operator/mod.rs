//! The twisted Koopman operator `L_q f = e^{2πiqτ}·(f ∘ A)` truncated to
//! the frequency box `|α|_∞ ≤ K` of the anisotropic space.
//!
//! In the ρ-basis the matrix is `T[β,α] = (w_α/w_β)·ĝ_α(β)` with
//! `g_α = e^{2πiqτ}·(e_α ∘ A)`. The coefficients come from an oversampled
//! FFT; the largest coefficient near the Nyquist band is reported as the
//! aliasing tail and must stay below [`ALIASING_LIMIT`].

mod fredholm;
mod grid;
mod spectral;

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::aniso::{FrequencyBox, SpaceElement, WeightScheme};
use crate::exec::try_map_indexed;
use crate::torus::{AnosovMap, MapDescription, TrigPoly};
use crate::{Error, Result};

pub use fredholm::{fredholm, polynomial_roots};
pub use grid::Fft2;
pub use spectral::{
    entry_decay_fit, k_stability, matrix_trace, spectrum, structural_rank, trace_by_matrix_power,
    trace_by_power_sum, trace_growth_check, KStability, SpectralReport, TraceGrowthReport,
    TraceGrowthRow,
};

pub const ALIASING_LIMIT: f64 = 1e-10;
/// Largest grid [`assemble_auto`] tries for the column-by-column path.
pub const MAX_GENERAL_GRID: usize = 2048;
/// Largest grid [`assemble_auto`] tries for linear maps.
pub const MAX_LINEAR_GRID: usize = 4096;
/// Largest grid for linear maps with a roof `τ₁(x₁) + τ₂(x₂)`, whose twist
/// needs only one-dimensional transforms.
pub const MAX_SEPARABLE_GRID: usize = 1 << 16;

/// Everything needed to reproduce an assembly.
#[derive(Clone, Debug, Serialize)]
pub struct AssemblyInfo {
    pub map: MapDescription,
    pub tau: TrigPoly,
    pub q: i64,
    pub r: f64,
    pub k: usize,
    pub grid: usize,
    pub aliasing_tail: f64,
    /// True when the single-FFT route for linear maps was used.
    pub linear_path: bool,
}

pub struct TruncatedOperator {
    pub bx: FrequencyBox,
    pub matrix: Mat<Complex64>,
    pub info: AssemblyInfo,
}

/// Minimal grid size `4·(K + |q|·deg τ + deg p)`.
pub fn required_grid(map: &AnosovMap, tau: &TrigPoly, q: i64, k: usize) -> usize {
    4 * (k + (q.unsigned_abs() as usize) * tau.degree() as usize + map.perturbation_degree() as usize)
}

fn twist_on_grid(fft: &Fft2, tau: &TrigPoly, q: i64) -> Result<Vec<Complex64>> {
    let h: Vec<Complex64> = fft.values(tau).iter().map(|t| twist(*t, q)).collect();
    if h.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::WeightOverflow(format!(
            "e^(2πiqτ) is not finite on the grid for q = {q}"
        )));
    }
    Ok(h)
}

fn twist(t: Complex64, q: i64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI * q as f64) * t).exp()
}

/// Fourier coefficients of `h = e^{2πiqτ}` on a `G`-point band.
enum TwistCoefficients {
    Full { fft: Fft2, data: Vec<Complex64> },
    /// `τ = τ₁(x₁) + τ₂(x₂)`, so `ĥ(k) = ĥ₁(k₁)·ĥ₂(k₂)`.
    Separable { g: usize, h1: Vec<Complex64>, h2: Vec<Complex64> },
}

impl TwistCoefficients {
    fn new(tau: &TrigPoly, q: i64, grid: usize) -> Result<Self> {
        if tau.terms().all(|(a, _)| a[0] == 0 || a[1] == 0) {
            let mut planner = rustfft::FftPlanner::new();
            let inverse = planner.plan_fft_inverse(grid);
            let forward = planner.plan_fft_forward(grid);
            let g = grid as i64;
            let axis = |ax: usize, with_constant: bool| -> Result<Vec<Complex64>> {
                let mut v = vec![Complex64::default(); grid];
                for (a, c) in tau.terms() {
                    let on_axis = a[1 - ax] == 0 && (a[ax] != 0 || with_constant);
                    if on_axis {
                        v[a[ax].rem_euclid(g) as usize] += c;
                    }
                }
                inverse.process(&mut v);
                let mut h: Vec<Complex64> = v.iter().map(|t| twist(*t, q)).collect();
                if h.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                    return Err(Error::WeightOverflow(format!(
                        "e^(2πiqτ) is not finite on the grid for q = {q}"
                    )));
                }
                forward.process(&mut h);
                h.iter_mut().for_each(|c| *c /= grid as f64);
                Ok(h)
            };
            return Ok(TwistCoefficients::Separable {
                g: grid,
                h1: axis(0, true)?,
                h2: axis(1, false)?,
            });
        }
        let fft = Fft2::new(grid);
        let mut data = twist_on_grid(&fft, tau, q)?;
        fft.coefficients(&mut data);
        Ok(TwistCoefficients::Full { fft, data })
    }

    /// `ĥ(k)` for `|k|_∞ < G/2`, zero beyond.
    fn get(&self, k: [i64; 2]) -> Complex64 {
        let g = match self {
            TwistCoefficients::Full { fft, .. } => fft.size() as i64,
            TwistCoefficients::Separable { g, .. } => *g as i64,
        };
        if k[0].abs() >= g / 2 || k[1].abs() >= g / 2 {
            return Complex64::default();
        }
        match self {
            TwistCoefficients::Full { fft, data } => data[fft.slot(k)],
            TwistCoefficients::Separable { h1, h2, .. } => {
                h1[k[0].rem_euclid(g) as usize] * h2[k[1].rem_euclid(g) as usize]
            }
        }
    }

    fn aliasing_tail(&self) -> f64 {
        match self {
            TwistCoefficients::Full { fft, data } => fft.aliasing_tail(data),
            TwistCoefficients::Separable { g, h1, h2 } => {
                let cut = (7 * g / 16) as i64;
                let stats = |h: &[Complex64]| {
                    let gi = *g as i64;
                    let mut tail: f64 = 0.0;
                    let mut max: f64 = 0.0;
                    for (i, c) in h.iter().enumerate() {
                        let k = if i as i64 >= gi / 2 { i as i64 - gi } else { i as i64 };
                        max = max.max(c.norm());
                        if k.abs() >= cut {
                            tail = tail.max(c.norm());
                        }
                    }
                    (tail, max)
                };
                let (t1, m1) = stats(h1);
                let (t2, m2) = stats(h2);
                (t1 * m2).max(t2 * m1)
            }
        }
    }
}

/// Assembles `L_q` on the box `|α|_∞ ≤ K` with a `G × G` grid.
pub fn assemble(
    map: &AnosovMap,
    tau: &TrigPoly,
    q: i64,
    scheme: &WeightScheme,
    k: usize,
    grid: usize,
) -> Result<TruncatedOperator> {
    assemble_with(map, tau, q, scheme, k, grid, map.is_linear())
}

fn assemble_with(
    map: &AnosovMap,
    tau: &TrigPoly,
    q: i64,
    scheme: &WeightScheme,
    k: usize,
    grid: usize,
    single_fft: bool,
) -> Result<TruncatedOperator> {
    let required = required_grid(map, tau, q, k);
    if grid < required {
        return Err(Error::GridTooSmall { grid, required });
    }
    if scheme.matrix() != map.matrix() {
        return Err(Error::InvalidInput(
            "weight scheme and map have different linear parts".into(),
        ));
    }
    let bx = FrequencyBox::new(k);
    let log_w: Vec<f64> = bx.iter().map(|a| scheme.log_weight(a)).collect();
    let spread = log_w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if 2.0 * spread > 700.0 {
        return Err(Error::WeightOverflow(format!(
            "weight ratios reach e^{:.0} at r = {}, K = {k}",
            2.0 * spread,
            scheme.r
        )));
    }
    let mt = map.matrix().transpose();
    let d = bx.len();

    let (columns, tail, linear_path) = if single_fft {
        // g_α = h·e_{Mᵀα}, so ĝ_α(β) = ĥ(β − Mᵀα)
        let hc = TwistCoefficients::new(tau, q, grid)?;
        let cols: Vec<Vec<Complex64>> = (0..d)
            .map(|j| {
                let m_alpha = mt.apply(bx.freq(j));
                bx.iter()
                    .map(|beta| hc.get([beta[0] - m_alpha[0], beta[1] - m_alpha[1]]))
                    .collect()
            })
            .collect();
        (cols, hc.aliasing_tail(), true)
    } else {
        let fft = Fft2::new(grid);
        let h = twist_on_grid(&fft, tau, q)?;
        let lifted: Vec<[f64; 2]> = (0..grid * grid).map(|s| map.lift(fft.point(s))).collect();
        let out = try_map_indexed(d, |j| {
            let alpha = bx.freq(j);
            let (a0, a1) = (alpha[0] as f64, alpha[1] as f64);
            let mut g: Vec<Complex64> = lifted
                .iter()
                .zip(&h)
                .map(|(y, hv)| {
                    let t = a0 * y[0] + a1 * y[1];
                    hv * Complex64::from_polar(1.0, 2.0 * PI * (t - t.floor()))
                })
                .collect();
            fft.coefficients(&mut g);
            let tail = fft.aliasing_tail(&g);
            let col: Vec<Complex64> = bx.iter().map(|beta| g[fft.slot(beta)]).collect();
            Ok::<_, Error>((col, tail))
        })?;
        let tail = out.iter().map(|o| o.1).fold(0.0, f64::max);
        (out.into_iter().map(|o| o.0).collect(), tail, false)
    };
    if !(tail < ALIASING_LIMIT) {
        return Err(Error::Aliasing {
            tail,
            threshold: ALIASING_LIMIT,
            grid,
        });
    }
    let matrix = Mat::from_fn(d, d, |i, j| columns[j][i] * (log_w[j] - log_w[i]).exp());
    Ok(TruncatedOperator {
        bx,
        matrix,
        info: AssemblyInfo {
            map: map.clone().into(),
            tau: tau.clone(),
            q,
            r: scheme.r,
            k,
            grid,
            aliasing_tail: tail,
            linear_path,
        },
    })
}

/// [`assemble`] with the smallest power-of-two grid, at least `min_grid`,
/// whose aliasing tail passes.
pub fn assemble_auto(
    map: &AnosovMap,
    tau: &TrigPoly,
    q: i64,
    scheme: &WeightScheme,
    k: usize,
    min_grid: usize,
) -> Result<TruncatedOperator> {
    let separable = tau.terms().all(|(a, _)| a[0] == 0 || a[1] == 0);
    let max = match (map.is_linear(), separable) {
        (true, true) => MAX_SEPARABLE_GRID,
        (true, false) => MAX_LINEAR_GRID,
        _ => MAX_GENERAL_GRID,
    };
    let mut grid = min_grid.max(required_grid(map, tau, q, k)).next_power_of_two();
    loop {
        match assemble(map, tau, q, scheme, k, grid) {
            Err(Error::Aliasing { .. }) if grid < max => grid *= 2,
            other => return other,
        }
    }
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.bx.len()
    }

    pub fn entry(&self, beta: [i64; 2], alpha: [i64; 2]) -> Complex64 {
        match (self.bx.index(beta), self.bx.index(alpha)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => Complex64::default(),
        }
    }

    /// `T b` for a coefficient vector in the ρ-basis.
    pub fn apply(&self, v: &SpaceElement) -> SpaceElement {
        assert_eq!(v.bx, self.bx, "element lives on a different box");
        let d = self.dim();
        let mut out = SpaceElement::zeros(self.bx);
        for (j, &b) in v.coeffs.iter().enumerate() {
            if b == Complex64::default() {
                continue;
            }
            let col = self.matrix.col(j);
            for i in 0..d {
                out.coeffs[i] += col[i] * b;
            }
        }
        out
    }

    /// Sum of the diagonal.
    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// ℓ² norm of each column.
    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|j| self.matrix.col(j).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{IntMatrix, Shear, ShearAxis};

    fn cat_scheme(r: f64) -> WeightScheme {
        WeightScheme::new(IntMatrix::CAT, r).unwrap()
    }

    #[test]
    fn linear_untwisted_is_weighted_permutation() {
        let cat = AnosovMap::cat();
        let s = cat_scheme(0.02);
        let t = assemble(&cat, &TrigPoly::zero(), 0, &s, 6, 64).unwrap();
        assert_eq!(t.entry([0, 0], [0, 0]), Complex64::new(1.0, 0.0));
        let mt = IntMatrix::CAT.transpose();
        for (j, alpha) in t.bx.iter().enumerate() {
            let image = mt.apply(alpha);
            for (i, beta) in t.bx.iter().enumerate() {
                let v = t.matrix[(i, j)];
                if beta == image {
                    let w = s.weight(alpha) / s.weight(beta);
                    assert!((v.re - w).abs() < 1e-12 && v.im.abs() < 1e-12);
                } else {
                    assert!(v.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn constant_roof_is_a_phase() {
        let cat = AnosovMap::cat();
        let s = cat_scheme(0.02);
        let c = 0.37;
        let t0 = assemble(&cat, &TrigPoly::zero(), 0, &s, 4, 64).unwrap();
        let t = assemble(&cat, &TrigPoly::constant(c), 3, &s, 4, 64).unwrap();
        let phase = Complex64::from_polar(1.0, 2.0 * PI * 3.0 * c);
        for i in 0..t.dim() {
            for j in 0..t.dim() {
                assert!((t.matrix[(i, j)] - phase * t0.matrix[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn general_path_matches_linear_path() {
        let cat = AnosovMap::cat();
        let tau = TrigPoly::cos([1, 0], 0.5);
        let s = cat_scheme(0.02);
        let a = assemble(&cat, &tau, 1, &s, 4, 128).unwrap();
        let b = assemble_with(&cat, &tau, 1, &s, 4, 128, false).unwrap();
        assert!(a.info.linear_path && !b.info.linear_path);
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                assert!((a.matrix[(i, j)] - b.matrix[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn separable_twist_matches_full_transform() {
        let tau = &(&TrigPoly::cos([1, 0], 0.4) + &TrigPoly::sin([0, 2], -0.3))
            + &TrigPoly::constant(0.21);
        let sep = TwistCoefficients::new(&tau, 2, 64).unwrap();
        assert!(matches!(sep, TwistCoefficients::Separable { .. }));
        let fft = Fft2::new(64);
        let mut full = twist_on_grid(&fft, &tau, 2).unwrap();
        fft.coefficients(&mut full);
        let full = TwistCoefficients::Full { fft, data: full };
        for k1 in -31..32 {
            for k2 in -31..32 {
                assert!((sep.get([k1, k2]) - full.get([k1, k2])).norm() < 1e-13);
            }
        }
        assert!((sep.aliasing_tail() - full.aliasing_tail()).abs() < 1e-13);
    }

    #[test]
    fn grid_rules() {
        let cat = AnosovMap::cat();
        let s = cat_scheme(0.02);
        let tau = TrigPoly::cos([1, 0], 0.5);
        assert!(matches!(
            assemble(&cat, &tau, 1, &s, 8, 16),
            Err(Error::GridTooSmall { .. })
        ));
        // e^{2πi·20·cos} needs far more than 64 points
        assert!(matches!(
            assemble(&cat, &TrigPoly::cos([1, 0], 1.0), 20, &s, 4, 128),
            Err(Error::Aliasing { .. })
        ));
        let t = assemble_auto(&cat, &TrigPoly::cos([1, 0], 1.0), 20, &s, 4, 64).unwrap();
        assert!(t.info.grid > 128 && t.info.aliasing_tail < ALIASING_LIMIT);
    }

    #[test]
    fn perturbed_columns_decay() {
        let a = AnosovMap::cat()
            .with_shear(Shear::sine(ShearAxis::First, 0.02))
            .unwrap();
        let s = cat_scheme(0.05);
        let t = assemble(&a, &TrigPoly::zero(), 0, &s, 6, 128).unwrap();
        let fit = entry_decay_fit(&t).unwrap();
        assert!(fit.slope < 0.0, "{fit:?}");
    }
}
