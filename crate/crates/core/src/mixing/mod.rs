//! Correlations of the circle extension and their decay rates.
//!
//! For observables `φ = f·e^{2πiqθ}` and `ψ = g·e^{−2πiqθ}` on `T² × S¹`
//! the correlation of the skew product reduces to
//! `C(N) = ∫ f(Aᴺx) e^{2πiqτ⁽ᴺ⁾(x)} g(x) dm = ∫ L_qᴺ(f)·g dm`,
//! computed either by grid quadrature or by powers of a truncated operator.

mod average;
mod sweep;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

pub use average::{frequency_average, AverageReport, Bump, DEFAULT_BUMP_NODES};
pub use sweep::{decay_sweep, Histogram, SweepCell, SweepConfig, SweepReport};

use crate::aniso::{lebesgue_functional, multiply, SpaceElement, WeightScheme};
use crate::exec::map_indexed;
use crate::fit::{least_squares, LineFit};
use crate::operator::TruncatedOperator;
use crate::sum::neumaier_complex;
use crate::torus::{AnosovMap, TrigPoly};
use crate::{Error, Result};

/// Smallest grid accepted by [`correlation_direct`].
pub const MIN_DIRECT_GRID: usize = 256;
/// Relative size of discarded coefficients above which a spectral
/// correlation is flagged.
pub const TRUNCATION_FLAG: f64 = 1e-10;
/// Values below this are treated as zero by [`decay_rate_fit`].
pub const NOISE_FLOOR: f64 = 1e-13;
/// Fit window relative to the largest value.
pub const FIT_WINDOW: f64 = 1e-12;
/// Shortest sequence [`decay_rate_fit`] accepts.
pub const MIN_FIT_VALUES: usize = 12;

/// `C(0..=n_max)` by the midpoint rule on a `G × G` grid.
pub fn correlation_direct(
    map: &AnosovMap,
    tau: &TrigPoly,
    q: i64,
    f: &TrigPoly,
    g: &TrigPoly,
    n_max: usize,
    grid: usize,
) -> Result<Vec<Complex64>> {
    let mut all = correlation_direct_many(
        map,
        tau,
        q,
        std::slice::from_ref(f),
        std::slice::from_ref(g),
        n_max,
        grid,
    )?;
    Ok(all.pop().unwrap().pop().unwrap())
}

/// Direct correlations for every pair in `fs × gs`, indexed `[i][j][N]`.
/// One orbit is followed per grid point and shared by all pairs.
pub fn correlation_direct_many(
    map: &AnosovMap,
    tau: &TrigPoly,
    q: i64,
    fs: &[TrigPoly],
    gs: &[TrigPoly],
    n_max: usize,
    grid: usize,
) -> Result<Vec<Vec<Vec<Complex64>>>> {
    if grid < MIN_DIRECT_GRID {
        return Err(Error::InvalidInput(format!(
            "quadrature grid {grid} is below {MIN_DIRECT_GRID}"
        )));
    }
    if !map.volume_preserving() {
        return Err(Error::InvalidInput(
            "direct correlations need a volume-preserving map".into(),
        ));
    }
    let (nf, ng, len) = (fs.len(), gs.len(), n_max + 1);
    let slot = |i: usize, j: usize, n: usize| (i * ng + j) * len + n;
    let step = 1.0 / grid as f64;
    let rows = map_indexed(grid, |j1| {
        let mut acc = vec![Complex64::default(); nf * ng * len];
        let mut fx = vec![Complex64::default(); nf];
        for j2 in 0..grid {
            let x0 = [j1 as f64 * step, j2 as f64 * step];
            let gx: Vec<Complex64> = gs.iter().map(|g| g.eval(x0)).collect();
            let mut x = x0;
            let mut phase = 0.0;
            for n in 0..len {
                let twist = Complex64::from_polar(1.0, 2.0 * PI * q as f64 * phase);
                for (i, f) in fs.iter().enumerate() {
                    fx[i] = f.eval(x) * twist;
                }
                for i in 0..nf {
                    for (j, g) in gx.iter().enumerate() {
                        acc[slot(i, j, n)] += fx[i] * g;
                    }
                }
                if n + 1 < len {
                    phase += tau.eval_real(x);
                    x = map.eval(x);
                }
            }
        }
        acc
    });
    let area = step * step;
    Ok((0..nf)
        .map(|i| {
            (0..ng)
                .map(|j| {
                    (0..len)
                        .map(|n| neumaier_complex(rows.iter().map(|r| r[slot(i, j, n)])) * area)
                        .collect()
                })
                .collect()
        })
        .collect())
}

/// Output of [`correlation_spectral`].
#[derive(Clone, Debug, Serialize)]
pub struct SpectralCorrelation {
    /// `C(0..=n_max)`.
    pub values: Vec<Complex64>,
    /// Norm of the ρ-coefficients of `f` outside the box, relative to the
    /// full norm.
    pub input_tail: f64,
    /// Frequencies of `g` whose negatives fall outside the box.
    pub g_outside: usize,
    pub flagged: bool,
}

fn scheme_of(t: &TruncatedOperator) -> Result<WeightScheme> {
    WeightScheme::new(t.info.map.matrix, t.info.r)
}

/// `⟨Tᴺ f, g⟩` for `N = 0..=n_max`: the ρ-coefficients of `f` are pushed
/// through the matrix, multiplied by `g` and integrated.
pub fn correlation_spectral(
    t: &TruncatedOperator,
    f: &TrigPoly,
    g: &TrigPoly,
    n_max: usize,
) -> Result<SpectralCorrelation> {
    let mut all = correlation_spectral_many(t, std::slice::from_ref(f), std::slice::from_ref(g), n_max)?;
    Ok(all.pop().unwrap().pop().unwrap())
}

/// Spectral correlations for every pair in `fs × gs`, indexed `[i][j]`.
pub fn correlation_spectral_many(
    t: &TruncatedOperator,
    fs: &[TrigPoly],
    gs: &[TrigPoly],
    n_max: usize,
) -> Result<Vec<Vec<SpectralCorrelation>>> {
    let scheme = scheme_of(t)?;
    // multiplication needs some analyticity radius; the bound is not used
    let r_tilde = scheme.norm_constant() * scheme.r + 1.0;
    let g_outside: Vec<usize> = gs
        .iter()
        .map(|g| g.terms().filter(|(b, _)| !t.bx.contains([-b[0], -b[1]])).count())
        .collect();
    fs.iter()
        .map(|f| {
            let (mut phi, tail) = SpaceElement::from_trig(f, &scheme, t.bx);
            let full = phi.norm().hypot(tail);
            let input_tail = if full > 0.0 { tail / full } else { 0.0 };
            let mut values = vec![Vec::with_capacity(n_max + 1); gs.len()];
            for n in 0..=n_max {
                for (j, g) in gs.iter().enumerate() {
                    let p = multiply(g, &phi, &scheme, r_tilde)?;
                    values[j].push(lebesgue_functional(&p.element));
                }
                if n < n_max {
                    phi = t.apply(&phi);
                }
            }
            Ok(values
                .into_iter()
                .zip(&g_outside)
                .map(|(values, &g_out)| SpectralCorrelation {
                    values,
                    input_tail,
                    g_outside: g_out,
                    flagged: input_tail > TRUNCATION_FLAG || g_out > 0,
                })
                .collect())
        })
        .collect()
}

/// Result of [`decay_rate_fit`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DecayFit {
    BelowNoiseFloor,
    Fitted {
        /// `exp(slope)`; zero when only one value survives the window.
        base: f64,
        line: Option<LineFit>,
        /// Indices used by the fit.
        records: Vec<usize>,
    },
}

impl DecayFit {
    pub fn base(&self) -> Option<f64> {
        match self {
            DecayFit::BelowNoiseFloor => None,
            DecayFit::Fitted { base, .. } => Some(*base),
        }
    }
}

/// Exponential base of `|C(N)|`.
///
/// Only values above `FIT_WINDOW·max|C|` enter, and of those only the
/// records seen from the end of the sequence (values larger than every
/// later value). This follows the upper envelope of oscillating sequences,
/// in the spirit of a limsup. The window is relative, so the result does
/// not depend on the overall scale.
pub fn decay_rate_fit(values: &[Complex64]) -> Result<DecayFit> {
    if values.len() < MIN_FIT_VALUES {
        return Err(Error::InvalidInput(format!(
            "decay fit needs at least {MIN_FIT_VALUES} values, got {}",
            values.len()
        )));
    }
    let mags: Vec<f64> = values.iter().map(|c| c.norm()).collect();
    if mags.iter().any(|m| !m.is_finite()) {
        return Err(Error::InvalidInput("non-finite correlation value".into()));
    }
    let max = mags.iter().cloned().fold(0.0, f64::max);
    if max < NOISE_FLOOR {
        return Ok(DecayFit::BelowNoiseFloor);
    }
    let cut = FIT_WINDOW * max;
    let mut records = Vec::new();
    let mut later = 0.0;
    for (n, &m) in mags.iter().enumerate().rev() {
        if m > cut && m > later {
            records.push(n);
            later = m;
        }
    }
    records.reverse();
    let xs: Vec<f64> = records.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = records.iter().map(|&n| mags[n].ln()).collect();
    let line = least_squares(&xs, &ys);
    let base = line.as_ref().map_or(0.0, |l| l.slope.exp());
    Ok(DecayFit::Fitted {
        base,
        line,
        records,
    })
}

/// Smallest `n ∈ {D, …, D·Q^P}` with `dist(n·a_j, ℤ) < 1/Q` for every
/// angle (strictly, up to a 1e-12 margin). The box principle guarantees a
/// hit.
pub fn dirichlet_box_search(angles: &[f64], d: u64, q: u64) -> Result<u64> {
    if q < 2 || d < 1 {
        return Err(Error::InvalidInput(format!("need Q >= 2 and D >= 1, got Q = {q}, D = {d}")));
    }
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidInput("angles must be finite".into()));
    }
    let end = u32::try_from(angles.len())
        .ok()
        .and_then(|p| q.checked_pow(p))
        .and_then(|v| v.checked_mul(d))
        .filter(|&e| e <= 100_000_000)
        .ok_or_else(|| Error::InvalidInput("search range D·Q^P exceeds 1e8".into()))?;
    let limit = 1.0 / q as f64 - 1e-12;
    let fracs: Vec<f64> = angles.iter().map(|a| a - a.floor()).collect();
    for n in d..=end {
        if fracs.iter().all(|&a| circle_distance(n, a) < limit) {
            return Ok(n);
        }
    }
    Err(Error::DirichletExhausted { start: d, end })
}

/// `dist(n·a, ℤ)` with the product's rounding error recovered by an FMA.
fn circle_distance(n: u64, a: f64) -> f64 {
    let nf = n as f64;
    let p = nf * a;
    let err = nf.mul_add(a, -p);
    ((p - p.round()) + err).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aniso::WeightScheme;
    use crate::operator::assemble;
    use crate::torus::IntMatrix;

    fn mode(a: [i64; 2]) -> TrigPoly {
        TrigPoly::mode(a)
    }

    #[test]
    fn direct_untwisted_modes_follow_the_dual_map() {
        let cat = AnosovMap::cat();
        let fs = [mode([1, 0]), mode([0, 1])];
        let gs = [mode([-1, 0]), mode([-2, -1]), mode([-5, -3])];
        let c = correlation_direct_many(&cat, &TrigPoly::zero(), 0, &fs, &gs, 3, 256).unwrap();
        let mt = IntMatrix::CAT.transpose();
        for (i, f) in [[1, 0], [0, 1]].iter().enumerate() {
            let mut image = *f;
            for n in 0..=3 {
                for (j, g) in [[-1, 0], [-2, -1], [-5, -3]].iter().enumerate() {
                    let hit = image[0] == -g[0] && image[1] == -g[1];
                    let expected = if hit { 1.0 } else { 0.0 };
                    assert!((c[i][j][n] - expected).norm() < 1e-12, "{f:?} {g:?} {n}");
                }
                image = mt.apply(image);
            }
        }
    }

    #[test]
    fn constant_against_zero_mean() {
        let cat = AnosovMap::cat();
        let g = TrigPoly::cos([1, 2], 0.7);
        let c = correlation_direct(&cat, &TrigPoly::zero(), 0, &TrigPoly::constant(1.0), &g, 4, 256)
            .unwrap();
        assert!(c.iter().all(|v| v.norm() < 1e-13));
        assert!(matches!(
            correlation_direct(&cat, &TrigPoly::zero(), 0, &g, &g, 2, 64),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn spectral_constants_and_start() {
        let cat = AnosovMap::cat();
        let s = WeightScheme::new(IntMatrix::CAT, 0.02).unwrap();
        let t = assemble(&cat, &TrigPoly::zero(), 0, &s, 4, 64).unwrap();
        let one = TrigPoly::constant(1.0);
        let c = correlation_spectral(&t, &one, &one, 6).unwrap();
        assert!(!c.flagged);
        assert!(c.values.iter().all(|v| (v - 1.0).norm() < 1e-14));

        let tau = TrigPoly::cos([1, 0], 0.5);
        let t = assemble(&cat, &tau, 1, &s, 4, 64).unwrap();
        let f = &TrigPoly::cos([1, 1], 1.0) + &TrigPoly::constant(0.3);
        let g = TrigPoly::sin([1, 1], 2.0);
        let c = correlation_spectral(&t, &f, &g, 0).unwrap();
        // ∫ f g = 0.5·(cos·sin) = 0, so use f·f
        let cf = correlation_spectral(&t, &f, &f, 0).unwrap();
        assert!(c.values[0].norm() < 1e-14);
        assert!((cf.values[0] - (0.09 + 0.5)).norm() < 1e-14);
        let far = correlation_spectral(&t, &mode([9, 0]), &one, 1).unwrap();
        assert!(far.flagged && far.input_tail == 1.0);
    }

    #[test]
    fn two_routes_agree_on_twisted_cat() {
        let cat = AnosovMap::cat();
        let tau = TrigPoly::cos([1, 0], 0.5);
        let s = WeightScheme::new(IntMatrix::CAT, 0.02).unwrap();
        let fs = [mode([1, 0]), mode([0, 1])];
        let gs = [mode([-1, 0]), mode([0, 0]), mode([1, -1])];
        let t = crate::operator::assemble_auto(&cat, &tau, 1, &s, 12, 64).unwrap();
        let direct = correlation_direct_many(&cat, &tau, 1, &fs, &gs, 4, 512).unwrap();
        let spec = correlation_spectral_many(&t, &fs, &gs, 4).unwrap();
        for i in 0..fs.len() {
            for j in 0..gs.len() {
                for n in 0..=4 {
                    let gap = (direct[i][j][n] - spec[i][j].values[n]).norm();
                    assert!(gap < 1e-8, "pair ({i},{j}) N={n}: {gap:e}");
                }
            }
        }
    }

    #[test]
    fn fit_synthetic_sequences() {
        let pure: Vec<Complex64> = (0..30).map(|n| Complex64::new(0.5f64.powi(n), 0.0)).collect();
        let base = decay_rate_fit(&pure).unwrap().base().unwrap();
        assert!((base - 0.5).abs() < 1e-6);
        let osc: Vec<Complex64> = (0..30)
            .map(|n| Complex64::new(0.5f64.powi(n) * (n as f64).cos(), 0.0))
            .collect();
        let base = decay_rate_fit(&osc).unwrap().base().unwrap();
        assert!((base - 0.5).abs() < 0.05, "{base}");
        assert_eq!(
            decay_rate_fit(&vec![Complex64::new(1e-14, 0.0); 20]).unwrap(),
            DecayFit::BelowNoiseFloor
        );
        assert!(decay_rate_fit(&pure[..5]).is_err());
        let mut spike = vec![Complex64::default(); 15];
        spike[3] = Complex64::new(1.0, 0.0);
        assert_eq!(decay_rate_fit(&spike).unwrap().base(), Some(0.0));
    }

    #[test]
    fn dirichlet_examples() {
        assert_eq!(dirichlet_box_search(&[0.5], 1, 2).unwrap(), 2);
        assert_eq!(dirichlet_box_search(&[0.3], 1, 10).unwrap(), 10);
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let angles = [golden, 2f64.sqrt() - 1.0];
        let n = dirichlet_box_search(&angles, 1, 5).unwrap();
        assert!(n <= 25);
        // scan oracle with plain arithmetic
        let first = (1..=25u64)
            .find(|&m| {
                angles.iter().all(|a| {
                    let v = m as f64 * a;
                    (v - v.round()).abs() < 0.2
                })
            })
            .unwrap();
        assert_eq!(n, first);
        assert!(dirichlet_box_search(&[0.1; 9], 1, 10).is_err());
        assert!(dirichlet_box_search(&[0.1], 1, 1).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn fit_is_scale_invariant(
                base in 0.2f64..0.95,
                freq in 0.0f64..3.0,
                scale in -6.0f64..6.0,
                phase in 0.0f64..std::f64::consts::TAU,
            ) {
                let seq: Vec<Complex64> = (0..24)
                    .map(|n| Complex64::from_polar(base.powi(n) * (1.5 + (freq * n as f64).cos()), phase))
                    .collect();
                let c = Complex64::from_polar(10f64.powf(scale), 1.0 - phase);
                let scaled: Vec<Complex64> = seq.iter().map(|v| v * c).collect();
                let a = decay_rate_fit(&seq).unwrap().base().unwrap();
                let b = decay_rate_fit(&scaled).unwrap().base().unwrap();
                prop_assert!((a - b).abs() < 1e-9);
            }

            #[test]
            fn dirichlet_hit_is_minimal(
                a in 0.0f64..1.0,
                b in 0.0f64..1.0,
                d in 1u64..4,
                q in 2u64..7,
            ) {
                let n = dirichlet_box_search(&[a, b], d, q).unwrap();
                prop_assert!(n >= d && n <= d * q * q);
                let lim = 1.0 / q as f64 - 1e-12;
                prop_assert!(circle_distance(n, a) < lim && circle_distance(n, b) < lim);
                for m in d..n {
                    prop_assert!(circle_distance(m, a) >= lim || circle_distance(m, b) >= lim);
                }
            }
        }
    }
}
