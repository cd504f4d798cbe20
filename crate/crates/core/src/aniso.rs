//! The anisotropic Hilbert space `H_{r,M}`.
//!
//! Frequencies split as `α = α⁺ + α⁻` along the eigenlines of `Mᵀ`, the
//! matrix by which composition with `M` acts on Fourier modes
//! (`e_α ∘ M = e_{Mᵀα}`). The orthonormal basis is
//! `ρ_α = w_α e_α` with `w_α = exp(2πr(|α⁺|₁ − |α⁻|₁))`: analytic decay is
//! required along the expanding direction and growth is allowed along the
//! contracting one.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::torus::{Freq, HyperbolicSplitting, IntMatrix, TrigPoly};
use crate::{Error, Result};

/// A frequency with the ℓ¹ norms of its two anisotropic components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrequencyIndex {
    pub alpha: Freq,
    pub plus_norm: f64,
    pub minus_norm: f64,
}

fn l1(v: [f64; 2]) -> f64 {
    v[0].abs() + v[1].abs()
}

/// Splits `α` with the spectral projectors of `Mᵀ`.
pub fn split_frequency(m: IntMatrix, alpha: Freq) -> Result<FrequencyIndex> {
    let s = HyperbolicSplitting::new(&m.transpose())?;
    Ok(index_with(&s, alpha))
}

fn index_with(s: &HyperbolicSplitting, alpha: Freq) -> FrequencyIndex {
    let (p, q) = s.split([alpha[0] as f64, alpha[1] as f64]);
    FrequencyIndex {
        alpha,
        plus_norm: l1(p),
        minus_norm: l1(q),
    }
}

/// Weights `w_α = e^{2πr(|α⁺|₁ − |α⁻|₁)}` for a matrix and radius.
#[derive(Clone, Debug)]
pub struct WeightScheme {
    pub r: f64,
    matrix: IntMatrix,
    split: HyperbolicSplitting,
    norm_constant: f64,
}

impl WeightScheme {
    pub fn new(m: IntMatrix, r: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidInput(format!("radius must be finite and >= 0, got {r}")));
        }
        let split = HyperbolicSplitting::new(&m.transpose())?;
        // |P⁺α|₁ + |P⁻α|₁ is a norm; its maximum on the ℓ¹ unit ball sits
        // at a vertex ±e_i
        let norm_constant = [[1, 0], [0, 1]]
            .iter()
            .map(|&e| {
                let i = index_with(&split, e);
                i.plus_norm + i.minus_norm
            })
            .fold(1.0, f64::max);
        Ok(WeightScheme {
            r,
            matrix: m,
            split,
            norm_constant,
        })
    }

    pub fn matrix(&self) -> IntMatrix {
        self.matrix
    }

    /// Eigen-data of `Mᵀ`.
    pub fn splitting(&self) -> &HyperbolicSplitting {
        &self.split
    }

    pub fn index(&self, alpha: Freq) -> FrequencyIndex {
        index_with(&self.split, alpha)
    }

    /// `C(M)` with `|α|₁ ≤ |α⁺|₁ + |α⁻|₁ ≤ C(M)|α|₁`.
    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    pub fn log_weight(&self, alpha: Freq) -> f64 {
        let i = self.index(alpha);
        2.0 * PI * self.r * (i.plus_norm - i.minus_norm)
    }

    pub fn weight(&self, alpha: Freq) -> f64 {
        self.log_weight(alpha).exp()
    }

    /// Writes `a1, a2, plus_norm, minus_norm, weight` for every frequency
    /// of the box.
    pub fn write_weights_csv<W: Write>(&self, bx: FrequencyBox, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["a1", "a2", "plus_norm", "minus_norm", "weight"])?;
        for alpha in bx.iter() {
            let i = self.index(alpha);
            w.write_record([
                alpha[0].to_string(),
                alpha[1].to_string(),
                format!("{:.17e}", i.plus_norm),
                format!("{:.17e}", i.minus_norm),
                format!("{:.17e}", self.weight(alpha)),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The truncation box `|α|_∞ ≤ K`, ordered by `α₁` then `α₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FrequencyBox {
    pub k: usize,
}

impl FrequencyBox {
    pub fn new(k: usize) -> Self {
        FrequencyBox { k }
    }

    pub fn side(&self) -> usize {
        2 * self.k + 1
    }

    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, alpha: Freq) -> bool {
        let k = self.k as i64;
        alpha[0].abs() <= k && alpha[1].abs() <= k
    }

    pub fn index(&self, alpha: Freq) -> Option<usize> {
        if !self.contains(alpha) {
            return None;
        }
        let k = self.k as i64;
        Some(((alpha[0] + k) as usize) * self.side() + (alpha[1] + k) as usize)
    }

    pub fn freq(&self, i: usize) -> Freq {
        let k = self.k as i64;
        let s = self.side();
        [(i / s) as i64 - k, (i % s) as i64 - k]
    }

    pub fn iter(&self) -> impl Iterator<Item = Freq> + '_ {
        (0..self.len()).map(|i| self.freq(i))
    }
}

/// Coefficients `b_α` in the ρ-basis over a box; the ℓ² norm of `b` is the
/// `H_{r,M}` norm.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceElement {
    pub bx: FrequencyBox,
    pub coeffs: Vec<Complex64>,
}

impl SpaceElement {
    pub fn zeros(bx: FrequencyBox) -> Self {
        SpaceElement {
            bx,
            coeffs: vec![Complex64::new(0.0, 0.0); bx.len()],
        }
    }

    /// The basis vector `ρ_α`.
    pub fn rho(bx: FrequencyBox, alpha: Freq) -> Self {
        let mut e = Self::zeros(bx);
        let i = bx.index(alpha).expect("frequency outside the box");
        e.coeffs[i] = Complex64::new(1.0, 0.0);
        e
    }

    /// `b_α = f̂(α)/w_α` on the box, with the H-norm of the discarded
    /// terms.
    pub fn from_trig(f: &TrigPoly, scheme: &WeightScheme, bx: FrequencyBox) -> (Self, f64) {
        let mut e = Self::zeros(bx);
        let mut tail = 0.0;
        for (alpha, a) in f.terms() {
            let b = a * (-scheme.log_weight(alpha)).exp();
            match bx.index(alpha) {
                Some(i) => e.coeffs[i] = b,
                None => tail += b.norm_sqr(),
            }
        }
        (e, tail.sqrt())
    }

    /// The same function as a Fourier series, `f̂(α) = b_α w_α`.
    pub fn to_trig(&self, scheme: &WeightScheme) -> TrigPoly {
        TrigPoly::from_terms(
            self.coeffs
                .iter()
                .enumerate()
                .filter(|(_, b)| b.norm_sqr() > 0.0)
                .map(|(i, b)| {
                    let alpha = self.bx.freq(i);
                    (alpha, b * scheme.weight(alpha))
                }),
        )
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn coefficient(&self, alpha: Freq) -> Complex64 {
        self.bx
            .index(alpha)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }
}

/// `sqrt(Σ |f̂(α)|² e^{4πr|α|₁})`, the Hardy norm over the complex
/// neighbourhood of width `r`.
pub fn hardy_norm(f: &TrigPoly, r: f64) -> f64 {
    f.terms()
        .map(|(alpha, a)| a.norm_sqr() * (4.0 * PI * r * (alpha[0].abs() + alpha[1].abs()) as f64).exp())
        .sum::<f64>()
        .sqrt()
}

/// `Σ f̂(α) conj(ĝ(α)) w_α⁻²`.
pub fn aniso_inner(f: &TrigPoly, g: &TrigPoly, scheme: &WeightScheme) -> Complex64 {
    crate::sum::neumaier_complex(f.terms().filter_map(|(alpha, a)| {
        let b = g.coefficient(alpha);
        (b != Complex64::default()).then(|| a * b.conj() * (-2.0 * scheme.log_weight(alpha)).exp())
    }))
}

pub fn aniso_norm(f: &TrigPoly, scheme: &WeightScheme) -> f64 {
    aniso_inner(f, f, scheme).re.max(0.0).sqrt()
}

/// Output of [`multiply`].
#[derive(Clone, Debug)]
pub struct Product {
    pub element: SpaceElement,
    /// Norm of the part of `Fφ` that fell outside the box, relative to the
    /// norm of the untruncated product.
    pub discarded_fraction: f64,
    /// `L` in `‖Fφ‖ ≤ L ‖F‖_{H²(r̃)} ‖φ‖`.
    pub bound_constant: f64,
}

/// The constant `L` for multipliers analytic on the radius `r̃`:
/// `((1 + e^{−4πε}) / (1 − e^{−4πε}))` with `ε = r̃ − C(M)·r`.
pub fn multiplier_bound(scheme: &WeightScheme, r_tilde: f64) -> Result<f64> {
    let required = scheme.norm_constant() * scheme.r;
    if !(r_tilde > required) {
        return Err(Error::RadiusTooSmall {
            radius: r_tilde,
            required,
        });
    }
    let q = (-4.0 * PI * (r_tilde - required)).exp();
    Ok((1.0 + q) / (1.0 - q))
}

/// Multiplication by `F` in coefficient space, truncated to the box of `φ`.
pub fn multiply(
    f: &TrigPoly,
    phi: &SpaceElement,
    scheme: &WeightScheme,
    r_tilde: f64,
) -> Result<Product> {
    let bound_constant = multiplier_bound(scheme, r_tilde)?;
    let bx = phi.bx;
    let mut out = SpaceElement::zeros(bx);
    let mut outside: std::collections::BTreeMap<Freq, Complex64> = Default::default();
    let log_w: Vec<f64> = bx.iter().map(|a| scheme.log_weight(a)).collect();
    for (beta, fb) in f.terms() {
        for (i, &b) in phi.coeffs.iter().enumerate() {
            if b == Complex64::default() {
                continue;
            }
            let alpha = bx.freq(i);
            let gamma = [alpha[0] + beta[0], alpha[1] + beta[1]];
            match bx.index(gamma) {
                Some(j) => out.coeffs[j] += fb * b * (log_w[i] - log_w[j]).exp(),
                None => {
                    *outside.entry(gamma).or_default() +=
                        fb * b * (log_w[i] - scheme.log_weight(gamma)).exp()
                }
            }
        }
    }
    let kept = out.norm();
    let lost = outside.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let total = kept.hypot(lost);
    Ok(Product {
        element: out,
        discarded_fraction: if total > 0.0 { lost / total } else { 0.0 },
        bound_constant,
    })
}

/// `⟨G, ρ₀⟩ = b₀ = ∫ G dm`.
pub fn lebesgue_functional(g: &SpaceElement) -> Complex64 {
    g.coefficient([0, 0])
}
