use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A lattice frequency `α ∈ Z²`.
pub type Freq = [i64; 2];

/// Finite complex Fourier series `Σ a_α e^{2πi α·x}` on the torus.
///
/// Terms are kept in a sorted map so iteration order, and therefore every
/// floating-point reduction over terms, is deterministic.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "TermList", try_from = "TermList")]
pub struct TrigPoly {
    terms: BTreeMap<Freq, Complex64>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms([([0, 0], Complex64::new(c, 0.0))])
    }

    /// The Fourier mode `e_α`.
    pub fn mode(alpha: Freq) -> Self {
        Self::from_terms([(alpha, Complex64::new(1.0, 0.0))])
    }

    /// `amplitude · cos(2π α·x)`.
    pub fn cos(alpha: Freq, amplitude: f64) -> Self {
        let half = Complex64::new(amplitude / 2.0, 0.0);
        Self::from_terms([(alpha, half), ([-alpha[0], -alpha[1]], half)])
    }

    /// `amplitude · sin(2π α·x)`.
    pub fn sin(alpha: Freq, amplitude: f64) -> Self {
        let c = Complex64::new(0.0, -amplitude / 2.0);
        Self::from_terms([(alpha, c), ([-alpha[0], -alpha[1]], -c)])
    }

    /// Builds a polynomial from `(α, a_α)` pairs; repeated frequencies are
    /// summed and exact zeros dropped.
    pub fn from_terms<I: IntoIterator<Item = (Freq, Complex64)>>(terms: I) -> Self {
        let mut map = BTreeMap::new();
        for (alpha, a) in terms {
            *map.entry(alpha).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        map.retain(|_, a: &mut Complex64| *a != Complex64::new(0.0, 0.0));
        Self { terms: map }
    }

    pub fn coefficient(&self, alpha: Freq) -> Complex64 {
        self.terms
            .get(&alpha)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (Freq, Complex64)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `|α|₁` carrying a nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|a| a[0].abs() + a[1].abs())
            .max()
            .unwrap_or(0)
    }

    /// Largest `|α|_∞` carrying a nonzero coefficient.
    pub fn max_frequency(&self) -> i64 {
        self.terms
            .keys()
            .map(|a| a[0].abs().max(a[1].abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn mean(&self) -> Complex64 {
        self.coefficient([0, 0])
    }

    pub fn eval(&self, x: [f64; 2]) -> Complex64 {
        self.terms
            .iter()
            .map(|(a, c)| {
                let phase = 2.0 * PI * (a[0] as f64 * x[0] + a[1] as f64 * x[1]);
                c * Complex64::cis(phase)
            })
            .sum()
    }

    /// Real part of [`eval`](Self::eval); the value itself when the
    /// polynomial is real.
    pub fn eval_real(&self, x: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| {
                let phase = 2.0 * PI * (a[0] as f64 * x[0] + a[1] as f64 * x[1]);
                c.re * phase.cos() - c.im * phase.sin()
            })
            .sum()
    }

    /// Gradient of the real part.
    pub fn gradient_real(&self, x: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (a, c) in &self.terms {
            let phase = 2.0 * PI * (a[0] as f64 * x[0] + a[1] as f64 * x[1]);
            // d/dx_i Re(c e^{iθ}) = -2π α_i (c.re sin θ + c.im cos θ)
            let d = -(c.re * phase.sin() + c.im * phase.cos()) * 2.0 * PI;
            g[0] += d * a[0] as f64;
            g[1] += d * a[1] as f64;
        }
        g
    }

    /// True when `a_{-α} = conj(a_α)` for every term, within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.terms
            .iter()
            .all(|(a, c)| (self.coefficient([-a[0], -a[1]]).conj() - c).norm() <= tol)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(self.terms().map(|(a, v)| (a, v * c)))
    }

    /// True when every frequency has zero component along `axis` (0 or 1),
    /// i.e. the function does not depend on that coordinate.
    pub fn independent_of(&self, axis: usize) -> bool {
        self.terms.keys().all(|a| a[axis] == 0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;

    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::from_terms(self.terms().chain(rhs.terms()))
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;

    /// Pointwise product, i.e. coefficient convolution.
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        let mut out = Vec::with_capacity(self.len() * rhs.len());
        for (a, x) in self.terms() {
            for (b, y) in rhs.terms() {
                out.push(([a[0] + b[0], a[1] + b[1]], x * y));
            }
        }
        TrigPoly::from_terms(out)
    }
}

/// Coefficient majorant `Σ |a_α| e^{2πr|α|₁}` of the sup of `f` over the
/// complex strip `T² + i[-r, r]²`. It bounds the true sup from above.
pub fn complexified_sup_norm(f: &TrigPoly, r: f64) -> f64 {
    assert!(r >= 0.0, "radius must be nonnegative");
    crate::sum::neumaier(
        f.terms()
            .map(|(a, c)| c.norm() * (2.0 * PI * r * (a[0].abs() + a[1].abs()) as f64).exp()),
    )
}

#[derive(Serialize, Deserialize)]
struct TermList {
    terms: Vec<Term>,
}

#[derive(Serialize, Deserialize)]
struct Term {
    a1: i64,
    a2: i64,
    re: f64,
    im: f64,
}

impl From<TrigPoly> for TermList {
    fn from(p: TrigPoly) -> Self {
        TermList {
            terms: p
                .terms()
                .map(|(a, c)| Term {
                    a1: a[0],
                    a2: a[1],
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

impl TryFrom<TermList> for TrigPoly {
    type Error = Error;

    fn try_from(list: TermList) -> Result<Self> {
        if let Some(t) = list
            .terms
            .iter()
            .find(|t| !t.re.is_finite() || !t.im.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "non-finite coefficient at ({}, {})",
                t.a1, t.a2
            )));
        }
        Ok(TrigPoly::from_terms(
            list.terms
                .into_iter()
                .map(|t| ([t.a1, t.a2], Complex64::new(t.re, t.im))),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cos_and_sin_evaluate_correctly() {
        let c = TrigPoly::cos([1, 0], 1.0);
        let s = TrigPoly::sin([0, 2], 3.0);
        let x = [0.13, 0.71];
        assert!((c.eval_real(x) - (2.0 * PI * 0.13).cos()).abs() < 1e-14);
        assert!((s.eval_real(x) - 3.0 * (2.0 * PI * 1.42).sin()).abs() < 1e-13);
        assert!(c.is_real(0.0) && s.is_real(0.0));
        assert!(c.eval(x).im.abs() < 1e-15);
    }

    #[test]
    fn evaluation_is_periodic() {
        let p = &TrigPoly::cos([2, -1], 0.7) + &TrigPoly::mode([1, 3]);
        let x = [0.37, 0.81];
        let shifted = [x[0] + 3.0, x[1] - 2.0];
        assert!((p.eval(x) - p.eval(shifted)).norm() < 1e-12);
    }

    #[test]
    fn product_is_pointwise() {
        let p = &TrigPoly::cos([1, 0], 1.0) + &TrigPoly::constant(0.5);
        let q = &TrigPoly::sin([1, 1], 2.0) + &TrigPoly::mode([0, 2]);
        let pq = &p * &q;
        let x = [0.2, 0.9];
        assert!((pq.eval(x) - p.eval(x) * q.eval(x)).norm() < 1e-13);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let p = &TrigPoly::cos([1, 2], 0.3) + &TrigPoly::sin([0, 1], 0.8);
        let x = [0.31, 0.47];
        let g = p.gradient_real(x);
        let h = 1e-6;
        let d0 = (p.eval_real([x[0] + h, x[1]]) - p.eval_real([x[0] - h, x[1]])) / (2.0 * h);
        let d1 = (p.eval_real([x[0], x[1] + h]) - p.eval_real([x[0], x[1] - h])) / (2.0 * h);
        assert!((g[0] - d0).abs() < 1e-7 && (g[1] - d1).abs() < 1e-7);
    }

    #[test]
    fn degrees() {
        let p = &TrigPoly::cos([2, -1], 1.0) + &TrigPoly::mode([0, 4]);
        assert_eq!(p.degree(), 4);
        assert_eq!(p.max_frequency(), 4);
        assert_eq!(TrigPoly::zero().degree(), 0);
    }

    #[test]
    fn sup_norm_majorant() {
        assert_eq!(complexified_sup_norm(&TrigPoly::constant(1.0), 0.3), 1.0);
        let c = TrigPoly::cos([1, 0], 1.0);
        assert!((complexified_sup_norm(&c, 0.0) - 1.0).abs() < 1e-15);
        let r = 0.05;
        let bound = complexified_sup_norm(&c, r);
        assert!((bound - (2.0 * PI * r).exp()).abs() < 1e-14);
        assert!(bound >= (2.0 * PI * r).cosh());
    }

    #[test]
    fn json_layout() {
        let p = TrigPoly::from_terms([([1, -2], Complex64::new(0.5, -0.25))]);
        let json = p.to_json().unwrap();
        assert_eq!(json, r#"{"terms":[{"a1":1,"a2":-2,"re":0.5,"im":-0.25}]}"#);
        assert_eq!(TrigPoly::from_json(&json).unwrap(), p);
    }

    #[test]
    fn json_rejects_non_numeric() {
        assert!(TrigPoly::from_json(r#"{"terms":[{"a1":1,"a2":0,"re":"x","im":0}]}"#).is_err());
    }
}
