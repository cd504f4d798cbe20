//! Uniform `G × G` grids on the torus and their 2-D FFTs.
//!
//! Grid values are stored row-major with index `j1·G + j2` for the point
//! `(j1/G, j2/G)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::torus::{Freq, TrigPoly};

pub struct Fft2 {
    g: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(g: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            g,
            forward: planner.plan_fft_forward(g),
            inverse: planner.plan_fft_inverse(g),
        }
    }

    pub fn size(&self) -> usize {
        self.g
    }

    fn run(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let g = self.g;
        fft.process(data);
        transpose(data, g);
        fft.process(data);
        transpose(data, g);
    }

    /// Fourier coefficients `f̂(k) = G⁻² Σ_j f(x_j) e^{−2πi k·x_j}` in place.
    pub fn coefficients(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
        let scale = 1.0 / (self.g * self.g) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    /// Values of a band-limited series from its coefficient array in place.
    pub fn synthesize(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    /// Position of frequency `k` in a coefficient array.
    pub fn slot(&self, k: Freq) -> usize {
        let g = self.g as i64;
        (k[0].rem_euclid(g) * g + k[1].rem_euclid(g)) as usize
    }

    /// Signed frequency stored at `slot`.
    pub fn freq(&self, slot: usize) -> Freq {
        let g = self.g as i64;
        let wrap = |v: i64| if v >= g / 2 { v - g } else { v };
        [wrap(slot as i64 / g), wrap(slot as i64 % g)]
    }

    /// Largest coefficient modulus with `|k|_∞ ≥ 7G/16`: an estimate of the
    /// energy that aliased into the resolved band.
    pub fn aliasing_tail(&self, coeffs: &[Complex64]) -> f64 {
        let cut = (7 * self.g / 16) as i64;
        coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let k = self.freq(*i);
                k[0].abs().max(k[1].abs()) >= cut
            })
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// Exact grid values of a trigonometric polynomial whose frequencies fit
    /// strictly inside the grid band.
    pub fn values(&self, f: &TrigPoly) -> Vec<Complex64> {
        let mut data = vec![Complex64::default(); self.g * self.g];
        for (alpha, a) in f.terms() {
            data[self.slot(alpha)] += a;
        }
        self.synthesize(&mut data);
        data
    }

    pub fn point(&self, slot: usize) -> [f64; 2] {
        let g = self.g;
        [(slot / g) as f64 / g as f64, (slot % g) as f64 / g as f64]
    }
}

fn transpose(data: &mut [Complex64], g: usize) {
    for i in 0..g {
        for j in i + 1..g {
            data.swap(i * g + j, j * g + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_slots() {
        let fft = Fft2::new(16);
        let f = TrigPoly::from_terms([
            ([3, -2], Complex64::new(0.5, 0.25)),
            ([-1, 0], Complex64::new(-1.0, 0.0)),
            ([0, 0], Complex64::new(0.1, 0.0)),
        ]);
        let mut v = fft.values(&f);
        let x = fft.point(37);
        assert!((v[37] - f.eval(x)).norm() < 1e-13);
        fft.coefficients(&mut v);
        for (alpha, a) in f.terms() {
            assert!((v[fft.slot(alpha)] - a).norm() < 1e-14);
            assert_eq!(fft.freq(fft.slot(alpha)), alpha);
        }
        assert!(fft.aliasing_tail(&v) < 1e-14);
    }
}
