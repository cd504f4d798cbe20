use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A 2×2 integer matrix acting on column vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntMatrix(pub [[i64; 2]; 2]);

impl IntMatrix {
    /// Arnold's cat map `[[2, 1], [1, 1]]`.
    pub const CAT: IntMatrix = IntMatrix([[2, 1], [1, 1]]);
    pub const IDENTITY: IntMatrix = IntMatrix([[1, 0], [0, 1]]);

    pub fn det(&self) -> i64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> i64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        let m = self.0;
        IntMatrix([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.det().abs() == 1 && self.trace().abs() > 2
    }

    pub fn apply(&self, v: [i64; 2]) -> [i64; 2] {
        let m = self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn apply_f64(&self, v: [f64; 2]) -> [f64; 2] {
        let m = self.to_f64();
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn to_f64(&self) -> [[f64; 2]; 2] {
        let m = self.0;
        [
            [m[0][0] as f64, m[0][1] as f64],
            [m[1][0] as f64, m[1][1] as f64],
        ]
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Option<IntMatrix> {
        let (a, b) = (self.0, rhs.0);
        let entry = |i: usize, j: usize| {
            a[i][0]
                .checked_mul(b[0][j])?
                .checked_add(a[i][1].checked_mul(b[1][j])?)
        };
        Some(IntMatrix([
            [entry(0, 0)?, entry(0, 1)?],
            [entry(1, 0)?, entry(1, 1)?],
        ]))
    }

    /// `Mⁿ` with overflow detection. On overflow the error names the
    /// largest period whose power still fits.
    pub fn checked_pow(&self, n: usize) -> Result<IntMatrix> {
        let mut acc = IntMatrix::IDENTITY;
        for k in 0..n {
            acc = acc.checked_mul(self).ok_or(Error::PowerOverflow {
                period: n,
                max_safe: k,
            })?;
        }
        Ok(acc)
    }
}

/// Eigen-data of a hyperbolic real 2×2 matrix: the expanding eigenvalue
/// `μ` (`|μ| > 1`), the contracting one, unit eigenvectors, and the two
/// spectral projectors `P⁺ + P⁻ = I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicSplitting {
    pub expanding: f64,
    pub contracting: f64,
    pub unstable: [f64; 2],
    pub stable: [f64; 2],
    pub plus: [[f64; 2]; 2],
    pub minus: [[f64; 2]; 2],
}

impl HyperbolicSplitting {
    pub fn new(matrix: &IntMatrix) -> Result<Self> {
        if !matrix.is_hyperbolic() {
            return Err(Error::NotHyperbolic(matrix.0));
        }
        let m = matrix.to_f64();
        let tr = matrix.trace() as f64;
        let det = matrix.det() as f64;
        let disc = (tr * tr - 4.0 * det).sqrt();
        // pick the root that avoids cancellation, then the other from det
        let expanding = if tr > 0.0 {
            (tr + disc) / 2.0
        } else {
            (tr - disc) / 2.0
        };
        let contracting = det / expanding;
        let eigvec = |mu: f64| {
            let v = if m[0][1].abs() >= m[1][0].abs() {
                [m[0][1], mu - m[0][0]]
            } else {
                [mu - m[1][1], m[1][0]]
            };
            let n = v[0].hypot(v[1]);
            [v[0] / n, v[1] / n]
        };
        let gap = expanding - contracting;
        let projector = |mu_other: f64, sign: f64| {
            [
                [
                    sign * (m[0][0] - mu_other) / gap,
                    sign * m[0][1] / gap,
                ],
                [
                    sign * m[1][0] / gap,
                    sign * (m[1][1] - mu_other) / gap,
                ],
            ]
        };
        Ok(HyperbolicSplitting {
            expanding,
            contracting,
            unstable: eigvec(expanding),
            stable: eigvec(contracting),
            plus: projector(contracting, 1.0),
            minus: projector(expanding, -1.0),
        })
    }

    /// `(P⁺v, P⁻v)`.
    pub fn split(&self, v: [f64; 2]) -> ([f64; 2], [f64; 2]) {
        let apply = |p: [[f64; 2]; 2]| [p[0][0] * v[0] + p[0][1] * v[1], p[1][0] * v[0] + p[1][1] * v[1]];
        (apply(self.plus), apply(self.minus))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_powers_and_overflow() {
        let m2 = IntMatrix::CAT.checked_pow(2).unwrap();
        assert_eq!(m2, IntMatrix([[5, 3], [3, 2]]));
        match IntMatrix::CAT.checked_pow(200) {
            Err(Error::PowerOverflow { max_safe, .. }) => assert!((40..100).contains(&max_safe)),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn cat_splitting() {
        let s = HyperbolicSplitting::new(&IntMatrix::CAT).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s.expanding - golden * golden).abs() < 1e-14);
        assert!((s.expanding * s.contracting - 1.0).abs() < 1e-14);
        // M u = μ u
        let mu = IntMatrix::CAT.apply_f64(s.unstable);
        assert!((mu[0] - s.expanding * s.unstable[0]).abs() < 1e-13);
        assert!((mu[1] - s.expanding * s.unstable[1]).abs() < 1e-13);
        let (p, q) = s.split([0.3, -1.7]);
        assert!((p[0] + q[0] - 0.3).abs() < 1e-14 && (p[1] + q[1] + 1.7).abs() < 1e-14);
    }

    #[test]
    fn orientation_reversing_and_negative_trace() {
        for m in [IntMatrix([[3, 1], [1, 0]]), IntMatrix([[-2, 1], [1, -1]])] {
            let s = HyperbolicSplitting::new(&m).unwrap();
            assert!(s.expanding.abs() > 1.0 && s.contracting.abs() < 1.0);
            let mu = m.apply_f64(s.unstable);
            assert!((mu[0] - s.expanding * s.unstable[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_elliptic() {
        assert!(HyperbolicSplitting::new(&IntMatrix([[1, 1], [0, 1]])).is_err());
        assert!(HyperbolicSplitting::new(&IntMatrix([[0, -1], [1, 0]])).is_err());
    }
}
