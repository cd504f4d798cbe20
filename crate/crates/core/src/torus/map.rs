use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{HyperbolicSplitting, IntMatrix};
use super::trig::TrigPoly;
use crate::{Error, Result};

/// Reduces a coordinate into `[0, 1)`. Values within `1e-15` below 1 snap
/// to 0 so that exact lattice points never come out as `0.99999…`.
pub fn reduce(v: f64) -> f64 {
    let y = v - v.floor();
    if y >= 1.0 - 1e-15 {
        0.0
    } else {
        y
    }
}

pub fn reduce_point(x: [f64; 2]) -> [f64; 2] {
    [reduce(x[0]), reduce(x[1])]
}

/// Representative of `v mod 1` in `[-0.5, 0.5)`.
pub fn wrap_signed(v: f64) -> f64 {
    v - (v + 0.5).floor()
}

/// Euclidean distance on the torus.
pub fn torus_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    wrap_signed(a[0] - b[0]).hypot(wrap_signed(a[1] - b[1]))
}

/// Which coordinate a shear moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShearAxis {
    /// `(x₁ + g(x₂), x₂)`
    First,
    /// `(x₁, x₂ + g(x₁))`
    Second,
}

impl ShearAxis {
    fn moved(self) -> usize {
        match self {
            ShearAxis::First => 0,
            ShearAxis::Second => 1,
        }
    }

    fn other(self) -> usize {
        1 - self.moved()
    }
}

/// A volume-preserving analytic shear. Its Jacobian is unipotent, so the
/// determinant is exactly one everywhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shear {
    pub axis: ShearAxis,
    pub profile: TrigPoly,
}

impl Shear {
    /// `profile` must be real and depend only on the coordinate that the
    /// shear does not move.
    pub fn new(axis: ShearAxis, profile: TrigPoly) -> Result<Self> {
        if !profile.is_real(1e-14) {
            return Err(Error::InvalidShear("profile is not real-valued".into()));
        }
        if !profile.independent_of(axis.moved()) {
            return Err(Error::InvalidShear(format!(
                "profile depends on the sheared coordinate x{}",
                axis.moved() + 1
            )));
        }
        Ok(Shear { axis, profile })
    }

    /// `ε sin(2π x_other)`; vanishes at the origin.
    pub fn sine(axis: ShearAxis, epsilon: f64) -> Self {
        let mut alpha = [0, 0];
        alpha[axis.other()] = 1;
        Shear {
            axis,
            profile: TrigPoly::sin(alpha, epsilon),
        }
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        let mut y = x;
        y[self.axis.moved()] += self.profile.eval_real(x);
        y
    }

    pub fn jacobian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let g = self.profile.gradient_real(x);
        let mut j = [[1.0, 0.0], [0.0, 1.0]];
        let (i, o) = (self.axis.moved(), self.axis.other());
        j[i][o] = g[o];
        j
    }
}

/// Serializable description of an [`AnosovMap`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDescription {
    pub matrix: IntMatrix,
    #[serde(default)]
    pub shears: Vec<Shear>,
}

/// `A(x) = M · S_k ∘ … ∘ S_1 (x) mod Z²` for a hyperbolic `M ∈ GL₂(Z)` and
/// volume-preserving shears `S_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "MapDescription", try_from = "MapDescription")]
pub struct AnosovMap {
    matrix: IntMatrix,
    shears: Vec<Shear>,
    splitting: HyperbolicSplitting,
    volume_preserving: bool,
}

impl AnosovMap {
    pub fn linear(matrix: IntMatrix) -> Result<Self> {
        Self::new(matrix, Vec::new())
    }

    pub fn cat() -> Self {
        Self::linear(IntMatrix::CAT).expect("cat map is hyperbolic")
    }

    pub fn new(matrix: IntMatrix, shears: Vec<Shear>) -> Result<Self> {
        let splitting = HyperbolicSplitting::new(&matrix)?;
        let mut map = AnosovMap {
            matrix,
            shears,
            splitting,
            volume_preserving: false,
        };
        map.volume_preserving = map.jacobian_determinant_defect(16) <= 1e-10;
        if !map.volume_preserving {
            return Err(Error::InvalidShear(
                "Jacobian determinant differs from det M".into(),
            ));
        }
        Ok(map)
    }

    /// Appends a shear applied after the existing ones and before `M`.
    pub fn with_shear(self, shear: Shear) -> Result<Self> {
        let mut shears = self.shears;
        shears.push(shear);
        Self::new(self.matrix, shears)
    }

    /// The same linear part with every shear profile multiplied by `t`.
    /// Used for continuation from the linear map.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        let shears = self
            .shears
            .iter()
            .map(|s| Shear {
                axis: s.axis,
                profile: s.profile.scale(Complex64::new(t, 0.0)),
            })
            .collect();
        Self::new(self.matrix, shears)
    }

    pub fn matrix(&self) -> IntMatrix {
        self.matrix
    }

    pub fn shears(&self) -> &[Shear] {
        &self.shears
    }

    pub fn is_linear(&self) -> bool {
        self.shears.iter().all(|s| s.profile.is_empty())
    }

    pub fn volume_preserving(&self) -> bool {
        self.volume_preserving
    }

    /// Eigen-data of the linear part.
    pub fn splitting(&self) -> &HyperbolicSplitting {
        &self.splitting
    }

    /// `|μ|`, the expansion rate of the linear part.
    pub fn expansion(&self) -> f64 {
        self.splitting.expanding.abs()
    }

    /// Sum of the shear profile degrees; bounds the frequency spread the
    /// perturbation adds to `e_α ∘ A`.
    pub fn perturbation_degree(&self) -> i64 {
        self.shears.iter().map(|s| s.profile.degree()).sum()
    }

    /// The map on the universal cover, without reduction mod 1.
    pub fn lift(&self, x: [f64; 2]) -> [f64; 2] {
        let y = self.shears.iter().fold(x, |y, s| s.apply(y));
        self.matrix.apply_f64(y)
    }

    pub fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        reduce_point(self.lift(x))
    }

    /// `A(x) − M x` on the cover; a periodic function of `x`.
    pub fn perturbation(&self, x: [f64; 2]) -> [f64; 2] {
        let y = self.lift(x);
        let m = self.matrix.apply_f64(x);
        [y[0] - m[0], y[1] - m[1]]
    }

    pub fn jacobian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        self.eval_with_jacobian(x).1
    }

    /// Reduced image together with `D_x A`.
    pub fn eval_with_jacobian(&self, x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let mut y = x;
        let mut j = [[1.0, 0.0], [0.0, 1.0]];
        for s in &self.shears {
            j = mat_mul(s.jacobian(y), j);
            y = s.apply(y);
        }
        let m = self.matrix.to_f64();
        (reduce_point(self.matrix.apply_f64(y)), mat_mul(m, j))
    }

    pub fn iterate(&self, x: [f64; 2], n: usize) -> [f64; 2] {
        (0..n).fold(reduce_point(x), |y, _| self.eval(y))
    }

    /// `Aⁿ x` and `D_x Aⁿ`, reducing mod 1 at every step.
    pub fn iterate_with_jacobian(&self, x: [f64; 2], n: usize) -> ([f64; 2], [[f64; 2]; 2]) {
        let mut y = reduce_point(x);
        let mut j = [[1.0, 0.0], [0.0, 1.0]];
        for _ in 0..n {
            let (next, dj) = self.eval_with_jacobian(y);
            j = mat_mul(dj, j);
            y = next;
        }
        (y, j)
    }

    fn jacobian_determinant_defect(&self, grid: usize) -> f64 {
        let target = self.matrix.det() as f64;
        let mut worst: f64 = 0.0;
        for i in 0..grid {
            for k in 0..grid {
                let x = [i as f64 / grid as f64, k as f64 / grid as f64];
                let j = self.jacobian(x);
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                worst = worst.max((det - target).abs());
            }
        }
        worst
    }
}

impl From<AnosovMap> for MapDescription {
    fn from(m: AnosovMap) -> Self {
        MapDescription {
            matrix: m.matrix,
            shears: m.shears,
        }
    }
}

impl TryFrom<MapDescription> for AnosovMap {
    type Error = Error;

    fn try_from(d: MapDescription) -> Result<Self> {
        for s in &d.shears {
            Shear::new(s.axis, s.profile.clone())?;
        }
        AnosovMap::new(d.matrix, d.shears)
    }
}

pub(crate) fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// `A x mod 1`.
pub fn eval_map(map: &AnosovMap, x: [f64; 2]) -> [f64; 2] {
    map.eval(x)
}

/// `τ⁽ⁿ⁾(x) = Σ_{k<n} τ(A^k x)` for a real observable `τ`.
pub fn birkhoff_sum(map: &AnosovMap, tau: &TrigPoly, x: [f64; 2], n: usize) -> f64 {
    let mut y = reduce_point(x);
    let mut acc = 0.0;
    for _ in 0..n {
        acc += tau.eval_real(y);
        y = map.eval(y);
    }
    acc
}
