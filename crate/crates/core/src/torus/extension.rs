use serde::{Deserialize, Serialize};

use super::map::{reduce, reduce_point, AnosovMap};
use super::trig::TrigPoly;

/// A point `(x, ω)` of `T² × S¹`, coordinates kept in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleExtensionState {
    pub x: [f64; 2],
    pub omega: f64,
}

impl CircleExtensionState {
    pub fn new(x: [f64; 2], omega: f64) -> Self {
        CircleExtensionState {
            x: reduce_point(x),
            omega: reduce(omega),
        }
    }
}

/// One step of the skew product `(x, ω) ↦ (A x, ω + τ(x))`.
pub fn extension_step(
    map: &AnosovMap,
    tau: &TrigPoly,
    state: CircleExtensionState,
) -> CircleExtensionState {
    CircleExtensionState::new(map.eval(state.x), state.omega + tau.eval_real(state.x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_roof_keeps_fibre_coordinate() {
        let cat = AnosovMap::cat();
        let s = CircleExtensionState::new([0.3, 0.7], 0.42);
        let t = extension_step(&cat, &TrigPoly::zero(), s);
        assert_eq!(t.omega, 0.42);
        assert_eq!(t.x, cat.eval([0.3, 0.7]));
    }

    #[test]
    fn rational_rotation_returns() {
        let cat = AnosovMap::cat();
        let tau = TrigPoly::constant(0.25);
        let start = CircleExtensionState::new([0.0, 0.0], 0.1);
        let end = (0..4).fold(start, |s, _| extension_step(&cat, &tau, s));
        assert_eq!(end.x, [0.0, 0.0]);
        assert!((end.omega - 0.1).abs() < 1e-15);
    }

    #[test]
    fn half_cosine_at_origin() {
        let cat = AnosovMap::cat();
        let tau = TrigPoly::cos([1, 0], 0.5);
        let s = extension_step(&cat, &tau, CircleExtensionState::new([0.0, 0.0], 0.0));
        assert_eq!(s.x, [0.0, 0.0]);
        assert_eq!(s.omega, 0.5);
    }
}
