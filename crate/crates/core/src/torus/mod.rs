//! Dynamics on the two-torus: observables, the map `A = M ∘ shears`,
//! Birkhoff sums and the circle extension.

mod extension;
mod map;
mod matrix;
mod trig;

pub use extension::{extension_step, CircleExtensionState};
pub use map::{
    birkhoff_sum, eval_map, reduce, reduce_point, torus_distance, wrap_signed, AnosovMap,
    MapDescription, Shear, ShearAxis,
};
pub use matrix::{HyperbolicSplitting, IntMatrix};
pub use trig::{complexified_sup_norm, Freq, TrigPoly};
