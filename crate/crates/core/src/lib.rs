//! Numerical laboratory for circle extensions of toral Anosov maps.
//!
//! The skew product `(x, ω) ↦ (A x, ω + τ(x))` on `T² × S¹` splits, mode by
//! mode in the circle variable, into twisted Koopman operators
//! `L_q f = e^{2πiqτ} · (f ∘ A)`. This crate computes their spectra on an
//! anisotropic Hilbert space, their traces both from matrices and from
//! periodic orbits, Fredholm determinants, topological pressure of the
//! unstable jacobian, statistics of a Gaussian ensemble of roof functions
//! and correlation decay rates.
//!
//! Every quantity is checked through two independent routes: periodic-orbit
//! sums against matrix traces, direct quadrature against spectral
//! correlations, closed forms against Monte Carlo.
//!
//! Parallel loops use rayon when the `parallel` feature is enabled (the
//! default) and fall back to sequential iteration otherwise; see [`exec`].
//!
//! ```
//! # fn main() -> twistlab::Result<()> {
//! use twistlab::aniso::WeightScheme;
//! use twistlab::operator::{assemble_auto, spectrum};
//! use twistlab::orbits::orbit_trace_sum;
//! use twistlab::torus::{AnosovMap, IntMatrix, TrigPoly};
//!
//! let cat = AnosovMap::cat();
//! let tau = TrigPoly::cos([1, 0], 0.5);
//! let scheme = WeightScheme::new(IntMatrix::CAT, 0.02)?;
//! let t = assemble_auto(&cat, &tau, 1, &scheme, 12, 64)?;
//! let rep = spectrum(&t, 4)?;
//! let orbit = orbit_trace_sum(&cat, &tau, 1, 3)?;
//! assert!((rep.traces[2] - orbit).norm() < 1e-8);
//! # Ok(())
//! # }
//! ```

// `!(x < limit)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aniso;
pub mod ensemble;
mod error;
pub mod exec;
pub mod fit;
pub mod mixing;
pub mod operator;
pub mod orbits;
pub mod pressure;
pub mod sum;
pub mod torus;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Version string embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
