//! Constant-curvature minimal surfaces in truncated Hilbert spheres, realised
//! as orbits of class-one unitary representations of `PSL(2,R)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] — series parameter `s`, curvature dictionary and the `A_k`, `c_p` sequences.
//! * [`operators`] — banded ladder operators on a finite index window and their residual checks.
//! * [`group`] — `SL(2,R)` words, Möbius action and hyperbolic geometry of the upper half-plane.
//! * [`orbit`] — orbit sampling `p ↦ ρ(g_p) e_0`, tail policy and the moving-frame flow.
//! * [`spherical`] — the radial spherical function used as an independent oracle.
//! * [`verify`] — pullback metric, curvature, minimality, Gram pairings and area rigidity.
//! * [`suites`], [`report`], [`cli`] — machine-readable verification runs.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exec;
pub mod group;
pub mod linalg;
pub mod operators;
pub mod orbit;
pub mod params;
pub mod report;
pub mod spherical;
pub mod suites;
pub mod svg;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use params::SeriesParam;
