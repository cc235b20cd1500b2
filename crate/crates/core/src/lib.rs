//! Finite-element machinery for the fine-tunable Föppl–von Kármán plate model.
//!
//! The out-of-plane deflection `w` is discretized with the discrete Kirchhoff
//! triangle (nodal values and gradients as degrees of freedom), the in-plane
//! displacement `u` with continuous P1 elements. The energy
//!
//! ```text
//! E(u, w) = 1/2 ∫ |∇∇_h w − α I|²  +  θ/2 ∫ Î_h |∇w ⊗ ∇w + ε̃(u)|²  −  ∫ Î_h [f w]
//! ```
//!
//! is minimized by a decoupled gradient flow: an implicit Newton-solved step
//! in `w` followed by a linear step in `u`, with adaptive step sizes.
//! Plates with creases carry duplicated gradient slots on the crease and the
//! value continuity is enforced with Lagrange multipliers.
//!
//! The crate is `no_std` and only needs an allocator; IO, configuration and
//! the command line live in the `fvk-sim` companion crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dense;
pub mod dkt;
pub mod energy;
mod error;
pub mod flow;
pub mod mesh;
pub mod p1;
pub mod problem;
pub mod quadrature;
pub mod sparse;

mod linalg;

pub use dkt::{DktElementOperators, DktField, Discretization};
pub use energy::{Diagnostics, EnergyBreakdown};
pub use error::{Error, Result};
pub use flow::{
    continuation_sweep, ConstraintSet, Flow, FlowState, NewtonMeasure, NewtonOutcome, SolverConfig, StepRecord,
};
pub use linalg::{Mat2, Vec2};
pub use mesh::{CreaseSpec, Triangulation};
pub use p1::P1VectorField;
pub use problem::{BoundaryCondition, ForceRamp, MetricOptions, ProblemSpec};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
