//! Subgradient projection operators for convex functions on `ℝⁿ`.
//!
//! The crate is organized bottom-up: [`vector`] holds the numeric plumbing,
//! [`functions`] the catalog of convex functions and their oracles,
//! [`projector`] the operator itself, [`calculus`] and [`prox`] the rules for
//! composed functions, [`feasibility`] the relaxed projection solver and
//! [`analysis`] the regularity diagnostics.

pub mod analysis;
pub mod calculus;
pub mod error;
pub mod feasibility;
pub mod functions;
pub mod projector;
pub mod prox;
mod util;
pub mod vector;

pub use error::{Error, Result};
pub use feasibility::{
    ControlSequence, ControlViolation, IterationRecord, Problem, Relaxation, SolveStatus, SolveTrace,
};
pub use functions::{
    AffinePiece, FunctionKind, FunctionSpec, JointSelection, Minimizer, ScalarMap, SelectionStrategy, SetSpec,
};
pub use projector::{ProjOutcome, Status};
pub use vector::{ExtReal, Matrix, Vector, EPS_NORM, FD_STEP};
