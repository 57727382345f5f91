//! Numerical laboratory for discrete-time repeated-interaction quantum
//! Markov chains.
//!
//! A coupling unitary `u` on system ⊗ ancilla, together with a faithful
//! stationary pair of states (φ, ψ), defines a transition
//! `J(a) = u*(a ⊗ 1)u` and its chain iterates `J_n`. This crate builds
//! these objects at finite dimension and provides
//!
//! - stationary-state solvers and irreducibility/ergodicity certificates
//!   for the reduced transition channel `T_ψ = P_ψ ∘ J`,
//! - the GNS isometry `v` extending `J` and the dual extended transition
//!   operator `Z'(x) = v*(x ⊗ 1)v`,
//! - certification of asymptotic completeness together with defect
//!   profiles, injectivity (d1) and observability diagnostics,
//! - synthesis of preparing sequences (forward, σ-convex, time-reversal,
//!   concatenated, constant-input) with convergence traces,
//! - the generalized micromaser model family with its birth-death
//!   reduction and trapped-state scan.

use openblas_src as _;

pub mod completeness;
pub mod error;
pub mod gns;
pub mod linalg;
pub mod micromaser;
pub mod preparation;
pub mod random;
pub mod stationary;
pub mod tensor;
pub mod tol;
pub mod transition;

pub use error::{Error, Result};
pub use tensor::{ComplexOperator, DensityState, DistanceMode, FactorDims};
pub use transition::{CouplingModel, Direction, KrausChannel};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
