//! Default numeric tolerances. Structural invariants use 1e−10 unless a
//! caller overrides per call; the remaining knobs separate genuinely
//! different failure modes (slow modes vs. fixed space, truncation
//! weights vs. rank deficiency).

/// Structural invariants: unitarity, hermiticity, projections, state
/// validation.
pub const STRUCTURAL: f64 = 1e-10;

/// Eigenvalues with |λ − 1| below this count as fixed when reading the
/// spectrum of a channel superoperator.
pub const CLUSTER: f64 = 1e-9;

/// Relative faithfulness threshold: a density is faithful when its
/// smallest eigenvalue exceeds this multiple of the largest.
pub const FAITHFUL_REL: f64 = 1e-12;

/// Trace-norm gate on ‖u(ρ_φ⊗ρ_ψ)u* − ρ_φ⊗ρ_ψ‖₁ when building the
/// extended transition. Micromaser truncation keeps this exact up to
/// rounding, so the gate is tight.
pub const PRODUCT_STATIONARY: f64 = 1e-9;

/// Eigenvalues of ρ_ψ below this are dropped from the Kraus family.
pub const KRAUS_DROP: f64 = 1e-14;

/// Default hard cap on the joint dimension N·dⁿ of dense chain objects.
pub const CHAIN_DIM_CAP: usize = 4096;

/// Residual bound required of every reported stationary density.
pub const STATIONARY_RESIDUAL: f64 = 1e-10;

/// Positive-definiteness threshold for the d1 partial sums Σ Z'ᵏ(p_Ω).
pub const D1_POSITIVE: f64 = 1e-10;

/// Relative singular-value cutoff for observability ranks.
pub const RANK_REL: f64 = 1e-10;
