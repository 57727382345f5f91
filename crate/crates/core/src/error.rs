use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A declared factor structure does not match the matrix it is
    /// attached to, or two operands live on incompatible factors.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// Factor index outside the declared tensor structure.
    #[error("factor index {index} out of range for {nfactors} factors")]
    FactorOutOfRange { index: usize, nfactors: usize },

    /// Chain factors must share one dimension for reordering.
    #[error("chain factors have unequal dimensions: {0:?}")]
    UnequalChainDims(Vec<usize>),

    /// A matrix that must be a state failed validation.
    #[error("not a density state: {reason} (defect {defect:.3e}, tol {tol:.3e})")]
    NotAState { reason: String, defect: f64, tol: f64 },

    /// A matrix that must be a projection failed validation.
    #[error("not a projection: defect {defect:.3e}")]
    NotAProjection { defect: f64 },

    /// A matrix that must be unitary failed validation.
    #[error("not unitary: ‖u*u − 1‖ = {defect:.3e}")]
    NotUnitary { defect: f64 },

    /// A state that must be faithful has (numerically) deficient rank.
    #[error("state not faithful: min eigenvalue {min_eig:.3e} below threshold {threshold:.3e}")]
    NotFaithful { min_eig: f64, threshold: f64 },

    /// The product state φ ⊗ ψ is not stationary for the coupling.
    #[error("product state not stationary for the coupling: ‖u(ρ_φ⊗ρ_ψ)u* − ρ_φ⊗ρ_ψ‖₁ = {defect:.3e} > {tol:.3e}")]
    NotProductStationary { defect: f64, tol: f64 },

    /// φ is not stationary for the channel it was paired with.
    #[error("state not stationary for the channel: residual {residual:.3e}")]
    NotStationary { residual: f64 },

    /// Joint dimension N·dⁿ would exceed the configured cap.
    #[error("chain dimension {required} exceeds cap {cap}")]
    ChainDimExceeded { required: usize, cap: usize },

    /// The support-domination precondition of the orthogonal-stationary
    /// construction is violated.
    #[error("support of second state dominated by the first: {0}")]
    SupportDominated(String),

    /// Z' did not leave the commutant invariant; the model is outside
    /// the product-stationary setting.
    #[error("commutant not invariant under Z': defect {defect:.3e}")]
    CommutantNotInvariant { defect: f64 },

    /// Forward-synthesis normalizer vanished at every requested n.
    #[error("forward-synthesis normalizer below {tol:.3e} for all n ≤ {n_max}")]
    VanishingNormalizer { n_max: usize, tol: f64 },

    /// The reverse sequence handed to the time-reversal construction
    /// must target a vector state.
    #[error("reverse sequence target is not a vector state: purity defect {defect:.3e}")]
    NotAVectorState { defect: f64 },

    /// Off-diagonal leakage: the channel is not of micromaser form.
    #[error("channel does not preserve the diagonal algebra: leakage {leakage:.3e}")]
    DiagonalLeakage { leakage: f64 },

    /// A 2×2 coefficient block failed unitarity.
    #[error("coefficient block {index} not unitary: defect {defect:.3e}")]
    BlockNotUnitary { index: usize, defect: f64 },

    /// λ outside [0, ½).
    #[error("lambda {0} outside [0, 1/2)")]
    LambdaOutOfRange(f64),

    /// LAPACK failure surfaced by the backend.
    #[error("linear algebra backend: {0}")]
    Linalg(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
