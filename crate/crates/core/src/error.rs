use thiserror::Error;

/// Failure classes shared by every module of the toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("Lévy integrability condition fails: {0}")]
    NonIntegrable(String),

    #[error("measure has an atom at the origin")]
    OriginAtom,

    #[error("operation does not support the {0} representation")]
    UnsupportedRepresentation(&'static str),

    #[error("measure has infinite total mass")]
    InfiniteMass,

    #[error("measure has zero total mass")]
    ZeroMass,

    #[error("convolution power produced {count} atoms (cap {cap}); raise the merge tolerance")]
    AtomExplosion { count: usize, cap: usize },

    #[error("quadrature did not converge: error estimate {error:e} exceeds tolerance {tolerance:e}")]
    QuadratureFailure { error: f64, tolerance: f64 },

    #[error("input matrix is not symmetric (max |M - Mᵀ| = {0:e})")]
    AsymmetricInput(f64),

    #[error("matrix is not symmetric (max |A - Aᵀ| = {0:e})")]
    NotSymmetric(f64),

    #[error("spectral measure is empty")]
    EmptySpectral,

    #[error("domination ν₁ ≤ ν₂ fails: {0}")]
    DominationViolated(String),

    #[error("|Aξ| reaches {found} |ξ|, above the declared bound {bound}")]
    NormBoundViolated { found: f64, bound: f64 },

    #[error("operation requires dimension 2, got {0}")]
    NotPlanar(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("semigroup truncation tolerance not met: {0}")]
    SemigroupTruncation(String),

    #[error("modulator value {value} exceeds the bound {bound}")]
    ModulatorBound { value: f64, bound: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
