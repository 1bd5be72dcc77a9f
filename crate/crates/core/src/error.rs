//! Error type shared by every level of the reduction chain.

use thiserror::Error;

/// Errors raised by state validation, vector fields and conversions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VortexError {
    /// Two vortices closer than the collision threshold.
    #[error("vortex collision between vortices {i} and {j} (chord {dist:.3e})")]
    Collision { i: usize, j: usize, dist: f64 },

    /// Log argument of the lifted Hamiltonian vanished or went negative.
    #[error("lifted collision between columns {i} and {j}")]
    LiftedCollision { i: usize, j: usize },

    /// Shape coordinates are undefined when a pair sits at antipodal points.
    #[error("shape undefined: antipodal vortices ({i}, {j})")]
    AntipodalPair { i: usize, j: usize },

    /// A logarithm argument left its positive domain, e.g. during shape
    /// integration. Carries the offending pair.
    #[error("nonpositive log argument for pair ({i}, {j})")]
    LogDomain { i: usize, j: usize },

    /// Hopf lift of the zero vector.
    #[error("degenerate point: cannot lift the zero vector")]
    DegeneratePoint,

    /// Circulations must be nonzero.
    #[error("circulation {i} is zero")]
    ZeroCirculation { i: usize },

    /// Sphere radius must be positive.
    #[error("sphere radius must be positive, got {0}")]
    BadRadius(f64),

    /// Mismatched sizes between states, circulations or matrices.
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A matrix argument failed a structural requirement.
    #[error("invalid matrix: {0}")]
    InvalidMatrix(&'static str),

    /// Coordinate index out of range for the current N.
    #[error("invalid coordinate index: {0}")]
    InvalidIndex(&'static str),

    /// State violates an invariant (off the sphere, inadmissible shape, ...).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Energy-Casimir spec does not satisfy the first-variation conditions.
    #[error("not a critical point family: {0}")]
    NotCriticalFamily(&'static str),

    /// Stability analysis is defined for four vortices only.
    #[error("tetrahedron analysis requires N=4, got N={0}")]
    RequiresFourVortices(usize),

    /// Bad integrator configuration.
    #[error("invalid integrator configuration: {0}")]
    BadIntegratorConfig(&'static str),
}

pub type Result<T> = std::result::Result<T, VortexError>;
