//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by the library.
///
/// Every fallible operation returns `Result<_, Error>`; the variants carry
/// enough context to diagnose the failing input without re-running it.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An input matrix or vector contains a NaN or infinite entry.
    #[error("non-finite entry at position ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// Two inputs that must agree in size do not.
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// The SVD iteration failed to converge on this input.
    #[error("singular value decomposition did not converge")]
    SvdFailed,

    /// A target diagonal lies outside the parity polytope.
    #[error("vector is not in the parity polytope (facet violation {violation:.3e})")]
    NotInParityPolytope { violation: f64 },

    /// The source vector does not majorize the target vector.
    #[error("majorization fails: top-{k} partial sum short by {deficit:.3e}")]
    NotMajorized { k: usize, deficit: f64 },

    /// A strict upper triangle lies on or outside the boundary of the
    /// projected operator-norm ball, so no completion with two distinct
    /// diagonal values exists.
    #[error("strict upper triangle is not in the interior of the projected ball (margin {margin:.3e})")]
    NotInterior { margin: f64 },

    /// A block that must be invertible is numerically singular.
    #[error("singular block encountered: {context}")]
    SingularBlock { context: &'static str },

    /// Fiber enumeration was requested for a dimension where 2^n matrices
    /// would be unreasonable.
    #[error("dimension {n} too large for fiber enumeration (limit {limit})")]
    DimensionTooLarge { n: usize, limit: usize },

    /// More constraint vectors were supplied than the reduction supports.
    #[error("too many vectors: {got} supplied, at most {limit} allowed")]
    TooManyVectors { got: usize, limit: usize },

    /// The triangular support pattern required by the reduction failed to
    /// materialize (rank-deficient input list).
    #[error("vector list is rank deficient: support pattern violated by {residual:.3e}")]
    RankDeficient { residual: f64 },

    /// The constrained problem provably has no solution within tolerance.
    #[error("infeasible: constraint interval unreachable by margin {margin:.3e}")]
    Infeasible { margin: f64 },

    /// The feasibility search exhausted its iteration budget without
    /// producing a point that satisfies the constraints.
    #[error("no feasible point found (best residual {residual:.3e})")]
    NotFound { residual: f64 },
}
