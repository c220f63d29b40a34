//! Feasibility and linear optimization over rotation and orthogonal matrices.
//!
//! The sets `SO(n)` (rotations) and `O(n)` (orthogonal matrices) are nonconvex,
//! yet several optimization problems posed over them admit exact convex
//! reformulations once the matrix variable is pushed through a suitable linear
//! projection.  This crate implements the resulting algorithms:
//!
//! * [`linalg`] — dense kernels shared by everything else: a deterministic
//!   SVD wrapper, the support function of `SO(n)` ("special trace") and of
//!   `O(n)` (trace norm), maximal-torus rotations, seeded random rotations,
//!   and projections onto the operator-norm ball.
//! * [`parity`] — exact oracles (membership, separation, linear optimization)
//!   for the parity polytope, which is the image of `SO(n)` under the
//!   diagonal projection.
//! * [`diag`] — constructive Schur–Horn machinery: build a rotation with a
//!   prescribed diagonal, and decide feasibility of polyhedral constraints on
//!   the diagonal by a cutting-plane method.
//! * [`one_constraint`] — maximize one linear functional over `SO(n)` subject
//!   to an interval constraint on a second one, via a two-dimensional
//!   ellipsoid method with a weak separation oracle.
//! * [`sut`] — the strict-upper-triangle projection: fiber construction and
//!   enumeration, closed-form diagonal optimization over `O(n)` and `SO(n)`
//!   (exact over the fiber, with a `1 − 1/n` guarantee against the ball
//!   relaxation), and rank-one constraint feasibility via triangular
//!   reduction.
//!
//! All routines are deterministic: randomized helpers take explicit seeds.

pub mod diag;
pub mod error;
pub mod linalg;
pub mod one_constraint;
pub mod parity;
pub mod sut;
pub mod tol;

pub use error::Error;
pub use tol::ToleranceConfig;
