//! Linear optimization over rotations with one linear constraint:
//! `max { ⟨A, X⟩ : ⟨B, X⟩ ∈ [a, b], X ∈ SO(n) }`.
//!
//! The map `π(X) = (⟨A, X⟩, ⟨B, X⟩)` sends `SO(n)` onto a convex planar set
//! when `n ≥ 3` (the intersection of `SO(n)` with a codimension-one affine
//! space is connected), so the problem collapses to two-dimensional convex
//! optimization.  Everything is driven by the support function of the image,
//! `max_X ⟨y, π(X)⟩ = str(y₁A + y₂B)`, one singular value decomposition per
//! evaluation:
//!
//! * [`support_point`] evaluates the support function and returns the image
//!   of its rotation argmax;
//! * [`weak_separation`] decides `x ∈ image + eps-box` versus "here is a
//!   separating hyperplane", by minimizing `str(π*(y)) − ⟨y, x⟩` over the
//!   four segments of the unit `L1` sphere with golden-section search;
//! * [`solve_one_constraint`] runs a central-cut ellipsoid on the image,
//!   cutting on the constraint interval, on separating hyperplanes, and on
//!   the objective, and reports a near-optimal value, the image point, and a
//!   supporting-direction certificate;
//! * [`image_boundary_polygon`] samples support points for plotting the
//!   image.
//!
//! Inputs are rescaled to unit trace norm internally (the weak-separation
//! bounds assume it); results are reported in the original scale.

use nalgebra::{DMatrix, Matrix2, Vector2};

use crate::error::Error;
use crate::linalg::{special_trace, special_trace_value, trace_norm};

// ── Normalized image ─────────────────────────────────────────────────────────

/// The pair `(A, B)` defining `π(X) = (⟨A, X⟩, ⟨B, X⟩)`, rescaled so both
/// matrices have unit trace norm; the original norms are kept for unscaling.
/// Unit trace norm puts the image inside `[−1, 1]²` by Hölder's inequality.
#[derive(Debug, Clone)]
pub struct TwoDImage {
    a_mat: DMatrix<f64>,
    b_mat: DMatrix<f64>,
    scale_a: f64,
    scale_b: f64,
}

impl TwoDImage {
    /// Validate and rescale the pair.  Both matrices must be square, of the
    /// same size, finite, and nonzero (a zero matrix has no unit-trace-norm
    /// rescaling).
    pub fn new(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Self, Error> {
        for m in [a, b] {
            if m.nrows() != m.ncols() {
                return Err(Error::DimensionMismatch {
                    context: "image matrices must be square",
                    expected: m.nrows(),
                    got: m.ncols(),
                });
            }
            for (idx, v) in m.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        row: idx % m.nrows(),
                        col: idx / m.nrows(),
                    });
                }
            }
        }
        if a.nrows() != b.nrows() {
            return Err(Error::DimensionMismatch {
                context: "image matrices must have equal size",
                expected: a.nrows(),
                got: b.nrows(),
            });
        }
        let scale_a = trace_norm(a)?;
        let scale_b = trace_norm(b)?;
        if scale_a <= f64::MIN_POSITIVE || scale_b <= f64::MIN_POSITIVE {
            return Err(Error::SingularBlock {
                context: "image matrices must have positive trace norm",
            });
        }
        Ok(TwoDImage {
            a_mat: a / scale_a,
            b_mat: b / scale_b,
            scale_a,
            scale_b,
        })
    }

    pub fn a_mat(&self) -> &DMatrix<f64> {
        &self.a_mat
    }

    pub fn b_mat(&self) -> &DMatrix<f64> {
        &self.b_mat
    }

    pub fn scale_a(&self) -> f64 {
        self.scale_a
    }

    pub fn scale_b(&self) -> f64 {
        self.scale_b
    }

    pub fn n(&self) -> usize {
        self.a_mat.nrows()
    }
}

/// A support-function evaluation of the (normalized) image.
#[derive(Debug, Clone)]
pub struct SupportEvaluation {
    /// Queried direction.
    pub y: Vector2<f64>,
    /// `str(y₁A + y₂B) = max { ⟨y, p⟩ : p ∈ image }`.
    pub value: f64,
    /// Image `π(X*)` of the maximizing rotation.
    pub point: Vector2<f64>,
}

/// Evaluate the support function of the normalized image in direction `y`
/// and return the image point achieving it.
pub fn support_point(img: &TwoDImage, y: Vector2<f64>) -> Result<SupportEvaluation, Error> {
    if !y.x.is_finite() || !y.y.is_finite() {
        return Err(Error::NonFinite {
            row: usize::from(y.x.is_finite()),
            col: 0,
        });
    }
    let m = img.a_mat() * y.x + img.b_mat() * y.y;
    let (value, x_star) = special_trace(&m)?;
    let point = Vector2::new(img.a_mat().dot(&x_star), img.b_mat().dot(&x_star));
    debug_assert!(
        (y.dot(&point) - value).abs() <= 1e-9 * (1.0 + y.x.abs() + y.y.abs()),
        "support value must match its witness"
    );
    debug_assert!(
        point.amax() <= 1.0 + 1e-9,
        "unit trace norm bounds the image by 1"
    );
    Ok(SupportEvaluation { y, value, point })
}

// ── Golden-section search ────────────────────────────────────────────────────

/// Minimize a convex function on `[0, 1]` by golden-section search, to
/// additive error `eps` for any Lipschitz constant up to `4 + 2eps` (the
/// bound satisfied by the separation objective on unit-trace-norm inputs).
///
/// Returns `(argmin, min)`.  Uses at most `⌈log_φ((4 + 2eps)/eps)⌉ + 2`
/// evaluations: the bracket shrinks by `1/φ` per step and the final bracket
/// width `eps / (4 + 2eps)` converts to a value gap of at most `eps`.
pub fn golden_minimize(g: impl FnMut(f64) -> f64, eps: f64) -> (f64, f64) {
    golden_minimize_until(g, eps, f64::NEG_INFINITY)
}

/// [`golden_minimize`] with a bail-out: return the current sample as soon as
/// its value is at most `stop_below`.  Callers that only need the sign of
/// the minimum — the separation oracle certifying a separator — skip the
/// rest of the schedule; the returned value is then a witness, not the
/// minimum.
fn golden_minimize_until(
    mut g: impl FnMut(f64) -> f64,
    eps: f64,
    stop_below: f64,
) -> (f64, f64) {
    assert!(eps > 0.0 && eps.is_finite(), "eps must be positive");
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let target = eps / (4.0 + 2.0 * eps);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = g(x1);
    if f1 <= stop_below {
        return (x1, f1);
    }
    let mut f2 = g(x2);
    if f2 <= stop_below {
        return (x2, f2);
    }
    while hi - lo > target {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = g(x1);
            if f1 <= stop_below {
                return (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = g(x2);
            if f2 <= stop_below {
                return (x2, f2);
            }
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

// ── Weak separation ──────────────────────────────────────────────────────────

/// Outcome of [`weak_separation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Separation {
    /// The query lies within an `eps`-box of the image.
    Inside,
    /// A direction `y` with `‖y‖₁ = 1` and `⟨y, x⟩ ≥ max_image ⟨y, ·⟩`.
    Hyperplane(Vector2<f64>),
}

/// Book-keeping shared by the solver: support evaluations performed, and the
/// first error raised inside a search closure (closures cannot return
/// `Result` through the golden-section driver).
#[derive(Default)]
struct EvalCounter {
    str_evals: usize,
    error: Option<Error>,
}

impl EvalCounter {
    fn support_value(&mut self, img: &TwoDImage, y: Vector2<f64>) -> f64 {
        self.str_evals += 1;
        let m = img.a_mat() * y.x + img.b_mat() * y.y;
        match special_trace_value(&m) {
            Ok(v) => v,
            Err(e) => {
                self.error.get_or_insert(e);
                f64::INFINITY
            }
        }
    }

    fn take(&mut self) -> Result<(), Error> {
        match self.error.take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

fn weak_separation_with(
    img: &TwoDImage,
    x: Vector2<f64>,
    eps: f64,
    counter: &mut EvalCounter,
) -> Result<Separation, Error> {
    if !x.x.is_finite() || !x.y.is_finite() {
        return Err(Error::NonFinite {
            row: usize::from(x.x.is_finite()),
            col: 0,
        });
    }
    // Outside the Hölder box: an axis direction separates outright.
    if x.amax() > 1.0 + eps {
        let y = if x.x.abs() >= x.y.abs() {
            Vector2::new(x.x.signum(), 0.0)
        } else {
            Vector2::new(0.0, x.y.signum())
        };
        return Ok(Separation::Hyperplane(y));
    }
    // Minimize f(y) = str(y₁A + y₂B) − ⟨y, x⟩ over the unit L1 sphere, one
    // golden-section search per segment.  f is 1-homogeneous, so a
    // nonpositive value anywhere on the sphere certifies a separator, and
    // four positive minima certify eps-proximity to the image.  Any
    // nonpositive sample ends the search early: the separator it witnesses
    // is exact regardless of where the true minimum sits.
    for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let (alpha, value) = golden_minimize_until(
            |alpha| {
                let y = Vector2::new(s1 * alpha, s2 * (1.0 - alpha));
                counter.support_value(img, y) - y.dot(&x)
            },
            eps,
            0.0,
        );
        counter.take()?;
        if value <= 0.0 {
            return Ok(Separation::Hyperplane(Vector2::new(
                s1 * alpha,
                s2 * (1.0 - alpha),
            )));
        }
    }
    Ok(Separation::Inside)
}

/// Weak separation oracle for the normalized image: either declare `x`
/// within an `eps`-box of the image, or return a separating direction.
///
/// A returned `Hyperplane(y)` is exact, not approximate: it is only emitted
/// when `str(π*(y)) − ⟨y, x⟩ ≤ 0` was evaluated.  The `Inside` verdict
/// carries the `eps` slack.  Requires `n ≥ 3`: the image convexity that
/// justifies the `Inside` verdict fails on `SO(2)` (a circle maps to an
/// ellipse, not a disk).
pub fn weak_separation(img: &TwoDImage, x: Vector2<f64>, eps: f64) -> Result<Separation, Error> {
    assert!(eps > 0.0 && eps.is_finite(), "eps must be positive");
    if img.n() < 3 {
        return Err(Error::DimensionMismatch {
            context: "image convexity requires n ≥ 3",
            expected: 3,
            got: img.n(),
        });
    }
    let mut counter = EvalCounter::default();
    weak_separation_with(img, x, eps, &mut counter)
}

// ── Constrained solver ───────────────────────────────────────────────────────

/// Supporting direction certifying near-optimality: `|alpha| + |beta| = 1`
/// and `str(alpha·A + beta·B) ≤ ⟨(alpha, beta), x̂⟩ + slack` at the reported
/// point `x̂` (normalized units).
#[derive(Debug, Clone, Copy)]
pub struct Certificate {
    pub alpha: f64,
    pub beta: f64,
    /// `str(αA + βB) − ⟨(α, β), x̂⟩`; small when `x̂` is near an exposed
    /// boundary point of the image.
    pub slack: f64,
}

/// Result of [`solve_one_constraint`], in original (unnormalized) units
/// except for the certificate, which refers to the unit-trace-norm pair.
#[derive(Debug, Clone)]
pub struct OneConstraintSolution {
    /// Estimated optimum of `⟨A, X⟩` subject to the interval constraint.
    pub value: f64,
    /// Estimated `(⟨A, X*⟩, ⟨B, X*⟩)` at the optimizer.
    pub point: Vector2<f64>,
    /// Supporting direction for the normalized pair.
    pub certificate: Certificate,
    /// Weak-separation oracle invocations (ellipsoid iterations that reached
    /// the oracle).
    pub oracle_calls: usize,
    /// Total support-function evaluations (one SVD each).
    pub str_evals: usize,
}

fn extract_certificate(
    img: &TwoDImage,
    x_hat: Vector2<f64>,
    eps: f64,
    tol: f64,
    counter: &mut EvalCounter,
) -> Result<Certificate, Error> {
    // When the constraint is inactive the pure objective direction already
    // supports the optimum; prefer it over an arbitrary direction from the
    // supporting cone (which is wide at a corner optimum).
    let plain = counter.support_value(img, Vector2::new(1.0, 0.0)) - x_hat.x;
    counter.take()?;
    if plain <= eps {
        return Ok(Certificate {
            alpha: 1.0,
            beta: 0.0,
            slack: plain,
        });
    }
    // The optimum maximizes the first coordinate, so a supporting direction
    // there has a nonnegative first component: search y = (α, ±(1 − α)).
    let mut best: Option<(f64, Vector2<f64>)> = None;
    for s2 in [1.0, -1.0] {
        let (alpha, value) = golden_minimize(
            |alpha| {
                let y = Vector2::new(alpha, s2 * (1.0 - alpha));
                counter.support_value(img, y) - y.dot(&x_hat)
            },
            tol,
        );
        counter.take()?;
        if best.is_none_or(|(b, _)| value < b) {
            best = Some((value, Vector2::new(alpha, s2 * (1.0 - alpha))));
        }
    }
    let (slack, y) = best.expect("two segments were searched");
    Ok(Certificate {
        alpha: y.x,
        beta: y.y,
        slack,
    })
}

/// Maximize `⟨A, X⟩` over `X ∈ SO(n)` subject to `⟨B, X⟩ ∈ [interval.0,
/// interval.1]`, to additive error `eps·‖A‖_tr`, without ever optimizing
/// over the matrix manifold directly: a central-cut ellipsoid runs on the
/// two-dimensional image, fed by interval cuts, weak-separation cuts, and
/// objective cuts at accepted points.
///
/// The matrices are normalized to unit trace norm internally and the
/// interval is rescaled along with `B`; `value` and `point` are unscaled on
/// return.  The certificate `(α, β)` satisfies `|α| + |β| = 1` and supports
/// the normalized image at the reported point.  Fails with
/// [`Error::Infeasible`] when no image point meets the interval within
/// `eps`.  Requires `n ≥ 3` (image convexity).
pub fn solve_one_constraint(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    interval: (f64, f64),
    eps: f64,
) -> Result<OneConstraintSolution, Error> {
    assert!(eps > 0.0 && eps.is_finite(), "eps must be positive");
    assert!(
        interval.0 <= interval.1 && interval.0.is_finite() && interval.1.is_finite(),
        "interval must be finite with lo ≤ hi"
    );
    let img = TwoDImage::new(a, b)?;
    if img.n() < 3 {
        return Err(Error::DimensionMismatch {
            context: "image convexity requires n ≥ 3",
            expected: 3,
            got: img.n(),
        });
    }
    let mut counter = EvalCounter::default();
    let (lo, hi) = (interval.0 / img.scale_b, interval.1 / img.scale_b);
    // Internal subroutines run at half the requested accuracy so their
    // errors compose to at most eps in the reported value and certificate.
    let tol = 0.5 * eps;

    // Attainable range of the constraint coordinate, for an infeasibility
    // verdict that needs no search.
    let up = support_point(&img, Vector2::new(0.0, 1.0))?;
    let dn = support_point(&img, Vector2::new(0.0, -1.0))?;
    counter.str_evals += 2;
    let (x2_min, x2_max) = (-dn.value, up.value);
    if lo > x2_max + eps {
        return Err(Error::Infeasible {
            margin: (lo - x2_max) * img.scale_b,
        });
    }
    if hi < x2_min - eps {
        return Err(Error::Infeasible {
            margin: (x2_min - hi) * img.scale_b,
        });
    }

    if x2_max - x2_min <= 1e-9 {
        // The image is flat in the constraint coordinate; the pre-check has
        // already confirmed the constant meets the interval, so the interval
        // constraint is vacuous and the optimum is the plain support
        // maximum.
        let right = support_point(&img, Vector2::new(1.0, 0.0))?;
        counter.str_evals += 1;
        let x_hat = Vector2::new(right.value, right.point.y);
        let certificate = extract_certificate(&img, x_hat, eps, tol, &mut counter)?;
        return Ok(OneConstraintSolution {
            value: x_hat.x * img.scale_a,
            point: Vector2::new(x_hat.x * img.scale_a, x_hat.y * img.scale_b),
            certificate,
            oracle_calls: 0,
            str_evals: counter.str_evals,
        });
    }

    // Central-cut ellipsoid from B₂(0, 2) ⊇ [−1, 1]².  The interval is
    // inflated by the internal tolerance for the feasibility cuts so that
    // equality constraints (lo == hi) still leave an acceptance region of
    // positive area; the iteration cap comes from the usual volume argument
    // against that area.
    let kappa = tol;
    let mut center = Vector2::new(0.0, 0.0);
    let mut shape = Matrix2::<f64>::identity() * 4.0;
    let cap = (24.0 * ((2.0 / tol).ln() + 2.0)).ceil() as usize;
    let mut best: Option<Vector2<f64>> = None;
    let mut oracle_calls = 0usize;
    for _ in 0..cap {
        if best.is_some() && 2.0 * shape[(0, 0)].max(0.0).sqrt() <= tol {
            break; // objective uncertainty is below the internal tolerance
        }
        let g = if center.y > hi + kappa {
            Vector2::new(0.0, 1.0)
        } else if center.y < lo - kappa {
            Vector2::new(0.0, -1.0)
        } else {
            oracle_calls += 1;
            match weak_separation_with(&img, center, tol, &mut counter)? {
                Separation::Hyperplane(y) => y,
                Separation::Inside => {
                    if best.is_none_or(|p| center.x > p.x) {
                        best = Some(center);
                    }
                    Vector2::new(-1.0, 0.0)
                }
            }
        };
        let pg = shape * g;
        let gpg = g.dot(&pg);
        if gpg <= f64::MIN_POSITIVE {
            break; // numerically collapsed
        }
        let q = pg / gpg.sqrt();
        center -= q / 3.0;
        shape = (shape - q * q.transpose() * (2.0 / 3.0)) * (4.0 / 3.0);
        shape = (shape + shape.transpose()) * 0.5;
    }
    let Some(x_hat) = best else {
        // The volume argument guarantees a feasible instance is accepted
        // within the cap, so exhausting it certifies eps-infeasibility.
        return Err(Error::Infeasible {
            margin: eps * img.scale_b,
        });
    };
    let certificate = extract_certificate(&img, x_hat, eps, tol, &mut counter)?;
    Ok(OneConstraintSolution {
        value: x_hat.x * img.scale_a,
        point: Vector2::new(x_hat.x * img.scale_a, x_hat.y * img.scale_b),
        certificate,
        oracle_calls,
        str_evals: counter.str_evals,
    })
}

/// Heuristic rounding: the rotation maximizing `⟨αA + βB, ·⟩` for the
/// certificate direction, computed on the normalized pair (matching the
/// certificate's units).  No optimality guarantee for the constrained
/// problem is implied; the result is exactly the support argmax of its
/// direction.
pub fn round_certificate(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    certificate: &Certificate,
) -> Result<DMatrix<f64>, Error> {
    debug_assert!(
        (certificate.alpha.abs() + certificate.beta.abs() - 1.0).abs() <= 1e-12,
        "certificate must be L1-normalized"
    );
    let img = TwoDImage::new(a, b)?;
    let m = img.a_mat() * certificate.alpha + img.b_mat() * certificate.beta;
    let (_, x) = special_trace(&m)?;
    Ok(x)
}

/// Support points of the original-scale image in `k` evenly spaced
/// directions.  Every returned point lies in the image, so the convex hull
/// of the list is an inner approximation of the image (exact as `k → ∞` for
/// `n ≥ 3`, where the image is convex).
pub fn image_boundary_polygon(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    k: usize,
) -> Result<Vec<Vector2<f64>>, Error> {
    assert!(k >= 1, "at least one direction is required");
    let img = TwoDImage::new(a, b)?;
    let mut points = Vec::with_capacity(k);
    for j in 0..k {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
        let eval = support_point(&img, Vector2::new(theta.cos(), theta.sin()))?;
        points.push(Vector2::new(
            eval.point.x * img.scale_a,
            eval.point.y * img.scale_b,
        ));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn eye(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    /// The worked pair: objective I/3, constraint Diag(1, 1, −1)/3.
    fn worked_pair() -> (DMatrix<f64>, DMatrix<f64>) {
        let a = eye(3) / 3.0;
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[
            1.0 / 3.0,
            1.0 / 3.0,
            -1.0 / 3.0,
        ]));
        (a, b)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn image_normalizes_to_unit_trace_norm() {
        let (a, b) = worked_pair();
        let img = TwoDImage::new(&(2.0 * &a), &(0.5 * &b)).unwrap();
        assert_relative_eq!(trace_norm(img.a_mat()).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(trace_norm(img.b_mat()).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(img.scale_a(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(img.scale_b(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn image_rejects_zero_matrix() {
        let (a, _) = worked_pair();
        assert!(matches!(
            TwoDImage::new(&a, &DMatrix::zeros(3, 3)),
            Err(Error::SingularBlock { .. })
        ));
    }

    #[test]
    fn support_point_worked_examples() {
        let (a, b) = worked_pair();
        let img = TwoDImage::new(&a, &b).unwrap();
        // Direction (1, 0): the alignment argmax of the identity is the
        // identity, whose image is (1, 1/3).
        let right = support_point(&img, Vector2::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(right.value, 1.0, epsilon = 1e-9);
        assert_relative_eq!(right.point.x, 1.0, epsilon = 1e-9);
        assert_relative_eq!(right.point.y, 1.0 / 3.0, epsilon = 1e-9);
        // Direction (0, 1): the sign-corrected singular sum of
        // Diag(1, 1, −1)/3 is 1/3 − the negative determinant flips the
        // smallest singular value.
        let top = support_point(&img, Vector2::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(top.value, 1.0 / 3.0, epsilon = 1e-9);
        // Zero direction: value zero, any image point.
        let zero = support_point(&img, Vector2::new(0.0, 0.0)).unwrap();
        assert_relative_eq!(zero.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn golden_finds_known_minimizers() {
        let eps = 1e-6;
        let (x, v) = golden_minimize(|a| (a - 0.3).abs(), eps);
        assert!((x - 0.3).abs() <= eps);
        assert!(v <= eps);
        let (x, _) = golden_minimize(|a| a, eps);
        assert!(x <= eps, "boundary minimum missed: {x}");
    }

    #[test]
    fn golden_respects_evaluation_budget() {
        let eps = 1e-8;
        let mut evals = 0usize;
        golden_minimize(
            |a| {
                evals += 1;
                (a - 0.77).powi(2)
            },
            eps,
        );
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let bound = ((4.0 + 2.0 * eps) / eps).ln() / phi.ln();
        assert!(
            evals <= bound.ceil() as usize + 2,
            "{evals} evaluations exceed the budget {bound:.1}+2"
        );
    }

    #[test]
    fn golden_matches_grid_scan_on_support_restriction() {
        // Restrict the separation objective to one L1 segment for a random
        // pair and compare against a dense grid.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let img = TwoDImage::new(&random_matrix(4, &mut rng), &random_matrix(4, &mut rng)).unwrap();
        let x = Vector2::new(0.4, -0.2);
        let g = |alpha: f64| {
            let y = Vector2::new(alpha, 1.0 - alpha);
            special_trace_value(&(img.a_mat() * y.x + img.b_mat() * y.y)).unwrap() - y.dot(&x)
        };
        let eps = 1e-5;
        let (_, found) = golden_minimize(g, eps);
        let grid_min = (0..=10_000)
            .map(|i| g(i as f64 / 10_000.0))
            .fold(f64::INFINITY, f64::min);
        // Either search may undercut the other by its own resolution: eps
        // for the golden search, grid spacing times the Lipschitz bound ~4
        // for the scan.
        assert!(
            (found - grid_min).abs() <= eps + 5e-4,
            "golden {found} vs grid {grid_min}"
        );
    }

    #[test]
    fn separation_worked_examples() {
        let (a, b) = worked_pair();
        let img = TwoDImage::new(&a, &b).unwrap();
        // Far outside the Hölder box: immediate axis separator.
        match weak_separation(&img, Vector2::new(2.0, 0.0), 1e-6).unwrap() {
            Separation::Hyperplane(y) => {
                assert_relative_eq!(y.x, 1.0, epsilon = 1e-12);
                assert_relative_eq!(y.y, 0.0, epsilon = 1e-12);
            }
            Separation::Inside => panic!("(2, 0) cannot be inside"),
        }
        // The origin is the image of a rotation with zero trace and zero
        // constraint value.
        assert_eq!(
            weak_separation(&img, Vector2::new(0.0, 0.0), 1e-6).unwrap(),
            Separation::Inside
        );
        // (1, 1) would force X = I, whose second coordinate is only 1/3.
        match weak_separation(&img, Vector2::new(1.0, 1.0), 1e-6).unwrap() {
            Separation::Hyperplane(y) => {
                let sup = support_point(&img, y).unwrap().value;
                assert!(
                    y.dot(&Vector2::new(1.0, 1.0)) >= sup - 1e-12,
                    "separator must dominate the support value"
                );
            }
            Separation::Inside => panic!("(1, 1) is not attainable"),
        }
    }

    #[test]
    fn separation_requires_n_at_least_three() {
        let a = eye(2);
        let img = TwoDImage::new(&a, &a).unwrap();
        assert!(matches!(
            weak_separation(&img, Vector2::new(0.0, 0.0), 1e-6),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn solve_identity_pair_pins_the_corner() {
        let a = eye(3) / 3.0;
        let sol = solve_one_constraint(&a, &a, (1.0, 1.0), 1e-4).unwrap();
        assert_relative_eq!(sol.value, 1.0, epsilon = 2e-3);
        assert_relative_eq!(sol.point.x, 1.0, epsilon = 2e-3);
        assert_relative_eq!(sol.point.y, 1.0, epsilon = 2e-3);
    }

    #[test]
    fn solve_worked_equality_instance() {
        // Pinning ⟨B, X⟩ = −1/3 forces diag (via the parity polytope) to
        // x₃ = 1, x₁ + x₂ = 0, so the best trace is 1 and the value 1/3.
        let (a, b) = worked_pair();
        let sol = solve_one_constraint(&a, &b, (-1.0 / 3.0, -1.0 / 3.0), 1e-4).unwrap();
        assert_relative_eq!(sol.value, 1.0 / 3.0, epsilon = 2e-3);
        assert_relative_eq!(sol.point.y, -1.0 / 3.0, epsilon = 2e-3);
    }

    #[test]
    fn solve_inactive_interval_reduces_to_support() {
        let (a, b) = worked_pair();
        let sol = solve_one_constraint(&a, &b, (-1.0, 1.0), 1e-4).unwrap();
        assert_relative_eq!(sol.value, 1.0, epsilon = 2e-3);
        let c = sol.certificate;
        assert!(
            c.alpha > 0.9 && c.beta.abs() < 0.1,
            "inactive constraint should certify via the objective direction, got ({}, {})",
            c.alpha,
            c.beta
        );
        assert_relative_eq!(c.alpha.abs() + c.beta.abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn solve_detects_unreachable_interval() {
        let (a, b) = worked_pair();
        match solve_one_constraint(&a, &b, (2.0, 3.0), 1e-4) {
            Err(Error::Infeasible { margin }) => assert!(margin > 0.5),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn solve_handles_segment_image() {
        // B = A collapses the image to the segment {(t, t)}: zero area, so
        // the ellipsoid's acceptance region is only the golden-search band
        // around the segment.  The interval covers the attainable values,
        // so the optimum is the unconstrained maximum.
        let a = eye(3) / 3.0;
        let sol = solve_one_constraint(&a, &a, (-1.0, 1.0), 1e-4).unwrap();
        assert_relative_eq!(sol.value, 1.0, epsilon = 2e-3);
    }

    #[test]
    fn rounding_reproduces_trivial_certificates() {
        let (a, b) = worked_pair();
        let objective_only = Certificate {
            alpha: 1.0,
            beta: 0.0,
            slack: 0.0,
        };
        let x = round_certificate(&a, &b, &objective_only).unwrap();
        assert_relative_eq!((&x - eye(3)).norm(), 0.0, epsilon = 1e-9);
        let constraint_only = Certificate {
            alpha: 0.0,
            beta: 1.0,
            slack: 0.0,
        };
        // The alignment argmax of a diagonal PSD matrix is the identity.
        let psd = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[0.5, 0.3, 0.2]));
        let x = round_certificate(&a, &psd, &constraint_only).unwrap();
        assert_relative_eq!((&x - eye(3)).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn rounding_satisfies_support_postcondition() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let a = random_matrix(4, &mut rng);
            let b = random_matrix(4, &mut rng);
            let alpha = rng.random_range(0.0..1.0);
            let cert = Certificate {
                alpha,
                beta: -(1.0 - alpha),
                slack: 0.0,
            };
            let x = round_certificate(&a, &b, &cert).unwrap();
            let img = TwoDImage::new(&a, &b).unwrap();
            let m = img.a_mat() * cert.alpha + img.b_mat() * cert.beta;
            assert_relative_eq!(
                m.dot(&x),
                special_trace_value(&m).unwrap(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn boundary_polygon_of_first_row_block_is_the_unit_circle() {
        // A = E₁₁, B = E₁₂: the image point is (X₁₁, X₁₂), a unit-norm row
        // prefix, and every point of the unit disk is attainable for n ≥ 3;
        // support points land on the circle.
        let n = 3;
        let mut a = DMatrix::zeros(n, n);
        a[(0, 0)] = 1.0;
        let mut b = DMatrix::zeros(n, n);
        b[(0, 1)] = 1.0;
        let points = image_boundary_polygon(&a, &b, 32).unwrap();
        assert_eq!(points.len(), 32);
        for p in &points {
            assert_relative_eq!(p.norm(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn boundary_polygon_single_direction_is_the_support_point() {
        let (a, b) = worked_pair();
        let img = TwoDImage::new(&a, &b).unwrap();
        let polygon = image_boundary_polygon(&a, &b, 1).unwrap();
        let eval = support_point(&img, Vector2::new(1.0, 0.0)).unwrap();
        assert_relative_eq!((polygon[0] - eval.point).norm(), 0.0, epsilon = 1e-12);
    }
}
