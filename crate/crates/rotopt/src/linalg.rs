//! Dense linear-algebra kernels: deterministic SVD, support functions of
//! `SO(n)` and `O(n)`, maximal-torus rotations, seeded random rotations, and
//! the projection onto the operator-norm ball.
//!
//! Everything here works on square `nalgebra::DMatrix<f64>` values.  The SVD
//! is the single numerical black box the rest of the crate relies on; its
//! contract (descending singular values, orthogonal factors, reconstruction
//! within [`ToleranceConfig::recon`]) is what the higher-level guarantees are
//! built from.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Error;

/// Which matrix group a membership test refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    /// Rotations: orthogonal with determinant `+1`.
    Special,
    /// All orthogonal matrices.
    Orthogonal,
}

/// A singular value decomposition `M = U Σ Vᵀ` of a square matrix, together
/// with the sign of `det(U) · det(V)`.
///
/// Invariants: `u` and `v` are orthogonal, `sigma` is nonnegative and sorted
/// in descending order, and `det_sign ∈ {-1.0, +1.0}`.  The determinant sign
/// is computed from the factors, never from the product of singular values,
/// so it stays meaningful when `M` is singular.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
    pub det_sign: f64,
}

impl SvdResult {
    /// Reconstruct `U Σ Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.sigma.len();
        let mut us = self.u.clone();
        for j in 0..n {
            us.column_mut(j).scale_mut(self.sigma[j]);
        }
        us * self.v.transpose()
    }
}

// ── Input validation ────────────────────────────────────────────────────────

/// Return the position of the first non-finite entry, if any.
fn first_non_finite(m: &DMatrix<f64>) -> Option<(usize, usize)> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if !m[(i, j)].is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}

/// Check that `m` is square with finite entries.
pub(crate) fn check_square(m: &DMatrix<f64>) -> Result<usize, Error> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "matrix must be square",
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    if let Some((row, col)) = first_non_finite(m) {
        return Err(Error::NonFinite { row, col });
    }
    Ok(m.nrows())
}

/// Frobenius inner product `⟨A, B⟩ = tr(Aᵀ B)`.
pub fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

// ── SVD ─────────────────────────────────────────────────────────────────────

/// Maximum implicit-QR sweeps allowed before declaring non-convergence.
const SVD_MAX_SWEEPS: usize = 10_000;

/// Deterministic SVD of a square matrix with descending singular values and
/// the sign of `det(U)·det(V)`.
///
/// The fast implicit-QR decomposition is verified (reconstruction and factor
/// orthogonality) before being returned; certain exactly-degenerate inputs
/// (e.g. a constant rank-one matrix) make it silently produce wrong factors,
/// in which case a slower one-sided Jacobi decomposition takes over.
pub fn svd(m: &DMatrix<f64>) -> Result<SvdResult, Error> {
    let n = check_square(m)?;
    let scale = m.norm().max(1.0);
    let fast = m
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_SWEEPS)
        .and_then(|decomp| {
            let u = decomp.u?;
            let v = decomp.v_t?.transpose();
            Some((u, decomp.singular_values, v))
        })
        .and_then(|(u, sigma, v)| {
            let trusted = orth_residual(&u) <= 1e-11 * (n as f64).sqrt()
                && orth_residual(&v) <= 1e-11 * (n as f64).sqrt()
                && sorted_descending(&sigma);
            if !trusted {
                return None;
            }
            let candidate = SvdResult {
                det_sign: factor_det_sign(&u, &v),
                u,
                sigma,
                v,
            };
            ((candidate.reconstruct() - m).norm() <= 1e-11 * scale).then_some(candidate)
        });
    match fast {
        Some(result) => Ok(result),
        None => jacobi_svd(m),
    }
}

fn sorted_descending(sigma: &DVector<f64>) -> bool {
    sigma
        .iter()
        .zip(sigma.iter().skip(1))
        .all(|(a, b)| a >= b)
        && sigma.iter().all(|&s| s >= 0.0)
}

fn factor_det_sign(u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    if u.determinant() * v.determinant() < 0.0 {
        -1.0
    } else {
        1.0
    }
}

// ── One-sided Jacobi fallback ───────────────────────────────────────────────

/// Sweeps after which the Jacobi iteration is declared non-convergent.
const JACOBI_MAX_SWEEPS: usize = 60;

/// One-sided Jacobi SVD: orthogonalize the columns of `A` by right-applied
/// plane rotations (accumulated into `V`), read the singular values off the
/// column norms, and complete `U` on the null space.  Slow but robust on the
/// degenerate inputs that defeat the implicit-QR path.
fn jacobi_svd(m: &DMatrix<f64>) -> Result<SvdResult, Error> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    // Columns this small relative to the input are numerically zero; flushing
    // them prevents endless re-rotation of exactly-parallel column pairs.
    let flush = 4.0 * f64::EPSILON * m.norm();
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut max_off = 0.0_f64;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let app: f64 = a.column(p).norm_squared();
                let aqq: f64 = a.column(q).norm_squared();
                let apq: f64 = a.column(p).dot(&a.column(q));
                let denom = (app * aqq).sqrt();
                if denom == 0.0 || apq.abs() <= f64::EPSILON * denom {
                    continue;
                }
                max_off = max_off.max(apq.abs() / denom);
                // Choose the rotation that annihilates the (p,q) entry of AᵀA.
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for row in 0..n {
                    let (x, y) = (a[(row, p)], a[(row, q)]);
                    a[(row, p)] = c * x - s * y;
                    a[(row, q)] = s * x + c * y;
                    let (x, y) = (v[(row, p)], v[(row, q)]);
                    v[(row, p)] = c * x - s * y;
                    v[(row, q)] = s * x + c * y;
                }
                for col in [p, q] {
                    if a.column(col).norm() <= flush {
                        a.column_mut(col).fill(0.0);
                    }
                }
            }
        }
        if max_off <= 4.0 * f64::EPSILON {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdFailed);
    }

    // Read off singular values and sort everything in descending order.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let sigma = DVector::from_iterator(n, order.iter().map(|&j| norms[j]));
    let v = v.select_columns(order.iter());
    let a = a.select_columns(order.iter());

    // Columns with a genuinely positive norm define U directly; the rest are
    // completed to an orthonormal basis from standard basis vectors.
    let cutoff = sigma[0].max(1.0) * 1e-300;
    let mut u = DMatrix::<f64>::zeros(n, n);
    let mut filled = 0;
    for j in 0..n {
        if sigma[j] > cutoff {
            u.set_column(j, &(a.column(j) / sigma[j]));
            filled = j + 1;
        } else {
            break;
        }
    }
    for j in filled..n {
        let mut best: Option<DVector<f64>> = None;
        let mut best_norm = 0.0;
        for k in 0..n {
            let mut cand = DVector::<f64>::zeros(n);
            cand[k] = 1.0;
            // Two rounds of Gram–Schmidt keep the completion orthogonal.
            for _ in 0..2 {
                for col in 0..j {
                    let proj = u.column(col).dot(&cand);
                    cand -= proj * DVector::from(u.column(col));
                }
            }
            let norm = cand.norm();
            if norm > best_norm {
                best_norm = norm;
                best = Some(cand);
            }
        }
        let cand = best.expect("completion candidate");
        u.set_column(j, &(cand / best_norm));
    }

    Ok(SvdResult {
        det_sign: factor_det_sign(&u, &v),
        u,
        sigma,
        v,
    })
}

// ── Support functions of O(n) and SO(n) ─────────────────────────────────────

/// Support function of `SO(n)`: `max_{X ∈ SO(n)} ⟨M, X⟩`, with a maximizer.
///
/// Writing `M = U Σ Vᵀ`, the value is `σ₁ + … + σ_{n-1} + sign(det UV) σ_n`
/// and a maximizer is `U · Diag(1, …, 1, sign(det UV)) · Vᵀ`.
pub fn special_trace(m: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>), Error> {
    let f = svd(m)?;
    let n = f.sigma.len();
    let mut value = 0.0;
    for i in 0..n - 1 {
        value += f.sigma[i];
    }
    value += f.det_sign * f.sigma[n - 1];
    let mut u = f.u;
    u.column_mut(n - 1).scale_mut(f.det_sign);
    let argmax = u * f.v.transpose();
    Ok((value, argmax))
}

/// Support value of `SO(n)` without the maximizer.
///
/// Cheaper than [`special_trace`] because the singular vectors are never
/// accumulated: the value needs only the singular values and `sign(det M)`.
pub fn special_trace_value(m: &DMatrix<f64>) -> Result<f64, Error> {
    check_square(m)?;
    let sigma = singular_values_only(m)?;
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    for &s in sigma.iter() {
        sum += s;
        if s < min {
            min = s;
        }
    }
    // det(M) = det_sign · Πσᵢ, so for nonsingular M the determinant carries
    // the sign of the smallest singular value's coefficient; for singular M
    // the correction term vanishes with σ_min.
    if m.determinant() < 0.0 {
        sum -= 2.0 * min;
    }
    Ok(sum)
}

/// Support function of `O(n)`: the trace norm `Σ σᵢ`, with maximizer `U Vᵀ`.
pub fn orth_trace_max(m: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>), Error> {
    let f = svd(m)?;
    let value = f.sigma.iter().sum();
    let argmax = f.u * f.v.transpose();
    Ok((value, argmax))
}

/// Singular values without accumulating the factors (order unspecified).
///
/// The fast route takes eigenvalues of the symmetric `MᵀM` (half the work of
/// a bidiagonal SVD) and square-roots them; the absolute error on each σ is
/// `O(√ε·σ_max)`, far below the tolerances used by callers.  Each route is
/// verified against the energy identity `Σσᵢ² = ‖M‖_F²`, which catches
/// implicit-QR failures on degenerate inputs; suspect results fall through
/// to the bidiagonal SVD and finally the Jacobi fallback.
fn singular_values_only(m: &DMatrix<f64>) -> Result<DVector<f64>, Error> {
    let frob2 = m.norm_squared();
    let energy_ok =
        |sigma: &DVector<f64>| -> bool {
            let energy: f64 = sigma.iter().map(|s| s * s).sum();
            (energy - frob2).abs() <= 1e-10 * frob2.max(1.0)
        };
    let gram_eigen = (m.transpose() * m)
        .symmetric_eigenvalues()
        .map(|lambda| lambda.max(0.0).sqrt());
    if energy_ok(&gram_eigen) {
        return Ok(gram_eigen);
    }
    let bidiagonal = m
        .clone()
        .try_svd_unordered(false, false, f64::EPSILON, SVD_MAX_SWEEPS)
        .map(|d| d.singular_values)
        .filter(|sigma| energy_ok(sigma));
    match bidiagonal {
        Some(sigma) => Ok(sigma),
        None => Ok(jacobi_svd(m)?.sigma),
    }
}

/// Trace norm (sum of singular values).
pub fn trace_norm(m: &DMatrix<f64>) -> Result<f64, Error> {
    check_square(m)?;
    Ok(singular_values_only(m)?.iter().sum())
}

/// Operator norm (largest singular value).
pub fn op_norm(m: &DMatrix<f64>) -> Result<f64, Error> {
    check_square(m)?;
    Ok(singular_values_only(m)?
        .iter()
        .fold(0.0, |a: f64, &b| a.max(b)))
}

// ── Structured rotations ────────────────────────────────────────────────────

/// Block-diagonal rotation from the maximal torus of `SO(n)`.
///
/// For each angle `θ` a 2×2 block `[[cos θ, sin θ], [−sin θ, cos θ]]` is
/// placed on the diagonal; odd `n` gets a leading `1`.  Expects
/// `angles.len() == n / 2`.
pub fn torus_matrix(n: usize, angles: &[f64]) -> Result<DMatrix<f64>, Error> {
    if angles.len() != n / 2 {
        return Err(Error::DimensionMismatch {
            context: "torus angle count must be floor(n/2)",
            expected: n / 2,
            got: angles.len(),
        });
    }
    for (k, a) in angles.iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::NonFinite { row: k, col: 0 });
        }
    }
    let mut m = DMatrix::identity(n, n);
    let offset = n % 2;
    for (k, &theta) in angles.iter().enumerate() {
        let (a, b) = (offset + 2 * k, offset + 2 * k + 1);
        let (sin, cos) = theta.sin_cos();
        m[(a, a)] = cos;
        m[(a, b)] = sin;
        m[(b, a)] = -sin;
        m[(b, b)] = cos;
    }
    Ok(m)
}

/// Haar-like random rotation, deterministic in `seed`.
///
/// Orthogonalizes a seeded Gaussian matrix by QR, fixes the signs so the
/// triangular factor has a positive diagonal, and flips the last column if
/// the determinant is negative so the result lands in `SO(n)`.
pub fn random_rotation(n: usize, seed: u64) -> DMatrix<f64> {
    assert!(n > 0, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(n - 1).neg_mut();
    }
    q
}

// ── Planar rotations ────────────────────────────────────────────────────────

/// A rotation that differs from the identity only on the coordinate pair
/// `(i, j)`: entries `c` at `(i,i)` and `(j,j)`, `s` at `(i,j)`, `−s` at
/// `(j,i)`.  Invariants: `i < j` and `c² + s² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarRotation {
    pub i: usize,
    pub j: usize,
    pub c: f64,
    pub s: f64,
}

impl PlanarRotation {
    /// Construct with validation of the index pair and unit length.
    pub fn new(i: usize, j: usize, c: f64, s: f64) -> Self {
        assert!(i < j, "plane indices must satisfy i < j");
        debug_assert!(
            (c * c + s * s - 1.0).abs() <= 1e-9,
            "rotation must have unit length"
        );
        Self { i, j, c, s }
    }

    /// The dense matrix `G` of this rotation.
    pub fn to_matrix(self, n: usize) -> DMatrix<f64> {
        let mut g = DMatrix::identity(n, n);
        g[(self.i, self.i)] = self.c;
        g[(self.i, self.j)] = self.s;
        g[(self.j, self.i)] = -self.s;
        g[(self.j, self.j)] = self.c;
        g
    }

    /// In-place conjugation `X ← Gᵀ X G`, touching only rows/columns `i, j`.
    pub fn conjugate(self, x: &mut DMatrix<f64>) {
        let (i, j, c, s) = (self.i, self.j, self.c, self.s);
        let n = x.ncols();
        for col in 0..n {
            let (a, b) = (x[(i, col)], x[(j, col)]);
            x[(i, col)] = c * a - s * b;
            x[(j, col)] = s * a + c * b;
        }
        for row in 0..n {
            let (a, b) = (x[(row, i)], x[(row, j)]);
            x[(row, i)] = c * a - s * b;
            x[(row, j)] = s * a + c * b;
        }
    }
}

// ── Projections and membership ──────────────────────────────────────────────

/// Euclidean projection onto the operator-norm unit ball: clip all singular
/// values at one.
pub fn project_op_ball(m: &DMatrix<f64>) -> Result<DMatrix<f64>, Error> {
    let f = svd(m)?;
    let n = f.sigma.len();
    let mut us = f.u;
    for j in 0..n {
        us.column_mut(j).scale_mut(f.sigma[j].min(1.0));
    }
    Ok(us * f.v.transpose())
}

/// Test membership in `O(n)` or `SO(n)` within `tol`.
///
/// Checks `‖MᵀM − I‖_F ≤ tol` and, for [`Group::Special`], `det M > 0`.
/// Non-square or non-finite input is simply not a member.
pub fn membership(m: &DMatrix<f64>, which: Group, tol: f64) -> bool {
    if m.nrows() != m.ncols() || first_non_finite(m).is_some() {
        return false;
    }
    let n = m.nrows();
    let gram = m.transpose() * m;
    let residual = (&gram - DMatrix::<f64>::identity(n, n)).norm();
    if residual > tol {
        return false;
    }
    match which {
        Group::Orthogonal => true,
        Group::Special => m.determinant() > 0.0,
    }
}

/// Orthogonality residual `‖MᵀM − I‖_F`, handy for reporting.
pub fn orth_residual(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let gram = m.transpose() * m;
    (&gram - DMatrix::<f64>::identity(n, n)).norm()
}

// ── Tests ───────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol::ToleranceConfig;
    use approx::assert_relative_eq;

    fn diag(entries: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(entries))
    }

    #[test]
    fn svd_factors_are_orthogonal_and_reconstruct() {
        let tol = ToleranceConfig::default();
        for seed in 0..20 {
            let n = 2 + (seed as usize % 7);
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let m = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let f = svd(&m).unwrap();
            assert!(orth_residual(&f.u) <= tol.orth);
            assert!(orth_residual(&f.v) <= tol.orth);
            for i in 0..n - 1 {
                assert!(f.sigma[i] >= f.sigma[i + 1], "singular values not sorted");
            }
            assert!(f.sigma[n - 1] >= 0.0);
            let err = (f.reconstruct() - &m).norm() / m.norm();
            assert!(err <= tol.recon, "reconstruction error {err}");
            assert!(f.det_sign == 1.0 || f.det_sign == -1.0);
            assert_eq!(f.det_sign, m.determinant().signum());
        }
    }

    #[test]
    fn svd_handles_degenerate_inputs() {
        for m in [
            DMatrix::<f64>::zeros(3, 3),
            DMatrix::<f64>::identity(4, 4),
            diag(&[1.0, 1.0, -1.0]),
            DMatrix::from_element(5, 5, 2.5),
        ] {
            let f = svd(&m).unwrap();
            let err = (f.reconstruct() - &m).norm();
            assert!(
                err <= 1e-9 * m.norm().max(1.0),
                "reconstruction error {err:.3e} for {m}"
            );
        }
    }

    #[test]
    fn svd_survives_rank_one_constant_matrix() {
        // The implicit-QR path mis-decomposes this input; the wrapper must
        // detect that and recover via the Jacobi fallback.
        let m = DMatrix::from_element(5, 5, 2.5);
        let f = svd(&m).unwrap();
        assert_relative_eq!(f.sigma[0], 12.5, epsilon = 1e-10);
        for j in 1..5 {
            assert!(f.sigma[j].abs() <= 1e-10);
        }
        assert!(orth_residual(&f.u) <= 1e-12);
        assert!(orth_residual(&f.v) <= 1e-12);
        assert!((f.reconstruct() - &m).norm() <= 1e-10);
        // Values-only paths must agree.
        assert_relative_eq!(trace_norm(&m).unwrap(), 12.5, epsilon = 1e-10);
        assert_relative_eq!(op_norm(&m).unwrap(), 12.5, epsilon = 1e-10);
        assert_relative_eq!(
            special_trace_value(&m).unwrap(),
            12.5,
            epsilon = 1e-10
        );
    }

    #[test]
    fn jacobi_fallback_matches_fast_path_on_generic_inputs() {
        for seed in 0..10 {
            let n = 2 + (seed as usize % 5);
            let mut rng = ChaCha8Rng::seed_from_u64(4000 + seed);
            let m = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let fast = svd(&m).unwrap();
            let slow = jacobi_svd(&m).unwrap();
            assert_relative_eq!(
                (&fast.sigma - &slow.sigma).norm(),
                0.0,
                epsilon = 1e-10
            );
            assert!((slow.reconstruct() - &m).norm() <= 1e-12 * m.norm());
            assert!(orth_residual(&slow.u) <= 1e-13);
            assert!(orth_residual(&slow.v) <= 1e-13);
            assert_eq!(fast.det_sign, slow.det_sign);
        }
    }

    #[test]
    fn jacobi_fallback_handles_rank_deficiency() {
        // Outer product: rank one with a known singular value.
        let x = DVector::from_row_slice(&[1.0, 2.0, 2.0, 0.0]);
        let y = DVector::from_row_slice(&[0.0, 3.0, 4.0, 0.0]);
        let m = &x * y.transpose();
        let f = jacobi_svd(&m).unwrap();
        assert_relative_eq!(f.sigma[0], 15.0, epsilon = 1e-12);
        assert!(f.sigma[1].abs() <= 1e-12);
        assert!((f.reconstruct() - &m).norm() <= 1e-12);
        assert!(orth_residual(&f.u) <= 1e-12);

        let zero = DMatrix::<f64>::zeros(3, 3);
        let f = jacobi_svd(&zero).unwrap();
        assert_eq!(f.sigma.as_slice(), &[0.0, 0.0, 0.0]);
        assert!(orth_residual(&f.u) <= 1e-15);
        assert!(orth_residual(&f.v) <= 1e-15);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut m = DMatrix::<f64>::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(
            svd(&m),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn special_trace_of_reflection() {
        // For Diag(1, 1, −1) the best rotation cannot pick up the reflected
        // axis, so the value is 1 + 1 − 1.
        let (value, x) = special_trace(&diag(&[1.0, 1.0, -1.0])).unwrap();
        assert_relative_eq!(value, 1.0, epsilon = 1e-12);
        assert!(membership(&x, Group::Special, 1e-9));
        assert_relative_eq!(inner(&diag(&[1.0, 1.0, -1.0]), &x), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn special_trace_of_identity() {
        let (value, x) = special_trace(&DMatrix::identity(3, 3)).unwrap();
        assert_relative_eq!(value, 3.0, epsilon = 1e-12);
        assert_relative_eq!((x - DMatrix::<f64>::identity(3, 3)).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn special_trace_value_matches_full_computation() {
        for seed in 0..30 {
            let n = 1 + (seed as usize % 6);
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            let m = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let (value, x) = special_trace(&m).unwrap();
            let fast = special_trace_value(&m).unwrap();
            assert_relative_eq!(value, fast, epsilon = 1e-10, max_relative = 1e-10);
            // The claimed maximizer actually attains the value.
            assert_relative_eq!(inner(&m, &x), value, epsilon = 1e-9, max_relative = 1e-9);
            assert!(membership(&x, Group::Special, 1e-8));
        }
    }

    #[test]
    fn orth_trace_max_attains_trace_norm() {
        let m = diag(&[1.0, 1.0, -1.0]);
        let (value, x) = orth_trace_max(&m).unwrap();
        assert_relative_eq!(value, 3.0, epsilon = 1e-12);
        assert!(membership(&x, Group::Orthogonal, 1e-9));
        assert_relative_eq!(inner(&m, &x), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn support_order_special_vs_orthogonal() {
        // str(M) ≤ ‖M‖_tr with equality iff det(UVᵀ) = +1.
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
            let m = DMatrix::from_fn(4, 4, |_, _| rng.sample::<f64, _>(StandardNormal));
            let s = special_trace_value(&m).unwrap();
            let t = trace_norm(&m).unwrap();
            assert!(s <= t + 1e-12);
        }
    }

    #[test]
    fn torus_matrix_quarter_turn() {
        let m = torus_matrix(3, &[std::f64::consts::FRAC_PI_2]).unwrap();
        let expect = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0],
        );
        assert_relative_eq!((m - expect).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn torus_matrix_half_turns_give_minus_identity() {
        let m = torus_matrix(4, &[std::f64::consts::PI, std::f64::consts::PI]).unwrap();
        assert_relative_eq!(
            (m + DMatrix::<f64>::identity(4, 4)).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn torus_matrix_is_rotation() {
        let m = torus_matrix(5, &[0.3, -1.2]).unwrap();
        assert!(membership(&m, Group::Special, 1e-12));
    }

    #[test]
    fn torus_matrix_checks_angle_count() {
        assert!(matches!(
            torus_matrix(4, &[0.1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_rotation_is_deterministic_and_special() {
        for n in [1, 2, 3, 8, 25] {
            let a = random_rotation(n, 7);
            let b = random_rotation(n, 7);
            assert_eq!(a, b);
            assert!(membership(&a, Group::Special, 1e-9));
        }
        assert_ne!(random_rotation(4, 0), random_rotation(4, 1));
    }

    #[test]
    fn project_op_ball_clips_and_fixes() {
        let m = diag(&[3.0, 0.5, -2.0]);
        let p = project_op_ball(&m).unwrap();
        let expect = diag(&[1.0, 0.5, -1.0]);
        assert_relative_eq!((p - expect).norm(), 0.0, epsilon = 1e-12);
        // Idempotent on members of the ball.
        let q = random_rotation(4, 11);
        let pq = project_op_ball(&q).unwrap();
        assert_relative_eq!((pq - &q).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn planar_rotation_conjugation_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5000);
        let x0 = DMatrix::from_fn(5, 5, |_, _| rng.sample::<f64, _>(StandardNormal));
        let theta: f64 = 0.83;
        let g = PlanarRotation::new(1, 3, theta.cos(), theta.sin());
        let mut fast = x0.clone();
        g.conjugate(&mut fast);
        let dense = g.to_matrix(5).transpose() * &x0 * g.to_matrix(5);
        assert_relative_eq!((fast - dense).norm(), 0.0, epsilon = 1e-12);
        assert!(membership(&g.to_matrix(5), Group::Special, 1e-15));
    }

    #[test]
    fn membership_distinguishes_special_from_orthogonal() {
        let reflection = diag(&[1.0, 1.0, -1.0]);
        assert!(membership(&reflection, Group::Orthogonal, 1e-12));
        assert!(!membership(&reflection, Group::Special, 1e-12));
        let rotation = torus_matrix(3, &[0.7]).unwrap();
        assert!(membership(&rotation, Group::Special, 1e-12));
        assert!(!membership(&diag(&[1.0, 0.5, 1.0]), Group::Orthogonal, 1e-6));
    }
}
