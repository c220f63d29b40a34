//! Strictly-upper-triangular (SUT) machinery: the fiber of orthogonal
//! matrices over fixed strict-upper entries, its two-valued diagonals, exact
//! optimization of diagonal objectives over that fiber, and the reduction of
//! rank-one constraints to SUT form.
//!
//! For `σ` in the interior of the SUT image of the operator-norm ball, the
//! fiber `π_T⁻¹(σ) ∩ O(n)` has exactly `2ⁿ` elements `X_ρ(σ)`, one per sign
//! pattern `ρ ∈ {±1}ⁿ`.  The matrix is assembled from the bottom-right
//! corner: the trailing `k×k` block must have Gram matrix `Gᵏ`, where
//! `G⁰ = I` and `Gᵏ⁺¹ = (Gᵏ)₂₂ − xₖxₖᵀ` peels off the SUT row `xₖ`, and at
//! each step exactly two leading columns complete the block — differing
//! only in the diagonal entry, the larger taken when `ρᵢ = +1`.  Maintaining
//! the required inverses by rank-one updates makes the whole construction
//! `O(n³)`.  Consequences implemented here: `det X_ρ(σ) = Πρᵢ`, each
//! diagonal entry takes one of two values `αᵢ < βᵢ` independent of the other
//! signs, and a diagonal objective therefore optimizes over the fiber as a
//! separable sign problem — exactly over `O(n)`, and over `SO(n)` with at
//! most one sign flipped, which yields a `(1 − 1/n)`-approximation guarantee
//! relative to the operator-norm-ball relaxation.

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::linalg::{inner, project_op_ball};

/// Discriminants and Schur quantities below this (relative) size are treated
/// as boundary cases and rejected: the two column completions collide there.
const INTERIOR_TOL: f64 = 1e-10;

// ── Domain types ─────────────────────────────────────────────────────────────

/// Strict-upper-triangular entries in row-major order:
/// `(0,1), (0,2), …, (0,n−1), (1,2), …, (n−2,n−1)` (zero-based).
#[derive(Debug, Clone, PartialEq)]
pub struct SutVector {
    n: usize,
    values: Vec<f64>,
}

impl SutVector {
    /// Wrap a value list of length `n(n−1)/2`; entries must be finite.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self, Error> {
        assert!(n >= 1, "dimension must be positive");
        if values.len() != n * (n - 1) / 2 {
            return Err(Error::DimensionMismatch {
                context: "SUT vector length must be n(n−1)/2",
                expected: n * (n - 1) / 2,
                got: values.len(),
            });
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: idx, col: 0 });
        }
        Ok(SutVector { n, values })
    }

    /// The all-zero vector, whose fiber is the diagonal sign matrices.
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "dimension must be positive");
        SutVector {
            n,
            values: vec![0.0; n * (n - 1) / 2],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn offset(&self, i: usize) -> usize {
        i * (2 * self.n - i - 1) / 2
    }

    /// Entry at strictly-upper position `(i, j)`, `i < j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < j && j < self.n, "position must be strictly upper");
        self.values[self.offset(i) + (j - i - 1)]
    }

    /// The entries of row `i`: positions `(i, i+1), …, (i, n−1)`.
    pub fn row(&self, i: usize) -> &[f64] {
        assert!(i < self.n, "row out of range");
        &self.values[self.offset(i)..self.offset(i) + (self.n - 1 - i)]
    }

    /// Entry-wise scaling, used to pull boundary points into the interior.
    pub fn scaled(&self, factor: f64) -> SutVector {
        SutVector {
            n: self.n,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Read the strict-upper entries of a square matrix in canonical order.
pub fn project_sut(x: &DMatrix<f64>) -> SutVector {
    assert!(x.is_square(), "projection is defined for square matrices");
    let n = x.nrows();
    let mut values = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            values.push(x[(i, j)]);
        }
    }
    SutVector { n, values }
}

/// A sign per diagonal entry, selecting one fiber element `X_ρ(σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignPattern {
    rho: Vec<f64>,
}

impl SignPattern {
    /// Wrap a vector of exact `±1.0` entries.
    pub fn new(rho: Vec<f64>) -> Self {
        assert!(!rho.is_empty(), "sign pattern must be nonempty");
        assert!(
            rho.iter().all(|&s| s == 1.0 || s == -1.0),
            "sign entries must be exactly ±1"
        );
        SignPattern { rho }
    }

    pub fn all_plus(n: usize) -> Self {
        SignPattern::new(vec![1.0; n])
    }

    pub fn all_minus(n: usize) -> Self {
        SignPattern::new(vec![-1.0; n])
    }

    /// Greedy pattern for maximizing `Σ aᵢ·X_{i,i}`: `+1` wherever
    /// `aᵢ ≥ 0`.  Zero entries break toward `+1`, matching a vanishing
    /// positive perturbation of the objective.
    pub fn from_objective(a: &DVector<f64>) -> Self {
        SignPattern::new(a.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect())
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.rho[i]
    }

    /// `Πᵢ ρᵢ`, the determinant of the selected fiber element.
    pub fn parity(&self) -> f64 {
        self.rho.iter().product()
    }

    /// Copy with the sign at `i` negated.
    pub fn flipped(&self, i: usize) -> Self {
        let mut rho = self.rho.clone();
        rho[i] = -rho[i];
        SignPattern { rho }
    }
}

/// The two per-coordinate diagonal values over the fiber:
/// `X_ρ(σ)_{i,i} = βᵢ` when `ρᵢ = +1` and `αᵢ` when `ρᵢ = −1`.
#[derive(Debug, Clone)]
pub struct DiagBounds {
    pub alpha: DVector<f64>,
    pub beta: DVector<f64>,
}

// ── Column completion ────────────────────────────────────────────────────────

/// Complete `u_tilde ∈ ℝ^{n×(n−1)}` to `[u | u_tilde]` with Gram matrix
/// `gram`: returns the exactly two solutions `(u_plus, u_minus)`, ordered by
/// their first coordinate (`u_plus` larger).
///
/// Requires `u_tildeᵀ·u_tilde = gram₂₂` (the trailing block of `gram`), the
/// bottom `(n−1)×(n−1)` block of `u_tilde` invertible, and `gram` positive
/// definite; `gram22_inv` is the inverse of `gram₂₂`, so each call is
/// `O(n²)`.  The solutions are `u₀ + t·z` where `u₀` is the minimum-norm
/// particular solution of `u_tildeᵀu = gram₂₁` and `z` spans
/// `ker(u_tildeᵀ)`; `t` solves a quadratic whose discriminant is positive
/// exactly when the Schur complement of `gram` is.
pub fn complete_first_column(
    u_tilde: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    gram22_inv: &DMatrix<f64>,
) -> Result<(DVector<f64>, DVector<f64>), Error> {
    let n = u_tilde.nrows();
    if u_tilde.ncols() != n - 1 {
        return Err(Error::DimensionMismatch {
            context: "completion input must be n×(n−1)",
            expected: n - 1,
            got: u_tilde.ncols(),
        });
    }
    if gram.nrows() != n || gram.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "Gram matrix must be n×n",
            expected: n,
            got: gram.nrows().max(gram.ncols()),
        });
    }
    // û = first row of u_tilde, Û = its bottom (n−1)×(n−1) block.
    let u_hat = u_tilde.row(0).transpose();
    let cap_u = u_tilde.view((1, 0), (n - 1, n - 1));
    // (gram₂₂ − ûûᵀ)⁻¹ = (ÛᵀÛ)⁻¹ by one rank-one update of gram22_inv.
    let h_u = gram22_inv * &u_hat;
    let d = 1.0 - u_hat.dot(&h_u);
    if d <= INTERIOR_TOL {
        return Err(Error::SingularBlock {
            context: "trailing block of the completion input is singular",
        });
    }
    let utu_inv = gram22_inv + (&h_u * h_u.transpose()) / d;
    // Kernel direction z = (1, −Û(ÛᵀÛ)⁻¹û) and particular solution
    // u₀ = u_tilde·gram₂₂⁻¹·gram₂₁.
    let mut z = DVector::zeros(n);
    z[0] = 1.0;
    z.rows_mut(1, n - 1).copy_from(&(-(cap_u * (&utu_inv * &u_hat))));
    let gram21 = DVector::from_fn(n - 1, |r, _| gram[(r + 1, 0)]);
    let u0 = u_tilde * (gram22_inv * &gram21);

    let zz = z.norm_squared();
    let uz = u0.dot(&z);
    let uu = u0.norm_squared();
    let disc = uz * uz - zz * (uu - gram[(0, 0)]);
    if disc <= INTERIOR_TOL * zz * gram[(0, 0)].max(1.0) {
        return Err(Error::NotInterior { margin: disc });
    }
    let root = disc.sqrt();
    let t_plus = (-uz + root) / zz;
    let t_minus = (-uz - root) / zz;
    Ok((&u0 + &z * t_plus, u0 + z * t_minus))
}

// ── Fiber construction ───────────────────────────────────────────────────────

/// Shared first pass of the fiber construction for one `σ`: the chain of
/// reduced Gram matrices together with the inverses each column completion
/// needs.  Building one fiber element from a prepared plan costs `O(n³)`
/// with no further inversions, so enumerations over sign patterns reuse it.
struct Plan {
    n: usize,
    /// `σ` row per level (empty at the last level).
    rows: Vec<DVector<f64>>,
    /// Leading diagonal entry of each level's Gram (all `n` levels).
    head: Vec<f64>,
    /// Leading column tail of each level's Gram.
    sub: Vec<DVector<f64>>,
    /// Inverse of the trailing block of each level's Gram.
    trail_inv: Vec<DMatrix<f64>>,
    /// Inverse of the next level's Gram `(Gᵏ)₂₂ − xₖxₖᵀ`.
    next_inv: Vec<DMatrix<f64>>,
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

impl Plan {
    /// Run the Gram recursion, certifying interiority level by level: a
    /// failing Schur quantity means `σ` is not in the interior of the SUT
    /// image of the operator-norm ball.
    fn new(sigma: &SutVector) -> Result<Plan, Error> {
        let n = sigma.n();
        let mut rows = Vec::with_capacity(n.saturating_sub(1));
        let mut head = Vec::with_capacity(n);
        let mut sub = Vec::with_capacity(n.saturating_sub(1));
        let mut trail_inv = Vec::with_capacity(n.saturating_sub(1));
        let mut next_inv = Vec::with_capacity(n.saturating_sub(1));

        let mut gram = DMatrix::<f64>::identity(n, n);
        let mut h2 = DMatrix::<f64>::identity(n - 1, n - 1);
        for i in 0..n - 1 {
            let k = n - i;
            head.push(gram[(0, 0)]);
            sub.push(DVector::from_fn(k - 1, |r, _| gram[(r + 1, 0)]));
            trail_inv.push(h2.clone());
            let x = DVector::from_row_slice(sigma.row(i));
            // (G₂₂ − xxᵀ)⁻¹ by Sherman–Morrison; the denominator is the
            // determinant ratio, so nonpositive means σ has left the ball.
            let hx = &h2 * &x;
            let d = 1.0 - x.dot(&hx);
            if d <= INTERIOR_TOL {
                return Err(Error::NotInterior { margin: d });
            }
            let mut ninv = &h2 + (&hx * hx.transpose()) / d;
            symmetrize(&mut ninv);
            // Next level's Gram and the inverse of ITS trailing block, read
            // off ninv by the block-inverse identity C⁻¹ = R − qqᵀ/p.
            let mut gram_next = gram.view((1, 1), (k - 1, k - 1)).into_owned();
            gram_next -= &x * x.transpose();
            if k >= 3 {
                let p = ninv[(0, 0)];
                if p <= INTERIOR_TOL {
                    return Err(Error::NotInterior { margin: p });
                }
                let q = DVector::from_fn(k - 2, |r, _| ninv[(r + 1, 0)]);
                let mut h2_next = ninv.view((1, 1), (k - 2, k - 2)).into_owned();
                h2_next -= (&q * q.transpose()) / p;
                symmetrize(&mut h2_next);
                h2 = h2_next;
            } else {
                h2 = DMatrix::zeros(0, 0);
            }
            next_inv.push(ninv);
            gram = gram_next;
            rows.push(x);
        }
        head.push(gram[(0, 0)]);
        Ok(Plan {
            n,
            rows,
            head,
            sub,
            trail_inv,
            next_inv,
        })
    }

    /// Assemble `X_ρ(σ)` bottom-up: seed the 1×1 corner, then prepend one
    /// row (from `σ`) and one completed column per level, taking the root
    /// with the larger diagonal entry iff `ρᵢ = +1`.
    fn build(&self, rho: &SignPattern) -> Result<DMatrix<f64>, Error> {
        let n = self.n;
        assert_eq!(rho.len(), n, "sign pattern length must match σ");
        let mut x = DMatrix::<f64>::zeros(n, n);
        let base = self.head[n - 1];
        if base <= INTERIOR_TOL {
            return Err(Error::NotInterior { margin: base });
        }
        x[(n - 1, n - 1)] = rho.get(n - 1) * base.sqrt();
        for i in (0..n - 1).rev() {
            let k = n - i;
            let row = &self.rows[i];
            let block = x.view((i + 1, i + 1), (k - 1, k - 1));
            // Particular solution u₀ = Ũ·(A₂₂⁻¹A₂₁) with Ũ = [rowᵀ; block].
            let w = &self.trail_inv[i] * &self.sub[i];
            let mut u0 = DVector::zeros(k);
            u0[0] = row.dot(&w);
            u0.rows_mut(1, k - 1).copy_from(&(block * &w));
            // Kernel direction z = (1, −block·(next Gram)⁻¹·row): the next
            // Gram equals blockᵀblock, so this is −Û(ÛᵀÛ)⁻¹û.
            let t = &self.next_inv[i] * row;
            let mut z = DVector::zeros(k);
            z[0] = 1.0;
            z.rows_mut(1, k - 1).copy_from(&(-(block * &t)));

            let zz = z.norm_squared();
            let uz = u0.dot(&z);
            let uu = u0.norm_squared();
            let disc = uz * uz - zz * (uu - self.head[i]);
            if disc <= INTERIOR_TOL * zz * self.head[i].max(1.0) {
                return Err(Error::NotInterior { margin: disc });
            }
            // z₁ = 1, so the diagonal entry is increasing in the root.
            let s = (-uz + rho.get(i) * disc.sqrt()) / zz;
            for r in 0..k {
                x[(i + r, i)] = u0[r] + s * z[r];
            }
            for (c, &v) in row.iter().enumerate() {
                x[(i, i + 1 + c)] = v;
            }
        }
        Ok(x)
    }
}

/// Construct the fiber element `X_ρ(σ) ∈ O(n)`: the unique orthogonal
/// matrix with strict-upper entries `σ` whose diagonal entry `(i,i)` takes
/// the larger of its two possible values exactly when `ρᵢ = +1`.  Its
/// determinant is `Πρᵢ`.  Fails with [`Error::NotInterior`] when `σ` is not
/// strictly inside the SUT image of the operator-norm ball.  Runs in
/// `O(n³)`.
pub fn construct_x_rho(sigma: &SutVector, rho: &SignPattern) -> Result<DMatrix<f64>, Error> {
    Plan::new(sigma)?.build(rho)
}

/// The per-coordinate diagonal values `αᵢ < βᵢ` attained over the fiber of
/// `σ`: `alpha` from the all-minus pattern, `beta` from the all-plus one.
pub fn diag_bounds(sigma: &SutVector) -> Result<DiagBounds, Error> {
    let plan = Plan::new(sigma)?;
    let lo = plan.build(&SignPattern::all_minus(sigma.n()))?;
    let hi = plan.build(&SignPattern::all_plus(sigma.n()))?;
    let alpha = lo.diagonal();
    let beta = hi.diagonal();
    for i in 0..sigma.n() {
        if beta[i] - alpha[i] <= 0.0 {
            return Err(Error::NotInterior {
                margin: beta[i] - alpha[i],
            });
        }
    }
    Ok(DiagBounds { alpha, beta })
}

/// All `2ⁿ` fiber elements over `σ`, indexed by sign pattern (bit `i` of
/// the list position set means `ρᵢ = +1`).  Capped at `n ≤ 12` — the output
/// is exponential.
pub fn fiber_enumerate(sigma: &SutVector) -> Result<Vec<DMatrix<f64>>, Error> {
    const LIMIT: usize = 12;
    let n = sigma.n();
    if n > LIMIT {
        return Err(Error::DimensionTooLarge { n, limit: LIMIT });
    }
    let plan = Plan::new(sigma)?;
    let mut fiber = Vec::with_capacity(1 << n);
    for mask in 0..1usize << n {
        let rho = SignPattern::new(
            (0..n)
                .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                .collect(),
        );
        fiber.push(plan.build(&rho)?);
    }
    Ok(fiber)
}

// ── Diagonal objectives over the fiber ───────────────────────────────────────

/// Maximize `Σᵢ aᵢ·X_{i,i}` over `X ∈ O(n)` with `π_T(X) = σ`: the diagonal
/// entries decouple, so the greedy pattern `ρᵢ = sign(aᵢ)` is exact.  The
/// value also equals the operator-norm-ball relaxation of the same problem,
/// so it doubles as the relaxation value.
pub fn sut_opt_orth(sigma: &SutVector, a_diag: &DVector<f64>) -> Result<(DMatrix<f64>, f64), Error> {
    assert_eq!(a_diag.len(), sigma.n(), "objective length must match σ");
    let x = construct_x_rho(sigma, &SignPattern::from_objective(a_diag))?;
    let value = a_diag.dot(&x.diagonal());
    Ok((x, value))
}

/// Result of [`sut_opt_special`]: the exact `SO(n)` optimum for the fixed
/// SUT entries, and its gap below the (orthogonal = ball) relaxation.
#[derive(Debug, Clone)]
pub struct SpecialSutOpt {
    pub x: DMatrix<f64>,
    pub value: f64,
    /// Relaxation value minus `value`; zero when the greedy pattern already
    /// has positive parity.  The value is guaranteed at least
    /// `(1 − 1/n)·relax + (1/n)·min_relax`.
    pub gap_bound: f64,
}

/// Maximize `Σᵢ aᵢ·X_{i,i}` over `X ∈ SO(n)` with `π_T(X) = σ`, exactly:
/// the fiber restricted to `SO(n)` is the positive-parity sign patterns, so
/// the optimum is the greedy pattern, with its cheapest coordinate flipped
/// when the greedy parity is negative (cost `|aᵢ|·(βᵢ − αᵢ)` for
/// coordinate `i`).
pub fn sut_opt_special(sigma: &SutVector, a_diag: &DVector<f64>) -> Result<SpecialSutOpt, Error> {
    assert_eq!(a_diag.len(), sigma.n(), "objective length must match σ");
    let plan = Plan::new(sigma)?;
    let greedy = SignPattern::from_objective(a_diag);
    let relax_x = plan.build(&greedy)?;
    let relax = a_diag.dot(&relax_x.diagonal());
    if greedy.parity() > 0.0 {
        return Ok(SpecialSutOpt {
            x: relax_x,
            value: relax,
            gap_bound: 0.0,
        });
    }
    let lo = plan.build(&SignPattern::all_minus(sigma.n()))?.diagonal();
    let hi = plan.build(&SignPattern::all_plus(sigma.n()))?.diagonal();
    let cheapest = (0..sigma.n())
        .min_by(|&i, &j| {
            let ci = a_diag[i].abs() * (hi[i] - lo[i]);
            let cj = a_diag[j].abs() * (hi[j] - lo[j]);
            ci.total_cmp(&cj)
        })
        .expect("nonempty diagonal");
    let x = plan.build(&greedy.flipped(cheapest))?;
    let value = a_diag.dot(&x.diagonal());
    Ok(SpecialSutOpt {
        x,
        value,
        gap_bound: relax - value,
    })
}

// ── Rank-one constraint reduction ────────────────────────────────────────────

/// Full Householder QR with a positive-diagonal triangular factor: returns
/// `q_t` (`n×n` orthogonal) and upper-triangular `r = q_t · [cols]`.
fn positive_qr(cols: &[DVector<f64>], n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = cols.len();
    let mut r = DMatrix::zeros(n, m);
    for (j, c) in cols.iter().enumerate() {
        r.column_mut(j).copy_from(c);
    }
    let mut q_t = DMatrix::<f64>::identity(n, n);
    for j in 0..m.min(n - 1) {
        let tail = r.view((j, j), (n - j, 1)).norm();
        if tail <= 1e-300 {
            continue;
        }
        let mut v = r.view((j, j), (n - j, 1)).into_owned();
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * tail;
        let vv = v.norm_squared();
        if vv <= 1e-300 {
            continue;
        }
        // Apply the reflector I − 2vvᵀ/‖v‖² to the working rows.
        let w = (v.transpose() * r.view((j, 0), (n - j, m))) * (2.0 / vv);
        let mut rw = r.view_mut((j, 0), (n - j, m));
        rw.gemm(-1.0, &v, &w, 1.0);
        let wq = (v.transpose() * q_t.view((j, 0), (n - j, n))) * (2.0 / vv);
        let mut qw = q_t.view_mut((j, 0), (n - j, n));
        qw.gemm(-1.0, &v, &wq, 1.0);
        if r[(j, j)] < 0.0 {
            r.row_mut(j).neg_mut();
            q_t.row_mut(j).neg_mut();
        }
    }
    (q_t, r)
}

/// Flip the last row when the determinant is negative.  The last row is
/// unconstrained by the triangular support patterns whenever fewer than `n`
/// vectors were reduced, so this lands the factor in `SO(n)` for free.
fn fix_det(mut q_t: DMatrix<f64>) -> DMatrix<f64> {
    if q_t.determinant() < 0.0 {
        let n = q_t.nrows();
        q_t.row_mut(n - 1).neg_mut();
    }
    q_t
}

/// Rotate up to `n − 1` vector pairs into nested-support position: returns
/// `(U, V) ∈ SO(n)²` with `supp(U·uᵢ) ⊆ {1,…,i}` and
/// `supp(V·vᵢ) ⊆ {i+1,…,n}` (one-based).  Each functional
/// `⟨(Uuᵢ)(Vvᵢ)ᵀ, Y⟩` then touches only strict-upper entries of `Y`, and
/// `⟨uᵢvᵢᵀ, X⟩ = ⟨(Uuᵢ)(Vvᵢ)ᵀ, UXVᵀ⟩` turns rank-one constraints on `X`
/// into SUT constraints on `Y = UXVᵀ`.
pub fn reduce_low_rank(
    us: &[DVector<f64>],
    vs: &[DVector<f64>],
) -> Result<(DMatrix<f64>, DMatrix<f64>), Error> {
    assert_eq!(us.len(), vs.len(), "vector lists must pair up");
    assert!(!us.is_empty(), "at least one pair is required");
    let n = us[0].len();
    assert!(
        us.iter().chain(vs.iter()).all(|v| v.len() == n),
        "all vectors must share one dimension"
    );
    let m = us.len();
    if m > n - 1 {
        return Err(Error::TooManyVectors {
            got: m,
            limit: n - 1,
        });
    }
    // U from QR of [u₁ … u_m]: column i combines the first i basis rows.
    let u_rot = fix_det(positive_qr(us, n).0);
    // V needs supports growing from the bottom: QR the reversed list, then
    // reverse the rows, so vᵢ lands in the first m−i+1 coordinates before
    // the flip and the last m−i+1 after it — inside {i+1,…,n} since m < n.
    let reversed: Vec<DVector<f64>> = vs.iter().rev().cloned().collect();
    let q_t = fix_det(positive_qr(&reversed, n).0);
    let mut v_rot = DMatrix::zeros(n, n);
    for r in 0..n {
        v_rot.row_mut(r).copy_from(&q_t.row(n - 1 - r));
    }
    if v_rot.determinant() < 0.0 {
        // The reversal may flip orientation; the first row of v_rot is the
        // last row of q_t, free for the same reason as in fix_det.
        v_rot.row_mut(0).neg_mut();
    }
    // The support pattern is a theorem for independent inputs; verify it and
    // surface degeneracy instead of returning a silently broken reduction.
    let mut residual = 0.0_f64;
    for (i, (u, v)) in us.iter().zip(vs.iter()).enumerate() {
        let tu = &u_rot * u;
        for r in i + 1..n {
            residual = residual.max(tu[r].abs() / u.norm().max(1e-300));
        }
        let tv = &v_rot * v;
        for r in 0..=i {
            residual = residual.max(tv[r].abs() / v.norm().max(1e-300));
        }
    }
    if residual > 1e-9 {
        return Err(Error::RankDeficient { residual });
    }
    Ok((u_rot, v_rot))
}

/// One linear equality `⟨u·vᵀ, X⟩ = target`, i.e. `uᵀXv = target`.
#[derive(Debug, Clone)]
pub struct RankOneConstraint {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub target: f64,
}

impl RankOneConstraint {
    pub fn new(u: DVector<f64>, v: DVector<f64>, target: f64) -> Result<Self, Error> {
        for (idx, val) in u.iter().chain(v.iter()).enumerate() {
            if !val.is_finite() {
                return Err(Error::NonFinite { row: idx, col: 0 });
            }
        }
        if !target.is_finite() {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        if u.norm() == 0.0 || v.norm() == 0.0 {
            return Err(Error::SingularBlock {
                context: "constraint vectors must be nonzero",
            });
        }
        Ok(RankOneConstraint { u, v, target })
    }
}

/// `uvᵀ` is already strictly upper triangular when every nonzero of `u`
/// sits strictly above every nonzero of `v`.
fn already_sut(u: &DVector<f64>, v: &DVector<f64>) -> bool {
    let last_u = (0..u.len()).rev().find(|&i| u[i] != 0.0);
    let first_v = (0..v.len()).find(|&i| v[i] != 0.0);
    match (last_u, first_v) {
        (Some(a), Some(b)) => a < b,
        _ => true,
    }
}

/// Find `X ∈ SO(n)` satisfying all rank-one equalities `uᵢᵀXvᵢ = tᵢ`
/// within `eps·‖uᵢ‖‖vᵢ‖·(1 + |tᵢ|)`-sized error, or report failure.
///
/// The constraints are rotated into SUT position (skipped when they already
/// are SUT, which lifts the `n − 1` count limit), a point of the
/// operator-norm ball meeting the equalities is found by Dykstra's
/// alternating projections, its SUT entries are shrunk by `1 − eps` to
/// force interiority, and the fiber construction lifts the result to
/// `SO(n)` exactly.  Fails with [`Error::NotFound`] when the projections
/// stall at a positive residual (empty or too-thin feasible set) or the
/// iteration cap is hit.
pub fn feasibility_low_rank(
    constraints: &[RankOneConstraint],
    eps: f64,
) -> Result<DMatrix<f64>, Error> {
    assert!(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    assert!(!constraints.is_empty(), "at least one constraint is required");
    let n = constraints[0].u.len();
    assert!(
        constraints
            .iter()
            .all(|c| c.u.len() == n && c.v.len() == n),
        "all constraints must share one dimension"
    );
    let m = constraints.len();

    let (u_rot, v_rot) = if constraints.iter().all(|c| already_sut(&c.u, &c.v)) {
        (DMatrix::identity(n, n), DMatrix::identity(n, n))
    } else {
        if m > n - 1 {
            return Err(Error::TooManyVectors {
                got: m,
                limit: n - 1,
            });
        }
        let us: Vec<DVector<f64>> = constraints.iter().map(|c| c.u.clone()).collect();
        let vs: Vec<DVector<f64>> = constraints.iter().map(|c| c.v.clone()).collect();
        reduce_low_rank(&us, &vs)?
    };

    // SUT-supported functionals on Y = U X Vᵀ and their Gram matrix.
    let mats: Vec<DMatrix<f64>> = constraints
        .iter()
        .map(|c| (&u_rot * &c.u) * (&v_rot * &c.v).transpose())
        .collect();
    let targets: Vec<f64> = constraints.iter().map(|c| c.target).collect();
    let mut gram = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = inner(&mats[i], &mats[j]);
        }
    }
    let chol = gram
        .clone()
        .cholesky()
        .ok_or(Error::SingularBlock {
            context: "constraint functionals are linearly dependent",
        })?;
    let project_affine = |y: &DMatrix<f64>| -> DMatrix<f64> {
        let mut rhs = DVector::zeros(m);
        for i in 0..m {
            rhs[i] = inner(&mats[i], y) - targets[i];
        }
        let lambda = chol.solve(&rhs);
        let mut out = y.clone();
        for i in 0..m {
            out -= &mats[i] * lambda[i];
        }
        out
    };

    // Dykstra's algorithm between the affine set and the operator-norm
    // ball.  The ball projection is applied last, so iterates are always
    // feasible for the ball and the residual measures only the equalities.
    const CAP: usize = 100_000;
    let mut y = DMatrix::<f64>::zeros(n, n);
    let mut p = DMatrix::<f64>::zeros(n, n);
    let mut q = DMatrix::<f64>::zeros(n, n);
    let mut converged = false;
    for _ in 0..CAP {
        let ya = project_affine(&(&y + &p));
        p = &y + &p - &ya;
        let yb = project_op_ball(&(&ya + &q))?;
        q = &ya + &q - &yb;
        let shift = (&yb - &y).amax();
        y = yb;
        if shift <= eps * 0.1 {
            converged = true;
            break;
        }
    }
    let scaled_residual = (0..m)
        .map(|i| (inner(&mats[i], &y) - targets[i]).abs() / mats[i].norm().max(1e-300))
        .fold(0.0_f64, f64::max);
    if !converged || scaled_residual > eps {
        return Err(Error::NotFound {
            residual: scaled_residual,
        });
    }

    // Shrink into the interior and lift to SO(n); the functionals depend on
    // Y only through its SUT entries, so the lift preserves them exactly up
    // to the shrink.
    let sigma = project_sut(&y).scaled(1.0 - eps);
    let y_star = construct_x_rho(&sigma, &SignPattern::all_plus(n))?;
    Ok(u_rot.transpose() * y_star * v_rot)
}
