//! The parity polytope: the convex hull of the sign vectors with an even
//! number of `−1` entries.
//!
//! This is exactly the set of diagonals of rotation matrices' closest
//! sign-vector relaxation and admits a compact facet description: the box
//! `[−1, 1]ⁿ` together with one inequality `⟨x, 1 − 2·1_S⟩ ≤ n − 2` per
//! odd-cardinality index set `S`.  Despite the exponential facet count,
//! membership, separation, and linear optimization are all `O(n log n)`:
//! the most binding odd-set inequality only depends on sorted order.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;

/// A violated facet of the parity polytope, reported by [`pp_separate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PpCut {
    /// Box facet `sign · x[index] ≤ 1` (sign is `+1` or `−1`).
    Box { index: usize, positive: bool },
    /// Odd-set facet `⟨x, 1 − 2·1_flips⟩ ≤ n − 2`; `flips` has odd length.
    Parity { flips: Vec<usize> },
}

impl PpCut {
    /// Outward normal `a` of the inequality `⟨a, x⟩ ≤ rhs`.
    pub fn normal(&self, n: usize) -> DVector<f64> {
        match self {
            PpCut::Box { index, positive } => {
                let mut a = DVector::zeros(n);
                a[*index] = if *positive { 1.0 } else { -1.0 };
                a
            }
            PpCut::Parity { flips } => {
                let mut a = DVector::from_element(n, 1.0);
                for &i in flips {
                    a[i] = -1.0;
                }
                a
            }
        }
    }

    /// Right-hand side of the inequality `⟨a, x⟩ ≤ rhs`.
    pub fn rhs(&self, n: usize) -> f64 {
        match self {
            PpCut::Box { .. } => 1.0,
            PpCut::Parity { .. } => n as f64 - 2.0,
        }
    }

    /// Signed violation `⟨a, x⟩ − rhs` at a point (positive means violated).
    pub fn violation(&self, x: &DVector<f64>) -> f64 {
        self.normal(x.len()).dot(x) - self.rhs(x.len())
    }
}

fn check_vector(x: &DVector<f64>) -> Result<(), Error> {
    if x.is_empty() {
        return Err(Error::DimensionMismatch {
            context: "vector must be nonempty",
            expected: 1,
            got: 0,
        });
    }
    for (i, v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
    }
    Ok(())
}

/// The smallest value of `⟨x, 1_S⟩` over odd-cardinality sets `S`, along with
/// the minimizing set.  Equivalently: the most binding odd-set facet.
fn min_odd_prefix(x: &DVector<f64>) -> (f64, Vec<usize>) {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[i].partial_cmp(&x[j]).unwrap());
    let mut best_sum = f64::INFINITY;
    let mut best_k = 0;
    let mut running = 0.0;
    for (idx, &i) in order.iter().enumerate() {
        running += x[i];
        let card = idx + 1;
        if card % 2 == 1 && running < best_sum {
            best_sum = running;
            best_k = card;
        }
    }
    (best_sum, order[..best_k].to_vec())
}

/// Membership test: is `x` in the parity polytope, within `tol`?
///
/// Checks the box `[−1, 1]ⁿ` and the most binding odd-set facet, which for
/// sorted `x` is an odd-length prefix of the smallest entries.
pub fn pp_contains(x: &DVector<f64>, tol: f64) -> bool {
    if check_vector(x).is_err() {
        return false;
    }
    if x.iter().any(|v| v.abs() > 1.0 + tol) {
        return false;
    }
    let total: f64 = x.sum();
    let threshold = 0.5 * (total - (x.len() as f64 - 2.0));
    let (min_prefix, _) = min_odd_prefix(x);
    min_prefix >= threshold - tol
}

/// Exact separation: a most-violated facet, or `None` when `x` is a member.
///
/// Box facets are preferred whenever one is violated; otherwise the odd-set
/// facet built from the smallest entries is the most violated one.
pub fn pp_separate(x: &DVector<f64>) -> Result<Option<PpCut>, Error> {
    check_vector(x)?;
    let n = x.len();
    let mut best_box: Option<(f64, PpCut)> = None;
    for i in 0..n {
        let violation = x[i].abs() - 1.0;
        if violation > 0.0 && best_box.as_ref().is_none_or(|(v, _)| violation > *v) {
            best_box = Some((
                violation,
                PpCut::Box {
                    index: i,
                    positive: x[i] > 0.0,
                },
            ));
        }
    }
    if let Some((_, cut)) = best_box {
        return Ok(Some(cut));
    }
    let total: f64 = x.sum();
    let (min_prefix, flips) = min_odd_prefix(x);
    // ⟨x, 1 − 2·1_S⟩ ≤ n − 2 rearranges to ⟨x, 1_S⟩ ≥ (total − (n − 2)) / 2.
    let violation = total - 2.0 * min_prefix - (n as f64 - 2.0);
    if violation > 0.0 {
        Ok(Some(PpCut::Parity { flips }))
    } else {
        Ok(None)
    }
}

/// Maximize `⟨w, x⟩` over the parity polytope; returns the value and a vertex
/// maximizer.
///
/// The unconstrained sign vector is optimal when its `−1` count is even;
/// otherwise flipping the entry of smallest magnitude (lowest index on ties)
/// costs the least.
pub fn pp_maximize(w: &DVector<f64>) -> Result<(f64, DVector<f64>), Error> {
    check_vector(w)?;
    let n = w.len();
    let mut x = DVector::from_fn(n, |i, _| if w[i] < 0.0 { -1.0 } else { 1.0 });
    let negatives = x.iter().filter(|&&v| v < 0.0).count();
    if negatives % 2 == 1 {
        let mut flip = 0;
        for i in 1..n {
            if w[i].abs() < w[flip].abs() {
                flip = i;
            }
        }
        x[flip] = -x[flip];
    }
    Ok((w.dot(&x), x))
}

/// Deterministic interior-ish sample: a convex combination of `2n` random
/// even-parity sign vertices with positive weights.
pub fn pp_random_point(n: usize, seed: u64) -> DVector<f64> {
    assert!(n > 0, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = 2 * n;
    let mut weights = Vec::with_capacity(samples);
    let mut point = DVector::zeros(n);
    let mut vertices = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut v = DVector::from_fn(n, |_, _| {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        });
        let negatives = v.iter().filter(|&&e| e < 0.0).count();
        if negatives % 2 == 1 {
            let i = rng.random_range(0..n);
            v[i] = -v[i];
        }
        vertices.push(v);
        weights.push(-rng.random::<f64>().max(f64::MIN_POSITIVE).ln());
    }
    let total: f64 = weights.iter().sum();
    for (v, w) in vertices.iter().zip(&weights) {
        point += v * (w / total);
    }
    point
}

// ── Tests ───────────────────────────────────────────────────────────────────
