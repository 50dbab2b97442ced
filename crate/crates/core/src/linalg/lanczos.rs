//! Lanczos iteration with full reorthogonalisation for the lowest
//! eigenpairs of a matrix-free symmetric operator.
//!
//! Single-vector Krylov spaces see one copy of each distinct eigenvalue.
//! Callers that need multiplicities pass previously converged vectors as
//! `locked`; the iteration then runs in their orthogonal complement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{symmetric_eigen, tridiagonal_eigenvector, tridiagonal_lowest};
use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, norm, scale, Real};

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Residual target relative to the operator norm estimate.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Seed of the random start vector.
    pub seed: u64,
    /// Ritz convergence is tested every this many steps.
    pub check_every: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 600,
            seed: 0x5eed,
            check_every: 6,
        }
    }
}

/// Lowest `k` eigenpairs of the operator restricted to the orthogonal
/// complement of `locked`. `norm_est` bounds the operator norm.
pub fn lanczos_lowest<T, F>(
    apply: F,
    dim: usize,
    k: usize,
    locked: &[Vec<T>],
    norm_est: T,
    opts: &LanczosOptions,
) -> Result<Vec<(T, Vec<T>)>>
where
    T: Real,
    F: Fn(&[T], &mut [T]),
{
    lanczos_lowest_from(apply, dim, k, locked, norm_est, opts, None)
}

/// As [`lanczos_lowest`], starting from `start` when it is given and not
/// (numerically) inside the span of `locked`.
pub fn lanczos_lowest_from<T, F>(
    apply: F,
    dim: usize,
    k: usize,
    locked: &[Vec<T>],
    norm_est: T,
    opts: &LanczosOptions,
    start: Option<&[T]>,
) -> Result<Vec<(T, Vec<T>)>>
where
    T: Real,
    F: Fn(&[T], &mut [T]),
{
    let avail = dim.saturating_sub(locked.len());
    let k = k.min(avail);
    if k == 0 {
        return Ok(vec![]);
    }
    let norm_est = norm_est.max(T::min_positive_value());
    let tol = T::lit(opts.rel_tol).max(T::epsilon() * T::lit(64.0)) * norm_est;
    let breakdown = T::epsilon() * T::lit(16.0) * norm_est;
    // A start vector shared with the unlocked run would have no weight on
    // the remaining copies of a degenerate level.
    let stream = (locked.len() as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ dim as u64 ^ stream);

    let mut basis: Vec<Vec<T>> = Vec::new();
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    let warm = start.filter(|v| v.len() == dim).and_then(|v| orthonormalised(v.to_vec(), locked, &basis));
    let mut q = match warm {
        Some(v) => v,
        None => fresh_direction(&mut rng, dim, locked, &basis)
            .ok_or_else(|| Error::Argument("no start vector available".into()))?,
    };
    let mut w = vec![T::zero(); dim];
    let mut last_resid = f64::INFINITY;

    loop {
        apply(&q, &mut w);
        let a = dot(&q, &w);
        axpy(-a, &q, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(q);
        alpha.push(a);
        // Second Gram-Schmidt pass only after severe cancellation.
        let mut b = norm(&w);
        for _ in 0..2 {
            for v in locked.iter().chain(basis.iter()) {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
            let after = norm(&w);
            let severe = after < T::lit(std::f64::consts::FRAC_1_SQRT_2) * b;
            b = after;
            if !severe {
                break;
            }
        }
        let m = alpha.len();
        let exhausted = m >= avail;
        let invariant = b <= breakdown;

        if m >= k && (m.is_multiple_of(opts.check_every) || m == k || exhausted || invariant || m >= opts.max_iter) {
            let ritz = ritz_pairs(&alpha, &beta, k, tol)?;
            let est = ritz
                .iter()
                .map(|(_, y)| b * y[m - 1].abs())
                .fold(T::zero(), T::max);
            last_resid = est.as_f64();
            if est <= tol || exhausted {
                let pairs = assemble(&basis, ritz, dim);
                let worst = pairs
                    .iter()
                    .map(|(e, v)| residual_norm(&apply, *e, v))
                    .fold(T::zero(), T::max);
                last_resid = worst.as_f64();
                if worst <= tol || exhausted {
                    return Ok(pairs);
                }
            }
        }
        if exhausted || m >= opts.max_iter {
            return Err(Error::Convergence {
                iterations: m,
                residual: last_resid,
            });
        }
        if invariant {
            // Krylov space closed; continue in a fresh orthogonal direction.
            beta.push(T::zero());
            q = match fresh_direction(&mut rng, dim, locked, &basis) {
                Some(v) => v,
                None => {
                    return Err(Error::Convergence {
                        iterations: m,
                        residual: last_resid,
                    })
                }
            };
        } else {
            beta.push(b);
            scale(T::one() / b, &mut w);
            q = w.clone();
        }
    }
}

fn fresh_direction<T: Real>(
    rng: &mut ChaCha8Rng,
    dim: usize,
    locked: &[Vec<T>],
    basis: &[Vec<T>],
) -> Option<Vec<T>> {
    (0..4).find_map(|_| {
        let v: Vec<T> = (0..dim).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        orthonormalised(v, locked, basis)
    })
}

fn orthonormalised<T: Real>(mut v: Vec<T>, locked: &[Vec<T>], basis: &[Vec<T>]) -> Option<Vec<T>> {
    let n0 = norm(&v);
    for _ in 0..2 {
        for u in locked.iter().chain(basis.iter()) {
            let c = dot(u, &v);
            axpy(-c, u, &mut v);
        }
    }
    let n = norm(&v);
    (n > T::lit(1e-6) * n0).then(|| {
        scale(T::one() / n, &mut v);
        v
    })
}

/// Lowest `k` eigenpairs of the Lanczos tridiagonal. Inverse iteration
/// is used unless two wanted Ritz values coincide (possible after a
/// restart), in which case the dense solver keeps the vectors orthogonal.
fn ritz_pairs<T: Real>(alpha: &[T], beta: &[T], k: usize, tol: T) -> Result<Vec<(T, Vec<T>)>> {
    let m = alpha.len();
    let vals = tridiagonal_lowest(alpha, beta, k);
    let clustered = vals[..k].windows(2).any(|w| w[1] - w[0] <= tol);
    if !clustered {
        return Ok(vals[..k]
            .iter()
            .map(|&theta| (theta, tridiagonal_eigenvector(alpha, beta, theta)))
            .collect());
    }
    let mut dense = vec![T::zero(); m * m];
    for i in 0..m {
        dense[i * m + i] = alpha[i];
        if i + 1 < m {
            dense[i * m + i + 1] = beta[i];
            dense[(i + 1) * m + i] = beta[i];
        }
    }
    let eig = symmetric_eigen(&dense, m)?;
    Ok((0..k).map(|j| (eig.values[j], eig.vector(j))).collect())
}

fn assemble<T: Real>(
    basis: &[Vec<T>],
    ritz: Vec<(T, Vec<T>)>,
    dim: usize,
) -> Vec<(T, Vec<T>)> {
    ritz.into_iter()
        .map(|(theta, y)| {
            let mut x = vec![T::zero(); dim];
            for (qj, &yj) in basis.iter().zip(&y) {
                axpy(yj, qj, &mut x);
            }
            let n = norm(&x);
            scale(T::one() / n, &mut x);
            (theta, x)
        })
        .collect()
}

pub(crate) fn residual_norm<T: Real, F: Fn(&[T], &mut [T])>(apply: &F, e: T, v: &[T]) -> T {
    let mut hv = vec![T::zero(); v.len()];
    apply(v, &mut hv);
    axpy(-e, v, &mut hv);
    norm(&hv)
}
