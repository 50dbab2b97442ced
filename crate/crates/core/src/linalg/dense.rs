//! Dense real-symmetric eigensolver: Householder tridiagonalisation
//! followed by implicit QL iterations (the EISPACK `tred2`/`tql2` pair).

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_QL_SWEEPS: usize = 60;

/// Eigen-decomposition of a symmetric matrix.
///
/// `vectors` is row-major `n x n` with eigenvector `k` in column `k`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<T>,
    pub n: usize,
}

impl<T: Real> SymmetricEigen<T> {
    pub fn vector(&self, k: usize) -> Vec<T> {
        (0..self.n).map(|i| self.vectors[i * self.n + k]).collect()
    }
}

/// Full eigen-decomposition of the row-major symmetric matrix `a`
/// (`n x n`); eigenvalues ascending. Only the lower triangle is read.
pub fn symmetric_eigen<T: Real>(a: &[T], n: usize) -> Result<SymmetricEigen<T>> {
    assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
    if n == 0 {
        return Ok(SymmetricEigen { values: vec![], vectors: vec![], n });
    }
    let mut v = a.to_vec();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e, n);
    // tred2 leaves the subdiagonal in e[1..]; tql2 expects e[i] to couple (i, i+1).
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    tql2(&mut d, &mut e, Some(&mut v), n)?;
    sort_pairs(&mut d, Some(&mut v), n);
    Ok(SymmetricEigen { values: d, vectors: v, n })
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off` (`off[i]` couples `i` and `i + 1`), ascending.
pub fn tridiagonal_eigenvalues<T: Real>(diag: &[T], off: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![T::zero(); n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    tql2(&mut d, &mut e, None, n)?;
    sort_pairs(&mut d, None, n);
    Ok(d)
}

/// The `k` lowest eigenvalues of a symmetric tridiagonal matrix by Sturm
/// sequence bisection, ascending.
pub fn tridiagonal_lowest<T: Real>(diag: &[T], off: &[T], k: usize) -> Vec<T> {
    let m = diag.len();
    let k = k.min(m);
    if k == 0 {
        return vec![];
    }
    let off = &off[..m - 1];
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..m {
        let r = if i > 0 { off[i - 1].abs() } else { T::zero() } + if i + 1 < m { off[i].abs() } else { T::zero() };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let pivmin = T::min_positive_value() * off.iter().fold(T::one(), |a, &x| a.max(x * x));
    let count_below = |x: T| -> usize {
        let mut c = 0;
        let mut q = T::one();
        for i in 0..m {
            q = diag[i] - x - if i > 0 { off[i - 1] * off[i - 1] / q } else { T::zero() };
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < T::zero() {
                c += 1;
            }
        }
        c
    };
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(k);
    let mut floor = lo;
    for j in 0..k {
        // The lowest eigenvalue is bounded by every diagonal entry.
        let ceiling = if j == 0 { diag.iter().cloned().fold(hi, T::min) } else { hi };
        let (mut a, mut b) = (floor, ceiling);
        for _ in 0..200 {
            let tol = two * T::epsilon() * a.abs().max(b.abs()) + pivmin;
            if b - a <= tol {
                break;
            }
            let mid = (a + b) / two;
            if count_below(mid) > j {
                b = mid;
            } else {
                a = mid;
            }
        }
        let val = (a + b) / two;
        out.push(val);
        floor = a;
    }
    out
}

fn tred2<T: Real>(v: &mut [T], d: &mut [T], e: &mut [T], n: usize) {
    let idx = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = T::zero();
                v[idx(j, i)] = T::zero();
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in j + 1..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[idx(k, j)] -= upd;
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }

    // Accumulate the transformations.
    for i in 0..n - 1 {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    let upd = g * d[k];
                    v[idx(k, j)] -= upd;
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = T::zero();
    }
    v[idx(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

/// Implicit QL on a symmetric tridiagonal matrix; `e[i]` couples `i, i+1`.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], mut v: Option<&mut [T]>, n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::Convergence {
                        iterations: sweeps,
                        residual: e[l].abs().as_f64(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::lit(2.0) * e[l]);
                let mut r = pythag(p, T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = pythag(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            let hk = v[k * n + i + 1];
                            v[k * n + i + 1] = s * v[k * n + i] + c * hk;
                            v[k * n + i] = c * v[k * n + i] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

fn sort_pairs<T: Real>(d: &mut [T], mut v: Option<&mut [T]>, n: usize) {
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            if let Some(v) = v.as_deref_mut() {
                for r in 0..n {
                    v.swap(r * n + i, r * n + k);
                }
            }
        }
    }
}

/// Eigenvector of the tridiagonal matrix for an (approximate) eigenvalue
/// `lambda`, by inverse iteration with a partially pivoted LU.
pub(crate) fn tridiagonal_eigenvector<T: Real>(diag: &[T], off: &[T], lambda: T) -> Vec<T> {
    let m = diag.len();
    if m == 1 {
        return vec![T::one()];
    }
    let scale = diag
        .iter()
        .chain(off.iter())
        .fold(T::zero(), |acc, x| acc.max(x.abs()))
        .max(T::min_positive_value());
    let shift = lambda - T::epsilon() * scale * T::lit(4.0);
    let mut dl: Vec<T> = off[..m - 1].to_vec();
    let mut d: Vec<T> = diag.iter().map(|&x| x - shift).collect();
    let mut du: Vec<T> = off[..m - 1].to_vec();
    let mut du2 = vec![T::zero(); m.saturating_sub(2)];
    let mut ipiv = vec![0usize; m - 1];
    for i in 0..m - 1 {
        if d[i].abs() >= dl[i].abs() {
            ipiv[i] = i;
            if d[i] != T::zero() {
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            }
        } else {
            ipiv[i] = i + 1;
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 2 < m {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
        }
    }
    let tiny = T::epsilon() * scale;
    for di in d.iter_mut() {
        if di.abs() < tiny {
            *di = if *di < T::zero() { -tiny } else { tiny };
        }
    }

    let mut x = vec![T::one(); m];
    for _ in 0..3 {
        for i in 0..m - 1 {
            let ip = ipiv[i];
            let temp = x[2 * i + 1 - ip];
            x[i] = x[ip];
            x[i + 1] = temp - dl[i] * x[i];
        }
        x[m - 1] /= d[m - 1];
        x[m - 2] = (x[m - 2] - du[m - 2] * x[m - 1]) / d[m - 2];
        for i in (0..m.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        let nrm = crate::scalar::norm(&x);
        crate::scalar::scale(T::one() / nrm, &mut x);
    }
    x
}

/// `sqrt(a² + b²)`, deferring to the overflow-safe libm routine only when
/// the squares leave the normal range.
fn pythag<T: Real>(a: T, b: T) -> T {
    let sq = a * a + b * b;
    if sq.is_finite() && sq >= T::min_positive_value() {
        sq.sqrt()
    } else {
        a.hypot(b)
    }
}
