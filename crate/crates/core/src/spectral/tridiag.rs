//! Sturm-sequence bisection and inverse iteration for tridiagonal matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matrices::SymTridiagonal;

/// Number of eigenvalues of `t` strictly below `x`.
pub fn sturm_count(t: &SymTridiagonal, x: f64) -> usize {
    let d = t.diag();
    let e = t.offdiag();
    let pivmin = pivot_floor(e);
    let mut count = 0;
    let mut q = d[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn pivot_floor(e: &[f64]) -> f64 {
    let emax = e.iter().fold(1.0f64, |m, v| m.max(v * v));
    f64::MIN_POSITIVE * emax / f64::EPSILON
}

/// The `k`-th smallest eigenvalue (0-based) by bisection on the Sturm count.
pub fn kth_smallest(t: &SymTridiagonal, k: usize, tol: &Tolerances) -> Result<f64> {
    assert!(k < t.size());
    let (lo, hi) = t.gershgorin();
    let slack = f64::EPSILON * (lo.abs().max(hi.abs()) + 1.0);
    bisect(t, k, lo - slack, hi + slack, tol)
}

fn bisect(t: &SymTridiagonal, k: usize, mut lo: f64, mut hi: f64, tol: &Tolerances) -> Result<f64> {
    for _ in 0..tol.max_bisection_steps {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 0.5 * tol.eigenvalue_abs || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if sturm_count(t, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NoConvergence {
        routine: "sturm bisection",
        iterations: tol.max_bisection_steps,
        residual: hi - lo,
    })
}

/// All eigenvalues in descending order.
pub fn all_eigenvalues(t: &SymTridiagonal, tol: &Tolerances) -> Result<Vec<f64>> {
    let n = t.size();
    let (glo, ghi) = t.gershgorin();
    let slack = f64::EPSILON * (glo.abs().max(ghi.abs()) + 1.0);
    let (glo, ghi) = (glo - slack, ghi + slack);
    let mut out = Vec::with_capacity(n);
    // Descending: the previous (larger) eigenvalue bounds the next from above.
    let mut upper = ghi;
    for k in (0..n).rev() {
        let v = bisect(t, k, glo, upper + tol.eigenvalue_abs, tol)?;
        upper = v;
        out.push(v);
    }
    Ok(out)
}

/// General tridiagonal matrix `A` given by its three diagonals.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn from_symmetric(t: &SymTridiagonal) -> Self {
        Tridiagonal {
            sub: t.offdiag().to_vec(),
            diag: t.diag().to_vec(),
            sup: t.offdiag().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.sup[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    pub fn inf_norm(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.sub[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.sup[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }
}

/// LU factors of `A - σI` with partial pivoting.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(a: &Tridiagonal, shift: f64) -> Self {
        let n = a.len();
        let mut dl = a.sub.clone();
        let mut d: Vec<f64> = a.diag.iter().map(|v| v - shift).collect();
        let mut du = a.sup.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        // An exact singular pivot means the shift is an eigenvalue to working
        // precision; perturbing it keeps the solve finite.
        let floor = f64::EPSILON * a.inf_norm().max(f64::MIN_POSITIVE);
        for v in d.iter_mut() {
            if v.abs() < floor {
                *v = if *v < 0.0 { -floor } else { floor };
            }
        }
        ShiftedLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn residual(a: &Tridiagonal, lambda: f64, x: &[f64]) -> f64 {
    let ax = a.apply(x);
    let r = ax
        .iter()
        .zip(x)
        .fold(0.0f64, |m, (ax, x)| m.max((ax - lambda * x).abs()));
    r / inf_norm(x).max(f64::MIN_POSITIVE)
}

/// Inverse iteration for the eigenvector of `a` at the (accurate) eigenvalue
/// `lambda`. Iterates are orthogonalized against `deflate`, which must hold
/// unit vectors; pass an empty slice for non-symmetric `a`. The result is
/// scaled to unit 2-norm.
pub fn inverse_iteration(
    a: &Tridiagonal,
    lambda: f64,
    seed: u64,
    deflate: &[&[f64]],
    tol: &Tolerances,
) -> Result<(Vec<f64>, f64)> {
    let n = a.len();
    if n == 1 {
        return Ok((vec![1.0], 0.0));
    }
    let lu = ShiftedLu::factor(a, lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let scale = a.inf_norm().max(1.0);
    let mut res = f64::INFINITY;
    for _ in 0..tol.max_inverse_iterations {
        lu.solve(&mut x);
        for q in deflate {
            let dot: f64 = x.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
            x.iter_mut().zip(q.iter()).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        x.iter_mut().for_each(|v| *v /= norm);
        res = residual(a, lambda, &x);
        if res <= tol.eigenvector_residual * scale {
            return Ok((x, res));
        }
    }
    Err(Error::NoConvergence {
        routine: "inverse iteration",
        iterations: tol.max_inverse_iterations,
        residual: res,
    })
}

/// Eigenvectors for descending `eigenvalues` of a symmetric tridiagonal
/// matrix, reorthogonalized within clusters.
pub fn eigenvectors(t: &SymTridiagonal, eigenvalues: &[f64], tol: &Tolerances) -> Result<Vec<Vec<f64>>> {
    let a = Tridiagonal::from_symmetric(t);
    let cluster = 1e-3 * a.inf_norm().max(f64::MIN_POSITIVE);
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
    let mut start = 0;
    for (i, &lambda) in eigenvalues.iter().enumerate() {
        while start < i && eigenvalues[start] - lambda > cluster {
            start += 1;
        }
        let deflate: Vec<&[f64]> = vecs[start..i].iter().map(Vec::as_slice).collect();
        let (mut v, _) = inverse_iteration(&a, lambda, i as u64, &deflate, tol)?;
        fix_sign(&mut v);
        vecs.push(v);
    }
    Ok(vecs)
}

/// Makes the component of largest magnitude positive.
pub fn fix_sign(v: &mut [f64]) {
    let imax = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if v[imax] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
