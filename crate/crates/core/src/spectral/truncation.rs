//! Leading eigenvalue of the hard-truncated transfer matrix.
//!
//! With bulk coefficients `(c, b, a) = (p², 2p(1-p), (1-p)²)` the kept
//! `ℓ × ℓ` block has a continuum edge at `2b = 4p(1-p)`. Writing
//! `λ = 2b - ε`, eigenvalues below the edge are the zeros of `g̃(ε)`, and
//! their offsets scale as `ε ≈ ψ/ℓ²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tridiag;
use super::symmetrize_tridiagonal;
use crate::config::Tolerances;
use crate::error::{check_probability, Error, Result};
use crate::matrices::build_truncated_block;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationRoot {
    pub ell: usize,
    /// `4p(1-p) - λ`.
    pub epsilon: f64,
    /// `ε ℓ²`.
    pub psi: f64,
}

/// `g̃(ε) = (b-ε) r cos((ℓ-1)θ+φ) - c cos((ℓ-2)θ+φ)` with `r = √(c/a)`,
/// `θ = atan2(√((2b-ε)ε), b-ε)` and `φ = arg α`,
/// `α = (a r e^{-iθ} + a - (b-ε)) / (a r (e^{-iθ} - e^{iθ}))`.
pub fn gtilde(p: f64, ell: usize, epsilon: f64) -> Result<f64> {
    check_probability("p", p)?;
    if ell < 2 {
        return Err(Error::param("ell", ell as f64, "must be at least 2"));
    }
    let (a, b, c) = ((1.0 - p) * (1.0 - p), 2.0 * p * (1.0 - p), p * p);
    if !(epsilon > 0.0 && epsilon < 2.0 * b) {
        return Err(Error::param("epsilon", epsilon, "must lie in (0, 4p(1-p))"));
    }
    let r = (c / a).sqrt();
    let theta = ((2.0 * b - epsilon) * epsilon).sqrt().atan2(b - epsilon);
    let e_minus = Complex64::from_polar(1.0, -theta);
    let e_plus = Complex64::from_polar(1.0, theta);
    let alpha = (a * r * e_minus + (a - (b - epsilon))) / (a * r * (e_minus - e_plus));
    let phi = alpha.arg();
    let l = ell as f64;
    Ok((b - epsilon) * r * ((l - 1.0) * theta + phi).cos() - c * ((l - 2.0) * theta + phi).cos())
}

/// The `count` smallest zeros `ε` of [`gtilde`], located by scanning
/// `ψ = εℓ²` in steps of 0.01 and refining each bracket by bisection.
pub fn gtilde_roots(p: f64, ell: usize, count: usize) -> Result<Vec<f64>> {
    let l2 = (ell * ell) as f64;
    let edge = 4.0 * p * (1.0 - p);
    let h = 0.01;
    let mut roots = Vec::with_capacity(count);
    let mut psi = h;
    let mut prev = gtilde(p, ell, psi / l2)?;
    while roots.len() < count {
        let next_psi = psi + h;
        if next_psi / l2 >= edge {
            break;
        }
        let next = gtilde(p, ell, next_psi / l2)?;
        if prev == 0.0 {
            roots.push(psi / l2);
        } else if prev * next < 0.0 {
            roots.push(bisect_root(|e| gtilde(p, ell, e), psi / l2, next_psi / l2, prev)?);
        }
        psi = next_psi;
        prev = next;
    }
    Ok(roots)
}

fn bisect_root(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, f_lo: f64) -> Result<f64> {
    let sign_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)?.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Leading eigenvalue of each truncated block, reported as `ε` and `ψ`.
pub fn truncated_root_scan(p: f64, ells: &[usize], c_prime: f64) -> Result<Vec<TruncationRoot>> {
    check_probability("p", p)?;
    if p <= 0.5 {
        return Err(Error::param("p", p, "must exceed 1/2"));
    }
    let tol = Tolerances::DEFAULT;
    let edge = 4.0 * p * (1.0 - p);
    ells.iter()
        .map(|&ell| {
            if ell < 8 {
                return Err(Error::param("ell", ell as f64, "must be at least 8"));
            }
            let block = build_truncated_block(p, ell, c_prime)?;
            let (s, _) = symmetrize_tridiagonal(&block)?;
            let lambda = tridiag::kth_smallest(&s, ell - 1, &tol)?;
            let epsilon = edge - lambda;
            Ok(TruncationRoot {
                ell,
                epsilon,
                psi: epsilon * (ell * ell) as f64,
            })
        })
        .collect()
}
