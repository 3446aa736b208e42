//! Spectra and leading eigenpairs of the transfer matrices.
//!
//! `T(p)` is diagonalized in closed form (plane waves quantized at
//! `k = mπ/L`); everything else goes through the symmetric tridiagonal
//! engine in [`tridiag`]. Non-symmetric tridiagonal operators are first made
//! symmetric by a diagonal similarity whose scaling is kept in log domain.

pub mod tridiag;
pub mod truncation;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{check_probability, Error, Result};
use crate::matrices::{BandedMatrix, DiagonalWeight, SymTridiagonal};
use tridiag::{Tridiagonal, fix_sign};

pub use truncation::{gtilde, gtilde_roots, truncated_root_scan, TruncationRoot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gauge {
    Original,
    Symmetric,
    SymmetrizedDissipative,
}

impl Gauge {
    pub fn as_str(self) -> &'static str {
        match self {
            Gauge::Original => "original",
            Gauge::Symmetric => "symmetric",
            Gauge::SymmetrizedDissipative => "symmetrized-dissipative",
        }
    }
}

/// Eigenvalues in descending order, optionally with unit-norm eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub gauge: Gauge,
}

impl Spectrum {
    pub fn leading(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Quantized plane-wave mode `k = mπ/L`, `1 ≤ m ≤ L-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeIndex {
    m: usize,
    l: usize,
}

impl ModeIndex {
    pub fn new(m: usize, l: usize) -> Result<Self> {
        if m == 0 || m >= l {
            return Err(Error::param("m", m as f64, "mode index must satisfy 1 <= m <= L-1"));
        }
        Ok(ModeIndex { m, l })
    }

    pub fn m(self) -> usize {
        self.m
    }

    pub fn size(self) -> usize {
        self.l
    }

    pub fn k(self) -> f64 {
        self.m as f64 * PI / self.l as f64
    }
}

/// `2p(1-p)(1 + cos k)`.
pub fn mode_eigenvalue(p: f64, mode: ModeIndex) -> f64 {
    2.0 * p * (1.0 - p) * (1.0 + mode.k().cos())
}

/// `{1} ∪ {2p(1-p)(1+cos(mπ/L))}`, descending.
pub fn analytic_spectrum(p: f64, l: usize) -> Result<Spectrum> {
    check_probability("p", p)?;
    if l < 2 {
        return Err(Error::param("L", l as f64, "system too small"));
    }
    let mut eigenvalues = Vec::with_capacity(l);
    eigenvalues.push(1.0);
    for m in 1..l {
        eigenvalues.push(mode_eigenvalue(p, ModeIndex { m, l }));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: None,
        gauge: Gauge::Symmetric,
    })
}

/// Squared 2-norm of `p sin(kx) - (1-p) sin(k(x-1))` over `x = 1..=L`,
/// which is exactly `(L/2)(1 - λ_k)`.
pub fn analytic_norm_squared(p: f64, mode: ModeIndex) -> f64 {
    0.5 * mode.size() as f64 * (1.0 - mode_eigenvalue(p, mode))
}

/// Unit-norm eigenvector of the symmetric transfer matrix for `mode`.
pub fn analytic_eigenvector(p: f64, mode: ModeIndex) -> Result<Vec<f64>> {
    check_probability("p", p)?;
    let k = mode.k();
    let norm = analytic_norm_squared(p, mode).sqrt();
    Ok((1..=mode.size())
        .map(|x| {
            let x = x as f64;
            (p * (k * x).sin() - (1.0 - p) * (k * (x - 1.0)).sin()) / norm
        })
        .collect())
}

/// Natural log of the stationary weight of site `n`,
/// `(1 - r²) r^{2(n-1)} / (1 - r^{2L})` with `r = p/(1-p)`.
pub fn ln_steady_state_overlap(p: f64, n: usize, l: usize) -> Result<f64> {
    check_probability("p", p)?;
    if n == 0 || n > l {
        return Err(Error::param("n", n as f64, "site must satisfy 1 <= n <= L"));
    }
    let ln_r = (p / (1.0 - p)).ln();
    if ln_r == 0.0 {
        return Ok(-(l as f64).ln());
    }
    // Rewrite with s = r^{-2 sgn(ln r)} < 1 so nothing overflows:
    // weight = (1 - s) s^{L-n} / (1 - s^L) for r > 1, and the mirror for r < 1.
    let a = 2.0 * ln_r.abs();
    let ln_1ms = (-(-a).exp_m1()).ln();
    let ln_1msl = (-(-a * l as f64).exp_m1()).ln();
    let power = if ln_r > 0.0 { (l - n) as f64 } else { (n - 1) as f64 };
    Ok(ln_1ms - a * power - ln_1msl)
}

/// Stationary weight of site `n` (the plateau of `⟨n|T^t|n⟩`).
pub fn steady_state_overlap(p: f64, n: usize, l: usize) -> Result<f64> {
    ln_steady_state_overlap(p, n, l).map(f64::exp)
}

/// Full spectrum of a symmetric tridiagonal matrix.
pub fn eig_sym_tridiag(t: &SymTridiagonal, with_vectors: bool) -> Result<Spectrum> {
    eig_sym_tridiag_with(t, with_vectors, &Tolerances::DEFAULT)
}

pub fn eig_sym_tridiag_with(t: &SymTridiagonal, with_vectors: bool, tol: &Tolerances) -> Result<Spectrum> {
    let eigenvalues = tridiag::all_eigenvalues(t, tol)?;
    let eigenvectors = if with_vectors {
        Some(tridiag::eigenvectors(t, &eigenvalues, tol)?)
    } else {
        None
    };
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        gauge: Gauge::Symmetric,
    })
}

/// `W^{1/2} T W^{1/2}`, similar to `W·T` (and to `W·T(p)` when `t` is the
/// symmetric form of `T(p)`).
pub fn symmetrize_dissipative(t: &SymTridiagonal, w: &DiagonalWeight) -> Result<SymTridiagonal> {
    if w.size() != t.size() {
        return Err(Error::DimensionMismatch {
            expected: t.size(),
            got: w.size(),
        });
    }
    if !w.is_strictly_positive() {
        return Err(Error::Unsupported(
            "weights with zeros are not invertible; use build_truncated_block".into(),
        ));
    }
    let lw = w.log_weights();
    let diag = t.diag().iter().zip(lw).map(|(d, l)| d * l.exp()).collect();
    let off = t
        .offdiag()
        .iter()
        .enumerate()
        .map(|(i, e)| e * (0.5 * (lw[i] + lw[i + 1])).exp())
        .collect();
    SymTridiagonal::new(diag, off)
}

/// Symmetric form `S = D⁻¹ M D` of a tridiagonal matrix whose off-diagonal
/// products are nonnegative, together with `D` in log domain. Where an
/// off-diagonal product vanishes the matrix decouples and `D` is continued
/// flat; eigenvalues are unaffected.
pub fn symmetrize_tridiagonal(m: &BandedMatrix) -> Result<(SymTridiagonal, DiagonalWeight)> {
    if !m.is_tridiagonal() {
        return Err(Error::Unsupported("matrix is not tridiagonal".into()));
    }
    let n = m.size();
    let diag = m.diagonal();
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    let mut log_d = Vec::with_capacity(n);
    log_d.push(0.0);
    for i in 0..n.saturating_sub(1) {
        let up = m.get(i, i + 1);
        let down = m.get(i + 1, i);
        let prod = up * down;
        if prod < 0.0 {
            return Err(Error::Unsupported(format!(
                "off-diagonal product at {i} is negative; no real symmetrization"
            )));
        }
        off.push(prod.sqrt());
        let step = if prod > 0.0 { 0.5 * (down.ln() - up.ln()) } else { 0.0 };
        log_d.push(log_d[i] + step);
    }
    Ok((SymTridiagonal::new(diag, off)?, DiagonalWeight::from_log_weights(log_d)?))
}

/// Operators accepted by [`leading_pair`].
#[derive(Debug, Clone, Copy)]
pub enum Operator<'a> {
    /// Eigenvector is returned in the matrix's own (symmetric) gauge.
    Symmetric(&'a SymTridiagonal),
    /// Tridiagonal with nonnegative off-diagonal products, or lower triangular.
    Banded(&'a BandedMatrix),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadingPair {
    pub eigenvalue: f64,
    /// Nonnegative, unit sum.
    pub vector: Vec<f64>,
    pub gauge: Gauge,
    /// `‖Av − λv‖∞ / ‖v‖∞`.
    pub residual: f64,
}

impl LeadingPair {
    /// 1-based site of the largest entry.
    pub fn argmax(&self) -> usize {
        argmax(&self.vector) + 1
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Largest eigenvalue only.
pub fn leading_eigenvalue(op: Operator<'_>, tol: &Tolerances) -> Result<f64> {
    match op {
        Operator::Symmetric(t) => tridiag::kth_smallest(t, t.size() - 1, tol),
        Operator::Banded(m) if m.is_lower_triangular() => Ok(m
            .diagonal()
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)),
        Operator::Banded(m) if m.is_tridiagonal() => {
            let (s, _) = symmetrize_tridiagonal(m)?;
            tridiag::kth_smallest(&s, s.size() - 1, tol)
        }
        Operator::Banded(_) => Err(Error::Unsupported(
            "only tridiagonal or lower-triangular banded operators".into(),
        )),
    }
}

/// Leading eigenvalue and its nonnegative eigenvector.
///
/// Tridiagonal operators: the eigenvalue comes from bisection on the
/// symmetric form; the vector from inverse iteration directly on the input
/// matrix at that shift, so it is accurate relative to its largest entry in
/// the original gauge regardless of how strongly `D` is graded. Lower
/// triangular operators are solved exactly by forward substitution.
pub fn leading_pair(op: Operator<'_>, tol: &Tolerances) -> Result<LeadingPair> {
    match op {
        Operator::Symmetric(t) => {
            let lambda = tridiag::kth_smallest(t, t.size() - 1, tol)?;
            let (v, residual) =
                tridiag::inverse_iteration(&Tridiagonal::from_symmetric(t), lambda, 0, &[], tol)?;
            finish_pair(lambda, v, residual, Gauge::Symmetric, tol)
        }
        Operator::Banded(m) if m.is_lower_triangular() => lower_triangular_pair(m, tol),
        Operator::Banded(m) if m.is_tridiagonal() => {
            let (s, _) = symmetrize_tridiagonal(m)?;
            let lambda = tridiag::kth_smallest(&s, s.size() - 1, tol)?;
            let n = m.size();
            let a = Tridiagonal {
                sub: (0..n - 1).map(|i| m.get(i + 1, i)).collect(),
                diag: m.diagonal(),
                sup: (0..n - 1).map(|i| m.get(i, i + 1)).collect(),
            };
            let (v, residual) = tridiag::inverse_iteration(&a, lambda, 0, &[], tol)?;
            finish_pair(lambda, v, residual, Gauge::Original, tol)
        }
        Operator::Banded(_) => Err(Error::Unsupported(
            "only tridiagonal or lower-triangular banded operators".into(),
        )),
    }
}

fn finish_pair(lambda: f64, mut v: Vec<f64>, residual: f64, gauge: Gauge, tol: &Tolerances) -> Result<LeadingPair> {
    fix_sign(&mut v);
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= sum);
    if let Some((i, &x)) = v
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .filter(|(_, &x)| x < -tol.positivity)
    {
        return Err(Error::Unsupported(format!(
            "leading vector has negative entry {x:e} at site {}",
            i + 1
        )));
    }
    v.iter_mut().for_each(|x| *x = x.max(0.0));
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= sum);
    Ok(LeadingPair {
        eigenvalue: lambda,
        vector: v,
        gauge,
        residual,
    })
}

fn lower_triangular_pair(m: &BandedMatrix, tol: &Tolerances) -> Result<LeadingPair> {
    let diag = m.diagonal();
    let start = argmax(&diag);
    let lambda = diag[start];
    let n = m.size();
    let mut v = vec![0.0; n];
    v[start] = 1.0;
    for i in start + 1..n {
        let gap = lambda - diag[i];
        if gap <= 0.0 {
            return Err(Error::Unsupported(format!(
                "leading diagonal entry {lambda} is repeated at site {}",
                i + 1
            )));
        }
        let mut acc = 0.0;
        for (&offset, band) in m.bands().range(..0) {
            let j = i as i64 + offset;
            if j >= start as i64 {
                acc += band[j as usize] * v[j as usize];
            }
        }
        v[i] = acc / gap;
    }
    // Unit max before summing keeps the rescaling finite.
    let vmax = v.iter().fold(0.0f64, |a, &b| a.max(b));
    v.iter_mut().for_each(|x| *x /= vmax);
    let av = crate::matrices::LinearStep::apply(m, &v);
    let residual = av
        .iter()
        .zip(&v)
        .fold(0.0f64, |r, (a, x)| r.max((a - lambda * x).abs()));
    finish_pair(lambda, v, residual, Gauge::Original, tol)
}

/// Site `-ln λ / γ` where a leading dissipative eigenvector peaks.
pub fn peak_estimate(lambda: f64, gamma: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::param("lambda", lambda, "must lie in (0, 1)"));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", gamma, "must be positive"));
    }
    Ok(-lambda.ln() / gamma)
}

/// `L → ∞` then `γ → 0` limit of the leading eigenvalue of `P(γ)·M` for a
/// lower-triangular `M`: the largest diagonal entry away from the lower
/// boundary (the last `bandwidth` sites are pushed to `e^{-γL} → 0`).
pub fn triangular_dissipative_limit(m: &BandedMatrix) -> Result<f64> {
    if !m.is_lower_triangular() {
        return Err(Error::Unsupported("matrix is not lower triangular".into()));
    }
    let d = m.diagonal();
    let bulk = d.len().saturating_sub(m.bandwidth().max(1));
    if bulk == 0 {
        return Err(Error::param("L", d.len() as f64, "no bulk sites"));
    }
    Ok(d[..bulk].iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Closed-form leading eigenvector of `P(γ)·T⁽¹⁾` (unit sum over `L` sites):
/// `ρ(x) ∝ ((1-2ε)/2ε)^{x-1} e^{-γx(x-1)/2} Π_{y=1}^{x-1} (1-e^{-γy})^{-1}`.
pub fn simplified_eigvec(epsilon: f64, gamma: f64, l: usize) -> Result<Vec<f64>> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::param("epsilon", epsilon, "must lie in (0, 1/2)"));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", gamma, "must be positive"));
    }
    if l < 2 {
        return Err(Error::param("L", l as f64, "system too small"));
    }
    let ln_ratio = ((1.0 - 2.0 * epsilon) / (2.0 * epsilon)).ln();
    let mut logs = Vec::with_capacity(l);
    let mut ln_prod = 0.0;
    for x in 1..=l {
        if x >= 2 {
            let y = (x - 1) as f64;
            ln_prod -= (-(-gamma * y).exp_m1()).ln();
        }
        let xf = x as f64;
        logs.push((xf - 1.0) * ln_ratio - 0.5 * gamma * xf * (xf - 1.0) + ln_prod);
    }
    Ok(normalize_log(&logs))
}

/// Unit-sum vector from log-domain entries.
pub(crate) fn normalize_log(logs: &[f64]) -> Vec<f64> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let v: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = v.iter().sum();
    v.into_iter().map(|x| x / sum).collect()
}
