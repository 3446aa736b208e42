//! Transfer matrices of the endpoint walk and their diagonal deformations.
//!
//! Every operator here is banded. [`BandedMatrix`] stores diagonals keyed by
//! `offset = col - row`, so offset `-1` is the subdiagonal carrying the
//! rightward hop `p²` of `T(p)` and offset `+1` the leftward hop `(1-p)²`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{check_probability, Error, Result};

/// Anything that can advance a density vector by one time step.
pub trait LinearStep {
    fn dim(&self) -> usize;

    /// Writes `A·input` into `out`. Both slices have length [`dim`](Self::dim).
    fn apply_into(&self, input: &[f64], out: &mut [f64]);

    fn apply(&self, input: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(input, &mut out);
        out
    }
}

/// Square matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BandedRepr", into = "BandedRepr")]
pub struct BandedMatrix {
    size: usize,
    bands: BTreeMap<i64, Vec<f64>>,
    stochastic: bool,
}

#[derive(Serialize, Deserialize)]
struct BandedRepr {
    size: usize,
    bands: BTreeMap<i64, Vec<f64>>,
    flags: BandedFlags,
}

#[derive(Serialize, Deserialize)]
struct BandedFlags {
    stochastic: bool,
}

impl TryFrom<BandedRepr> for BandedMatrix {
    type Error = Error;

    fn try_from(repr: BandedRepr) -> Result<Self> {
        BandedMatrix::new(repr.size, repr.bands, repr.flags.stochastic)
    }
}

impl From<BandedMatrix> for BandedRepr {
    fn from(m: BandedMatrix) -> Self {
        BandedRepr {
            size: m.size,
            bands: m.bands,
            flags: BandedFlags {
                stochastic: m.stochastic,
            },
        }
    }
}

impl BandedMatrix {
    /// Validates band lengths, finiteness and, when `stochastic` is set,
    /// nonnegativity and unit column sums.
    pub fn new(size: usize, bands: BTreeMap<i64, Vec<f64>>, stochastic: bool) -> Result<Self> {
        if size == 0 {
            return Err(Error::param("size", 0.0, "must be positive"));
        }
        for (&offset, coeffs) in &bands {
            let expected = size.saturating_sub(offset.unsigned_abs() as usize);
            if offset.unsigned_abs() as usize >= size || coeffs.len() != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    got: coeffs.len(),
                });
            }
            if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
                return Err(Error::NonFinite { offset, index });
            }
        }
        let m = BandedMatrix {
            size,
            bands,
            stochastic,
        };
        if stochastic {
            m.check_stochastic(Tolerances::DEFAULT.stochastic)?;
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn bands(&self) -> &BTreeMap<i64, Vec<f64>> {
        &self.bands
    }

    pub fn band(&self, offset: i64) -> Option<&[f64]> {
        self.bands.get(&offset).map(Vec::as_slice)
    }

    pub fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    /// Entry at 0-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let offset = col as i64 - row as i64;
        match self.bands.get(&offset) {
            Some(b) => b[row.min(col)],
            None => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.band(0)
            .map(<[f64]>::to_vec)
            .unwrap_or_else(|| vec![0.0; self.size])
    }

    /// Largest `|offset|` among stored bands.
    pub fn bandwidth(&self) -> usize {
        self.bands
            .keys()
            .map(|o| o.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.bands
            .iter()
            .all(|(&o, b)| o <= 0 || b.iter().all(|&c| c == 0.0))
    }

    pub fn is_tridiagonal(&self) -> bool {
        self.bands
            .iter()
            .all(|(&o, b)| o.abs() <= 1 || b.iter().all(|&c| c == 0.0))
    }

    /// Column `col` as `(row, value)` pairs for the stored bands.
    pub fn column(&self, col: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (&offset, b) in self.bands.iter().rev() {
            let row = col as i64 - offset;
            if row >= 0 && (row as usize) < self.size {
                let row = row as usize;
                out.push((row, b[row.min(col)]));
            }
        }
        out
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.size];
        for (&offset, b) in &self.bands {
            for (i, &c) in b.iter().enumerate() {
                let col = if offset >= 0 { i + offset as usize } else { i };
                sums[col] += c;
            }
        }
        sums
    }

    fn check_stochastic(&self, tol: f64) -> Result<()> {
        for (&offset, b) in &self.bands {
            if let Some(i) = b.iter().position(|&c| c < 0.0) {
                return Err(Error::NonStochastic(format!(
                    "negative entry {} in band {offset} at index {i}",
                    b[i]
                )));
            }
        }
        for (col, s) in self.column_sums().into_iter().enumerate() {
            if (s - 1.0).abs() > tol {
                return Err(Error::NonStochastic(format!(
                    "column {col} sums to {s}"
                )));
            }
        }
        Ok(())
    }

    /// `W·M`: row `x` scaled by the weight of site `x`. Materializes
    /// `e^{log w}`, so weights far below `f64::MIN_POSITIVE` become zero.
    pub fn left_weighted(&self, w: &DiagonalWeight) -> Result<BandedMatrix> {
        if w.size() != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                got: w.size(),
            });
        }
        let weights = w.weights();
        let bands = self
            .bands
            .iter()
            .map(|(&offset, b)| {
                let row0 = if offset >= 0 { 0 } else { (-offset) as usize };
                let scaled = b
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| c * weights[row0 + i])
                    .collect();
                (offset, scaled)
            })
            .collect();
        let stochastic = self.stochastic && w.log_weights().iter().all(|&l| l == 0.0);
        BandedMatrix::new(self.size, bands, stochastic)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.size]; self.size];
        for (&offset, b) in &self.bands {
            for (i, &c) in b.iter().enumerate() {
                let (r, col) = if offset >= 0 {
                    (i, i + offset as usize)
                } else {
                    (i + (-offset) as usize, i)
                };
                dense[r][col] = c;
            }
        }
        dense
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("banded matrix serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

impl LinearStep for BandedMatrix {
    fn dim(&self) -> usize {
        self.size
    }

    fn apply_into(&self, input: &[f64], out: &mut [f64]) {
        assert_eq!(input.len(), self.size);
        assert_eq!(out.len(), self.size);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (&offset, b) in &self.bands {
            if offset >= 0 {
                let k = offset as usize;
                for (i, &c) in b.iter().enumerate() {
                    out[i] += c * input[i + k];
                }
            } else {
                let k = (-offset) as usize;
                for (i, &c) in b.iter().enumerate() {
                    out[i + k] += c * input[i];
                }
            }
        }
    }
}

/// `W·M` applied lazily: the banded matrix is kept intact and each step
/// multiplies by the site weights afterwards.
#[derive(Debug, Clone)]
pub struct Weighted<'a> {
    matrix: &'a BandedMatrix,
    weights: Vec<f64>,
}

impl<'a> Weighted<'a> {
    pub fn new(weight: &DiagonalWeight, matrix: &'a BandedMatrix) -> Result<Self> {
        if weight.size() != matrix.size() {
            return Err(Error::DimensionMismatch {
                expected: matrix.size(),
                got: weight.size(),
            });
        }
        Ok(Weighted {
            matrix,
            weights: weight.weights(),
        })
    }
}

impl LinearStep for Weighted<'_> {
    fn dim(&self) -> usize {
        self.matrix.size()
    }

    fn apply_into(&self, input: &[f64], out: &mut [f64]) {
        self.matrix.apply_into(input, out);
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o *= w;
        }
    }
}

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::param("size", 0.0, "must be positive"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len() - 1,
                got: offdiag.len(),
            });
        }
        if let Some(i) = diag.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                offset: 0,
                index: i,
            });
        }
        if let Some(i) = offdiag.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                offset: 1,
                index: i,
            });
        }
        Ok(SymTridiagonal { diag, offdiag })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.size();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            d[i][i] = self.diag[i];
            if i + 1 < n {
                d[i][i + 1] = self.offdiag[i];
                d[i + 1][i] = self.offdiag[i];
            }
        }
        d
    }
}

impl LinearStep for SymTridiagonal {
    fn dim(&self) -> usize {
        self.size()
    }

    fn apply_into(&self, input: &[f64], out: &mut [f64]) {
        let n = self.size();
        for i in 0..n {
            let mut acc = self.diag[i] * input[i];
            if i > 0 {
                acc += self.offdiag[i - 1] * input[i - 1];
            }
            if i + 1 < n {
                acc += self.offdiag[i] * input[i + 1];
            }
            out[i] = acc;
        }
    }
}

/// Per-site multiplicative weights, stored as natural logarithms.
/// A weight of exactly zero is `-inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalWeight {
    log_weights: Vec<f64>,
}

impl DiagonalWeight {
    pub fn from_log_weights(log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(Error::param("size", 0.0, "must be positive"));
        }
        if let Some(i) = log_weights
            .iter()
            .position(|l| l.is_nan() || *l == f64::INFINITY)
        {
            return Err(Error::NonFinite {
                offset: 0,
                index: i,
            });
        }
        Ok(DiagonalWeight { log_weights })
    }

    pub fn identity(size: usize) -> Result<Self> {
        Self::from_log_weights(vec![0.0; size])
    }

    pub fn size(&self) -> usize {
        self.log_weights.len()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Weight of 1-based site `x`.
    pub fn weight(&self, x: usize) -> f64 {
        self.log_weights[x - 1].exp()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.log_weights.iter().all(|l| l.is_finite())
    }

    /// Componentwise product, `log` added.
    pub fn compose(&self, other: &DiagonalWeight) -> Result<DiagonalWeight> {
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                got: other.size(),
            });
        }
        Self::from_log_weights(
            self.log_weights
                .iter()
                .zip(&other.log_weights)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

/// Coefficients of the continuum limit of a stochastic walk's bulk column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpMoments {
    /// Mean jump per step.
    pub v_b: f64,
    /// `½·E[m²]`, the coefficient of the second derivative.
    pub d: f64,
    /// `⅙·E[m³]`, the coefficient of the third derivative.
    pub higher: f64,
}

fn check_size(l: usize, min: usize) -> Result<()> {
    if l < min {
        Err(Error::param("L", l as f64, "system too small"))
    } else {
        Ok(())
    }
}

fn tridiagonal(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>, stochastic: bool) -> Result<BandedMatrix> {
    let size = diag.len();
    let mut bands = BTreeMap::new();
    bands.insert(-1, sub);
    bands.insert(0, diag);
    bands.insert(1, sup);
    BandedMatrix::new(size, bands, stochastic)
}

/// `T(p)` on `l` sites: hop right with `p²`, left with `(1-p)²`, stay with
/// `2p(1-p)`; the corner entries fold the missing hops into staying put.
pub fn build_transfer(p: f64, l: usize) -> Result<BandedMatrix> {
    check_probability("p", p)?;
    check_size(l, 2)?;
    let right = p * p;
    let left = (1.0 - p) * (1.0 - p);
    let stay = 2.0 * p * (1.0 - p);
    let mut diag = vec![stay; l];
    diag[0] = 1.0 - right;
    diag[l - 1] = right + stay;
    tridiagonal(vec![right; l - 1], diag, vec![left; l - 1], true)
}

/// `R⁻¹ T(p) R`, the symmetric form of [`build_transfer`].
pub fn build_symmetric_transfer(p: f64, l: usize) -> Result<SymTridiagonal> {
    check_probability("p", p)?;
    check_size(l, 2)?;
    let b = 2.0 * p * (1.0 - p);
    let mut diag = vec![b; l];
    diag[0] = (1.0 - p) * (1.0 - p) + b;
    diag[l - 1] = p * p + b;
    SymTridiagonal::new(diag, vec![p * (1.0 - p); l - 1])
}

/// Similarity scaling `δ_n = (p/(1-p))^{n-1}`, log domain only.
pub fn build_similarity(p: f64, l: usize) -> Result<DiagonalWeight> {
    check_probability("p", p)?;
    check_size(l, 1)?;
    let step = (p / (1.0 - p)).ln();
    DiagonalWeight::from_log_weights((0..l).map(|i| i as f64 * step).collect())
}

/// Dissipation `e^{-cγx}` for `x = 1..=l`.
pub fn build_dissipation(gamma: f64, c: f64, l: usize) -> Result<DiagonalWeight> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::param("gamma", gamma, "must be finite and nonnegative"));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::param("c", c, "must be positive"));
    }
    check_size(l, 1)?;
    DiagonalWeight::from_log_weights((1..=l).map(|x| -c * gamma * x as f64).collect())
}

/// Projection keeping sites `x ≤ ell`.
pub fn build_hard_truncation(ell: usize, l: usize) -> Result<DiagonalWeight> {
    if ell == 0 || ell > l {
        return Err(Error::param("ell", ell as f64, "must satisfy 1 <= ell <= L"));
    }
    DiagonalWeight::from_log_weights(
        (1..=l)
            .map(|x| if x <= ell { 0.0 } else { f64::NEG_INFINITY })
            .collect(),
    )
}

/// `ell × ell` block with bulk `(c, b, a) = (p², 2p(1-p), (1-p)²)` and
/// corner `(ell, ell) = b + c_prime`. `c_prime = p²` is `T(p)` itself;
/// `c_prime = 0` is the kept block of `P(ell)·T(p)`.
pub fn build_truncated_block(p: f64, ell: usize, c_prime: f64) -> Result<BandedMatrix> {
    check_probability("p", p)?;
    check_size(ell, 2)?;
    let c = p * p;
    if !(c_prime.is_finite() && c_prime >= 0.0) {
        return Err(Error::param("c_prime", c_prime, "must be nonnegative"));
    }
    if c_prime > c * (1.0 + 1e-15) {
        return Err(Error::param("c_prime", c_prime, "must not exceed p^2"));
    }
    let a = (1.0 - p) * (1.0 - p);
    let b = 2.0 * p * (1.0 - p);
    let mut diag = vec![b; ell];
    diag[0] = a + b;
    diag[ell - 1] = b + c_prime;
    let stochastic = (c_prime - c).abs() <= 1e-15;
    tridiagonal(vec![c; ell - 1], diag, vec![a; ell - 1], stochastic)
}

/// Largest admissible `ε` for [`build_counterexample`] at this `p`.
pub fn counterexample_max_epsilon(p: f64) -> f64 {
    (p / 6.0).min((1.0 - p / 2.0) / 3.0).min(1.0 - p)
}

/// Lower-triangular walk jumping `0, 1, 2, 3` sites with probabilities
/// `1-p-ε, p/2+3ε, p/2-3ε, ε`. Bands are cut at the lower boundary, so the
/// last three columns are sub-stochastic.
pub fn build_counterexample(p: f64, epsilon: f64, l: usize) -> Result<BandedMatrix> {
    check_probability("p", p)?;
    check_size(l, 4)?;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::param("epsilon", epsilon, "must be nonnegative"));
    }
    if epsilon > (p / 6.0).min((1.0 - p / 2.0) / 3.0) {
        return Err(Error::param(
            "epsilon",
            epsilon,
            "must not exceed min(p/6, (1-p/2)/3)",
        ));
    }
    if epsilon > 1.0 - p {
        return Err(Error::param("epsilon", epsilon, "diagonal 1-p-epsilon would be negative"));
    }
    let mut bands = BTreeMap::new();
    bands.insert(0, vec![1.0 - p - epsilon; l]);
    bands.insert(-1, vec![p / 2.0 + 3.0 * epsilon; l - 1]);
    bands.insert(-2, vec![p / 2.0 - 3.0 * epsilon; l - 2]);
    bands.insert(-3, vec![epsilon; l - 3]);
    BandedMatrix::new(l, bands, false)
}

/// First-order (`p = 1-ε`) lower-bidiagonal walk: stay `2ε`, hop right
/// `1-2ε`, absorbing last site.
pub fn build_simplified(epsilon: f64, l: usize) -> Result<BandedMatrix> {
    if !(epsilon.is_finite() && epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::param("epsilon", epsilon, "must lie in (0, 1/2)"));
    }
    check_size(l, 2)?;
    let mut diag = vec![2.0 * epsilon; l];
    diag[l - 1] = 1.0;
    let mut bands = BTreeMap::new();
    bands.insert(0, diag);
    bands.insert(-1, vec![1.0 - 2.0 * epsilon; l - 1]);
    BandedMatrix::new(l, bands, true)
}

/// Moments of the jump distribution of a bulk column (the middle one).
/// The column itself must be stochastic; boundary columns are ignored.
pub fn jump_moments(m: &BandedMatrix) -> Result<JumpMoments> {
    let width = m.bandwidth();
    if m.size() <= 2 * width {
        return Err(Error::param(
            "L",
            m.size() as f64,
            "needs more than twice the bandwidth to have a bulk column",
        ));
    }
    let col = m.size() / 2;
    let entries = m.column(col);
    let total: f64 = entries.iter().map(|&(_, v)| v).sum();
    if entries.iter().any(|&(_, v)| v < 0.0) || (total - 1.0).abs() > Tolerances::DEFAULT.stochastic {
        return Err(Error::NonStochastic(format!(
            "bulk column {col} sums to {total}"
        )));
    }
    let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
    for (row, prob) in entries {
        let jump = row as f64 - col as f64;
        m1 += jump * prob;
        m2 += jump * jump * prob;
        m3 += jump * jump * jump * prob;
    }
    Ok(JumpMoments {
        v_b: m1,
        d: m2 / 2.0,
        higher: m3 / 6.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn transfer_entries() {
        let t = build_transfer(0.8, 4).unwrap();
        assert!(close(t.get(1, 0), 0.64, 1e-15));
        assert!(close(t.get(0, 0), 0.36, 1e-15));
        assert!(close(t.get(0, 1), 0.04, 1e-15));
        assert!(close(t.get(3, 3), 0.64 + 0.32, 1e-15));
        assert!(t.is_stochastic());
        for s in t.column_sums() {
            assert!(close(s, 1.0, 1e-15));
        }
    }

    #[test]
    fn transfer_rejects_bad_input() {
        assert!(build_transfer(0.0, 4).is_err());
        assert!(build_transfer(1.0, 4).is_err());
        assert!(build_transfer(f64::NAN, 4).is_err());
        assert!(build_transfer(0.5, 1).is_err());
    }

    #[test]
    fn symmetric_transfer_entries() {
        let s = build_symmetric_transfer(0.8, 4).unwrap();
        assert!(s.offdiag().iter().all(|&e| close(e, 0.16, 1e-15)));
        let s = build_symmetric_transfer(0.5, 3).unwrap();
        assert_eq!(s.diag(), &[0.75, 0.5, 0.75]);
        assert_eq!(s.offdiag(), &[0.25, 0.25]);
    }

    #[test]
    fn similarity_logs() {
        let r = build_similarity(0.8, 3).unwrap();
        let l4 = 4f64.ln();
        assert_eq!(r.log_weights()[0], 0.0);
        assert!(close(r.log_weights()[1], l4, 1e-15));
        assert!(close(r.log_weights()[2], 2.0 * l4, 1e-15));
        let half = build_similarity(0.5, 5).unwrap();
        assert!(half.log_weights().iter().all(|&l| l == 0.0));
        // 4^499 is never formed
        let big = build_similarity(0.8, 500).unwrap();
        assert!(close(big.log_weights()[499], 499.0 * l4, 1e-10));
    }

    #[test]
    fn similarity_conjugation_gives_symmetric_form() {
        let (p, l) = (0.7, 6);
        let t = build_transfer(p, l).unwrap().to_dense();
        let r = build_similarity(p, l).unwrap();
        let sym = build_symmetric_transfer(p, l).unwrap().to_dense();
        for i in 0..l {
            for j in 0..l {
                let conj = t[i][j] * (r.log_weights()[j] - r.log_weights()[i]).exp();
                assert!(close(conj, sym[i][j], 1e-12), "({i},{j}) {conj} vs {}", sym[i][j]);
            }
        }
    }

    #[test]
    fn dissipation_weights() {
        let w = build_dissipation(0.0, 1.0, 7).unwrap();
        assert!(w.weights().iter().all(|&x| x == 1.0));
        let w = build_dissipation(0.006, 1.0, 500).unwrap();
        assert!(close(w.weight(1), (-0.006f64).exp(), 1e-16));
        let w = build_dissipation(0.01, 2.0, 10).unwrap();
        assert!(close(w.weight(5), (-0.1f64).exp(), 1e-16));
        assert!(build_dissipation(-1e-3, 1.0, 10).is_err());
        assert!(build_dissipation(0.1, 0.0, 10).is_err());
    }

    #[test]
    fn hard_truncation_keeps_cutoff_site() {
        let w = build_hard_truncation(3, 5).unwrap();
        assert_eq!(w.weights(), vec![1.0, 1.0, 1.0, 0.0, 0.0]);
        let id = build_hard_truncation(5, 5).unwrap();
        assert!(id.weights().iter().all(|&x| x == 1.0));
        assert!(build_hard_truncation(0, 5).is_err());
        assert!(build_hard_truncation(6, 5).is_err());
    }

    #[test]
    fn projected_transfer_matches_kept_block() {
        let (p, l, ell) = (0.8, 9, 5);
        let pt = build_transfer(p, l)
            .unwrap()
            .left_weighted(&build_hard_truncation(ell, l).unwrap())
            .unwrap();
        let block = build_truncated_block(p, ell, 0.0).unwrap();
        assert!(!block.is_stochastic());
        for i in 0..ell {
            for j in 0..ell {
                assert!(close(pt.get(i, j), block.get(i, j), 1e-15));
            }
        }
        for i in ell..l {
            for j in 0..l {
                assert_eq!(pt.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn stochastic_corner_block_is_transfer() {
        let (p, ell) = (0.65, 7);
        let block = build_truncated_block(p, ell, p * p).unwrap();
        assert!(block.is_stochastic());
        assert_eq!(block, build_transfer(p, ell).unwrap());
        assert!(build_truncated_block(p, ell, -0.1).is_err());
        assert!(build_truncated_block(p, ell, 0.5).is_err());
    }

    #[test]
    fn counterexample_bands() {
        let m = build_counterexample(0.6, 0.0, 8).unwrap();
        assert!(close(m.get(0, 0), 0.4, 1e-15));
        assert!(close(m.get(1, 0), 0.3, 1e-15));
        assert!(close(m.get(2, 0), 0.3, 1e-15));
        assert_eq!(m.get(3, 0), 0.0);
        let m = build_counterexample(0.6, 0.05, 8).unwrap();
        assert!(close(m.get(4, 4), 0.35, 1e-15));
        let sums = m.column_sums();
        for s in &sums[..5] {
            assert!(close(*s, 1.0, 1e-15));
        }
        assert!(sums[7] < 1.0);
        assert!(build_counterexample(0.6, 0.2, 8).is_err());
        assert!(build_counterexample(0.6, -0.01, 8).is_err());
        assert!(m.is_lower_triangular());
    }

    #[test]
    fn simplified_model_layout() {
        let m = build_simplified(0.1, 5).unwrap();
        let d = m.diagonal();
        for (got, want) in d.iter().zip([0.2, 0.2, 0.2, 0.2, 1.0]) {
            assert!(close(*got, want, 1e-15));
        }
        assert!(m.band(-1).unwrap().iter().all(|&c| close(c, 0.8, 1e-15)));
        assert!(m.is_stochastic());
        assert!(build_simplified(0.5, 5).is_err());
    }

    #[test]
    fn simplified_is_first_order_transfer() {
        // T(0.9) with the (1-p)^2 = 0.01 band dropped and the stay/hop
        // probabilities expanded to first order in 1-p.
        let eps: f64 = 0.1;
        let p = 1.0 - eps;
        let m = build_simplified(eps, 5).unwrap();
        assert!(close(m.get(2, 2), 2.0 * p * (1.0 - p), 2.0 * eps * eps + 1e-15));
        assert!(close(m.get(3, 2), p * p, eps * eps + 1e-15));
    }

    #[test]
    fn moments_of_transfer() {
        let jm = jump_moments(&build_transfer(0.8, 11).unwrap()).unwrap();
        assert!(close(jm.v_b, 0.6, 1e-15));
        assert!(close(jm.d, (0.64 + 0.04) / 2.0, 1e-15));
    }

    #[test]
    fn moments_of_counterexample_ignore_epsilon_up_to_third_order() {
        let p = 0.6;
        let a = jump_moments(&build_counterexample(p, 0.0, 20).unwrap()).unwrap();
        let b = jump_moments(&build_counterexample(p, 0.05, 20).unwrap()).unwrap();
        assert!(close(a.v_b, 1.5 * p, 1e-14));
        assert!(close(b.v_b, 1.5 * p, 1e-14));
        assert!(close(a.d, 1.25 * p, 1e-14));
        assert!(close(b.d, 1.25 * p, 1e-14));
        assert!((a.higher - b.higher).abs() > 0.01);
    }

    #[test]
    fn moments_need_stochastic_bulk() {
        let block = build_truncated_block(0.8, 20, 0.0).unwrap();
        assert!(jump_moments(&block).is_ok());
        let damped = build_transfer(0.8, 20)
            .unwrap()
            .left_weighted(&build_dissipation(0.1, 1.0, 20).unwrap())
            .unwrap();
        assert!(matches!(jump_moments(&damped), Err(Error::NonStochastic(_))));
        assert!(jump_moments(&build_transfer(0.8, 2).unwrap()).is_err());
    }

    #[test]
    fn lazy_weighting_matches_materialized() {
        let t = build_transfer(0.7, 12).unwrap();
        let w = build_dissipation(0.2, 1.0, 12).unwrap();
        let v: Vec<f64> = (0..12).map(|i| (i as f64 + 1.0).sqrt()).collect();
        let lazy = Weighted::new(&w, &t).unwrap().apply(&v);
        let eager = t.left_weighted(&w).unwrap().apply(&v);
        for (a, b) in lazy.iter().zip(&eager) {
            assert!(close(*a, *b, 1e-15));
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let t = build_counterexample(0.6, 0.02, 6).unwrap();
        let s = t.to_json();
        assert!(s.contains("\"bands\""));
        assert!(s.contains("\"-3\""));
        assert!(s.contains("\"flags\":{\"stochastic\":false}"));
        assert_eq!(BandedMatrix::from_json(&s).unwrap(), t);
        let bogus = r#"{"size":2,"bands":{"0":[0.5,0.5]},"flags":{"stochastic":true}}"#;
        assert!(BandedMatrix::from_json(bogus).is_err());
        let short = r#"{"size":3,"bands":{"1":[0.5]},"flags":{"stochastic":false}}"#;
        assert!(BandedMatrix::from_json(short).is_err());
    }

    #[test]
    fn construction_rejects_non_finite() {
        let mut bands = BTreeMap::new();
        bands.insert(0, vec![1.0, f64::INFINITY]);
        assert!(matches!(
            BandedMatrix::new(2, bands, false),
            Err(Error::NonFinite { offset: 0, index: 1 })
        ));
    }
}
