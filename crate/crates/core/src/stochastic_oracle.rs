//! Monte Carlo sampler of the right-endpoint walk generated by `T(p)`.
//!
//! Randomness is counter based: the uniform used by walker `i` at step `t`
//! is word `2t` of ChaCha8 stream `i` under the ensemble seed. A trajectory
//! is therefore a pure function of `(seed, i)`, whatever the worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::autocorr::EndpointDensity;
use crate::error::{check_probability, Error, Result};

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkEnsemble {
    l: usize,
    start: usize,
    rng_seed: u64,
    t: u64,
    /// 1-based sites.
    positions: Vec<u32>,
    log_weights: Vec<f64>,
}

impl WalkEnsemble {
    /// `n_walkers` walkers at site `start` (1-based) of an `l`-site chain.
    pub fn new(n_walkers: usize, start: usize, l: usize, rng_seed: u64) -> Result<Self> {
        if n_walkers == 0 {
            return Err(Error::param("n_walkers", 0.0, "need at least one walker"));
        }
        if l < 2 || l > u32::MAX as usize {
            return Err(Error::param("L", l as f64, "chain length out of range"));
        }
        if start == 0 || start > l {
            return Err(Error::param("start", start as f64, "must satisfy 1 <= start <= L"));
        }
        Ok(WalkEnsemble {
            l,
            start,
            rng_seed,
            t: 0,
            positions: vec![start as u32; n_walkers],
            log_weights: vec![0.0; n_walkers],
        })
    }

    /// Walkers placed by stratified inversion of `density` (nonnegative,
    /// any normalization): walker `i` sits at the site where the cumulative
    /// weight first reaches `(i + 1/2)/N`. Placement uses no randomness.
    pub fn from_density(n_walkers: usize, density: &[f64], rng_seed: u64) -> Result<Self> {
        let l = density.len();
        let mut e = WalkEnsemble::new(n_walkers, 1, l, rng_seed)?;
        if density.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
            return Err(Error::param("density", f64::NAN, "entries must be finite and nonnegative"));
        }
        let total: f64 = density.iter().sum();
        if !(total > 0.0) {
            return Err(Error::param("density", total, "must have positive mass"));
        }
        let mut site = 0;
        let mut cum = density[0] / total;
        for (i, x) in e.positions.iter_mut().enumerate() {
            let target = (i as f64 + 0.5) / n_walkers as f64;
            while cum < target && site + 1 < l {
                site += 1;
                cum += density[site] / total;
            }
            *x = site as u32 + 1;
        }
        e.start = e.positions[0] as usize;
        Ok(e)
    }

    pub fn n_walkers(&self) -> usize {
        self.positions.len()
    }

    pub fn size(&self) -> usize {
        self.l
    }

    /// Starting site of the first walker.
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn info(&self) -> EnsembleInfo {
        EnsembleInfo {
            rng_seed: self.rng_seed,
            n_walkers: self.n_walkers(),
            workers: rayon::current_num_threads(),
            steps: self.t,
        }
    }
}

/// Reproducibility record for run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleInfo {
    pub rng_seed: u64,
    pub n_walkers: usize,
    pub workers: usize,
    pub steps: u64,
}

fn uniform(rng: &mut ChaCha8Rng, walker: u64, t: u64) -> f64 {
    rng.set_stream(walker);
    rng.set_word_pos(2 * t as u128);
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One step of every walker: right w.p. `p²`, left w.p. `(1-p)²`, else
/// stay, with blocked moves at either end turned into stays (exactly the
/// corner columns of `T(p)`). Then `log_weight -= γ x` at the new site.
pub fn step_ensemble(e: &mut WalkEnsemble, p: f64, gamma: f64) -> Result<()> {
    check_probability("p", p)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", gamma, "must be finite and nonnegative"));
    }
    let right = p * p;
    let left_or_right = right + (1.0 - p) * (1.0 - p);
    let (seed, t, l) = (e.rng_seed, e.t, e.l as u32);
    e.positions
        .par_chunks_mut(CHUNK)
        .zip(e.log_weights.par_chunks_mut(CHUNK))
        .enumerate()
        .for_each(|(chunk, (pos, lw))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let base = (chunk * CHUNK) as u64;
            for (i, (x, w)) in pos.iter_mut().zip(lw.iter_mut()).enumerate() {
                let u = uniform(&mut rng, base + i as u64, t);
                if u < right {
                    if *x < l {
                        *x += 1;
                    }
                } else if u < left_or_right && *x > 1 {
                    *x -= 1;
                }
                if gamma > 0.0 {
                    *w -= gamma * *x as f64;
                }
            }
        });
    e.t += 1;
    Ok(())
}

/// Advances `steps` times.
pub fn run_ensemble(e: &mut WalkEnsemble, p: f64, gamma: f64, steps: u64) -> Result<()> {
    for _ in 0..steps {
        step_ensemble(e, p, gamma)?;
    }
    Ok(())
}

/// Weighted histogram with per-site standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleHistogram {
    pub density: EndpointDensity,
    pub stderr: Vec<f64>,
    /// Unweighted walker counts per site.
    pub counts: Vec<u64>,
}

/// `Σ_i w_i [x_i = x] / N` for every site, with the sample standard error
/// of that mean.
pub fn ensemble_density(e: &WalkEnsemble) -> EnsembleHistogram {
    let l = e.l;
    let n = e.n_walkers() as f64;
    let mut sum = vec![0.0; l];
    let mut sum_sq = vec![0.0; l];
    let mut counts = vec![0u64; l];
    for (&x, &lw) in e.positions.iter().zip(&e.log_weights) {
        let w = lw.exp();
        let i = x as usize - 1;
        sum[i] += w;
        sum_sq[i] += w * w;
        counts[i] += 1;
    }
    let values: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let stderr = values
        .iter()
        .zip(&sum_sq)
        .map(|(m, s2)| {
            if n > 1.0 {
                ((s2 / n - m * m).max(0.0) / (n - 1.0)).sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let total_mass = values.iter().sum();
    EnsembleHistogram {
        density: EndpointDensity {
            t: e.t as usize,
            values,
            total_mass,
        },
        stderr,
        counts,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test of `counts` against probabilities `expected`. Adjacent sites
/// are pooled left to right until each bin expects at least `min_expected`
/// walkers; a remainder below that joins the last bin.
pub fn chi_square_test(counts: &[u64], expected: &[f64], min_expected: f64) -> Result<ChiSquareTest> {
    if counts.len() != expected.len() {
        return Err(Error::DimensionMismatch {
            expected: expected.len(),
            got: counts.len(),
        });
    }
    let n: u64 = counts.iter().sum();
    let total_p: f64 = expected.iter().sum();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&c, &q) in counts.iter().zip(expected) {
        obs += c as f64;
        exp += q / total_p * n as f64;
        if exp >= min_expected {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if obs > 0.0 || exp > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => bins.push((obs, exp)),
        }
    }
    if bins.len() < 2 {
        return Err(Error::InsufficientData("fewer than two bins after pooling".into()));
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|_| Error::InsufficientData("bad dof".into()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_as_delta() {
        let e = WalkEnsemble::new(1000, 4, 10, 1).unwrap();
        let h = ensemble_density(&e);
        assert_eq!(h.density.values[3], 1.0);
        assert_eq!(h.density.total_mass, 1.0);
        assert!(h.stderr.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn stratified_placement() {
        let e = WalkEnsemble::from_density(8, &[1.0, 0.0, 3.0], 0).unwrap();
        assert_eq!(e.positions(), &[1, 1, 3, 3, 3, 3, 3, 3]);
        assert!(WalkEnsemble::from_density(8, &[0.0, 0.0], 0).is_err());
        assert!(WalkEnsemble::from_density(8, &[1.0, -1.0], 0).is_err());
    }

    #[test]
    fn same_seed_same_trajectory() {
        let mut a = WalkEnsemble::new(10_000, 1, 30, 99).unwrap();
        let mut b = a.clone();
        run_ensemble(&mut a, 0.8, 0.01, 20).unwrap();
        run_ensemble(&mut b, 0.8, 0.01, 20).unwrap();
        assert_eq!(a, b);
        let mut c = WalkEnsemble::new(10_000, 1, 30, 100).unwrap();
        run_ensemble(&mut c, 0.8, 0.01, 20).unwrap();
        assert_ne!(a.positions(), c.positions());
    }

    #[test]
    fn walker_trajectory_independent_of_ensemble_size() {
        let mut small = WalkEnsemble::new(10, 1, 30, 5).unwrap();
        let mut big = WalkEnsemble::new(9000, 1, 30, 5).unwrap();
        run_ensemble(&mut small, 0.7, 0.0, 15).unwrap();
        run_ensemble(&mut big, 0.7, 0.0, 15).unwrap();
        assert_eq!(small.positions(), &big.positions()[..10]);
    }

    #[test]
    fn positions_stay_in_range_and_weights_zero_without_dissipation() {
        let mut e = WalkEnsemble::new(5000, 1, 5, 3).unwrap();
        run_ensemble(&mut e, 0.8, 0.0, 50).unwrap();
        assert!(e.positions().iter().all(|&x| (1..=5).contains(&x)));
        assert!(e.log_weights().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn bulk_drift_is_butterfly_velocity() {
        let mut e = WalkEnsemble::new(200_000, 100, 400, 11).unwrap();
        run_ensemble(&mut e, 0.8, 0.0, 50).unwrap();
        let mean = e.positions().iter().map(|&x| x as f64).sum::<f64>() / e.n_walkers() as f64;
        let v = (mean - 100.0) / 50.0;
        // per-step variance is 0.32, so the stderr of v is about 1.8e-4
        assert!((v - 0.6).abs() < 1e-3, "{v}");
    }

    #[test]
    fn mass_is_mean_weight() {
        let mut e = WalkEnsemble::new(2000, 1, 20, 8).unwrap();
        run_ensemble(&mut e, 0.8, 0.05, 10).unwrap();
        let h = ensemble_density(&e);
        let mean_w = e.log_weights().iter().map(|w| w.exp()).sum::<f64>() / 2000.0;
        assert!((h.density.total_mass - mean_w).abs() < 1e-12);
        assert!(h.density.total_mass <= 1.0);
    }

    #[test]
    fn chi_square_pooling() {
        let t = chi_square_test(&[50, 50], &[0.5, 0.5], 5.0).unwrap();
        assert_eq!(t.dof, 1);
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        let pooled = chi_square_test(&[900, 40, 30, 30], &[0.9, 0.04, 0.03, 0.03], 50.0).unwrap();
        assert_eq!(pooled.dof, 1);
        assert!(chi_square_test(&[1, 2], &[1.0], 5.0).is_err());
    }
}
