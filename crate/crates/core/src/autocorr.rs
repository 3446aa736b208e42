//! Endpoint-density evolution, return probabilities and decay-rate fits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::matrices::LinearStep;
use crate::spectral::{analytic_norm_squared, ln_steady_state_overlap, mode_eigenvalue, ModeIndex};

/// Right-endpoint weights at one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointDensity {
    pub t: usize,
    pub values: Vec<f64>,
    pub total_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEvolution {
    /// 1-based starting site.
    pub start: usize,
    /// `⟨n|M^t|n⟩` for `t = 0..=steps`.
    pub series: Vec<f64>,
    /// Total mass for `t = 0..=steps`.
    pub masses: Vec<f64>,
    /// Full densities at the requested times, in increasing `t`.
    pub checkpoints: Vec<EndpointDensity>,
}

/// Iterates `ρ ← Mρ` from a delta at site `n` (1-based).
pub fn evolve_density(
    m: &impl LinearStep,
    n: usize,
    steps: usize,
    checkpoints: &[usize],
) -> Result<DensityEvolution> {
    let l = m.dim();
    if n == 0 || n > l {
        return Err(Error::param("n", n as f64, "start site must satisfy 1 <= n <= L"));
    }
    let mut wanted: Vec<usize> = checkpoints.iter().copied().filter(|&t| t <= steps).collect();
    wanted.sort_unstable();
    wanted.dedup();
    let mut wanted = wanted.into_iter().peekable();

    let mut cur = vec![0.0; l];
    cur[n - 1] = 1.0;
    let mut next = vec![0.0; l];
    let mut series = Vec::with_capacity(steps + 1);
    let mut masses = Vec::with_capacity(steps + 1);
    let mut snaps = Vec::new();
    for t in 0..=steps {
        if t > 0 {
            m.apply_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        let mass: f64 = cur.iter().sum();
        series.push(cur[n - 1]);
        masses.push(mass);
        if wanted.peek() == Some(&t) {
            wanted.next();
            snaps.push(EndpointDensity {
                t,
                values: cur.clone(),
                total_mass: mass,
            });
        }
    }
    Ok(DensityEvolution {
        start: n,
        series,
        masses,
        checkpoints: snaps,
    })
}

/// `⟨n|T(p)^t|n⟩` from the eigen-decomposition of `T(p)`:
/// `π_n + Σ_k λ_k^t ψ_{k,n}² / ‖ψ_k‖²`. Every term is nonnegative.
pub fn spectral_return(p: f64, n: usize, l: usize, t: usize) -> Result<f64> {
    let plateau = ln_steady_state_overlap(p, n, l)?.exp();
    let x = n as f64;
    let mut sum = 0.0;
    for m in 1..l {
        let mode = ModeIndex::new(m, l)?;
        let k = mode.k();
        let lambda = mode_eigenvalue(p, mode);
        let psi = p * (k * x).sin() - (1.0 - p) * (k * (x - 1.0)).sin();
        let weight = psi * psi / analytic_norm_squared(p, mode);
        sum += if t == 0 { weight } else { weight * (t as f64 * lambda.ln()).exp() };
    }
    Ok(sum + plateau)
}

/// `⟨1|T(p)^t|1⟩ = (2/L) Σ_k λ_k^t p² sin²k / (1 - λ_k) + π_1`.
pub fn spectral_return_sum(p: f64, l: usize, t: usize) -> Result<f64> {
    check_probability("p", p)?;
    let plateau = ln_steady_state_overlap(p, 1, l)?.exp();
    let mut sum = 0.0;
    for m in 1..l {
        let k = m as f64 * PI / l as f64;
        let lambda = 2.0 * p * (1.0 - p) * (1.0 + k.cos());
        let amp = p * p * k.sin().powi(2) / (1.0 - lambda);
        sum += amp * if t == 0 { 1.0 } else { (t as f64 * lambda.ln()).exp() };
    }
    Ok(2.0 / l as f64 * sum + plateau)
}

/// Large-`L` saddle-point form
/// `(4p²e/√π) (4p(1-p))^t / (2+t)^{3/2} + π_1`.
pub fn asymptotic_return(p: f64, t: f64, l: usize) -> Result<f64> {
    check_probability("p", p)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::param("t", t, "must be finite and nonnegative"));
    }
    let plateau = ln_steady_state_overlap(p, 1, l)?.exp();
    Ok(asymptotic_decay(p, t).exp() + plateau)
}

/// Log of the decaying term of [`asymptotic_return`].
fn asymptotic_decay(p: f64, t: f64) -> f64 {
    (4.0 * p * p * std::f64::consts::E / PI.sqrt()).ln() + t * (4.0 * p * (1.0 - p)).ln()
        - 1.5 * (2.0 + t).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlateauMethod {
    /// `(4p(1-p))^t = ((1-p)/p)^{2(L-n+1)}`, solved exactly.
    LogLinearIntersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauReport {
    pub plateau_value: f64,
    pub ln_plateau_value: f64,
    pub t_plateau: f64,
    pub method: PlateauMethod,
    /// Crossing of the full decaying asymptote (prefactor and power law
    /// included) with the plateau; only defined for `n = 1`.
    pub t_asymptote_crossing: Option<f64>,
    /// `-2L ln(p(1-p)) / ln(4p(1-p))`, kept for comparison. It is negative for
    /// every `p` because both logarithms are negative.
    pub naive_estimate: f64,
}

pub fn plateau_report(p: f64, n: usize, l: usize) -> Result<PlateauReport> {
    check_probability("p", p)?;
    if p <= 0.5 {
        return Err(Error::param("p", p, "plateau time needs p > 1/2"));
    }
    let ln_pi = ln_steady_state_overlap(p, n, l)?;
    let ln_rate = (4.0 * p * (1.0 - p)).ln();
    let t_plateau = 2.0 * (l - n + 1) as f64 * ((1.0 - p) / p).ln() / ln_rate;
    let t_asymptote_crossing = if n == 1 {
        Some(asymptote_crossing(p, ln_pi))
    } else {
        None
    };
    Ok(PlateauReport {
        plateau_value: ln_pi.exp(),
        ln_plateau_value: ln_pi,
        t_plateau,
        method: PlateauMethod::LogLinearIntersection,
        t_asymptote_crossing,
        naive_estimate: -2.0 * l as f64 * (p * (1.0 - p)).ln() / ln_rate,
    })
}

/// The decaying term is strictly decreasing in `t`, so bisection applies.
fn asymptote_crossing(p: f64, ln_pi: f64) -> f64 {
    let f = |t: f64| asymptotic_decay(p, t) - ln_pi;
    if f(0.0) <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Default fit window `[10, 0.7 t_plateau]` for returns to site `n`.
pub fn default_fit_window(p: f64, n: usize, l: usize) -> Result<(usize, usize)> {
    let r = plateau_report(p, n, l)?;
    Ok((10, (0.7 * r.t_plateau).floor() as usize))
}

fn check_q(q: u32) -> Result<f64> {
    if q < 2 {
        return Err(Error::param("q", q as f64, "local dimension must be at least 2"));
    }
    Ok(q as f64)
}

/// `q^{2(t+x)} C(2t, t+x) / (1+q²)^{2t}`, zero for `|x| > t`.
pub fn product_state_density(q: u32, x: i64, t: u64) -> Result<f64> {
    let q = check_q(q)?;
    Ok(ln_product_density(q, x, t).map_or(0.0, f64::exp))
}

fn ln_product_density(q: f64, x: i64, t: u64) -> Option<f64> {
    if x.unsigned_abs() > t {
        return None;
    }
    let up = (t as i64 + x) as u64;
    let p = q * q / (1.0 + q * q);
    Some(ln_binomial_pmf(2 * t, up, p, 1.0 / (1.0 + q * q)))
}

/// `ln[C(n,k) p^k q^{n-k}]` by Loader's saddle-point expansion, which avoids
/// the cancellation between large log-factorials.
fn ln_binomial_pmf(n: u64, k: u64, p: f64, q: f64) -> f64 {
    if k == 0 {
        return n as f64 * q.ln();
    }
    if k == n {
        return n as f64 * p.ln();
    }
    let (nf, kf) = (n as f64, k as f64);
    let rest = nf - kf;
    stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * p) - bd0(rest, nf * q)
        + 0.5 * (nf / (2.0 * PI * kf * rest)).ln()
}

/// `ln n! - (n + 1/2) ln n + n - ln √(2π)`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let nf = n as f64;
    if n <= 15 {
        let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
        return ln_fact - (nf + 0.5) * nf.ln() + nf - 0.5 * (2.0 * PI).ln();
    }
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// `x ln(x/m) + m - x`, summed as a series when `x ≈ m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `Σ_x ρ'(x,t) q^{-2x}` over `-t ≤ x ≤ t`.
pub fn product_state_connected(q: u32, t: u64) -> Result<f64> {
    let qf = check_q(q)?;
    let ln_q2 = 2.0 * qf.ln();
    let t_i = t as i64;
    Ok((-t_i..=t_i)
        .filter_map(|x| ln_product_density(qf, x, t).map(|l| (l - x as f64 * ln_q2).exp()))
        .sum())
}

/// Treatment of the `(2+t)^{-β}` correction in [`fit_decay_rate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerLaw {
    Fixed(f64),
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub power_exponent: f64,
    pub power_fixed: bool,
    pub log_prefactor: f64,
    pub fit_window: (usize, usize),
    /// RMS of the log residuals.
    pub residual: f64,
}

/// Least squares on `ln ρ(t) = A - ḡ t - β ln(2+t)` for `t` in the
/// inclusive `window`; `series[t]` is the value at time `t`.
pub fn fit_decay_rate(series: &[f64], window: (usize, usize), power: PowerLaw) -> Result<DecayFit> {
    let (t0, t1) = window;
    if t1 >= series.len() {
        return Err(Error::InsufficientData(format!(
            "window ends at {t1} but the series has {} points",
            series.len()
        )));
    }
    let needed = if matches!(power, PowerLaw::Free) { 3 } else { 2 };
    if t1 < t0 || t1 - t0 + 1 < needed + 1 {
        return Err(Error::InsufficientData(format!(
            "window [{t0}, {t1}] too short for {needed} parameters"
        )));
    }
    let mut ts = Vec::with_capacity(t1 - t0 + 1);
    let mut ys = Vec::with_capacity(t1 - t0 + 1);
    for (t, &v) in series.iter().enumerate().take(t1 + 1).skip(t0) {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InsufficientData(format!("series value {v} at t={t} is not positive")));
        }
        ts.push(t as f64);
        ys.push(v.ln());
    }
    let logs: Vec<f64> = ts.iter().map(|t| (2.0 + t).ln()).collect();

    let (rate, beta, prefactor) = match power {
        PowerLaw::Fixed(beta) => {
            let z: Vec<f64> = ys.iter().zip(&logs).map(|(y, l)| y + beta * l).collect();
            let (intercept, slope) = line_fit(&ts, &z);
            (-slope, beta, intercept)
        }
        PowerLaw::Free => {
            let (intercept, c_t, c_l) = plane_fit(&ts, &logs, &ys)?;
            (-c_t, -c_l, intercept)
        }
    };
    let sse: f64 = ts
        .iter()
        .zip(&logs)
        .zip(&ys)
        .map(|((t, l), y)| (y - (prefactor - rate * t - beta * l)).powi(2))
        .sum();
    Ok(DecayFit {
        rate,
        power_exponent: beta,
        power_fixed: matches!(power, PowerLaw::Fixed(_)),
        log_prefactor: prefactor,
        fit_window: window,
        residual: (sse / ts.len() as f64).sqrt(),
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Returns `(intercept, slope)`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// `y ≈ c0 + c1 u + c2 v` via centered normal equations.
fn plane_fit(u: &[f64], v: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let (mu, mv, my) = (mean(u), mean(v), mean(y));
    let (mut suu, mut svv, mut suv, mut suy, mut svy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((a, b), c) in u.iter().zip(v).zip(y) {
        let (a, b, c) = (a - mu, b - mv, c - my);
        suu += a * a;
        svv += b * b;
        suv += a * b;
        suy += a * c;
        svy += b * c;
    }
    let det = suu * svv - suv * suv;
    if !(det.abs() > 1e-14 * suu * svv) {
        return Err(Error::InsufficientData("regressors are collinear on this window".into()));
    }
    let c1 = (suy * svv - svy * suv) / det;
    let c2 = (svy * suu - suy * suv) / det;
    Ok((my - c1 * mu - c2 * mv, c1, c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{build_dissipation, build_transfer, Weighted};
    use crate::spectral::steady_state_overlap;

    #[test]
    fn delta_start_and_mass_conservation() {
        let t = build_transfer(0.8, 50).unwrap();
        let ev = evolve_density(&t, 3, 10_000, &[0, 7]).unwrap();
        assert_eq!(ev.checkpoints[0].values[2], 1.0);
        assert_eq!(ev.checkpoints[0].total_mass, 1.0);
        assert_eq!(ev.checkpoints[1].t, 7);
        assert!(ev.masses.iter().all(|m| (m - 1.0).abs() < 1e-12));
        assert!(evolve_density(&t, 51, 1, &[]).is_err());
    }

    #[test]
    fn dissipative_mass_decreases() {
        let t = build_transfer(0.8, 80).unwrap();
        let w = build_dissipation(0.01, 1.0, 80).unwrap();
        let pt = Weighted::new(&w, &t).unwrap();
        let ev = evolve_density(&pt, 1, 300, &[]).unwrap();
        assert!(ev.masses.windows(2).all(|m| m[1] <= m[0]));
    }

    #[test]
    fn spectral_sum_is_complete_at_t0() {
        for &(p, l) in &[(0.75, 28), (0.8, 100), (0.6, 13)] {
            assert!((spectral_return_sum(p, l, 0).unwrap() - 1.0).abs() < 1e-12);
            for n in [1, l / 2, l] {
                assert!((spectral_return(p, n, l, 0).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_sum_matches_evolution() {
        let (p, l) = (0.75, 28);
        let ev = evolve_density(&build_transfer(p, l).unwrap(), 1, 60, &[]).unwrap();
        for t in [1, 5, 30, 60] {
            let s = spectral_return_sum(p, l, t).unwrap();
            assert!((s - ev.series[t]).abs() < 1e-10 * ev.series[t].max(1e-300) + 1e-15);
            let g = spectral_return(p, 1, l, t).unwrap();
            assert!((g - s).abs() <= 1e-12 * s);
        }
    }

    #[test]
    fn asymptote_tends_to_plateau() {
        let plateau = steady_state_overlap(0.75, 1, 28).unwrap();
        let v = asymptotic_return(0.75, 1e5, 28).unwrap();
        assert!((v / plateau - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plateau_numbers() {
        let r = plateau_report(0.75, 1, 28).unwrap();
        assert!((r.t_plateau - 213.86).abs() < 0.01, "{}", r.t_plateau);
        assert!((r.plateau_value - 1.528e-26).abs() < 1e-29);
        assert!(r.naive_estimate < 0.0);
        let cross = r.t_asymptote_crossing.unwrap();
        assert!(cross > 150.0 && cross < r.t_plateau);
        let r2 = plateau_report(0.75, 1, 56).unwrap();
        assert!((r2.t_plateau - 2.0 * r.t_plateau).abs() < 1e-9);
    }

    #[test]
    fn product_state_values() {
        assert!((product_state_density(2, 1, 1).unwrap() - 0.64).abs() < 1e-14);
        assert!((product_state_density(2, -1, 1).unwrap() - 0.04).abs() < 1e-14);
        assert_eq!(product_state_density(2, 3, 2).unwrap(), 0.0);
        assert!((product_state_connected(3, 2).unwrap() - 0.1296).abs() < 1e-14);
        assert!((product_state_connected(2, 3).unwrap() - 0.262144).abs() < 1e-14);
        assert!((product_state_connected(2, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!(product_state_density(1, 0, 1).is_err());
    }

    #[test]
    fn binomial_pmf_small_cases() {
        let exact = |n: u64, k: u64, p: f64| {
            let c: f64 = (1..=k).map(|i| (n - k + i) as f64 / i as f64).product();
            c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
        };
        for n in [1u64, 2, 7, 20, 40] {
            for k in 0..=n {
                let got = ln_binomial_pmf(n, k, 0.3, 0.7).exp();
                let want = exact(n, k, 0.3);
                assert!((got / want - 1.0).abs() < 1e-13, "n={n} k={k}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn fit_recovers_own_model() {
        let p = 0.8;
        let series: Vec<f64> = (0..200).map(|t| asymptotic_decay(p, t as f64).exp()).collect();
        let fit = fit_decay_rate(&series, (10, 150), PowerLaw::Fixed(1.5)).unwrap();
        assert!((fit.rate + (0.64f64).ln()).abs() < 1e-10);
        let free = fit_decay_rate(&series, (10, 150), PowerLaw::Free).unwrap();
        assert!((free.rate + (0.64f64).ln()).abs() < 1e-8);
        assert!((free.power_exponent - 1.5).abs() < 1e-6);
        assert!(fit.residual < 1e-10);
    }

    #[test]
    fn fit_rejects_bad_windows() {
        let s = vec![1.0, 0.5, 0.25, 0.0, 0.1];
        assert!(fit_decay_rate(&s, (0, 4), PowerLaw::Fixed(0.0)).is_err());
        assert!(fit_decay_rate(&s, (0, 9), PowerLaw::Fixed(0.0)).is_err());
        assert!(fit_decay_rate(&s, (0, 1), PowerLaw::Fixed(0.0)).is_err());
        let ok = fit_decay_rate(&s, (0, 2), PowerLaw::Fixed(0.0)).unwrap();
        assert!((ok.rate - 2f64.ln()).abs() < 1e-14);
    }
}
