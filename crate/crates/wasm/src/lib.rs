//! Browser bindings for three interactive views: the leading dissipative
//! eigenstate, the return probability against its asymptote, and the γ-scan.

use ophydro::autocorr::{asymptotic_return, evolve_density, fit_decay_rate, PowerLaw};
use ophydro::matrices::{build_dissipation, build_symmetric_transfer, build_transfer};
use ophydro::spectral::{
    leading_eigenvalue, leading_pair, peak_estimate, steady_state_overlap, symmetrize_dissipative, Operator,
};
use ophydro::Tolerances;
use wasm_bindgen::prelude::*;

/// Largest system the page will build; keeps a slider drag responsive.
pub const MAX_SITES: usize = 5000;
pub const MAX_STEPS: usize = 20_000;

fn check_sites(l: usize) -> ophydro::Result<()> {
    if l > MAX_SITES {
        return Err(ophydro::Error::Unsupported(format!("L = {l} exceeds the demo limit {MAX_SITES}")));
    }
    Ok(())
}

fn js(e: ophydro::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Eigenstate {
    eigenvalue: f64,
    argmax: usize,
    peak_estimate: f64,
    upper_bound: f64,
    vector: Vec<f64>,
}

#[wasm_bindgen]
impl Eigenstate {
    #[wasm_bindgen(getter)]
    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue
    }

    /// 1-based site of the largest entry.
    #[wasm_bindgen(getter)]
    pub fn argmax(&self) -> usize {
        self.argmax
    }

    #[wasm_bindgen(getter, js_name = peakEstimate)]
    pub fn peak_estimate(&self) -> f64 {
        self.peak_estimate
    }

    #[wasm_bindgen(getter, js_name = upperBound)]
    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    /// Unit-sum vector in the original gauge.
    #[wasm_bindgen(getter)]
    pub fn vector(&self) -> Vec<f64> {
        self.vector.clone()
    }
}

pub fn eigenstate(p: f64, l: usize, gamma: f64) -> ophydro::Result<Eigenstate> {
    check_sites(l)?;
    let tol = Tolerances::DEFAULT;
    let w = build_dissipation(gamma, 1.0, l)?;
    let sym = symmetrize_dissipative(&build_symmetric_transfer(p, l)?, &w)?;
    let eigenvalue = leading_eigenvalue(Operator::Symmetric(&sym), &tol)?;
    let pt = build_transfer(p, l)?.left_weighted(&w)?;
    let pair = leading_pair(Operator::Banded(&pt), &tol)?;
    Ok(Eigenstate {
        eigenvalue,
        argmax: pair.argmax(),
        peak_estimate: peak_estimate(eigenvalue, gamma).unwrap_or(f64::NAN),
        upper_bound: (-gamma).exp() * 4.0 * p * (1.0 - p),
        vector: pair.vector,
    })
}

/// Leading eigenpair of `P(γ)T(p)` on `l` sites.
#[wasm_bindgen(js_name = leadingEigenstate)]
pub fn leading_eigenstate(p: f64, l: usize, gamma: f64) -> Result<Eigenstate, JsError> {
    eigenstate(p, l, gamma).map_err(js)
}

#[wasm_bindgen]
pub struct ReturnSeries {
    exact: Vec<f64>,
    asymptote: Vec<f64>,
    plateau: f64,
    fitted_rate: f64,
    reference_rate: f64,
}

#[wasm_bindgen]
impl ReturnSeries {
    /// `⟨1|T^t|1⟩` for `t = 0..=steps`.
    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<f64> {
        self.exact.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn asymptote(&self) -> Vec<f64> {
        self.asymptote.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    /// NaN when the series is too short to fit.
    #[wasm_bindgen(getter, js_name = fittedRate)]
    pub fn fitted_rate(&self) -> f64 {
        self.fitted_rate
    }

    #[wasm_bindgen(getter, js_name = referenceRate)]
    pub fn reference_rate(&self) -> f64 {
        self.reference_rate
    }
}

pub fn return_series(p: f64, l: usize, steps: usize) -> ophydro::Result<ReturnSeries> {
    check_sites(l)?;
    if steps > MAX_STEPS {
        return Err(ophydro::Error::Unsupported(format!("{steps} steps exceeds the demo limit {MAX_STEPS}")));
    }
    let ev = evolve_density(&build_transfer(p, l)?, 1, steps, &[])?;
    let asymptote = (0..=steps)
        .map(|t| asymptotic_return(p, t as f64, l))
        .collect::<ophydro::Result<Vec<_>>>()?;
    let plateau = steady_state_overlap(p, 1, l)?;
    // Fit the pre-plateau part: stop where the series is within a factor 10 of it.
    let end = ev.series.iter().position(|&v| v < 10.0 * plateau).unwrap_or(ev.series.len()).saturating_sub(1);
    let fitted_rate = fit_decay_rate(&ev.series, (10.min(end), end), PowerLaw::Fixed(1.5))
        .map(|f| f.rate)
        .unwrap_or(f64::NAN);
    Ok(ReturnSeries {
        exact: ev.series,
        asymptote,
        plateau,
        fitted_rate,
        reference_rate: -(4.0 * p * (1.0 - p)).ln(),
    })
}

/// Return probability to the first site with the large-`L` asymptote.
#[wasm_bindgen(js_name = returnProbability)]
pub fn return_probability(p: f64, l: usize, steps: usize) -> Result<ReturnSeries, JsError> {
    return_series(p, l, steps).map_err(js)
}

/// `lambda[i * gammas.len() + j]` is the leading eigenvalue for `sizes[i]`
/// and `gammas[j]`, with `gammas` log-spaced over `[gamma_min, gamma_max]`.
#[wasm_bindgen]
pub struct GammaScan {
    gammas: Vec<f64>,
    lambda: Vec<f64>,
}

#[wasm_bindgen]
impl GammaScan {
    #[wasm_bindgen(getter)]
    pub fn gammas(&self) -> Vec<f64> {
        self.gammas.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn lambda(&self) -> Vec<f64> {
        self.lambda.clone()
    }
}

pub fn scan(p: f64, sizes: &[u32], gamma_min: f64, gamma_max: f64, points: usize) -> ophydro::Result<GammaScan> {
    if !(gamma_min > 0.0 && gamma_max > gamma_min) || points < 2 {
        return Err(ophydro::Error::Unsupported(
            "need 0 < gamma_min < gamma_max and at least two points".into(),
        ));
    }
    let (a, b) = (gamma_min.ln(), gamma_max.ln());
    let gammas: Vec<f64> = (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect();
    let mut lambda = Vec::with_capacity(sizes.len() * points);
    for &l in sizes {
        let l = l as usize;
        check_sites(l)?;
        let t = build_symmetric_transfer(p, l)?;
        for &g in &gammas {
            let sym = symmetrize_dissipative(&t, &build_dissipation(g, 1.0, l)?)?;
            lambda.push(leading_eigenvalue(Operator::Symmetric(&sym), &Tolerances::DEFAULT)?);
        }
    }
    Ok(GammaScan { gammas, lambda })
}

#[wasm_bindgen(js_name = gammaScan)]
pub fn gamma_scan(p: f64, sizes: &[u32], gamma_min: f64, gamma_max: f64, points: usize) -> Result<GammaScan, JsError> {
    scan(p, sizes, gamma_min, gamma_max, points).map_err(js)
}
