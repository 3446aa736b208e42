//! CSV and JSON writers. Every CSV has a header row and uses `.` decimals;
//! floats are written with Rust's shortest round-trip formatting so output
//! is reproducible byte for byte.

use std::fmt::{self, Write as _};

use crate::autocorr::DecayFit;
use crate::ruc_oracle::AveragedProfiles;
use crate::spectral::Gauge;
use crate::stochastic_oracle::EnsembleHistogram;

/// Shortest round-trip formatting, switching to exponent notation outside
/// `[1e-4, 1e15)` so tiny plateaus stay readable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Float(pub f64);

impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| Float(x).to_string()).unwrap_or_default()
}

/// `index,eigenvalue[,analytic]`; `analytic` is included when given.
pub fn spectrum_csv(eigenvalues: &[f64], analytic: Option<&[f64]>) -> String {
    let mut s = String::from(if analytic.is_some() {
        "index,eigenvalue,analytic\n"
    } else {
        "index,eigenvalue\n"
    });
    for (i, v) in eigenvalues.iter().enumerate() {
        match analytic {
            Some(a) => writeln!(s, "{i},{},{}", Float(*v), opt(a.get(i).copied())),
            None => writeln!(s, "{i},{}", Float(*v)),
        }
        .unwrap();
    }
    s
}

/// `x,value,gauge` with 1-based sites.
pub fn eigenvector_csv(vector: &[f64], gauge: Gauge) -> String {
    let mut s = String::from("x,value,gauge\n");
    for (i, v) in vector.iter().enumerate() {
        writeln!(s, "{},{},{}", i + 1, Float(*v), gauge.as_str()).unwrap();
    }
    s
}

/// `t,value,analytic_value,plateau` for `t = 0..`.
pub fn series_csv(values: &[f64], analytic: &[Option<f64>], plateau: f64) -> String {
    let mut s = String::from("t,value,analytic_value,plateau\n");
    for (t, v) in values.iter().enumerate() {
        writeln!(s, "{t},{},{},{}", Float(*v), opt(analytic.get(t).copied().flatten()), Float(plateau)).unwrap();
    }
    s
}

/// `x,weight,stderr`.
pub fn histogram_csv(h: &EnsembleHistogram) -> String {
    let mut s = String::from("x,weight,stderr\n");
    for (i, (w, e)) in h.density.values.iter().zip(&h.stderr).enumerate() {
        writeln!(s, "{},{},{}", i + 1, Float(*w), Float(*e)).unwrap();
    }
    s
}

/// `t,x,mean,stderr,realizations`; `t` counts layers, `x` is the 1-based
/// qubit site.
pub fn profiles_csv(avg: &AveragedProfiles) -> String {
    let mut s = String::from("t,x,mean,stderr,realizations\n");
    for (prof, err) in avg.mean.iter().zip(&avg.stderr) {
        for (i, (m, e)) in prof.weights.iter().zip(err).enumerate() {
            writeln!(s, "{},{},{},{},{}", prof.t, i + 1, Float(*m), Float(*e), avg.realizations).unwrap();
        }
    }
    s
}

pub fn decay_fit_json(fit: &DecayFit) -> String {
    serde_json::to_string_pretty(fit).expect("DecayFit serializes")
}
