use std::fmt::Write as _;

use ophydro::autocorr::{
    asymptotic_return, default_fit_window, evolve_density, fit_decay_rate, plateau_report, DecayFit, PowerLaw,
};
use ophydro::export::{eigenvector_csv, profiles_csv, series_csv, spectrum_csv, Float};
use ophydro::matrices::{
    build_counterexample, build_dissipation, build_symmetric_transfer, build_transfer, build_truncated_block,
    jump_moments,
};
use ophydro::ruc_oracle::{
    compare_to_hydro, run_ruc_ensemble, CellMapping, HydroComparison, MIN_REALIZATIONS, QUBIT_P,
};
use ophydro::spectral::{
    analytic_spectrum, eig_sym_tridiag, leading_eigenvalue, leading_pair, peak_estimate, steady_state_overlap,
    symmetrize_dissipative, symmetrize_tridiagonal, triangular_dissipative_limit, Operator,
};
use ophydro::Tolerances;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{AutocorrArgs, CounterexampleArgs, RucCompareArgs, ScanGammaArgs, SpectrumArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::RunOutput;
use crate::svg::{Plot, Series};

/// Above this size only the leading eigenvalue is computed.
pub const FULL_SPECTRUM_MAX: usize = 4000;

/// Slack allowed on `λ ≤ e^{-cγ} 4p(1-p)` at finite `L`.
fn bound_slack(l: usize) -> f64 {
    10.0 / (l * l) as f64
}

fn params(a: &impl serde::Serialize) -> Value {
    serde_json::to_value(a).expect("arguments serialize")
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn symmetric_eigenvalues(sym: &ophydro::SymTridiagonal) -> ophydro::Result<(Vec<f64>, bool)> {
    if sym.size() <= FULL_SPECTRUM_MAX {
        Ok((eig_sym_tridiag(sym, false)?.eigenvalues, true))
    } else {
        Ok((vec![leading_eigenvalue(Operator::Symmetric(sym), &Tolerances::DEFAULT)?], false))
    }
}

pub fn parse_cprime(s: &str, p: f64) -> CliResult<f64> {
    match s {
        "zero" => Ok(0.0),
        "stochastic" => Ok(p * p),
        v => v
            .parse::<f64>()
            .map_err(|_| invalid(format!("--cprime expects `zero`, `stochastic` or a number, got `{v}`"))),
    }
}

/// `min:max:count` gives a log-spaced grid; anything else is a comma list.
pub fn parse_gamma_grid(s: &str) -> CliResult<Vec<f64>> {
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| invalid(format!("bad number `{v}` in --gamma-grid")))
    };
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(invalid("--gamma-grid range must be `min:max:count`"));
        }
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| invalid(format!("bad count `{}` in --gamma-grid", parts[2])))?;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(invalid("--gamma-grid range needs 0 < min <= max"));
        }
        match count {
            0 => Vec::new(),
            1 => vec![lo],
            n => (0..n)
                .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
                .collect(),
        }
    } else {
        s.split(',').filter(|v| !v.trim().is_empty()).map(num).collect::<CliResult<_>>()?
    };
    if grid.is_empty() {
        return Err(invalid("--gamma-grid is empty"));
    }
    Ok(grid)
}

pub fn spectrum(a: &SpectrumArgs) -> CliResult<RunOutput> {
    let mut run = RunOutput {
        params: params(a),
        ..Default::default()
    };
    let tol = Tolerances::DEFAULT;
    let rate = 4.0 * a.p * (1.0 - a.p);
    if let Some(gamma) = a.gamma {
        let w = build_dissipation(gamma, a.c, a.l)?;
        let sym = symmetrize_dissipative(&build_symmetric_transfer(a.p, a.l)?, &w)?;
        let (eigs, full) = symmetric_eigenvalues(&sym)?;
        let pt = build_transfer(a.p, a.l)?.left_weighted(&w)?;
        let pair = leading_pair(Operator::Banded(&pt), &tol)?;
        run.file("spectrum.csv", spectrum_csv(&eigs, None));
        run.file("eigenvector.csv", eigenvector_csv(&pair.vector, pair.gauge));
        run.summary = json!({
            "operator": "dissipative",
            "leading_eigenvalue": eigs[0],
            "eigenvector_eigenvalue": pair.eigenvalue,
            "eigenvector_residual": pair.residual,
            "argmax": pair.argmax(),
            "peak_estimate": peak_estimate(eigs[0], a.c * gamma).ok(),
            "upper_bound": (-a.c * gamma).exp() * rate,
            "full_spectrum": full,
        });
    } else if let Some(ell) = a.ell {
        if ell > a.l {
            return Err(invalid(format!("--ell {ell} exceeds --L {}", a.l)));
        }
        let c_prime = parse_cprime(&a.cprime, a.p)?;
        let block = build_truncated_block(a.p, ell, c_prime)?;
        let (sym, _) = symmetrize_tridiagonal(&block)?;
        let (eigs, full) = symmetric_eigenvalues(&sym)?;
        run.file("spectrum.csv", spectrum_csv(&eigs, None));
        run.summary = json!({
            "operator": "truncated-block",
            "c_prime": c_prime,
            "stochastic": block.is_stochastic(),
            "leading_eigenvalue": eigs[0],
            "psi": (ell * ell) as f64 * (rate - eigs[0]),
            "full_spectrum": full,
        });
    } else {
        let sym = build_symmetric_transfer(a.p, a.l)?;
        let (eigs, full) = symmetric_eigenvalues(&sym)?;
        let mut analytic = analytic_spectrum(a.p, a.l)?.eigenvalues;
        analytic.sort_by(|x, y| y.total_cmp(x));
        analytic.truncate(eigs.len());
        let max_diff = eigs.iter().zip(&analytic).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        run.file("spectrum.csv", spectrum_csv(&eigs, Some(&analytic)));
        run.summary = json!({
            "operator": "transfer",
            "leading_eigenvalue": eigs[0],
            "max_abs_analytic_error": max_diff,
            "full_spectrum": full,
        });
    }
    Ok(run)
}

pub fn autocorr(a: &AutocorrArgs) -> CliResult<RunOutput> {
    let mut run = RunOutput {
        params: params(a),
        ..Default::default()
    };
    if a.n == 0 || a.n > a.l {
        return Err(invalid(format!("--n {} must lie in 1..=L ({})", a.n, a.l)));
    }
    let ev = evolve_density(&build_transfer(a.p, a.l)?, a.n, a.steps, &[])?;
    let plateau = steady_state_overlap(a.p, a.n, a.l)?;
    let report = if a.p > 0.5 { Some(plateau_report(a.p, a.n, a.l)?) } else { None };
    let asymptote: Vec<Option<f64>> = (0..=a.steps)
        .map(|t| {
            if a.n == 1 {
                asymptotic_return(a.p, t as f64, a.l).ok()
            } else {
                None
            }
        })
        .collect();
    run.file("series.csv", series_csv(&ev.series, &asymptote, plateau));

    let window = match &a.fit_window {
        Some(w) => {
            if w[1] > a.steps {
                return Err(invalid(format!("--fit-window ends at {} beyond --steps {}", w[1], a.steps)));
            }
            Some((w[0], w[1]))
        }
        None if a.p > 0.5 => {
            let (t0, t1) = default_fit_window(a.p, a.n, a.l)?;
            Some((t0, t1.min(a.steps)))
        }
        None => None,
    };
    let power = PowerLaw::Fixed(if a.n == 1 { 1.5 } else { 0.0 });
    let exact_fit: Option<DecayFit> = match window {
        Some(w) if a.fit_window.is_some() => Some(fit_decay_rate(&ev.series, w, power)?),
        Some(w) => fit_decay_rate(&ev.series, w, power).ok(),
        None => None,
    };
    let asymptote_fit = match (window, exact_fit) {
        (Some(w), Some(_)) if a.n == 1 => {
            let values: Vec<f64> = asymptote.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
            fit_decay_rate(&values, w, power).ok()
        }
        _ => None,
    };
    let reference = -(4.0 * a.p * (1.0 - a.p)).ln();
    if let Some(fit) = &exact_fit {
        let body = json!({
            "exact": fit,
            "asymptote": asymptote_fit,
            "reference_rate": reference,
            "relative_error": fit.rate / reference - 1.0,
        });
        run.file("fit.json", serde_json::to_string_pretty(&body).expect("fit serializes") + "\n");
    }
    let plateau_body = match &report {
        Some(r) => serde_json::to_value(r).expect("plateau serializes"),
        None => json!({ "plateau_value": plateau }),
    };
    run.file(
        "plateau.json",
        serde_json::to_string_pretty(&plateau_body).expect("plateau serializes") + "\n",
    );

    if a.svg {
        let mut series = vec![Series {
            markers: true,
            ..Series::line("exact", points(ev.series.iter().copied()))
        }];
        if a.n == 1 {
            series.push(Series::line(
                "asymptote",
                points(asymptote.iter().map(|v| v.unwrap_or(f64::NAN))),
            ));
        }
        series.push(Series {
            dashed: true,
            ..Series::line("plateau", vec![(0.0, plateau), (a.steps as f64, plateau)])
        });
        let plot = Plot {
            title: format!("return probability, p = {}, L = {}, n = {}", a.p, a.l, a.n),
            x_label: "t".into(),
            y_label: "⟨n|T^t|n⟩".into(),
            log_x: false,
            log_y: true,
            series,
        };
        run.file("series.svg", plot.render());
    }

    run.summary = json!({
        "final_value": ev.series.last(),
        "plateau_value": plateau,
        "t_plateau": report.map(|r| r.t_plateau),
        "fit_window": exact_fit.map(|f| f.fit_window),
        "fitted_rate": exact_fit.map(|f| f.rate),
        "asymptote_rate": asymptote_fit.map(|f| f.rate),
        "reference_rate": reference,
    });
    Ok(run)
}

fn points(values: impl Iterator<Item = f64>) -> Vec<(f64, f64)> {
    values.enumerate().map(|(t, v)| (t as f64, v)).collect()
}

pub fn scan_gamma(a: &ScanGammaArgs) -> CliResult<RunOutput> {
    let mut run = RunOutput {
        params: params(a),
        ..Default::default()
    };
    let grid = parse_gamma_grid(&a.gamma_grid)?;
    if a.l_list.is_empty() {
        return Err(invalid("--L-list is empty"));
    }
    let rate = 4.0 * a.p * (1.0 - a.p);
    let jobs: Vec<(usize, f64)> = a.l_list.iter().flat_map(|&l| grid.iter().map(move |&g| (l, g))).collect();
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(l, g)| {
            let sym = symmetrize_dissipative(&build_symmetric_transfer(a.p, l)?, &build_dissipation(g, a.c, l)?)?;
            leading_eigenvalue(Operator::Symmetric(&sym), &Tolerances::DEFAULT)
        })
        .collect::<ophydro::Result<_>>()?;

    let mut csv = String::from("L,gamma,lambda_max,upper_bound,reference\n");
    for (&(l, g), v) in jobs.iter().zip(&values) {
        writeln!(
            csv,
            "{l},{},{},{},{}",
            Float(g),
            Float(*v),
            Float((-a.c * g).exp() * rate),
            Float(rate)
        )
        .unwrap();
    }
    run.file("scan.csv", csv);

    let mut curves = Vec::new();
    let mut per_l = Vec::new();
    for (i, &l) in a.l_list.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> = grid.iter().copied().zip(values[i * grid.len()..(i + 1) * grid.len()].iter().copied()).collect();
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        let monotone = pts.windows(2).all(|w| w[0].1 >= w[1].1);
        let bound_ok = pts
            .iter()
            .all(|&(g, v)| v <= (-a.c * g).exp() * rate + bound_slack(l));
        per_l.push(json!({
            "L": l,
            "lambda_at_smallest_gamma": pts[0].1,
            "monotone_in_gamma": monotone,
            "within_bound": bound_ok,
        }));
        curves.push(Series::line(format!("L = {l}"), pts));
    }
    if a.svg {
        let (lo, hi) = grid.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &g| (lo.min(g), hi.max(g)));
        curves.push(Series {
            dashed: true,
            ..Series::line("4p(1-p)", vec![(lo, rate), (hi, rate)])
        });
        let plot = Plot {
            title: format!("leading eigenvalue of P(γ)T(p), p = {}", a.p),
            x_label: "γ".into(),
            y_label: "λ_max".into(),
            log_x: grid.iter().all(|&g| g > 0.0),
            log_y: false,
            series: curves,
        };
        run.file("scan.svg", plot.render());
    }
    run.summary = json!({ "reference": rate, "curves": per_l });
    Ok(run)
}

pub fn counterexample(a: &CounterexampleArgs) -> CliResult<RunOutput> {
    let mut run = RunOutput {
        params: params(a),
        ..Default::default()
    };
    if a.epsilon_list.is_empty() {
        return Err(invalid("--epsilon-list is empty"));
    }
    let mut csv = String::from("epsilon,v_b,d,third_moment,eigenvalue_limit,expected_limit\n");
    let mut rows = Vec::new();
    for &eps in &a.epsilon_list {
        let m = build_counterexample(a.p, eps, a.l)?;
        let mo = jump_moments(&m)?;
        let lim = triangular_dissipative_limit(&m)?;
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            Float(eps),
            Float(mo.v_b),
            Float(mo.d),
            Float(mo.higher),
            Float(lim),
            Float(1.0 - a.p - eps)
        )
        .unwrap();
        rows.push((mo, lim, eps));
    }
    let (first, _, _) = rows[0];
    let spread = |f: fn(&ophydro::JumpMoments) -> f64| rows.iter().map(|r| (f(&r.0) - f(&first)).abs()).fold(0.0, f64::max);
    let (dv, dd) = (spread(|m| m.v_b), spread(|m| m.d));
    if dv > 1e-14 || dd > 1e-14 {
        return Err(CliError::Numerical(format!(
            "jump moments vary with epsilon (v_B spread {dv:e}, D spread {dd:e})"
        )));
    }
    run.file("table.csv", csv);
    run.summary = json!({
        "v_b": first.v_b,
        "d": first.d,
        "v_b_spread": dv,
        "d_spread": dd,
        "max_limit_error": rows.iter().map(|r| (r.1 - (1.0 - a.p - r.2)).abs()).fold(0.0, f64::max),
    });
    Ok(run)
}

pub fn ruc_compare(a: &RucCompareArgs) -> CliResult<RunOutput> {
    let mut run = RunOutput {
        params: params(a),
        seeds: vec![a.seed],
        ..Default::default()
    };
    let mapping = CellMapping { offset: a.offset };
    if a.offset > 1 {
        return Err(invalid("--offset must be 0 or 1"));
    }
    let avg = run_ruc_ensemble(a.qubits, a.depth, a.realizations, a.seed)?;
    run.file("profiles.csv", profiles_csv(&avg));
    let v_b = QUBIT_P * QUBIT_P - (1.0 - QUBIT_P) * (1.0 - QUBIT_P);

    let comparison = if a.realizations < MIN_REALIZATIONS {
        Err(format!("at least {MIN_REALIZATIONS} realizations are needed for the hydro comparison"))
    } else if a.depth < mapping.layers_for_step(0) {
        Err(format!("depth must be at least {} for the hydro comparison", mapping.layers_for_step(0)))
    } else {
        Ok(compare_to_hydro(&avg, mapping, QUBIT_P)?)
    };
    let report = match &comparison {
        Ok(c) => {
            run.file("comparison.csv", comparison_csv(c));
            if a.svg {
                run.file("comparison.svg", comparison_plot(c));
            }
            json!({
                "mapping": c.mapping,
                "p": c.p,
                "butterfly_velocity": v_b,
                "front_velocity_ruc": c.front_velocity_ruc,
                "front_velocity_hydro": c.front_velocity_hydro,
                "velocity_relative_error": c.front_velocity_ruc.map(|v| v / v_b - 1.0),
                "max_parseval_error": avg.max_parseval_error,
                "steps": c.steps.iter().map(|s| json!({
                    "step": s.step,
                    "layers": s.layers,
                    "total_variation": s.total_variation,
                    "ruc_mean": s.ruc_mean,
                    "hydro_mean": s.hydro_mean,
                    "ruc_width": s.ruc_width,
                    "hydro_width": s.hydro_width,
                })).collect::<Vec<_>>(),
            })
        }
        Err(reason) => json!({
            "comparison": null,
            "reason": reason,
            "max_parseval_error": avg.max_parseval_error,
        }),
    };
    run.file("report.json", serde_json::to_string_pretty(&report).expect("report serializes") + "\n");
    run.summary = match &comparison {
        Ok(c) => json!({
            "front_velocity_ruc": c.front_velocity_ruc,
            "front_velocity_hydro": c.front_velocity_hydro,
            "butterfly_velocity": v_b,
            "max_total_variation": c.steps.iter().map(|s| s.total_variation).fold(0.0, f64::max),
        }),
        Err(reason) => json!({ "comparison": null, "reason": reason }),
    };
    Ok(run)
}

fn comparison_csv(c: &HydroComparison) -> String {
    let mut s = String::from("step,layers,cell,ruc,hydro\n");
    for st in &c.steps {
        for (i, (r, h)) in st.ruc.iter().zip(&st.hydro).enumerate() {
            writeln!(s, "{},{},{},{},{}", st.step, st.layers, i + 1, Float(*r), Float(*h)).unwrap();
        }
    }
    s
}

fn comparison_plot(c: &HydroComparison) -> String {
    let last = c.steps.last().expect("comparison has steps");
    let cells = |v: &[f64]| v.iter().enumerate().map(|(i, &w)| ((i + 1) as f64, w)).collect();
    Plot {
        title: format!("endpoint weight per cell after {} layers", last.layers),
        x_label: "cell".into(),
        y_label: "weight".into(),
        log_x: false,
        log_y: false,
        series: vec![
            Series {
                markers: true,
                ..Series::line("circuit", cells(&last.ruc))
            },
            Series::line("T(p) walk", cells(&last.hydro)),
        ],
    }
    .render()
}
