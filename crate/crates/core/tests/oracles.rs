use ophydro::autocorr::{
    evolve_density, fit_decay_rate, plateau_report, product_state_connected, spectral_return_sum, PowerLaw,
};
use ophydro::matrices::{build_dissipation, build_symmetric_transfer, build_transfer, LinearStep, Weighted};
use ophydro::ruc_oracle::{compare_to_hydro, run_ruc_ensemble, CellMapping, QUBIT_P};
use ophydro::spectral::{leading_eigenvalue, leading_pair, symmetrize_dissipative, Operator};
use ophydro::stochastic_oracle::{ensemble_density, run_ensemble, WalkEnsemble};
use ophydro::Tolerances;

fn lambda(p: f64, l: usize, g: f64) -> f64 {
    let sym = symmetrize_dissipative(
        &build_symmetric_transfer(p, l).unwrap(),
        &build_dissipation(g, 1.0, l).unwrap(),
    )
    .unwrap();
    leading_eigenvalue(Operator::Symmetric(&sym), &Tolerances::DEFAULT).unwrap()
}

#[test]
fn dissipative_eigenvalue_by_power_iteration() {
    let (p, l, g) = (0.8, 500, 0.006);
    let pt = build_transfer(p, l).unwrap().left_weighted(&build_dissipation(g, 1.0, l).unwrap()).unwrap();
    let mut v = vec![0.0; l];
    v[0] = 1.0;
    let mut ratio = 0.0;
    for _ in 0..20_000 {
        let next = pt.apply(&v);
        let mass: f64 = next.iter().sum();
        ratio = mass / v.iter().sum::<f64>();
        v = next.into_iter().map(|x| x / mass).collect();
    }
    let lam = lambda(p, l, g);
    assert!((ratio - lam).abs() < 1e-9, "{ratio} vs {lam}");
    assert!((lam - 0.6107116266).abs() < 1e-9);
    let argmax = v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0 + 1;
    assert_eq!(argmax, 82);
}

#[test]
fn spectral_sum_tracks_evolution_past_plateau() {
    let (p, l) = (0.75, 28);
    let steps = (5.0 * plateau_report(p, 1, l).unwrap().t_plateau) as usize;
    let ev = evolve_density(&build_transfer(p, l).unwrap(), 1, steps, &[]).unwrap();
    for t in (0..=steps).step_by(7) {
        let s = spectral_return_sum(p, l, t).unwrap();
        assert!((ev.series[t] / s - 1.0).abs() < 1e-9, "t={t}");
    }
}

#[test]
fn exact_series_fit_gives_edge_rate() {
    let (p, l) = (0.8, 400);
    let ev = evolve_density(&build_transfer(p, l).unwrap(), 1, 150, &[]).unwrap();
    let fit = fit_decay_rate(&ev.series, (20, 150), PowerLaw::Fixed(1.5)).unwrap();
    let want = -(0.64f64).ln();
    assert!((fit.rate / want - 1.0).abs() < 0.01, "{}", fit.rate);
}

#[test]
fn dissipative_late_window_fit_gives_leading_rate() {
    let (p, l, g) = (0.8, 500, 0.006);
    let t = build_transfer(p, l).unwrap();
    let w = build_dissipation(g, 1.0, l).unwrap();
    let ev = evolve_density(&Weighted::new(&w, &t).unwrap(), 1, 800, &[]).unwrap();
    let fit = fit_decay_rate(&ev.series, (400, 800), PowerLaw::Fixed(0.0)).unwrap();
    let want = -lambda(p, l, g).ln();
    assert!((fit.rate / want - 1.0).abs() < 0.02, "{} vs {want}", fit.rate);
}

#[test]
fn rate_universality() {
    let p = 0.8;
    let ev = evolve_density(&build_transfer(p, 400).unwrap(), 1, 150, &[]).unwrap();
    let pinned = fit_decay_rate(&ev.series, (20, 150), PowerLaw::Fixed(1.5)).unwrap().rate;
    let free_series: Vec<f64> = (0..=150).map(|t| product_state_connected(2, t).unwrap()).collect();
    let free = fit_decay_rate(&free_series, (20, 150), PowerLaw::Free).unwrap().rate;
    let dissipative = -lambda(p, 50_000, 1e-4).ln();
    for (name, r) in [("pinned", pinned), ("product", free), ("dissipative", dissipative)] {
        assert!((r / pinned - 1.0).abs() < 0.02, "{name}: {r} vs {pinned}");
    }
}

#[test]
fn monte_carlo_dissipative_weight_decay() {
    // Walkers start on the leading eigenvector, so the expected weight is λ^t
    // from the first step on.
    let (p, l, g) = (0.8, 30, 0.1);
    let pt = build_transfer(p, l).unwrap().left_weighted(&build_dissipation(g, 1.0, l).unwrap()).unwrap();
    let pair = leading_pair(Operator::Banded(&pt), &Tolerances::DEFAULT).unwrap();
    let mut e = WalkEnsemble::from_density(400_000, &pair.vector, 17).unwrap();
    run_ensemble(&mut e, p, g, 20).unwrap();
    let rate = -ensemble_density(&e).density.total_mass.ln() / 20.0;
    let want = -pair.eigenvalue.ln();
    assert!((rate / want - 1.0).abs() < 0.03, "{rate} vs {want}");
}

#[test]
fn monte_carlo_front_is_diffusive() {
    let mut e = WalkEnsemble::new(200_000, 1, 400, 23).unwrap();
    let width = |e: &WalkEnsemble| {
        let n = e.n_walkers() as f64;
        let m = e.positions().iter().map(|&x| x as f64).sum::<f64>() / n;
        (e.positions().iter().map(|&x| (x as f64 - m).powi(2)).sum::<f64>() / n).sqrt()
    };
    run_ensemble(&mut e, 0.8, 0.0, 50).unwrap();
    let w50 = width(&e);
    run_ensemble(&mut e, 0.8, 0.0, 150).unwrap();
    let w200 = width(&e);
    assert!((w200 / w50 / 2.0 - 1.0).abs() < 0.05, "{w50} {w200}");
    assert!((w200 - (0.32f64 * 200.0).sqrt()).abs() < 0.1);
}

#[test]
fn circuit_profiles_self_average_toward_hydro() {
    let mean_tv = |r: usize| {
        let avg = run_ruc_ensemble(8, 7, r, 5).unwrap();
        let c = compare_to_hydro(&avg, CellMapping { offset: 0 }, QUBIT_P).unwrap();
        c.steps.iter().map(|s| s.total_variation).sum::<f64>() / c.steps.len() as f64
    };
    let few = mean_tv(50);
    let many = mean_tv(800);
    assert!(many < few, "{many} vs {few}");
    assert!(many < 0.03);
}

#[test]
fn circuit_identity_weight_stays_zero_and_cells_match_at_first_step() {
    let avg = run_ruc_ensemble(10, 5, 60, 9).unwrap();
    assert!(avg.mean.iter().all(|p| p.identity_weight.abs() < 1e-12));
    let c = compare_to_hydro(&avg, CellMapping { offset: 0 }, QUBIT_P).unwrap();
    assert!(c.steps[0].total_variation < 1e-12);
    let shifted = compare_to_hydro(&avg, CellMapping { offset: 1 }, QUBIT_P).unwrap();
    assert_eq!(shifted.steps[0].layers, 2);
}
