use std::f64::consts::PI;

use smcf_core::data::{gaussian, single_mode};
use smcf_core::evolution::{
    difference_stability, evolve, free_flow, metric_consistency, scattering_profile,
    schrodinger_rhs, step, Evolution, EvolutionConfig, GaugeMode, Scheme,
};
use smcf_core::gauge::{solve_elliptic_system, EllipticConfig, GaugeState};
use smcf_core::spectral::laplacian;
use smcf_core::{Complex64, Field, Grid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn grid() -> Grid {
    Grid::new(2, 32, 2.0 * PI).unwrap()
}

fn bump(g: &Grid, amp: f64) -> Field {
    gaussian(g, amp, 0.8, &[1.0, 0.0], 2.0).unwrap()
}

#[test]
fn rhs_reductions() {
    let g = grid();
    let trivial = GaugeState::trivial(&g);
    assert_eq!(
        schrodinger_rhs(&Field::zeros(&g), &trivial)
            .unwrap()
            .norm_linf(),
        0.0
    );
    let psi = bump(&g, 1e-2);
    let rhs = schrodinger_rhs(&psi, &trivial).unwrap();
    assert!(rhs.max_abs_diff(&laplacian(&psi).scale_c(I)) < 1e-12);
}

#[test]
fn rhs_correction_is_cubic() {
    // λ ~ ε and every coefficient multiplying it is O(ε²). A single plane
    // wave makes every quadratic source constant, so the correction
    // vanishes identically; two crossing waves do not.
    let g = grid();
    let dev = |eps: f64| {
        let psi = &single_mode(&g, eps, &[1, 0]).unwrap() + &single_mode(&g, eps, &[0, 2]).unwrap();
        let st = solve_elliptic_system(&psi, &EllipticConfig::default()).unwrap();
        let rhs = schrodinger_rhs(&psi, &st).unwrap();
        (&rhs - &laplacian(&psi).scale_c(I)).norm_l2()
    };
    let plane = single_mode(&g, 1e-3, &[1, 0]).unwrap();
    let st = solve_elliptic_system(&plane, &EllipticConfig::default()).unwrap();
    let flat = laplacian(&plane).scale_c(I);
    assert!(schrodinger_rhs(&plane, &st).unwrap().max_abs_diff(&flat) < 1e-15);
    let (a, b) = (dev(5e-4), dev(1e-3));
    let slope = (b / a).log2();
    assert!((slope - 3.0).abs() < 0.1, "{slope}");
}

#[test]
fn trivial_gauge_step_is_free_propagator() {
    let g = grid();
    let psi = bump(&g, 1e-2);
    let mut cfg = EvolutionConfig::for_grid(&g, 1.0);
    cfg.gauge = GaugeMode::Trivial;
    let dt = cfg.dt;
    let (next, _) = step(&psi, &GaugeState::trivial(&g), &cfg, dt, 0.0).unwrap();
    assert!(next.max_abs_diff(&free_flow(&psi, dt)) < 1e-12);
    let back = free_flow(&free_flow(&psi, dt), -dt);
    assert!(back.max_abs_diff(&psi) < 1e-12);
}

fn final_psi(g: &Grid, psi: &Field, dt: f64, scheme: Scheme) -> Field {
    let mut cfg = EvolutionConfig::for_grid(g, 0.1);
    cfg.dt = dt;
    cfg.scheme = scheme;
    cfg.monitor_ks = vec![0];
    let mut ev = Evolution::new(psi, &cfg).unwrap();
    while ev.advance().unwrap() {}
    ev.psi().clone()
}

#[test]
fn both_schemes_are_second_order() {
    let g = grid();
    let psi = bump(&g, 3e-2);
    for scheme in [Scheme::SplitStep, Scheme::ImexRk2] {
        let dt = 0.025;
        let r = final_psi(&g, &psi, dt / 4.0, scheme);
        let e1 = final_psi(&g, &psi, dt, scheme).max_abs_diff(&r);
        let e2 = final_psi(&g, &psi, dt / 2.0, scheme).max_abs_diff(&r);
        let ratio = e1 / e2;
        assert!(
            ratio > 3.0 && ratio < 6.0,
            "{scheme:?}: {e1:e} {e2:e} {ratio}"
        );
    }
}

#[test]
fn zero_data_gives_zero_report() {
    let g = grid();
    let cfg = EvolutionConfig::for_grid(&g, 0.1);
    let r = evolve(&Field::zeros(&g), &cfg).unwrap();
    for s in &r.samples {
        assert!(s.energies.iter().all(|&e| e == 0.0));
        assert_eq!(s.h_sd_norm, 0.0);
        assert_eq!(s.metric_dev, 0.0);
        assert_eq!(s.constraints.max_linf(), 0.0);
    }
    let dev = metric_consistency(&r);
    assert!(dev.iter().all(|&(_, d)| d == 0.0));
}

#[test]
fn trivial_gauge_conserves_mass() {
    let g = grid();
    let mut cfg = EvolutionConfig::for_grid(&g, 1.0);
    cfg.gauge = GaugeMode::Trivial;
    cfg.force_v_zero = true;
    let r = evolve(&bump(&g, 1e-2), &cfg).unwrap();
    let m0 = r.samples[0].l2_norm;
    for s in &r.samples {
        assert!((s.l2_norm - m0).abs() < 1e-10 * m0);
    }
}

#[test]
fn reference_run_monitors() {
    let g = grid();
    let psi = bump(&g, 1e-2);
    let mut cfg = EvolutionConfig::for_grid(&g, 1.0);
    cfg.sample_every = 8;
    let r = evolve(&psi, &cfg).unwrap();
    let h0 = r.samples[0].h_sd_norm;
    assert!(r.sup_h_sd <= 1.1 * h0);
    let c0 = r.samples[0].constraints.max_linf();
    assert!(r
        .samples
        .iter()
        .all(|s| s.constraints.max_linf() <= 100.0 * c0.max(1e-10)));
    assert!(r.max_rho.iter().all(|&m| m <= cfg.c_e_budget));
    for i in 0..3 {
        assert!(r.energy_drift(i).abs() < 0.1);
    }
    assert!(r.strichartz.is_finite() && r.strichartz > 0.0);
    assert!(r.samples.iter().all(|s| s.metric_dev < 1e-6));
    assert!(r.samples.windows(2).all(|w| w[1].t > w[0].t));
}

#[test]
fn runs_are_deterministic_and_resumable() {
    let g = grid();
    let psi = bump(&g, 1e-2);
    let mut cfg = EvolutionConfig::for_grid(&g, 0.1);
    cfg.monitor_ks = vec![0, 1];
    let a = evolve(&psi, &cfg).unwrap();
    let b = evolve(&psi, &cfg).unwrap();
    assert_eq!(a.samples, b.samples);

    let mut ev = Evolution::new(&psi, &cfg).unwrap();
    for _ in 0..4 {
        ev.advance().unwrap();
    }
    let carry = smcf_core::evolution::Carry::from_words(&ev.carry().to_words(), &g).unwrap();
    let mut resumed = Evolution::resume(ev.psi(), carry, &cfg).unwrap();
    while resumed.advance().unwrap() {}
    let tail = &a.samples[a.samples.len() - resumed.report().samples.len()..];
    assert_eq!(tail, resumed.report().samples.as_slice());
}

#[test]
fn difference_stability_reductions() {
    let g = grid();
    let psi = bump(&g, 1e-2);
    let mut cfg = EvolutionConfig::for_grid(&g, 0.2);
    cfg.monitor_ks = vec![0];
    let zero = difference_stability(&psi, &Field::zeros(&g), &cfg).unwrap();
    assert!(zero.ratio.iter().all(|&r| r == 0.0));
    cfg.gauge = GaugeMode::Trivial;
    let dpsi = bump(&g, 1e-5);
    let free = difference_stability(&psi, &dpsi, &cfg).unwrap();
    assert!(free.ratio.iter().all(|&r| (r - 1.0).abs() < 1e-9));
}

#[test]
fn scattering_profile_reductions() {
    let g = grid();
    let psi = bump(&g, 1e-2);
    let samples: Vec<(f64, Field)> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&t| (t, free_flow(&psi, t)))
        .collect();
    let rep = scattering_profile(&samples, 0.0).unwrap();
    assert!(rep.consecutive.iter().all(|&d| d < 1e-12));
    let zeros: Vec<(f64, Field)> = vec![(1.0, Field::zeros(&g)), (2.0, Field::zeros(&g))];
    assert_eq!(
        scattering_profile(&zeros, 0.0).unwrap().consecutive,
        vec![0.0]
    );
    assert!(scattering_profile(&zeros[..1], 0.0).is_err());
}
