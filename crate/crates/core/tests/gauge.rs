use std::f64::consts::PI;

use smcf_core::data::gaussian;
use smcf_core::gauge::{
    linearize_fd, recover_lambda, solve_elliptic_system, solve_metric, EllipticConfig,
};
use smcf_core::geometry::{curvature, harmonic_coordinate_fix, MetricField};
use smcf_core::spectral::{sobolev_norm, Spectrum};
use smcf_core::{Complex64, Field, Grid, SmcfError};

fn grid2() -> Grid {
    Grid::new(2, 32, 2.0 * PI).unwrap()
}

fn bump(g: &Grid, amp: f64) -> Field {
    gaussian(g, amp, 0.8, &[1.0, 0.0], 2.0).unwrap()
}

#[test]
fn zero_data_gives_trivial_state_at_once() {
    let g = grid2();
    let st = solve_elliptic_system(&Field::zeros(&g), &EllipticConfig::default()).unwrap();
    assert_eq!(st.diagnostics.iterations, 1);
    assert_eq!(st.lambda.norm_linf(), 0.0);
    assert_eq!(st.conn.b.norm_linf(), 0.0);
    assert!(st.g.h_comps().iter().all(|h| h.norm_linf() == 0.0));
}

#[test]
fn flat_lambda_is_riesz_transform_of_psi() {
    let g = grid2();
    let psi = bump(&g, 1e-2);
    let lam = recover_lambda(
        &psi,
        &MetricField::flat(&g),
        &[Field::zeros(&g), Field::zeros(&g)],
        &EllipticConfig::default(),
    )
    .unwrap();
    let sp = Spectrum::of(&psi);
    let mu = psi.mean() / 2.0;
    for a in 0..2 {
        for b in 0..2 {
            let mut expect = sp.apply(|k| {
                let x2 = g.xi2(k);
                if k == 0 || !g.keeps(k) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(g.xi(k, a) * g.xi(k, b) / x2, 0.0)
                }
            });
            if a == b {
                expect.axpy(Complex64::new(1.0, 0.0), &Field::constant(&g, mu));
            }
            assert!(lam.get(a, b).max_abs_diff(&expect) < 1e-14, "({a},{b})");
        }
    }
}

#[test]
fn gaussian_solves_converge_with_small_residuals() {
    let g = grid2();
    let st = solve_elliptic_system(&bump(&g, 1e-2), &EllipticConfig::default()).unwrap();
    let d = &st.diagnostics;
    assert!(d.iterations <= 30);
    assert!(d.constraints.max_linf() < 1e-8, "{:?}", d.constraints);
    assert!(d.equations.metric < 1e-8 && d.equations.v < 1e-8 && d.equations.b < 1e-8);
    assert!(d.non_decay.max() < 1e-8);
    assert!(st.g.min_eigenvalue() > 0.99);
}

#[test]
fn amplitude_scaling_of_each_field() {
    // λ is linear in ψ to leading order; h, V, A and B are quadratic.
    let g = grid2();
    let cfg = EllipticConfig::default();
    let s1 = solve_elliptic_system(&bump(&g, 2e-3), &cfg).unwrap();
    let s2 = solve_elliptic_system(&bump(&g, 4e-3), &cfg).unwrap();
    let ratio = |a: f64, b: f64| b / a;
    let r_lam = ratio(s1.lambda.norm_linf(), s2.lambda.norm_linf());
    assert!((r_lam - 2.0).abs() < 1e-2, "{r_lam}");
    let h = |s: &smcf_core::gauge::GaugeState| {
        s.g.h_comps()
            .iter()
            .map(|f| f.norm_linf())
            .fold(0.0, f64::max)
    };
    let r_h = ratio(h(&s1), h(&s2));
    assert!((r_h - 4.0).abs() < 5e-2, "{r_h}");
    let r_b = ratio(s1.conn.b.norm_linf(), s2.conn.b.norm_linf());
    assert!((r_b - 4.0).abs() < 5e-2, "{r_b}");
    let r_v = ratio(s1.conn.v[0].norm_linf(), s2.conn.v[0].norm_linf());
    assert!((r_v - 4.0).abs() < 5e-2, "{r_v}");
}

#[test]
fn metric_curvature_matches_gauss_equation() {
    let g = grid2();
    let psi = bump(&g, 1e-2);
    let st = solve_elliptic_system(&psi, &EllipticConfig::default()).unwrap();
    let curv = curvature(&st.g);
    let lam = &st.lambda;
    // R_{0101} = Re(λ_00 λ̄_11 - λ_01 λ̄_01)
    let expect = lam
        .get(0, 0)
        .zip_map(lam.get(1, 1), |a, b| a * b.conj())
        .zip_map(lam.get(0, 1), |ab, c| {
            Complex64::new((ab - c * c.conj()).re, 0.0)
        });
    let r = curv.riemann(0, 1, 0, 1).unwrap();
    let scale = expect.norm_linf();
    assert!(scale > 1e-7);
    // the remaining gap is the torus mean of the metric source, which is
    // discarded by the periodic inverse Laplacian
    let gap = r.max_abs_diff(&expect);
    assert!(gap < 1e-8 && gap < 1e-2 * scale, "{gap} vs {scale}");
    assert!(gap <= 2.0 * st.diagnostics.non_decay.metric.max(1e-12));
}

#[test]
fn metric_only_solve_is_consistent_with_joint_solve() {
    let g = grid2();
    let psi = bump(&g, 1e-2);
    let cfg = EllipticConfig::default();
    let st = solve_elliptic_system(&psi, &cfg).unwrap();
    let gm = solve_metric(&st.lambda, &psi, &cfg).unwrap();
    for (a, b) in gm.h_comps().iter().zip(st.g.h_comps()) {
        assert!(a.max_abs_diff(b) < 1e-9);
    }
}

#[test]
fn large_data_is_rejected() {
    let g = grid2();
    let err = solve_elliptic_system(&bump(&g, 1.0), &EllipticConfig::default()).unwrap_err();
    assert!(matches!(err, SmcfError::SmallnessViolated { .. }));
}

#[test]
fn linearization_is_consistent() {
    let g = grid2();
    let psi = bump(&g, 1e-2);
    let dpsi = gaussian(&g, 1.0, 0.5, &[0.0, 2.0], 2.0).unwrap();
    let lin = linearize_fd(&psi, &dpsi, &EllipticConfig::default(), 1.0, None).unwrap();
    assert!(lin.summary.richardson_rel < 1e-6, "{:?}", lin.summary);
    assert!(lin.summary.bound_ratio.is_finite() && lin.summary.bound_ratio > 0.0);
    // at leading order the linearized λ is the flat Riesz image of δψ
    let flat = recover_lambda(
        &dpsi,
        &MetricField::flat(&g),
        &[Field::zeros(&g), Field::zeros(&g)],
        &EllipticConfig::default(),
    )
    .unwrap();
    let scale = sobolev_norm(&dpsi, 0.0);
    for (a, b) in lin.lambda.iter().zip(flat.comps()) {
        assert!(a.max_abs_diff(b) < 1e-1 * scale);
    }
}

#[test]
fn harmonic_fix_of_solved_metric_is_trivial() {
    let g = grid2();
    let st = solve_elliptic_system(&bump(&g, 1e-2), &EllipticConfig::default()).unwrap();
    let fix = harmonic_coordinate_fix(&st.g, 1e-13, 100).unwrap();
    let phi = fix.phi.iter().map(|p| p.norm_linf()).fold(0.0, f64::max);
    assert!(phi < 1e-10, "{phi}");
}

#[test]
fn lambda_nonlinearity_is_cubic() {
    // g and A are O(ε²), so λ(εψ) departs from linearity at O(ε³)
    let g = grid2();
    let cfg = EllipticConfig {
        tol: 1e-15,
        ..Default::default()
    };
    let lam = |eps: f64| solve_elliptic_system(&bump(&g, eps), &cfg).unwrap().lambda;
    let base_eps = 1e-4;
    let base = lam(base_eps);
    let dev = |eps: f64| {
        let l = lam(eps);
        l.comps()
            .iter()
            .zip(base.comps())
            .map(|(a, b)| (a - &b.scale(eps / base_eps)).norm_l2())
            .fold(0.0, f64::max)
    };
    let ratio = dev(1e-2) / dev(5e-3);
    assert!((ratio.log2() - 3.0).abs() < 0.1, "{ratio}");
}

#[test]
fn response_ratio_is_flat_across_amplitudes() {
    let g = grid2();
    let cfg = EllipticConfig::default();
    let ratios: Vec<f64> = [1e-3, 3e-3, 1e-2, 3e-2, 5e-2]
        .iter()
        .map(|&e| {
            let psi = bump(&g, e);
            let st = solve_elliptic_system(&psi, &cfg).unwrap();
            smcf_core::gauge::lambda_norm(&st.lambda, 2.0) / sobolev_norm(&psi, 2.0)
        })
        .collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::MAX, 0.0_f64), |(l, h), &r| (l.min(r), h.max(r)));
    assert!(hi / lo <= 2.0, "{ratios:?}");
}
