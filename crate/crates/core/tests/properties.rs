use std::f64::consts::PI;

use proptest::prelude::*;

use smcf_core::analysis::{exponents, frequency_envelope, pair_check, Exponent};
use smcf_core::spectral::{dealias, decompose, laplacian, riesz, sobolev_norm, Spectrum};
use smcf_core::{Complex64, Field, Grid};

fn field_from(coeffs: &[(i32, i32, f64, f64)], grid: &Grid) -> Field {
    Field::from_fn(grid, |x| {
        coeffs
            .iter()
            .map(|&(a, b, re, im)| {
                Complex64::new(re, im)
                    * Complex64::from_polar(1.0, a as f64 * x[0] + b as f64 * x[1])
            })
            .sum()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<(i32, i32, f64, f64)>> {
    prop::collection::vec((-7..=7, -7..=7, -1.0..1.0f64, -1.0..1.0f64), 1..6)
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::Infinite),
        (1i64..=40, 1i64..=12).prop_filter_map("p >= 1", |(n, d)| {
            (n >= d).then(|| Exponent::ratio(n, d))
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn riesz_squares_sum_to_identity_off_the_mean(c in coeffs()) {
        let grid = Grid::new(2, 32, 2.0 * PI).unwrap();
        let f = dealias(&field_from(&c, &grid));
        let mut sum = Field::zeros(&grid);
        for a in 0..2 {
            sum += &riesz(&riesz(&f, a).unwrap(), a).unwrap();
        }
        prop_assert!(sum.max_abs_diff(&f.sub_mean()) < 1e-12);
    }

    #[test]
    fn littlewood_paley_bands_resum(c in coeffs()) {
        let grid = Grid::new(2, 32, 2.0 * PI).unwrap();
        let f = field_from(&c, &grid);
        let mut sum = Field::zeros(&grid);
        for b in decompose(&f) {
            sum += &b;
        }
        prop_assert!(sum.max_abs_diff(&f) < 1e-12 * (1.0 + f.norm_linf()));
    }

    #[test]
    fn sobolev_norm_is_monotone_in_index(c in coeffs(), s in 0.0..3.0f64) {
        let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = field_from(&c, &grid);
        prop_assert!(sobolev_norm(&f, s) <= sobolev_norm(&f, s + 0.5) * (1.0 + 1e-14));
    }

    #[test]
    fn laplacian_is_negative_xi_squared(c in coeffs()) {
        let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = field_from(&c, &grid);
        let expect = Spectrum::of(&f).apply(|k| Complex64::new(-grid.xi2(k), 0.0));
        prop_assert!(laplacian(&f).max_abs_diff(&expect) < 1e-10);
    }

    #[test]
    fn envelope_dominates_and_varies_slowly(c in coeffs(), delta in 0.05..1.0f64) {
        let grid = Grid::new(2, 32, 2.0 * PI).unwrap();
        let env = frequency_envelope(&field_from(&c, &grid), 1.0, delta).unwrap();
        prop_assert!(env.dominates());
        prop_assert!(env.is_slowly_varying(1e-12));
    }

    #[test]
    fn pair_scaling_verdict_is_symmetric(q in exponent(), r in exponent(), qt in exponent(), rt in exponent(), d in 3usize..=12) {
        let a = pair_check(q, r, qt, rt, d);
        let b = pair_check(qt, rt, q, r, d);
        prop_assert_eq!(a.scaling, b.scaling);
        prop_assert_eq!(a.acceptable, b.acceptable_tilde);
        prop_assert_eq!(a.admissible, b.admissible_tilde);
    }

    #[test]
    fn exponent_text_round_trips(p in exponent()) {
        let back: Exponent = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }
}

#[test]
fn exponent_tables_verify_for_every_theorem_dimension() {
    for d in 4..=12 {
        let t = exponents(d).unwrap();
        t.verify().unwrap();
        assert!(t.theorem_regime);
        assert!(t.sigma_d > d as f64 / t.r_d_f64());
    }
}
