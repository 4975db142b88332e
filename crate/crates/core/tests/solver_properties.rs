use neel_core::experiments::{lower_bound, solve_degree, SolveSpec};
use neel_core::{minimize, FieldParam, Grid, Init, MinimizeConfig, WindingNumber};
use proptest::prelude::*;

fn small() -> SolveSpec {
    SolveSpec {
        half_width: 40.0,
        point_count: 401,
        ..SolveSpec::default()
    }
}

#[test]
fn unit_field_single_wall_is_above_one() {
    let p = FieldParam::new(1.0).unwrap();
    let r = solve_degree(&WindingNumber::integer(1), &p, &small()).unwrap();
    assert!(r.converged);
    assert!(r.energy() >= 1.0, "{}", r.energy());
    assert_eq!(r.wall_count, 1);
}

#[test]
fn nothing_to_do_for_degree_zero() {
    let p = FieldParam::new(0.7).unwrap();
    let g = Grid::new(20.0, 201).unwrap();
    let r = minimize(&WindingNumber::ZERO, &p, &g, &MinimizeConfig::default(), Init::Default).unwrap();
    assert!(r.converged);
    assert!(r.energy().abs() < 1e-12);
    assert_eq!(r.wall_count, 0);
}

#[test]
fn invalid_solver_settings_are_rejected() {
    let p = FieldParam::new(0.9).unwrap();
    let g = Grid::new(20.0, 201).unwrap();
    let cfg = MinimizeConfig {
        grad_tol: -1.0,
        ..MinimizeConfig::default()
    };
    assert!(minimize(&WindingNumber::plus_alpha(0), &p, &g, &cfg, Init::Default).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn single_wall_respects_lower_bound(h in 0.2f64..0.98) {
        let p = FieldParam::new(h).unwrap();
        let d = WindingNumber::plus_alpha(0);
        let r = solve_degree(&d, &p, &small()).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.monotonic_energy);
        prop_assert!(r.energy_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        prop_assert!(r.energy() >= lower_bound(&d.expr(), &p));
        prop_assert_eq!(r.wall_count, 1);
        prop_assert!(r.equipartition_defect < 0.02);
    }

    #[test]
    fn reflected_degree_has_equal_energy(h in 0.5f64..0.98) {
        let p = FieldParam::new(h).unwrap();
        let a = solve_degree(&WindingNumber::plus_alpha(0), &p, &small()).unwrap();
        let b = solve_degree(&WindingNumber::plus_alpha(0).negated(), &p, &small()).unwrap();
        prop_assert!((a.energy() - b.energy()).abs() < 1e-8 * a.energy());
    }
}
