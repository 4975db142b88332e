use neel_core::{
    degree_of, energy, gradient, initial_ansatz, wall_locations, FieldParam, Grid, Profile, WindingNumber,
};
use proptest::prelude::*;
use tempfile::TempDir;

fn degrees() -> impl Strategy<Value = WindingNumber> {
    prop_oneof![
        Just(WindingNumber::plus_alpha(0)),
        Just(WindingNumber::minus_alpha(1)),
        Just(WindingNumber::integer(1)),
        Just(WindingNumber::plus_alpha(1)),
        Just(WindingNumber::minus_alpha(2)),
        Just(WindingNumber::integer(2)),
    ]
}

/// An ansatz with walls at sorted random positions inside `[−10, 10]`.
fn ansatz(h: f64, d: WindingNumber, seeds: &[f64], scale: f64) -> Profile {
    let p = FieldParam::new(h).unwrap();
    let g = Grid::new(25.0, 251).unwrap();
    let count = neel_core::profile::crossing_values(&d.normalized(&p), &p).len();
    let mut xs: Vec<f64> = (0..count).map(|i| -10.0 + 20.0 * seeds[i % seeds.len()] + 0.01 * i as f64).collect();
    xs.sort_by(f64::total_cmp);
    initial_ansatz(&d, &p, &g, &xs, scale).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ansatz_carries_its_degree(h in 0.3f64..0.99, d in degrees(), seeds in prop::collection::vec(0.0f64..1.0, 5)) {
        let prof = ansatz(h, d, &seeds, 1.0);
        prop_assert_eq!(degree_of(&prof).unwrap(), d);
        prop_assert!(prof.is_clamped());
    }

    #[test]
    fn energy_terms_are_nonnegative(h in 0.3f64..1.0, d in degrees(), seeds in prop::collection::vec(0.0f64..1.0, 5), scale in 0.3f64..3.0) {
        let p = FieldParam::new(h).unwrap();
        prop_assume!(!(p.is_unit() && d.expr().alpha != 0));
        let e = energy(&ansatz(h, d, &seeds, scale));
        prop_assert!(e.exchange >= 0.0 && e.anisotropy >= 0.0 && e.stray >= 0.0);
        prop_assert!((e.total - (e.exchange + e.anisotropy + e.stray)).abs() <= 1e-12 * e.total);
    }

    #[test]
    fn gradient_matches_central_differences(
        h in 0.3f64..0.99, d in degrees(), seeds in prop::collection::vec(0.0f64..1.0, 5), dir in prop::collection::vec(-1.0f64..1.0, 251),
    ) {
        let prof = ansatz(h, d, &seeds, 1.0);
        let g = gradient(&prof);
        prop_assert_eq!(g.len(), 249);
        let mut v = dir;
        v[0] = 0.0;
        v[250] = 0.0;
        let eps = 1e-5;
        let shifted = |s: f64| {
            let phi: Vec<f64> = prof.phi().iter().zip(&v).map(|(a, b)| a + s * b).collect();
            energy(&prof.with_phi(phi).unwrap()).total
        };
        let fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
        // the gradient covers the interior nodes only
        let an: f64 = g.iter().zip(&v[1..250]).map(|(a, b)| a * b).sum();
        prop_assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "fd {} analytic {}", fd, an);
    }

    #[test]
    fn ansatz_wall_count(h in 0.3f64..0.99, d in degrees(), seeds in prop::collection::vec(0.0f64..1.0, 5)) {
        let p = FieldParam::new(h).unwrap();
        let prof = ansatz(h, d, &seeds, 0.5);
        let walls = wall_locations(&prof);
        prop_assert_eq!(walls.len(), neel_core::degree::expected_wall_count(&d, &p));
    }
}

#[test]
fn snapshot_round_trip() {
    let prof = ansatz(0.9, WindingNumber::minus_alpha(2), &[0.2, 0.5, 0.8], 1.0);
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("p.csv");
    prof.write_csv(&path).unwrap();
    let back = Profile::read_csv(&path, *prof.params()).unwrap();
    assert_eq!(back.degree(), prof.degree());
    assert_eq!(back.len(), prof.len());
    for (a, b) in back.phi().iter().zip(prof.phi()) {
        assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
    }
}

#[test]
fn snapshot_with_wrong_ends_is_rejected() {
    let prof = ansatz(0.9, WindingNumber::plus_alpha(0), &[0.5], 1.0);
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("p.csv");
    prof.write_csv(&path).unwrap();
    // reading at another field moves the wells away from the stored ends
    assert!(Profile::read_csv(&path, FieldParam::new(0.5).unwrap()).is_err());
}
