use std::f64::consts::PI;

use neel_core::stray::{dirichlet_energy_extension, h12_double_integral, h12_spectral, SampledField, SlabSpec, DEFAULT_PADDING};
use neel_core::Grid;
use proptest::prelude::*;

fn gaussian(g: Grid, a: f64, c: f64, w: f64) -> SampledField {
    SampledField::from_fn(g, |x| a * (-((x - c) / w).powi(2)).exp())
}

#[test]
fn lorentzian_value_from_all_evaluators() {
    let f = SampledField::from_fn(Grid::new(200.0, 4001).unwrap(), |x| 1.0 / (1.0 + x * x));
    let target = PI / 4.0;
    let d = h12_double_integral(&f);
    let s = h12_spectral(&f, DEFAULT_PADDING).unwrap();
    let e = dirichlet_energy_extension(&f, &SlabSpec::for_grid(f.grid())).unwrap().total;
    assert!((d - target).abs() < 0.01 * target, "double integral {d}");
    assert!((s - target).abs() < 0.01 * target, "spectral {s}");
    assert!((e - target).abs() < 0.05 * target, "extension {e}");
}

#[test]
fn constants_have_no_energy() {
    let g = Grid::new(10.0, 201).unwrap();
    let z = SampledField::zeros(g);
    assert_eq!(h12_spectral(&z, DEFAULT_PADDING).unwrap(), 0.0);
    assert_eq!(h12_double_integral(&z), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // The seminorm is invariant under dilation, and ‖e^{−x²}‖² = 1.
    #[test]
    fn gaussian_energy_is_amplitude_squared(a in -2.0f64..2.0, c in -5.0f64..5.0, w in 0.6f64..3.0) {
        prop_assume!(a.abs() > 0.05);
        let f = gaussian(Grid::new(40.0, 1601).unwrap(), a, c, w);
        let s = h12_spectral(&f, DEFAULT_PADDING).unwrap();
        let d = h12_double_integral(&f);
        prop_assert!((s - a * a).abs() < 0.01 * a * a, "spectral {} vs {}", s, a * a);
        prop_assert!((d - a * a).abs() < 0.01 * a * a, "double integral {} vs {}", d, a * a);
    }

    #[test]
    fn spectral_form_obeys_parallelogram_law(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, w in 0.5f64..2.0,
    ) {
        let g = Grid::new(20.0, 401).unwrap();
        let f = gaussian(g, a, c1, w);
        let h = gaussian(g, b, c2, 1.5 * w);
        let plus = f.combine(&h, |x, y| x + y).unwrap();
        let minus = f.combine(&h, |x, y| x - y).unwrap();
        let e = |v: &SampledField| h12_spectral(v, DEFAULT_PADDING).unwrap();
        let lhs = e(&plus) + e(&minus);
        let rhs = 2.0 * (e(&f) + e(&h));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-12));
    }

    #[test]
    fn energies_are_nonnegative(vals in prop::collection::vec(-1.0f64..1.0, 41)) {
        let mut v = vals;
        v[0] = 0.0;
        v[40] = 0.0;
        let f = SampledField::new(Grid::new(4.0, 41).unwrap(), v).unwrap();
        prop_assert!(h12_spectral(&f, DEFAULT_PADDING).unwrap() >= 0.0);
        prop_assert!(h12_double_integral(&f) >= 0.0);
    }

    #[test]
    fn double_integral_is_shift_invariant(shift in -40isize..40, w in 0.5f64..2.0) {
        let g = Grid::new(20.0, 401).unwrap();
        let dx = g.spacing();
        let f = gaussian(g, 1.0, 0.0, w);
        let t = gaussian(g, 1.0, shift as f64 * dx, w);
        let (a, b) = (h12_double_integral(&f), h12_double_integral(&t));
        prop_assert!((a - b).abs() < 1e-9 * a, "{} vs {}", a, b);
    }
}
