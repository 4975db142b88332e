use rayon::prelude::*;

use super::SampledField;
use crate::error::Result;

/// Trigamma `ψ₁(x) = Σ_{k≥0} 1/(x+k)²` for `x > 0`.
pub fn trigamma(x: f64) -> f64 {
    assert!(x > 0.0, "trigamma needs a positive argument");
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    // Asymptotic series with Bernoulli coefficients.
    let series = r + 0.5 * r2 + r * r2 * (1.0 / 6.0 - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0))));
    acc + series
}

/// Quadrature of `(1/2π) ∬ |f(x) − f(y)|² / (x − y)² dx dy` for the
/// piecewise-linear interpolant of `f`, extended by zero.
///
/// The `N − 1` cells carry averages `f̄_c` and slopes `s_c`. A cell paired
/// with itself contributes `s_c² Δ²` exactly; distinct cells use the midpoint
/// rule `(f̄_c − f̄_d)² / (c − d)²`. The exterior is tiled by zero cells on
/// the same lattice, so the sum over them is a trigamma value and the result
/// is exactly invariant under translations by whole cells.
pub fn h12_double_integral(f: &SampledField) -> f64 {
    let v = f.values();
    let cells = v.len() - 1;
    let mean: Vec<f64> = v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();

    let diagonal: f64 = v.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();

    // Lag sums in parallel, reduced in lag order for a reproducible result.
    let lags: Vec<f64> = (1..cells)
        .into_par_iter()
        .map(|m| {
            let s: f64 = (0..cells - m).map(|c| (mean[c] - mean[c + m]).powi(2)).sum();
            s / (m * m) as f64
        })
        .collect();
    let off_diagonal = 2.0 * lags.iter().sum::<f64>();

    let exterior: f64 = mean
        .iter()
        .enumerate()
        .map(|(c, fc)| fc * fc * (trigamma((cells - c) as f64) + trigamma((c + 1) as f64)))
        .sum();

    (diagonal + off_diagonal + 2.0 * exterior) / (2.0 * std::f64::consts::PI)
}

/// `⟨f, g⟩_{Ḣ^{1/2}}` by polarisation of [`h12_double_integral`].
pub fn h12_inner_product(f: &SampledField, g: &SampledField) -> Result<f64> {
    let sum = f.combine(g, |a, b| a + b)?;
    let diff = f.combine(g, |a, b| a - b)?;
    Ok(0.25 * (h12_double_integral(&sum) - h12_double_integral(&diff)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn trigamma_values() {
        assert!((trigamma(1.0) - PI * PI / 6.0).abs() < 1e-13);
        assert!((trigamma(0.5) - PI * PI / 2.0).abs() < 1e-12);
        assert!((trigamma(2.0) - (PI * PI / 6.0 - 1.0)).abs() < 1e-13);
        let tail: f64 = (1000..2_000_000).map(|k| 1.0 / (k as f64 * k as f64)).sum::<f64>() + 1.0 / 2_000_000.0;
        assert!((trigamma(1000.0) - tail).abs() < 1e-12);
    }

    #[test]
    fn zero_and_constant_slope_cases() {
        let g = Grid::new(5.0, 51).unwrap();
        assert_eq!(h12_double_integral(&SampledField::zeros(g)), 0.0);
    }

    #[test]
    fn lorentzian_value() {
        let g = Grid::new(200.0, 4001).unwrap();
        let f = SampledField::from_fn(g, |x| 1.0 / (1.0 + x * x));
        let e = h12_double_integral(&f);
        assert!((e - PI / 4.0).abs() < 0.01 * PI / 4.0, "{e}");
    }

    #[test]
    fn whole_cell_translation_invariance() {
        let g = Grid::new(20.0, 401).unwrap();
        let bump = |x: f64| if x.abs() < 3.0 { (1.0 - x * x / 9.0).powi(3) } else { 0.0 };
        let a = SampledField::from_fn(g, bump);
        let shift = 37.0 * g.spacing();
        let b = SampledField::from_fn(g, |x| bump(x - shift));
        assert!((h12_double_integral(&a) - h12_double_integral(&b)).abs() < 1e-10);
    }

    #[test]
    fn polarisation_recovers_norm() {
        let g = Grid::new(10.0, 201).unwrap();
        let f = SampledField::from_fn(g, |x| (-x * x).exp());
        let ip = h12_inner_product(&f, &f).unwrap();
        assert!((ip - h12_double_integral(&f)).abs() < 1e-12);
    }

    #[test]
    fn disjoint_nonnegative_bumps_interact_negatively() {
        let g = Grid::new(30.0, 601).unwrap();
        let f = SampledField::from_fn(g, |x| (1.0 - (x + 15.0).powi(2) / 25.0).max(0.0));
        let h = SampledField::from_fn(g, |x| (1.0 - (x - 15.0).powi(2) / 25.0).max(0.0));
        assert!(h12_inner_product(&f, &h).unwrap() < 0.0);
    }
}
