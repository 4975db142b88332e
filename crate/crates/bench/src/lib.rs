//! Fixtures shared by the benchmarks in `benches/`.

use neel_core::stray::SampledField;
use neel_core::{initial_ansatz, FieldParam, Grid, Profile, WindingNumber};

/// `1 / (1 + x²)` on `[−L, L]` with `n` nodes.
pub fn lorentzian(half_width: f64, n: usize) -> SampledField {
    SampledField::from_fn(Grid::new(half_width, n).expect("odd n"), |x| 1.0 / (1.0 + x * x))
}

/// A three-wall ansatz of degree `2 − α/π` at `h = 0.99`.
pub fn three_wall_start(half_width: f64, n: usize) -> (WindingNumber, FieldParam, Grid, Profile) {
    let p = FieldParam::new(0.99).unwrap();
    let g = Grid::new(half_width, n).expect("odd n");
    let d = WindingNumber::minus_alpha(2);
    let start = initial_ansatz(&d, &p, &g, &[-0.5 * half_width, 0.0, 0.5 * half_width], 1.0).expect("ansatz");
    (d, p, g, start)
}
