use std::f64::consts::PI;
use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SampledField;
use crate::error::{NeelError, Result};
use crate::grid::Grid;
use crate::profile::fmt_num;

/// Harmonic extension `v(x₁, x₂)` of a sampled field on a set of horizontal
/// layers. Column `c` sits at `x₁ = −L + c Δ`; columns may extend past the
/// source grid, where `f` is taken to be zero.
#[derive(Debug, Clone)]
pub struct ExtensionSlab {
    grid: Grid,
    columns: Range<isize>,
    heights: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl ExtensionSlab {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn columns(&self) -> Range<isize> {
        self.columns.clone()
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// `values()[layer][col]`, `col` counted from the first column.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn layer(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn x(&self, col: usize) -> f64 {
        -self.grid.half_width() + (self.columns.start + col as isize) as f64 * self.grid.spacing()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes `x,x2,v` rows, one per column and layer.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "x2", "v"])?;
        for (layer, y) in self.values.iter().zip(&self.heights) {
            for (c, v) in layer.iter().enumerate() {
                w.write_record([fmt_num(self.x(c)), fmt_num(*y), fmt_num(*v)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Layer heights `first, first·r, first·r², …` up to and including `top`.
pub fn geometric_heights(first: f64, ratio: f64, top: f64) -> Vec<f64> {
    assert!(first > 0.0 && ratio > 1.0 && top >= first);
    let mut out = vec![first];
    loop {
        let next = out[out.len() - 1] * ratio;
        if next >= top * (1.0 - 1e-12) {
            out.push(top);
            break;
        }
        out.push(next);
    }
    if out.len() >= 2 && out[out.len() - 2] >= top {
        out.pop();
    }
    out
}

/// Weights of the left and right half hat functions at lattice offset `m`
/// against the Poisson kernel `y / (π (u² + y²))`, integrated exactly.
fn hat_weights(m: isize, dx: f64, y: f64) -> (f64, f64) {
    // ∫_p^q K = atan2(y (q − p), y² + p q) / π
    let i0 = |p: f64, q: f64| (y * (q - p)).atan2(y * y + p * q) / PI;
    // ∫_p^q u K = (y / 2π) ln((q² + y²) / (p² + y²))
    let i1 = |p: f64, q: f64| y / (2.0 * PI) * ((q * q - p * p) / (p * p + y * y)).ln_1p();
    let c = m as f64 * dx;
    let (p, q) = (c - dx, c);
    let left = (i1(p, q) - p * i0(p, q)) / dx;
    let (p, q) = (c, c + dx);
    let right = (q * i0(p, q) - i1(p, q)) / dx;
    (left, right)
}

/// Kernel table over the offsets `m = j − c` met by `columns`, with the
/// lowest offset.
fn kernel_table(n: isize, dx: f64, y: f64, columns: &Range<isize>) -> (isize, Vec<(f64, f64)>) {
    let lo = -(columns.end - 1);
    let hi = n - 1 - columns.start;
    (lo, (lo..=hi).map(|m| hat_weights(m, dx, y)).collect())
}

/// Direct evaluation of one layer; the reference for [`LayerConvolver`].
#[cfg(test)]
fn extend_layer_direct(f: &[f64], dx: f64, y: f64, columns: &Range<isize>) -> Vec<f64> {
    let n = f.len() as isize;
    let (lo, table) = kernel_table(n, dx, y, columns);
    columns
        .clone()
        .map(|c| {
            let mut acc = 0.0;
            for (j, fj) in f.iter().enumerate() {
                let (l, r) = table[(j as isize - c - lo) as usize];
                let w = if j == 0 {
                    r
                } else if j as isize == n - 1 {
                    l
                } else {
                    l + r
                };
                acc += w * fj;
            }
            acc
        })
        .collect()
}

/// One layer is the correlation `v_c = Σ_j f_j K(j − c)` with `K = L + R`
/// (only `R` at the first node, only `L` at the last), done by FFT.
struct LayerConvolver {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    size: usize,
    /// Transform of the reversed source.
    source: Vec<Complex64>,
}

impl LayerConvolver {
    fn new(f: &[f64], columns: &Range<isize>) -> Self {
        let n = f.len();
        let span = n + columns.len() - 1;
        let size = (n + span).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut source = vec![Complex64::new(0.0, 0.0); size];
        for (k, v) in f.iter().rev().enumerate() {
            source[k].re = *v;
        }
        forward.process(&mut source);
        Self {
            forward,
            inverse,
            size,
            source,
        }
    }

    fn layer(&self, f: &[f64], dx: f64, y: f64, columns: &Range<isize>) -> Vec<f64> {
        let n = f.len() as isize;
        let (lo, table) = kernel_table(n, dx, y, columns);
        let mut g = vec![Complex64::new(0.0, 0.0); self.size];
        for (t, (l, r)) in table.iter().enumerate() {
            g[t].re = l + r;
        }
        self.forward.process(&mut g);
        for (a, b) in g.iter_mut().zip(&self.source) {
            *a *= b;
        }
        self.inverse.process(&mut g);
        let scale = 1.0 / self.size as f64;
        // with i' = cols − 1 − i the sum is (reversed f ∗ K)[n − 1 + i']
        let ncols = columns.len() as isize;
        columns
            .clone()
            .enumerate()
            .map(|(i, c)| {
                let full = g[(n - 1 + ncols - 1 - i as isize) as usize].re * scale;
                let first = f[0] * table[(-c - lo) as usize].0;
                let last = f[(n - 1) as usize] * table[(n - 1 - c - lo) as usize].1;
                full - first - last
            })
            .collect()
    }
}

/// Poisson extension `v = (x₂/π) ∫ f(t) / ((t − x₁)² + x₂²) dt` of the
/// piecewise-linear interpolant of `f` on every grid column.
pub fn poisson_extend(f: &SampledField, heights: &[f64]) -> Result<ExtensionSlab> {
    poisson_extend_columns(f, heights, 0..f.len() as isize)
}

pub fn poisson_extend_columns(f: &SampledField, heights: &[f64], columns: Range<isize>) -> Result<ExtensionSlab> {
    if heights.is_empty() {
        return Err(NeelError::Slab("no layers requested".into()));
    }
    if heights.iter().any(|y| !(*y > 0.0 && y.is_finite())) {
        return Err(NeelError::Slab("heights must be positive and finite".into()));
    }
    if heights.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NeelError::Slab("heights must be strictly increasing".into()));
    }
    if columns.is_empty() {
        return Err(NeelError::Slab("empty column range".into()));
    }
    let dx = f.grid().spacing();
    let conv = LayerConvolver::new(f.values(), &columns);
    let values = heights
        .par_iter()
        .map(|&y| conv.layer(f.values(), dx, y, &columns))
        .collect();
    Ok(ExtensionSlab {
        grid: *f.grid(),
        columns,
        heights: heights.to_vec(),
        values,
    })
}

/// Layout of the slab used for the Dirichlet energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabSpec {
    pub first_height: f64,
    pub ratio: f64,
    pub top: f64,
    /// Extra zero-source columns on each side, as a fraction of `N`.
    pub lateral_fraction: f64,
}

impl SlabSpec {
    /// First layer at `Δ/2`, ratio 1.15, top at `L/4`, half a grid of
    /// extra columns on each side.
    pub fn for_grid(g: &Grid) -> Self {
        Self {
            first_height: 0.5 * g.spacing(),
            ratio: 1.15,
            top: 0.25 * g.half_width(),
            lateral_fraction: 0.5,
        }
    }
}

/// Dirichlet energy of the extension split into the resolved slab and the
/// part above the top layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionEnergy {
    pub slab: f64,
    pub top_remainder: f64,
    pub total: f64,
}

/// `∫_{ℝ²₊} |∇v|²` by finite differences on the Poisson extension.
///
/// Cells between consecutive layers and columns contribute the average of
/// the squared differences along their edges. The energy above the top
/// layer `Y` equals `−∫ v ∂₂v dx` there (Green's identity for a decaying
/// harmonic function) and is added as a correction; if it exceeds 5% of the
/// total the slab is considered too short.
pub fn dirichlet_energy_extension(f: &SampledField, spec: &SlabSpec) -> Result<ExtensionEnergy> {
    if f.values().iter().all(|v| *v == 0.0) {
        return Ok(ExtensionEnergy {
            slab: 0.0,
            top_remainder: 0.0,
            total: 0.0,
        });
    }
    let dx = f.grid().spacing();
    let n = f.len() as isize;
    let extra = (spec.lateral_fraction * n as f64).round() as isize;
    let columns = -extra..n + extra;
    let heights = geometric_heights(spec.first_height, spec.ratio, spec.top);
    let slab = poisson_extend_columns(f, &heights, columns.clone())?;

    let base: Vec<f64> = columns
        .clone()
        .map(|c| if (0..n).contains(&c) { f.values()[c as usize] } else { 0.0 })
        .collect();
    let mut layers: Vec<&[f64]> = vec![&base];
    layers.extend(slab.values().iter().map(|l| l.as_slice()));
    let mut ys = vec![0.0];
    ys.extend_from_slice(&heights);

    let band = |lo: &[f64], hi: &[f64], dy: f64| -> f64 {
        let mut s = 0.0;
        for i in 0..lo.len() - 1 {
            let vy = ((hi[i] - lo[i]).powi(2) + (hi[i + 1] - lo[i + 1]).powi(2)) / (2.0 * dy * dy);
            let vx = ((lo[i + 1] - lo[i]).powi(2) + (hi[i + 1] - hi[i]).powi(2)) / (2.0 * dx * dx);
            s += (vx + vy) * dx * dy;
        }
        s
    };
    let interior: f64 = (0..layers.len() - 1)
        .map(|k| band(layers[k], layers[k + 1], ys[k + 1] - ys[k]))
        .sum();

    let k = layers.len() - 1;
    let dy = ys[k] - ys[k - 1];
    let top_remainder: f64 = -layers[k]
        .iter()
        .zip(layers[k - 1])
        .map(|(v, w)| v * (v - w) / dy)
        .sum::<f64>()
        * dx;
    let total = interior + top_remainder;
    let fraction = top_remainder.abs() / total.abs().max(f64::MIN_POSITIVE);
    if fraction > 0.05 {
        return Err(NeelError::ExtensionNotConverged {
            remainder: top_remainder,
            fraction: 100.0 * fraction,
        });
    }
    Ok(ExtensionEnergy {
        slab: interior,
        top_remainder,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentzian(half_width: f64, n: usize) -> SampledField {
        SampledField::from_fn(Grid::new(half_width, n).unwrap(), |x| 1.0 / (1.0 + x * x))
    }

    #[test]
    fn hat_weights_partition_the_kernel_mass() {
        // The hats sum to one, so the weights integrate the kernel over the lattice span.
        let (dx, y) = (0.1, 0.37);
        let total: f64 = (-20000..=20000)
            .map(|m| {
                let (l, r) = hat_weights(m, dx, y);
                l + r
            })
            .sum();
        let exact = 2.0 / PI * (2000.0f64 / y).atan();
        assert!((total - exact).abs() < 1e-8, "{total} vs {exact}");
    }

    #[test]
    fn zero_field_gives_zero_slab() {
        let f = SampledField::zeros(Grid::new(5.0, 51).unwrap());
        let s = poisson_extend(&f, &[0.1, 1.0]).unwrap();
        assert_eq!(s.sup_abs(), 0.0);
        let e = dirichlet_energy_extension(&f, &SlabSpec::for_grid(f.grid())).unwrap();
        assert_eq!(e.total, 0.0);
    }

    #[test]
    fn lorentzian_extension_closed_form() {
        let f = lorentzian(200.0, 4001);
        let s = poisson_extend(&f, &[1.0]).unwrap();
        let c = f.grid().center_index();
        for off in [0usize, 10, 50, 300] {
            let x = s.x(c + off);
            let exact = 2.0 / (x * x + 4.0);
            assert!((s.layer(0)[c + off] - exact).abs() < 5e-4 * exact, "x={x}");
        }
    }

    #[test]
    fn lorentzian_dirichlet_energy() {
        let f = lorentzian(200.0, 4001);
        let e = dirichlet_energy_extension(&f, &SlabSpec::for_grid(f.grid())).unwrap();
        let target = PI / 4.0;
        assert!((e.total - target).abs() < 0.03 * target, "{e:?}");
    }

    #[test]
    fn fft_layers_match_direct_sums() {
        let g = Grid::new(7.0, 141).unwrap();
        let f = SampledField::from_fn(g, |x| (1.3 * x).sin() * (-0.1 * x * x).exp() + 0.2);
        for cols in [0..141isize, -30..171, 40..60] {
            let s = poisson_extend_columns(&f, &[0.05, 0.7, 9.0], cols.clone()).unwrap();
            for (k, y) in [0.05, 0.7, 9.0].iter().enumerate() {
                let direct = extend_layer_direct(f.values(), g.spacing(), *y, &cols);
                for (a, b) in s.layer(k).iter().zip(&direct) {
                    assert!((a - b).abs() < 1e-12, "y={y}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_heights() {
        let f = lorentzian(10.0, 101);
        assert!(poisson_extend(&f, &[]).is_err());
        assert!(poisson_extend(&f, &[1.0, 0.5]).is_err());
        assert!(poisson_extend(&f, &[0.0]).is_err());
    }

    #[test]
    fn geometric_heights_end_at_top() {
        let h = geometric_heights(0.05, 1.15, 50.0);
        assert_eq!(*h.last().unwrap(), 50.0);
        assert!(h.windows(2).all(|w| w[1] > w[0]));
    }
}
