//! Evaluators of the `Ḣ^{1/2}` seminorm
//!
//! `‖f‖² = (1/2π) ∬ |f(x) − f(y)|² / (x − y)² dx dy`
//!
//! and of the Dirichlet-to-Neumann map of the harmonic extension to the
//! upper half-plane. Three independent routes are provided: a direct
//! quadrature of the double integral, a Fourier multiplier, and the Dirichlet
//! energy of the Poisson extension.

mod double_integral;
mod extension;
mod spectral;

pub use double_integral::{h12_double_integral, h12_inner_product, trigamma};
pub use extension::{
    dirichlet_energy_extension, geometric_heights, poisson_extend, poisson_extend_columns, ExtensionEnergy, ExtensionSlab, SlabSpec,
};
pub use spectral::{dtn, h12_spectral, SpectralOperator, DEFAULT_PADDING, SPECTRAL_NORMALISATION};

use crate::error::{NeelError, Result};
use crate::grid::Grid;
use crate::profile::Profile;

/// Samples of a scalar field on a grid, taken to vanish outside `[−L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NeelError::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NeelError::InvalidGrid("field samples must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// `m₁ − h` of a profile.
    pub fn from_profile(profile: &Profile) -> Self {
        Self {
            grid: *profile.grid(),
            values: profile.stray_source(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid `∫ |f|^p`.
    pub fn lp_norm_pow(&self, p: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.trapezoid_weight(i) * v.abs().powf(p))
            .sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.lp_norm_pow(1.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm_pow(2.0).sqrt()
    }

    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.trapezoid_weight(i) * v)
            .sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(NeelError::GridMismatch(format!(
                "fields live on grids ({}, {}) and ({}, {})",
                self.grid.half_width(),
                self.grid.len(),
                other.grid.half_width(),
                other.grid.len()
            )))
        }
    }
}
