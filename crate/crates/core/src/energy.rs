//! Discrete energy, its exact gradient, the Euler–Lagrange residual and the
//! localisation construction.

use serde::{Deserialize, Serialize};

use crate::error::{NeelError, Result};
use crate::grid::Grid;
use crate::profile::Profile;
use crate::stray::{SpectralOperator, DEFAULT_PADDING};

/// Components of `E_h = ½(∫(φ′)² + ∫(m₁ − h)² + ‖m₁ − h‖²_{Ḣ^{1/2}})`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub exchange: f64,
    pub anisotropy: f64,
    pub stray: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(exchange: f64, anisotropy: f64, stray: f64) -> Self {
        Self {
            exchange,
            anisotropy,
            stray,
            total: exchange + anisotropy + stray,
        }
    }
}

/// Euler–Lagrange residual on interior nodes with norms taken away from a
/// collar at each end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElResidual {
    /// `r_i` for `i = 1..N−1`.
    pub values: Vec<f64>,
    pub sup: f64,
    pub l2: f64,
}

/// Width of the excluded end collars, in grid cells.
pub const RESIDUAL_COLLAR: usize = 5;

/// Energy evaluator bound to one grid size; holds the FFT plans.
#[derive(Debug, Clone)]
pub struct EnergyEvaluator {
    grid: Grid,
    op: SpectralOperator,
}

impl EnergyEvaluator {
    pub fn new(grid: Grid) -> Self {
        Self::with_padding(grid, DEFAULT_PADDING).expect("default padding is valid")
    }

    pub fn with_padding(grid: Grid, padding: usize) -> Result<Self> {
        let op = SpectralOperator::new(grid.len(), grid.spacing(), padding)?;
        Ok(Self { grid, op })
    }

    pub fn with_operator(grid: Grid, op: SpectralOperator) -> Self {
        Self { grid, op }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn check(&self, profile: &Profile) {
        assert!(
            self.grid.same_as(profile.grid()),
            "profile grid does not match the evaluator"
        );
    }

    fn local_terms(&self, phi: &[f64], h: f64) -> (f64, f64) {
        let dx = self.grid.spacing();
        let exchange: f64 = phi.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / dx;
        let anisotropy: f64 = phi
            .iter()
            .enumerate()
            .map(|(i, p)| self.grid.trapezoid_weight(i) * (p.cos() - h).powi(2))
            .sum();
        (0.5 * exchange, 0.5 * anisotropy)
    }

    pub fn breakdown(&self, profile: &Profile) -> EnergyBreakdown {
        self.check(profile);
        self.breakdown_of(profile.phi(), profile.params().h)
    }

    pub fn breakdown_of(&self, phi: &[f64], h: f64) -> EnergyBreakdown {
        let (exchange, anisotropy) = self.local_terms(phi, h);
        let f: Vec<f64> = phi.iter().map(|p| p.cos() - h).collect();
        let stray = 0.5 * self.op.energy(&f);
        EnergyBreakdown::new(exchange, anisotropy, stray)
    }

    /// Total energy and its partial derivatives with respect to the interior
    /// samples `φ_1 … φ_{N−2}` of the full vector `phi`.
    pub fn energy_and_gradient(&self, phi: &[f64], h: f64) -> (EnergyBreakdown, Vec<f64>) {
        let n = phi.len();
        let dx = self.grid.spacing();
        let (exchange, anisotropy) = self.local_terms(phi, h);
        let f: Vec<f64> = phi.iter().map(|p| p.cos() - h).collect();
        let (norm, df) = self.op.energy_and_half_laplacian(&f);
        let grad = (1..n - 1)
            .map(|i| {
                let lap = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / dx;
                -lap - dx * phi[i].sin() * (f[i] + df[i])
            })
            .collect();
        (EnergyBreakdown::new(exchange, anisotropy, 0.5 * norm), grad)
    }

    pub fn gradient(&self, profile: &Profile) -> Vec<f64> {
        self.check(profile);
        self.energy_and_gradient(profile.phi(), profile.params().h).1
    }

    /// `r = φ″ + (cos φ − h) sin φ + sin φ |D|(cos φ − h)`, which is `−∇E/Δ`.
    pub fn el_residual(&self, profile: &Profile) -> ElResidual {
        let dx = self.grid.spacing();
        let values: Vec<f64> = self.gradient(profile).into_iter().map(|g| -g / dx).collect();
        residual_norms(values, dx)
    }
}

fn residual_norms(values: Vec<f64>, dx: f64) -> ElResidual {
    // values[k] belongs to node k + 1; keep nodes collar..N−1−collar.
    let n = values.len() + 2;
    let lo = RESIDUAL_COLLAR.saturating_sub(1);
    let hi = (n - 1).saturating_sub(RESIDUAL_COLLAR).min(values.len());
    let core = if lo < hi { &values[lo..hi] } else { &values[0..0] };
    let sup = core.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let l2 = (core.iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
    ElResidual { values, sup, l2 }
}

pub fn energy(profile: &Profile) -> EnergyBreakdown {
    EnergyEvaluator::new(*profile.grid()).breakdown(profile)
}

pub fn gradient(profile: &Profile) -> Vec<f64> {
    EnergyEvaluator::new(*profile.grid()).gradient(profile)
}

pub fn el_residual(profile: &Profile) -> ElResidual {
    EnergyEvaluator::new(*profile.grid()).el_residual(profile)
}

/// `|∫(φ′)² − ∫(cos φ − h)²| / (∫(φ′)² + ∫(cos φ − h)²)`, zero for `0/0`.
pub fn equipartition_defect(profile: &Profile) -> f64 {
    let e = EnergyEvaluator::new(*profile.grid());
    let (exchange, anisotropy) = e.local_terms(profile.phi(), profile.params().h);
    let sum = exchange + anisotropy;
    if sum == 0.0 {
        0.0
    } else {
        (exchange - anisotropy).abs() / sum
    }
}

/// Cutoff equal to one on `[−R, R]`, zero off `[−2R, 2R]`, joined by the
/// quintic smootherstep (slope at most `1.875/R`).
pub fn cutoff(x: f64, r: f64) -> f64 {
    let a = x.abs();
    if a <= r {
        1.0
    } else if a >= 2.0 * r {
        0.0
    } else {
        let t = (2.0 * r - a) / r;
        t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

/// `φ̃ = ℓ± + η (φ − ℓ±)` with the boundary phase `ℓ₋` on `x ≤ 0` and `ℓ₊`
/// on `x > 0`. Outside `[−2R, 2R]` the result sits exactly on the wells.
pub fn localize(profile: &Profile, r: f64) -> Result<Profile> {
    let g = profile.grid();
    let l = g.half_width();
    if !(r >= 1.0 && r <= 0.5 * l) {
        return Err(NeelError::Localisation(format!("R = {r} must satisfy 1 <= R <= L/2 = {}", 0.5 * l)));
    }
    let (lo, hi) = profile.boundary_phases();
    let phi = profile.phi();
    let mut out = Vec::with_capacity(phi.len());
    for (i, &p) in phi.iter().enumerate() {
        let x = g.x(i);
        let well = if x <= 0.0 { lo } else { hi };
        if x.abs() > r && (p - well).abs() >= 0.5 * std::f64::consts::PI {
            return Err(NeelError::Localisation(format!(
                "phase {p:.4} at x = {x:.3} is not within π/2 of the well {well:.4}; a wall lies outside [-R, R]"
            )));
        }
        out.push(well + cutoff(x, r) * (p - well));
    }
    profile.with_phi(out)
}
