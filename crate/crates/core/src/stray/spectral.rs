use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SampledField;
use crate::error::{NeelError, Result};

pub const DEFAULT_PADDING: usize = 4;

/// Scale applied to the discrete multiplier sum.
///
/// With `F_k = Σ_j f_j e^{−2πi jk/M}` and `f̂(ξ_k) ≈ Δ F_k`, the continuum
/// identity `‖f‖² = (1/2π) ∫ |ξ| |f̂(ξ)|² dξ` discretises (`dξ = 2π/(MΔ)`) to
/// `(Δ/M) Σ_k |ξ_k| |F_k|²` with no further constant. The Lorentzian
/// `1/(1+x²)`, whose transform is `π e^{−|ξ|}`, gives `π/4` under both forms.
pub const SPECTRAL_NORMALISATION: f64 = 1.0;

/// Zero-padded FFT realisation of `|D| = (−∂²)^{1/2}` for a fixed grid size.
///
/// Plans are built once; the operator can be shared across threads.
#[derive(Clone)]
pub struct SpectralOperator {
    n: usize,
    m: usize,
    spacing: f64,
    normalisation: f64,
    multiplier: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOperator")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("spacing", &self.spacing)
            .field("normalisation", &self.normalisation)
            .finish()
    }
}

impl SpectralOperator {
    pub fn new(n: usize, spacing: f64, padding: usize) -> Result<Self> {
        Self::with_normalisation(n, spacing, padding, SPECTRAL_NORMALISATION)
    }

    pub fn with_normalisation(n: usize, spacing: f64, padding: usize, normalisation: f64) -> Result<Self> {
        if padding < 4 {
            return Err(NeelError::Padding(padding));
        }
        let m = (padding * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let scale = 2.0 * std::f64::consts::PI / (m as f64 * spacing);
        let multiplier = (0..m).map(|k| scale * k.min(m - k) as f64).collect();
        Ok(Self {
            n,
            m,
            spacing,
            normalisation,
            multiplier,
            forward,
            inverse,
        })
    }

    pub fn for_field(f: &SampledField, padding: usize) -> Result<Self> {
        Self::new(f.len(), f.grid().spacing(), padding)
    }

    pub fn padded_len(&self) -> usize {
        self.m
    }

    pub fn normalisation(&self) -> f64 {
        self.normalisation
    }

    fn spectrum(&self, f: &[f64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.n, "field length does not match operator");
        let mut buf = vec![Complex64::new(0.0, 0.0); self.m];
        for (b, v) in buf.iter_mut().zip(f) {
            b.re = *v;
        }
        self.forward.process(&mut buf);
        buf
    }

    /// `‖f‖²_{Ḣ^{1/2}}`.
    pub fn energy(&self, f: &[f64]) -> f64 {
        let spec = self.spectrum(f);
        let sum: f64 = spec.iter().zip(&self.multiplier).map(|(c, w)| w * c.norm_sqr()).sum();
        self.normalisation * self.spacing / self.m as f64 * sum
    }

    /// `(‖f‖²_{Ḣ^{1/2}}, |D| f)`. The gradient of the energy with respect to
    /// the samples is `2Δ |D| f`, exactly, for this discretisation.
    pub fn energy_and_half_laplacian(&self, f: &[f64]) -> (f64, Vec<f64>) {
        let mut spec = self.spectrum(f);
        let mut sum = 0.0;
        for (c, w) in spec.iter_mut().zip(&self.multiplier) {
            sum += w * c.norm_sqr();
            *c *= *w;
        }
        self.inverse.process(&mut spec);
        let scale = self.normalisation / self.m as f64;
        let df = spec[..self.n].iter().map(|c| c.re * scale).collect();
        (self.normalisation * self.spacing / self.m as f64 * sum, df)
    }

    pub fn half_laplacian(&self, f: &[f64]) -> Vec<f64> {
        self.energy_and_half_laplacian(f).1
    }
}

/// Fourier-multiplier evaluation of `‖f‖²_{Ḣ^{1/2}}` on the zero-padded samples.
pub fn h12_spectral(f: &SampledField, padding: usize) -> Result<f64> {
    Ok(SpectralOperator::for_field(f, padding)?.energy(f.values()))
}

/// `∂v/∂x₂` on the boundary for the harmonic extension `v` of `f`, i.e. `−|D| f`.
pub fn dtn(f: &SampledField) -> SampledField {
    let op = SpectralOperator::for_field(f, DEFAULT_PADDING).expect("default padding is valid");
    let values = op.half_laplacian(f.values()).into_iter().map(|v| -v).collect();
    SampledField::new(*f.grid(), values).expect("finite input gives finite output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn zero_field_has_zero_energy() {
        let f = SampledField::zeros(Grid::new(10.0, 101).unwrap());
        assert_eq!(h12_spectral(&f, 4).unwrap(), 0.0);
    }

    #[test]
    fn rejects_small_padding() {
        let f = SampledField::zeros(Grid::new(10.0, 101).unwrap());
        assert!(matches!(h12_spectral(&f, 3), Err(NeelError::Padding(3))));
    }

    #[test]
    fn lorentzian_value() {
        let g = Grid::new(200.0, 4001).unwrap();
        let f = SampledField::from_fn(g, |x| 1.0 / (1.0 + x * x));
        let e = h12_spectral(&f, 4).unwrap();
        assert!((e - PI / 4.0).abs() < 0.01 * PI / 4.0, "{e}");
    }

    #[test]
    fn energy_is_adjoint_consistent() {
        let g = Grid::new(10.0, 201).unwrap();
        let f = SampledField::from_fn(g, |x| (-(x - 1.0) * (x - 1.0)).exp());
        let op = SpectralOperator::for_field(&f, 4).unwrap();
        let (e, df) = op.energy_and_half_laplacian(f.values());
        let pairing: f64 = f.values().iter().zip(&df).map(|(a, b)| a * b).sum::<f64>() * g.spacing();
        assert!((e - pairing).abs() < 1e-12 * e);
    }

    #[test]
    fn dtn_of_lorentzian() {
        let g = Grid::new(200.0, 4001).unwrap();
        let f = SampledField::from_fn(g, |x| 1.0 / (1.0 + x * x));
        let u = dtn(&f);
        let c = g.center_index();
        assert!((u.values()[c] + 1.0).abs() < 1e-2, "{}", u.values()[c]);
        let x = g.x(c + 20);
        let exact = (x * x - 1.0) / (1.0 + x * x).powi(2);
        assert!((u.values()[c + 20] - exact).abs() < 1e-2);
    }
}
