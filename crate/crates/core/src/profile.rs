//! Phase profiles on a truncated grid, ansatz construction and wall detection.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::degree::{boundary_phases, decompose_degree, FieldParam, WindingNumber};
use crate::error::{NeelError, Result};
use crate::grid::Grid;

/// A lifting `φ` sampled on a grid. The two end values always equal the
/// boundary phases of `degree`; every constructor enforces this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    grid: Grid,
    phi: Vec<f64>,
    params: FieldParam,
    degree: WindingNumber,
}

/// A point where `m₁ = ±1`, i.e. `φ ∈ πℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallLocation {
    pub position: f64,
    /// `m₁` at the crossing, `(−1)^k` for `φ = kπ`.
    pub sign: i8,
}

impl Profile {
    /// Builds a profile from samples, overwriting both ends with the boundary
    /// phases of `degree`.
    pub fn new(grid: Grid, params: FieldParam, degree: WindingNumber, mut phi: Vec<f64>) -> Result<Self> {
        if phi.len() != grid.len() {
            return Err(NeelError::GridMismatch(format!(
                "{} phase samples for a grid of {} nodes",
                phi.len(),
                grid.len()
            )));
        }
        if let Some(i) = phi.iter().position(|v| !v.is_finite()) {
            return Err(NeelError::NonFinite {
                iteration: 0,
                last_phi: vec![phi[i]],
            });
        }
        let degree = degree.normalized(&params);
        let (lo, hi) = boundary_phases(&degree, &params);
        phi[0] = lo;
        let n = phi.len();
        phi[n - 1] = hi;
        Ok(Self {
            grid,
            phi,
            params,
            degree,
        })
    }

    /// Constant profile sitting on the left well; the only member of the
    /// degree-zero class with zero energy.
    pub fn constant(grid: Grid, params: FieldParam) -> Self {
        let (lo, _) = boundary_phases(&WindingNumber::ZERO, &params);
        Self {
            grid,
            phi: vec![lo; grid.len()],
            params,
            degree: WindingNumber::ZERO,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn params(&self) -> &FieldParam {
        &self.params
    }

    pub fn degree(&self) -> WindingNumber {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn boundary_phases(&self) -> (f64, f64) {
        boundary_phases(&self.degree, &self.params)
    }

    /// Same grid, field and degree with new samples (re-clamped).
    pub fn with_phi(&self, phi: Vec<f64>) -> Result<Self> {
        Self::new(self.grid, self.params, self.degree, phi)
    }

    /// Replaces interior nodes `1..N-1` in place; the ends are untouched.
    pub fn set_interior(&mut self, interior: &[f64]) {
        let n = self.phi.len();
        assert_eq!(interior.len(), n - 2, "interior length");
        self.phi[1..n - 1].copy_from_slice(interior);
    }

    pub fn interior(&self) -> &[f64] {
        &self.phi[1..self.phi.len() - 1]
    }

    pub fn is_clamped(&self) -> bool {
        let (lo, hi) = self.boundary_phases();
        self.phi[0] == lo && self.phi[self.phi.len() - 1] == hi
    }

    pub fn x(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    /// `m₁ − h`, the source of the stray field.
    pub fn stray_source(&self) -> Vec<f64> {
        let h = self.params.h;
        self.phi.iter().map(|p| p.cos() - h).collect()
    }

    /// Linear interpolation of `φ` at `x`, clamped to the end values outside the grid.
    pub fn phi_at(&self, x: f64) -> f64 {
        let l = self.grid.half_width();
        if x <= -l {
            return self.phi[0];
        }
        if x >= l {
            return self.phi[self.phi.len() - 1];
        }
        let t = (x + l) / self.grid.spacing();
        let i = (t.floor() as usize).min(self.phi.len() - 2);
        let w = t - i as f64;
        self.phi[i] * (1.0 - w) + self.phi[i + 1] * w
    }

    /// Writes `x,phi,m1,m2` with 16 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "phi", "m1", "m2"])?;
        let (m1, m2) = m_components(self);
        for i in 0..self.len() {
            w.write_record([
                fmt_num(self.grid.x(i)),
                fmt_num(self.phi[i]),
                fmt_num(m1[i]),
                fmt_num(m2[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a snapshot written by [`Profile::write_csv`]. The grid is
    /// recovered from the `x` column; the degree is recovered from the ends.
    pub fn read_csv(path: &Path, params: FieldParam) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut xs = Vec::new();
        let mut phi = Vec::new();
        for rec in r.deserialize() {
            let row: SnapshotRow = rec?;
            xs.push(row.x);
            phi.push(row.phi);
        }
        if xs.len() < 3 {
            return Err(NeelError::InvalidGrid(format!("snapshot has {} rows", xs.len())));
        }
        let grid = Grid::new(xs[xs.len() - 1], xs.len())?;
        let value = (phi[phi.len() - 1] - phi[0]) / (2.0 * PI);
        let degree = decompose_degree(value, &params, phi[0] > 0.0)?;
        let (lo, hi) = boundary_phases(&degree, &params);
        if (phi[0] - lo).abs() > 1e-9 || (phi[phi.len() - 1] - hi).abs() > 1e-9 {
            return Err(NeelError::WallLayout(format!(
                "snapshot ends ({}, {}) are not the boundary phases of degree {degree}",
                phi[0],
                phi[phi.len() - 1]
            )));
        }
        Self::new(grid, params, degree, phi)
    }
}

#[derive(Deserialize)]
struct SnapshotRow {
    x: f64,
    phi: f64,
}

pub(crate) fn fmt_num(v: f64) -> String {
    format!("{v:.15e}")
}

/// `(φ[N−1] − φ[0]) / 2π`, decomposed into `k ± {0, α/π}`.
pub fn degree_of(profile: &Profile) -> Result<WindingNumber> {
    let phi = profile.phi();
    let value = (phi[phi.len() - 1] - phi[0]) / (2.0 * PI);
    decompose_degree(value, profile.params(), phi[0] > 0.0)
}

pub fn m_components(profile: &Profile) -> (Vec<f64>, Vec<f64>) {
    profile.phi().iter().map(|p| (p.cos(), p.sin())).unzip()
}

/// The multiples of `π` strictly between the boundary phases, in the order
/// the lifting passes them.
pub fn crossing_values(d: &WindingNumber, p: &FieldParam) -> Vec<f64> {
    let (lo, hi) = boundary_phases(d, p);
    let (a, b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let first = (a / PI).floor() as i64 + 1;
    let last = (b / PI).ceil() as i64 - 1;
    let mut ks: Vec<f64> = (first..=last)
        .map(|k| k as f64 * PI)
        .filter(|c| *c > a && *c < b)
        .collect();
    if lo > hi {
        ks.reverse();
    }
    ks
}

/// Sigmoidal ansatz with one well-to-well step per wall.
///
/// Each wall position carries the crossing of one multiple of `π`; the step
/// there rises between the two wells bracketing it. At `h = 1` the crossings
/// of even multiples sit on the well itself and carry no rise.
pub fn initial_ansatz(
    d: &WindingNumber,
    p: &FieldParam,
    g: &Grid,
    wall_positions: &[f64],
    core_scale: f64,
) -> Result<Profile> {
    let d = d.normalized(p);
    if !(core_scale > 0.0 && core_scale.is_finite()) {
        return Err(NeelError::WallLayout(format!("core_scale must be positive, got {core_scale}")));
    }
    let crossings = crossing_values(&d, p);
    if d.is_zero(p) {
        return Ok(Profile::constant(*g, *p));
    }
    if wall_positions.len() != crossings.len() {
        return Err(NeelError::WallLayout(format!(
            "degree {d} at h = {} needs {} wall positions, got {}",
            p.h,
            crossings.len(),
            wall_positions.len()
        )));
    }
    let l = g.half_width();
    for w in wall_positions.windows(2) {
        if !(w[1] > w[0]) {
            return Err(NeelError::WallLayout("wall positions must be strictly increasing".into()));
        }
    }
    if let Some(x) = wall_positions.iter().find(|x| !(x.abs() < l)) {
        return Err(NeelError::WallLayout(format!("wall at {x} lies outside (-{l}, {l})")));
    }

    let (lo, hi) = boundary_phases(&d, p);
    let up = hi >= lo;
    let steps: Vec<(f64, f64)> = crossings
        .iter()
        .zip(wall_positions)
        .map(|(&c, &x)| {
            let (below, above) = bracketing_wells(c, p);
            let rise = if up { above - below } else { below - above };
            (x, rise)
        })
        .collect();

    let phi = g
        .nodes()
        .into_iter()
        .map(|x| {
            lo + steps
                .iter()
                .map(|&(c, rise)| rise * 0.5 * (1.0 + ((x - c) / core_scale).tanh()))
                .sum::<f64>()
        })
        .collect();
    Profile::new(*g, *p, d, phi)
}

/// Nearest wells `±α + 2πj` at or below and at or above `c`.
fn bracketing_wells(c: f64, p: &FieldParam) -> (f64, f64) {
    let a = p.alpha;
    let j = (c / (2.0 * PI)).floor();
    let base = j * 2.0 * PI;
    let mut wells = [base - a, base + a, base + 2.0 * PI - a, base + 2.0 * PI + a, base - 2.0 * PI + a];
    wells.sort_by(|x, y| x.total_cmp(y));
    let tol = 1e-12;
    let below = wells.iter().rev().find(|w| **w <= c + tol).copied().expect("well below");
    let above = wells.iter().find(|w| **w >= c - tol).copied().expect("well above");
    (below, above)
}

/// Evenly spaced wall positions centred at zero.
pub fn clustered_positions(count: usize, spacing: f64) -> Vec<f64> {
    let mid = (count as f64 - 1.0) / 2.0;
    (0..count).map(|i| (i as f64 - mid) * spacing).collect()
}

/// Points where `φ` crosses `πℤ`, located by linear interpolation. A run of
/// nodes sitting exactly on `kπ` counts once, at its middle node, and only
/// if `φ − kπ` changes sign across it.
pub fn wall_locations(profile: &Profile) -> Vec<WallLocation> {
    let phi = profile.phi();
    let g = profile.grid();
    let (min, max) = phi
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let k_lo = (min / PI).floor() as i64;
    let k_hi = (max / PI).ceil() as i64;
    let mut out = Vec::new();
    for k in k_lo..=k_hi {
        let c = k as f64 * PI;
        let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        // (index, sign of φ − c) of the last nonzero interior-or-end sample
        let mut last: Option<(usize, f64)> = None;
        for (i, &v) in phi.iter().enumerate() {
            let s = v - c;
            if s == 0.0 {
                continue;
            }
            if let Some((j, t)) = last {
                if t.signum() != s.signum() {
                    let position = if i == j + 1 {
                        let w = t / (t - s);
                        g.x(j) + w * (g.x(i) - g.x(j))
                    } else {
                        // exact hits on nodes j+1..i-1
                        g.x((j + 1 + i - 1) / 2)
                    };
                    out.push(WallLocation { position, sign });
                }
            }
            last = Some((i, s));
        }
    }
    out.sort_by(|a, b| a.position.total_cmp(&b.position));
    out
}
