//! Starting layouts and the per-degree solve shared by the experiments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::degree::{DegreeExpr, FieldParam, WindingNumber};
use crate::error::{NeelError, Result};
use crate::grid::Grid;
use crate::profile::{clustered_positions, crossing_values, initial_ansatz, Profile};
use crate::solver::{assess, minimize_from, MinimizeConfig, MinimizeResult};
use crate::energy::EnergyEvaluator;

/// Grid, solver and layout settings for computing one minimiser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveSpec {
    pub half_width: f64,
    pub point_count: usize,
    /// Spacing of the clustered walls in the starting layout.
    pub wall_spacing: f64,
    pub core_scale: f64,
    /// Outer short steps start at `± escape_fraction · L`.
    pub escape_fraction: f64,
    pub solver: MinimizeConfig,
}

impl Default for SolveSpec {
    fn default() -> Self {
        Self {
            half_width: 100.0,
            point_count: 1025,
            wall_spacing: 3.0,
            core_scale: 1.0,
            escape_fraction: 0.5,
            solver: MinimizeConfig {
                max_iters: 100_000,
                ..MinimizeConfig::default()
            },
        }
    }
}

impl SolveSpec {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.half_width, self.point_count)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = self.solver.violations();
        if let Err(e) = self.grid() {
            v.push(e.to_string());
        }
        if !(self.wall_spacing > 0.0) {
            v.push(format!("wall_spacing must be positive, got {}", self.wall_spacing));
        }
        if !(self.core_scale > 0.0) {
            v.push(format!("core_scale must be positive, got {}", self.core_scale));
        }
        if !(self.escape_fraction > 0.0 && self.escape_fraction < 1.0) {
            v.push(format!("escape_fraction must lie in (0, 1), got {}", self.escape_fraction));
        }
        v
    }
}

/// Starting wall positions.
///
/// Steps of rise `2α` (from one well to the nearest other well) at either end
/// of the step sequence are expected to drift away from the rest when
/// `h < 1`; they start at `∓ escape_fraction · L`. All other steps are
/// clustered around the origin.
pub fn escape_layout(d: &WindingNumber, p: &FieldParam, spec: &SolveSpec) -> Vec<f64> {
    let d = d.normalized(p);
    let crossings = crossing_values(&d, p);
    let n = crossings.len();
    if n <= 1 || p.is_unit() {
        return clustered_positions(n, spec.wall_spacing);
    }
    // crossings of even multiples of π carry the short steps
    let short: Vec<bool> = crossings
        .iter()
        .map(|c| ((c / PI).round() as i64).rem_euclid(2) == 0 && p.alpha < 0.5 * PI - 1e-12)
        .collect();
    let lead = short[0];
    let trail = short[n - 1];
    let inner = n - lead as usize - trail as usize;
    let mut out = Vec::with_capacity(n);
    let far = spec.escape_fraction * spec.half_width;
    if lead {
        out.push(-far);
    }
    out.extend(clustered_positions(inner, spec.wall_spacing));
    if trail {
        out.push(far);
    }
    out
}

/// Minimiser of degree `d` from [`escape_layout`].
pub fn solve_degree(d: &WindingNumber, p: &FieldParam, spec: &SolveSpec) -> Result<MinimizeResult> {
    let g = spec.grid()?;
    let start = initial_ansatz(d, p, &g, &escape_layout(d, p, spec), spec.core_scale)?;
    solve_from(start, spec)
}

/// Loads `input` (a profile snapshot) when given and assesses it as is;
/// otherwise solves for `d` from [`escape_layout`].
pub fn obtain(d: &WindingNumber, p: &FieldParam, spec: &SolveSpec, input: Option<&str>) -> Result<MinimizeResult> {
    match input {
        Some(path) => {
            let prof = Profile::read_csv(std::path::Path::new(path), *p)?;
            let ev = EnergyEvaluator::new(*prof.grid());
            assess(&ev, prof, &spec.solver)
        }
        None => solve_degree(d, p, spec),
    }
}

pub fn solve_from(start: Profile, spec: &SolveSpec) -> Result<MinimizeResult> {
    let ev = EnergyEvaluator::new(*start.grid());
    minimize_from(&ev, start, &spec.solver)
}

/// The lower bound on the minimal energy from the counting argument:
/// `(1 − h)²` for `±α/π`, `(1 + h)²` for `±(1 − α/π)`, `2|d| − 1` otherwise.
pub fn lower_bound(d: &DegreeExpr, p: &FieldParam) -> f64 {
    let a = d.alpha.abs();
    let s = if d.value(p) < 0.0 { -1 } else { 1 };
    let (int, alpha) = (s * d.int, s * d.alpha);
    if p.is_unit() || a == 0 {
        return 2.0 * d.value(p).abs() - 1.0;
    }
    match (int, alpha) {
        (0, 1) => (1.0 - p.h).powi(2),
        (1, -1) => (1.0 + p.h).powi(2),
        _ => 2.0 * d.value(p).abs() - 1.0,
    }
}

/// Parses a degree and checks it against the field.
pub fn parse_degree(text: &str, p: &FieldParam) -> Result<WindingNumber> {
    let d = WindingNumber::parse(text)?;
    if p.is_unit() && d.offset.sign() != 0 {
        return Err(NeelError::UnrepresentableDegree(
            format!("{text} (offsets vanish at h = 1; use the integer {})", d.k),
            p.h,
        ));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layouts_send_outer_short_steps_out() {
        let spec = SolveSpec::default();
        let p = FieldParam::new(0.9).unwrap();
        let l = |s: &str| escape_layout(&WindingNumber::parse(s).unwrap(), &p, &spec);
        assert_eq!(l("a"), vec![0.0]);
        assert_eq!(l("1"), vec![-50.0, 0.0]);
        assert_eq!(l("1+a"), vec![-50.0, 0.0, 50.0]);
        assert_eq!(l("2-a"), vec![-3.0, 0.0, 3.0]);
        assert_eq!(l("2"), vec![-50.0, -3.0, 0.0, 3.0]);
        let unit = FieldParam::new(1.0).unwrap();
        assert_eq!(escape_layout(&WindingNumber::integer(2), &unit, &spec), vec![-3.0, 0.0, 3.0]);
    }

    #[test]
    fn bounds() {
        let p = FieldParam::new(0.9).unwrap();
        let b = |s: &str| lower_bound(&DegreeExpr::parse(s).unwrap(), &p);
        assert!((b("a") - 0.01).abs() < 1e-15);
        assert!((b("1-a") - 3.61).abs() < 1e-12);
        assert!((b("-a") - 0.01).abs() < 1e-15);
        assert!((b("2") - 3.0).abs() < 1e-15);
        let unit = FieldParam::new(1.0).unwrap();
        assert_eq!(lower_bound(&DegreeExpr::new(3, 0), &unit), 5.0);
    }
}
