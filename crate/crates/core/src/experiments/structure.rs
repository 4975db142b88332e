//! Wall and sign structure of minimisers of degree `ℓ − α/π`.

use serde::{Deserialize, Serialize};

use crate::degree::{FieldParam, Offset, WindingNumber};
use crate::error::{NeelError, Result};
use crate::profile::{wall_locations, Profile};
use crate::solver::MinimizeResult;

use super::layout::{obtain, parse_degree, SolveSpec};
use super::report::{Cell, ExperimentReport};
use super::tolerances::STRUCTURE_VIOLATION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StructureConfig {
    pub h: f64,
    pub ell: i64,
    /// Profile snapshot to check instead of solving.
    pub input_profile: Option<String>,
    pub solve: SolveSpec,
}

impl Default for StructureConfig {
    fn default() -> Self {
        Self {
            h: 0.99,
            ell: 2,
            input_profile: None,
            solve: SolveSpec::default(),
        }
    }
}

/// Points where `m₁ − h` changes sign, ignoring excursions no larger than
/// `band`. Positions are linearly interpolated.
pub fn level_crossings(profile: &Profile, band: f64) -> Vec<f64> {
    let g = profile.grid();
    let f: Vec<f64> = profile.stray_source();
    let mut out = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    for (i, &v) in f.iter().enumerate() {
        if v.abs() <= band {
            continue;
        }
        if let Some((j, s)) = last {
            if s != v.signum() {
                // first raw sign change between the two significant nodes
                let k = (j..i).find(|&k| f[k + 1].signum() != f[j].signum() || f[k + 1] == 0.0).unwrap_or(i - 1);
                let w = f[k] / (f[k] - f[k + 1]);
                out.push(g.x(k) + w * g.spacing());
            }
        }
        last = Some((i, v.signum()));
    }
    out
}

/// Checks `2ℓ − 1` walls with `m₁(a_n) = (−1)^n`, the interleaving
/// `a₁ < b₁ < a₂ < …` and the alternating sign of `m₁ − h` between the
/// crossings `b_n` of the level `h`.
pub fn structure_check(result: &MinimizeResult) -> Result<ExperimentReport> {
    let profile = result.profile();
    let d = profile.degree();
    let p = *profile.params();
    if d.offset != Offset::MinusAlphaOverPi || d.k < 1 || p.is_unit() {
        return Err(NeelError::Precondition(format!(
            "the structure check needs a degree l - alpha/pi with l >= 1 and h < 1, got {d} at h = {}",
            p.h
        )));
    }
    let ell = d.k;
    let walls = wall_locations(profile);
    let bs = level_crossings(profile, STRUCTURE_VIOLATION);

    let mut rep = ExperimentReport::new("structure", &["kind", "index", "position", "m1"]);
    rep.param("h", p.h).param("degree", d.to_string()).param("converged", result.converged);
    for (n, w) in walls.iter().enumerate() {
        rep.row(vec!["a".into(), (n + 1).into(), w.position.into(), Cell::Int(w.sign as i64)]);
    }
    for (n, b) in bs.iter().enumerate() {
        rep.row(vec!["b".into(), (n + 1).into(), (*b).into(), p.h.into()]);
    }

    let want_walls = (2 * ell - 1) as usize;
    rep.check_flag(
        "wall_count",
        "a minimiser of degree l - alpha/pi has exactly 2l - 1 points with m1 = +-1",
        walls.len() == want_walls,
        want_walls as f64 - walls.len() as f64,
        format!("{} walls, expected {want_walls}", walls.len()),
    );
    let signs_ok = walls
        .iter()
        .enumerate()
        .all(|(n, w)| w.sign as i64 == if n % 2 == 0 { -1 } else { 1 });
    rep.check_flag(
        "alternating_walls",
        "m1(a_n) = (-1)^n",
        signs_ok,
        if signs_ok { 0.0 } else { -1.0 },
        walls.iter().map(|w| if w.sign < 0 { '-' } else { '+' }).collect(),
    );

    let want_b = (2 * ell - 2) as usize;
    let mut merged: Vec<(f64, char)> = walls.iter().map(|w| (w.position, 'a')).chain(bs.iter().map(|b| (*b, 'b'))).collect();
    merged.sort_by(|x, y| x.0.total_cmp(&y.0));
    let pattern: String = merged.iter().map(|m| m.1).collect();
    let expected_pattern: String = (0..want_walls + want_b).map(|i| if i % 2 == 0 { 'a' } else { 'b' }).collect();
    rep.check_flag(
        "interleaving",
        "a_1 < b_1 < a_2 < ... < b_{2l-2} < a_{2l-1}",
        pattern == expected_pattern,
        if pattern == expected_pattern { 0.0 } else { -1.0 },
        format!("order {pattern}, expected {expected_pattern}"),
    );

    // interval k lies between b_k and b_{k+1}; even k has m1 <= h
    let g = profile.grid();
    let f = profile.stray_source();
    let mut worst: f64 = 0.0;
    let mut worst_at = f64::NAN;
    for (i, v) in f.iter().enumerate() {
        let x = g.x(i);
        let k = bs.iter().filter(|b| **b <= x).count();
        let bad = if k % 2 == 0 { v.max(0.0) } else { (-v).max(0.0) };
        if bad > worst {
            worst = bad;
            worst_at = x;
        }
    }
    rep.note(format!("worst sign violation {worst:.3e} at x = {worst_at:.4}"));
    rep.check_le(
        "sign_pattern",
        "m1 <= h on (-inf, b_1], [b_2, b_3], ... and m1 >= h on [b_1, b_2], [b_3, b_4], ...",
        worst,
        STRUCTURE_VIOLATION,
        0.0,
    );

    let dx = g.spacing();
    let min_slope = profile.phi().windows(2).map(|w| (w[1] - w[0]) / dx).fold(f64::INFINITY, f64::min);
    rep.param("min_phase_slope", min_slope);
    rep.note(format!(
        "minimal phase slope {min_slope:.3e}; monotonicity of the phase is an open question and is not checked"
    ));
    if !result.converged {
        rep.note("the minimiser did not converge; verdicts describe the last iterate");
    }
    Ok(rep)
}

pub fn structure_violations(cfg: &StructureConfig) -> Vec<String> {
    let mut v = cfg.solve.violations();
    if cfg.ell < 1 {
        v.push(format!("ell must be at least 1, got {}", cfg.ell));
    }
    if !(cfg.h >= 0.0 && cfg.h < 1.0) {
        v.push(format!("h must lie in [0, 1), got {}", cfg.h));
    }
    v
}

/// Solves for the `ℓ − α/π` minimiser and runs [`structure_check`].
pub fn structure_experiment(cfg: &StructureConfig) -> Result<(MinimizeResult, ExperimentReport)> {
    let v = structure_violations(cfg);
    if !v.is_empty() {
        return Err(NeelError::Precondition(v.join("; ")));
    }
    let p = FieldParam::new(cfg.h)?;
    let d: WindingNumber = parse_degree(&format!("{}-a", cfg.ell), &p)?;
    let r = obtain(&d, &p, &cfg.solve, cfg.input_profile.as_deref())?;
    let mut rep = structure_check(&r)?;
    rep.param("config", cfg);
    Ok((r, rep))
}
