//! Both sides of the first- and second-order local energy inequalities,
//! evaluated on a window between two walls with an explicit cutoff.

use serde::{Deserialize, Serialize};

use crate::degree::FieldParam;
use crate::error::{NeelError, Result};
use crate::profile::{wall_locations, Profile};
use crate::solver::MinimizeResult;
use crate::stray::{poisson_extend_columns, SampledField};

use super::appendix::aux_inf;
use super::layout::{obtain, parse_degree, SolveSpec};
use super::report::ExperimentReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalConfig {
    pub h: f64,
    pub ell: i64,
    /// Explicit window; `None` takes the gap after wall `gap_index`.
    pub window: Option<(f64, f64)>,
    pub gap_index: usize,
    /// Height of the cutoff in the half-plane.
    pub r: f64,
    /// Width of each ramp of the cutoff as a fraction of the window.
    pub ramp_fraction: f64,
    /// Scales the cutoff; zero gives the trivial case.
    pub amplitude: f64,
    /// Profile snapshot to check instead of solving.
    pub input_profile: Option<String>,
    pub solve: SolveSpec,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            h: 0.99,
            ell: 2,
            window: None,
            gap_index: 0,
            r: 10.0,
            ramp_fraction: 0.25,
            amplitude: 1.0,
            input_profile: None,
            solve: SolveSpec::default(),
        }
    }
}

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn bump_prime(t: f64) -> f64 {
    if t > 0.0 {
        bump(t) / (t * t)
    } else {
        0.0
    }
}

/// Smooth step from 0 at `t ≤ 0` to 1 at `t ≥ 1`, with its derivative.
fn smooth_step(t: f64) -> (f64, f64) {
    let (a, b) = (bump(t), bump(1.0 - t));
    let s = a + b;
    let d = (bump_prime(t) * b + a * bump_prime(1.0 - t)) / (s * s);
    (a / s, d)
}

/// `η(x₁, x₂) = A χ(x₁) θ(x₂ / R)`: `χ` rises on the first `ramp` of the
/// window and falls on the last, `θ = 1` below `R/2` and `0` above `R`.
#[derive(Debug, Clone, Copy)]
struct Cutoff {
    a1: f64,
    a2: f64,
    ramp: f64,
    r: f64,
    amplitude: f64,
}

impl Cutoff {
    fn chi(&self, x: f64) -> (f64, f64) {
        let (u, du) = smooth_step((x - self.a1) / self.ramp);
        let (w, dw) = smooth_step((self.a2 - x) / self.ramp);
        (u * w, (du * w - u * dw) / self.ramp)
    }

    fn theta(&self, y: f64) -> (f64, f64) {
        let (s, ds) = smooth_step(2.0 * (1.0 - y / self.r));
        (s, -2.0 * ds / self.r)
    }

    /// `(η, ∂₁η, ∂₂η)`.
    fn eval(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let (c, dc) = self.chi(x);
        let (t, dt) = self.theta(y);
        let a = self.amplitude;
        (a * c * t, a * dc * t, a * c * dt)
    }
}

/// Sides of both inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSides {
    pub first_lhs: f64,
    pub first_rhs: f64,
    pub second_lhs: f64,
    pub second_rhs: f64,
    pub aux_min: f64,
}

fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// Evaluates the inequalities on `(a1, a2)` for the cutoff of height `r`.
pub fn local_sides(profile: &Profile, window: (f64, f64), r: f64, ramp_fraction: f64, amplitude: f64) -> Result<LocalSides> {
    let (a1, a2) = window;
    let g = profile.grid();
    let dx = g.spacing();
    let l = g.half_width();
    if !(a1 < a2 && a1 > -l + 2.0 * dx && a2 < l - 2.0 * dx) {
        return Err(NeelError::Precondition(format!("window ({a1}, {a2}) must lie inside the grid")));
    }
    if !(r >= 4.0 * dx && ramp_fraction > 0.0 && ramp_fraction <= 0.5) {
        return Err(NeelError::Precondition(format!(
            "need R >= 4 spacings and a ramp fraction in (0, 1/2], got R = {r}, ramp = {ramp_fraction}"
        )));
    }
    if let Some(w) = wall_locations(profile).iter().find(|w| w.position > a1 && w.position < a2) {
        return Err(NeelError::Precondition(format!(
            "window ({a1:.3}, {a2:.3}) contains the wall at {:.3}",
            w.position
        )));
    }
    let phi = profile.phi();
    let h = profile.params().h;
    let first = ((a1 + l) / dx).ceil() as usize;
    let last = ((a2 + l) / dx).floor() as usize;
    let inside: Vec<usize> = (first..=last).filter(|&i| g.x(i) > a1 && g.x(i) < a2).collect();
    if inside.len() < 8 {
        return Err(NeelError::Precondition("window spans fewer than 8 nodes".into()));
    }
    let s0 = phi[inside[0]].sin().signum();
    if inside.iter().any(|&i| phi[i].sin() == 0.0 || phi[i].sin().signum() != s0) {
        return Err(NeelError::Precondition("m2 vanishes inside the window".into()));
    }
    let cut = Cutoff {
        a1,
        a2,
        ramp: ramp_fraction * (a2 - a1),
        r,
        amplitude,
    };

    // one-dimensional terms at the window nodes
    let mut first_lhs = 0.0;
    let mut first_rhs = 0.0;
    let mut second_lhs = 0.0;
    let mut second_rhs = 0.0;
    let mut aux_min = f64::INFINITY;
    for &i in &inside {
        let x = g.x(i);
        let (c, dc) = cut.chi(x);
        let (eta, deta) = (amplitude * c, amplitude * dc);
        let p1 = (phi[i + 1] - phi[i - 1]) / (2.0 * dx);
        let p2 = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / (dx * dx);
        let (s, co) = phi[i].sin_cos();
        let m1h = co - h;
        first_lhs += dx * eta.powi(4) * (0.5 * p1 * p1 + m1h * m1h);
        first_rhs += dx * 576.0 * deta.powi(4);
        second_lhs += dx * eta * eta * (p2 * p2 + p1.powi(4) + s * s * p1 * p1 + p1.powi(4) / (s * s));
        second_rhs += dx * 32.0 * deta * deta * p1 * p1;
        aux_min = aux_min.min((1.0 - h * co) / (s * s));
    }

    // half-plane terms on the lattice (column, k Δ) with the trace at k = 0
    let k_top = (r / dx).ceil() as usize + 2;
    let heights: Vec<f64> = (1..=k_top).map(|k| k as f64 * dx).collect();
    let columns = (first as isize - 1)..(last as isize + 2);
    let f = SampledField::from_profile(profile);
    let slab = poisson_extend_columns(&f, &heights, columns.clone())?;
    let nc = columns.len();
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(k_top + 1);
    v.push(columns.clone().map(|c| f.values()[c as usize]).collect());
    for k in 0..k_top {
        v.push(slab.layer(k).to_vec());
    }
    let vy = |k: usize, c: usize| -> f64 {
        if k == 0 {
            (-3.0 * v[0][c] + 4.0 * v[1][c] - v[2][c]) / (2.0 * dx)
        } else {
            (v[k + 1][c] - v[k - 1][c]) / (2.0 * dx)
        }
    };
    let k_max = k_top - 1;
    for k in 0..=k_max {
        let y = k as f64 * dx;
        let wy = trapezoid_weight(k, k_max + 1) * dx;
        for c in 1..nc - 1 {
            let x = slab.x(c);
            if x <= a1 || x >= a2 {
                continue;
            }
            let (eta, ex, ey) = cut.eval(x, y);
            let grad_eta2 = ex * ex + ey * ey;
            if eta == 0.0 && grad_eta2 == 0.0 {
                continue;
            }
            let w = wy * dx;
            let vx = (v[k][c + 1] - v[k][c - 1]) / (2.0 * dx);
            let vyy = vy(k, c);
            let vxx = (v[k][c + 1] - 2.0 * v[k][c] + v[k][c - 1]) / (dx * dx);
            let vxy = (vy(k, c + 1) - vy(k, c - 1)) / (2.0 * dx);
            let grad_v2 = vx * vx + vyy * vyy;
            // harmonic: ∂₂₂v = −∂₁₁v
            let hess2 = 2.0 * vxx * vxx + 2.0 * vxy * vxy;
            first_lhs += w * eta.powi(4) * grad_v2;
            first_rhs += w * 16.0 * v[k][c] * v[k][c] * eta * eta * grad_eta2;
            second_lhs += w * eta * eta * hess2;
            second_rhs += w * 24.0 * grad_eta2 * grad_v2;
        }
    }
    Ok(LocalSides {
        first_lhs,
        first_rhs,
        second_lhs,
        second_rhs,
        aux_min,
    })
}

/// Window between walls `gap_index` and `gap_index + 1`.
pub fn gap_window(profile: &Profile, gap_index: usize) -> Result<(f64, f64)> {
    let walls = wall_locations(profile);
    if gap_index + 1 >= walls.len() {
        return Err(NeelError::Precondition(format!(
            "gap {gap_index} needs at least {} walls, found {}",
            gap_index + 2,
            walls.len()
        )));
    }
    Ok((walls[gap_index].position, walls[gap_index + 1].position))
}

pub fn local_estimate_check(result: &MinimizeResult, cfg: &LocalConfig) -> Result<ExperimentReport> {
    let profile = result.profile();
    let window = match cfg.window {
        Some(w) => w,
        None => gap_window(profile, cfg.gap_index)?,
    };
    let s = local_sides(profile, window, cfg.r, cfg.ramp_fraction, cfg.amplitude)?;
    let mut rep = ExperimentReport::new("local_estimates", &["inequality", "lhs", "rhs", "ratio"]);
    rep.param("config", cfg).param("window", window).param("converged", result.converged);
    let ratio = |l: f64, r: f64| if r > 0.0 { l / r } else { 0.0 };
    rep.row(vec!["first_order".into(), s.first_lhs.into(), s.first_rhs.into(), ratio(s.first_lhs, s.first_rhs).into()]);
    rep.row(vec![
        "second_order".into(),
        s.second_lhs.into(),
        s.second_rhs.into(),
        ratio(s.second_lhs, s.second_rhs).into(),
    ]);
    rep.check_le(
        "first_order",
        "int eta^4 (|m'|^2/2 + (m1-h)^2) + int eta^4 |grad v|^2 <= 576 int eta'^4 + 16 int v^2 eta^2 |grad eta|^2",
        s.first_lhs,
        s.first_rhs,
        0.0,
    );
    rep.check_le(
        "second_order",
        "int eta^2 (|m''|^2 + m1'^2 + |m'|^4/m2^2) + int eta^2 |D^2 v|^2 <= 32 int eta'^2 |m'|^2 + 24 int |grad eta|^2 |grad v|^2",
        s.second_lhs,
        s.second_rhs,
        0.0,
    );
    let alpha = profile.params().alpha;
    rep.note(format!(
        "min of (1 - h cos phi)/sin^2 phi on the window: {:.6}; its infimum over all phases is {:.6}",
        s.aux_min,
        aux_inf(alpha.min(0.5 * std::f64::consts::PI))?
    ));
    rep.check_le(
        "auxiliary_bound",
        "(1 - h cos phi)/sin^2 phi >= 1/2",
        0.5,
        s.aux_min,
        0.0,
    );
    if !result.converged {
        rep.note("the minimiser did not converge; the equation holds only approximately");
    }
    Ok(rep)
}

pub fn local_violations(cfg: &LocalConfig) -> Vec<String> {
    let mut v = cfg.solve.violations();
    if cfg.ell < 1 {
        v.push(format!("ell must be at least 1, got {}", cfg.ell));
    }
    if let Err(e) = FieldParam::new(cfg.h) {
        v.push(e.to_string());
    }
    if !(cfg.amplitude.is_finite()) {
        v.push("amplitude must be finite".into());
    }
    v
}

pub fn local_experiment(cfg: &LocalConfig) -> Result<(MinimizeResult, ExperimentReport)> {
    let v = local_violations(cfg);
    if !v.is_empty() {
        return Err(NeelError::Precondition(v.join("; ")));
    }
    let p = FieldParam::new(cfg.h)?;
    let text = if p.is_unit() { cfg.ell.to_string() } else { format!("{}-a", cfg.ell) };
    let d = parse_degree(&text, &p)?;
    let r = obtain(&d, &p, &cfg.solve, cfg.input_profile.as_deref())?;
    let rep = local_estimate_check(&r, cfg)?;
    Ok((r, rep))
}
