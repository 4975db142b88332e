//! Degree-constrained minimisation: limited-memory quasi-Newton on the
//! interior phases with Armijo backtracking.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree::{boundary_phases, FieldParam, WindingNumber};
use crate::energy::{equipartition_defect, EnergyBreakdown, EnergyEvaluator};
use crate::error::{NeelError, Result};
use crate::grid::Grid;
use crate::profile::{clustered_positions, crossing_values, initial_ansatz, wall_locations, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeConfig {
    pub max_iters: usize,
    /// Bound on `max_i |∂E/∂φ_i|`.
    pub grad_tol: f64,
    pub memory: usize,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub min_step: f64,
    /// Mass term of the tridiagonal preconditioner.
    pub precond_shift: f64,
    /// At `h = 1` convergence also needs `sup |r| ≤ el_factor · grad_tol / Δ`.
    pub el_factor: f64,
    /// Re-evaluates the starting energy and fails unless both values agree bitwise.
    pub deterministic: bool,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            grad_tol: 1e-7,
            memory: 10,
            armijo_c: 1e-4,
            backtrack: 0.5,
            min_step: 1e-12,
            precond_shift: 1.0,
            el_factor: 10.0,
            deterministic: true,
        }
    }
}

impl MinimizeConfig {
    /// Every violated constraint, empty when the configuration is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.max_iters < 1 {
            v.push("solver.max_iters must be at least 1".to_string());
        }
        if !(self.grad_tol > 0.0) {
            v.push(format!("solver.grad_tol must be positive, got {}", self.grad_tol));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            v.push(format!("solver.armijo_c must lie in (0, 1), got {}", self.armijo_c));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            v.push(format!("solver.backtrack must lie in (0, 1), got {}", self.backtrack));
        }
        if !(self.min_step > 0.0) {
            v.push(format!("solver.min_step must be positive, got {}", self.min_step));
        }
        if !(self.precond_shift >= 0.0) {
            v.push(format!("solver.precond_shift must be non-negative, got {}", self.precond_shift));
        }
        if !(self.el_factor > 0.0) {
            v.push(format!("solver.el_factor must be positive, got {}", self.el_factor));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(NeelError::SolverConfig(v.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    #[serde(skip)]
    pub profile: Option<Profile>,
    pub h: f64,
    pub degree: String,
    pub half_width: f64,
    pub point_count: usize,
    pub breakdown: EnergyBreakdown,
    pub grad_norm: f64,
    pub el_residual_sup: f64,
    pub el_residual_l2: f64,
    pub equipartition_defect: f64,
    pub wall_count: usize,
    pub iterations: usize,
    pub converged: bool,
    pub monotonic_energy: bool,
    pub energy_trace: Vec<f64>,
    pub config: MinimizeConfig,
}

impl MinimizeResult {
    pub fn profile(&self) -> &Profile {
        self.profile.as_ref().expect("result carries its profile")
    }

    pub fn energy(&self) -> f64 {
        self.breakdown.total
    }
}

/// Starting point of a minimisation.
#[derive(Debug, Clone)]
pub enum Init {
    /// Clustered walls three units apart, unit core scale.
    Default,
    Ansatz { wall_positions: Vec<f64>, core_scale: f64 },
    Profile(Profile),
}

/// Walls spaced three units apart around the origin.
pub fn default_wall_positions(d: &WindingNumber, p: &FieldParam) -> Vec<f64> {
    clustered_positions(crossing_values(d, p).len(), 3.0)
}

/// Factorised `tridiag(−1/Δ, 2/Δ + cΔ, −1/Δ)`: exchange Hessian plus a mass term.
struct Preconditioner {
    off: f64,
    c_prime: Vec<f64>,
    denom: Vec<f64>,
}

impl Preconditioner {
    fn new(n: usize, dx: f64, shift: f64) -> Self {
        let diag = 2.0 / dx + shift * dx;
        let off = -1.0 / dx;
        let mut c_prime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        denom[0] = diag;
        c_prime[0] = off / diag;
        for i in 1..n {
            denom[i] = diag - off * c_prime[i - 1];
            c_prime[i] = off / denom[i];
        }
        Self { off, c_prime, denom }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut d = vec![0.0; n];
        d[0] = rhs[0] / self.denom[0];
        for i in 1..n {
            d[i] = (rhs[i] - self.off * d[i - 1]) / self.denom[i];
        }
        for i in (0..n - 1).rev() {
            d[i] -= self.c_prime[i] * d[i + 1];
        }
        d
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

fn build_init(d: &WindingNumber, p: &FieldParam, g: &Grid, init: Init) -> Result<Profile> {
    let d = d.normalized(p);
    match init {
        Init::Default => initial_ansatz(&d, p, g, &default_wall_positions(&d, p), 1.0),
        Init::Ansatz {
            wall_positions,
            core_scale,
        } => initial_ansatz(&d, p, g, &wall_positions, core_scale),
        Init::Profile(prof) => {
            if prof.degree() != d || prof.params() != p || !prof.grid().same_as(g) {
                return Err(NeelError::WallLayout(format!(
                    "initial profile has degree {} at h = {} on N = {}, expected {d} at h = {} on N = {}",
                    prof.degree(),
                    prof.params().h,
                    prof.len(),
                    p.h,
                    g.len()
                )));
            }
            Ok(prof)
        }
    }
}

/// Minimises `E_h` over profiles with the boundary phases of `d`.
pub fn minimize(d: &WindingNumber, p: &FieldParam, g: &Grid, cfg: &MinimizeConfig, init: Init) -> Result<MinimizeResult> {
    cfg.validate()?;
    let start = build_init(d, p, g, init)?;
    let ev = EnergyEvaluator::new(*g);
    minimize_from(&ev, start, cfg)
}

/// As [`minimize`], reusing an evaluator (and its FFT plans).
pub fn minimize_from(ev: &EnergyEvaluator, start: Profile, cfg: &MinimizeConfig) -> Result<MinimizeResult> {
    cfg.validate()?;
    let g = *start.grid();
    let h = start.params().h;
    let dx = g.spacing();
    let n_int = g.len() - 2;
    let unit = start.params().is_unit();
    let pre = Preconditioner::new(n_int, dx, cfg.precond_shift);

    let mut prof = start;
    let (mut e, mut grad) = ev.energy_and_gradient(prof.phi(), h);
    if !e.total.is_finite() {
        return Err(NeelError::NonFinite {
            iteration: 0,
            last_phi: prof.phi().to_vec(),
        });
    }
    if cfg.deterministic {
        let again = ev.energy_and_gradient(prof.phi(), h).0.total;
        if again.to_bits() != e.total.to_bits() {
            return Err(NeelError::SolverConfig(
                "energy evaluation is not reproducible on this platform".into(),
            ));
        }
    }

    let mut trace = vec![e.total];
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.memory);
    let mut iterations = 0;
    let mut converged = false;

    let is_converged = |grad: &[f64], prof: &Profile| -> bool {
        if sup(grad) > cfg.grad_tol {
            return false;
        }
        !unit || ev.el_residual(prof).sup <= cfg.el_factor * cfg.grad_tol / dx
    };

    while iterations < cfg.max_iters {
        if is_converged(&grad, &prof) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut dir = two_loop(&grad, &hist, &pre);
        let mut slope = dot(&dir, &grad);
        if !(slope < 0.0) {
            hist.clear();
            dir = pre.solve(&grad).into_iter().map(|v| -v).collect();
            slope = dot(&dir, &grad);
        }

        let mut accepted = None;
        for attempt in 0..2 {
            let mut t = 1.0;
            while t >= cfg.min_step {
                let mut trial: Vec<f64> = prof.phi().to_vec();
                for (k, dk) in dir.iter().enumerate() {
                    trial[k + 1] += t * dk;
                }
                let (e_new, g_new) = ev.energy_and_gradient(&trial, h);
                if !e_new.total.is_finite() {
                    return Err(NeelError::NonFinite {
                        iteration: iterations,
                        last_phi: prof.phi().to_vec(),
                    });
                }
                if e_new.total <= e.total + cfg.armijo_c * t * slope {
                    accepted = Some((trial, e_new, g_new, t));
                    break;
                }
                t *= cfg.backtrack;
            }
            if accepted.is_some() || attempt == 1 {
                break;
            }
            // quasi-Newton direction failed: retry along the preconditioned gradient
            hist.clear();
            dir = pre.solve(&grad).into_iter().map(|v| -v).collect();
            slope = dot(&dir, &grad);
        }

        let Some((trial, e_new, g_new, t)) = accepted else {
            break;
        };
        let s: Vec<f64> = dir.iter().map(|v| v * t).collect();
        let y: Vec<f64> = g_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if hist.len() == cfg.memory {
                hist.pop_front();
            }
            if cfg.memory > 0 {
                hist.push_back((s, y, 1.0 / sy));
            }
        }

        prof.set_interior(&trial[1..trial.len() - 1]);
        assert!(prof.is_clamped(), "boundary clamp lost at iteration {iterations}");
        e = e_new;
        grad = g_new;
        trace.push(e.total);
    }
    if !converged && is_converged(&grad, &prof) {
        converged = true;
    }

    let el = ev.el_residual(&prof);
    let monotonic = trace.windows(2).all(|w| w[1] <= w[0]);
    Ok(MinimizeResult {
        h,
        degree: prof.degree().to_string(),
        half_width: g.half_width(),
        point_count: g.len(),
        breakdown: e,
        grad_norm: sup(&grad),
        el_residual_sup: el.sup,
        el_residual_l2: el.l2,
        equipartition_defect: equipartition_defect(&prof),
        wall_count: wall_locations(&prof).len(),
        iterations,
        converged,
        monotonic_energy: monotonic,
        energy_trace: trace,
        config: *cfg,
        profile: Some(prof),
    })
}

/// Diagnostics of a given profile without iterating, as a result with
/// zero iterations. `converged` applies the tolerance of `cfg`.
pub fn assess(ev: &EnergyEvaluator, profile: Profile, cfg: &MinimizeConfig) -> Result<MinimizeResult> {
    cfg.validate()?;
    let g = *profile.grid();
    let h = profile.params().h;
    let (e, grad) = ev.energy_and_gradient(profile.phi(), h);
    if !e.total.is_finite() {
        return Err(NeelError::NonFinite {
            iteration: 0,
            last_phi: profile.phi().to_vec(),
        });
    }
    let el = ev.el_residual(&profile);
    let unit = profile.params().is_unit();
    let converged = sup(&grad) <= cfg.grad_tol && (!unit || el.sup <= cfg.el_factor * cfg.grad_tol / g.spacing());
    Ok(MinimizeResult {
        h,
        degree: profile.degree().to_string(),
        half_width: g.half_width(),
        point_count: g.len(),
        breakdown: e,
        grad_norm: sup(&grad),
        el_residual_sup: el.sup,
        el_residual_l2: el.l2,
        equipartition_defect: equipartition_defect(&profile),
        wall_count: wall_locations(&profile).len(),
        iterations: 0,
        converged,
        monotonic_energy: true,
        energy_trace: vec![e.total],
        config: *cfg,
        profile: Some(profile),
    })
}

/// L-BFGS two-loop recursion with initial matrix `γ P⁻¹`.
fn two_loop(grad: &[f64], hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, pre: &Preconditioner) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    let mut r = pre.solve(&q);
    if let Some((s, y, _)) = hist.back() {
        let py = pre.solve(y);
        let gamma = dot(s, y) / dot(y, &py);
        for v in r.iter_mut() {
            *v *= gamma;
        }
    }
    for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &r);
        for (ri, si) in r.iter_mut().zip(s) {
            *ri += si * (a - b);
        }
    }
    r.into_iter().map(|v| -v).collect()
}

/// Carries a profile to new boundary phases by the affine map of the phase
/// interval, or by a shift when the interval is degenerate.
pub fn reclamp(profile: &Profile, p: &FieldParam) -> Result<Profile> {
    let d = profile.degree().normalized(p);
    let (a, b) = profile.boundary_phases();
    let (a2, b2) = boundary_phases(&d, p);
    let phi: Vec<f64> = if (b - a).abs() > 1e-14 {
        let scale = (b2 - a2) / (b - a);
        profile.phi().iter().map(|v| a2 + (v - a) * scale).collect()
    } else {
        profile.phi().iter().map(|v| v - a + a2).collect()
    };
    Profile::new(*profile.grid(), *p, d, phi)
}

/// One entry of a continuation sweep.
#[derive(Debug, Clone)]
pub struct ContinuationPoint {
    pub h: f64,
    pub result: std::result::Result<MinimizeResult, String>,
}

/// Minimises along a monotone `h` schedule, warm-starting each point from
/// the previous converged profile.
pub fn continuation(
    d: &WindingNumber,
    schedule: &[f64],
    g: &Grid,
    cfg: &MinimizeConfig,
    init: Init,
) -> Result<Vec<ContinuationPoint>> {
    let increasing = schedule.windows(2).all(|w| w[1] > w[0]);
    let decreasing = schedule.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(NeelError::SolverConfig("h schedule must be strictly monotone".into()));
    }
    cfg.validate()?;
    let ev = EnergyEvaluator::new(*g);
    let mut out = Vec::with_capacity(schedule.len());
    let mut warm: Option<Profile> = None;
    let mut init = Some(init);
    for &h in schedule {
        let point = (|| -> Result<MinimizeResult> {
            let p = FieldParam::new(h)?;
            let start = match (&warm, init.take()) {
                (Some(prev), _) => reclamp(prev, &p)?,
                (None, Some(i)) => build_init(d, &p, g, i)?,
                (None, None) => build_init(d, &p, g, Init::Default)?,
            };
            minimize_from(&ev, start, cfg)
        })();
        if let Ok(r) = &point {
            if r.converged {
                warm = r.profile.clone();
            }
        }
        out.push(ContinuationPoint {
            h,
            result: point.map_err(|e| e.to_string()),
        });
    }
    Ok(out)
}

/// `φ(x + a)`, interpolated and re-clamped.
pub fn translate(profile: &Profile, a: f64) -> Profile {
    let g = profile.grid();
    let phi = (0..g.len()).map(|i| profile.phi_at(g.x(i) + a)).collect();
    profile.with_phi(phi).expect("interpolated samples are finite")
}

/// Moves the median wall to `x = 0`. Returns the translated profile and the
/// shift that was applied.
pub fn recenter(profile: &Profile) -> (Profile, f64) {
    let walls = wall_locations(profile);
    if walls.is_empty() {
        return (profile.clone(), 0.0);
    }
    let k = walls.len();
    let median = if k % 2 == 1 {
        walls[k / 2].position
    } else {
        0.5 * (walls[k / 2 - 1].position + walls[k / 2].position)
    };
    if median.abs() < 1e-12 {
        return (profile.clone(), 0.0);
    }
    (translate(profile, median), median)
}

/// Minimisations from `starts` jittered copies of the wall layout. Start 0
/// uses the layout as given. Results are returned in start order.
pub fn multistart(
    d: &WindingNumber,
    p: &FieldParam,
    g: &Grid,
    cfg: &MinimizeConfig,
    positions: &[f64],
    core_scale: f64,
    starts: usize,
    seed: u64,
) -> Vec<Result<MinimizeResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = positions
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
        .min(4.0);
    let layouts: Vec<Vec<f64>> = (0..starts)
        .map(|s| {
            if s == 0 {
                positions.to_vec()
            } else {
                positions
                    .iter()
                    .map(|x| x + rng.random_range(-0.3..0.3) * gap)
                    .collect()
            }
        })
        .collect();
    layouts
        .into_par_iter()
        .map(|wall_positions| {
            minimize(
                d,
                p,
                g,
                cfg,
                Init::Ansatz {
                    wall_positions,
                    core_scale,
                },
            )
        })
        .collect()
}

/// The lowest converged energy among `results`, or the lowest overall when
/// none converged.
pub fn best_of(results: Vec<Result<MinimizeResult>>) -> Result<MinimizeResult> {
    let mut ok: Vec<MinimizeResult> = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok(r) => ok.push(r),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let pick = |v: &mut Vec<MinimizeResult>, want_converged: bool| {
        v.iter()
            .enumerate()
            .filter(|(_, r)| !want_converged || r.converged)
            .min_by(|a, b| a.1.energy().total_cmp(&b.1.energy()))
            .map(|(i, _)| i)
    };
    match pick(&mut ok, true).or_else(|| pick(&mut ok, false)) {
        Some(i) => Ok(ok.swap_remove(i)),
        None => Err(first_err.unwrap_or_else(|| NeelError::SolverConfig("no starts requested".into()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::degree_of;

    fn small_cfg() -> MinimizeConfig {
        MinimizeConfig {
            grad_tol: 1e-6,
            ..MinimizeConfig::default()
        }
    }

    #[test]
    fn preconditioner_solves_tridiagonal_system() {
        let pre = Preconditioner::new(6, 0.2, 1.0);
        let x = [1.0, -2.0, 0.5, 3.0, 0.0, 1.5];
        let diag = 2.0 / 0.2 + 0.2;
        let off = -1.0 / 0.2;
        let b: Vec<f64> = (0..6)
            .map(|i| {
                let mut v = diag * x[i];
                if i > 0 {
                    v += off * x[i - 1];
                }
                if i < 5 {
                    v += off * x[i + 1];
                }
                v
            })
            .collect();
        for (a, e) in pre.solve(&b).iter().zip(x) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation_lists_every_problem() {
        let cfg = MinimizeConfig {
            max_iters: 0,
            grad_tol: -1.0,
            armijo_c: 1.5,
            ..MinimizeConfig::default()
        };
        assert_eq!(cfg.violations().len(), 3);
        assert!(MinimizeConfig::default().validate().is_ok());
    }

    #[test]
    fn zero_degree_relaxes_to_the_well() {
        let p = FieldParam::new(0.6).unwrap();
        let g = Grid::new(20.0, 201).unwrap();
        let lo = -p.alpha;
        let phi = g.nodes().iter().map(|x| lo + 0.5 * (-x * x / 4.0).exp()).collect();
        let start = Profile::new(g, p, WindingNumber::ZERO, phi).unwrap();
        let r = minimize(&WindingNumber::ZERO, &p, &g, &small_cfg(), Init::Profile(start)).unwrap();
        assert!(r.converged);
        assert!(r.energy() <= 1e-8, "{}", r.energy());
        assert!(r.monotonic_energy);
    }

    #[test]
    fn single_wall_small_grid() {
        let p = FieldParam::new(0.9).unwrap();
        let g = Grid::new(30.0, 601).unwrap();
        let d = WindingNumber::plus_alpha(0);
        let r = minimize(&d, &p, &g, &small_cfg(), Init::Default).unwrap();
        assert!(r.converged, "{} iterations, grad {}", r.iterations, r.grad_norm);
        assert!(r.monotonic_energy);
        assert_eq!(r.wall_count, 1);
        assert!(r.energy() >= (1.0 - p.h).powi(2));
        assert_eq!(degree_of(r.profile()).unwrap(), d);
    }

    #[test]
    fn identical_runs_are_bitwise_identical() {
        let p = FieldParam::new(0.8).unwrap();
        let g = Grid::new(20.0, 201).unwrap();
        let d = WindingNumber::minus_alpha(1);
        let cfg = MinimizeConfig {
            max_iters: 200,
            ..small_cfg()
        };
        let a = minimize(&d, &p, &g, &cfg, Init::Default).unwrap();
        let b = minimize(&d, &p, &g, &cfg, Init::Default).unwrap();
        let bits = |r: &MinimizeResult| r.energy_trace.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn recenter_is_idempotent_after_translation() {
        let p = FieldParam::new(0.7).unwrap();
        let g = Grid::new(30.0, 601).unwrap();
        let d = WindingNumber::plus_alpha(0);
        let prof = initial_ansatz(&d, &p, &g, &[2.5], 1.0).unwrap();
        let (c, shift) = recenter(&prof);
        assert!((shift - 2.5).abs() < 0.05);
        let walls = wall_locations(&c);
        assert!(walls[0].position.abs() < 1e-3);
        let (c2, _) = recenter(&translate(&c, -1.0));
        assert!(wall_locations(&c2)[0].position.abs() < 1e-3);
    }

    #[test]
    fn reclamp_maps_onto_new_wells() {
        let p = FieldParam::new(0.9).unwrap();
        let q = FieldParam::new(0.8).unwrap();
        let g = Grid::new(10.0, 101).unwrap();
        let d = WindingNumber::minus_alpha(2);
        let prof = initial_ansatz(&d, &p, &g, &[-3.0, 0.0, 3.0], 1.0).unwrap();
        let moved = reclamp(&prof, &q).unwrap();
        assert!(moved.is_clamped());
        assert_eq!(moved.params().h, 0.8);
        assert_eq!(wall_locations(&moved).len(), 3);
    }
}
