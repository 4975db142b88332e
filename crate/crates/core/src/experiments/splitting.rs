//! Splitting diagnostic: localised part minimisers placed side by side at
//! growing separation, compared with the direct minimiser.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree::{boundary_phases, DegreeExpr, FieldParam, WindingNumber};
use crate::energy::{localize, EnergyEvaluator};
use crate::error::{NeelError, Result};
use crate::grid::Grid;
use crate::profile::{wall_locations, Profile};
use crate::stray::SpectralOperator;
use crate::stray::DEFAULT_PADDING;

use super::layout::{parse_degree, solve_degree, SolveSpec};
use super::partitions::{admissible, compatible_neighbours};
use super::report::ExperimentReport;
use super::tolerances::DECOUPLING_RELATIVE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    /// Parts bind: negative interaction, concatenation above the direct minimiser.
    Attractive,
    /// Parts separate: concatenation energy decreasing in the separation.
    Repulsive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub h: f64,
    pub degree: String,
    /// Parts as text; empty selects [`default_partition`].
    pub partition: Vec<String>,
    pub r_list: Vec<f64>,
    /// Centre spacing in units of `R`.
    pub spacing: f64,
    /// Additional spacings evaluated at every `R` (rows only).
    pub spacing_sweep: Vec<f64>,
    /// Expected signature; `None` selects it from the degree class.
    pub expected: Option<Signature>,
    pub part_solve: SolveSpec,
    pub direct_solve: SolveSpec,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            h: 0.99,
            degree: "2-a".into(),
            partition: Vec::new(),
            r_list: vec![4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0],
            spacing: 6.0,
            spacing_sweep: vec![4.0, 8.0, 10.0],
            expected: None,
            part_solve: SolveSpec {
                half_width: 100.0,
                point_count: 1025,
                ..SolveSpec::default()
            },
            direct_solve: SolveSpec {
                half_width: 200.0,
                point_count: 2049,
                ..SolveSpec::default()
            },
        }
    }
}

/// `(1, ℓ−1−α/π)` for `ℓ − α/π`, `(α/π, ℓ)` for `ℓ + α/π`, `(α/π, ℓ−α/π)`
/// for an integer `ℓ` (and `(1, ℓ−1)` at `h = 1`).
pub fn default_partition(d: &DegreeExpr, p: &FieldParam) -> Result<Vec<DegreeExpr>> {
    let parts = match (d.alpha, p.is_unit()) {
        (0, true) if d.int >= 2 => vec![DegreeExpr::new(1, 0), DegreeExpr::new(d.int - 1, 0)],
        (-1, false) if d.int >= 2 => vec![DegreeExpr::new(1, 0), DegreeExpr::new(d.int - 1, -1)],
        (1, false) if d.int >= 1 => vec![DegreeExpr::new(0, 1), DegreeExpr::new(d.int, 0)],
        (0, false) if d.int >= 1 => vec![DegreeExpr::new(0, 1), DegreeExpr::new(d.int, -1)],
        _ => {
            return Err(NeelError::Precondition(format!("{d} has no default two-part partition at h = {}", p.h)));
        }
    };
    Ok(parts)
}

/// The signature predicted for `d` when `h` is close to one: `ℓ − α/π`
/// binds, `ℓ + α/π` and the integers split. At `h = 1` integers bind.
pub fn predicted_signature(d: &DegreeExpr, p: &FieldParam) -> Signature {
    if p.is_unit() || d.alpha == -1 {
        Signature::Attractive
    } else {
        Signature::Repulsive
    }
}

/// Replaces parts whose minimum is not attained for `h < 1` by parts that
/// are: an integer `k` becomes `(α/π, k − α/π)` when it starts on the lower
/// well and `(k − α/π, α/π)` on the upper one; `ℓ + α/π` becomes
/// `(α/π, ℓ − α/π, α/π)`. The first part starts on the left boundary well
/// of `target`.
pub fn refine_parts(parts: &[DegreeExpr], target: &DegreeExpr, p: &FieldParam) -> Result<Vec<DegreeExpr>> {
    if p.is_unit() {
        return Ok(parts.to_vec());
    }
    let a = DegreeExpr::new(0, 1);
    // true while the running phase sits on the upper well +α (mod 2π)
    let mut upper = target.alpha == -1;
    let mut out = Vec::new();
    for d in parts {
        let atoms = match (d.alpha, upper) {
            (0, false) => vec![a, DegreeExpr::new(d.int, -1)],
            (0, true) => vec![DegreeExpr::new(d.int, -1), a],
            (1, false) if d.int == 0 => vec![a],
            (1, false) => vec![a, DegreeExpr::new(d.int, -1), a],
            (-1, true) => vec![*d],
            _ => {
                return Err(NeelError::Precondition(format!(
                    "part {d} cannot start on the {} well",
                    if upper { "upper" } else { "lower" }
                )))
            }
        };
        for atom in &atoms {
            upper = match atom.alpha {
                1 => true,
                -1 => false,
                _ => upper,
            };
        }
        out.extend(atoms);
    }
    Ok(out)
}

/// Moves samples by whole nodes so that the median wall sits nearest `x = 0`.
fn center_on_nodes(profile: &Profile) -> Result<Profile> {
    let walls = wall_locations(profile);
    if walls.is_empty() {
        return Ok(profile.clone());
    }
    let k = walls.len();
    let median = if k % 2 == 1 {
        walls[k / 2].position
    } else {
        0.5 * (walls[k / 2 - 1].position + walls[k / 2].position)
    };
    let s = (median / profile.grid().spacing()).round() as isize;
    let phi = profile.phi();
    let n = phi.len() as isize;
    let shifted = (0..n).map(|i| phi[(i + s).clamp(0, n - 1) as usize]).collect();
    profile.with_phi(shifted)
}

/// A localised part with the phase shift placing it in the chain.
struct Placed {
    profile: Profile,
    shift: f64,
    center: f64,
}

fn place(atoms: &[Profile], target: &WindingNumber, p: &FieldParam, centers: &[f64]) -> Result<Vec<Placed>> {
    let (mut current, _) = boundary_phases(target, p);
    let mut out = Vec::with_capacity(atoms.len());
    for (prof, &center) in atoms.iter().zip(centers) {
        let (lo, hi) = prof.boundary_phases();
        let turns = (current - lo) / (2.0 * PI);
        if (turns - turns.round()).abs() > 1e-9 {
            return Err(NeelError::Precondition(format!(
                "part {} starts at phase {lo:.6}, chain sits at {current:.6}",
                prof.degree()
            )));
        }
        let shift = turns.round() * 2.0 * PI;
        current = hi + shift;
        out.push(Placed {
            profile: prof.clone(),
            shift,
            center,
        });
    }
    Ok(out)
}

/// Energy terms of one concatenation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concatenation {
    pub r: f64,
    pub spacing: f64,
    pub half_width: f64,
    pub energy: f64,
    /// Sum of the energies of each localised part embedded alone.
    pub parts_energy: f64,
    /// `Σ_{j<k} ⟨f_j, f_k⟩` in the stray-field inner product.
    pub interaction: f64,
}

/// Places localised parts at centres `spacing · R · (j − (J+1)/2)` on a grid
/// with the spacing of the parts' grid, and evaluates the energy split.
pub fn concatenate(
    localized: &[Profile],
    target: &WindingNumber,
    p: &FieldParam,
    r: f64,
    spacing: f64,
) -> Result<(Profile, Concatenation)> {
    let j = localized.len();
    let dx = localized[0].grid().spacing();
    if localized.iter().any(|q| (q.grid().spacing() - dx).abs() > 1e-12 * dx) {
        return Err(NeelError::GridMismatch("parts must share one grid spacing".into()));
    }
    if spacing < 4.0 {
        return Err(NeelError::Precondition(format!(
            "spacing {spacing} R lets the supports of neighbouring parts overlap"
        )));
    }
    let centers: Vec<f64> = (1..=j)
        .map(|k| ((spacing * r * (k as f64 - 0.5 * (j as f64 + 1.0))) / dx).round() * dx)
        .collect();
    let placed = place(localized, target, p, &centers)?;
    let margin = (2.0 * r).max(10.0);
    let m = ((centers[j - 1] + 2.0 * r + margin) / dx).ceil() as usize;
    let g = Grid::new(m as f64 * dx, 2 * m + 1)?;
    let nodes = g.nodes();

    let support = 2.0 * r + 0.5 * dx;
    // each part alone on the extended grid, sitting on its own wells elsewhere
    let alone: Vec<Vec<f64>> = placed
        .iter()
        .map(|pl| {
            let (lo, hi) = pl.profile.boundary_phases();
            nodes
                .iter()
                .map(|&x| {
                    let u = x - pl.center;
                    if u < -support {
                        lo + pl.shift
                    } else if u > support {
                        hi + pl.shift
                    } else {
                        pl.profile.phi_at(u) + pl.shift
                    }
                })
                .collect()
        })
        .collect();
    let phi: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            // the part whose centre is nearest owns the node
            let k = placed
                .iter()
                .enumerate()
                .min_by(|a, b| (x - a.1.center).abs().total_cmp(&(x - b.1.center).abs()))
                .map(|(k, _)| k)
                .expect("at least one part");
            alone[k][i]
        })
        .collect();
    let profile = Profile::new(g, *p, *target, phi)?;

    let op = SpectralOperator::new(g.len(), dx, DEFAULT_PADDING)?;
    let ev = EnergyEvaluator::with_operator(g, op.clone());
    let energy = ev.breakdown(&profile).total;
    let parts_energy: f64 = alone.iter().map(|phi| ev.breakdown_of(phi, p.h).total).sum();
    let sources: Vec<Vec<f64>> = alone.iter().map(|phi| phi.iter().map(|v| v.cos() - p.h).collect()).collect();
    let mut interaction = 0.0;
    for a in 0..j {
        for b in a + 1..j {
            let sum: Vec<f64> = sources[a].iter().zip(&sources[b]).map(|(x, y)| x + y).collect();
            interaction += 0.5 * (op.energy(&sum) - op.energy(&sources[a]) - op.energy(&sources[b]));
        }
    }
    Ok((
        profile,
        Concatenation {
            r,
            spacing,
            half_width: g.half_width(),
            energy,
            parts_energy,
            interaction,
        },
    ))
}

/// Least-squares `c` in `y ≈ c / R²` and the log-log slope of `|y|`.
pub fn inverse_square_fit(rs: &[f64], ys: &[f64]) -> (f64, f64) {
    let xs: Vec<f64> = rs.iter().map(|r| r.powi(-2)).collect();
    let c = xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>() / xs.iter().map(|x| x * x).sum::<f64>();
    let pts: Vec<(f64, f64)> = rs
        .iter()
        .zip(ys)
        .filter(|(_, y)| y.abs() > 0.0)
        .map(|(r, y)| (r.ln(), y.abs().ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    (c, slope)
}

#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub report: ExperimentReport,
    pub atoms: Vec<DegreeExpr>,
    pub atom_energies: Vec<f64>,
    pub direct_energy: f64,
    /// Rows at the main spacing, in `R` order.
    pub rows: Vec<Concatenation>,
    pub fit_c: f64,
    pub fit_slope: f64,
    pub signature: Option<Signature>,
}

pub fn split_violations(cfg: &SplitConfig) -> Vec<String> {
    let mut v = cfg.part_solve.violations();
    v.extend(cfg.direct_solve.violations());
    match FieldParam::new(cfg.h) {
        Ok(p) => {
            if let Err(e) = parse_degree(&cfg.degree, &p) {
                v.push(e.to_string());
            }
        }
        Err(e) => v.push(e.to_string()),
    }
    let limit = 0.5 * cfg.part_solve.half_width;
    for &r in &cfg.r_list {
        if !(r >= 1.0 && r <= limit) {
            v.push(format!("R = {r} must lie in [1, {limit}] (half the part grid)"));
        }
    }
    if cfg.r_list.is_empty() {
        v.push("r_list is empty".into());
    }
    if cfg.r_list.windows(2).any(|w| w[1] <= w[0]) {
        v.push("r_list must be increasing".into());
    }
    for s in std::iter::once(&cfg.spacing).chain(&cfg.spacing_sweep) {
        if !(*s >= 4.0) {
            v.push(format!("spacing {s} must be at least 4 (supports of width 4R)"));
        }
    }
    let dx = |s: &SolveSpec| 2.0 * s.half_width / (s.point_count.max(2) - 1) as f64;
    if (dx(&cfg.part_solve) - dx(&cfg.direct_solve)).abs() > 1e-12 {
        v.push("part and direct grids must share one spacing".into());
    }
    v
}

pub fn splitting_diagnostic(cfg: &SplitConfig) -> Result<SplitOutcome> {
    let v = split_violations(cfg);
    if !v.is_empty() {
        return Err(NeelError::Precondition(v.join("; ")));
    }
    let p = FieldParam::new(cfg.h)?;
    let target = parse_degree(&cfg.degree, &p)?.normalized(&p);
    let target_expr = target.expr();
    let parts: Vec<DegreeExpr> = if cfg.partition.is_empty() {
        default_partition(&target_expr, &p)?
    } else {
        cfg.partition.iter().map(|s| DegreeExpr::parse(s)).collect::<Result<_>>()?
    };
    let parts: Vec<DegreeExpr> = if p.is_unit() {
        parts.iter().map(|d| DegreeExpr::new(d.int, 0)).collect()
    } else {
        parts
    };
    if parts.len() < 2
        || parts.iter().copied().sum::<DegreeExpr>() != target_expr
        || !parts.iter().all(|d| admissible(d, &p))
        || !compatible_neighbours(&parts)
    {
        let shown: Vec<String> = parts.iter().map(|d| d.to_string()).collect();
        return Err(NeelError::Precondition(format!("({}) is not a partition of {target}", shown.join(", "))));
    }
    let atoms = refine_parts(&parts, &target_expr, &p)?;
    let expected = cfg.expected.unwrap_or_else(|| predicted_signature(&target_expr, &p));

    // distinct atoms are solved once
    let mut distinct: Vec<DegreeExpr> = atoms.clone();
    distinct.sort();
    distinct.dedup();
    let solved: Vec<(DegreeExpr, Result<crate::solver::MinimizeResult>)> = distinct
        .par_iter()
        .map(|d| {
            let w = d.as_winding_number().expect("atoms have offsets in {-1, 0, 1}");
            (*d, solve_degree(&w, &p, &cfg.part_solve))
        })
        .collect();
    let direct = solve_degree(&target, &p, &cfg.direct_solve)?;

    let mut rep = ExperimentReport::new(
        "splitting",
        &[
            "R",
            "spacing",
            "energy",
            "parts_energy",
            "interaction",
            "excess_over_parts",
            "excess_over_direct",
            "half_width",
        ],
    );
    rep.param("config", cfg);
    rep.param("partition", parts.iter().map(|d| d.to_string()).collect::<Vec<_>>());
    rep.param("refined_parts", atoms.iter().map(|d| d.to_string()).collect::<Vec<_>>());
    rep.note(
        "Existence and non-existence concern infima over the whole line; the rows are numerical signatures \
         (binding versus separating parts) on finite grids, not proofs.",
    );
    rep.note(format!("expected signature: {expected:?}"));

    let mut centred: Vec<(DegreeExpr, Profile, f64, bool)> = Vec::new();
    for (d, r) in solved {
        let r = r?;
        rep.note(format!(
            "part {d}: energy {:.10}, converged {}, {} walls",
            r.energy(),
            r.converged,
            r.wall_count
        ));
        centred.push((d, center_on_nodes(r.profile())?, r.energy(), r.converged));
    }
    rep.note(format!(
        "direct minimiser of {target}: energy {:.10}, converged {}, {} walls",
        direct.energy(),
        direct.converged,
        direct.wall_count
    ));
    let lookup = |d: &DegreeExpr| centred.iter().find(|c| c.0 == *d).expect("solved atom");
    let atom_energies: Vec<f64> = atoms.iter().map(|d| lookup(d).2).collect();
    let parts_sum: f64 = atom_energies.iter().sum();
    let all_converged = atoms.iter().all(|d| lookup(d).3) && direct.converged;

    let mut spacings = vec![cfg.spacing];
    spacings.extend(cfg.spacing_sweep.iter().copied().filter(|s| *s != cfg.spacing));
    let jobs: Vec<(f64, f64)> = cfg
        .r_list
        .iter()
        .flat_map(|&r| spacings.iter().map(move |&s| (r, s)))
        .collect();
    let results: Vec<Result<Concatenation>> = jobs
        .par_iter()
        .map(|&(r, s)| {
            let loc: Vec<Profile> = atoms.iter().map(|d| localize(&lookup(d).1, r)).collect::<Result<_>>()?;
            concatenate(&loc, &target, &p, r, s).map(|(_, c)| c)
        })
        .collect();
    let mut main_rows = Vec::new();
    for res in results {
        let c = res?;
        rep.row(vec![
            c.r.into(),
            c.spacing.into(),
            c.energy.into(),
            c.parts_energy.into(),
            c.interaction.into(),
            (c.energy - parts_sum).into(),
            (c.energy - direct.energy()).into(),
            c.half_width.into(),
        ]);
        if c.spacing == cfg.spacing {
            main_rows.push(c);
        }
    }

    let rs: Vec<f64> = main_rows.iter().map(|c| c.r).collect();
    let inter: Vec<f64> = main_rows.iter().map(|c| c.interaction).collect();
    let (fit_c, fit_slope) = inverse_square_fit(&rs, &inter);
    rep.note(format!(
        "fit interaction = c / R^2 with c = {fit_c:.6e}; log-log slope of |interaction| = {fit_slope:.3}"
    ));

    let attractive = main_rows.iter().all(|c| c.interaction < 0.0);
    let decreasing = main_rows.windows(2).all(|w| w[1].energy < w[0].energy);
    let signature = if attractive {
        Some(Signature::Attractive)
    } else if decreasing {
        Some(Signature::Repulsive)
    } else {
        None
    };
    rep.note(format!("measured signature: {signature:?}"));

    let last = main_rows.last().expect("non-empty r_list");
    const DECOUPLE: &str = "far-separated parts decouple: the concatenation energy approaches the sum of the part energies";
    if all_converged {
        rep.check_le(
            &format!("decoupling(R={})", last.r),
            DECOUPLE,
            (last.energy - parts_sum).abs(),
            DECOUPLING_RELATIVE * parts_sum,
            0.0,
        );
    } else {
        rep.untested("decoupling", DECOUPLE, "a part or the direct minimiser did not converge".into());
    }

    match expected {
        Signature::Attractive => {
            const ABOVE: &str = "for a binding partition the concatenated parts stay above the direct minimiser";
            const NEG: &str = "the parts attract: their cross interaction in the stray-field energy is negative";
            for c in &main_rows {
                let name = format!("above_direct(R={})", c.r);
                if all_converged {
                    let gap = c.energy - direct.energy();
                    rep.check_flag(
                        &name,
                        ABOVE,
                        gap > 0.0,
                        gap,
                        format!("E(R) = {:.10}, direct = {:.10}", c.energy, direct.energy()),
                    );
                } else {
                    rep.untested(&name, ABOVE, "unconverged input".into());
                }
                rep.check_flag(
                    &format!("attractive_interaction(R={})", c.r),
                    NEG,
                    c.interaction < 0.0,
                    -c.interaction,
                    format!("interaction = {:.6e}", c.interaction),
                );
            }
        }
        Signature::Repulsive => {
            const DEC: &str = "for a splitting partition the concatenation energy decreases as the parts move apart";
            for w in main_rows.windows(2) {
                let drop = w[0].energy - w[1].energy;
                let name = format!("decreasing(R={} -> {})", w[0].r, w[1].r);
                if all_converged {
                    rep.check_flag(
                        &name,
                        DEC,
                        drop > 0.0,
                        drop,
                        format!("E = {:.10} -> {:.10}", w[0].energy, w[1].energy),
                    );
                } else {
                    rep.untested(&name, DEC, "unconverged input".into());
                }
            }
        }
    }

    Ok(SplitOutcome {
        report: rep,
        atoms,
        atom_energies,
        direct_energy: direct.energy(),
        rows: main_rows,
        fit_c,
        fit_slope,
        signature,
    })
}
