//! Fast invariant suite: cross-checked stray-field evaluators, the analytic
//! gradient, the auxiliary infimum and the partition enumerator.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::degree::{DegreeExpr, FieldParam, WindingNumber};
use crate::energy::EnergyEvaluator;
use crate::error::Result;
use crate::grid::Grid;
use crate::profile::{clustered_positions, initial_ansatz};
use crate::stray::{
    dirichlet_energy_extension, h12_double_integral, SampledField, SlabSpec, SpectralOperator, DEFAULT_PADDING,
    SPECTRAL_NORMALISATION,
};

use super::appendix::aux_check;
use super::partitions::{candidate_parts, enumerate_partitions, Partition};
use super::report::{Cell, ExperimentReport};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SelftestOptions {
    /// Constant used by the spectral evaluator; changing it must break the suite.
    pub spectral_normalisation: f64,
    pub bumps: usize,
    pub gradient_profiles: usize,
    pub seed: u64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            spectral_normalisation: SPECTRAL_NORMALISATION,
            bumps: 50,
            gradient_profiles: 20,
            seed: 7,
        }
    }
}

/// `a e^{−((x−c)/w)²} cos(k (x − c))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussCos {
    pub a: f64,
    pub c: f64,
    pub w: f64,
    pub k: f64,
}

impl GaussCos {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        Self {
            a: rng.random_range(-2.0..2.0),
            c: rng.random_range(-3.0..3.0),
            w: rng.random_range(0.7..2.5),
            k: rng.random_range(0.0..2.0),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = x - self.c;
        self.a * (-(u / self.w).powi(2)).exp() * (self.k * u).cos()
    }

    /// `(1/2π) ∫ |ξ| |f̂(ξ)|² dξ` with
    /// `|f̂(ξ)| = (a w √π / 2) (e^{−w²(ξ−k)²/4} + e^{−w²(ξ+k)²/4})`, by Simpson's rule.
    pub fn exact_energy(&self) -> f64 {
        let amp = 0.5 * self.a * self.w * PI.sqrt();
        let g = |xi: f64| {
            let e = (-(self.w * (xi - self.k)).powi(2) / 4.0).exp() + (-(self.w * (xi + self.k)).powi(2) / 4.0).exp();
            xi * (amp * e).powi(2)
        };
        // even integrand: twice the half line
        let top = self.k + 14.0 / self.w;
        let n = 20_000;
        let h = top / n as f64;
        let sum: f64 = (0..=n)
            .map(|i| {
                let wgt = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                wgt * g(i as f64 * h)
            })
            .sum();
        2.0 * sum * h / 3.0 / (2.0 * PI)
    }
}

fn spectral(f: &SampledField, normalisation: f64) -> Result<f64> {
    let op = SpectralOperator::with_normalisation(f.len(), f.grid().spacing(), DEFAULT_PADDING, normalisation)?;
    Ok(op.energy(f.values()))
}

/// The three evaluators of `‖f‖²_{Ḣ^{1/2}}` on one field.
pub fn three_way(f: &SampledField, normalisation: f64) -> Result<(f64, f64, f64)> {
    let d = h12_double_integral(f);
    let s = spectral(f, normalisation)?;
    let e = dirichlet_energy_extension(f, &SlabSpec::for_grid(f.grid()))?.total;
    Ok((d, s, e))
}

const AGREE: &str = "double-integral, Fourier and extension evaluators agree (1% spectral, 5% extension)";

fn record_three_way(rep: &mut ExperimentReport, name: &str, label: &str, vals: (f64, f64, f64), reference: f64) {
    let (d, s, e) = vals;
    rep.row(vec![name.into(), label.into(), d.into(), s.into(), e.into(), reference.into()]);
    let rel = |x: f64| (x - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
    let worst = rel(d).max(rel(s)) / 0.01;
    let worst = worst.max(rel(e) / 0.05);
    rep.check_flag(
        name,
        AGREE,
        worst <= 1.0,
        1.0 - worst,
        format!("double {d:.6e}, spectral {s:.6e}, extension {e:.6e}, reference {reference:.6e}"),
    );
}

/// Lorentzian value `π/4` and the random bump suite.
pub fn stray_suite(opts: &SelftestOptions) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(
        "stray_agreement",
        &["check", "field", "double_integral", "spectral", "extension", "reference"],
    );
    rep.param("spectral_normalisation", opts.spectral_normalisation).param("bumps", opts.bumps);
    let g = Grid::new(200.0, 4001)?;
    let lorentz = SampledField::from_fn(g, |x| 1.0 / (1.0 + x * x));
    let vals = three_way(&lorentz, opts.spectral_normalisation)?;
    record_three_way(&mut rep, "lorentzian", "1/(1+x^2)", vals, PI / 4.0);

    let g = Grid::new(40.0, 1601)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for i in 0..opts.bumps {
        let b = GaussCos::random(&mut rng);
        let f = SampledField::from_fn(g, |x| b.eval(x));
        let vals = three_way(&f, opts.spectral_normalisation)?;
        let label = format!("a={:.3},c={:.3},w={:.3},k={:.3}", b.a, b.c, b.w, b.k);
        record_three_way(&mut rep, &format!("bump_{i}"), &label, vals, b.exact_energy());
    }
    Ok(rep)
}

/// Directional derivatives of the discrete energy against central differences.
pub fn gradient_suite(opts: &SelftestOptions) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("gradient_check", &["profile", "analytic", "finite_difference", "relative_error"]);
    rep.param("spectral_normalisation", opts.spectral_normalisation);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let degrees = ["a", "1-a", "1", "1+a", "2-a"];
    for i in 0..opts.gradient_profiles {
        let h: f64 = rng.random_range(0.05..0.99);
        let p = FieldParam::new(h)?;
        let d = WindingNumber::parse(degrees[rng.random_range(0..degrees.len())])?;
        let n = 2 * rng.random_range(60..160) + 1;
        let g = Grid::new(rng.random_range(10.0..25.0), n)?;
        let walls = crate::degree::expected_wall_count(&d, &p).max(1);
        let base = initial_ansatz(&d, &p, &g, &clustered_positions(walls, 2.5), 1.0)?;
        let mut phi = base.phi().to_vec();
        for v in phi[1..n - 1].iter_mut() {
            *v += rng.random_range(-0.2..0.2);
        }
        let op = SpectralOperator::with_normalisation(n, g.spacing(), DEFAULT_PADDING, opts.spectral_normalisation)?;
        let ev = EnergyEvaluator::with_operator(g, op);
        let (_, grad) = ev.energy_and_gradient(&phi, h);
        let dir: Vec<f64> = (0..n - 2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let analytic: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let eps = 1e-5;
        let shifted = |s: f64| -> f64 {
            let mut q = phi.clone();
            for (v, u) in q[1..n - 1].iter_mut().zip(&dir) {
                *v += s * u;
            }
            ev.breakdown_of(&q, h).total
        };
        let fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
        let rel = (analytic - fd).abs() / analytic.abs().max(1e-12);
        rep.row(vec![format!("h={h:.3},d={d},N={n}").into(), analytic.into(), fd.into(), rel.into()]);
        rep.check_le(
            &format!("gradient_{i}"),
            "the analytic gradient matches central differences to relative 1e-6",
            rel,
            1e-6,
            0.0,
        );
    }
    Ok(rep)
}

/// All tuples of candidate parts that form a valid partition.
pub fn brute_force_partitions(d: &DegreeExpr, p: &FieldParam, max_parts: usize) -> Vec<Partition> {
    let candidates = candidate_parts(d.int.max(0), p);
    let mut out = Vec::new();
    let mut idx: Vec<usize> = Vec::new();
    for len in 2..=max_parts {
        idx.clear();
        idx.resize(len, 0);
        loop {
            let q = Partition {
                parts: idx.iter().map(|&i| candidates[i]).collect(),
                target: *d,
            };
            if q.is_valid(p) {
                out.push(q);
            }
            // odometer increment
            let mut k = len;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < candidates.len() {
                    break;
                }
                idx[k] = 0;
                if k == 0 {
                    k = usize::MAX;
                    break;
                }
            }
            if k == usize::MAX || candidates.is_empty() {
                break;
            }
        }
    }
    out.sort_by(|a, b| a.parts.len().cmp(&b.parts.len()).then_with(|| a.parts.cmp(&b.parts)));
    out
}

/// Enumerator against the brute-force oracle for integer parts up to 3.
pub fn partition_suite(max_parts: usize) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("partition_oracle", &["h", "degree", "max_parts", "enumerated", "oracle"]);
    for h in [0.9, 1.0] {
        let p = FieldParam::new(h)?;
        for int in 0..=3 {
            for alpha in [-1, 0, 1] {
                let d = DegreeExpr::new(int, alpha);
                if !super::partitions::admissible(&d, &p) {
                    continue;
                }
                for mp in 2..=max_parts {
                    let got = enumerate_partitions(&d, &p, mp)?;
                    let want = brute_force_partitions(&d, &p, mp);
                    rep.row(vec![h.into(), d.to_string().into(), mp.into(), got.len().into(), want.len().into()]);
                    rep.check_flag(
                        &format!("partitions(h={h}, d={d}, max_parts={mp})"),
                        "the enumerator returns exactly the valid partitions",
                        got == want,
                        if got == want { 0.0 } else { -1.0 },
                        format!("{} enumerated, {} by brute force", got.len(), want.len()),
                    );
                }
            }
        }
    }
    Ok(rep)
}

/// Runs every part of the suite and merges the verdicts.
pub fn selftest(opts: &SelftestOptions) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("selftest", &["suite", "passed", "failed", "untested"]);
    rep.param("spectral_normalisation", opts.spectral_normalisation)
        .param("bumps", opts.bumps)
        .param("gradient_profiles", opts.gradient_profiles)
        .param("seed", opts.seed);
    let alphas: Vec<f64> = (0..=6).map(|k| k as f64 * PI / 12.0).collect();
    let parts = [
        stray_suite(opts)?,
        gradient_suite(opts)?,
        aux_check(&alphas, 1_000_000)?,
        partition_suite(4)?,
    ];
    use super::report::Status;
    for part in parts {
        rep.row(vec![
            Cell::from(part.name.as_str()),
            part.count(Status::Pass).into(),
            part.count(Status::Fail).into(),
            part.count(Status::Untested).into(),
        ]);
        rep.verdicts.extend(part.verdicts);
        rep.notes.extend(part.notes);
    }
    Ok(rep)
}
