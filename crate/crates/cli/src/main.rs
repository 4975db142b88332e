//! `neelwall`: minimiser and experiment harness for one-dimensional Néel walls.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 solver
//! non-convergence, 3 a failed verdict.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use neel_core::experiments::{
    self, appendix_suite, decay_experiment, energy_table, l1_parts_scan, local_experiment, selftest, splitting_diagnostic,
    structure_experiment, width_diagnostic, AppendixConfig, DecayConfig, ExperimentReport, L1ScanConfig, LocalConfig,
    SelftestOptions, SolveSpec, SplitConfig, StructureConfig, TableConfig, WidthConfig,
};
use neel_core::{FieldParam, Init, MinimizeResult, NeelError, Profile, WindingNumber};

use config::{resolve, ConfigError};

const EXPERIMENTS: [&str; 8] = ["table", "split", "structure", "decay", "l1scan", "localest", "width", "appendix"];

#[derive(Parser, Debug)]
#[command(name = "neelwall", version, about = "Degree-constrained Néel wall minimiser and verification harness")]
struct Cli {
    /// Worker threads for the experiment fan-out (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON configuration document.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one configuration field, e.g. `--set solve.point_count=513`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimise the energy at one degree and field.
    Minimize,
    /// Run a named experiment and write its report.
    Experiment {
        /// One of: table, split, structure, decay, l1scan, localest, width, appendix.
        name: String,
    },
    /// Run the fast invariant suite.
    Selftest,
}

/// Configuration of `minimize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
struct MinimizeRun {
    h: f64,
    /// Degree as text: `"a"`, `"2-a"`, `"1+a"`, `"3"`, ...
    degree: String,
    /// Starting wall positions; empty uses the default layout.
    wall_positions: Vec<f64>,
    /// Start from this profile snapshot instead of an ansatz.
    input_profile: Option<String>,
    solve: SolveSpec,
}

impl Default for MinimizeRun {
    fn default() -> Self {
        Self {
            h: 0.9,
            degree: "a".into(),
            wall_positions: Vec::new(),
            input_profile: None,
            solve: SolveSpec::default(),
        }
    }
}

impl MinimizeRun {
    fn degree(&self) -> neel_core::Result<(FieldParam, WindingNumber)> {
        let p = FieldParam::new(self.h)?;
        let d = if p.is_unit() {
            WindingNumber::parse(&self.degree)?.normalized(&p)
        } else {
            experiments::layout::parse_degree(&self.degree, &p)?
        };
        Ok((p, d))
    }

    fn violations(&self) -> Vec<String> {
        let mut v = self.solve.violations();
        if let Err(e) = self.degree() {
            v.push(e.to_string());
        }
        if self.wall_positions.iter().any(|x| x.abs() >= self.solve.half_width) {
            v.push(format!("wall_positions must lie inside (-{0}, {0})", self.solve.half_width));
        }
        v
    }
}

/// A run that finished without a configuration error.
enum Finish {
    Done,
    NotConverged,
    VerdictFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(Finish::Done) => ExitCode::SUCCESS,
        Ok(Finish::NotConverged) => ExitCode::from(2),
        Ok(Finish::VerdictFailed) => ExitCode::from(3),
        Err(e) => {
            if let Some(c) = e.downcast_ref::<ConfigError>() {
                eprint!("{c}");
                return ExitCode::from(1);
            }
            eprintln!("error: {e:#}");
            match e.downcast_ref::<NeelError>() {
                Some(NeelError::NonFinite { .. } | NeelError::ExtensionNotConverged { .. }) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Finish> {
    let cfg_path = cli.config.as_deref();
    match &cli.command {
        Command::Minimize => {
            let run: MinimizeRun = resolve(cfg_path, &cli.sets, MinimizeRun::violations)?;
            if cli.print_config {
                return print_config(&run);
            }
            cmd_minimize(&run, &cli.out)
        }
        Command::Selftest => {
            let opts: SelftestOptions = resolve(cfg_path, &cli.sets, |_| Vec::new())?;
            if cli.print_config {
                return print_config(&opts);
            }
            let rep = selftest(&opts)?;
            finish_report(&rep, &cli.out)
        }
        Command::Experiment { name } => cmd_experiment(name, cli),
    }
}

fn print_config<T: Serialize>(cfg: &T) -> anyhow::Result<Finish> {
    println!("{}", serde_json::to_string_pretty(cfg)?);
    Ok(Finish::Done)
}

fn cmd_minimize(run: &MinimizeRun, out: &Path) -> anyhow::Result<Finish> {
    let (p, d) = run.degree()?;
    let grid = run.solve.grid()?;
    let init = if let Some(path) = &run.input_profile {
        let prof = Profile::read_csv(Path::new(path), p).with_context(|| format!("reading {path}"))?;
        if prof.degree() != d {
            return Err(ConfigError(vec![format!(
                "input profile has degree {}, the configuration asks for {d}",
                prof.degree()
            )])
            .into());
        }
        Init::Profile(prof)
    } else if run.wall_positions.is_empty() {
        let start = neel_core::initial_ansatz(
            &d,
            &p,
            &grid,
            &experiments::escape_layout(&d, &p, &run.solve),
            run.solve.core_scale,
        )?;
        Init::Profile(start)
    } else {
        Init::Ansatz {
            wall_positions: run.wall_positions.clone(),
            core_scale: run.solve.core_scale,
        }
    };
    let result = neel_core::minimize(&d, &p, &grid, &run.solve.solver, init)?;
    write_minimizer(&result, run, out)?;
    println!(
        "degree {} at h = {}: energy {:.10}, {} walls, {} iterations, gradient {:.2e}{}",
        result.degree,
        result.h,
        result.energy(),
        result.wall_count,
        result.iterations,
        result.grad_norm,
        if result.converged { "" } else { " (not converged)" }
    );
    Ok(if result.converged { Finish::Done } else { Finish::NotConverged })
}

fn write_minimizer(result: &MinimizeResult, run: &MinimizeRun, out: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    result.profile().write_csv(&out.join("profile.csv"))?;
    let doc = serde_json::json!({ "run": run, "result": result });
    std::fs::write(out.join("result.json"), serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

/// File-name fragment for a degree: `2-α/π` becomes `2-a`.
fn degree_tag(d: &WindingNumber) -> String {
    d.to_string().replace("α/π", "a")
}

fn write_profile(result: &MinimizeResult, dir: &Path, stem: &str) -> anyhow::Result<()> {
    let dir = dir.join("profiles");
    std::fs::create_dir_all(&dir)?;
    result.profile().write_csv(&dir.join(format!("{stem}.csv")))?;
    Ok(())
}

fn finish_report(rep: &ExperimentReport, out: &Path) -> anyhow::Result<Finish> {
    let (csv, json) = rep.write(out)?;
    for v in &rep.verdicts {
        println!("{:<8} {:<32} {}", format!("{:?}", v.status).to_uppercase(), v.name, v.detail);
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(if rep.any_failed() { Finish::VerdictFailed } else { Finish::Done })
}

fn cmd_experiment(name: &str, cli: &Cli) -> anyhow::Result<Finish> {
    let path = cli.config.as_deref();
    let sets = &cli.sets;
    let out = &cli.out;
    macro_rules! config {
        ($ty:ty, $check:expr) => {{
            let cfg: $ty = resolve(path, sets, $check)?;
            if cli.print_config {
                return print_config(&cfg);
            }
            cfg
        }};
    }
    match name {
        "table" => {
            let cfg = config!(TableConfig, experiments::table::table_violations);
            let table = energy_table(&cfg)?;
            for cell in &table.cells {
                if let Ok(r) = &cell.result {
                    write_profile(r, out, &format!("table_h{}_d{}", cell.h, degree_tag(&cell.degree)))?;
                }
            }
            finish_report(&table.report, out)
        }
        "split" => {
            let cfg = config!(SplitConfig, experiments::splitting::split_violations);
            finish_report(&splitting_diagnostic(&cfg)?.report, out)
        }
        "structure" => {
            let cfg = config!(StructureConfig, experiments::structure::structure_violations);
            let (r, rep) = structure_experiment(&cfg)?;
            write_profile(&r, out, &format!("structure_h{}_d{}", r.h, degree_tag(&r.profile().degree())))?;
            finish_report(&rep, out)
        }
        "decay" => {
            let cfg = config!(DecayConfig, experiments::decay::decay_violations);
            let (r, rep) = decay_experiment(&cfg)?;
            write_profile(&r, out, &format!("decay_h{}_d{}", r.h, degree_tag(&r.profile().degree())))?;
            finish_report(&rep, out)
        }
        "l1scan" => {
            let cfg = config!(L1ScanConfig, experiments::ladder::l1_scan_violations);
            finish_report(&l1_parts_scan(&cfg)?, out)
        }
        "localest" => {
            let cfg = config!(LocalConfig, experiments::local::local_violations);
            let (r, rep) = local_experiment(&cfg)?;
            write_profile(&r, out, &format!("localest_h{}_d{}", r.h, degree_tag(&r.profile().degree())))?;
            finish_report(&rep, out)
        }
        "width" => {
            let cfg = config!(WidthConfig, experiments::ladder::width_violations);
            finish_report(&width_diagnostic(&cfg)?, out)
        }
        "appendix" => {
            let cfg = config!(AppendixConfig, |_: &AppendixConfig| Vec::new());
            finish_report(&appendix_suite(&cfg)?, out)
        }
        other => Err(ConfigError(vec![format!(
            "unknown experiment `{other}`; valid names: {}",
            EXPERIMENTS.join(", ")
        )])
        .into()),
    }
}
