use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use homten::harness::{replicate_experiment, run_case, write_outputs, Family, RunConfig};

/// FFT-based periodic homogenisation with low-rank tensor acceleration.
#[derive(Parser, Debug)]
#[command(name = "homten", version, about)]
struct Cli {
    /// Flat key = value config file; CLI flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run a predefined experiment family instead of a single case:
    /// residuum | error-vs-rank | rank-table | scaling.
    #[arg(long)]
    experiment: Option<String>,
    /// Spatial dimension (2 or 3).
    #[arg(long)]
    dim: Option<usize>,
    /// Grid size per direction (odd).
    #[arg(long)]
    grid_n: Option<usize>,
    /// Material: constant | square | stochastic.
    #[arg(long)]
    material: Option<String>,
    /// Inclusion contrast (square) or the coefficient value (constant).
    #[arg(long)]
    contrast: Option<f64>,
    /// Add the constant anisotropic part to the material.
    #[arg(long)]
    anisotropic: bool,
    /// Random seed for the stochastic material.
    #[arg(long)]
    seed: Option<u64>,
    /// Discretisation scheme: gani | ga.
    #[arg(long)]
    scheme: Option<String>,
    /// Solver: pcg | richardson | minres.
    #[arg(long)]
    solver: Option<String>,
    /// Tensor format: full | cp | tucker | tt.
    #[arg(long)]
    format: Option<String>,
    /// Fixed rank cap for low-rank formats.
    #[arg(long)]
    rank: Option<usize>,
    /// Comma-separated increasing rank schedule.
    #[arg(long)]
    rank_schedule: Option<String>,
    /// Residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Grid multiplier for low-rank-vs-full comparisons.
    #[arg(long)]
    grid_multiplier: Option<usize>,
    /// Output directory for CSV/JSON reports.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(cli: &Cli) -> homten::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.dim {
        cfg.dimension = v;
    }
    if let Some(v) = cli.grid_n {
        cfg.grid_n = v;
    }
    if let Some(v) = &cli.material {
        cfg.material = v.clone();
    }
    if let Some(v) = cli.contrast {
        cfg.contrast = v;
    }
    if cli.anisotropic {
        cfg.anisotropic = true;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = &cli.scheme {
        cfg.scheme = v.clone();
    }
    if let Some(v) = &cli.solver {
        cfg.solver = v.clone();
    }
    if let Some(v) = &cli.format {
        cfg.format = v.clone();
    }
    if let Some(v) = cli.rank {
        cfg.rank = Some(v);
    }
    if let Some(v) = &cli.rank_schedule {
        cfg.set("rank_schedule", v)?;
    }
    if let Some(v) = cli.tol {
        cfg.tol = v;
    }
    if let Some(v) = cli.max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = cli.grid_multiplier {
        cfg.grid_multiplier = v;
    }
    if let Some(v) = &cli.out {
        cfg.out = Some(v.display().to_string());
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> homten::Result<()> {
    if let Some(name) = &cli.experiment {
        let family: Family = name.parse()?;
        let sweep = replicate_experiment(family)?;
        for row in &sweep.rows {
            println!(
                "{:<24} N={:<4} rank={:<3} a_eff={:.10} iters={:<4} wall={:.3}s",
                row.label, row.grid_n, row.rank, row.a_eff, row.iterations, row.wall_s
            );
        }
        if let Some(dir) = &cli.out {
            let dir = dir.join(family.name());
            let files = write_outputs(&sweep.results, &sweep.rows, &dir)?;
            println!("wrote {} files under {}", files.len(), dir.display());
        }
        return Ok(());
    }
    let cfg = build_config(cli)?;
    let result = run_case(&cfg)?;
    println!(
        "a_eff = {:.12}  ({} iterations, {}, {} parameters, {:.3}s)",
        result.a_eff,
        result.report.iterations.len(),
        result.report.stop_reason.name(),
        result.param_count,
        result.wall_s
    );
    if let Some(dir) = &cfg.out {
        let files = write_outputs(std::slice::from_ref(&result), &[], &PathBuf::from(dir))?;
        println!("wrote {} files under {dir}", files.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
