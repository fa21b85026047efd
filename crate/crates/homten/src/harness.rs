//! Experiment front-end: run configurations, the experiment families from
//! the numerical study, and CSV/JSON output writers.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::homog::operator::{build_rhs, OperatorContext};
use crate::homog::{GridSpec, MaterialSpec, Scheme};
use crate::solvers::{
    minres_truncated, pcg_full, rank_continuation, richardson, ContinuationTarget,
    IterationRecord, SolveReport, SolverConfig, SolverMethod,
};
use crate::tensors::{TensorFormat, TruncationPolicy};

/// Flat parameter set describing one solve. Every field maps to one CLI
/// flag and one `key = value` line of a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dimension: usize,
    pub grid_n: usize,
    /// "constant" | "square" | "stochastic"
    pub material: String,
    /// Inclusion contrast rho for the square material; the value itself for
    /// the constant material.
    pub contrast: f64,
    pub anisotropic: bool,
    pub seed: u64,
    /// "gani" | "ga"
    pub scheme: String,
    /// "pcg" | "richardson" | "minres"
    pub solver: String,
    /// "full" | "cp" | "tucker" | "tt"
    pub format: String,
    pub rank: Option<usize>,
    pub rank_schedule: Option<Vec<usize>>,
    pub tol: f64,
    pub max_iter: usize,
    /// Grid multiplier alpha for low-rank-vs-full comparisons.
    pub grid_multiplier: usize,
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dimension: 2,
            grid_n: 45,
            material: "square".into(),
            contrast: 10.0,
            anisotropic: false,
            seed: 0,
            scheme: "gani".into(),
            solver: "pcg".into(),
            format: "full".into(),
            rank: None,
            rank_schedule: None,
            tol: 1e-6,
            max_iter: 1000,
            grid_multiplier: 3,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn material_spec(&self) -> Result<MaterialSpec> {
        let base = match self.material.as_str() {
            "constant" => MaterialSpec::constant(self.contrast),
            "square" => MaterialSpec::square(self.contrast),
            "stochastic" => MaterialSpec::stochastic(self.seed),
            other => return Err(Error::Config(format!("unknown material '{other}'"))),
        };
        Ok(if self.anisotropic {
            base.with_anisotropy()
        } else {
            base
        })
    }

    pub fn scheme(&self) -> Result<Scheme> {
        self.scheme.parse()
    }

    pub fn solver(&self) -> Result<SolverMethod> {
        self.solver.parse()
    }

    pub fn format(&self) -> Result<TensorFormat> {
        self.format.parse()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension != 2 && self.dimension != 3 {
            return Err(Error::BadDimension(self.dimension));
        }
        if self.grid_n % 2 == 0 {
            return Err(Error::EvenGridSize(self.grid_n));
        }
        let format = self.format()?;
        if format == TensorFormat::Cp && self.dimension != 2 {
            return Err(Error::Config(
                "cp format is limited to two dimensions".into(),
            ));
        }
        let solver = self.solver()?;
        if solver == SolverMethod::Pcg && format != TensorFormat::Full {
            return Err(Error::Config(
                "pcg runs on full tensors; choose minres for low-rank formats".into(),
            ));
        }
        if format != TensorFormat::Full && self.rank.is_none() && self.rank_schedule.is_none() {
            return Err(Error::Config(
                "low-rank formats need --rank or --rank-schedule".into(),
            ));
        }
        self.material_spec()?;
        self.scheme()?;
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return Err(Error::Config(format!("bad tolerance {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if self.grid_multiplier == 0 || self.grid_multiplier % 2 != 1 {
            return Err(Error::Config(
                "grid multiplier must be odd so refined grids stay odd".into(),
            ));
        }
        Ok(())
    }

    /// Parses a flat `key = value` config file; '#' starts a comment.
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad value '{value}' for {what}"));
        match key {
            "dimension" | "dim" => self.dimension = value.parse().map_err(|_| bad(key))?,
            "grid_n" => self.grid_n = value.parse().map_err(|_| bad(key))?,
            "material" => self.material = value.into(),
            "contrast" => self.contrast = value.parse().map_err(|_| bad(key))?,
            "anisotropic" => self.anisotropic = value.parse().map_err(|_| bad(key))?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key))?,
            "scheme" => self.scheme = value.into(),
            "solver" => self.solver = value.into(),
            "format" => self.format = value.into(),
            "rank" => self.rank = Some(value.parse().map_err(|_| bad(key))?),
            "rank_schedule" => {
                let ranks: std::result::Result<Vec<usize>, _> =
                    value.split(',').map(|s| s.trim().parse()).collect();
                self.rank_schedule = Some(ranks.map_err(|_| bad(key))?);
            }
            "tol" => self.tol = value.parse().map_err(|_| bad(key))?,
            "max_iter" => self.max_iter = value.parse().map_err(|_| bad(key))?,
            "grid_multiplier" => self.grid_multiplier = value.parse().map_err(|_| bad(key))?,
            "out" => self.out = Some(value.into()),
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }
}

/// One completed solve together with its derived metrics.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: RunConfig,
    pub report: SolveReport,
    pub a_eff: f64,
    /// (reference - a_eff) / reference when a reference value is present.
    pub relative_error: Option<f64>,
    pub param_count: usize,
    pub wall_s: f64,
}

impl ExperimentResult {
    fn check_finite(&self) -> Result<()> {
        let mut vals = vec![self.a_eff, self.wall_s];
        if let Some(e) = self.relative_error {
            vals.push(e);
        }
        for it in &self.report.iterations {
            vals.extend([it.residual_norm, it.omega, it.elapsed_s]);
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

pub fn run_case(config: &RunConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let grid = GridSpec::new(config.dimension, config.grid_n)?;
    let spec = config.material_spec()?;
    let format = config.format()?;
    let policy = match (format, config.rank) {
        (TensorFormat::Full, _) => None,
        (_, Some(r)) => Some(TruncationPolicy::fixed_rank(r)?),
        (_, None) => Some(TruncationPolicy::fixed_rank(
            *config
                .rank_schedule
                .as_ref()
                .expect("validated")
                .first()
                .ok_or_else(|| Error::Config("empty rank schedule".into()))?,
        )?),
    };
    let ctx = OperatorContext::new(config.scheme()?, grid, &spec, format, policy)?;
    let rhs = build_rhs(&ctx)?;
    let cfg = SolverConfig::new(config.max_iter, config.tol)?.with_stagnation_window(10);
    let start = Instant::now();
    let (_, report) = match config.solver()? {
        SolverMethod::Pcg => pcg_full(&ctx, &rhs, &cfg)?,
        SolverMethod::Richardson => richardson(&ctx, &rhs, &cfg)?,
        SolverMethod::Minres => minres_truncated(&ctx, &rhs, &cfg)?,
    };
    let wall_s = start.elapsed().as_secs_f64();
    let result = ExperimentResult {
        a_eff: report.a_eff,
        param_count: report.param_count,
        config: config.clone(),
        report,
        relative_error: None,
        wall_s,
    };
    result.check_finite()?;
    Ok(result)
}

/// Experiment families of the numerical study, reduced to desk scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Residual histories of the truncated iteration at several ranks.
    Residuum,
    /// Relative error of low-rank solutions against the full solve, per rank.
    ErrorVsRank,
    /// Rank continuation on the refined grid against a full coarse solve.
    RankTable,
    /// Wall time and parameter counts over a grid refinement sequence.
    Scaling,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Residuum => "residuum",
            Family::ErrorVsRank => "error-vs-rank",
            Family::RankTable => "rank-table",
            Family::Scaling => "scaling",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "residuum" => Ok(Family::Residuum),
            "error-vs-rank" => Ok(Family::ErrorVsRank),
            "rank-table" => Ok(Family::RankTable),
            "scaling" => Ok(Family::Scaling),
            other => Err(Error::Config(format!("unknown experiment family '{other}'"))),
        }
    }
}

/// One row of the sweep-level summary table.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub label: String,
    pub grid_n: usize,
    pub rank: usize,
    pub a_eff: f64,
    pub relative_error: Option<f64>,
    pub final_residual: f64,
    pub iterations: usize,
    pub param_count: usize,
    pub wall_s: f64,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub family: Family,
    pub results: Vec<ExperimentResult>,
    pub rows: Vec<SweepRow>,
}

fn base_config(_family: Family) -> RunConfig {
    RunConfig {
        material: "square".into(),
        out: None,
        ..RunConfig::default()
    }
}

fn final_residual(report: &SolveReport) -> f64 {
    report
        .iterations
        .iter()
        .map(|r| r.residual_norm)
        .fold(f64::INFINITY, f64::min)
}

fn row_from(label: &str, result: &ExperimentResult) -> SweepRow {
    SweepRow {
        label: label.into(),
        grid_n: result.config.grid_n,
        rank: result.config.rank.unwrap_or(0),
        a_eff: result.a_eff,
        relative_error: result.relative_error,
        final_residual: final_residual(&result.report),
        iterations: result.report.iterations.len(),
        param_count: result.param_count,
        wall_s: result.wall_s,
    }
}

/// Runs one experiment family at desk scale and returns its per-run results
/// plus the summary table, sorted by (N, rank).
pub fn replicate_experiment(family: Family) -> Result<Sweep> {
    let mut results = Vec::new();
    let mut rows = Vec::new();
    match family {
        Family::Residuum => {
            // truncated iteration on a fixed grid: higher rank caps reach a
            // lower residual plateau
            for rank in [1usize, 3, 5] {
                let config = RunConfig {
                    grid_n: 135,
                    solver: "minres".into(),
                    format: "tt".into(),
                    rank: Some(rank),
                    tol: 1e-12,
                    max_iter: 400,
                    ..base_config(family)
                };
                let result = run_case(&config)?;
                rows.push(row_from("residuum", &result));
                results.push(result);
            }
        }
        Family::ErrorVsRank => {
            // full reference on the same grid, then low-rank solves over a
            // rank sweep
            let full = RunConfig {
                grid_n: 45,
                scheme: "ga".into(),
                tol: 1e-10,
                ..base_config(family)
            };
            let reference = run_case(&full)?;
            let a_ref = reference.a_eff;
            results.push(reference);
            for rank in [1usize, 3, 5, 7] {
                let config = RunConfig {
                    grid_n: 45,
                    scheme: "ga".into(),
                    solver: "minres".into(),
                    format: "tt".into(),
                    rank: Some(rank),
                    tol: 1e-10,
                    max_iter: 300,
                    ..base_config(family)
                };
                let mut result = run_case(&config)?;
                result.relative_error = Some((result.a_eff - a_ref) / a_ref);
                rows.push(row_from("error-vs-rank", &result));
                results.push(result);
            }
        }
        Family::RankTable => {
            // full solve on the coarse grid, then rank continuation on the
            // alpha-times-refined grid until it reaches the same accuracy
            let coarse = RunConfig {
                grid_n: 45,
                scheme: "ga".into(),
                tol: 1e-6,
                ..base_config(family)
            };
            let reference = run_case(&coarse)?;
            let a_ref = reference.a_eff;
            let fine_n = coarse.grid_n * coarse.grid_multiplier;
            results.push(reference);
            let grid = GridSpec::new(2, fine_n)?;
            let spec = MaterialSpec::square(10.0);
            let ctx = OperatorContext::new(
                Scheme::Ga,
                grid,
                &spec,
                TensorFormat::Tt,
                Some(TruncationPolicy::fixed_rank(1)?),
            )?;
            let cfg = SolverConfig::new(300, 1e-10)?.with_stagnation_window(10);
            let target = ContinuationTarget::RelativeError {
                reference: a_ref,
                tol: 0.0,
            };
            let start = Instant::now();
            let (_, report) = rank_continuation(&ctx, &cfg, &[1, 3, 5, 7], target)?;
            let wall_s = start.elapsed().as_secs_f64();
            for stage in &report.stages {
                let config = RunConfig {
                    grid_n: fine_n,
                    scheme: "ga".into(),
                    solver: "minres".into(),
                    format: "tt".into(),
                    rank: Some(stage.rank),
                    tol: 1e-10,
                    max_iter: 300,
                    ..base_config(family)
                };
                let result = ExperimentResult {
                    config,
                    a_eff: stage.a_eff,
                    relative_error: Some(stage.relative_error),
                    param_count: stage.report.param_count,
                    report: stage.report.clone(),
                    wall_s: wall_s / report.stages.len() as f64,
                };
                result.check_finite()?;
                let mut row = row_from("rank-table", &result);
                if report.achieving_rank == Some(stage.rank) {
                    row.label = "rank-table-achieving".into();
                }
                rows.push(row);
                results.push(result);
            }
        }
        Family::Scaling => {
            // fixed iteration budgets so the timing reflects per-iteration
            // cost; the first (smallest) solve doubles as the warm-up and is
            // re-run before timing
            let warm = RunConfig {
                grid_n: 45,
                tol: 1e-6,
                ..base_config(family)
            };
            run_case(&warm)?;
            for n in [45usize, 135, 405] {
                let full = RunConfig {
                    grid_n: n,
                    tol: 1e-30,
                    max_iter: 25,
                    ..base_config(family)
                };
                let result = run_case(&full)?;
                rows.push(row_from("scaling-full", &result));
                results.push(result);
                let lowrank = RunConfig {
                    grid_n: n,
                    solver: "minres".into(),
                    format: "tt".into(),
                    rank: Some(5),
                    tol: 1e-30,
                    max_iter: 25,
                    ..base_config(family)
                };
                let result = run_case(&lowrank)?;
                rows.push(row_from("scaling-lowrank", &result));
                results.push(result);
            }
        }
    }
    rows.sort_by(|a, b| (a.grid_n, a.rank).cmp(&(b.grid_n, b.rank)));
    Ok(Sweep {
        family,
        results,
        rows,
    })
}

// ---------------------------------------------------------------------------
// output writing

/// Formats a float with 17 significant digits, enough for bit-exact
/// round-tripping through decimal.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.display().to_string(),
        source: e,
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text.as_bytes()).map_err(io_err(path))
}

pub fn iterations_csv(records: &[IterationRecord]) -> String {
    let mut out = String::from("iter,residual_norm,omega,rank_max,elapsed_s\n");
    for r in records {
        let rank_max = r.ranks.iter().copied().max().unwrap_or(0);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.index,
            fmt_float(r.residual_norm),
            fmt_float(r.omega),
            rank_max,
            fmt_float(r.elapsed_s)
        );
    }
    out
}

/// JSON summary of one run: config echo plus derived metrics. Written by
/// hand so that floats carry 17 significant digits.
pub fn summary_json(result: &ExperimentResult) -> String {
    let c = &result.config;
    let mut s = String::from("{\n  \"config\": {\n");
    let _ = writeln!(s, "    \"dimension\": {},", c.dimension);
    let _ = writeln!(s, "    \"grid_n\": {},", c.grid_n);
    let _ = writeln!(s, "    \"material\": {:?},", c.material);
    let _ = writeln!(s, "    \"contrast\": {},", fmt_float(c.contrast));
    let _ = writeln!(s, "    \"anisotropic\": {},", c.anisotropic);
    let _ = writeln!(s, "    \"seed\": {},", c.seed);
    let _ = writeln!(s, "    \"scheme\": {:?},", c.scheme);
    let _ = writeln!(s, "    \"solver\": {:?},", c.solver);
    let _ = writeln!(s, "    \"format\": {:?},", c.format);
    match c.rank {
        Some(r) => {
            let _ = writeln!(s, "    \"rank\": {r},");
        }
        None => {
            let _ = writeln!(s, "    \"rank\": null,");
        }
    }
    match &c.rank_schedule {
        Some(ranks) => {
            let list: Vec<String> = ranks.iter().map(|r| r.to_string()).collect();
            let _ = writeln!(s, "    \"rank_schedule\": [{}],", list.join(", "));
        }
        None => {
            let _ = writeln!(s, "    \"rank_schedule\": null,");
        }
    }
    let _ = writeln!(s, "    \"tol\": {},", fmt_float(c.tol));
    let _ = writeln!(s, "    \"max_iter\": {},", c.max_iter);
    let _ = writeln!(s, "    \"grid_multiplier\": {}", c.grid_multiplier);
    s.push_str("  },\n");
    let _ = writeln!(s, "  \"a_eff\": {},", fmt_float(result.a_eff));
    match result.relative_error {
        Some(e) => {
            let _ = writeln!(s, "  \"relative_error\": {},", fmt_float(e));
        }
        None => {
            let _ = writeln!(s, "  \"relative_error\": null,");
        }
    }
    let _ = writeln!(s, "  \"param_count\": {},", result.param_count);
    let _ = writeln!(s, "  \"converged\": {},", result.report.converged);
    let _ = writeln!(s, "  \"stop_reason\": {:?},", result.report.stop_reason.name());
    let _ = writeln!(s, "  \"iterations\": {},", result.report.iterations.len());
    let _ = writeln!(
        s,
        "  \"final_residual\": {},",
        fmt_float(final_residual(&result.report))
    );
    let _ = writeln!(s, "  \"wall_s\": {}", fmt_float(result.wall_s));
    s.push_str("}\n");
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "label,grid_n,rank,a_eff,relative_error,final_residual,iterations,param_count,wall_s\n",
    );
    for r in rows {
        let rel = r
            .relative_error
            .map(fmt_float)
            .unwrap_or_else(|| "".into());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.label,
            r.grid_n,
            r.rank,
            fmt_float(r.a_eff),
            rel,
            fmt_float(r.final_residual),
            r.iterations,
            r.param_count,
            fmt_float(r.wall_s)
        );
    }
    out
}

/// Writes per-run `iterations.csv` and `summary.json` into numbered
/// subdirectories of `dir`, plus a sweep-level CSV when rows are present.
pub fn write_outputs(
    results: &[ExperimentResult],
    rows: &[SweepRow],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for (i, result) in results.iter().enumerate() {
        let run_dir = dir.join(format!("run_{i:03}"));
        std::fs::create_dir_all(&run_dir).map_err(io_err(&run_dir))?;
        let iters = run_dir.join("iterations.csv");
        write_text(&iters, &iterations_csv(&result.report.iterations))?;
        written.push(iters);
        let summary = run_dir.join("summary.json");
        write_text(&summary, &summary_json(result))?;
        written.push(summary);
    }
    if !rows.is_empty() {
        let sweep = dir.join("sweep.csv");
        write_text(&sweep, &sweep_csv(rows))?;
        written.push(sweep);
    }
    Ok(written)
}
