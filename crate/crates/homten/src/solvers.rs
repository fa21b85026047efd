//! Linear solvers for the preconditioned cell problem: conjugate gradients
//! on full tensors, Richardson iteration, truncated minimal-residual
//! iteration for low-rank tensors, and a rank-continuation wrapper.

use num_complex::Complex64;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::homog::operator::{
    apply_operator, build_rhs, check_zero_mean, effective_coefficient, enforce_zero_mean,
    spectrum_bounds, OperatorContext,
};
use crate::tensors::{Tensor, TensorFormat, TruncationPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Pcg,
    Richardson,
    Minres,
}

impl SolverMethod {
    pub fn name(self) -> &'static str {
        match self {
            SolverMethod::Pcg => "pcg",
            SolverMethod::Richardson => "richardson",
            SolverMethod::Minres => "minres",
        }
    }
}

impl std::str::FromStr for SolverMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pcg" => Ok(SolverMethod::Pcg),
            "richardson" => Ok(SolverMethod::Richardson),
            "minres" => Ok(SolverMethod::Minres),
            other => Err(Error::Config(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub residual_tol: f64,
    /// Iterations without improving on the best residual before the
    /// minimal-residual iteration stops.
    pub stagnation_window: usize,
    /// Richardson on low-rank tensors diverges under heavy truncation; it
    /// stays disabled unless explicitly requested.
    pub allow_lowrank_richardson: bool,
}

impl SolverConfig {
    pub fn new(max_iter: usize, residual_tol: f64) -> Result<Self> {
        if residual_tol <= 0.0 || !residual_tol.is_finite() {
            return Err(Error::Config(format!(
                "residual tolerance must be positive, got {residual_tol}"
            )));
        }
        Ok(SolverConfig {
            max_iter,
            residual_tol,
            stagnation_window: 1,
            allow_lowrank_richardson: false,
        })
    }

    pub fn with_stagnation_window(mut self, window: usize) -> Self {
        self.stagnation_window = window.max(1);
        self
    }
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub index: usize,
    /// Euclidean norm of the residual coefficients (the L2 norm of the
    /// residual polynomial).
    pub residual_norm: f64,
    pub omega: f64,
    pub ranks: Vec<usize>,
    /// Error bound of the iterate truncation that led to this residual;
    /// zero on the full path. Residual increases between consecutive
    /// records stay within this bound times the operator norm.
    pub trunc_bound: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Tolerance,
    Stagnation,
    MaxIter,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Tolerance => "tolerance",
            StopReason::Stagnation => "stagnation",
            StopReason::MaxIter => "max_iter",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub a_eff: f64,
    pub param_count: usize,
}

fn finish(
    ctx: &OperatorContext,
    u: Tensor,
    iterations: Vec<IterationRecord>,
    converged: bool,
    stop_reason: StopReason,
) -> Result<(Tensor, SolveReport)> {
    let a_eff = effective_coefficient(ctx, &u)?;
    let param_count = u.param_count();
    Ok((
        u,
        SolveReport {
            iterations,
            converged,
            stop_reason,
            a_eff,
            param_count,
        },
    ))
}

/// P-weighted inner product of two full tensors.
fn p_inner(ctx: &OperatorContext, a: &Tensor, b: &Tensor) -> Complex64 {
    let (Tensor::Full(a), Tensor::Full(b)) = (a, b) else {
        unreachable!("P-weighted inner product is used on the full path only")
    };
    a.data
        .iter()
        .zip(ctx.p_hat_dense.data.iter())
        .zip(b.data.iter())
        .map(|((x, w), y)| x * w * y.conj())
        .sum()
}

fn residual(ctx: &OperatorContext, rhs: &Tensor, u: &Tensor) -> Result<Tensor> {
    let cu = apply_operator(ctx, u)?;
    let r = Tensor::linear_combine(1.0, rhs, -1.0, &cu)?;
    // the combination leaves a zero-frequency leftover at the scale of the
    // inputs' roundoff, which becomes significant relative to a small
    // residual; project it out before the residual is applied to again
    enforce_zero_mean(r)
}

/// Conjugate gradients in the P-weighted inner product, in which the
/// preconditioned operator is self-adjoint. Full tensors only; stopping is
/// on the Euclidean residual norm.
pub fn pcg_full(
    ctx: &OperatorContext,
    rhs: &Tensor,
    cfg: &SolverConfig,
) -> Result<(Tensor, SolveReport)> {
    if rhs.format() != TensorFormat::Full {
        return Err(Error::FormatMismatch("full", rhs.format().name()));
    }
    check_zero_mean(rhs)?;
    let start = Instant::now();
    let mut iterations = Vec::new();
    let mut u = Tensor::zero(TensorFormat::Full, &rhs.shape())?;
    let mut r = rhs.clone();
    let mut rnorm = r.norm();
    if rnorm <= cfg.residual_tol {
        return finish(ctx, u, iterations, true, StopReason::Tolerance);
    }
    let mut p = r.clone();
    let mut rz = p_inner(ctx, &r, &r).re;
    for index in 0..cfg.max_iter {
        let q = apply_operator(ctx, &p)?;
        let pq = p_inner(ctx, &p, &q).re;
        if pq <= 0.0 {
            return Err(Error::IndefiniteOperator);
        }
        let alpha = rz / pq;
        u = Tensor::linear_combine(1.0, &u, alpha, &p)?;
        r = Tensor::linear_combine(1.0, &r, -alpha, &q)?;
        rnorm = r.norm();
        iterations.push(IterationRecord {
            index,
            residual_norm: rnorm,
            omega: alpha,
            ranks: u.ranks(),
            trunc_bound: 0.0,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        if rnorm <= cfg.residual_tol {
            return finish(ctx, u, iterations, true, StopReason::Tolerance);
        }
        let rz_next = p_inner(ctx, &r, &r).re;
        let beta = rz_next / rz;
        rz = rz_next;
        p = Tensor::linear_combine(1.0, &r, beta, &p)?;
    }
    finish(ctx, u, iterations, false, StopReason::MaxIter)
}

/// Fixed-step iteration u <- u + omega (d - C u) with the spectrum-optimal
/// omega = 2 / (lambda_min + lambda_max).
pub fn richardson(
    ctx: &OperatorContext,
    rhs: &Tensor,
    cfg: &SolverConfig,
) -> Result<(Tensor, SolveReport)> {
    let lowrank = rhs.format() != TensorFormat::Full;
    if lowrank && !cfg.allow_lowrank_richardson {
        return Err(Error::LowRankRichardson);
    }
    check_zero_mean(rhs)?;
    let (lo, hi) = spectrum_bounds(ctx);
    let omega = 2.0 / (lo + hi);
    let start = Instant::now();
    let mut iterations = Vec::new();
    let mut u = if lowrank {
        Tensor::zero(rhs.format(), &rhs.shape())?
    } else {
        Tensor::zero(TensorFormat::Full, &rhs.shape())?
    };
    let mut last_bound = 0.0;
    for index in 0..cfg.max_iter {
        let r = residual(ctx, rhs, &u)?;
        let rnorm = r.norm();
        iterations.push(IterationRecord {
            index,
            residual_norm: rnorm,
            omega,
            ranks: u.ranks(),
            trunc_bound: last_bound,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        if rnorm <= cfg.residual_tol {
            return finish(ctx, u, iterations, true, StopReason::Tolerance);
        }
        u = Tensor::linear_combine(1.0, &u, omega, &r)?;
        last_bound = 0.0;
        if lowrank {
            if let Some(policy) = &ctx.policy {
                let (t, info) = u.truncate_with_info(policy)?;
                u = t;
                last_bound = info.bound;
            }
            u = enforce_zero_mean(u)?;
        }
    }
    finish(ctx, u, iterations, false, StopReason::MaxIter)
}

/// Minimal-residual iteration with truncation of the updated iterate at each
/// step: omega_i = (C r, r) / |C r|^2, u <- T[u + omega_i r]. Stops on the
/// residual tolerance, on stagnation (no improvement over the best residual
/// for `stagnation_window` iterations), or on the iteration cap; the
/// best-seen iterate is returned.
pub fn minres_truncated(
    ctx: &OperatorContext,
    rhs: &Tensor,
    cfg: &SolverConfig,
) -> Result<(Tensor, SolveReport)> {
    let u0 = Tensor::zero(rhs.format(), &rhs.shape())?;
    minres_from(ctx, rhs, cfg, u0)
}

/// Target for the rank-continuation sweep.
#[derive(Debug, Clone, Copy)]
pub enum ContinuationTarget {
    /// Met when (reference - a_eff) / reference >= -tol, i.e. the low-rank
    /// energy has dropped to (or below) the reference value.
    RelativeError { reference: f64, tol: f64 },
}

#[derive(Debug, Clone)]
pub struct ContinuationStage {
    pub rank: usize,
    pub a_eff: f64,
    pub relative_error: f64,
    pub report: SolveReport,
}

#[derive(Debug, Clone)]
pub struct ContinuationReport {
    pub stages: Vec<ContinuationStage>,
    /// First rank in the schedule that met the target, if any.
    pub achieving_rank: Option<usize>,
}

/// Runs the minimal-residual iteration over an increasing rank schedule,
/// warm-starting each stage from the previous solution, and stops at the
/// first rank meeting the target. The right-hand side is rebuilt per stage
/// so that its truncation matches the stage rank.
pub fn rank_continuation(
    ctx: &OperatorContext,
    cfg: &SolverConfig,
    schedule: &[usize],
    target: ContinuationTarget,
) -> Result<(Tensor, ContinuationReport)> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "rank schedule must be non-empty and strictly increasing".into(),
        ));
    }
    let mut stages = Vec::new();
    let mut warm: Option<Tensor> = None;
    for &rank in schedule {
        let policy = TruncationPolicy::fixed_rank(rank)?;
        let stage_ctx = ctx.with_policy(policy);
        let rhs = build_rhs(&stage_ctx)?;
        let u0 = match warm.take() {
            Some(u) => u,
            None => Tensor::zero(rhs.format(), &rhs.shape())?,
        };
        let (u, report) = minres_from(&stage_ctx, &rhs, cfg, u0)?;
        let a_eff = report.a_eff;
        let ContinuationTarget::RelativeError { reference, tol } = target;
        let relative_error = (reference - a_eff) / reference;
        let met = relative_error >= -tol;
        stages.push(ContinuationStage {
            rank,
            a_eff,
            relative_error,
            report,
        });
        if met {
            return Ok((
                u,
                ContinuationReport {
                    stages,
                    achieving_rank: Some(rank),
                },
            ));
        }
        warm = Some(u);
    }
    let u = warm.expect("at least one stage ran");
    Ok((
        u,
        ContinuationReport {
            stages,
            achieving_rank: None,
        },
    ))
}

/// Minimal-residual iteration starting from the supplied iterate.
fn minres_from(
    ctx: &OperatorContext,
    rhs: &Tensor,
    cfg: &SolverConfig,
    u0: Tensor,
) -> Result<(Tensor, SolveReport)> {
    check_zero_mean(rhs)?;
    let start = Instant::now();
    let mut iterations = Vec::new();
    let lowrank = rhs.format() != TensorFormat::Full;
    let mut u = u0;
    let mut best = u.clone();
    let mut best_norm = f64::INFINITY;
    let mut since_best = 0usize;
    let mut last_bound = 0.0;
    for index in 0..cfg.max_iter {
        let r = residual(ctx, rhs, &u)?;
        let rnorm = r.norm();
        if rnorm < best_norm {
            best_norm = rnorm;
            best = u.clone();
            since_best = 0;
        } else {
            since_best += 1;
        }
        if rnorm <= cfg.residual_tol {
            iterations.push(IterationRecord {
                index,
                residual_norm: rnorm,
                omega: 0.0,
                ranks: u.ranks(),
                trunc_bound: last_bound,
                elapsed_s: start.elapsed().as_secs_f64(),
            });
            return finish(ctx, u, iterations, true, StopReason::Tolerance);
        }
        if since_best >= cfg.stagnation_window {
            return finish(ctx, best, iterations, false, StopReason::Stagnation);
        }
        let cr = apply_operator(ctx, &r)?;
        let denom = cr.inner(&cr)?.re;
        if denom <= 1e-300 {
            return Err(Error::Breakdown);
        }
        let omega = cr.inner(&r)?.re / denom;
        iterations.push(IterationRecord {
            index,
            residual_norm: rnorm,
            omega,
            ranks: u.ranks(),
            trunc_bound: last_bound,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        u = Tensor::linear_combine(1.0, &u, omega, &r)?;
        last_bound = 0.0;
        if lowrank {
            if let Some(policy) = &ctx.policy {
                let (t, info) = u.truncate_with_info(policy)?;
                u = t;
                last_bound = info.bound;
            }
            u = enforce_zero_mean(u)?;
        }
    }
    // the last computed iterate may be worse than the best seen
    let r = residual(ctx, rhs, &u)?;
    let final_u = if r.norm() <= best_norm { u } else { best };
    finish(ctx, final_u, iterations, false, StopReason::MaxIter)
}
