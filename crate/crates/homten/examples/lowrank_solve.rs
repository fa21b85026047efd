//! Low-rank solve of the cell problem: the truncated minimal-residual
//! iteration in tensor-train format, compared against the full solver over
//! a sweep of rank caps.

use homten::homog::operator::{build_rhs, OperatorContext};
use homten::homog::{GridSpec, MaterialSpec, Scheme};
use homten::solvers::{minres_truncated, pcg_full, SolverConfig};
use homten::tensors::{TensorFormat, TruncationPolicy};

fn main() -> homten::Result<()> {
    let grid = GridSpec::new(2, 45)?;
    let spec = MaterialSpec::square(10.0);

    let full_ctx = OperatorContext::new(Scheme::GaNi, grid, &spec, TensorFormat::Full, None)?;
    let full_rhs = build_rhs(&full_ctx)?;
    let full_cfg = SolverConfig::new(1000, 1e-10 * full_rhs.norm())?;
    let (_, full) = pcg_full(&full_ctx, &full_rhs, &full_cfg)?;
    println!(
        "full reference: a_eff = {:.10} with {} parameters",
        full.a_eff, full.param_count
    );

    println!(
        "\n{:>5} {:>14} {:>12} {:>8} {:>6} {:>12}",
        "rank", "a_eff", "rel err", "params", "iters", "residual"
    );
    for rank in [1usize, 2, 3, 5, 7, 10] {
        let policy = TruncationPolicy::fixed_rank(rank)?;
        let ctx = OperatorContext::new(
            Scheme::GaNi,
            grid,
            &spec,
            TensorFormat::Tt,
            Some(policy),
        )?;
        let rhs = build_rhs(&ctx)?;
        let cfg = SolverConfig::new(400, 1e-10 * rhs.norm())?.with_stagnation_window(10);
        let (u, report) = minres_truncated(&ctx, &rhs, &cfg)?;
        let rel = (report.a_eff - full.a_eff).abs() / full.a_eff;
        let final_res = report
            .iterations
            .iter()
            .map(|r| r.residual_norm)
            .fold(f64::INFINITY, f64::min);
        println!(
            "{:>5} {:>14.10} {:>12.2e} {:>8} {:>6} {:>12.2e}",
            rank,
            report.a_eff,
            rel,
            u.param_count(),
            report.iterations.len(),
            final_res
        );
    }
    println!("\nhigher rank caps lower both the residual plateau and the error,");
    println!("while the parameter count stays far below the full grid.");
    Ok(())
}
