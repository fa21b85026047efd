//! Runs the predefined experiment families through the harness and writes
//! their CSV/JSON reports into ./target/experiments.

use homten::harness::{replicate_experiment, write_outputs, Family};
use std::path::Path;

fn main() -> homten::Result<()> {
    let out = Path::new("target/experiments");
    for family in [Family::ErrorVsRank, Family::RankTable] {
        println!("== {} ==", family.name());
        let sweep = replicate_experiment(family)?;
        for row in &sweep.rows {
            let rel = row
                .relative_error
                .map(|e| format!("{e:+.3e}"))
                .unwrap_or_else(|| "-".into());
            println!(
                "  {:<22} N={:<4} rank={:<3} a_eff={:.10} rel_err={rel}",
                row.label, row.grid_n, row.rank, row.a_eff
            );
        }
        let dir = out.join(family.name());
        let files = write_outputs(&sweep.results, &sweep.rows, &dir)?;
        println!("  wrote {} files under {}", files.len(), dir.display());
    }
    println!("\nthe heavier 'residuum' and 'scaling' families run the same way:");
    println!("  homten --experiment residuum --out target/experiments");
    Ok(())
}
