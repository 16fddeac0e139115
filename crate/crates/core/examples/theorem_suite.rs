//! Runs every theorem suite and prints one line per suite.
//!
//! ```text
//! cargo run --release --example theorem_suite -- [trials] [max_dim] [seed]
//! ```

use std::env;

use opclass::harness::{run_suite, HarnessConfig, SuiteReport};

fn main() -> opclass::Result<()> {
    let args: Vec<u64> = env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cfg = HarnessConfig {
        trials: args.first().copied().unwrap_or(50) as usize,
        max_dim: args.get(1).copied().unwrap_or(8) as usize,
        seed: args.get(2).copied().unwrap_or(42),
        ..Default::default()
    };
    let reports = run_suite(&["all".to_string()], &cfg)?;
    for r in &reports {
        println!(
            "{:<24} {:>4} trials  {:>4} pass  {:>4} skip  {:>3} fail  {:>6} ms",
            r.theorem_id,
            r.trials,
            r.passes,
            r.skips,
            r.failures.len(),
            r.wall_time_ms
        );
        for f in &r.failures {
            println!("    trial {} seed {}: {:?} ({})", f.trial, f.seed, f.reason, f.instance_ref);
        }
    }
    let all = SuiteReport::new(cfg, reports);
    println!("total {} ms, {} failures", all.wall_time_ms, all.total_failures);
    Ok(())
}
