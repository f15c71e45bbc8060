//! Score mode-count recovery on a synthetic family with known ground truth.
//!
//! The family places `m` equally spaced Gaussian bumps whose width shrinks
//! with both `m` and a sharpness parameter `k`, so the true mode count is
//! exactly `m` by construction. Each trial draws a sample, runs bandwidth
//! selection, and checks whether the persistent mode count matches. This is
//! the harness behind the `bench` subcommand.
//!
//! Run with: cargo run --release --example recovery_benchmark

use topomix::bandwidth::MeasureKind;
use topomix::bench::{evaluate_recovery, FkmSpec};

fn main() {
    let (n, trials, seed) = (500, 20, 0u64);
    println!("n = {n}, {trials} trials per configuration, seed {seed}");
    println!(
        "{:>3} {:>3} {:>6} {:>9}  distribution",
        "k", "m", "hits", "rate"
    );
    for m in [1, 2, 3, 4, 10] {
        let spec = FkmSpec::new(3, m).unwrap();
        let stats =
            evaluate_recovery(spec, n, trials, MeasureKind::InverseLebesgue, seed).unwrap();
        let dist: Vec<String> = stats
            .ucat_distribution
            .iter()
            .map(|(ucat, count)| format!("{ucat}:{count}"))
            .collect();
        println!(
            "{:>3} {:>3} {:>6} {:>8.0}%  {}",
            spec.k,
            spec.m,
            stats.ucat_hits,
            100.0 * stats.hit_rate(),
            dist.join(" ")
        );
    }
}
