//! Count the modes of a discretized density and split it into unimodal
//! pieces with the greedy sweep.
//!
//! The sweep walks left to right. One piece at a time is growing: it absorbs
//! every ascent of the input since the cell where it started. Older pieces
//! only hold or shrink, and they soak up descents newest-first. The growing
//! piece is locked once the input falls below the ascent it has accumulated,
//! and the next rise after that starts a new piece. The resulting count is
//! the smallest number of unimodal summands any decomposition can use — and
//! because a locked piece may still be falling across a cell where the next
//! piece is rising, two pieces can share a local maximum, so the count can be
//! *less* than the number of local maxima.
//!
//! Run with: cargo run --example count_modes

use topomix::grid::{Grid, GridDensity};
use topomix::unimodal::{count_local_maxima, is_unimodal, sweep_decompose, ucat_density};

fn describe(label: &str, values: &[f64]) {
    let grid = Grid::new(0.0, 0.5, values.len()).unwrap();
    let f = GridDensity::new(grid, values.to_vec()).unwrap();

    println!("{label}");
    println!("  local maxima : {}", count_local_maxima(values));
    println!("  ucat         : {}", ucat_density(&f));

    let parts = sweep_decompose(values).unwrap();
    println!("  sweep pieces : {}", parts.len());
    for (i, part) in parts.iter().enumerate() {
        let mass: f64 = part.iter().sum::<f64>() * grid.dx;
        println!(
            "    piece {i}: mass {:.4}, unimodal = {}",
            mass,
            is_unimodal(part)
        );
    }

    // The pieces sum back to the input (up to float rounding).
    let mut recon = vec![0.0; values.len()];
    for part in &parts {
        for (r, v) in recon.iter_mut().zip(part) {
            *r += v;
        }
    }
    let max_err = recon
        .iter()
        .zip(values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("  reconstruction max error: {max_err:e}");
    println!();
}

fn main() {
    // A density with three humps of very different heights, separated by deep
    // valleys. Every hump needs its own piece here: one piece per mode.
    let valleys = vec![
        0.2, 0.8, 1.6, 0.9, 0.3, // hump 1
        0.5, 2.4, 1.1, // hump 2 (tallest)
        0.2, 0.2, 0.7, 1.0, 0.4, 0.1, // hump 3 (with a flat stretch)
    ];
    describe("deep valleys (one piece per mode):", &valleys);

    // A shallow sawtooth: three local maxima, but the dips are so mild that
    // one piece can keep falling through the middle peak while the next one
    // rises through it. Two unimodal pieces suffice.
    let sawtooth = vec![1.0, 0.6, 1.0, 0.6, 1.0];
    describe("shallow valleys (pieces share the middle peak):", &sawtooth);
}
