//! Grid densities, kernel density estimates, and Gaussian blur.
//!
//! The building blocks everything else uses: a uniform midpoint grid, a
//! nonnegative density tabulated on it, KDE from raw samples, and blur by a
//! Gaussian kernel. Blurring twice composes like variances adding
//! (`s^2 = s1^2 + s2^2`), which is what lets the pipeline sharpen at one
//! scale and report at another.
//!
//! Run with: cargo run --example kernel_smoothing

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use topomix::grid::{convolve_gaussian, entropy, kde, Grid};
use topomix::unimodal::ucat_density;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dist = Normal::new(0.0, 1.0).unwrap();
    let sample: Vec<f64> = (0..300)
        .map(|i| dist.sample(&mut rng) + if i % 2 == 0 { 0.0 } else { 5.0 })
        .collect();

    // KDE at a few bandwidths: small h shows noise modes, large h merges.
    let grid = Grid::for_sample(&sample, 1.0, 200).unwrap();
    for h in [0.1, 0.5, 1.5, 4.0] {
        let f = kde(&sample, h, &grid).unwrap();
        println!(
            "h = {h:>4}: {} modes, mass {:.6}, entropy {:.4} nats",
            ucat_density(&f),
            f.mass(),
            entropy(&f)
        );
    }

    // Blur composition: blur(blur(f, a), b) == blur(f, sqrt(a^2 + b^2)).
    let f = kde(&sample, 0.3, &grid).unwrap();
    let twice = convolve_gaussian(&convolve_gaussian(&f, 0.8).unwrap(), 0.6).unwrap();
    let once = convolve_gaussian(&f, (0.8f64.powi(2) + 0.6f64.powi(2)).sqrt()).unwrap();
    let sup_err = twice
        .values()
        .iter()
        .zip(once.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("blur composition sup error: {sup_err:.2e}");
    assert!(sup_err < 1e-6);
}
