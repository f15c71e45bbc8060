//! Synthetic evaluation family and the mode-recovery harness.
//!
//! The family `f_{k,m}` is an equal-weight mixture of `m` Gaussians with means
//! `j/(m+1)` and common standard deviation `2^-(k+2) (m+1)^-2`: `m` controls
//! how many modes there are, `k` how needle-like they are. Since consecutive
//! means sit `(m+1) 2^(k+2)` standard deviations apart, the density always has
//! exactly `m` modes — a known ground truth against which bandwidth selection
//! is scored.

use crate::bandwidth::{run_tde, MeasureKind, TdeConfig};
use crate::error::{Error, Result};
use crate::grid::{gaussian_density, kde, Grid, GridDensity};
use crate::unimodal::{count_local_maxima, ucat_density};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Parameters of the synthetic family: sharpness `k` in `[1,3]`, mode count
/// `m` in `[1,10]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FkmSpec {
    pub k: u32,
    pub m: u32,
}

impl FkmSpec {
    pub fn new(k: u32, m: u32) -> Result<FkmSpec> {
        if !(1..=3).contains(&k) {
            return Err(Error::param("k", format!("must lie in [1, 3], got {k}")));
        }
        if !(1..=10).contains(&m) {
            return Err(Error::param("m", format!("must lie in [1, 10], got {m}")));
        }
        Ok(FkmSpec { k, m })
    }

    /// Common component standard deviation `2^-(k+2) (m+1)^-2`.
    pub fn sigma(&self) -> f64 {
        let mp1 = (self.m + 1) as f64;
        (0.5f64).powi(self.k as i32 + 2) / (mp1 * mp1)
    }

    /// Component means `j/(m+1)` for `j = 1..m`.
    pub fn means(&self) -> Vec<f64> {
        let mp1 = (self.m + 1) as f64;
        (1..=self.m).map(|j| j as f64 / mp1).collect()
    }

    /// Grid fine enough (four cells per sigma at least) to count the modes of
    /// the analytic density exactly.
    pub fn fine_grid(&self) -> Grid {
        let s = self.sigma();
        let lo = self.means()[0] - 8.0 * s;
        let hi = *self.means().last().unwrap() + 8.0 * s;
        let n = (((hi - lo) / (0.25 * s)).ceil() as usize).clamp(2000, 200_000);
        Grid::spanning(lo, hi, n).expect("family bounds are ordered")
    }

    /// Mode count of the analytic density on the fine grid.
    pub fn true_ucat(&self) -> usize {
        ucat_density(&fkm_density(*self, &self.fine_grid()).expect("parameters validated at construction"))
    }
}

/// The analytic density of the family on a grid, normalized.
pub fn fkm_density(spec: FkmSpec, grid: &Grid) -> Result<GridDensity> {
    let sigma = spec.sigma();
    let mut vals = vec![0.0; grid.n_cells];
    for mean in spec.means() {
        let comp = gaussian_density(mean, sigma, grid)?;
        for (v, c) in vals.iter_mut().zip(comp.values()) {
            *v += c / spec.m as f64;
        }
    }
    GridDensity::new(*grid, vals)?.normalize()
}

/// `n` i.i.d. draws: a uniformly random component, then a Gaussian draw from
/// it. Deterministic for a fixed seed.
pub fn sample_fkm(spec: FkmSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::param("n", "need at least one draw"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means = spec.means();
    let normal = Normal::new(0.0, spec.sigma()).expect("sigma is positive");
    Ok((0..n)
        .map(|_| means[rng.gen_range(0..means.len())] + normal.sample(&mut rng))
        .collect())
}

/// Outcome of repeated bandwidth-selection trials against the known mode
/// count.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryStats {
    pub spec: FkmSpec,
    pub n: usize,
    pub trials: usize,
    /// Mode count of the analytic density — the target.
    pub true_ucat: usize,
    /// Trials whose estimated mode count hit the target.
    pub ucat_hits: usize,
    /// Histogram of the estimated mode count over trials.
    pub ucat_distribution: BTreeMap<usize, usize>,
    /// Histogram of the local-maximum count of the KDE at the selected
    /// bandwidth.
    pub lmax_distribution: BTreeMap<usize, usize>,
}

impl RecoveryStats {
    /// Fraction of trials recovering the true mode count.
    pub fn hit_rate(&self) -> f64 {
        self.ucat_hits as f64 / self.trials as f64
    }
}

/// Run `trials` independent sample-and-select rounds. Per-trial seeds are
/// `seed + trial`, so results are identical under any parallel schedule.
pub fn evaluate_recovery(
    spec: FkmSpec,
    n: usize,
    trials: usize,
    measure: MeasureKind,
    seed: u64,
) -> Result<RecoveryStats> {
    if trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    let true_ucat = spec.true_ucat();
    let cfg = TdeConfig {
        measure,
        ..TdeConfig::default()
    };
    let outcomes: Vec<(usize, usize)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(usize, usize)> {
            let sample = sample_fkm(spec, n, seed.wrapping_add(t as u64))?;
            let run = run_tde(&sample, &cfg)?;
            let at_h_hat = kde(&sample, run.result.h_hat, &run.profile_grid)?;
            Ok((run.result.m_hat, count_local_maxima(at_h_hat.values())))
        })
        .collect::<Result<_>>()?;
    let mut ucat_distribution = BTreeMap::new();
    let mut lmax_distribution = BTreeMap::new();
    let mut ucat_hits = 0;
    for (m_hat, lmax) in outcomes {
        *ucat_distribution.entry(m_hat).or_insert(0) += 1;
        *lmax_distribution.entry(lmax).or_insert(0) += 1;
        if m_hat == true_ucat {
            ucat_hits += 1;
        }
    }
    Ok(RecoveryStats {
        spec,
        n,
        trials,
        true_ucat,
        ucat_hits,
        ucat_distribution,
        lmax_distribution,
    })
}
