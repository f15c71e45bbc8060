//! Persistence-based bandwidth selection (topological density estimation).
//!
//! The mode count of a kernel density estimate is a function `u(h)` of the
//! bandwidth. Scanning `u` over a proposal grid, the most *persistent* count —
//! the one whose bandwidth set has the largest measure — is the estimate
//! `m_hat`, and the measure-weighted median of that set is the selected
//! bandwidth `h_hat`. Two measures are supported: counting (each proposal
//! weighs 1) and inverse-Lebesgue (each proposal weighs the length of its cell
//! in `1/h` coordinates, which emphasizes small bandwidths the way `u` itself
//! varies there).

use crate::error::{Error, Result};
use crate::grid::{convolve_gaussian, kde, Grid, GridDensity};
use crate::unimodal::ucat_density;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Strictly increasing positive bandwidth proposals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthGrid {
    values: Vec<f64>,
}

impl BandwidthGrid {
    pub fn new(values: Vec<f64>) -> Result<BandwidthGrid> {
        if values.is_empty() {
            return Err(Error::param("bandwidths", "need at least one bandwidth"));
        }
        if values.iter().any(|h| !h.is_finite() || *h <= 0.0) {
            return Err(Error::param("bandwidths", "bandwidths must be positive and finite"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("bandwidths", "bandwidths must be strictly increasing"));
        }
        Ok(BandwidthGrid { values })
    }

    /// `count` logarithmically spaced points from `min` to `max` inclusive.
    pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<BandwidthGrid> {
        if !(min > 0.0 && min.is_finite()) || !(max > min && max.is_finite()) {
            return Err(Error::param("bandwidths", "need 0 < min < max, both finite"));
        }
        if count < 2 {
            return Err(Error::param("count", "need at least 2 bandwidths"));
        }
        let (a, b) = (min.ln(), max.ln());
        let mut values: Vec<f64> = (0..count)
            .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
            .collect();
        // Pin the endpoints against rounding.
        values[0] = min;
        *values.last_mut().unwrap() = max;
        BandwidthGrid::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sample range, guarded against degenerate (all-equal) samples.
fn sample_range(sample: &[f64]) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("sample contains non-finite values".into()));
    }
    let min = sample.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = sample.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return Err(Error::InvalidInput(
            "degenerate sample: all values equal, no bandwidth scale".into(),
        ));
    }
    Ok((min, max))
}

/// Wide default proposal set: logarithmically spaced from `range/1000` to
/// `range`, where `range` is the sample's max − min.
///
/// `count` of 2 is the formal minimum; fewer than ~8 points rarely resolves a
/// persistence plateau.
pub fn default_bandwidth_grid(sample: &[f64], count: usize) -> Result<BandwidthGrid> {
    let (min, max) = sample_range(sample)?;
    let range = max - min;
    BandwidthGrid::log_spaced(range / 1000.0, range, count)
}

/// Mode counts of the KDE at each proposed bandwidth. Not monotone in general.
#[derive(Debug, Clone, PartialEq)]
pub struct UcatProfile {
    pub bandwidths: BandwidthGrid,
    pub ucats: Vec<usize>,
}

impl UcatProfile {
    pub fn new(bandwidths: BandwidthGrid, ucats: Vec<usize>) -> Result<UcatProfile> {
        if ucats.len() != bandwidths.len() {
            return Err(Error::InvalidInput("profile lengths do not match".into()));
        }
        if ucats.iter().any(|&u| u == 0) {
            return Err(Error::InvalidInput("mode counts must be at least 1".into()));
        }
        Ok(UcatProfile { bandwidths, ucats })
    }
}

/// Evaluate `u(h) = ucat(kde(sample, h))` over the proposal grid. Entries are
/// independent and computed in parallel; the result is order-deterministic.
pub fn ucat_profile(
    sample: &[f64],
    bandwidths: &BandwidthGrid,
    eval_grid: &Grid,
) -> Result<UcatProfile> {
    let ucats: Vec<usize> = bandwidths
        .values()
        .par_iter()
        .map(|&h| -> Result<usize> {
            let f = kde(sample, h, eval_grid)?;
            Ok(ucat_density(&f))
        })
        .collect::<Result<_>>()?;
    UcatProfile::new(bandwidths.clone(), ucats)
}

/// Measure on the bandwidth proposals used to weigh persistence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    /// Every proposal weighs one.
    Counting,
    /// Proposal `h_i` weighs the length of its cell in `1/h` coordinates
    /// (boundaries at midpoints of consecutive `1/h` values, end cells closed
    /// at the grid ends).
    InverseLebesgue,
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::Counting => write!(f, "counting"),
            MeasureKind::InverseLebesgue => write!(f, "inverse-lebesgue"),
        }
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<MeasureKind> {
        match s {
            "counting" => Ok(MeasureKind::Counting),
            "inverse-lebesgue" => Ok(MeasureKind::InverseLebesgue),
            other => Err(Error::param(
                "measure",
                format!("unknown measure {other:?}; use counting or inverse-lebesgue"),
            )),
        }
    }
}

/// Weight of each proposal under the measure. A single-point grid weighs 1
/// under both measures.
pub fn measure_weights(bandwidths: &BandwidthGrid, measure: MeasureKind) -> Vec<f64> {
    let hs = bandwidths.values();
    match measure {
        MeasureKind::Counting => vec![1.0; hs.len()],
        MeasureKind::InverseLebesgue => {
            if hs.len() == 1 {
                return vec![1.0];
            }
            // u = 1/h decreases as h increases; cell i spans the midpoints
            // around u_i, truncated at the outermost u values.
            let u: Vec<f64> = hs.iter().map(|h| 1.0 / h).collect();
            (0..u.len())
                .map(|i| {
                    let upper = if i == 0 { u[0] } else { 0.5 * (u[i - 1] + u[i]) };
                    let lower = if i + 1 == u.len() {
                        u[i]
                    } else {
                        0.5 * (u[i] + u[i + 1])
                    };
                    upper - lower
                })
                .collect()
        }
    }
}

/// Most persistent mode count: the `m` whose bandwidth set carries the largest
/// measure. Ties break toward smaller `m`.
pub fn estimate_ucat(profile: &UcatProfile, measure: MeasureKind) -> usize {
    let weights = measure_weights(&profile.bandwidths, measure);
    let mut mass: BTreeMap<usize, f64> = BTreeMap::new();
    for (&u, &w) in profile.ucats.iter().zip(&weights) {
        *mass.entry(u).or_insert(0.0) += w;
    }
    let mut best_m = 0;
    let mut best_mass = f64::NEG_INFINITY;
    for (&m, &w) in &mass {
        if w > best_mass {
            best_m = m;
            best_mass = w;
        }
    }
    best_m
}

/// Selected bandwidth and the persistence interval it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TdeResult {
    /// The persistent mode count.
    pub m_hat: usize,
    /// Measure-weighted median of the bandwidths showing `m_hat` modes.
    pub h_hat: f64,
    /// Smallest such bandwidth — the deblurring scale.
    pub h_minus: f64,
    /// Largest such bandwidth.
    pub h_sup: f64,
    /// `sqrt(h_sup^2 - h_hat^2)`: how much further the KDE at `h_hat` can be
    /// blurred with its mode count provably intact.
    pub blur_budget: f64,
}

/// Bandwidth indices realizing `m_hat`, in increasing bandwidth order.
fn persistence_set(profile: &UcatProfile, m_hat: usize) -> Result<Vec<usize>> {
    let set: Vec<usize> = profile
        .ucats
        .iter()
        .enumerate()
        .filter(|(_, &u)| u == m_hat)
        .map(|(i, _)| i)
        .collect();
    if set.is_empty() {
        return Err(Error::Contract(format!(
            "mode count {m_hat} appears nowhere in the profile"
        )));
    }
    Ok(set)
}

/// Pick the bandwidth for a given persistent mode count: the measure-weighted
/// median (lower median on an even split) over `S = {h : u(h) = m_hat}`,
/// together with the interval ends and the blur budget.
pub fn select_bandwidth(
    profile: &UcatProfile,
    m_hat: usize,
    measure: MeasureKind,
) -> Result<TdeResult> {
    let set = persistence_set(profile, m_hat)?;
    let weights = measure_weights(&profile.bandwidths, measure);
    let hs = profile.bandwidths.values();
    let total: f64 = set.iter().map(|&i| weights[i]).sum();
    let mut cum = 0.0;
    let mut h_hat = hs[set[0]];
    for &i in &set {
        cum += weights[i];
        if cum >= 0.5 * total {
            h_hat = hs[i];
            break;
        }
    }
    let h_minus = hs[set[0]];
    let h_sup = hs[*set.last().unwrap()];
    Ok(TdeResult {
        m_hat,
        h_hat,
        h_minus,
        h_sup,
        blur_budget: (h_sup * h_sup - h_hat * h_hat).max(0.0).sqrt(),
    })
}

/// `sqrt(max(S)^2 - min(S)^2)`: the blur budget guaranteed by persistence
/// alone, independent of where in `S` the bandwidth is picked. Always at least
/// the budget of [`select_bandwidth`].
pub fn topological_blur_budget(profile: &UcatProfile, m_hat: usize) -> Result<f64> {
    let set = persistence_set(profile, m_hat)?;
    let hs = profile.bandwidths.values();
    let (lo, hi) = (hs[set[0]], hs[*set.last().unwrap()]);
    Ok((hi * hi - lo * lo).max(0.0).sqrt())
}

/// Largest proposed bandwidth whose Gaussian blur leaves the mode count of an
/// arbitrary density unchanged; 0 when even the smallest proposal changes it.
/// Evaluated on the proposals only — mode counts are piecewise constant in `h`
/// and the grid already fixes the resolution elsewhere.
pub fn general_blur_budget(f: &GridDensity, bandwidths: &BandwidthGrid) -> f64 {
    let u0 = ucat_density(f);
    let mut budget = 0.0;
    for &h in bandwidths.values() {
        let blurred = convolve_gaussian(f, h).expect("positive bandwidth blur cannot fail");
        if ucat_density(&blurred) == u0 {
            budget = h;
        }
    }
    budget
}

/// Configuration of a full bandwidth-selection run.
#[derive(Debug, Clone)]
pub struct TdeConfig {
    /// Explicit proposal set; overrides `bandwidth_range`/`bandwidth_count`.
    pub bandwidths: Option<BandwidthGrid>,
    /// Number of log-spaced proposals when `bandwidths` is not given.
    pub bandwidth_count: usize,
    /// Proposal range when `bandwidths` is not given. Defaults to
    /// `[range/50, range]`: the low end sits above the discreteness scale of
    /// typical data, where KDE mode counts reflect structure rather than
    /// quantization noise.
    pub bandwidth_range: Option<(f64, f64)>,
    /// Measure weighing the persistence of each mode count.
    pub measure: MeasureKind,
    /// Lower bound on the number of evaluation-grid cells for the profile.
    pub min_profile_cells: usize,
}

impl Default for TdeConfig {
    fn default() -> Self {
        TdeConfig {
            bandwidths: None,
            bandwidth_count: 64,
            bandwidth_range: None,
            measure: MeasureKind::InverseLebesgue,
            min_profile_cells: 100,
        }
    }
}

/// Divisor of the sample range giving the default smallest proposal.
const DEFAULT_RANGE_DIVISOR: f64 = 50.0;

/// Cap on profile evaluation cells, bounding cost for tiny bandwidths.
const MAX_PROFILE_CELLS: usize = 20_000;

/// A completed bandwidth-selection run.
#[derive(Debug, Clone)]
pub struct TdeRun {
    pub profile: UcatProfile,
    pub result: TdeResult,
    /// Grid the profile KDEs were evaluated on.
    pub profile_grid: Grid,
}

/// Resolve the proposal set from config and sample.
pub fn proposal_bandwidths(sample: &[f64], cfg: &TdeConfig) -> Result<BandwidthGrid> {
    if let Some(b) = &cfg.bandwidths {
        return Ok(b.clone());
    }
    let (lo, hi) = match cfg.bandwidth_range {
        Some(r) => r,
        None => {
            let (min, max) = sample_range(sample)?;
            let range = max - min;
            (range / DEFAULT_RANGE_DIVISOR, range)
        }
    };
    BandwidthGrid::log_spaced(lo, hi, cfg.bandwidth_count)
}

/// Profile the sample, estimate the persistent mode count, and select the
/// bandwidth. The evaluation grid spans the sample padded by three times the
/// largest proposal, with cells no coarser than half the smallest proposal.
pub fn run_tde(sample: &[f64], cfg: &TdeConfig) -> Result<TdeRun> {
    let bandwidths = proposal_bandwidths(sample, cfg)?;
    let (min, max) = sample_range(sample)?;
    let h_min = bandwidths.values()[0];
    let h_max = *bandwidths.values().last().unwrap();
    let span = (max - min) + 6.0 * h_max;
    let n = ((span / (0.5 * h_min)).ceil() as usize)
        .clamp(cfg.min_profile_cells, MAX_PROFILE_CELLS);
    let profile_grid = Grid::for_sample(sample, h_max, n)?;
    let profile = ucat_profile(sample, &bandwidths, &profile_grid)?;
    let m_hat = estimate_ucat(&profile, cfg.measure);
    let result = select_bandwidth(&profile, m_hat, cfg.measure)?;
    Ok(TdeRun {
        profile,
        result,
        profile_grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::gaussian_density;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_grid_spans_range_over_1000_to_range() {
        // Sample range 10 with 4 points: log-spaced decades.
        let g = default_bandwidth_grid(&[0.0, 10.0], 4).unwrap();
        let expect = [0.01, 0.1, 1.0, 10.0];
        for (a, b) in g.values().iter().zip(expect) {
            assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
        }
        let g = default_bandwidth_grid(&[0.0, 1.0], 64).unwrap();
        assert_eq!(g.len(), 64);
        assert!((g.values()[0] - 1e-3).abs() <= 1e-15);
        assert!((g.values()[63] - 1.0).abs() <= 1e-15);
        assert!(g.values().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn degenerate_sample_is_rejected() {
        let err = default_bandwidth_grid(&[3.0, 3.0, 3.0], 16).unwrap_err();
        assert!(err.is_input_error());
        assert!(run_tde(&[5.0; 10], &TdeConfig::default()).is_err());
    }

    #[test]
    fn profile_of_repeated_point_is_all_ones() {
        let grid = Grid::spanning(-1.0, 1.0, 200).unwrap();
        let b = BandwidthGrid::log_spaced(0.01, 1.0, 8).unwrap();
        let p = ucat_profile(&[0.0, 0.0, 0.0], &b, &grid).unwrap();
        assert!(p.ucats.iter().all(|&u| u == 1));
    }

    #[test]
    fn two_point_sample_merges_as_bandwidth_grows() {
        let sample = [0.0, 10.0];
        let grid = Grid::spanning(-60.0, 70.0, 2000).unwrap();
        let b = BandwidthGrid::new(vec![0.5, 20.0]).unwrap();
        let p = ucat_profile(&sample, &b, &grid).unwrap();
        assert_eq!(p.ucats, vec![2, 1]);
    }

    #[test]
    fn estimate_follows_plurality_under_counting() {
        let b = BandwidthGrid::new(vec![1.0, 2.0, 3.0]).unwrap();
        let p = UcatProfile::new(b, vec![1, 1, 1]).unwrap();
        assert_eq!(estimate_ucat(&p, MeasureKind::Counting), 1);
        assert_eq!(estimate_ucat(&p, MeasureKind::InverseLebesgue), 1);

        let b = BandwidthGrid::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = UcatProfile::new(b, vec![3, 2, 2, 1]).unwrap();
        assert_eq!(estimate_ucat(&p, MeasureKind::Counting), 2);
    }

    #[test]
    fn inverse_lebesgue_weights_match_hand_computation() {
        // 1/h = [1, .5, .25, .125, .0625]; midpoint cells, closed ends.
        let b = BandwidthGrid::new(vec![1.0, 2.0, 4.0, 8.0, 16.0]).unwrap();
        let w = measure_weights(&b, MeasureKind::InverseLebesgue);
        let expect = [0.25, 0.375, 0.1875, 0.09375, 0.03125];
        for (a, e) in w.iter().zip(expect) {
            assert!((a - e).abs() <= 1e-15, "{a} vs {e}");
        }
        // The {1,2} cells outweigh {4,8,16}: small bandwidths dominate.
        let p = UcatProfile::new(b, vec![2, 2, 1, 1, 1]).unwrap();
        assert_eq!(estimate_ucat(&p, MeasureKind::InverseLebesgue), 2);
        // Counting, by contrast, sees a 3-to-2 plurality for one mode.
        let b2 = BandwidthGrid::new(vec![1.0, 2.0, 4.0, 8.0, 16.0]).unwrap();
        let p2 = UcatProfile::new(b2, vec![2, 2, 1, 1, 1]).unwrap();
        assert_eq!(estimate_ucat(&p2, MeasureKind::Counting), 1);
    }

    #[test]
    fn ties_break_toward_fewer_modes() {
        let b = BandwidthGrid::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = UcatProfile::new(b, vec![2, 2, 1, 1]).unwrap();
        assert_eq!(estimate_ucat(&p, MeasureKind::Counting), 1);
    }

    #[test]
    fn selection_on_singleton_set_has_zero_budget() {
        let b = BandwidthGrid::new(vec![0.1, 0.3, 0.9]).unwrap();
        let p = UcatProfile::new(b, vec![3, 2, 1]).unwrap();
        let r = select_bandwidth(&p, 2, MeasureKind::Counting).unwrap();
        assert_eq!((r.h_hat, r.h_minus, r.h_sup), (0.3, 0.3, 0.3));
        assert_eq!(r.blur_budget, 0.0);
        assert_eq!(topological_blur_budget(&p, 2).unwrap(), 0.0);
    }

    #[test]
    fn selection_uses_lower_weighted_median() {
        // S = {1,2,3,4} under counting: lower median 2.
        let b = BandwidthGrid::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = UcatProfile::new(b, vec![2, 2, 2, 2]).unwrap();
        let r = select_bandwidth(&p, 2, MeasureKind::Counting).unwrap();
        assert_eq!(r.h_hat, 2.0);
        assert_eq!((r.h_minus, r.h_sup), (1.0, 4.0));

        // S = {0.1..0.5}, median 0.3: budget sqrt(0.25 - 0.09) = 0.4.
        let b = BandwidthGrid::new(vec![0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let p = UcatProfile::new(b, vec![1, 1, 1, 1, 1]).unwrap();
        let r = select_bandwidth(&p, 1, MeasureKind::Counting).unwrap();
        assert_eq!(r.h_hat, 0.3);
        assert!((r.blur_budget - 0.4).abs() <= 1e-12);
        // Persistence-only budget over the same S: sqrt(0.25 - 0.01).
        let t = topological_blur_budget(&p, 1).unwrap();
        assert!((t - (0.25f64 - 0.01).sqrt()).abs() <= 1e-12);
        assert!(t >= r.blur_budget);
    }

    #[test]
    fn selecting_an_absent_mode_count_is_a_contract_error() {
        let b = BandwidthGrid::new(vec![1.0, 2.0]).unwrap();
        let p = UcatProfile::new(b, vec![1, 1]).unwrap();
        let err = select_bandwidth(&p, 5, MeasureKind::Counting).unwrap_err();
        assert!(!err.is_input_error());
    }

    #[test]
    fn interval_ordering_holds_on_random_profiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(2..20);
            let mut hs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..10.0)).collect();
            hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            hs.dedup();
            if hs.len() < 2 {
                continue;
            }
            let ucats: Vec<usize> = (0..hs.len()).map(|_| rng.gen_range(1..4)).collect();
            let b = BandwidthGrid::new(hs).unwrap();
            let p = UcatProfile::new(b, ucats).unwrap();
            for measure in [MeasureKind::Counting, MeasureKind::InverseLebesgue] {
                let m = estimate_ucat(&p, measure);
                let r = select_bandwidth(&p, m, measure).unwrap();
                assert!(r.h_minus <= r.h_hat && r.h_hat <= r.h_sup);
                assert!(
                    topological_blur_budget(&p, m).unwrap() >= r.blur_budget - 1e-12
                );
            }
        }
    }

    #[test]
    fn unimodal_density_has_full_blur_budget() {
        let g = Grid::spanning(-6.0, 6.0, 400).unwrap();
        let f = gaussian_density(0.0, 0.5, &g).unwrap();
        let b = BandwidthGrid::new(vec![0.1, 0.5, 1.0]).unwrap();
        assert_eq!(general_blur_budget(&f, &b), 1.0);
    }

    #[test]
    fn spike_pair_budget_matches_direct_scan() {
        // Two narrow bumps one unit apart merge somewhere below their distance.
        let g = Grid::spanning(-1.0, 2.0, 600).unwrap();
        let f = kde(&[0.0, 1.0], 0.02, &g).unwrap();
        let b = BandwidthGrid::log_spaced(0.05, 2.0, 24).unwrap();
        let budget = general_blur_budget(&f, &b);
        // Independent scan over the same proposals.
        let mut expect = 0.0;
        for &h in b.values() {
            if ucat_density(&convolve_gaussian(&f, h).unwrap()) == 2 {
                expect = h;
            }
        }
        assert_eq!(budget, expect);
        assert!(budget > 0.0 && budget < 1.0);
    }

    #[test]
    fn narrow_mixture_has_positive_blur_budget() {
        // Three narrow equal bumps at {1/4, 2/4, 3/4} with sigma = 1/288.
        let g = Grid::spanning(-0.2, 1.2, 4000).unwrap();
        let mut vals = vec![0.0; 4000];
        for j in 1..=3 {
            let comp = gaussian_density(j as f64 / 4.0, 1.0 / 288.0, &g).unwrap();
            for (v, c) in vals.iter_mut().zip(comp.values()) {
                *v += c / 3.0;
            }
        }
        let f = GridDensity::new(g, vals).unwrap();
        assert_eq!(ucat_density(&f), 3);
        let b = BandwidthGrid::log_spaced(1e-3, 1.0, 32).unwrap();
        assert!(general_blur_budget(&f, &b) > 0.0);
    }

    #[test]
    fn blur_composition_matches_wider_kernel() {
        // KDE at sqrt(h^2 + s^2) has the mode count of the KDE at h blurred
        // by s: smoothing composes in quadrature.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sample: Vec<f64> = (0..60)
            .map(|i| {
                let c = if i % 3 == 0 { -2.0 } else { 2.0 };
                c + rng.gen_range(-1.0..1.0)
            })
            .collect();
        let grid = Grid::for_sample(&sample, 1.5, 1200).unwrap();
        for (h, s) in [(0.3_f64, 0.4_f64), (0.5, 0.2), (0.8, 0.6)] {
            let wide = kde(&sample, (h * h + s * s).sqrt(), &grid).unwrap();
            let composed = convolve_gaussian(&kde(&sample, h, &grid).unwrap(), s).unwrap();
            assert_eq!(ucat_density(&wide), ucat_density(&composed), "h={h} s={s}");
        }
    }

    #[test]
    fn run_tde_finds_two_clusters() {
        use rand_distr::{Distribution, Normal};
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let normal = Normal::new(0.0, 0.8).unwrap();
        let sample: Vec<f64> = (0..200)
            .map(|i| {
                let c = if i % 2 == 0 { 0.0 } else { 6.0 };
                c + normal.sample(&mut rng)
            })
            .collect();
        let run = run_tde(&sample, &TdeConfig::default()).unwrap();
        assert_eq!(run.result.m_hat, 2);
        assert!(run.result.h_minus <= run.result.h_hat);
        assert!(run.result.h_hat <= run.result.h_sup);
        // Profile grid covers the padded sample.
        assert!(run.profile_grid.x0 < -1.5);
        assert!(run.profile_grid.x_end() > 7.5);
    }
}
