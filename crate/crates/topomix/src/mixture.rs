//! Unimodal mixtures and the greedy information-theoretic refinement.
//!
//! A [`Mixture`] stores component weight rows `w_m` (densities scaled by their
//! own mass) that sum pointwise to a target density `f`. Its quality is scored
//! by the generalized Jensen-Shannon divergence
//!
//! ```text
//! J = H(sum_m w_m) - sum_m pi_m H(w_m / pi_m),   pi_m = sum_k w_mk dx,
//! ```
//!
//! the mutual information between the component label and the location. [`tme`]
//! starts from the sweep decomposition (which already has the minimum number of
//! components) and greedily applies the single mass transfer that increases `J`
//! most. Each transfer moves `eps = min(donor eps_minus, recipient eps_plus)`
//! at one cell, so it saturates one of the two unimodality bounds; `J` is
//! convex along each transfer direction, so the saturated endpoint is the best
//! step on that direction. When no single transfer improves `J`, the optimizer
//! re-derives overlapping component pairs from their combined density (see
//! [`TmeConfig::resweep_pairs`]) before declaring convergence, so the result
//! does not depend on where the initial sweep left long tails.

use crate::error::{Error, Result};
use crate::grid::{entropy_slice, Grid, GridDensity};
use crate::unimodal::{is_unimodal, sweep_decompose};

/// Components whose mass would drop below this are not valid transfer donors.
const MIN_COMPONENT_MASS: f64 = 1e-12;

/// Default relative `J` improvement below which the optimizer stops.
const DEFAULT_REL_IMPROVEMENT: f64 = 1e-10;

/// Pointwise conservation slack, relative to the peak of the target density.
const CONSERVATION_TOL: f64 = 1e-9;

#[inline]
fn a(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Mixture of unimodal weight rows on a shared grid.
///
/// Invariants: at least one component; every row is unimodal with positive
/// mass; rows have the grid's length.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    grid: Grid,
    weights: Vec<Vec<f64>>,
}

impl Mixture {
    pub fn from_weights(grid: Grid, weights: Vec<Vec<f64>>) -> Result<Mixture> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("mixture needs at least one component".into()));
        }
        for (m, row) in weights.iter().enumerate() {
            if row.len() != grid.n_cells {
                return Err(Error::InvalidInput(format!(
                    "component {m} has {} cells, grid has {}",
                    row.len(),
                    grid.n_cells
                )));
            }
            if !is_unimodal(row) {
                return Err(Error::InvalidInput(format!("component {m} is not unimodal")));
            }
            if row.iter().sum::<f64>() * grid.dx <= 0.0 {
                return Err(Error::InvalidInput(format!("component {m} has zero mass")));
            }
        }
        Ok(Mixture { grid, weights })
    }

    /// Sweep initialization: the minimal unimodal decomposition of `f`.
    pub fn sweep_of(f: &GridDensity) -> Result<Mixture> {
        let parts = sweep_decompose(f.values())?;
        if parts.is_empty() {
            return Err(Error::InvalidInput("cannot decompose a zero density".into()));
        }
        Mixture::from_weights(f.grid(), parts)
    }

    /// Sweep run right-to-left: decompose the reversed density and flip the
    /// components back. Same component count, generally a different mixture.
    pub fn reverse_sweep_of(f: &GridDensity) -> Result<Mixture> {
        let mut rev: Vec<f64> = f.values().to_vec();
        rev.reverse();
        let parts = sweep_decompose(&rev)?;
        if parts.is_empty() {
            return Err(Error::InvalidInput("cannot decompose a zero density".into()));
        }
        let flipped: Vec<Vec<f64>> = parts
            .into_iter()
            .map(|mut p| {
                p.reverse();
                p
            })
            .collect();
        Mixture::from_weights(f.grid(), flipped)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Component masses `pi_m`.
    pub fn pi(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|row| row.iter().sum::<f64>() * self.grid.dx)
            .collect()
    }

    /// Pointwise sum of the weight rows: the modeled density.
    pub fn total(&self) -> GridDensity {
        let mut sum = vec![0.0; self.grid.n_cells];
        for row in &self.weights {
            for (s, v) in sum.iter_mut().zip(row) {
                *s += v;
            }
        }
        GridDensity::new(self.grid, sum).expect("mixture rows are valid densities")
    }

    /// Component `m` normalized to unit mass.
    pub fn component_density(&self, m: usize) -> GridDensity {
        GridDensity::new(self.grid, self.weights[m].clone())
            .expect("mixture rows are valid densities")
            .normalize()
            .expect("mixture rows have positive mass")
    }

    /// Midpoint of each component's maximal plateau: one mode location per
    /// component.
    pub fn modes(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|row| {
                let max = row.iter().cloned().fold(f64::MIN, f64::max);
                let l = row.iter().position(|&v| v == max).unwrap();
                let u = row.iter().rposition(|&v| v == max).unwrap();
                0.5 * (self.grid.midpoint(l) + self.grid.midpoint(u))
            })
            .collect()
    }
}

/// `J` of a set of weight rows; shared by the public scoring functions.
fn js_of_rows<'r>(dx: f64, rows: impl Iterator<Item = &'r [f64]>, n: usize) -> f64 {
    let mut total = vec![0.0; n];
    let mut acc = 0.0;
    for row in rows {
        let mut s_a = 0.0;
        let mut s_w = 0.0;
        for (&v, t) in row.iter().zip(total.iter_mut()) {
            s_a += a(v);
            s_w += v;
            *t += v;
        }
        acc += s_a * dx - a(s_w * dx);
    }
    let hf = entropy_slice(&total, dx);
    (hf + acc).max(0.0)
}

/// Generalized Jensen-Shannon divergence of the mixture, in nats.
/// Zero for a single component; tiny negative rounding is clamped to zero.
pub fn js_divergence(mix: &Mixture) -> f64 {
    js_of_rows(
        mix.grid.dx,
        mix.weights.iter().map(|r| r.as_slice()),
        mix.grid.n_cells,
    )
}

/// `J` after pooling components `a` and `b` into one row.
pub fn merged_js(mix: &Mixture, first: usize, second: usize) -> Result<f64> {
    let m = mix.n_components();
    if first >= m || second >= m || first == second {
        return Err(Error::param("components", "need two distinct component indices"));
    }
    let pooled: Vec<f64> = mix.weights[first]
        .iter()
        .zip(&mix.weights[second])
        .map(|(x, y)| x + y)
        .collect();
    let rows: Vec<&[f64]> = std::iter::once(pooled.as_slice())
        .chain(
            mix.weights
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != first && *i != second)
                .map(|(_, r)| r.as_slice()),
        )
        .collect();
    Ok(js_of_rows(mix.grid.dx, rows.into_iter(), mix.grid.n_cells))
}

/// `J` of the two-component grouping of a three-component mixture in which a
/// `t`-fraction of the middle component joins the right group and the rest
/// joins the left: rows `w_1 + (1-t) w_2` and `t w_2 + w_3`. Convex in `t`.
pub fn transfer_curve(mix: &Mixture, t: f64) -> Result<f64> {
    if mix.n_components() != 3 {
        return Err(Error::InvalidInput(format!(
            "transfer curve needs exactly 3 components, got {}",
            mix.n_components()
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::param("t", format!("must lie in [0, 1], got {t}")));
    }
    let left: Vec<f64> = mix.weights[0]
        .iter()
        .zip(&mix.weights[1])
        .map(|(w1, w2)| w1 + (1.0 - t) * w2)
        .collect();
    let right: Vec<f64> = mix.weights[1]
        .iter()
        .zip(&mix.weights[2])
        .map(|(w2, w3)| t * w2 + w3)
        .collect();
    Ok(js_of_rows(
        mix.grid.dx,
        [left.as_slice(), right.as_slice()].into_iter(),
        mix.grid.n_cells,
    ))
}

/// Apply the saturating transfer `(donor, recipient, cell)` to a mixture:
/// move `eps = min(donor eps_minus, recipient eps_plus)` of weight at `cell`
/// from donor to recipient (an infinite recipient bound is capped by the
/// donor's, which is always finite). Returns `None` when the bounds allow no
/// positive move, when the donor's mass would drop below the component floor,
/// or when a perturbed component fails unimodality re-validation.
pub fn candidate_perturbation(
    mix: &Mixture,
    donor: usize,
    recipient: usize,
    cell: usize,
) -> Result<Option<Mixture>> {
    let m = mix.n_components();
    if donor >= m || recipient >= m {
        return Err(Error::param("component", "index out of range"));
    }
    if donor == recipient {
        return Err(Error::param("component", "donor and recipient must differ"));
    }
    if cell >= mix.grid.n_cells {
        return Err(Error::param("cell", "index out of range"));
    }
    let state = Optimizer::from_rows(mix.grid, mix.weights.clone());
    let Some(mv) = state.candidate(donor, recipient, cell) else {
        return Ok(None);
    };
    let mut weights = mix.weights.clone();
    weights[donor][cell] = mv.donor_new;
    weights[recipient][cell] = mv.recip_new;
    if !is_unimodal(&weights[donor]) || !is_unimodal(&weights[recipient]) {
        return Ok(None);
    }
    Ok(Some(Mixture {
        grid: mix.grid,
        weights,
    }))
}

/// Knobs for [`tme`]. By default the search caps at `50 * components * cells`
/// outer iterations and stops when no candidate improves `J` by more than
/// `1e-10` relative.
#[derive(Debug, Clone)]
pub struct TmeConfig {
    /// Override for the `50 * M * N` iteration cap.
    pub max_iterations: Option<usize>,
    /// Relative improvement threshold for accepting a transfer.
    pub rel_improvement: f64,
    /// Re-check conservation and unimodality after every applied transfer
    /// instead of only at the end.
    pub validate_each_iteration: bool,
    /// When single-cell transfers stall, re-derive overlapping component
    /// pairs from scratch — seeding from sweeps of their combined density and
    /// from crisp valley splits, polishing each with the same transfer loop —
    /// and adopt the best strict improvement. Single-cell transfers cannot
    /// retract one component's tail from under another component's peak (the
    /// bridge steps do not improve `J` on their own), so without this escape
    /// the final `J` can depend on the initial mixture. Disable to reproduce
    /// the plain single-transfer greedy.
    pub resweep_pairs: bool,
}

impl Default for TmeConfig {
    fn default() -> Self {
        TmeConfig {
            max_iterations: None,
            rel_improvement: DEFAULT_REL_IMPROVEMENT,
            validate_each_iteration: false,
            resweep_pairs: true,
        }
    }
}

/// Outcome of the greedy refinement.
#[derive(Debug, Clone)]
pub struct TmeReport {
    pub mixture: Mixture,
    /// `J` before any transfer and after each accepted one; nondecreasing.
    pub j_trace: Vec<f64>,
    /// Number of accepted transfers.
    pub iterations: usize,
    /// False only when the iteration cap stopped the loop.
    pub converged: bool,
}

impl TmeReport {
    /// Exact `J` of the final mixture.
    pub fn j_nats(&self) -> f64 {
        js_divergence(&self.mixture)
    }
}

/// Topological mixture estimation with default configuration: sweep
/// initialization, then greedy saturating transfers.
pub fn tme(f: &GridDensity) -> Result<TmeReport> {
    tme_with_config(f, &TmeConfig::default())
}

pub fn tme_with_config(f: &GridDensity, cfg: &TmeConfig) -> Result<TmeReport> {
    let init = Mixture::sweep_of(f)?;
    tme_from_init(f, init, cfg)
}

/// Run the greedy refinement from a caller-supplied initial mixture (for
/// example the reverse sweep). The initial mixture must model `f`.
pub fn tme_from_init(f: &GridDensity, init: Mixture, cfg: &TmeConfig) -> Result<TmeReport> {
    if (f.mass() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "target density must be normalized, mass is {}",
            f.mass()
        )));
    }
    if init.grid() != f.grid() {
        return Err(Error::InvalidInput("initial mixture is on a different grid".into()));
    }
    let f_peak = f.values().iter().cloned().fold(0.0, f64::max);
    {
        let total = init.total();
        for (s, t) in total.values().iter().zip(f.values()) {
            if (s - t).abs() > CONSERVATION_TOL * f_peak {
                return Err(Error::InvalidInput(
                    "initial mixture does not sum to the target density".into(),
                ));
            }
        }
    }

    let grid = f.grid();
    let mut opt = Optimizer::from_rows(grid, init.weights);
    let j0 = opt.full_j();
    let mut trace = vec![j0];
    let mut converged = true;

    if opt.m > 1 {
        let cap = cfg.max_iterations.unwrap_or(50 * opt.m * opt.n);
        opt.init_pairs();
        converged = false;
        for _ in 0..cap {
            let j = *trace.last().unwrap();
            let threshold = cfg.rel_improvement * j.abs().max(1e-30);
            if let Some((d, r, best)) = opt.best_candidate() {
                if best.delta_j > threshold {
                    opt.apply(d, r, &best);
                    trace.push(j + best.delta_j);
                    if cfg.validate_each_iteration {
                        opt.validate_step(f.values(), f_peak, d, r, best.cell)?;
                    }
                    continue;
                }
            }
            // Single-cell transfers are exhausted; try re-deriving a pair.
            let swap = if cfg.resweep_pairs {
                opt.best_pair_resweep(threshold)
            } else {
                None
            };
            let Some(swap) = swap else {
                converged = true;
                break;
            };
            let delta = swap.delta_j;
            let (i, j2) = (swap.first, swap.second);
            opt.apply_pair_resweep(swap);
            trace.push(j + delta);
            if cfg.validate_each_iteration {
                opt.validate_rows(f.values(), f_peak, i, j2)?;
            }
        }
    }

    let mixture = Mixture::from_weights(grid, opt.w)?;
    {
        let total = mixture.total();
        for (s, t) in total.values().iter().zip(f.values()) {
            if (s - t).abs() > CONSERVATION_TOL * f_peak {
                return Err(Error::Contract(
                    "refined mixture drifted away from the target density".into(),
                ));
            }
        }
    }
    let iterations = trace.len() - 1;
    Ok(TmeReport {
        mixture,
        j_trace: trace,
        iterations,
        converged,
    })
}

/// Internal transfer description with exact post-transfer cell values, so an
/// application lands exactly on the saturated bound instead of an ulp past it.
#[derive(Debug, Clone, Copy)]
struct Move {
    cell: usize,
    delta_j: f64,
    donor_new: f64,
    recip_new: f64,
}

/// A pending pair re-derivation: replacement rows for two components and the
/// exact total-`J` gain of adopting them.
struct PairResweep {
    first: usize,
    second: usize,
    row_first: Vec<f64>,
    row_second: Vec<f64>,
    delta_j: f64,
}

/// The pair's share of `J`: `dx * sum_k [a(u_k) + a(v_k)] - a(mass_u) - a(mass_v)`.
fn pair_contrib(dx: f64, u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut mu = 0.0;
    let mut mv = 0.0;
    for (x, y) in u.iter().zip(v) {
        s += a(*x) + a(*y);
        mu += x;
        mv += y;
    }
    dx * s - a(mu * dx) - a(mv * dx)
}

/// Candidate two-row redistributions of `g` used to seed the pair polish: the
/// sweep run in both directions, plus crisp splits `(g[..=s], g[s+1..])` at
/// interior valleys of the region where both sides stay unimodal. The polish
/// loop moves single cells, so it can refine a boundary but not relocate a
/// whole tail; distinct seeds cover the distinct basins.
fn pair_seeds(g: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = g.len();
    let mut seeds = Vec::new();
    for reversed in [false, true] {
        let seq: Vec<f64> = if reversed {
            g.iter().rev().cloned().collect()
        } else {
            g.to_vec()
        };
        let Ok(mut rows) = sweep_decompose(&seq) else {
            continue;
        };
        if reversed {
            for row in &mut rows {
                row.reverse();
            }
            rows.reverse(); // leftmost component first
        }
        // The pair's sum can be unimodal; one row cannot replace two.
        if rows.len() == 2 {
            seeds.push(rows);
        }
    }
    // Splitting after cell `s` keeps both sides unimodal iff `s` precedes the
    // first second-rise of `g` and `s + 1` is at or past the last one (scanned
    // from the right).
    let mut prefix_break = n; // prefixes ending before this stay unimodal
    let mut descended = false;
    for k in 1..n {
        if g[k] > g[k - 1] && descended {
            prefix_break = k;
            break;
        }
        if g[k] < g[k - 1] {
            descended = true;
        }
    }
    let mut suffix_ok_from = 0; // suffixes starting here or later stay unimodal
    let mut descended = false;
    for k in (0..n.saturating_sub(1)).rev() {
        if g[k] > g[k + 1] && descended {
            suffix_ok_from = k + 1;
            break;
        }
        if g[k] < g[k + 1] {
            descended = true;
        }
    }
    let lo = suffix_ok_from.saturating_sub(1);
    let hi = prefix_break.saturating_sub(1).min(n.saturating_sub(2));
    let mut boundaries = Vec::new();
    let mut s = lo;
    while s <= hi && hi < n {
        let valley = s > 0 && s + 1 < n && g[s] <= g[s - 1] && g[s] <= g[s + 1];
        if valley || s == lo || s == hi {
            let prefix_mass: f64 = g[..=s].iter().sum();
            let suffix_mass: f64 = g[s + 1..].iter().sum();
            if prefix_mass > 0.0 && suffix_mass > 0.0 {
                boundaries.push(s);
            }
        }
        s += 1;
    }
    for s in boundaries {
        let mut u = g.to_vec();
        let mut v = vec![0.0; n];
        for k in s + 1..n {
            v[k] = u[k];
            u[k] = 0.0;
        }
        seeds.push(vec![u, v]);
    }
    seeds
}

/// Run the single-cell transfer loop to convergence on an isolated pair of
/// rows. The rest of the enclosing mixture stays fixed, so only these two
/// rows' contribution to `J` changes.
fn polish_pair(dx: f64, n: usize, rows: Vec<Vec<f64>>, threshold: f64) -> Vec<Vec<f64>> {
    let grid = Grid::new(0.0, dx, n).expect("pair subproblem grid");
    let mut opt = Optimizer::from_rows(grid, rows);
    opt.init_pairs();
    for _ in 0..50 * opt.m * opt.n {
        let Some((d, r, best)) = opt.best_candidate() else {
            break;
        };
        if !(best.delta_j > threshold) {
            break;
        }
        opt.apply(d, r, &best);
    }
    opt.w
}

/// Incremental optimizer state. Candidate scores are kept per ordered
/// component pair; applying a transfer only refreshes the pairs that involve a
/// changed component.
struct Optimizer {
    dx: f64,
    n: usize,
    m: usize,
    w: Vec<Vec<f64>>,
    /// `a(w)` per cell (a(x) = x ln x), so candidate scoring avoids two logs.
    alog: Vec<Vec<f64>>,
    pi: Vec<f64>,
    api: Vec<f64>,
    /// Unimodality bounds per component and cell.
    em: Vec<Vec<f64>>,
    ep: Vec<Vec<f64>>,
    /// Inclusive support bounds per component.
    lo: Vec<usize>,
    hi: Vec<usize>,
    /// Best move per ordered pair `(d, r)`, flattened `d * m + r`.
    pair_best: Vec<Option<Move>>,
}

impl Optimizer {
    fn from_rows(grid: Grid, rows: Vec<Vec<f64>>) -> Optimizer {
        let n = grid.n_cells;
        let m = rows.len();
        let mut opt = Optimizer {
            dx: grid.dx,
            n,
            m,
            alog: rows
                .iter()
                .map(|row| row.iter().map(|&v| a(v)).collect())
                .collect(),
            pi: vec![0.0; m],
            api: vec![0.0; m],
            em: vec![Vec::new(); m],
            ep: vec![Vec::new(); m],
            lo: vec![0; m],
            hi: vec![0; m],
            w: rows,
            pair_best: Vec::new(),
        };
        for c in 0..m {
            opt.refresh_component(c);
        }
        opt
    }

    fn full_j(&self) -> f64 {
        js_of_rows(self.dx, self.w.iter().map(|r| r.as_slice()), self.n)
    }

    /// Recompute mass, bounds, and support of one component.
    fn refresh_component(&mut self, c: usize) {
        let row = &self.w[c];
        let n = self.n;
        self.pi[c] = row.iter().sum::<f64>() * self.dx;
        self.api[c] = a(self.pi[c]);
        self.lo[c] = row.iter().position(|&v| v > 0.0).unwrap_or(0);
        self.hi[c] = row.iter().rposition(|&v| v > 0.0).unwrap_or(n - 1);

        let max = row.iter().cloned().fold(f64::MIN, f64::max);
        let pl = row.iter().position(|&v| v == max).unwrap();
        let pu = row.iter().rposition(|&v| v == max).unwrap();

        let em = &mut self.em[c];
        let ep = &mut self.ep[c];
        em.resize(n, 0.0);
        ep.resize(n, 0.0);
        for k in 0..n {
            let left = if k > 0 { row[k - 1] } else { 0.0 };
            let right = if k + 1 < n { row[k + 1] } else { 0.0 };
            em[k] = (row[k] - left.min(right)).max(0.0);
            ep[k] = if k + 1 >= pl && k <= pu + 1 {
                f64::INFINITY
            } else {
                (left.max(right) - row[k]).max(0.0)
            };
        }
    }

    /// Evaluate the saturating move for `(d, r)` at `cell`.
    fn candidate(&self, d: usize, r: usize, cell: usize) -> Option<Move> {
        let em = self.em[d][cell];
        let ep = self.ep[r][cell];
        let eps = em.min(ep);
        if !(eps > 0.0) {
            return None;
        }
        if self.pi[d] - eps * self.dx < MIN_COMPONENT_MASS {
            return None;
        }
        let w_d = self.w[d][cell];
        let w_r = self.w[r][cell];
        let row_d = &self.w[d];
        let dmin = {
            let left = if cell > 0 { row_d[cell - 1] } else { 0.0 };
            let right = if cell + 1 < self.n { row_d[cell + 1] } else { 0.0 };
            left.min(right)
        };
        // Land exactly on whichever bound saturates; clamp the free side so
        // rounding cannot cross its own bound.
        let donor_new = if eps == em { dmin } else { (w_d - eps).max(dmin) };
        let recip_new = if eps == ep {
            let row_r = &self.w[r];
            let left = if cell > 0 { row_r[cell - 1] } else { 0.0 };
            let right = if cell + 1 < self.n { row_r[cell + 1] } else { 0.0 };
            left.max(right)
        } else {
            w_r + eps
        };
        let d_eps = eps * self.dx;
        let delta_j = self.dx * (a(donor_new) + a(recip_new) - self.alog[d][cell] - self.alog[r][cell])
            - (a(self.pi[d] - d_eps) - self.api[d] + a(self.pi[r] + d_eps) - self.api[r]);
        Some(Move {
            cell,
            delta_j,
            donor_new,
            recip_new,
        })
    }

    /// Rescan one ordered pair over the overlap of donor support and recipient
    /// support grown by one cell (outside it no move is possible), keeping the
    /// lowest-cell argmax.
    fn refresh_pair(&mut self, d: usize, r: usize) {
        let from = self.lo[d].max(self.lo[r].saturating_sub(1));
        let to = self.hi[d].min((self.hi[r] + 1).min(self.n - 1));
        let mut best: Option<Move> = None;
        let mut k = from;
        while k <= to {
            if let Some(cand) = self.candidate(d, r, k) {
                if best.as_ref().map_or(true, |b| cand.delta_j > b.delta_j) {
                    best = Some(cand);
                }
            }
            k += 1;
        }
        self.pair_best[d * self.m + r] = best;
    }

    fn init_pairs(&mut self) {
        self.pair_best = vec![None; self.m * self.m];
        for d in 0..self.m {
            for r in 0..self.m {
                if d != r {
                    self.refresh_pair(d, r);
                }
            }
        }
    }

    /// Global argmax over pair bests, lexicographically lowest
    /// `(donor, recipient, cell)` among ties.
    fn best_candidate(&self) -> Option<(usize, usize, Move)> {
        let mut best: Option<(usize, usize, Move)> = None;
        for d in 0..self.m {
            for r in 0..self.m {
                if let Some(mv) = &self.pair_best[d * self.m + r] {
                    if best.as_ref().map_or(true, |(_, _, b)| mv.delta_j > b.delta_j) {
                        best = Some((d, r, *mv));
                    }
                }
            }
        }
        best
    }

    fn apply(&mut self, d: usize, r: usize, mv: &Move) {
        self.w[d][mv.cell] = mv.donor_new;
        self.w[r][mv.cell] = mv.recip_new;
        self.alog[d][mv.cell] = a(mv.donor_new);
        self.alog[r][mv.cell] = a(mv.recip_new);
        self.refresh_component(d);
        self.refresh_component(r);
        self.refresh_pairs_touching(d, r);
    }

    /// Refresh every cached pair score that involves a changed component.
    fn refresh_pairs_touching(&mut self, d: usize, r: usize) {
        for x in [d, r] {
            for other in 0..self.m {
                if other != x {
                    self.refresh_pair(x, other);
                    if other != d && other != r {
                        self.refresh_pair(other, x);
                    }
                }
            }
        }
    }

    /// Scan unordered overlapping pairs; for each, re-derive the two rows from
    /// every seed in [`pair_seeds`], polish each with the same transfer loop,
    /// and keep the replacement with the largest `J` gain above `threshold`.
    /// With the other components fixed, the mixture `J` differs from the
    /// pair's contribution by a constant, so the gain is exact.
    fn best_pair_resweep(&self, threshold: f64) -> Option<PairResweep> {
        let mut best: Option<PairResweep> = None;
        for i in 0..self.m {
            for j in i + 1..self.m {
                // Disjoint supports admit only the current split (up to
                // swapping labels), so nothing can improve.
                if self.lo[i].max(self.lo[j]) > self.hi[i].min(self.hi[j]) {
                    continue;
                }
                let g: Vec<f64> = (0..self.n).map(|k| self.w[i][k] + self.w[j][k]).collect();
                let current = pair_contrib(self.dx, &self.w[i], &self.w[j]);
                for rows in pair_seeds(&g) {
                    let rows = polish_pair(self.dx, self.n, rows, threshold);
                    let delta = pair_contrib(self.dx, &rows[0], &rows[1]) - current;
                    if delta > threshold && best.as_ref().map_or(true, |b| delta > b.delta_j) {
                        let mut it = rows.into_iter();
                        best = Some(PairResweep {
                            first: i,
                            second: j,
                            row_first: it.next().unwrap(),
                            row_second: it.next().unwrap(),
                            delta_j: delta,
                        });
                    }
                }
            }
        }
        best
    }

    fn apply_pair_resweep(&mut self, swap: PairResweep) {
        let PairResweep {
            first,
            second,
            row_first,
            row_second,
            ..
        } = swap;
        self.alog[first] = row_first.iter().map(|&v| a(v)).collect();
        self.alog[second] = row_second.iter().map(|&v| a(v)).collect();
        self.w[first] = row_first;
        self.w[second] = row_second;
        self.refresh_component(first);
        self.refresh_component(second);
        self.refresh_pairs_touching(first, second);
    }

    /// Post-resweep checks for validating runs: the two replaced rows stay
    /// unimodal and every cell still sums to the target.
    fn validate_rows(&self, f: &[f64], f_peak: f64, i: usize, j: usize) -> Result<()> {
        for x in [i, j] {
            if !is_unimodal(&self.w[x]) {
                return Err(Error::Contract(format!(
                    "component {x} lost unimodality after a pair resweep"
                )));
            }
        }
        for k in 0..self.n {
            let sum: f64 = self.w.iter().map(|row| row[k]).sum();
            if (sum - f[k]).abs() > CONSERVATION_TOL * f_peak {
                return Err(Error::Contract(format!(
                    "density not conserved at cell {k}: {sum} vs {}",
                    f[k]
                )));
            }
        }
        Ok(())
    }

    /// Post-transfer checks for validating runs: the two touched rows stay
    /// unimodal and the touched cell still sums to the target.
    fn validate_step(&self, f: &[f64], f_peak: f64, d: usize, r: usize, cell: usize) -> Result<()> {
        for x in [d, r] {
            if !is_unimodal(&self.w[x]) {
                return Err(Error::Contract(format!(
                    "component {x} lost unimodality after a transfer"
                )));
            }
        }
        let sum: f64 = self.w.iter().map(|row| row[cell]).sum();
        if (sum - f[cell]).abs() > CONSERVATION_TOL * f_peak {
            return Err(Error::Contract(format!(
                "density not conserved at cell {cell}: {sum} vs {}",
                f[cell]
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gaussian_density, kde};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn grid(lo: f64, hi: f64, n: usize) -> Grid {
        Grid::spanning(lo, hi, n).unwrap()
    }

    /// Random mixture built from the sweep of seeded noise.
    fn random_noise_mixture(seed: u64, n: usize) -> (GridDensity, Mixture) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grid(0.0, 1.0, n);
        let f = GridDensity::new(g, (0..n).map(|_| rng.gen_range(0.05..1.0)).collect())
            .unwrap()
            .normalize()
            .unwrap();
        let mix = Mixture::sweep_of(&f).unwrap();
        (f, mix)
    }

    /// Three well-separated unimodal components with random masses.
    fn random_triple(seed: u64) -> Mixture {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grid(0.0, 9.0, 90);
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let center = 1.5 + 3.0 * i as f64 + rng.gen_range(-0.4..0.4);
                let sigma = rng.gen_range(0.2..0.5);
                let pi = rng.gen_range(0.2..1.0);
                gaussian_density(center, sigma, &g)
                    .unwrap()
                    .values()
                    .iter()
                    .map(|v| v * pi)
                    .collect()
            })
            .collect();
        Mixture::from_weights(g, rows).unwrap()
    }

    #[test]
    fn js_of_single_component_is_zero() {
        let g = grid(0.0, 1.0, 50);
        let f = gaussian_density(0.5, 0.2, &g).unwrap();
        let mix = Mixture::from_weights(g, vec![f.values().to_vec()]).unwrap();
        assert_eq!(js_divergence(&mix), 0.0);
    }

    #[test]
    fn js_of_disjoint_halves_is_ln_two() {
        let g = grid(0.0, 2.0, 100);
        let mut w1 = vec![0.0; 100];
        let mut w2 = vec![0.0; 100];
        for k in 0..50 {
            w1[k] = 0.5;
            w2[k + 50] = 0.5;
        }
        let mix = Mixture::from_weights(g, vec![w1, w2]).unwrap();
        assert!((js_divergence(&mix) - 2f64.ln()).abs() <= 1e-9);
    }

    #[test]
    fn js_of_identical_components_is_zero() {
        let g = grid(0.0, 1.0, 64);
        let f = gaussian_density(0.5, 0.1, &g).unwrap();
        let half: Vec<f64> = f.values().iter().map(|v| 0.5 * v).collect();
        let mix = Mixture::from_weights(g, vec![half.clone(), half]).unwrap();
        assert!(js_divergence(&mix).abs() <= 1e-12);
    }

    #[test]
    fn js_of_disjoint_components_is_label_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = grid(0.0, 2.0, 100);
        for _ in 0..5 {
            let pi1: f64 = rng.gen_range(0.05..0.95);
            let mut w1 = vec![0.0; 100];
            let mut w2 = vec![0.0; 100];
            for k in 0..50 {
                w1[k] = pi1 / (50.0 * 0.02);
                w2[k + 50] = (1.0 - pi1) / (50.0 * 0.02);
            }
            let mix = Mixture::from_weights(g, vec![w1, w2]).unwrap();
            let expect = -(pi1 * pi1.ln() + (1.0 - pi1) * (1.0 - pi1).ln());
            assert!((js_divergence(&mix) - expect).abs() <= 1e-9);
        }
    }

    #[test]
    fn candidate_on_three_cell_valley() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let mix = Mixture::from_weights(
            g,
            vec![vec![0.4, 0.2, 0.2], vec![0.0, 0.0, 0.2]],
        )
        .unwrap();
        // Donor may shed cell 2 down to its right pad (eps_minus = 0.2); the
        // recipient peak is unbounded there.
        let after = candidate_perturbation(&mix, 0, 1, 2).unwrap().unwrap();
        let eps = mix.weights()[0][2] - after.weights()[0][2];
        assert!((eps - 0.2).abs() <= 1e-15);
        assert!(js_divergence(&after) > js_divergence(&mix));

        // The transfer conserves the pointwise sum.
        for (x, y) in after.total().values().iter().zip(mix.total().values()) {
            assert!((x - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn candidate_requires_positive_eps_and_donor_mass() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let mix = Mixture::from_weights(
            g,
            vec![vec![0.4, 0.2, 0.2], vec![0.0, 0.0, 0.2]],
        )
        .unwrap();
        // Cell 0 of the second component is two cells from its support:
        // eps_plus = 0, no candidate.
        assert!(candidate_perturbation(&mix, 0, 1, 0).unwrap().is_none());
        // A donor at the component-mass floor cannot give.
        let tiny = Mixture::from_weights(
            g,
            vec![vec![0.9, 0.05, 0.0], vec![0.0, 0.0, 5e-13]],
        )
        .unwrap();
        assert!(candidate_perturbation(&tiny, 1, 0, 2).unwrap().is_none());
        assert!(candidate_perturbation(&tiny, 0, 0, 1).is_err());
    }

    #[test]
    fn incremental_delta_matches_full_recompute() {
        let mut checked = 0;
        for seed in [23, 5, 99, 2024] {
            let (_, mix) = random_noise_mixture(seed, 40);
            let j0 = js_divergence(&mix);
            let m = mix.n_components();
            let state = Optimizer::from_rows(mix.grid(), mix.weights().to_vec());
            for d in 0..m {
                for r in 0..m {
                    if d == r {
                        continue;
                    }
                    for cell in 0..mix.grid().n_cells {
                        let Some(mv) = state.candidate(d, r, cell) else {
                            continue;
                        };
                        let mut w = mix.weights().to_vec();
                        w[d][cell] = mv.donor_new;
                        w[r][cell] = mv.recip_new;
                        let j1 = js_of_rows(
                            mix.grid().dx,
                            w.iter().map(|x| x.as_slice()),
                            mix.grid().n_cells,
                        );
                        assert!(
                            (j1 - j0 - mv.delta_j).abs() <= 1e-12 * (1.0 + j0.abs()),
                            "delta mismatch at ({d},{r},{cell}): {} vs {}",
                            j1 - j0,
                            mv.delta_j
                        );
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 50, "too few candidates exercised: {checked}");
    }

    #[test]
    fn tme_of_unimodal_density_is_trivial() {
        let g = grid(-3.0, 3.0, 120);
        let f = gaussian_density(0.0, 0.7, &g).unwrap();
        let report = tme(&f).unwrap();
        assert_eq!(report.mixture.n_components(), 1);
        assert_eq!(report.iterations, 0);
        assert!(report.converged);
        // J of a single component is zero up to the rounding of its mass term.
        assert_eq!(report.j_trace.len(), 1);
        assert!(report.j_trace[0].abs() <= 1e-12);
    }

    /// Exhaustive grid search over the valid two-component decompositions
    /// `[2, a, b] + [0, 1-a, 2-b]` of the valley `[2, 1, 2]`.
    fn three_cell_oracle(step: f64) -> f64 {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let mut best = f64::MIN;
        let mut ai = 0.0;
        while ai <= 1.0 + 1e-12 {
            let mut bi = 0.0;
            while bi <= ai + 1e-12 {
                let w1 = vec![2.0 / 5.0, ai / 5.0, bi / 5.0];
                let w2 = vec![0.0, (1.0 - ai) / 5.0, (2.0 - bi) / 5.0];
                let rows = [w1.as_slice(), w2.as_slice()];
                let j = js_of_rows(g.dx, rows.into_iter(), 3);
                if j > best {
                    best = j;
                }
                bi += step;
            }
            ai += step;
        }
        best
    }

    #[test]
    fn tme_matches_three_cell_oracle() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let f = GridDensity::new(g, vec![0.4, 0.2, 0.4]).unwrap();
        let report = tme(&f).unwrap();
        assert_eq!(report.mixture.n_components(), 2);
        let oracle = three_cell_oracle(1e-3);
        // The optimum pushes one side to a disjoint split; its J is the label
        // entropy H(0.4, 0.6).
        let expect = -(0.4f64 * 0.4f64.ln() + 0.6 * 0.6f64.ln());
        assert!((oracle - expect).abs() <= 1e-6);
        assert!((report.j_nats() - oracle).abs() <= 1e-4);
    }

    #[test]
    fn transfer_curve_endpoints_are_pair_merges() {
        let mix = random_triple(3);
        let at0 = transfer_curve(&mix, 0.0).unwrap();
        let at1 = transfer_curve(&mix, 1.0).unwrap();
        // t = 0 pools components 0 and 1; t = 1 pools 1 and 2.
        assert!((at0 - merged_js(&mix, 0, 1).unwrap()).abs() <= 1e-12);
        assert!((at1 - merged_js(&mix, 1, 2).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn transfer_curve_is_convex() {
        for seed in 0..8 {
            let mix = random_triple(seed);
            let g0 = transfer_curve(&mix, 0.0).unwrap();
            let g1 = transfer_curve(&mix, 1.0).unwrap();
            for i in 1..9 {
                let t = i as f64 / 10.0;
                let gt = transfer_curve(&mix, t).unwrap();
                assert!(
                    gt <= t * g1 + (1.0 - t) * g0 + 1e-12,
                    "seed {seed}, t {t}: {gt} vs chord {}",
                    t * g1 + (1.0 - t) * g0
                );
            }
        }
    }

    #[test]
    fn merging_never_increases_js() {
        for seed in [1, 7, 19] {
            let (_, mix) = random_noise_mixture(seed, 30);
            let j = js_divergence(&mix);
            let m = mix.n_components();
            for x in 0..m.min(4) {
                for y in (x + 1)..m.min(4) {
                    assert!(merged_js(&mix, x, y).unwrap() <= j + 1e-12);
                }
            }
        }
    }

    #[test]
    fn tme_trace_is_monotone_and_conserves_density() {
        let g = grid(-1.0, 11.0, 100);
        let f = kde(&[1.0, 1.2, 2.1, 7.9, 8.3, 8.0, 4.0], 0.6, &g).unwrap();
        let cfg = TmeConfig {
            validate_each_iteration: true,
            ..TmeConfig::default()
        };
        let report = tme_with_config(&f, &cfg).unwrap();
        assert!(report.converged);
        for pair in report.j_trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-12);
        }
        assert!(report.j_nats() >= report.j_trace[0]);
        let total = report.mixture.total();
        let peak = f.values().iter().cloned().fold(0.0, f64::max);
        for (s, t) in total.values().iter().zip(f.values()) {
            assert!((s - t).abs() <= 1e-9 * peak);
        }
    }

    #[test]
    fn forward_and_reverse_initializations_agree() {
        let g = grid(-1.0, 11.0, 100);
        let f = kde(&[1.0, 1.3, 2.0, 7.5, 8.1, 8.4], 0.7, &g).unwrap();
        let cfg = TmeConfig::default();
        let fwd = tme_with_config(&f, &cfg).unwrap();
        let rev = tme_from_init(&f, Mixture::reverse_sweep_of(&f).unwrap(), &cfg).unwrap();
        assert_eq!(
            fwd.mixture.n_components(),
            rev.mixture.n_components()
        );
        assert!(
            (fwd.j_nats() - rev.j_nats()).abs() <= 1e-6,
            "{} vs {}",
            fwd.j_nats(),
            rev.j_nats()
        );
    }

    #[test]
    fn tme_is_deterministic() {
        let (f, _) = random_noise_mixture(41, 60);
        let r1 = tme(&f).unwrap();
        let r2 = tme(&f).unwrap();
        assert_eq!(r1.mixture, r2.mixture);
        assert_eq!(r1.j_trace, r2.j_trace);
    }
}
