//! Piecewise-constant densities on uniform grids.
//!
//! A density is represented by its values at the midpoints of `n_cells` equal
//! cells of width `dx`; its mass is `sum(values) * dx`. Gaussian kernels are
//! evaluated at cell midpoints and renormalized so each kernel carries exactly
//! unit mass on the grid, which keeps every downstream mass identity exact
//! instead of quadrature-approximate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values smaller than `peak * TAIL_CLIP` are zeroed after kernel sums.
/// Sums of far-apart kernels otherwise leave denormal-scale ripples in the
/// tails, which the mode-counting routines would read as spurious modes.
const TAIL_CLIP: f64 = 1e-15;

/// Gaussian kernels are accumulated within this many standard deviations of
/// their center; beyond it the density is below `TAIL_CLIP` relative to the
/// kernel peak.
const KERNEL_EVAL_RADIUS: f64 = 9.0;

/// Uniform grid of `n_cells` cells of width `dx` starting at `x0`.
/// Cell `k` covers `[x0 + k*dx, x0 + (k+1)*dx)` and is sampled at its midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub n_cells: usize,
}

impl Grid {
    pub fn new(x0: f64, dx: f64, n_cells: usize) -> Result<Grid> {
        if !x0.is_finite() {
            return Err(Error::param("x0", "must be finite"));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::param("dx", format!("must be positive, got {dx}")));
        }
        if n_cells == 0 {
            return Err(Error::param("n_cells", "must be at least 1"));
        }
        Ok(Grid { x0, dx, n_cells })
    }

    /// Grid spanning `[lo, hi]` with `n_cells` cells.
    pub fn spanning(lo: f64, hi: f64, n_cells: usize) -> Result<Grid> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::param("span", format!("invalid interval [{lo}, {hi}]")));
        }
        Grid::new(lo, (hi - lo) / n_cells as f64, n_cells)
    }

    /// Default evaluation grid for a sample: `[min - 3*h_margin, max + 3*h_margin]`
    /// so that kernels of bandwidth up to `h_margin` keep their mass interior.
    pub fn for_sample(sample: &[f64], h_margin: f64, n_cells: usize) -> Result<Grid> {
        if sample.is_empty() {
            return Err(Error::InvalidInput("empty sample".into()));
        }
        if !(h_margin.is_finite() && h_margin > 0.0) {
            return Err(Error::param("h_margin", "must be positive"));
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &x in sample {
            if !x.is_finite() {
                return Err(Error::InvalidInput("sample contains a non-finite value".into()));
            }
            lo = lo.min(x);
            hi = hi.max(x);
        }
        Grid::spanning(lo - 3.0 * h_margin, hi + 3.0 * h_margin, n_cells)
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        self.x0 + (k as f64 + 0.5) * self.dx
    }

    /// Right edge of the last cell.
    pub fn x_end(&self) -> f64 {
        self.x0 + self.dx * self.n_cells as f64
    }

    /// Index of the cell whose midpoint is nearest to `x`, clamped to the grid.
    pub fn nearest_cell(&self, x: f64) -> usize {
        let raw = ((x - self.x0) / self.dx).floor();
        (raw.max(0.0) as usize).min(self.n_cells - 1)
    }
}

/// Nonnegative piecewise-constant density on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    grid: Grid,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<GridDensity> {
        if values.len() != grid.n_cells {
            return Err(Error::InvalidInput(format!(
                "grid has {} cells but {} values were given",
                grid.n_cells,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(
                "density values must be finite and nonnegative".into(),
            ));
        }
        Ok(GridDensity { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx
    }

    /// Rescale so the mass is exactly 1. Errors on an all-zero density.
    pub fn normalize(mut self) -> Result<GridDensity> {
        let m = self.mass();
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidInput("cannot normalize a zero density".into()));
        }
        for v in &mut self.values {
            *v /= m;
        }
        Ok(self)
    }

    pub fn is_normalized(&self) -> bool {
        (self.mass() - 1.0).abs() <= 1e-9
    }
}

/// Accumulate `weight` times a unit-mass discrete Gaussian centered at `mu`
/// into `buf`. The kernel is evaluated at cell midpoints within
/// `KERNEL_EVAL_RADIUS * sigma` of `mu` and renormalized over that window, so
/// every kernel contributes exactly `weight * dx` of mass. A kernel whose
/// window misses every midpoint (sigma far below dx, or center far off-grid)
/// collapses to the nearest cell: the delta limit.
fn accumulate_kernel(buf: &mut [f64], grid: &Grid, mu: f64, sigma: f64, weight: f64) {
    let n = grid.n_cells;
    let radius = KERNEL_EVAL_RADIUS * sigma;
    let lo_idx = ((mu - radius - grid.x0) / grid.dx - 0.5).ceil().max(0.0) as usize;
    let hi_idx = (((mu + radius - grid.x0) / grid.dx - 0.5).floor().min((n - 1) as f64)) as isize;

    let mut sum = 0.0;
    let mut any = false;
    if hi_idx >= lo_idx as isize {
        let hi_idx = hi_idx as usize;
        for k in lo_idx..=hi_idx {
            let z = (grid.midpoint(k) - mu) / sigma;
            sum += (-0.5 * z * z).exp();
        }
        if sum > 0.0 {
            any = true;
            let scale = weight / (sum * grid.dx);
            for k in lo_idx..=hi_idx {
                let z = (grid.midpoint(k) - mu) / sigma;
                buf[k] += (-0.5 * z * z).exp() * scale;
            }
        }
    }
    if !any {
        buf[grid.nearest_cell(mu)] += weight / grid.dx;
    }
}

/// Zero out sub-`TAIL_CLIP` ripple relative to the peak, then rescale to unit
/// mass.
fn finalize_density(grid: Grid, mut values: Vec<f64>) -> Result<GridDensity> {
    let peak = values.iter().cloned().fold(0.0_f64, f64::max);
    if peak > 0.0 {
        let floor = peak * TAIL_CLIP;
        for v in &mut values {
            if *v < floor {
                *v = 0.0;
            }
        }
    }
    GridDensity::new(grid, values)?.normalize()
}

/// Discrete Gaussian density: kernel evaluated at cell midpoints, renormalized
/// to grid mass exactly 1.
pub fn gaussian_density(mu: f64, sigma: f64, grid: &Grid) -> Result<GridDensity> {
    if !mu.is_finite() {
        return Err(Error::param("mu", "must be finite"));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
    }
    let mut buf = vec![0.0; grid.n_cells];
    accumulate_kernel(&mut buf, grid, mu, sigma, 1.0);
    finalize_density(*grid, buf)
}

/// Gaussian kernel density estimate at bandwidth `h`: the average of unit-mass
/// kernels centered at the sample points, normalized to grid mass 1.
pub fn kde(sample: &[f64], h: f64, grid: &Grid) -> Result<GridDensity> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("sample contains a non-finite value".into()));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::param("h", format!("bandwidth must be positive, got {h}")));
    }
    let mut buf = vec![0.0; grid.n_cells];
    let w = 1.0 / sample.len() as f64;
    for &x in sample {
        accumulate_kernel(&mut buf, grid, x, h, w);
    }
    finalize_density(*grid, buf)
}

/// Convolve with a Gaussian of width `sigma`, truncated at five standard
/// deviations with the kernel renormalized to unit discrete mass. The output
/// is rescaled to the input mass, so convolution conserves mass exactly even
/// when tails would leak past the grid boundary. `sigma = 0` is the identity.
pub fn convolve_gaussian(f: &GridDensity, sigma: f64) -> Result<GridDensity> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::param("sigma", format!("must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(f.clone());
    }
    let grid = f.grid;
    let dx = grid.dx;
    let radius = (5.0 * sigma / dx).ceil() as usize;
    let mut kernel = Vec::with_capacity(radius + 1);
    for k in 0..=radius {
        let z = k as f64 * dx / sigma;
        kernel.push((-0.5 * z * z).exp());
    }
    let ksum = kernel[0] + 2.0 * kernel[1..].iter().sum::<f64>();
    for g in &mut kernel {
        *g /= ksum;
    }

    let n = grid.n_cells;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut acc = kernel[0] * f.values[i];
        for k in 1..=radius {
            if i >= k {
                acc += kernel[k] * f.values[i - k];
            }
            if i + k < n {
                acc += kernel[k] * f.values[i + k];
            }
        }
        out[i] = acc;
    }

    let mass_in = f.mass();
    if mass_in == 0.0 {
        return GridDensity::new(grid, out);
    }
    let peak = out.iter().cloned().fold(0.0_f64, f64::max);
    let floor = peak * TAIL_CLIP;
    for v in &mut out {
        if *v < floor {
            *v = 0.0;
        }
    }
    let mass_out = out.iter().sum::<f64>() * dx;
    let scale = mass_in / mass_out;
    for v in &mut out {
        *v *= scale;
    }
    GridDensity::new(grid, out)
}

/// Differential entropy `-sum f_k ln f_k dx` in nats, with `0 ln 0 = 0`.
pub fn entropy(f: &GridDensity) -> f64 {
    let dx = f.grid.dx;
    -f.values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
        * dx
}

/// Entropy of a raw weight row (same convention as [`entropy`]).
pub(crate) fn entropy_slice(values: &[f64], dx: f64) -> f64 {
    -values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
        * dx
}

/// Mass-preserving resample onto `target`: each target cell takes the
/// overlap-weighted average of the source cells it covers. The target must
/// span the support of `f`.
pub fn resample(f: &GridDensity, target: &Grid) -> Result<GridDensity> {
    let src = f.grid;
    let support: Vec<usize> = (0..src.n_cells).filter(|&k| f.values[k] > 0.0).collect();
    if let (Some(&first), Some(&last)) = (support.first(), support.last()) {
        let slack = 1e-9 * src.dx;
        let lo = src.x0 + first as f64 * src.dx;
        let hi = src.x0 + (last + 1) as f64 * src.dx;
        if target.x0 > lo + slack || target.x_end() < hi - slack {
            return Err(Error::DomainCoverage);
        }
    }

    let mut out = vec![0.0; target.n_cells];
    for j in 0..target.n_cells {
        let a = target.x0 + j as f64 * target.dx;
        let b = a + target.dx;
        // Source cells intersecting [a, b).
        let i_lo = (((a - src.x0) / src.dx).floor().max(0.0)) as usize;
        let i_hi = ((((b - src.x0) / src.dx).ceil()).min(src.n_cells as f64).max(0.0)) as usize;
        let mut acc = 0.0;
        for i in i_lo..i_hi {
            let ca = src.x0 + i as f64 * src.dx;
            let cb = ca + src.dx;
            let overlap = (b.min(cb) - a.max(ca)).max(0.0);
            acc += overlap * f.values[i];
        }
        out[j] = acc / target.dx;
    }
    GridDensity::new(*target, out)
}
