//! Topologically minimal unimodal mixture decomposition of 1-D densities.
//!
//! The crate answers two questions about a density on a uniform grid:
//!
//! 1. Given the density, what is the *least* number of unimodal pieces that
//!    sum to it, and among those minimal decompositions, which one carries the
//!    most information about which piece a point came from? ([`tme`] — sweep
//!    initialization plus greedy saturating mass transfers maximizing the
//!    generalized Jensen-Shannon divergence.)
//! 2. Given a sample, how many modes does it support and at what kernel
//!    bandwidth? ([`select_bandwidth`] — the unimodal-category profile over a
//!    bandwidth grid, scored by a measure on bandwidths, picking the most
//!    persistent mode count and its weighted-median bandwidth.)
//!
//! [`reblur_tme`] chains them: select a bandwidth, deblur to the smallest
//! bandwidth with the persistent mode count, decompose there, then smooth each
//! component back up to the selected bandwidth. The result is a mixture at the
//! statistically justified scale whose component count is topologically
//! justified.

pub mod bandwidth;
pub mod bench;
pub mod document;
pub mod error;
pub mod grid;
pub mod mixture;
pub mod pipeline;
pub mod unimodal;

pub use bandwidth::{
    default_bandwidth_grid, estimate_ucat, general_blur_budget, measure_weights, run_tde,
    select_bandwidth, topological_blur_budget, ucat_profile, BandwidthGrid, MeasureKind,
    TdeConfig, TdeResult, TdeRun, UcatProfile,
};
pub use bench::{evaluate_recovery, fkm_density, sample_fkm, FkmSpec, RecoveryStats};
pub use document::{
    density_csv, parse_input_csv, stacked_csv, InputData, MixtureDocument, Provenance, TdeBlock,
};
pub use error::{Error, Result};
pub use grid::{convolve_gaussian, gaussian_density, kde, Grid, GridDensity};
pub use mixture::{
    candidate_perturbation, js_divergence, merged_js, tme, tme_from_init, tme_with_config,
    transfer_curve, Mixture, TmeConfig, TmeReport,
};
pub use pipeline::{
    deblur_only, figure_panels, reblur_tme, FigurePanels, PipelineConfig, PipelineResult,
};
pub use unimodal::{is_unimodal, sweep_decompose, ucat, ucat_density, UnimodalSeq};
