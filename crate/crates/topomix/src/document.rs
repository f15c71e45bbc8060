//! Serialization of results and ingestion of CSV inputs.
//!
//! A [`MixtureDocument`] is the versioned JSON form of a decomposition:
//! enough to reconstruct the mixture exactly, plus the bandwidth-selection
//! summary and provenance of the run that produced it.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridDensity};
use crate::mixture::{js_divergence, Mixture};
use serde::{Deserialize, Serialize};

/// Schema tag of the current document format.
pub const DOCUMENT_FORMAT: &str = "topomix/1";

/// Bandwidth-selection summary embedded in a document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TdeBlock {
    pub m_hat: usize,
    pub h_hat: f64,
    pub h_minus: f64,
    pub h_sup: f64,
    pub blur_budget: f64,
    pub delta_h: f64,
    pub measure: String,
}

/// Where a document came from.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    /// Input path as given on the command line, or a symbolic source name.
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Echo of the effective configuration.
    pub config: serde_json::Value,
    pub version: String,
}

impl Provenance {
    pub fn new(input: impl Into<String>, seed: Option<u64>, config: serde_json::Value) -> Self {
        Provenance {
            input: input.into(),
            seed,
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Versioned serialized form of a mixture decomposition.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MixtureDocument {
    pub format: String,
    pub grid: Grid,
    /// Weighted component rows, `M x n_cells`.
    pub weights: Vec<Vec<f64>>,
    /// Component masses.
    pub pi: Vec<f64>,
    /// Jensen-Shannon divergence of the mixture, nats.
    pub j_nats: f64,
    /// Component count (the mode count of the density).
    pub ucat: usize,
    /// Location of each component's maximum.
    pub modes: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tde: Option<TdeBlock>,
    pub provenance: Provenance,
}

impl MixtureDocument {
    pub fn from_mixture(
        mixture: &Mixture,
        tde: Option<TdeBlock>,
        provenance: Provenance,
    ) -> MixtureDocument {
        MixtureDocument {
            format: DOCUMENT_FORMAT.to_string(),
            grid: mixture.grid(),
            weights: mixture.weights().to_vec(),
            pi: mixture.pi(),
            j_nats: js_divergence(mixture),
            ucat: mixture.n_components(),
            modes: mixture.modes(),
            tde,
            provenance,
        }
    }

    /// Reconstruct the mixture, re-validating its invariants.
    pub fn to_mixture(&self) -> Result<Mixture> {
        if self.format != DOCUMENT_FORMAT {
            return Err(Error::InvalidInput(format!(
                "unsupported document format {:?}",
                self.format
            )));
        }
        Mixture::from_weights(self.grid, self.weights.clone())
    }
}

/// Parsed CSV input: either raw sample values or a tabulated density.
#[derive(Debug, Clone, PartialEq)]
pub enum InputData {
    /// One numeric column: sample values.
    Samples(Vec<f64>),
    /// Two columns `x,value` on an equally spaced strictly increasing `x`
    /// midpoint grid.
    Density(GridDensity),
}

/// Relative slack allowed in the spacing of density `x` columns, absorbing
/// printed-decimal rounding.
const SPACING_TOL: f64 = 1e-6;

/// Parse sample or density CSV. A single leading non-numeric line is treated
/// as a header. Errors carry 1-based line numbers.
pub fn parse_input_csv(text: &str) -> Result<InputData> {
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut columns = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) => {
                if rows.is_empty() {
                    columns = values.len();
                } else if values.len() != columns {
                    return Err(Error::Parse {
                        line: line_no,
                        reason: format!("expected {columns} columns, found {}", values.len()),
                    });
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parse {
                        line: line_no,
                        reason: "non-finite value".into(),
                    });
                }
                rows.push((line_no, values));
            }
            Err(_) => {
                if rows.is_empty() && idx == 0 {
                    continue; // header
                }
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("not numeric: {line:?}"),
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("no data rows in input".into()));
    }
    match columns {
        1 => Ok(InputData::Samples(
            rows.into_iter().map(|(_, v)| v[0]).collect(),
        )),
        2 => {
            if rows.len() < 2 {
                return Err(Error::InvalidInput(
                    "a density needs at least two rows to define its grid".into(),
                ));
            }
            let dx = rows[1].1[0] - rows[0].1[0];
            if dx <= 0.0 {
                return Err(Error::Parse {
                    line: rows[1].0,
                    reason: "x values must be strictly increasing".into(),
                });
            }
            for w in rows.windows(2) {
                let step = w[1].1[0] - w[0].1[0];
                if step <= 0.0 {
                    return Err(Error::Parse {
                        line: w[1].0,
                        reason: "x values must be strictly increasing".into(),
                    });
                }
                if (step - dx).abs() > SPACING_TOL * dx {
                    return Err(Error::Parse {
                        line: w[1].0,
                        reason: format!(
                            "x values must be equally spaced: step {step} differs from {dx}"
                        ),
                    });
                }
            }
            // The x column lists cell midpoints.
            let grid = Grid::new(rows[0].1[0] - 0.5 * dx, dx, rows.len())?;
            let values: Vec<f64> = rows.into_iter().map(|(_, v)| v[1]).collect();
            Ok(InputData::Density(GridDensity::new(grid, values)?))
        }
        n => Err(Error::Parse {
            line: 1,
            reason: format!("expected 1 or 2 columns, found {n}"),
        }),
    }
}

/// Stacked-area plot data: `x`, then the cumulative component sums, one
/// column per component. The last column is the mixture density.
pub fn stacked_csv(mix: &Mixture) -> String {
    let m = mix.n_components();
    let grid = mix.grid();
    let mut out = String::from("x");
    for i in 1..=m {
        out.push_str(&format!(",stack_{i}"));
    }
    out.push('\n');
    for k in 0..grid.n_cells {
        out.push_str(&format!("{}", grid.midpoint(k)));
        let mut cum = 0.0;
        for row in mix.weights() {
            cum += row[k];
            out.push_str(&format!(",{cum}"));
        }
        out.push('\n');
    }
    out
}

/// Density plot data: `x,value` rows, parseable back by [`parse_input_csv`].
pub fn density_csv(f: &GridDensity) -> String {
    let mut out = String::from("x,value\n");
    for (k, v) in f.values().iter().enumerate() {
        out.push_str(&format!("{},{v}\n", f.grid().midpoint(k)));
    }
    out
}
