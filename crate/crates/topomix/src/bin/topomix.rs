//! Command-line front-end: decompose densities, select bandwidths, run the
//! deblur/reblur pipeline, and score recovery on the synthetic family.
//!
//! Data goes to stdout (or `--output`), diagnostics to stderr. Exit codes:
//! 0 success, 2 input or parameter error, 3 internal numeric failure.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use topomix::bandwidth::{run_tde, BandwidthGrid, TdeConfig};
use topomix::bench::{evaluate_recovery, FkmSpec};
use topomix::document::{
    density_csv, parse_input_csv, stacked_csv, InputData, MixtureDocument, Provenance, TdeBlock,
    DOCUMENT_FORMAT,
};
use topomix::grid::{kde, resample, Grid};
use topomix::mixture::{tme_with_config, TmeConfig};
use topomix::pipeline::{figure_panels, reblur_tme, PipelineConfig};
use topomix::{Error, MeasureKind, Result};

#[derive(Parser)]
#[command(
    name = "topomix",
    version,
    about = "Topologically minimal unimodal mixture decomposition of 1-D densities"
)]
struct Cli {
    /// Threads for the parallel stages (bandwidth profiling, benchmark
    /// trials). Defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a density (or a sample via --bandwidth) into the minimal
    /// number of unimodal components with maximal information content.
    Decompose(DecomposeArgs),
    /// Select a kernel bandwidth by mode-count persistence.
    Tde(TdeArgs),
    /// Full pipeline: select bandwidth, decompose at the sharpest persistent
    /// scale, blur components back to the selected scale.
    Pipeline(PipelineArgs),
    /// Score bandwidth selection against the synthetic mixture family.
    Bench(BenchArgs),
}

#[derive(Args)]
struct DecomposeArgs {
    /// CSV input: one column of samples, or two columns x,density.
    input: PathBuf,
    /// Kernel bandwidth for sample input (ignored rows become a density
    /// first). Required for samples, rejected for densities.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Working grid cells.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Write the JSON document here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write stacked-area plot data (x, cumulative component sums).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Recorded in provenance; the command itself is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TdeArgs {
    /// CSV input: one column of samples.
    input: PathBuf,
    /// Persistence measure: counting or inverse-lebesgue.
    #[arg(long, default_value = "inverse-lebesgue")]
    measure: MeasureKind,
    /// Explicit comma-separated bandwidth proposals, e.g. "0.5,1,2,4".
    #[arg(long)]
    bandwidths: Option<String>,
    /// Smallest proposal (needs --h-max; default: sample range / 50).
    #[arg(long, requires = "h_max")]
    h_min: Option<f64>,
    /// Largest proposal (needs --h-min; default: sample range).
    #[arg(long, requires = "h_min")]
    h_max: Option<f64>,
    /// Number of log-spaced proposals when no explicit list is given.
    #[arg(long, default_value_t = 64)]
    bandwidth_count: usize,
    /// Lower bound on profile evaluation-grid cells.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Include the (bandwidth, mode count) profile in the JSON and print it
    /// as a table on stderr.
    #[arg(long)]
    profile: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PipelineArgs {
    /// CSV input: one column of samples.
    input: PathBuf,
    #[arg(long, default_value = "inverse-lebesgue")]
    measure: MeasureKind,
    #[arg(long)]
    bandwidths: Option<String>,
    #[arg(long, requires = "h_max")]
    h_min: Option<f64>,
    #[arg(long, requires = "h_min")]
    h_max: Option<f64>,
    #[arg(long, default_value_t = 64)]
    bandwidth_count: usize,
    /// Working grid cells for the mixture.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Emit all four views: sweep and optimized mixture at the selected
    /// bandwidth, the deblurred mixture, and the reblurred mixture.
    #[arg(long)]
    all_panels: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Stacked-area CSV: a file path, or a prefix when --all-panels writes
    /// one file per panel.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Sharpness parameter of the synthetic family, 1..=3.
    #[arg(long)]
    k: u32,
    /// Mode count of the synthetic family, 1..=10.
    #[arg(long)]
    m: u32,
    /// Sample size per trial.
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "inverse-lebesgue")]
    measure: MeasureKind,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write one summary CSV row.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Decompose(args) => cmd_decompose(args),
        Command::Tde(args) => cmd_tde(args),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}

fn read_input(path: &PathBuf) -> Result<InputData> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    parse_input_csv(&text)
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn samples_only(input: InputData, command: &str) -> Result<Vec<f64>> {
    match input {
        InputData::Samples(s) => Ok(s),
        InputData::Density(_) => Err(Error::InvalidInput(format!(
            "{command} expects sample input (one numeric column)"
        ))),
    }
}

fn parse_bandwidth_list(text: &str) -> Result<BandwidthGrid> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::param("bandwidths", format!("not a number: {s:?}")))
        })
        .collect::<Result<_>>()?;
    BandwidthGrid::new(values)
}

fn tde_config(
    bandwidths: &Option<String>,
    h_min: Option<f64>,
    h_max: Option<f64>,
    count: usize,
    measure: MeasureKind,
    grid: usize,
) -> Result<TdeConfig> {
    Ok(TdeConfig {
        bandwidths: bandwidths.as_deref().map(parse_bandwidth_list).transpose()?,
        bandwidth_count: count,
        bandwidth_range: match (h_min, h_max) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        },
        measure,
        min_profile_cells: grid,
    })
}

fn cmd_decompose(args: DecomposeArgs) -> Result<()> {
    let input = read_input(&args.input)?;
    let f = match (input, args.bandwidth) {
        (InputData::Samples(s), Some(h)) => {
            let grid = Grid::for_sample(&s, h, args.grid)?;
            kde(&s, h, &grid)?
        }
        (InputData::Samples(_), None) => {
            return Err(Error::param(
                "bandwidth",
                "sample input needs --bandwidth (or use the pipeline command)",
            ));
        }
        (InputData::Density(d), None) => {
            let target = Grid::spanning(d.grid().x0, d.grid().x_end(), args.grid)?;
            resample(&d, &target)?.normalize()?
        }
        (InputData::Density(_), Some(_)) => {
            return Err(Error::param(
                "bandwidth",
                "density input is used as given; --bandwidth applies to samples",
            ));
        }
    };
    let report = tme_with_config(&f, &TmeConfig::default())?;
    let doc = MixtureDocument::from_mixture(
        &report.mixture,
        None,
        Provenance::new(
            args.input.display().to_string(),
            args.seed,
            serde_json::json!({
                "command": "decompose",
                "bandwidth": args.bandwidth,
                "grid": args.grid,
            }),
        ),
    );
    if let Some(csv) = &args.csv {
        write_file(csv, &stacked_csv(&report.mixture))?;
    }
    write_out(&args.output, &serde_json::to_string_pretty(&doc).unwrap())
}

#[derive(Serialize)]
struct TdeDocument {
    format: &'static str,
    m_hat: usize,
    h_hat: f64,
    h_minus: f64,
    h_sup: f64,
    blur_budget: f64,
    measure: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<Vec<ProfileEntry>>,
    provenance: Provenance,
}

#[derive(Serialize)]
struct ProfileEntry {
    bandwidth: f64,
    ucat: usize,
}

fn cmd_tde(args: TdeArgs) -> Result<()> {
    let samples = samples_only(read_input(&args.input)?, "tde")?;
    let cfg = tde_config(
        &args.bandwidths,
        args.h_min,
        args.h_max,
        args.bandwidth_count,
        args.measure,
        args.grid,
    )?;
    let run = run_tde(&samples, &cfg)?;
    let profile = args.profile.then(|| {
        eprintln!("{:>14}  {:>6}", "bandwidth", "modes");
        run.profile
            .bandwidths
            .values()
            .iter()
            .zip(&run.profile.ucats)
            .map(|(&h, &u)| {
                eprintln!("{h:>14.6}  {u:>6}");
                ProfileEntry {
                    bandwidth: h,
                    ucat: u,
                }
            })
            .collect()
    });
    let doc = TdeDocument {
        format: DOCUMENT_FORMAT,
        m_hat: run.result.m_hat,
        h_hat: run.result.h_hat,
        h_minus: run.result.h_minus,
        h_sup: run.result.h_sup,
        blur_budget: run.result.blur_budget,
        measure: args.measure.to_string(),
        profile,
        provenance: Provenance::new(
            args.input.display().to_string(),
            args.seed,
            serde_json::json!({
                "command": "tde",
                "measure": args.measure.to_string(),
                "bandwidths": args.bandwidths,
                "h_min": args.h_min,
                "h_max": args.h_max,
                "bandwidth_count": args.bandwidth_count,
                "grid": args.grid,
            }),
        ),
    };
    write_out(&args.output, &serde_json::to_string_pretty(&doc).unwrap())
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    let samples = samples_only(read_input(&args.input)?, "pipeline")?;
    let config = PipelineConfig {
        tde: tde_config(
            &args.bandwidths,
            args.h_min,
            args.h_max,
            args.bandwidth_count,
            args.measure,
            args.grid,
        )?,
        grid_cells: args.grid,
        tme: TmeConfig::default(),
    };
    let provenance = |stage: &str| {
        Provenance::new(
            args.input.display().to_string(),
            args.seed,
            serde_json::json!({
                "command": "pipeline",
                "stage": stage,
                "measure": args.measure.to_string(),
                "bandwidths": args.bandwidths,
                "h_min": args.h_min,
                "h_max": args.h_max,
                "bandwidth_count": args.bandwidth_count,
                "grid": args.grid,
                "all_panels": args.all_panels,
            }),
        )
    };

    if args.all_panels {
        let panels = figure_panels(&samples, &config)?;
        let tde_block = tde_block(&panels.pipeline.tde, panels.pipeline.delta_h, args.measure);
        let docs = serde_json::json!({
            "format": DOCUMENT_FORMAT,
            "sweep_at_h_hat": MixtureDocument::from_mixture(
                &panels.sweep_at_h_hat, Some(tde_block.clone()), provenance("sweep_at_h_hat")),
            "tme_at_h_hat": MixtureDocument::from_mixture(
                &panels.tme_at_h_hat.mixture, Some(tde_block.clone()), provenance("tme_at_h_hat")),
            "deblurred": MixtureDocument::from_mixture(
                &panels.pipeline.deblurred.mixture, Some(tde_block.clone()), provenance("deblurred")),
            "reblurred": MixtureDocument::from_mixture(
                &panels.pipeline.reblurred, Some(tde_block), provenance("reblurred")),
        });
        if let Some(prefix) = &args.csv {
            let base = prefix.display().to_string();
            write_file(&PathBuf::from(format!("{base}.sweep.csv")), &stacked_csv(&panels.sweep_at_h_hat))?;
            write_file(&PathBuf::from(format!("{base}.tme.csv")), &stacked_csv(&panels.tme_at_h_hat.mixture))?;
            write_file(&PathBuf::from(format!("{base}.deblurred.csv")), &stacked_csv(&panels.pipeline.deblurred.mixture))?;
            write_file(&PathBuf::from(format!("{base}.reblurred.csv")), &stacked_csv(&panels.pipeline.reblurred))?;
            write_file(&PathBuf::from(format!("{base}.kde.csv")), &density_csv(&panels.pipeline.kde_at_h_hat))?;
        }
        write_out(&args.output, &serde_json::to_string_pretty(&docs).unwrap())
    } else {
        let out = reblur_tme(&samples, &config)?;
        let doc = MixtureDocument::from_mixture(
            &out.reblurred,
            Some(tde_block(&out.tde, out.delta_h, args.measure)),
            provenance("reblurred"),
        );
        if let Some(csv) = &args.csv {
            write_file(csv, &stacked_csv(&out.reblurred))?;
        }
        write_out(&args.output, &serde_json::to_string_pretty(&doc).unwrap())
    }
}

fn tde_block(r: &topomix::TdeResult, delta_h: f64, measure: MeasureKind) -> TdeBlock {
    TdeBlock {
        m_hat: r.m_hat,
        h_hat: r.h_hat,
        h_minus: r.h_minus,
        h_sup: r.h_sup,
        blur_budget: r.blur_budget,
        delta_h,
        measure: measure.to_string(),
    }
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let spec = FkmSpec::new(args.k, args.m)?;
    let stats = evaluate_recovery(spec, args.n, args.trials, args.measure, args.seed)?;
    if let Some(csv) = &args.csv {
        let hist = |h: &std::collections::BTreeMap<usize, usize>| {
            h.iter()
                .map(|(k, v)| format!("{k}:{v}"))
                .collect::<Vec<_>>()
                .join(";")
        };
        let row = format!(
            "k,m,n,trials,true_ucat,hits,ucat_distribution,lmax_distribution\n{},{},{},{},{},{},{},{}\n",
            spec.k,
            spec.m,
            stats.n,
            stats.trials,
            stats.true_ucat,
            stats.ucat_hits,
            hist(&stats.ucat_distribution),
            hist(&stats.lmax_distribution),
        );
        write_file(csv, &row)?;
    }
    write_out(&args.output, &serde_json::to_string_pretty(&stats).unwrap())
}
