//! Argument grammar, the optional JSON config file, and their resolution
//! into a [`RunConfig`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use onecopy_core::{
    geometric_grid, MethodPair, ModelSpec, Preset, Quantity, ReportOptions, DEFAULT_ABS_TOL,
};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_PER_OCTAVE: usize = 2;
pub const DEFAULT_CHECK_L: usize = 256;

#[derive(Debug, Parser)]
#[command(name = "onecopy", version, about = "Single-copy entanglement of quadratic fermion chains")]
pub struct Cli {
    /// JSON file whose keys mirror the long flags; flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entanglement report for one block length.
    Analyze(AnalyzeArgs),
    /// Report rows over a geometric grid of block lengths.
    Scan(ScanArgs),
    /// Scan, then fit quantities against log₂ L.
    Fit(FitArgs),
    /// Compare the Gaussian finite-chain spectrum with a second method.
    Oracle(OracleArgs),
    /// Built-in consistency checks; exit 3 on failure.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Xx,
    Xy,
    Ising,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// `A_0,A_1,...` for `--model custom`.
    #[arg(long = "A", value_delimiter = ',', allow_hyphen_values = true, value_name = "V,...")]
    pub a_table: Option<Vec<f64>>,
    /// `B_1,B_2,...` for `--model custom`.
    #[arg(long = "B", value_delimiter = ',', allow_hyphen_values = true, value_name = "V,...")]
    pub b_table: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output path, or `json`/`csv` to select the format on stdout.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Absolute tolerance for the Fourier coefficients.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long = "L-min")]
    pub l_min: Option<usize>,
    #[arg(long = "L-max")]
    pub l_max: Option<usize>,
    #[arg(long = "per-octave")]
    pub per_octave: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "L")]
    pub block_len: Option<usize>,
    #[arg(long = "with-ep")]
    pub with_ep: bool,
    #[arg(long = "with-sectors")]
    pub with_sectors: bool,
    #[arg(long = "ep-dims")]
    pub ep_dims: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Quantities to fit; defaults to `e1_cont_bits,entropy_bits`.
    #[arg(long, value_delimiter = ',')]
    pub quantity: Option<Vec<String>>,
    /// Restrict the fit to `L_lo,L_hi`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub window: Option<Vec<usize>>,
    /// Also run the top-octave saturation test with this spread.
    #[arg(long = "saturation-eps")]
    pub saturation_eps: Option<f64>,
    #[arg(long = "fisher-hartwig")]
    pub fisher_hartwig: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Chain length.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "L")]
    pub block_len: Option<usize>,
    /// `gaussian-vs-ed` or `gaussian-vs-thermodynamic`.
    #[arg(long)]
    pub method: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub integral: bool,
    #[arg(long)]
    pub oracle: bool,
    #[arg(long = "bound-chain")]
    pub bound_chain: bool,
    /// Model for `--bound-chain`; defaults to `xx` with `a = 2`.
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "L")]
    pub block_len: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Keys of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub model: Option<ModelKind>,
    pub a: Option<f64>,
    pub gamma: Option<f64>,
    #[serde(rename = "A")]
    pub a_table: Option<Vec<f64>>,
    #[serde(rename = "B")]
    pub b_table: Option<Vec<f64>>,
    #[serde(rename = "L")]
    pub block_len: Option<usize>,
    #[serde(rename = "L-min")]
    pub l_min: Option<usize>,
    #[serde(rename = "L-max")]
    pub l_max: Option<usize>,
    pub per_octave: Option<usize>,
    pub with_ep: Option<bool>,
    pub with_sectors: Option<bool>,
    pub ep_dims: Option<usize>,
    pub n: Option<usize>,
    pub method: Option<String>,
    pub quantity: Option<Vec<String>>,
    pub window: Option<Vec<usize>>,
    pub saturation_eps: Option<f64>,
    pub fisher_hartwig: Option<bool>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
    pub out: Option<String>,
    pub format: Option<Format>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Integral,
    Oracle,
    BoundChain,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Analyze {
        model: ModelSpec,
        block_len: usize,
        options: ReportOptions,
    },
    Scan {
        model: ModelSpec,
        grid: Vec<usize>,
        tol: f64,
    },
    Fit {
        model: ModelSpec,
        grid: Vec<usize>,
        tol: f64,
        quantities: Vec<Quantity>,
        window: (usize, usize),
        saturation_eps: Option<f64>,
        fisher_hartwig: bool,
    },
    Oracle {
        model: ModelSpec,
        n: usize,
        block_len: usize,
        pair: MethodPair,
    },
    Check {
        checks: Vec<CheckKind>,
        model: ModelSpec,
        block_len: usize,
        tol: f64,
    },
}

/// Fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub format: Format,
    pub destination: Destination,
    pub threads: Option<usize>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn resolve_model(m: &ModelArgs, cfg: &ConfigFile, fallback: Option<Preset>) -> Result<ModelSpec, CliError> {
    let kind = m.model.or(cfg.model);
    let a = m.a.or(cfg.a);
    let gamma = m.gamma.or(cfg.gamma);
    let a_table = m.a_table.clone().or_else(|| cfg.a_table.clone());
    let b_table = m.b_table.clone().or_else(|| cfg.b_table.clone());
    let preset = match kind {
        None => match fallback {
            Some(p) if a.is_none() && gamma.is_none() && a_table.is_none() && b_table.is_none() => p,
            Some(_) => return Err(usage("model parameters given without --model")),
            None => return Err(usage("--model is required")),
        },
        Some(kind) => {
            if kind != ModelKind::Custom && (a_table.is_some() || b_table.is_some()) {
                return Err(usage("--A/--B only apply to --model custom"));
            }
            match kind {
                ModelKind::Xx => {
                    if gamma.is_some() {
                        return Err(usage("--gamma does not apply to --model xx"));
                    }
                    Preset::Xx {
                        a: a.ok_or_else(|| usage("--model xx needs --a"))?,
                    }
                }
                ModelKind::Xy => Preset::Xy {
                    a: a.ok_or_else(|| usage("--model xy needs --a"))?,
                    gamma: gamma.ok_or_else(|| usage("--model xy needs --gamma"))?,
                },
                ModelKind::Ising => {
                    if a.is_some() || gamma.is_some() {
                        return Err(usage("--model ising takes no parameters"));
                    }
                    Preset::Ising
                }
                ModelKind::Custom => {
                    if a.is_some() || gamma.is_some() {
                        return Err(usage("--model custom takes --A/--B, not --a/--gamma"));
                    }
                    Preset::Custom {
                        a: a_table.ok_or_else(|| usage("--model custom needs --A"))?,
                        b: b_table.unwrap_or_default(),
                    }
                }
            }
        }
    };
    ModelSpec::build(preset).map_err(|e| usage(e.to_string()))
}

fn resolve_grid(g: &GridArgs, cfg: &ConfigFile) -> Result<Vec<usize>, CliError> {
    let l_min = g.l_min.or(cfg.l_min).ok_or_else(|| usage("--L-min is required"))?;
    let l_max = g.l_max.or(cfg.l_max).ok_or_else(|| usage("--L-max is required"))?;
    let per_octave = g.per_octave.or(cfg.per_octave).unwrap_or(DEFAULT_PER_OCTAVE);
    if l_min > l_max {
        return Err(usage(format!("--L-min {l_min} exceeds --L-max {l_max}")));
    }
    let grid = geometric_grid(l_min, l_max, per_octave).map_err(|e| usage(e.to_string()))?;
    if grid.len() < 2 {
        return Err(usage("grid needs at least two points"));
    }
    Ok(grid)
}

fn resolve_tol(o: &OutputArgs, cfg: &ConfigFile) -> Result<f64, CliError> {
    let tol = o.tol.or(cfg.tol).unwrap_or(DEFAULT_ABS_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(usage("--tol must be positive"));
    }
    Ok(tol)
}

fn resolve_output(o: &OutputArgs, cfg: &ConfigFile, csv_allowed: bool) -> Result<(Format, Destination), CliError> {
    let out = o.out.clone().or_else(|| cfg.out.clone());
    let flag = o.format.or(cfg.format);
    let (format, destination) = match out.as_deref() {
        Some("json") | Some("csv") => {
            let named = if out.as_deref() == Some("json") { Format::Json } else { Format::Csv };
            if flag.is_some_and(|f| f != named) {
                return Err(usage("--out and --format disagree"));
            }
            (named, Destination::Stdout)
        }
        Some("-") | None => (flag.unwrap_or(Format::Json), Destination::Stdout),
        Some(path) => (flag.unwrap_or(Format::Json), Destination::File(PathBuf::from(path))),
    };
    if format == Format::Csv && !csv_allowed {
        return Err(usage("CSV output is only available for scan"));
    }
    Ok((format, destination))
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| usage(format!("{flag} is required")))
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let cfg = match &cli.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let (task, output, csv_allowed) = match &cli.command {
            Command::Analyze(args) => {
                let model = resolve_model(&args.model, &cfg, None)?;
                let block_len = required(args.block_len.or(cfg.block_len), "--L")?;
                let defaults = ReportOptions::default();
                let options = ReportOptions {
                    with_ep: args.with_ep || cfg.with_ep.unwrap_or(false),
                    with_sectors: args.with_sectors || cfg.with_sectors.unwrap_or(false),
                    ep_dims: args.ep_dims.or(cfg.ep_dims).unwrap_or(defaults.ep_dims),
                    abs_tol: resolve_tol(&args.output, &cfg)?,
                    ..defaults
                };
                if block_len == 0 || options.ep_dims == 0 {
                    return Err(usage("--L and --ep-dims must be positive"));
                }
                (
                    Task::Analyze {
                        model,
                        block_len,
                        options,
                    },
                    &args.output,
                    false,
                )
            }
            Command::Scan(args) => (
                Task::Scan {
                    model: resolve_model(&args.model, &cfg, None)?,
                    grid: resolve_grid(&args.grid, &cfg)?,
                    tol: resolve_tol(&args.output, &cfg)?,
                },
                &args.output,
                true,
            ),
            Command::Fit(args) => {
                let grid = resolve_grid(&args.grid, &cfg)?;
                let names = args
                    .quantity
                    .clone()
                    .or_else(|| cfg.quantity.clone())
                    .unwrap_or_else(|| vec!["e1_cont_bits".into(), "entropy_bits".into()]);
                let quantities = names
                    .iter()
                    .map(|s| s.parse::<Quantity>().map_err(|e| usage(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?;
                let window = match args.window.clone().or_else(|| cfg.window.clone()) {
                    None => (grid[0], *grid.last().unwrap()),
                    Some(w) if w.len() == 2 && w[0] <= w[1] => (w[0], w[1]),
                    Some(_) => return Err(usage("--window takes L_lo,L_hi with L_lo <= L_hi")),
                };
                let saturation_eps = args.saturation_eps.or(cfg.saturation_eps);
                if saturation_eps.is_some_and(|e| !(e > 0.0)) {
                    return Err(usage("--saturation-eps must be positive"));
                }
                (
                    Task::Fit {
                        model: resolve_model(&args.model, &cfg, None)?,
                        tol: resolve_tol(&args.output, &cfg)?,
                        grid,
                        quantities,
                        window,
                        saturation_eps,
                        fisher_hartwig: args.fisher_hartwig || cfg.fisher_hartwig.unwrap_or(false),
                    },
                    &args.output,
                    false,
                )
            }
            Command::Oracle(args) => {
                let method = args.method.clone().or_else(|| cfg.method.clone());
                let pair = match method {
                    None => MethodPair::GaussianVsEd,
                    Some(s) => s.parse().map_err(|e: onecopy_core::Error| usage(e.to_string()))?,
                };
                (
                    Task::Oracle {
                        model: resolve_model(&args.model, &cfg, None)?,
                        n: required(args.n.or(cfg.n), "--n")?,
                        block_len: required(args.block_len.or(cfg.block_len), "--L")?,
                        pair,
                    },
                    &args.output,
                    false,
                )
            }
            Command::Check(args) => {
                let mut checks = Vec::new();
                if args.integral {
                    checks.push(CheckKind::Integral);
                }
                if args.oracle {
                    checks.push(CheckKind::Oracle);
                }
                if args.bound_chain {
                    checks.push(CheckKind::BoundChain);
                }
                if checks.is_empty() {
                    checks = vec![CheckKind::Integral, CheckKind::Oracle, CheckKind::BoundChain];
                }
                (
                    Task::Check {
                        checks,
                        model: resolve_model(&args.model, &cfg, Some(Preset::Xx { a: 2.0 }))?,
                        block_len: args.block_len.or(cfg.block_len).unwrap_or(DEFAULT_CHECK_L),
                        tol: resolve_tol(&args.output, &cfg)?,
                    },
                    &args.output,
                    false,
                )
            }
        };
        let (format, destination) = resolve_output(output, &cfg, csv_allowed)?;
        let threads = output.threads.or(cfg.threads);
        if threads == Some(0) {
            return Err(usage("--threads must be at least 1"));
        }
        Ok(RunConfig {
            task,
            format,
            destination,
            threads,
        })
    }
}
