//! Experiment runner: generate snapshot datasets, fit DMD variants,
//! compare methods, and dump singular spectra. Exit codes: 0 success,
//! 2 usage error, 3 data/format error, 4 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use admd::adaptive::{AdmdConfig, FullRankFilter, SketchSpec};
use admd::config::{DatasetSpec, ExperimentConfig, MethodKind, MethodSpec};
use admd::datasets::{DoubleGyreParams, HiddenDynamicsParams, SurrogateParams};
use admd::error::{AdmdError, Result};
use admd::filters::{DftFilterPolicy, RpcaParams};
use admd::{runner, DEFAULT_SEED};

#[derive(Parser)]
#[command(
    name = "admd",
    version,
    about = "Adaptive dynamic mode decomposition experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset into <out>/snapshots.mat + <out>/meta.txt.
    Generate(GenerateArgs),
    /// Fit one method; writes spectrum.csv, errors.csv and report.txt.
    Fit(FitArgs),
    /// Run >= 2 methods from a config file and tabulate compare.csv.
    Compare(CompareArgs),
    /// Write the singular-value spectrum of a stored matrix.
    Spectrum(SpectrumArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Dataset name: hidden_dynamics | double_gyre | surrogate.
    #[arg(long)]
    dataset: Option<String>,
    /// Config file with a [dataset] section.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for seeded generators (default fixed, not entropy).
    #[arg(long)]
    seed: Option<u64>,
    /// Spatial nodes (hidden_dynamics, double_gyre x-axis).
    #[arg(long)]
    nx: Option<usize>,
    /// double_gyre y-axis nodes.
    #[arg(long)]
    ny: Option<usize>,
    /// Snapshot count.
    #[arg(long)]
    nt: Option<usize>,
    /// Time step (double_gyre, surrogate).
    #[arg(long)]
    dt: Option<f64>,
    /// surrogate state dimension.
    #[arg(long)]
    m: Option<usize>,
    /// surrogate snapshot count.
    #[arg(long)]
    n: Option<usize>,
    /// surrogate traveling-wave component count.
    #[arg(long)]
    waves: Option<usize>,
    /// surrogate dense noise level relative to the clean RMS.
    #[arg(long)]
    noise_std: Option<f64>,
    /// surrogate fraction of corrupted entries.
    #[arg(long)]
    outlier_frac: Option<f64>,
    /// surrogate outlier magnitude relative to the clean RMS.
    #[arg(long)]
    outlier_mag: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    /// Snapshot matrix to read.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Config file supplying [input]/[method]/[output]/[run] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Method kind: standard | admd (overrides config).
    #[arg(long)]
    method: Option<String>,
    /// Delay window.
    #[arg(long)]
    q: Option<usize>,
    /// Relative rank threshold.
    #[arg(long)]
    eps_rank: Option<f64>,
    /// Low-rank classification ratio.
    #[arg(long)]
    rho_lowrank: Option<f64>,
    /// Sketch kind: none | gaussian | achlioptas | rowsample.
    #[arg(long)]
    sketch: Option<String>,
    /// Sketch dimension.
    #[arg(long)]
    a: Option<usize>,
    /// Achlioptas sparsity (1 or 3).
    #[arg(long)]
    s: Option<u32>,
    /// Full-rank filter: auto | dft | ialm.
    #[arg(long)]
    filter: Option<String>,
    /// DFT mask threshold relative to the peak coefficient.
    #[arg(long)]
    tau_rel: Option<f64>,
    /// Robust-recovery sparsity weight.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Time step override when no meta.txt sidecar is present.
    #[arg(long)]
    dt: Option<f64>,
    /// Promote flagged non-convergence to exit code 4.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Config file with >= 2 [method] sections.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| AdmdError::Io {
                path: p.clone(),
                source: e,
            })?;
            ExperimentConfig::parse(&text)
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn dataset_from_args(args: &GenerateArgs, cfg: &ExperimentConfig) -> Result<DatasetSpec> {
    let name = match (&args.dataset, &cfg.dataset) {
        (Some(n), _) => n.clone(),
        (None, Some(ds)) => ds.name().to_string(),
        (None, None) => {
            return Err(AdmdError::InvalidParameter(
                "no dataset given: pass --dataset or a config with [dataset]".into(),
            ))
        }
    };
    let mut spec = match name.as_str() {
        "hidden_dynamics" => match &cfg.dataset {
            Some(DatasetSpec::HiddenDynamics(p)) => DatasetSpec::HiddenDynamics(p.clone()),
            _ => DatasetSpec::HiddenDynamics(HiddenDynamicsParams::default()),
        },
        "double_gyre" => match &cfg.dataset {
            Some(DatasetSpec::DoubleGyre(p)) => DatasetSpec::DoubleGyre(p.clone()),
            _ => DatasetSpec::DoubleGyre(DoubleGyreParams::default()),
        },
        "surrogate" => match &cfg.dataset {
            Some(DatasetSpec::Surrogate(p)) => DatasetSpec::Surrogate(p.clone()),
            _ => DatasetSpec::Surrogate(SurrogateParams::default()),
        },
        other => {
            return Err(AdmdError::InvalidParameter(format!(
                "unknown dataset `{other}`"
            )))
        }
    };
    match &mut spec {
        DatasetSpec::HiddenDynamics(p) => {
            if let Some(nx) = args.nx {
                p.nx = nx;
            }
            if let Some(nt) = args.nt {
                p.nt = nt;
            }
        }
        DatasetSpec::DoubleGyre(p) => {
            if let Some(nx) = args.nx {
                p.nx = nx;
            }
            if let Some(ny) = args.ny {
                p.ny = ny;
            }
            if let Some(nt) = args.nt {
                p.nt = nt;
            }
            if let Some(dt) = args.dt {
                p.dt = dt;
            }
        }
        DatasetSpec::Surrogate(p) => {
            if let Some(m) = args.m {
                p.m = m;
            }
            if let Some(n) = args.n {
                p.n = n;
            }
            if let Some(w) = args.waves {
                p.waves = w;
            }
            if let Some(v) = args.noise_std {
                p.noise_std = v;
            }
            if let Some(v) = args.outlier_frac {
                p.outlier_frac = v;
            }
            if let Some(v) = args.outlier_mag {
                p.outlier_mag = v;
            }
            if let Some(dt) = args.dt {
                p.dt = dt;
            }
        }
    }
    Ok(spec)
}

fn method_from_args(args: &FitArgs, cfg: &ExperimentConfig) -> Result<MethodSpec> {
    if args.method.is_none() && !cfg.methods.is_empty() {
        if cfg.methods.len() > 1 {
            return Err(AdmdError::InvalidParameter(
                "fit takes exactly one [method] section; use compare for several".into(),
            ));
        }
        return Ok(cfg.methods[0].clone());
    }
    let kind = args.method.clone().unwrap_or_else(|| "standard".into());
    match kind.as_str() {
        "standard" => Ok(MethodSpec {
            name: "standard".into(),
            kind: MethodKind::Standard {
                eps_rank: args.eps_rank.unwrap_or(admd::dmd::DEFAULT_RANK_EPS),
                q: args.q.unwrap_or(1),
            },
        }),
        "admd" => {
            let mut c = AdmdConfig::default();
            if let Some(e) = args.eps_rank {
                c.eps_rank = e;
            }
            if let Some(r) = args.rho_lowrank {
                c.rho_lowrank = r;
            }
            if let Some(q) = args.q {
                c.q = q;
            }
            let sketch = args.sketch.clone().unwrap_or_else(|| "none".into());
            c.sketch = match sketch.as_str() {
                "none" => SketchSpec::None,
                "gaussian" => SketchSpec::Gaussian {
                    a: args.a.ok_or_else(|| {
                        AdmdError::InvalidParameter("--sketch needs --a".into())
                    })?,
                },
                "achlioptas" => SketchSpec::Achlioptas {
                    a: args.a.ok_or_else(|| {
                        AdmdError::InvalidParameter("--sketch needs --a".into())
                    })?,
                    s: args.s.unwrap_or(3),
                },
                "rowsample" => SketchSpec::RowSample {
                    a: args.a.ok_or_else(|| {
                        AdmdError::InvalidParameter("--sketch needs --a".into())
                    })?,
                },
                other => {
                    return Err(AdmdError::InvalidParameter(format!(
                        "unknown sketch `{other}`"
                    )))
                }
            };
            let filter = args.filter.clone().unwrap_or_else(|| "auto".into());
            c.fullrank_filter = match filter.as_str() {
                "auto" => FullRankFilter::Auto,
                "dft" => FullRankFilter::Dft(match args.tau_rel {
                    Some(t) => DftFilterPolicy::new(t)?,
                    None => DftFilterPolicy::default(),
                }),
                "ialm" => {
                    let mut p = RpcaParams::default();
                    if let Some(l) = args.lambda {
                        p.lambda = l;
                    }
                    FullRankFilter::Ialm(p)
                }
                other => {
                    return Err(AdmdError::InvalidParameter(format!(
                        "unknown filter `{other}`"
                    )))
                }
            };
            Ok(MethodSpec {
                name: "admd".into(),
                kind: MethodKind::Adaptive(c),
            })
        }
        other => Err(AdmdError::InvalidParameter(format!(
            "unknown method `{other}`"
        ))),
    }
}

fn effective_seed(flag: Option<u64>, cfg: &ExperimentConfig) -> u64 {
    flag.or(cfg.seed).unwrap_or(DEFAULT_SEED)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let cfg = load_config(&args.config)?;
            let ds = dataset_from_args(&args, &cfg)?;
            let seed = effective_seed(args.seed, &cfg);
            let out = cfg
                .output_dir
                .as_ref()
                .map(PathBuf::from)
                .filter(|_| args.out == PathBuf::from("."))
                .unwrap_or(args.out.clone());
            let (mat, meta) = runner::cmd_generate(&ds, &out, seed)?;
            println!("wrote {} and {}", mat.display(), meta.display());
            Ok(())
        }
        Command::Fit(args) => {
            let cfg = load_config(&args.config)?;
            let method = method_from_args(&args, &cfg)?;
            let seed = effective_seed(args.seed, &cfg);
            let strict = args.strict || cfg.strict.unwrap_or(false);
            let input = args
                .input
                .clone()
                .or_else(|| cfg.input.as_ref().map(PathBuf::from))
                .ok_or_else(|| {
                    AdmdError::InvalidParameter(
                        "no input given: pass --input or a config with [input]".into(),
                    )
                })?;
            let out = cfg
                .output_dir
                .as_ref()
                .map(PathBuf::from)
                .filter(|_| args.out == PathBuf::from("."))
                .unwrap_or(args.out.clone());
            let artifacts = runner::cmd_fit(&input, &method, &out, seed, strict, args.dt)?;
            println!(
                "method={} branch={} rank={} measurements={} max_error={} final_error={}",
                artifacts.outcome.label,
                artifacts.outcome.branch,
                artifacts.outcome.rank,
                artifacts.outcome.measurements_used,
                artifacts
                    .outcome
                    .max_error()
                    .map(|e| format!("{e:.3e}"))
                    .unwrap_or_else(|| "undefined".into()),
                artifacts
                    .outcome
                    .final_error()
                    .map(|e| format!("{e:.3e}"))
                    .unwrap_or_else(|| "undefined".into()),
            );
            Ok(())
        }
        Command::Compare(args) => {
            let cfg = load_config(&Some(args.config.clone()))?;
            let seed = effective_seed(args.seed, &cfg);
            let strict = args.strict || cfg.strict.unwrap_or(false);
            let input = args
                .input
                .clone()
                .or_else(|| cfg.input.as_ref().map(PathBuf::from))
                .ok_or_else(|| {
                    AdmdError::InvalidParameter(
                        "no input given: pass --input or a config with [input]".into(),
                    )
                })?;
            let out = cfg
                .output_dir
                .as_ref()
                .map(PathBuf::from)
                .filter(|_| args.out == PathBuf::from("."))
                .unwrap_or(args.out.clone());
            let (path, outcomes) =
                runner::cmd_compare(&input, &cfg.methods, &out, seed, strict, args.dt)?;
            for o in &outcomes {
                println!(
                    "{}: rank={} measurements={} final_error={}",
                    o.label,
                    o.rank,
                    o.measurements_used,
                    o.final_error()
                        .map(|e| format!("{e:.3e}"))
                        .unwrap_or_else(|| "undefined".into())
                );
            }
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Spectrum(args) => {
            let path = runner::cmd_spectrum(&args.input, &args.out)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
