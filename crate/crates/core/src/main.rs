use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cvtele::cli::{
    self, BoundSelect, Command, DistributionSpec, Format, OptimizeFamily, RunConfig, ValueOrGrid,
};
use cvtele::optimizer::{mu_for_effective_modes, Coding, GridScale, GridSpec};

/// Capacity bounds of teleportation channels with multiplexed EPR resources.
#[derive(Parser)]
#[command(name = "cvtele", version)]
struct Cli {
    /// TOML or JSON file mirroring the run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-mode and total bounds of a squeezing distribution.
    Bounds(Flags),
    /// Bounds against mean photon number.
    SweepEnergy(Flags),
    /// Bounds against transmissivity.
    SweepLoss(Flags),
    /// Best flat or PDC coding at fixed energy.
    Optimize(Flags),
    /// Zero-capacity photon numbers of single-mode coding.
    Thresholds(Flags),
    /// Convergence and flat-optimality self-checks.
    Verify(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Pdc,
    Flat,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum CodingArg {
    Single,
    Flat,
    Pdc,
    FlatOptimal,
    PdcOptimal,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Linear,
    Log,
}

#[derive(Args, Default)]
struct Flags {
    /// Distribution family for `bounds`, or the family searched by `optimize`.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Mode number (flat) or effective mode number (pdc).
    #[arg(long = "K")]
    k: Option<f64>,
    /// Squeezing per mode (flat) or comma-separated amplitudes (custom).
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    /// PDC gain.
    #[arg(long = "B")]
    gain: Option<f64>,
    /// PDC decay constant.
    #[arg(long)]
    mu: Option<f64>,
    /// Number of PDC modes kept; truncated at the cutoff when absent.
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "n-ph")]
    n_ph: Option<f64>,
    /// Start of the swept variable.
    #[arg(long)]
    start: Option<f64>,
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
    /// Coding used by the sweeps.
    #[arg(long, value_enum)]
    coding: Option<CodingArg>,
    /// QG, QA, QE or all.
    #[arg(long)]
    bound: Option<BoundSelect>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random perturbation trials run by `verify`.
    #[arg(long)]
    trials: Option<usize>,
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("cvtele: {msg}");
    ExitCode::from(2)
}

fn grid_from(flags: &Flags, base: Option<ValueOrGrid>) -> Result<Option<ValueOrGrid>, String> {
    let base_grid = match base {
        Some(ValueOrGrid::Grid(g)) => Some(g),
        _ => None,
    };
    if flags.start.is_none() && flags.stop.is_none() && flags.steps.is_none() && flags.scale.is_none() {
        return Ok(base_grid.map(ValueOrGrid::Grid));
    }
    let pick = |flag: Option<f64>, from: Option<f64>, name: &str| {
        flag.or(from).ok_or_else(|| format!("grid needs --{name}"))
    };
    Ok(Some(ValueOrGrid::Grid(GridSpec {
        start: pick(flags.start, base_grid.map(|g| g.start), "start")?,
        stop: pick(flags.stop, base_grid.map(|g| g.stop), "stop")?,
        steps: flags
            .steps
            .or(base_grid.map(|g| g.steps))
            .ok_or("grid needs --steps")?,
        scale: match flags.scale {
            Some(ScaleArg::Linear) => GridScale::Linear,
            Some(ScaleArg::Log) => GridScale::Log,
            None => base_grid.map_or(GridScale::Linear, |g| g.scale),
        },
    })))
}

fn integer_k(k: f64) -> Result<usize, String> {
    if k >= 1.0 && k.fract() == 0.0 {
        Ok(k as usize)
    } else {
        Err(format!("--K must be a positive integer for flat codings, got {k}"))
    }
}

fn apply(cfg: &mut RunConfig, f: &Flags) -> Result<(), String> {
    if let Some(eta) = f.eta {
        cfg.eta = ValueOrGrid::Value(eta);
    }
    if let Some(n) = f.n_ph {
        cfg.n_ph = Some(ValueOrGrid::Value(n));
    }
    match cfg.command {
        Command::SweepEnergy => {
            if let Some(g) = grid_from(f, cfg.n_ph)? {
                cfg.n_ph = Some(g);
            }
        }
        Command::SweepLoss => {
            if let Some(g) = grid_from(f, Some(cfg.eta))? {
                cfg.eta = g;
            }
        }
        _ => {}
    }
    if let Some(b) = f.bound {
        cfg.bound = b;
    }
    if let Some(family) = f.family {
        match cfg.command {
            Command::Optimize => {
                cfg.optimize_family = match family {
                    FamilyArg::Flat => OptimizeFamily::Flat,
                    FamilyArg::Pdc => OptimizeFamily::Pdc,
                    FamilyArg::Custom => return Err("optimize searches flat or pdc families".into()),
                }
            }
            _ => {
                cfg.distribution = Some(match family {
                    FamilyArg::Flat => DistributionSpec::Flat {
                        modes: integer_k(f.k.unwrap_or(1.0))?,
                        r: match f.r.as_deref() {
                            Some([r]) => *r,
                            _ => return Err("flat family needs a single --r".into()),
                        },
                    },
                    FamilyArg::Pdc => DistributionSpec::Pdc {
                        gain: f.gain.ok_or("pdc family needs --B")?,
                        mu: match (f.mu, f.k) {
                            (Some(mu), _) => mu,
                            (None, Some(k)) => mu_for_effective_modes(k).map_err(|e| e.to_string())?,
                            (None, None) => return Err("pdc family needs --mu or --K".into()),
                        },
                        modes: f.modes,
                    },
                    FamilyArg::Custom => DistributionSpec::Custom {
                        r: f.r.clone().ok_or("custom family needs --r r0,r1,...")?,
                    },
                });
            }
        }
    }
    if let Some(c) = f.coding {
        cfg.coding = match c {
            CodingArg::Single => Coding::Single,
            CodingArg::Flat => Coding::Flat { modes: integer_k(f.k.ok_or("flat coding needs --K")?)? },
            CodingArg::Pdc => Coding::Pdc {
                mu: match (f.mu, f.k) {
                    (Some(mu), _) => mu,
                    (None, Some(k)) => mu_for_effective_modes(k).map_err(|e| e.to_string())?,
                    (None, None) => return Err("pdc coding needs --mu or --K".into()),
                },
            },
            CodingArg::FlatOptimal => Coding::FlatOptimal,
            CodingArg::PdcOptimal => Coding::PdcOptimal,
        };
    }
    if let Some(path) = &f.output {
        cfg.output.path = Some(path.clone());
    }
    if let Some(fmt) = f.format {
        cfg.output.format = match fmt {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(seed) = f.seed {
        cfg.seed = seed;
    }
    if let Some(t) = f.trials {
        cfg.trials = t;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let base = match &cli.config {
        Some(path) => match RunConfig::from_file(path) {
            Ok(cfg) => Some(cfg),
            Err(e) => {
                eprintln!("cvtele: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        },
        None => None,
    };
    let (command, flags) = match cli.command {
        Some(Cmd::Bounds(f)) => (Command::Bounds, f),
        Some(Cmd::SweepEnergy(f)) => (Command::SweepEnergy, f),
        Some(Cmd::SweepLoss(f)) => (Command::SweepLoss, f),
        Some(Cmd::Optimize(f)) => (Command::Optimize, f),
        Some(Cmd::Thresholds(f)) => (Command::Thresholds, f),
        Some(Cmd::Verify(f)) => (Command::Verify, f),
        None => match &base {
            Some(cfg) => (cfg.command, Flags::default()),
            None => return usage("give a subcommand or --config"),
        },
    };
    let mut cfg = base.unwrap_or_else(|| RunConfig::new(command));
    cfg.command = command;
    if let Err(msg) = apply(&mut cfg, &flags) {
        return usage(&msg);
    }
    ExitCode::from(cli::run(&cfg) as u8)
}
