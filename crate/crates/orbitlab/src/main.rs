//! Command-line front end: one subcommand per experiment, a flat config
//! file for reproducible runs, flags overriding config values.
//!
//! Exit codes: 0 on pass, 2 when an experiment's own acceptance check
//! fails, 1 on error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use orbitlab::config::Config;
use orbitlab::harness::{run_experiment, ExperimentOutcome, OutputFormat};

#[derive(Parser)]
#[command(
    name = "orbitlab",
    about = "Saddle return maps, periodic-orbit censuses, and polynomial-map hyperbolicity at desk scale"
)]
struct Cli {
    /// Flat key-value config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for everything randomized.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for result files and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Which primary artifact to echo to stdout.
    #[arg(long, global = true, value_parser = ["csv", "json"], default_value = "json")]
    format: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ModelFlags {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
}

impl ModelFlags {
    fn apply(&self, cfg: &mut Config) {
        let pairs = [
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("c", self.c),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, &format!("{v:?}"));
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Grid distances between the rescaled return map and its limit family.
    Renorm {
        #[command(flatten)]
        model: ModelFlags,
        /// Tangency order.
        #[arg(long)]
        k: Option<usize>,
        /// Limit coefficients, comma-separated.
        #[arg(long, short = 'M', allow_hyphen_values = true)]
        m: Option<String>,
        #[arg(long)]
        n_min: Option<u32>,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        grid_step: Option<f64>,
        /// Highest difference order (0..=2).
        #[arg(long)]
        r: Option<u8>,
    },
    /// Periodic-point counts, zeta partial sums, and the growth rate.
    Census {
        /// Map kind: model | limit | poly1d.
        #[arg(long)]
        map: Option<String>,
        /// Inline coefficients for poly1d, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Option<String>,
        /// Limit coefficients for map = limit.
        #[arg(long, short = 'M', allow_hyphen_values = true)]
        m: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n_max: Option<u32>,
        /// Search box half-width.
        #[arg(long = "box")]
        box_half: Option<f64>,
        #[arg(long)]
        seed_grid: Option<usize>,
    },
    /// Tower index selection and gap ratios.
    Tower {
        #[command(flatten)]
        model: ModelFlags,
        /// Number of floors.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n1: Option<u32>,
        /// Shrinking order the ratios are measured against.
        #[arg(long)]
        r: Option<f64>,
    },
    /// Higher-order tangency Newton solve.
    Tangency {
        #[command(flatten)]
        model: ModelFlags,
        /// Tangency order.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        max_newton: Option<usize>,
    },
    /// Monte-Carlo hyperbolicity margins for random polynomial maps.
    Polymap {
        #[arg(long = "N")]
        n_dim: Option<usize>,
        #[arg(long = "D")]
        degree: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        margin_tol: Option<f64>,
        /// Deliberate witness coefficients, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        plant: Option<String>,
    },
    /// Degenerate-orbit splitting cascade stage.
    Cascade {
        #[arg(long)]
        n1: Option<u32>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        /// Target sequence preset: nn | 2n | list.
        #[arg(long)]
        a_preset: Option<String>,
        /// Target values for the list preset, comma-separated.
        #[arg(long)]
        a_list: Option<String>,
    },
}

fn set_opt<T: std::fmt::Display>(cfg: &mut Config, key: &str, value: Option<T>) {
    if let Some(v) = value {
        cfg.set(key, &v.to_string());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("experiment `{}` reported a failed check", outcome.experiment);
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> orbitlab::Result<ExperimentOutcome> {
    let mut cfg = match &cli.config {
        Some(path) => Config::from_file(path)?,
        None => Config::new(),
    };
    let name = match &cli.command {
        Command::Renorm {
            model,
            k,
            m,
            n_min,
            n_max,
            grid_step,
            r,
        } => {
            model.apply(&mut cfg);
            set_opt(&mut cfg, "k", *k);
            set_opt(&mut cfg, "m", m.clone());
            set_opt(&mut cfg, "n_min", *n_min);
            set_opt(&mut cfg, "n_max", *n_max);
            set_opt(&mut cfg, "grid_step", *grid_step);
            set_opt(&mut cfg, "r", *r);
            "renorm"
        }
        Command::Census {
            map,
            coeffs,
            m,
            k,
            n_max,
            box_half,
            seed_grid,
        } => {
            set_opt(&mut cfg, "map", map.clone());
            set_opt(&mut cfg, "coeffs", coeffs.clone());
            set_opt(&mut cfg, "m", m.clone());
            set_opt(&mut cfg, "k", *k);
            set_opt(&mut cfg, "n_max", *n_max);
            set_opt(&mut cfg, "box", *box_half);
            set_opt(&mut cfg, "seed_grid", *seed_grid);
            "census"
        }
        Command::Tower { model, k, n1, r } => {
            model.apply(&mut cfg);
            set_opt(&mut cfg, "floors", *k);
            set_opt(&mut cfg, "n1", *n1);
            set_opt(&mut cfg, "r", *r);
            "tower"
        }
        Command::Tangency {
            model,
            k,
            n,
            max_newton,
        } => {
            model.apply(&mut cfg);
            set_opt(&mut cfg, "k", *k);
            set_opt(&mut cfg, "n", *n);
            set_opt(&mut cfg, "max_newton", *max_newton);
            "tangency"
        }
        Command::Polymap {
            n_dim,
            degree,
            k_max,
            samples,
            margin_tol,
            plant,
        } => {
            set_opt(&mut cfg, "n_dim", *n_dim);
            set_opt(&mut cfg, "degree", *degree);
            set_opt(&mut cfg, "k_max", *k_max);
            set_opt(&mut cfg, "samples", *samples);
            set_opt(&mut cfg, "margin_tol", *margin_tol);
            set_opt(&mut cfg, "plant", plant.clone());
            "polymap"
        }
        Command::Cascade {
            n1,
            k,
            epsilon,
            eta,
            a_preset,
            a_list,
        } => {
            set_opt(&mut cfg, "n1", *n1);
            set_opt(&mut cfg, "k", *k);
            set_opt(&mut cfg, "epsilon", *epsilon);
            set_opt(&mut cfg, "eta", *eta);
            set_opt(&mut cfg, "a_preset", a_preset.clone());
            set_opt(&mut cfg, "a_list", a_list.clone());
            "cascade"
        }
    };
    if let Some(seed) = cli.seed {
        cfg.set("seed", &seed.to_string());
    }
    let seed = cfg.u64_or("seed", 0)?;
    let format = if cli.format == "csv" {
        OutputFormat::Csv
    } else {
        OutputFormat::Json
    };
    let outcome = run_experiment(name, &cfg, seed, &cli.out)?;
    let primary = match format {
        OutputFormat::Csv => outcome.primary_csv.as_ref().or(outcome.primary_json.as_ref()),
        OutputFormat::Json => outcome.primary_json.as_ref().or(outcome.primary_csv.as_ref()),
    };
    if let Some(rel) = primary {
        let path = cli.out.join(rel);
        if let Ok(contents) = std::fs::read_to_string(&path) {
            print!("{contents}");
        }
    }
    Ok(outcome)
}
