use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nnpca_core::experiments::{self, Command, ExperimentConfig};
use nnpca_core::Error;

#[derive(Parser)]
#[command(
    name = "nnpca",
    version,
    about = "Non-negative PCA: predictions, simulations and worst cases"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Asymptotic predictions over a beta grid
    Predict(Opts),
    /// Monte Carlo runs of AMP and classical PCA against the predictions
    Simulate(Opts),
    /// Empirical minus predicted overlap over a (beta, eps) grid
    Sweep(Opts),
    /// Least-favorable sparsity and minimax overlap
    Worstcase(Opts),
}

#[derive(Args, Default)]
struct Opts {
    /// File of key=value lines; command line flags take precedence
    #[arg(long, value_name = "FILE")]
    config: Option<String>,
    /// sym or rec (rec is implied by --alpha or --p)
    #[arg(long)]
    model: Option<String>,
    /// Discrete prior "v1:w1,v2:w2,...", rescaled to unit second moment
    #[arg(long)]
    prior: Option<String>,
    /// Comma-separated sparsities of the two-point prior
    #[arg(long)]
    eps: Option<String>,
    /// Comma-separated signal strengths
    #[arg(long)]
    beta: Option<String>,
    /// Signal strengths as start:stop:step
    #[arg(long)]
    beta_grid: Option<String>,
    /// Aspect ratio p/n of the rectangular model
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    p: Option<String>,
    /// Upper end of the sparsity range for worstcase
    #[arg(long)]
    eps_bar: Option<String>,
    /// AMP iterations
    #[arg(long)]
    t_max: Option<String>,
    /// Early-stopping tolerance for AMP (0 = always run t-max iterations)
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Lanczos steps for the spectral baseline
    #[arg(long)]
    lanczos_steps: Option<String>,
    /// Left signal of the rectangular model: sphere or constant
    #[arg(long)]
    u0: Option<String>,
    /// Omit the generation time and wall-clock columns
    #[arg(long)]
    no_timestamp: bool,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Output file (default stdout)
    #[arg(long)]
    out: Option<String>,
}

impl Opts {
    fn flags(&self) -> Vec<(&'static str, Option<&String>)> {
        vec![
            ("model", self.model.as_ref()),
            ("prior", self.prior.as_ref()),
            ("eps", self.eps.as_ref()),
            ("beta", self.beta.as_ref()),
            ("beta-grid", self.beta_grid.as_ref()),
            ("alpha", self.alpha.as_ref()),
            ("n", self.n.as_ref()),
            ("p", self.p.as_ref()),
            ("eps-bar", self.eps_bar.as_ref()),
            ("t-max", self.t_max.as_ref()),
            ("tol", self.tol.as_ref()),
            ("replicates", self.replicates.as_ref()),
            ("seed", self.seed.as_ref()),
            ("lanczos-steps", self.lanczos_steps.as_ref()),
            ("u0", self.u0.as_ref()),
            ("format", self.format.as_ref()),
            ("threads", self.threads.as_ref()),
            ("out", self.out.as_ref()),
        ]
    }

    fn settings(&self) -> Result<BTreeMap<String, String>, Error> {
        let mut map = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{path}: {e}")))?;
                experiments::parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in self.flags() {
            if let Some(v) = v {
                // an explicit flag replaces whichever of the pair the file set
                match k {
                    "beta" => drop(map.remove("beta-grid")),
                    "beta-grid" => drop(map.remove("beta")),
                    "eps" => drop(map.remove("prior")),
                    "prior" => drop(map.remove("eps")),
                    _ => {}
                }
                map.insert(k.to_string(), v.clone());
            }
        }
        if self.no_timestamp {
            map.insert("no-timestamp".into(), "true".into());
        }
        Ok(map)
    }
}

fn execute(command: Command, opts: &Opts) -> Result<(), Error> {
    let cfg = ExperimentConfig::from_settings(command, &opts.settings()?)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    let text = pool.install(|| experiments::run(&cfg))?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match &cli.command {
        Cmd::Predict(o) => (Command::Predict, o),
        Cmd::Simulate(o) => (Command::Simulate, o),
        Cmd::Sweep(o) => (Command::Sweep, o),
        Cmd::Worstcase(o) => (Command::Worstcase, o),
    };
    match execute(command, opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nnpca {}: {e}", command.name());
            ExitCode::from(experiments::exit_code(&e) as u8)
        }
    }
}
