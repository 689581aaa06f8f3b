//! `depord`: compare finite models in the conditional convex order and
//! compute ccx-monotone dependence measures.

mod commands;
mod source;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "depord",
    version,
    about = "Conditional convex order and dependence measures for finite models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (defaults to DEPORD_THREADS, then the number of cores).
    #[arg(long, global = true, env = "DEPORD_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Absolute tolerance for order comparisons.
    #[arg(long, default_value_t = depord::DEFAULT_TOL)]
    pub tol: f64,

    /// Predictor cells for sampled or Gaussian sources.
    #[arg(long)]
    pub grid: Option<usize>,

    /// Y levels: atom cap for samples, level count for Gaussian and additive models.
    #[arg(long)]
    pub levels: Option<usize>,

    /// Seed for Monte Carlo discretisation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Discretise Gaussian sources from this many draws instead of exactly.
    #[arg(long)]
    pub mc_samples: Option<usize>,

    /// Output format; JSON everywhere except plotdata, which defaults to CSV.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Schur,
    Concordance,
    Brute,
    All,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureName {
    Xi,
    XiPhi,
    LambdaPhi,
    Nu,
    RhoRearranged,
    TauRearranged,
    GammaRearranged,
    All,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compare two models: is A below B in the conditional convex order?
    Compare {
        a: String,
        b: String,
        #[arg(long, value_enum, default_value_t = Engine::Schur)]
        engine: Engine,
        #[command(flatten)]
        common: Common,
    },
    /// Dependence measures of one model.
    Measure {
        model: String,
        #[arg(long, value_enum, default_value_t = MeasureName::All)]
        measure: MeasureName,
        /// square, abs or power:K
        #[arg(long, default_value = "square")]
        phi: String,
        /// Spread Y onto this many equally likely levels first (needed by the
        /// rearranged measures when Y atoms are not equally likely).
        #[arg(long)]
        uniformize: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Reduce a model to its bivariate SI grid.
    Reduce {
        model: String,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form comparison of bivariate Bernoulli models (P,Q,ALPHA,BETA).
    Bernoulli {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form comparison of Gaussian models.
    Gaussian {
        a: String,
        b: String,
        /// Also discretise both models and run the generic engine.
        #[arg(long)]
        discretize: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Compare f(X) + σε across increasing noise levels.
    SimulateAdditive {
        /// Law of f(X): normal[:N], uniform[:N], exp[:N] or a JSON {atoms, probs}.
        #[arg(long, default_value = "normal:41")]
        f: String,
        /// Law of ε, same syntax.
        #[arg(long, default_value = "normal:41")]
        eps: String,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2")]
        sigmas: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Integrated decreasing rearrangement curves per level, for plotting.
    Plotdata {
        model: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Degenerate(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Degenerate(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Degenerate(_) => "degenerate",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Degenerate(m) => m,
        }
    }
}

impl From<depord::Error> for CliError {
    fn from(e: depord::Error) -> Self {
        if e.is_degenerate() {
            CliError::Degenerate(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    match commands::run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.message() });
            eprintln!("{body}");
            ExitCode::from(e.code())
        }
    }
}
