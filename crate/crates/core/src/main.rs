use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use poisson_sharp::commands::{
    cmd_eigen, cmd_green, cmd_sigma, cmd_talenti, cmd_verify, exit_code, Outcome, Overrides, RunConfig, EXIT_CONFIG,
};

/// Sharp L-infinity bounds for the Dirichlet Poisson problem on grid domains.
#[derive(Parser)]
#[command(name = "poisson-sharp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the sigma curve and write CSV, JSON and heatmaps.
    Sigma(Common),
    /// Run verification suites and write JSON-lines reports.
    Verify(Common),
    /// Low eigenpairs and the eigenfunction bound.
    Eigen(Common),
    /// Green-column rearrangement checks.
    Green(Common),
    /// Talenti comparison checks.
    Talenti(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Shape spec such as `disk:1`, `square:1`, `l_shape:1`, `mask:path`.
    #[arg(long)]
    domain: Option<String>,
    /// Grid spacing, e.g. `0.0078125` or `1/128`.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    rtol: Option<f64>,
    /// A single beta value; may be repeated.
    #[arg(long)]
    beta: Vec<f64>,
    /// Comma-separated beta values, or a count of equispaced points.
    #[arg(long)]
    betas: Option<String>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of sigma,ball,talenti,green,sign,eigen.
    #[arg(long)]
    suites: Option<String>,
    /// Random sources per family check.
    #[arg(long)]
    samples: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            domain: self.domain.clone(),
            h: self.h.clone(),
            rtol: self.rtol,
            betas: self.betas.clone(),
            beta: self.beta.clone(),
            suites: self.suites.clone(),
            seed: self.seed,
            out: self.out.clone(),
            kmax: self.kmax,
            samples: self.samples,
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("POISSON_SHARP_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn report(outcome: &Outcome) -> i32 {
    let failed = outcome.failures();
    println!("{} checks, {} failed", outcome.reports.len(), failed.len());
    for r in &failed {
        println!("FAIL {} lhs={:.6e} rhs={:.6e} margin={:.3e}", r.id, r.lhs, r.rhs, r.margin);
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    outcome.exit_code()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let (common, run): (&Common, fn(&RunConfig) -> poisson_sharp::Result<Outcome>) = match &cli.command {
        Command::Sigma(c) => (c, cmd_sigma),
        Command::Verify(c) => (c, cmd_verify),
        Command::Eigen(c) => (c, cmd_eigen),
        Command::Green(c) => (c, cmd_green),
        Command::Talenti(c) => (c, cmd_talenti),
    };
    let cfg = match RunConfig::resolve(common.config.as_deref(), &common.overrides()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let code = match run(&cfg) {
        Ok(outcome) => report(&outcome),
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
