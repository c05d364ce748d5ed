use clap::Parser;
use grassb::sde::Scheme;
use grassb_cli::{run, Format, Mode, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Grassmann phase-space dynamics of fermion systems.
///
/// Thread count for the sde engine follows RAYON_NUM_THREADS.
#[derive(Parser, Debug)]
#[command(name = "grassb", version)]
struct Args {
    /// exact | b-master | sde | validate | compare
    #[arg(long)]
    mode: Mode,
    /// Model file (TOML)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: Format,
    #[arg(long, default_value_t = 10_000)]
    n_traj: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// stratonovich | ito
    #[arg(long, default_value = "stratonovich")]
    scheme: Scheme,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma separated: nJ, adIaJ (a+_I a_J) or a .json matrix file
    #[arg(long, value_delimiter = ',')]
    observables: Vec<String>,
    /// Two result files (compare mode)
    inputs: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let a = Args::parse();
    let cfg = RunConfig {
        mode: a.mode,
        model: a.model,
        observables: a.observables,
        n_traj: a.n_traj,
        dt: a.dt,
        scheme: a.scheme,
        seed: a.seed,
        out: a.out,
        format: a.format,
        inputs: a.inputs,
    };
    match run(&cfg) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
