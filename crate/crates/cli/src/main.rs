use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use torsionlab_cli::{run, Manifest, Options};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Torsion,
    Spectrum,
    Algebra,
    Blockdiag,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Torsion => "torsion",
            Command::Spectrum => "spectrum",
            Command::Algebra => "algebra",
            Command::Blockdiag => "blockdiag",
        }
    }
}

/// Generalized Nijenhuis torsions, spectra, Haantjes algebras and block
/// structure of operator fields described in a JSON manifest.
#[derive(Parser, Debug)]
#[command(name = "torsionlab", version)]
struct Cli {
    command: Command,
    #[arg(long)]
    manifest: PathBuf,
    /// Operator to analyse; repeat for several. Defaults to all.
    #[arg(long = "operator", value_name = "NAME")]
    operators: Vec<String>,
    /// Torsion level.
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the command's main tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Target chart for blockdiag.
    #[arg(long)]
    chart: Option<String>,
    /// Block sizes to verify, e.g. 1,1,1,2.
    #[arg(long)]
    hint: Option<String>,
    /// Random combinations for the algebra closure checks.
    #[arg(long)]
    combos: Option<usize>,
    /// Write the JSON report here.
    #[arg(long, value_name = "OUT")]
    json: Option<PathBuf>,
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("TORSIONLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("TORSIONLAB_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("TORSIONLAB_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let manifest = match Manifest::load(&cli.manifest) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let opts = Options {
        operators: cli.operators,
        level: cli.level,
        samples: cli.samples,
        seed: cli.seed,
        tol: cli.tol,
        chart: cli.chart,
        hint: cli.hint,
        combos: cli.combos,
    };
    let start = Instant::now();
    let report = match run(cli.command.name(), &manifest, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    print!("{}", report.to_markdown());
    println!("\n_elapsed: {:.2} s_", start.elapsed().as_secs_f64());
    if let Some(out) = &cli.json {
        if let Err(e) = std::fs::write(out, report.to_json()) {
            eprintln!("error: cannot write {}: {e}", out.display());
            return ExitCode::from(2);
        }
    }
    if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) }
}
