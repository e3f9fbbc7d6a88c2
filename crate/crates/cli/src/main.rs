use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hhl_lab_cli::commands::{self, Format};
use hhl_lab_cli::config::{self, CSetting, Entry};
use hhl_lab_cli::{CliError, Command, Header, RunConfig};

#[derive(Parser)]
#[command(name = "hhl-lab", version, about = "Quantum resources along the stages of the HHL algorithm")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Solve one system and report the resources of one stage.
    Solve(Flags),
    /// Sweep the squared components of b.
    SweepB(Flags),
    /// Sweep the condition number of the 2x2 family with eigenvalues 1 and κ.
    SweepKappa(Flags),
    /// Quenched averages under Gaussian rotation errors.
    Disorder(Flags),
    /// GGM with every eigenvalue-register qubit as a party.
    MicroGgm(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct Flags {
    /// Builtin (paper-2d, paper-3d, kappa:<κ>) or a JSON config file.
    #[arg(long)]
    system: Option<String>,
    /// Comma-separated components of b; a single value b₀ for a 2D system.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// Circuit constant, or "auto".
    #[arg(long)]
    c: Option<String>,
    /// Eigenvalue register width in qubits.
    #[arg(long)]
    n: Option<u32>,
    /// Sweep axis min:max:steps; repeat for a second axis.
    #[arg(long)]
    grid: Vec<String>,
    /// Comma-separated disorder strengths.
    #[arg(long)]
    sigma: Option<String>,
    /// Mean of the rotation errors.
    #[arg(long, allow_hyphen_values = true)]
    mean: Option<f64>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Stage to report (psi_in, psi_0, psi_1, psi_2, psi_3).
    #[arg(long)]
    stage: Option<String>,
    /// Comma-separated eigenvalues of a system on a fixed eigenbasis.
    #[arg(long)]
    eigenvalues: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl Flags {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut base = RunConfig::default();
        let mut system = None;
        if let Some(s) = &self.system {
            if hhl_lab_core::hhl::builtin_matrix(s).is_some() || s.starts_with("kappa:") {
                system = Some(s.clone());
            } else {
                base = RunConfig::from_file(Path::new(s))?;
            }
        }
        let list = |flag: &str, v: &Option<String>| v.as_deref().map(|s| config::parse_list(flag, s)).transpose();
        let flags = RunConfig {
            system,
            matrix: None,
            eigenvalues: list("--eigenvalues", &self.eigenvalues)?,
            b: list("--b", &self.b)?.map(|v| v.into_iter().map(Entry::Real).collect()),
            c: self.c.as_deref().map(CSetting::parse).transpose()?,
            n: self.n,
            stage: self.stage.clone(),
            grid: (!self.grid.is_empty()).then(|| self.grid.clone()),
            sigma: list("--sigma", &self.sigma)?,
            mean: self.mean,
            realizations: self.realizations,
            seed: self.seed,
        };
        Ok(base.overlay(flags))
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("HHL_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::validation(format!("HHL_LAB_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Runtime { name: "ThreadPool", message: e.to_string() })
}

/// Writes through a sibling temporary file so a failed run leaves nothing behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| CliError::validation("--out needs a file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = std::fs::write(&tmp, contents).and_then(|_| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(CliError::io)
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (command, flags) = match &cli.command {
        Sub::Solve(f) => (Command::Solve, f),
        Sub::SweepB(f) => (Command::SweepB, f),
        Sub::SweepKappa(f) => (Command::SweepKappa, f),
        Sub::Disorder(f) => (Command::Disorder, f),
        Sub::MicroGgm(f) => (Command::MicroGgm, f),
    };
    let cfg = flags.config()?;
    let output = commands::execute(command, &cfg)?;
    let header = Header::new(cfg.seed(), &commands::provenance(command, &cfg));
    let format = flags.format.map(|f| match f {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    });
    let rendered = output.render(format, &header);
    match &flags.out {
        Some(path) => write_atomic(path, &rendered),
        None => std::io::stdout().write_all(rendered.as_bytes()).map_err(CliError::io),
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
