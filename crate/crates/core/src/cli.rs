//! Command-line front end.
//!
//! Exit codes: 0 success, 1 bad input (arguments, config, I/O), 2 numeric
//! failure (integration, fitting, or a verification check that did not pass).

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, Coupling, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    emit_sweep_csv, emit_trajectory_csv, format_float, run_trajectory, sweep_kappa, Path, SweepOptions,
};
use crate::hilbert::{build_jc_hamiltonian, jacobi_eigen, jce_eigenvalues, JCParams, JACOBI_TOL};

/// Environment variable naming the fallback output directory.
pub const OUT_ENV: &str = "ZENO_CAVITY_OUT";

/// Largest allowed `|numeric - analytic|` for `verify`.
pub const VERIFY_TOL: f64 = 1e-8;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "zeno-cavity", version, about = "Jaynes-Cummings cavity under repeated occupancy measurement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one coherence trajectory and write it as CSV.
    Simulate(CommonArgs),
    /// Sweep the measurement coupling over `kappa_grid` and write decoherence rates.
    Sweep(CommonArgs),
    /// Compare numeric integration against the closed form.
    Verify(CommonArgs),
    /// Diagonalize the truncated Hamiltonian and check the manifold splittings.
    Spectrum(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config and the environment).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code. Diagnostics go to stderr.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            EXIT_NUMERIC
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Simulate(args) => simulate(&args),
        Command::Sweep(args) => sweep(&args),
        Command::Verify(args) => verify(&args),
        Command::Spectrum(args) => spectrum(&args),
    }
}

fn load(args: &CommonArgs) -> Result<RunConfig, Failure> {
    let bytes = fs::read(&args.config)
        .map_err(|e| Failure::Input(format!("cannot read config {}: {e}", args.config.display())))?;
    Ok(parse_config(&bytes)?)
}

fn output_dir(args: &CommonArgs, cfg: &RunConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn single_kappa(cfg: &RunConfig, cmd: &str) -> Result<f64, Failure> {
    match cfg.coupling {
        Coupling::Single(k) => Ok(k),
        Coupling::Grid(_) => Err(Failure::Input(format!("`{cmd}` needs a single `kappa`, not `kappa_grid`"))),
    }
}

fn write_output(args: &CommonArgs, cfg: &RunConfig, name: &str, body: &[u8]) -> Result<PathBuf, Failure> {
    let dir = output_dir(args, cfg);
    fs::create_dir_all(&dir).map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn simulate(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let kappa = single_kappa(&cfg, "simulate")?;
    let traj = run_trajectory(&cfg.params, cfg.t_end, cfg.samples, cfg.path)?;
    let mut buf = Vec::new();
    emit_trajectory_csv(&traj, &mut buf)?;
    let path = write_output(args, &cfg, &format!("simulate_{kappa}.csv"), &buf)?;
    if !args.quiet {
        println!(
            "wrote {} ({} samples, {} path, regime {})",
            path.display(),
            traj.len(),
            cfg.path,
            cfg.regime().map(|r| r.as_str()).unwrap_or("-")
        );
    }
    Ok(())
}

fn sweep(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let grid = match &cfg.coupling {
        Coupling::Grid(g) => g.clone(),
        Coupling::Single(_) => return Err(Failure::Input("`sweep` needs `kappa_grid`, not `kappa`".into())),
    };
    let opts = SweepOptions { path: cfg.path, omega: cfg.params.omega, n: cfg.params.n };
    let result = sweep_kappa(cfg.rabi(), &grid, cfg.t_end, cfg.samples, &opts)?;
    let mut buf = Vec::new();
    emit_sweep_csv(&result, &mut buf)?;
    let path = write_output(args, &cfg, "sweep_grid.csv", &buf)?;
    if !args.quiet {
        let failed = result.points.iter().filter(|p| p.slow_rate_fitted.is_none()).count();
        println!("wrote {} ({} points, {} without fitted rate)", path.display(), grid.len(), failed);
    }
    Ok(())
}

fn verify(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    single_kappa(&cfg, "verify")?;
    let path = match cfg.path {
        Path::Analytic => Path::Full,
        p => p,
    };
    let numeric = run_trajectory(&cfg.params, cfg.t_end, cfg.samples, path)?;
    let exact = run_trajectory(&cfg.params, cfg.t_end, cfg.samples, Path::Analytic)?;
    let diff = numeric.max_coherence_diff(&exact)?;
    let pop = numeric
        .rho_pp
        .iter()
        .chain(&numeric.rho_mm)
        .map(|x| (x - 0.5).abs())
        .fold(0.0, f64::max);
    if !args.quiet {
        println!("max |numeric - analytic| = {diff:.3e} ({path} path, {} samples)", numeric.len());
        println!("max |population - 1/2|   = {pop:.3e}");
    }
    if diff > VERIFY_TOL {
        return Err(Failure::Numeric(format!("max deviation {diff:.3e} exceeds {VERIFY_TOL:e}")));
    }
    Ok(())
}

/// Eigenvalue pair of manifold `m` found in a spectrum.
struct ManifoldCheck {
    manifold: usize,
    e_plus: f64,
    e_minus: f64,
    expected_plus: f64,
    expected_minus: f64,
}

impl ManifoldCheck {
    fn splitting_error(&self) -> f64 {
        ((self.e_plus - self.e_minus) - (self.expected_plus - self.expected_minus)).abs()
    }
}

fn check_manifolds(p: &JCParams) -> Result<(Vec<ManifoldCheck>, f64)> {
    let h = build_jc_hamiltonian(p)?;
    let values: Vec<f64> = jacobi_eigen(&h, JACOBI_TOL)?.into_iter().map(|e| e.value).collect();
    let nearest = |target: f64| {
        values.iter().copied().min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs())).unwrap_or(f64::NAN)
    };
    let checks = (1..=p.n_max)
        .map(|m| {
            let (expected_plus, expected_minus) = jce_eigenvalues(&JCParams { n: m, ..*p });
            ManifoldCheck {
                manifold: m,
                e_plus: nearest(expected_plus),
                e_minus: nearest(expected_minus),
                expected_plus,
                expected_minus,
            }
        })
        .collect();
    Ok((checks, h.frobenius_norm()))
}

fn spectrum(args: &CommonArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let label = match cfg.coupling {
        Coupling::Single(k) => format!("{k}"),
        Coupling::Grid(_) => "grid".to_string(),
    };
    let (checks, h_norm) = check_manifolds(&cfg.params)?;
    let tol = 1e-10f64.max(1e-14 * h_norm);

    let mut buf = Vec::new();
    writeln!(buf, "# units: energies in rad/us (hbar = 1)").map_err(Error::from)?;
    writeln!(buf, "manifold,e_plus,e_minus,splitting,expected_splitting,abs_error").map_err(Error::from)?;
    let mut worst: f64 = 0.0;
    for c in &checks {
        let err = c.splitting_error();
        worst = worst.max(err);
        writeln!(
            buf,
            "{},{},{},{},{},{}",
            c.manifold,
            format_float(c.e_plus),
            format_float(c.e_minus),
            format_float(c.e_plus - c.e_minus),
            format_float(c.expected_plus - c.expected_minus),
            format_float(err)
        )
        .map_err(Error::from)?;
    }
    let path = write_output(args, &cfg, &format!("spectrum_{label}.csv"), &buf)?;
    if !args.quiet {
        println!("wrote {} ({} manifolds, worst splitting error {worst:.3e})", path.display(), checks.len());
    }
    if worst > tol {
        return Err(Failure::Numeric(format!("splitting error {worst:.3e} exceeds {tol:.1e}")));
    }
    Ok(())
}
