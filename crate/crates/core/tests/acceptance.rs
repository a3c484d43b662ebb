//! Acceptance suite. Runs as a plain binary (`harness = false`) so that each
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.

use std::path::Path as FsPath;
use std::process::Command;
use std::time::Instant;

use zeno_cavity::analytic::{
    coherence_closed_form, decoherence_timescale, mode_rates, slow_decay_rate, TimescaleBranch,
};
use zeno_cavity::cxmat::C64;
use zeno_cavity::dynamics::{IntegrateOptions, InvariantStats};
use zeno_cavity::experiments::{
    analytic_trajectory, fit_decay_modes, integrate_path, log_grid, FitConfig, Path,
};
use zeno_cavity::hilbert::{
    build_jc_hamiltonian, build_occupancy_operator, jacobi_eigen, to_jce_block, JCParams, JACOBI_TOL,
};

const R: f64 = 100.0;
const OMEGA: f64 = 1e4;
const T_END: f64 = 0.1;
const SAMPLES: usize = 1000;
const RATIOS: [f64; 9] = [0.0, 0.5, 1.0, 2.0, 3.9, 4.0, 4.1, 8.0, 100.0];

type Outcome = Result<String, String>;

struct OracleRun {
    n: usize,
    ratio: f64,
    coherence_err: f64,
    population_err: f64,
    stats: InvariantStats,
    steps: usize,
}

/// Full-space runs shared by criteria 1, 2 and 7.
fn oracle_runs() -> Result<Vec<OracleRun>, String> {
    let mut runs = Vec::new();
    for n in [1usize, 4] {
        for ratio in RATIOS {
            let kappa = ratio * R;
            let p = JCParams::from_rabi(OMEGA, R, n, kappa).map_err(|e| e.to_string())?;
            let run = integrate_path(&p, T_END, SAMPLES, Path::Full, &IntegrateOptions::default())
                .map_err(|e| format!("n = {n}, kappa/R = {ratio}: {e}"))?;
            let traj = &run.trajectory;
            let mut coherence_err: f64 = 0.0;
            let mut population_err: f64 = 0.0;
            for k in 0..traj.len() {
                let exact = coherence_closed_form(traj.t[k], R, kappa).map_err(|e| e.to_string())?;
                coherence_err = coherence_err.max((traj.rho_pm[k] - exact).norm());
                population_err = population_err.max((traj.rho_pp[k] - 0.5).abs()).max((traj.rho_mm[k] - 0.5).abs());
            }
            runs.push(OracleRun { n, ratio, coherence_err, population_err, stats: run.stats, steps: run.steps });
        }
    }
    Ok(runs)
}

fn criterion_1(runs: &[OracleRun]) -> Outcome {
    let worst = runs.iter().max_by(|a, b| a.coherence_err.total_cmp(&b.coherence_err)).unwrap();
    let msg = format!(
        "{} runs, max |rho_pm - closed form| = {:.3e} (n = {}, kappa/R = {})",
        runs.len(),
        worst.coherence_err,
        worst.n,
        worst.ratio
    );
    if worst.coherence_err <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_2(runs: &[OracleRun]) -> Outcome {
    let worst = runs.iter().map(|r| r.population_err).fold(0.0, f64::max);
    let msg = format!("max |rho_pp - 1/2|, |rho_mm - 1/2| = {worst:.3e}");
    if worst <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_3() -> Outcome {
    // unmeasured: numeric full space against 1/2 e^{-iRt}
    let p = JCParams::from_rabi(OMEGA, R, 1, 0.0).map_err(|e| e.to_string())?;
    let run = integrate_path(&p, T_END, SAMPLES, Path::Full, &IntegrateOptions::default()).map_err(|e| e.to_string())?;
    let traj = &run.trajectory;
    let free = (0..traj.len())
        .map(|k| (traj.rho_pm[k] - C64::from_polar(0.5, -R * traj.t[k])).norm())
        .fold(0.0, f64::max);

    // Zeno limit at kappa = 1e4 R, Rt = 10: closed form and the reduced numeric path
    let kappa = 1e4 * R;
    let t = 10.0 / R;
    let closed = (coherence_closed_form(t, R, kappa).map_err(|e| e.to_string())? - 0.5).norm();
    let p = JCParams::from_rabi(0.0, R, 1, kappa).map_err(|e| e.to_string())?;
    let opts = IntegrateOptions { validate: false, ..IntegrateOptions::default() };
    let run = integrate_path(&p, t, 2, Path::Block, &opts).map_err(|e| e.to_string())?;
    let numeric = (run.trajectory.rho_pm[1] - 0.5).norm();

    let msg = format!(
        "kappa = 0: max |rho_pm - e^(-iRt)/2| = {free:.3e}; kappa = 1e4 R, Rt = 10: |rho_pm - 1/2| = {closed:.3e} (closed form), {numeric:.3e} (numeric)"
    );
    if free <= 1e-10 && closed <= 1e-2 && numeric <= 1e-2 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_4() -> Outcome {
    let mut grid: Vec<f64> = log_grid(1e-2, 1e3, 200).into_iter().map(|x| x * R).collect();
    grid.push(4.0 * R);
    grid.sort_by(f64::total_cmp);

    let rates: Vec<f64> = grid.iter().map(|&k| slow_decay_rate(R, k)).collect();
    let mut formula_err: f64 = 0.0;
    for (&k, &rate) in grid.iter().zip(&rates) {
        let expected = if k <= 4.0 * R { k / 4.0 } else { (k - (k * k - 16.0 * R * R).sqrt()) / 4.0 };
        formula_err = formula_err.max((rate - expected).abs() / expected);
    }
    let peak = rates.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap();
    let rising = rates[..=peak].windows(2).all(|w| w[1] > w[0]);
    let falling = rates[peak..].windows(2).all(|w| w[1] < w[0]);
    let msg = format!(
        "{} points, max relative formula deviation {formula_err:.3e}, peak {} at kappa/R = {}, rising {rising}, falling {falling}",
        grid.len(),
        rates[peak],
        grid[peak] / R
    );
    if formula_err <= 1e-9 && rising && falling && grid[peak] == 4.0 * R && rates[peak] == R {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_5() -> Outcome {
    let g = 5.0;
    let p = JCParams::with_truncation(OMEGA, g, 1, 0.0, 10).map_err(|e| e.to_string())?;
    let h = build_jc_hamiltonian(&p).map_err(|e| e.to_string())?;
    let values: Vec<f64> = jacobi_eigen(&h, JACOBI_TOL).map_err(|e| e.to_string())?.into_iter().map(|e| e.value).collect();
    let mut worst: f64 = 0.0;
    for n in 1..=10usize {
        let centre = n as f64 * OMEGA;
        let mut near: Vec<f64> = values.iter().copied().filter(|v| (v - centre).abs() < 0.5 * OMEGA).collect();
        near.sort_by(f64::total_cmp);
        if near.len() != 2 {
            return Err(format!("manifold {n}: found {} eigenvalues", near.len()));
        }
        worst = worst.max(((near[1] - near[0]) - 2.0 * (n as f64).sqrt() * g).abs());
    }

    let mut exact_half = true;
    for n in 1..=10usize {
        let p = JCParams::new(OMEGA, g, n, 0.0).map_err(|e| e.to_string())?;
        let a = build_occupancy_operator(&p).map_err(|e| e.to_string())?;
        let block = to_jce_block(&a, &p).map_err(|e| e.to_string())?;
        exact_half &= block.as_slice().iter().all(|z| *z == C64::new(0.5, 0.0));
    }
    let msg = format!("max splitting error n = 1..10: {worst:.3e}; occupancy block exactly 1/2: {exact_half}");
    if worst <= 1e-10 && exact_half {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for ratio in [0.5, 1.0, 2.0, 8.0, 20.0, 100.0] {
        let kappa = ratio * R;
        let traj = analytic_trajectory(R, kappa, T_END, SAMPLES).map_err(|e| e.to_string())?;
        let fit = fit_decay_modes(&traj, &FitConfig::whole(traj.len())).map_err(|e| format!("kappa/R = {ratio}: {e}"))?;
        let exact = mode_rates(R, kappa);
        let fast = fit.lambda_fast.ok_or_else(|| format!("kappa/R = {ratio}: second mode missing"))?;
        let e_slow = (fit.lambda_slow - exact.lambda_slow).norm() / exact.lambda_slow.norm();
        let e_fast = (fast - exact.lambda_fast).norm() / exact.lambda_fast.norm();
        worst = worst.max(e_slow).max(e_fast);
        lines.push(format!("{ratio}: {:.1e}", e_slow.max(e_fast)));
    }
    let msg = format!("max relative rate error {worst:.3e} (kappa/R {})", lines.join(", "));
    if worst <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_7(runs: &[OracleRun]) -> Outcome {
    let tol = zeno_cavity::dynamics::DensityTolerance::default();
    let steps: usize = runs.iter().map(|r| r.steps).sum();
    let checked: usize = runs.iter().map(|r| r.stats.steps_checked).sum();
    let trace = runs.iter().map(|r| r.stats.max_trace_defect).fold(0.0, f64::max);
    let herm = runs.iter().map(|r| r.stats.max_hermiticity_defect).fold(0.0, f64::max);
    let min_eig = runs.iter().map(|r| r.stats.min_eigenvalue).fold(f64::INFINITY, f64::min);
    let leak = runs.iter().map(|r| r.stats.max_leakage).fold(0.0, f64::max);
    let msg = format!(
        "{checked}/{steps} steps checked; max trace defect {trace:.1e}, max Hermiticity defect {herm:.1e}, min eigenvalue {min_eig:.1e}, max leakage {leak:.1e}"
    );
    if checked == steps
        && trace <= tol.trace
        && herm <= tol.hermiticity
        && min_eig >= tol.min_eigenvalue
        && leak <= IntegrateOptions::default().leakage_tolerance
    {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    for ratio in [1e-2, 0.1, 0.5, 1.0, 2.0, 3.9, 4.0, 4.1, 8.0, 100.0, 1e3] {
        let kappa = ratio * R;
        let report = decoherence_timescale(R, kappa).map_err(|e| e.to_string())?;
        let expected = if kappa <= 4.0 * R { 4.0 / kappa } else { 4.0 / (kappa - (kappa * kappa - 16.0 * R * R).sqrt()) };
        worst = worst.max((report.t_dec - expected).abs() / expected);
        let branch_ok = (kappa <= 4.0 * R) == (report.branch == TimescaleBranch::BelowCritical);
        if !branch_ok {
            return Err(format!("kappa/R = {ratio}: wrong branch {:?}", report.branch));
        }
    }
    let at = decoherence_timescale(R, 4.0 * R).map_err(|e| e.to_string())?.t_dec;
    let below = decoherence_timescale(R, 4.0 * R * (1.0 - 1e-12)).map_err(|e| e.to_string())?.t_dec;
    let above = decoherence_timescale(R, 4.0 * R * (1.0 + 1e-12)).map_err(|e| e.to_string())?.t_dec;
    let crit_err = (at * R - 1.0).abs();
    let jump = (below - above).abs() * R;
    let msg = format!("max relative deviation from 4/kappa, 4/(kappa - sqrt(kappa^2 - 16R^2)) {worst:.3e}; T(4R) R - 1 = {crit_err:.3e}; |T(4R-) - T(4R+)| R = {jump:.3e}");
    if worst <= 1e-9 && crit_err <= 1e-9 && jump <= 1e-5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn run_cli(dir: &FsPath, sub: &str, config: &FsPath, out: &FsPath) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_zeno-cavity"))
        .current_dir(dir)
        .args([sub, "--quiet", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("{sub} exited with {status}"))
    }
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sim = dir.path().join("simulate.json");
    let sweep = dir.path().join("sweep.json");
    std::fs::write(&sim, r#"{"R": 100, "kappa": 200, "t_end": 0.1, "samples": 1000, "path": "full"}"#)
        .map_err(|e| e.to_string())?;
    std::fs::write(&sweep, r#"{"R": 100, "kappa_grid": [50, 200, 400, 800, 2000], "path": "block"}"#)
        .map_err(|e| e.to_string())?;

    let mut identical = Vec::new();
    for (sub, config, file) in [("simulate", &sim, "simulate_200.csv"), ("sweep", &sweep, "sweep_grid.csv")] {
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        run_cli(dir.path(), sub, config, &a)?;
        run_cli(dir.path(), sub, config, &b)?;
        let first = std::fs::read(a.join(file)).map_err(|e| format!("{file}: {e}"))?;
        let second = std::fs::read(b.join(file)).map_err(|e| format!("{file}: {e}"))?;
        if first != second {
            return Err(format!("{file} differs between runs"));
        }
        identical.push(format!("{file} ({} bytes)", first.len()));
    }
    Ok(format!("byte-identical across two runs: {}", identical.join(", ")))
}

fn main() {
    let start = Instant::now();
    let runs = oracle_runs();
    let shared = |f: fn(&[OracleRun]) -> Outcome| -> Outcome {
        match &runs {
            Ok(r) => f(r),
            Err(e) => Err(format!("integration failed: {e}")),
        }
    };

    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "closed form vs full-space RK4", shared(criterion_1)),
        (2, "populations stay at 1/2", shared(criterion_2)),
        (3, "free and Zeno limits", criterion_3()),
        (4, "critical-point structure of the slow rate", criterion_4()),
        (5, "spectrum and occupancy block", criterion_5()),
        (6, "two-mode fit fidelity", criterion_6()),
        (7, "density-matrix invariants at every step", shared(criterion_7)),
        (8, "decoherence timescale", criterion_8()),
        (9, "CLI determinism", criterion_9()),
    ];

    let mut failed = 0;
    for (id, name, outcome) in &results {
        match outcome {
            Ok(msg) => println!("criterion {id} PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {id} FAIL  {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed ({:.1} s)", results.len() - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
