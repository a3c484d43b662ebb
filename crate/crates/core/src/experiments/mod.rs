//! Experiment drivers: single trajectories, rate fits, coupling sweeps, the
//! figure dataset, and CSV output.

mod csv;
mod fit;
mod sweep;

pub use self::csv::{
    emit_sweep_csv, emit_trajectory_csv, format_float, parse_sweep_csv, parse_trajectory_csv,
    SWEEP_HEADER, TRAJECTORY_HEADER, UNITS_COMMENT,
};
pub use self::fit::{fit_decay_modes, FitConfig, ModeFit, GROWTH_LIMIT, RANK_TOL};
pub use self::sweep::{log_grid, sweep_kappa, SweepOptions, SweepPoint, SweepResult};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analytic::{coherence_closed_form, populations_closed_form};
use crate::dynamics::{
    integrate_samples, BlockSpace, CoherenceTrajectory, FullSpace, IntegrateOptions, Integration,
    MasterEquation, Source, StepPolicy,
};
use crate::error::{Error, Result};
use crate::hilbert::JCParams;

/// How a trajectory is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Path {
    Full,
    Block,
    Analytic,
}

impl Path {
    pub fn as_str(&self) -> &'static str {
        match self {
            Path::Full => "full",
            Path::Block => "block",
            Path::Analytic => "analytic",
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Uniform grid of `samples` points over `[0, t_end]`.
pub fn time_grid(t_end: f64, samples: usize) -> Vec<f64> {
    let last = (samples - 1) as f64;
    (0..samples).map(|k| t_end * (k as f64 / last)).collect()
}

fn check_span(t_end: f64, samples: usize) -> Result<()> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::invalid(format!("t_end must be finite and > 0, got {t_end}")));
    }
    if samples < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {samples}")));
    }
    Ok(())
}

pub fn analytic_trajectory(rabi: f64, kappa: f64, t_end: f64, samples: usize) -> Result<CoherenceTrajectory> {
    check_span(t_end, samples)?;
    let mut traj = CoherenceTrajectory::empty(Source::Analytic);
    for t in time_grid(t_end, samples) {
        let (pp, mm) = populations_closed_form(t)?;
        traj.t.push(t);
        traj.rho_pm.push(coherence_closed_form(t, rabi, kappa)?);
        traj.rho_pp.push(pp);
        traj.rho_mm.push(mm);
    }
    Ok(traj)
}

/// Numerically integrates along `path` (which must not be `Analytic`),
/// returning the integration record with its invariant statistics.
pub fn integrate_path(
    p: &JCParams,
    t_end: f64,
    samples: usize,
    path: Path,
    opts: &IntegrateOptions,
) -> Result<Integration> {
    check_span(t_end, samples)?;
    p.validate()?;
    let eq: Box<dyn MasterEquation> = match path {
        Path::Full => Box::new(FullSpace::new(*p)?),
        Path::Block => Box::new(BlockSpace::new(p.rabi(), p.kappa)?),
        Path::Analytic => return Err(Error::invalid("the analytic path is not integrated")),
    };
    integrate_samples(eq.as_ref(), t_end, samples, &StepPolicy::default(), opts)
}

/// Coherence trajectory from the symmetric initial condition.
pub fn run_trajectory(p: &JCParams, t_end: f64, samples: usize, path: Path) -> Result<CoherenceTrajectory> {
    p.validate()?;
    match path {
        Path::Analytic => analytic_trajectory(p.rabi(), p.kappa, t_end, samples),
        _ => Ok(integrate_path(p, t_end, samples, path, &IntegrateOptions::default())?.trajectory),
    }
}

/// Coupling ratios `kappa / R` plotted in the figure dataset.
pub const FIGURE_KAPPA_RATIOS: [f64; 6] = [0.0, 1.0, 2.0, 4.0, 8.0, 20.0];
pub const FIGURE_SAMPLES: usize = 1000;

#[derive(Debug, Clone)]
pub struct FigureCurve {
    pub kappa_ratio: f64,
    pub analytic: CoherenceTrajectory,
    pub numeric: CoherenceTrajectory,
}

/// `rho_pm(t)` over `t in [0, 10/R]` for each of [`FIGURE_KAPPA_RATIOS`], with
/// full-space numeric overlays.
pub fn reproduce_figure(rabi: f64) -> Result<Vec<FigureCurve>> {
    if !(rabi.is_finite() && rabi > 0.0) {
        return Err(Error::invalid(format!("Rabi frequency must be > 0, got {rabi}")));
    }
    let t_end = 10.0 / rabi;
    FIGURE_KAPPA_RATIOS
        .iter()
        .map(|&ratio| {
            let p = JCParams::from_rabi(0.0, rabi, 1, ratio * rabi)?;
            Ok(FigureCurve {
                kappa_ratio: ratio,
                analytic: run_trajectory(&p, t_end, FIGURE_SAMPLES, Path::Analytic)?,
                numeric: run_trajectory(&p, t_end, FIGURE_SAMPLES, Path::Full)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxmat::C64;

    const R: f64 = 100.0;

    fn params(kappa: f64) -> JCParams {
        JCParams::from_rabi(1e4, R, 1, kappa).unwrap()
    }

    #[test]
    fn unmeasured_analytic_trajectory_is_flat() {
        let traj = run_trajectory(&params(0.0), 0.1, 1000, Path::Analytic).unwrap();
        assert_eq!(traj.len(), 1000);
        traj.validate().unwrap();
        assert!(traj.rho_pm.iter().all(|z| (z.norm() - 0.5).abs() < 1e-14));
    }

    #[test]
    fn full_path_matches_analytic() {
        let p = params(0.0);
        let numeric = run_trajectory(&p, 0.1, 1000, Path::Full).unwrap();
        let exact = run_trajectory(&p, 0.1, 1000, Path::Analytic).unwrap();
        assert_eq!(numeric.t, exact.t);
        assert!(numeric.max_coherence_diff(&exact).unwrap() <= 1e-8);
    }

    #[test]
    fn critical_trajectory_envelope() {
        let traj = run_trajectory(&params(400.0), 0.1, 101, Path::Analytic).unwrap();
        for (t, z) in traj.t.iter().zip(&traj.rho_pm) {
            let expected = (-100.0 * t).exp() * (C64::new(0.5, 0.0) + C64::new(50.0 * t, -50.0 * t)).norm();
            assert!((z.norm() - expected).abs() <= 1e-14);
        }
    }

    #[test]
    fn trajectory_argument_errors() {
        assert!(run_trajectory(&params(0.0), 0.0, 10, Path::Analytic).is_err());
        assert!(run_trajectory(&params(0.0), 0.1, 1, Path::Block).is_err());
        assert!(integrate_path(&params(0.0), 0.1, 10, Path::Analytic, &IntegrateOptions::default()).is_err());
    }

    #[test]
    fn figure_dataset() {
        let curves = reproduce_figure(R).unwrap();
        assert_eq!(curves.len(), FIGURE_KAPPA_RATIOS.len());
        for c in &curves {
            assert_eq!(c.analytic.len(), FIGURE_SAMPLES);
            assert_eq!(c.analytic.rho_pm[0], C64::new(0.5, 0.0));
            assert!((c.numeric.rho_pm[0].norm() - 0.5).abs() < 1e-15);
            assert!(c.numeric.max_coherence_diff(&c.analytic).unwrap() <= 1e-8);
        }
        let flat = &curves[0].analytic;
        assert!(flat.rho_pm.iter().all(|z| (z.norm() - 0.5).abs() < 1e-14));

        let at = |ratio: f64| curves.iter().find(|c| c.kappa_ratio == ratio).unwrap();
        let last = FIGURE_SAMPLES - 1;
        assert!(at(20.0).analytic.rho_pm[last].norm() > at(4.0).analytic.rho_pm[last].norm());
    }
}
