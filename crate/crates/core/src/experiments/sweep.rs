use rayon::prelude::*;

use super::fit::{fit_decay_modes, FitConfig};
use super::{check_span, run_trajectory, Path};
use crate::analytic::{decoherence_timescale, mode_rates, Regime};
use crate::error::{Error, Result};
use crate::hilbert::JCParams;

/// Points with `|kappa - 4R| <= FIT_EXCLUSION * R` are not fitted: the
/// degenerate signal `t e^{-Rt}` is outside the two-exponential model.
pub const FIT_EXCLUSION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub path: Path,
    /// Cavity frequency and excitation number for numeric paths.
    pub omega: f64,
    pub n: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { path: Path::Analytic, omega: 0.0, n: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub kappa: f64,
    pub regime: Regime,
    pub slow_rate_analytic: f64,
    pub fast_rate_analytic: f64,
    /// `None` inside the critical exclusion band or when the fit failed.
    pub slow_rate_fitted: Option<f64>,
    /// `None` at `kappa = 0`.
    pub t_dec: Option<f64>,
    /// Why this point has no fitted rate, if it has none.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rabi: f64,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn kappa_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.kappa).collect()
    }

    pub fn slow_rates_analytic(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.slow_rate_analytic).collect()
    }

    pub fn slow_rates_fitted(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.slow_rate_fitted).collect()
    }

    pub fn timescales(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.t_dec).collect()
    }

    pub fn regimes(&self) -> Vec<Regime> {
        self.points.iter().map(|p| p.regime).collect()
    }

    /// Index of the largest analytic slow rate (first one on ties).
    pub fn argmax_analytic(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.points.iter().enumerate() {
            if best.map_or(true, |(_, r)| p.slow_rate_analytic > r) {
                best = Some((i, p.slow_rate_analytic));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|k| {
                    if k == 0 {
                        lo
                    } else if k == count - 1 {
                        hi
                    } else {
                        (a + (b - a) * k as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Analytic and fitted slow decoherence rates over a grid of couplings.
/// Grid points are evaluated in parallel; output keeps the input order.
pub fn sweep_kappa(
    rabi: f64,
    kappa_grid: &[f64],
    t_end: f64,
    samples: usize,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if !(rabi.is_finite() && rabi > 0.0) {
        return Err(Error::invalid(format!("Rabi frequency must be > 0, got {rabi}")));
    }
    if kappa_grid.is_empty() {
        return Err(Error::invalid("kappa grid is empty"));
    }
    if let Some(bad) = kappa_grid.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
        return Err(Error::invalid(format!("kappa grid values must be finite and >= 0, got {bad}")));
    }
    check_span(t_end, samples)?;

    let points = kappa_grid.par_iter().map(|&kappa| sweep_point(rabi, kappa, t_end, samples, opts)).collect();
    Ok(SweepResult { rabi, points })
}

fn sweep_point(rabi: f64, kappa: f64, t_end: f64, samples: usize, opts: &SweepOptions) -> SweepPoint {
    let rates = mode_rates(rabi, kappa);
    let t_dec = decoherence_timescale(rabi, kappa).ok().map(|r| r.t_dec);
    let (slow_rate_fitted, note) = if (kappa - 4.0 * rabi).abs() <= FIT_EXCLUSION * rabi {
        (None, Some("critical band: analytic rates only".to_string()))
    } else {
        match fit_point(rabi, kappa, t_end, samples, opts) {
            Ok(rate) => (Some(rate), None),
            Err(e) => {
                log::warn!("sweep point kappa = {kappa}: {e}");
                (None, Some(e.to_string()))
            }
        }
    };
    SweepPoint {
        kappa,
        regime: rates.regime,
        slow_rate_analytic: rates.slow_rate(),
        fast_rate_analytic: rates.fast_rate(),
        slow_rate_fitted,
        t_dec,
        note,
    }
}

fn fit_point(rabi: f64, kappa: f64, t_end: f64, samples: usize, opts: &SweepOptions) -> Result<f64> {
    let p = JCParams::from_rabi(opts.omega, rabi, opts.n, kappa)?;
    let traj = run_trajectory(&p, t_end, samples, opts.path)?;
    Ok(fit_decay_modes(&traj, &FitConfig::whole(traj.len()))?.slow_rate())
}
