//! Two-mode linear-prediction (Prony) fit of complex exponential rates.
//!
//! For a signal `x_k = c1 z1^k + c2 z2^k` the samples satisfy
//! `x_{k+2} = a1 x_{k+1} + a0 x_k`; the roots of `z^2 - a1 z - a0` are the
//! per-sample multipliers `z_i = exp(lambda_i dt)`.

use crate::cxmat::C64;
use crate::dynamics::CoherenceTrajectory;
use crate::error::{Error, Result};

/// Ratio of singular values below which the recurrence is treated as rank
/// one and the second mode is reported as spurious.
pub const RANK_TOL: f64 = 1e-10;

/// Roots with modulus above `1 + GROWTH_LIMIT` are rejected as growing modes.
pub const GROWTH_LIMIT: f64 = 1e-6;

/// Relative gap below which two fitted real parts count as equal.
const TIE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitConfig {
    pub num_modes: usize,
    pub sample_count: usize,
    pub start_index: usize,
}

impl FitConfig {
    /// Fit over every sample of a trajectory of length `len`.
    pub fn whole(len: usize) -> Self {
        Self { num_modes: 2, sample_count: len, start_index: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_modes != 2 {
            return Err(Error::invalid(format!("only two-mode fits are supported, got {}", self.num_modes)));
        }
        let min = (2 * self.num_modes + 2).max(8);
        if self.sample_count < min {
            return Err(Error::invalid(format!("need at least {min} samples, got {}", self.sample_count)));
        }
        Ok(())
    }
}

/// Fitted continuous rates, ordered like [`crate::analytic::ModeRates`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFit {
    /// `None` when the data only supports a single mode.
    pub lambda_fast: Option<C64>,
    pub lambda_slow: C64,
    /// RMS residual of the recurrence, relative to the RMS signal.
    pub relative_residual: f64,
}

impl ModeFit {
    pub fn slow_rate(&self) -> f64 {
        -self.lambda_slow.re
    }

    pub fn fast_rate(&self) -> Option<f64> {
        self.lambda_fast.map(|l| -l.re)
    }

    pub fn second_mode_spurious(&self) -> bool {
        self.lambda_fast.is_none()
    }
}

pub fn fit_decay_modes(traj: &CoherenceTrajectory, cfg: &FitConfig) -> Result<ModeFit> {
    cfg.validate()?;
    traj.validate()?;
    let end = cfg.start_index.checked_add(cfg.sample_count).filter(|&e| e <= traj.len()).ok_or_else(|| {
        Error::invalid(format!(
            "fit window [{}, +{}) exceeds trajectory of {} samples",
            cfg.start_index,
            cfg.sample_count,
            traj.len()
        ))
    })?;
    let dt = traj.dt().ok_or_else(|| Error::invalid("trajectory has fewer than two samples"))?;
    let x = &traj.rho_pm[cfg.start_index..end];

    // columns of the prediction system: [x_{k+1}, x_k] -> x_{k+2}
    let m = x.len() - 2;
    let col1 = &x[1..m + 1];
    let col0 = &x[..m];
    let rhs = &x[2..];

    let norm1 = norm(col1);
    if !(norm1 > 0.0) || !norm1.is_finite() {
        return Err(Error::Fit("signal is identically zero or non-finite".into()));
    }

    // thin QR by Gram-Schmidt with one reorthogonalization pass
    let q1: Vec<C64> = col1.iter().map(|z| z / norm1).collect();
    let mut r12 = dot(&q1, col0);
    let mut v: Vec<C64> = col0.iter().zip(&q1).map(|(c, q)| c - q * r12).collect();
    let again = dot(&q1, &v);
    for (vi, qi) in v.iter_mut().zip(&q1) {
        *vi -= qi * again;
    }
    r12 += again;
    let r22 = norm(&v);

    let (s_max, s_min) = singular_values_upper(norm1, r12, r22);
    if s_min <= RANK_TOL * s_max {
        return single_mode(x, dt);
    }

    let q2: Vec<C64> = v.iter().map(|z| z / r22).collect();
    let b1 = dot(&q1, rhs);
    let b2 = dot(&q2, rhs);
    // back substitution on [[norm1, r12], [0, r22]] (a1 multiplies col1)
    let a0 = b2 / r22;
    let a1 = (b1 - r12 * a0) / norm1;

    let residual = relative_residual(rhs, |k| a1 * col1[k] + a0 * col0[k]);

    // z^2 - a1 z - a0 = 0
    let (z1, z2) = quadratic_roots(C64::new(1.0, 0.0), -a1, -a0);
    let mut lambdas = [to_rate(z1, dt)?, to_rate(z2, dt)?];
    // a conjugate pair has equal real parts up to roundoff; order it by the
    // imaginary part so the labels do not depend on that roundoff
    let scale = lambdas[0].norm().max(lambdas[1].norm());
    let tied = (lambdas[0].re - lambdas[1].re).abs() <= TIE_TOL * scale;
    lambdas.sort_by(|a, b| if tied { a.im.total_cmp(&b.im) } else { a.re.total_cmp(&b.re) });
    Ok(ModeFit { lambda_fast: Some(lambdas[0]), lambda_slow: lambdas[1], relative_residual: residual })
}

fn single_mode(x: &[C64], dt: f64) -> Result<ModeFit> {
    let prev = &x[..x.len() - 1];
    let next = &x[1..];
    let denom = dot(prev, prev).re;
    if !(denom > 0.0) {
        return Err(Error::Fit("signal is identically zero".into()));
    }
    let z = dot(prev, next) / denom;
    let residual = relative_residual(next, |k| z * prev[k]);
    Ok(ModeFit { lambda_fast: None, lambda_slow: to_rate(z, dt)?, relative_residual: residual })
}

fn to_rate(z: C64, dt: f64) -> Result<C64> {
    let mag = z.norm();
    if !(mag > 0.0) || !mag.is_finite() {
        return Err(Error::Fit(format!("degenerate characteristic root {z}")));
    }
    if mag > 1.0 + GROWTH_LIMIT {
        return Err(Error::Fit(format!("growing mode with |z| = {mag:.9}")));
    }
    Ok(z.ln() / dt)
}

/// Roots of `a z^2 + b z + c` without cancellation.
fn quadratic_roots(a: C64, b: C64, c: C64) -> (C64, C64) {
    let sq = (b * b - a * c * 4.0).sqrt();
    let sign = if (b.conj() * sq).re >= 0.0 { 1.0 } else { -1.0 };
    let q = -(b + sq * sign) * 0.5;
    if q.norm() == 0.0 {
        return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    }
    (q / a, c / q)
}

/// Singular values of `[[a, b], [0, d]]` with `a, d` real nonnegative.
fn singular_values_upper(a: f64, b: C64, d: f64) -> (f64, f64) {
    // eigenvalues of R^dagger R: trace and determinant
    let tr = a * a + b.norm_sqr() + d * d;
    let det = a * d;
    let det_sq = det * det;
    let disc = (tr * tr - 4.0 * det_sq).max(0.0).sqrt();
    let big = ((tr + disc) / 2.0).sqrt();
    let small = if big > 0.0 { det.abs() / big } else { 0.0 };
    (big, small)
}

fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn norm(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn relative_residual(target: &[C64], model: impl Fn(usize) -> C64) -> f64 {
    let err: f64 = target.iter().enumerate().map(|(k, t)| (t - model(k)).norm_sqr()).sum();
    let sig = norm(target);
    if sig > 0.0 {
        err.sqrt() / sig
    } else {
        0.0
    }
}
