//! Closed-form evolution of the Jaynes-Cummings coherence under occupancy
//! measurement, starting from `rho_pp = rho_mm = rho_pm = rho_mp = 1/2`.
//!
//! The coherence pair `(rho_pm, rho_mp)` obeys a linear 2x2 system whose
//! eigenvalues are `-kappa/4 +- sqrt(kappa^2 - 16 R^2) / 4`. They are complex
//! conjugates below `kappa = 4R`, degenerate at `4R`, and real above.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cxmat::C64;
use crate::error::{Error, Result};

/// Relative half-width `|kappa - 4R| <= CRITICAL_BAND * R` of the band
/// treated as critically damped.
pub const CRITICAL_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Underdamped => "underdamped",
            Regime::Critical => "critical",
            Regime::Overdamped => "overdamped",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "underdamped" => Ok(Regime::Underdamped),
            "critical" => Ok(Regime::Critical),
            "overdamped" => Ok(Regime::Overdamped),
            other => Err(Error::invalid(format!("unknown regime {other:?}"))),
        }
    }
}

/// The two complex rates of the coherence subsystem.
///
/// `lambda_fast` has the more negative real part; when the real parts tie
/// (below critical coupling) it is the one with negative imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRates {
    pub lambda_fast: C64,
    pub lambda_slow: C64,
    pub regime: Regime,
}

impl ModeRates {
    /// Decoherence rate: `-Re(lambda_slow)`.
    pub fn slow_rate(&self) -> f64 {
        -self.lambda_slow.re
    }

    pub fn fast_rate(&self) -> f64 {
        -self.lambda_fast.re
    }
}

pub fn regime_classify(rabi: f64, kappa: f64) -> Regime {
    let crit = critical_coupling(rabi);
    if (kappa - crit).abs() <= CRITICAL_BAND * rabi {
        Regime::Critical
    } else if kappa < crit {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    }
}

/// `kappa_crit = 4R`
pub fn critical_coupling(rabi: f64) -> f64 {
    4.0 * rabi
}

/// `kappa^2 - 16 R^2`, factored to keep precision near criticality.
fn discriminant(rabi: f64, kappa: f64) -> f64 {
    let crit = critical_coupling(rabi);
    (kappa - crit) * (kappa + crit)
}

pub fn mode_rates(rabi: f64, kappa: f64) -> ModeRates {
    let regime = regime_classify(rabi, kappa);
    let quarter = kappa / 4.0;
    let disc = discriminant(rabi, kappa);
    let (lambda_fast, lambda_slow) = if disc >= 0.0 {
        let s = disc.sqrt() / 4.0;
        // (kappa/4)^2 - s^2 = R^2, so the slow rate avoids cancellation as
        // -R^2 / (kappa/4 + s)
        let slow = if quarter + s > 0.0 { -rabi * rabi / (quarter + s) } else { 0.0 };
        (C64::new(-quarter - s, 0.0), C64::new(slow, 0.0))
    } else {
        let w = (-disc).sqrt() / 4.0;
        (C64::new(-quarter, -w), C64::new(-quarter, w))
    };
    ModeRates { lambda_fast, lambda_slow, regime }
}

/// `-Re(lambda_slow)`: `kappa/4` up to `4R`, `(kappa - sqrt(kappa^2 - 16R^2))/4`
/// beyond.
pub fn slow_decay_rate(rabi: f64, kappa: f64) -> f64 {
    mode_rates(rabi, kappa).slow_rate()
}

fn check_args(rabi: f64, kappa: f64) -> Result<()> {
    if !(rabi.is_finite() && rabi > 0.0) {
        return Err(Error::invalid(format!("Rabi frequency must be > 0, got {rabi}")));
    }
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::invalid(format!("kappa must be >= 0, got {kappa}")));
    }
    Ok(())
}

/// `rho_pm(t)` for the symmetric initial condition.
///
/// Outside the critical band this evaluates
///
/// ```text
/// rho_pm = (k + D)/(4D) e^{l+ t} - (k - D)/(4D) e^{l- t} - iR/D (e^{l+ t} - e^{l- t})
/// ```
///
/// with `D = sqrt(k^2 - 16R^2)` on the principal branch (imaginary below
/// `4R`) and `l+- = -k/4 +- D/4`. Inside the band it uses the degenerate
/// limit `e^{-kt/4} (1/2 + (t/2)(k/4 - iR))`, which at `k = 4R` is
/// `e^{-Rt} (1/2 + (Rt/2)(1 - i))`.
pub fn coherence_closed_form(t: f64, rabi: f64, kappa: f64) -> Result<C64> {
    check_args(rabi, kappa)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("time must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(C64::new(0.5, 0.0));
    }

    let rates = mode_rates(rabi, kappa);
    if rates.regime == Regime::Critical {
        let quarter = kappa / 4.0;
        let envelope = (-quarter * t).exp();
        return Ok((C64::new(0.5, 0.0) + C64::new(quarter, -rabi) * (0.5 * t)) * envelope);
    }

    let d = Complex64::new(discriminant(rabi, kappa), 0.0).sqrt();
    // l+ pairs with +D: slow for real D, and +i|D|/4 for imaginary D
    let (l_plus, l_minus) = (rates.lambda_slow, rates.lambda_fast);
    let e_plus = (l_plus * t).exp();
    let e_minus = (l_minus * t).exp();
    let c_plus = (d + kappa) / (d * 4.0);
    let c_minus = (-d + kappa) / (d * 4.0);
    let c_mix = C64::new(0.0, rabi) / d;
    Ok(c_plus * e_plus - c_minus * e_minus - c_mix * (e_plus - e_minus))
}

/// `rho_mp(t) = conj(rho_pm(t))`
pub fn coherence_mp_closed_form(t: f64, rabi: f64, kappa: f64) -> Result<C64> {
    coherence_closed_form(t, rabi, kappa).map(|z| z.conj())
}

/// `(rho_pp(t), rho_mm(t))`; both stay at 1/2 for the symmetric start.
pub fn populations_closed_form(t: f64) -> Result<(f64, f64)> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("time must be finite and >= 0, got {t}")));
    }
    Ok((0.5, 0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimescaleBranch {
    BelowCritical,
    AboveCritical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimescaleReport {
    pub kappa: f64,
    pub t_dec: f64,
    pub branch: TimescaleBranch,
}

/// Coherence lifetime: `4/kappa` up to `4R`, `4/(kappa - sqrt(kappa^2 - 16R^2))`
/// beyond. Both branches give `1/R` at `kappa = 4R`.
pub fn decoherence_timescale(rabi: f64, kappa: f64) -> Result<TimescaleReport> {
    check_args(rabi, kappa)?;
    if kappa == 0.0 {
        return Err(Error::invalid("decoherence timescale is infinite at kappa = 0"));
    }
    let crit = critical_coupling(rabi);
    if kappa <= crit {
        Ok(TimescaleReport { kappa, t_dec: 4.0 / kappa, branch: TimescaleBranch::BelowCritical })
    } else {
        // 4 / (k - sqrt(k^2 - 16R^2)) = (k + sqrt(k^2 - 16R^2)) / (4 R^2)
        let t_dec = (kappa + discriminant(rabi, kappa).sqrt()) / (4.0 * rabi * rabi);
        Ok(TimescaleReport { kappa, t_dec, branch: TimescaleBranch::AboveCritical })
    }
}
