//! JSON run configuration with a closed schema.
//!
//! ```json
//! {"R": 100, "kappa": 200, "t_end": 0.1, "samples": 1000, "path": "full"}
//! {"omega": 100, "g": 50, "n": 1, "kappa_grid": [100, 200, 400]}
//! ```
//!
//! Either `R` (with optional `n`) or `g` (with optional `n`) fixes the
//! coupling; exactly one of `kappa` and `kappa_grid` must be present.

use std::path::PathBuf;

use serde::Deserialize;

use crate::analytic::{regime_classify, Regime};
use crate::error::{Error, Result};
use crate::experiments::Path;
use crate::hilbert::JCParams;

pub const DEFAULT_T_END: f64 = 0.1;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_OMEGA: f64 = 1e4;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "R")]
    rabi: Option<f64>,
    omega: Option<f64>,
    g: Option<f64>,
    n: Option<usize>,
    n_max: Option<usize>,
    kappa: Option<f64>,
    kappa_grid: Option<Vec<f64>>,
    t_end: Option<f64>,
    samples: Option<usize>,
    path: Option<Path>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    Single(f64),
    Grid(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `kappa` is the single coupling, or 0 for a grid config.
    pub params: JCParams,
    pub coupling: Coupling,
    pub t_end: f64,
    pub samples: usize,
    pub path: Path,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn rabi(&self) -> f64 {
        self.params.rabi()
    }

    /// Regime of a single-coupling config.
    pub fn regime(&self) -> Option<Regime> {
        match self.coupling {
            Coupling::Single(k) => Some(regime_classify(self.rabi(), k)),
            Coupling::Grid(_) => None,
        }
    }
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Config(format!("`{name}` must be a finite number")))
    }
}

fn coupling_value(name: &str, x: f64) -> Result<f64> {
    let x = finite(name, x)?;
    if x < 0.0 {
        return Err(Error::Config(format!("`{name}` must be >= 0, got {x}")));
    }
    Ok(x)
}

pub fn parse_config(text: &[u8]) -> Result<RunConfig> {
    let text = std::str::from_utf8(text).map_err(|e| Error::Config(format!("config is not UTF-8: {e}")))?;
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

    let n = raw.n.unwrap_or(1);
    if n == 0 {
        return Err(Error::Config("`n` must be >= 1".into()));
    }
    let omega = finite("omega", raw.omega.unwrap_or(DEFAULT_OMEGA))?;
    let g = match (raw.rabi, raw.g) {
        (Some(_), Some(_)) => return Err(Error::Config("`R` and `g` are mutually exclusive".into())),
        (Some(r), None) => {
            let r = finite("R", r)?;
            if r <= 0.0 {
                return Err(Error::Config(format!("`R` must be > 0, got {r}")));
            }
            r / (2.0 * (n as f64).sqrt())
        }
        (None, Some(g)) => finite("g", g)?,
        (None, None) => return Err(Error::Config("missing required key `R` (or `g`)".into())),
    };

    let coupling = match (raw.kappa, raw.kappa_grid) {
        (Some(_), Some(_)) => return Err(Error::Config("`kappa` and `kappa_grid` are mutually exclusive".into())),
        (Some(k), None) => Coupling::Single(coupling_value("kappa", k)?),
        (None, Some(grid)) => {
            if grid.is_empty() {
                return Err(Error::Config("`kappa_grid` must not be empty".into()));
            }
            let grid = grid.into_iter().map(|k| coupling_value("kappa_grid", k)).collect::<Result<Vec<_>>>()?;
            Coupling::Grid(grid)
        }
        (None, None) => return Err(Error::Config("missing required key `kappa` (or `kappa_grid`)".into())),
    };
    let kappa = match coupling {
        Coupling::Single(k) => k,
        Coupling::Grid(_) => 0.0,
    };

    let t_end = finite("t_end", raw.t_end.unwrap_or(DEFAULT_T_END))?;
    if t_end <= 0.0 {
        return Err(Error::Config(format!("`t_end` must be > 0, got {t_end}")));
    }
    let samples = raw.samples.unwrap_or(DEFAULT_SAMPLES);
    if samples < 2 {
        return Err(Error::Config(format!("`samples` must be >= 2, got {samples}")));
    }

    let params = JCParams::with_truncation(omega, g, n, kappa, raw.n_max.unwrap_or(n + 2))
        .map_err(|e| Error::Config(e.to_string()))?;

    Ok(RunConfig {
        params,
        coupling,
        t_end,
        samples,
        path: raw.path.unwrap_or(Path::Full),
        output_dir: raw.output_dir,
    })
}
