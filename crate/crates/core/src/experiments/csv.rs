//! Plain CSV for trajectories and sweeps.
//!
//! Every file starts with one `#` comment line stating units, then a fixed
//! header. Floats are written in scientific notation with 17 significant
//! digits, which round-trips `f64` exactly. Missing values are `NaN`, an
//! infinite timescale is `inf`.

use std::io::Write;

use super::sweep::{SweepPoint, SweepResult};
use crate::analytic::Regime;
use crate::cxmat::C64;
use crate::dynamics::{CoherenceTrajectory, Source};
use crate::error::{Error, Result};

pub const UNITS_COMMENT: &str = "# units: t and t_dec in us; kappa and rates in rad/us (hbar = 1); rho entries dimensionless";
pub const TRAJECTORY_HEADER: &str = "t,re_rho_pm,im_rho_pm,abs_rho_pm,rho_pp,rho_mm,source";
pub const SWEEP_HEADER: &str = "kappa,regime,slow_rate_analytic,slow_rate_fitted,fast_rate_analytic,t_dec";

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn emit_trajectory_csv<W: Write>(traj: &CoherenceTrajectory, mut out: W) -> Result<()> {
    traj.validate()?;
    let mut buf = String::with_capacity(64 * (traj.len() + 2));
    buf.push_str(UNITS_COMMENT);
    buf.push('\n');
    buf.push_str(TRAJECTORY_HEADER);
    buf.push('\n');
    let source = traj.source.as_str();
    for k in 0..traj.len() {
        let z = traj.rho_pm[k];
        let fields = [traj.t[k], z.re, z.im, z.norm(), traj.rho_pp[k], traj.rho_mm[k]];
        for x in fields {
            buf.push_str(&format_float(x));
            buf.push(',');
        }
        buf.push_str(source);
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn emit_sweep_csv<W: Write>(sweep: &SweepResult, mut out: W) -> Result<()> {
    let mut buf = String::with_capacity(96 * (sweep.points.len() + 2));
    buf.push_str(UNITS_COMMENT);
    buf.push('\n');
    buf.push_str(SWEEP_HEADER);
    buf.push('\n');
    for p in &sweep.points {
        let row = [
            format_float(p.kappa),
            p.regime.as_str().to_string(),
            format_float(p.slow_rate_analytic),
            format_float(p.slow_rate_fitted.unwrap_or(f64::NAN)),
            format_float(p.fast_rate_analytic),
            format_float(p.t_dec.unwrap_or(f64::INFINITY)),
        ];
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    out.flush()?;
    Ok(())
}

/// Data lines after the comment block and header, with 1-based line numbers.
fn data_lines<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)));
    loop {
        match lines.next() {
            Some((_, l)) if l.starts_with('#') => continue,
            Some((_, l)) if l == header => break,
            Some((i, l)) => {
                return Err(Error::invalid(format!("line {i}: expected header {header:?}, found {l:?}")))
            }
            None => return Err(Error::invalid("missing CSV header")),
        }
    }
    Ok(lines.filter(|(_, l)| !l.is_empty()))
}

fn parse_f64(field: &str, line: usize, name: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::invalid(format!("line {line}: bad {name} value {field:?}: {e}")))
}

fn split_fields<'a>(line: &'a str, n: usize, lineno: usize) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != n {
        return Err(Error::invalid(format!("line {lineno}: expected {n} fields, found {}", fields.len())));
    }
    Ok(fields)
}

pub fn parse_trajectory_csv(text: &str) -> Result<CoherenceTrajectory> {
    let mut traj: Option<CoherenceTrajectory> = None;
    for (lineno, line) in data_lines(text, TRAJECTORY_HEADER)? {
        let f = split_fields(line, 7, lineno)?;
        let source: Source = f[6].trim().parse()?;
        let traj = traj.get_or_insert_with(|| CoherenceTrajectory::empty(source));
        if traj.source != source {
            return Err(Error::invalid(format!("line {lineno}: mixed trajectory sources")));
        }
        traj.t.push(parse_f64(f[0], lineno, "t")?);
        traj.rho_pm.push(C64::new(parse_f64(f[1], lineno, "re_rho_pm")?, parse_f64(f[2], lineno, "im_rho_pm")?));
        parse_f64(f[3], lineno, "abs_rho_pm")?;
        traj.rho_pp.push(parse_f64(f[4], lineno, "rho_pp")?);
        traj.rho_mm.push(parse_f64(f[5], lineno, "rho_mm")?);
    }
    // an empty file carries no source; call it analytic
    let traj = traj.unwrap_or_else(|| CoherenceTrajectory::empty(Source::Analytic));
    traj.validate()?;
    Ok(traj)
}

/// Parses a sweep file. The Rabi frequency is not stored in the file, so the
/// result carries `rabi = NaN`.
pub fn parse_sweep_csv(text: &str) -> Result<SweepResult> {
    let mut points = Vec::new();
    for (lineno, line) in data_lines(text, SWEEP_HEADER)? {
        let f = split_fields(line, 6, lineno)?;
        let regime: Regime = f[1].trim().parse()?;
        let fitted = parse_f64(f[3], lineno, "slow_rate_fitted")?;
        let t_dec = parse_f64(f[5], lineno, "t_dec")?;
        points.push(SweepPoint {
            kappa: parse_f64(f[0], lineno, "kappa")?,
            regime,
            slow_rate_analytic: parse_f64(f[2], lineno, "slow_rate_analytic")?,
            slow_rate_fitted: (!fitted.is_nan()).then_some(fitted),
            fast_rate_analytic: parse_f64(f[4], lineno, "fast_rate_analytic")?,
            t_dec: t_dec.is_finite().then_some(t_dec),
            note: None,
        });
    }
    Ok(SweepResult { rabi: f64::NAN, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{analytic_trajectory, sweep_kappa, SweepOptions};
    use proptest::prelude::*;

    fn emit(traj: &CoherenceTrajectory) -> String {
        let mut buf = Vec::new();
        emit_trajectory_csv(traj, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    fn data_line_count(s: &str) -> usize {
        s.lines().filter(|l| !l.starts_with('#')).count()
    }

    #[test]
    fn empty_trajectory_is_header_only() {
        let s = emit(&CoherenceTrajectory::empty(Source::Analytic));
        assert_eq!(data_line_count(&s), 1);
        assert!(s.starts_with("# "));
        assert!(s.ends_with(&format!("{TRAJECTORY_HEADER}\n")));
    }

    #[test]
    fn three_samples_give_four_lines() {
        let traj = analytic_trajectory(100.0, 50.0, 0.01, 3).unwrap();
        let s = emit(&traj);
        assert_eq!(data_line_count(&s), 4);
        assert!(!s.contains('\r'));
    }

    #[test]
    fn trajectory_round_trips_bit_exact() {
        let traj = analytic_trajectory(100.0, 330.0, 0.1, 257).unwrap();
        let back = parse_trajectory_csv(&emit(&traj)).unwrap();
        assert_eq!(back, traj);
    }

    #[test]
    fn sweep_round_trips() {
        let sweep = sweep_kappa(100.0, &[0.0, 100.0, 400.0, 900.0], 0.1, 200, &SweepOptions::default()).unwrap();
        let mut buf = Vec::new();
        emit_sweep_csv(&sweep, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(",critical,"));
        let back = parse_sweep_csv(&text).unwrap();
        for (a, b) in sweep.points.iter().zip(&back.points) {
            assert_eq!(a.kappa, b.kappa);
            assert_eq!(a.regime, b.regime);
            assert_eq!(a.slow_rate_analytic.to_bits(), b.slow_rate_analytic.to_bits());
            assert_eq!(a.slow_rate_fitted.map(f64::to_bits), b.slow_rate_fitted.map(f64::to_bits));
            assert_eq!(a.t_dec, b.t_dec);
        }
    }

    #[test]
    fn parser_rejects_malformed_input() {
        assert!(parse_trajectory_csv("").is_err());
        assert!(parse_trajectory_csv("t,x\n").is_err());
        let bad_row = format!("{TRAJECTORY_HEADER}\n1,2,3\n");
        assert!(parse_trajectory_csv(&bad_row).is_err());
        let bad_source = format!("{TRAJECTORY_HEADER}\n0,0.5,0,0.5,0.5,0.5,quantum\n");
        assert!(parse_trajectory_csv(&bad_source).is_err());
        let bad_num = format!("{TRAJECTORY_HEADER}\n0,zz,0,0.5,0.5,0.5,analytic\n");
        assert!(parse_trajectory_csv(&bad_num).is_err());
        let bad_regime = format!("{SWEEP_HEADER}\n1,wobbly,1,1,1,1\n");
        assert!(parse_sweep_csv(&bad_regime).is_err());
    }

    proptest! {
        #[test]
        fn floats_round_trip_at_17_digits(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let back: f64 = format_float(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
