use gwdiv_core::analytic::{validate_sweep, LinkScenario, SweepAxis};

use crate::error::CliError;
use crate::{AxisArg, Range};

pub fn axis_of(a: AxisArg) -> SweepAxis {
    match a {
        AxisArg::Margin => SweepAxis::MarginDb,
        AxisArg::CsSnr => SweepAxis::ClearSkySnrDb,
        AxisArg::Distance => SweepAxis::DistanceKm,
        AxisArg::Theta => SweepAxis::ThetaDb,
        AxisArg::Rho => SweepAxis::Rho,
    }
}

fn default_range(axis: SweepAxis, s: &LinkScenario) -> (f64, f64, f64) {
    match axis {
        SweepAxis::MarginDb => (2.0, 24.0, 2.0),
        SweepAxis::ClearSkySnrDb => (12.0, 44.0, 2.0),
        SweepAxis::DistanceKm => (10.0, 200.0, 10.0),
        SweepAxis::ThetaDb => (s.outage_thresh_db - 6.0, s.outage_thresh_db + 6.0, 0.5),
        SweepAxis::Rho => (0.0, 0.95, 0.05),
    }
}

/// Inclusive arithmetic progression; an empty progression is an error.
pub fn progression(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) || step == 0.0 {
        return Err(CliError::Config(format!(
            "invalid sweep range {from}..{to} step {step}"
        )));
    }
    let span = (to - from) / step;
    if span < -1e-9 {
        return Err(CliError::Config(format!(
            "empty sweep range {from}..{to} step {step}"
        )));
    }
    let n = (span + 1e-9).floor() as usize + 1;
    if n > 100_000 {
        return Err(CliError::Config(format!("sweep of {n} points is too long")));
    }
    // Snap to a 1e-9 grid so 0.1-steps print cleanly.
    Ok((0..n)
        .map(|i| ((from + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

pub fn resolve(range: &Range, axis: SweepAxis, base: &LinkScenario) -> Result<Vec<f64>, CliError> {
    let values = match (&range.values, range.from, range.to, range.step) {
        (Some(v), _, _, _) => v.clone(),
        (None, Some(a), Some(b), Some(h)) => progression(a, b, h)?,
        (None, None, None, None) => {
            let (a, b, h) = default_range(axis, base);
            progression(a, b, h)?
        }
        _ => {
            return Err(CliError::Config(
                "--from, --to and --step must be given together".into(),
            ))
        }
    };
    validate_sweep(&values)?;
    Ok(values)
}
