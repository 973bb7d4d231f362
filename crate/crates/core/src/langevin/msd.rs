use serde::{Deserialize, Serialize};

use super::TrajectoryRecord;
use crate::stats::{weighted_least_squares, EnsembleStats};
use crate::units::{HBAR, KB};
use crate::{Error, Result};

/// Common record spacing and the index of the first post-burn-in sample.
fn layout(records: &[TrajectoryRecord], burn_in: f64) -> Result<(f64, usize, usize)> {
    let first = records
        .first()
        .ok_or_else(|| Error::InsufficientData("no trajectories".into()))?;
    let spacing = first
        .spacing()
        .ok_or_else(|| Error::InsufficientData("trajectories need at least two samples".into()))?;
    let len = first.len();
    for r in records {
        if r.len() != len || (r.spacing().unwrap_or(0.0) - spacing).abs() > 1e-9 * spacing {
            return Err(Error::Dimension("trajectories must share one time grid".into()));
        }
    }
    if !(burn_in >= 0.0) {
        return Err(Error::param("burn_in", "must be >= 0"));
    }
    let start = (burn_in / spacing - 1e-9).ceil().max(0.0) as usize;
    Ok((spacing, start, len))
}

fn lag_indices(tau_grid: &[f64], spacing: f64) -> Result<Vec<usize>> {
    if tau_grid.is_empty() {
        return Err(Error::param("tau_grid", "need at least one lag"));
    }
    tau_grid
        .iter()
        .map(|&tau| {
            let k = (tau / spacing).round();
            if tau < 0.0 || (k * spacing - tau).abs() > 1e-6 * spacing.max(tau) {
                Err(Error::param(
                    "tau_grid",
                    format!("lag {tau} is not a non-negative multiple of the record spacing {spacing}"),
                ))
            } else {
                Ok(k as usize)
            }
        })
        .collect()
}

/// Per-record time averages of `pair(a, b)` at each lag, then mean and
/// standard error across records.
fn lagged_average(
    records: &[TrajectoryRecord],
    tau_grid: &[f64],
    burn_in: f64,
    series: impl Fn(&TrajectoryRecord) -> &[f64],
    pair: impl Fn(f64, f64) -> f64,
) -> Result<Vec<EnsembleStats>> {
    let (spacing, start, len) = layout(records, burn_in)?;
    let lags = lag_indices(tau_grid, spacing)?;
    let max_lag = *lags.iter().max().unwrap();
    if start + max_lag >= len {
        return Err(Error::InsufficientData(format!(
            "{} samples after burn-in cannot cover a lag of {max_lag} samples",
            len.saturating_sub(start)
        )));
    }
    Ok(lags
        .iter()
        .map(|&k| {
            let per_record: Vec<f64> = records
                .iter()
                .map(|r| {
                    let s = series(r);
                    let count = len - start - k;
                    (start..len - k).map(|i| pair(s[i + k], s[i])).sum::<f64>() / count as f64
                })
                .collect();
            EnsembleStats::from_samples(&per_record)
        })
        .collect())
}

/// Time- and ensemble-averaged `<(x(t + tau) - x(t))^2>` over stationary
/// samples (`t - t0 >= burn_in`). Every lag must be a multiple of the record
/// spacing; standard errors come from the spread across records.
pub fn ensemble_msd(records: &[TrajectoryRecord], tau_grid: &[f64], burn_in: f64) -> Result<Vec<EnsembleStats>> {
    lagged_average(records, tau_grid, burn_in, |r| &r.positions, |a, b| (a - b) * (a - b))
}

/// Velocity autocorrelation `<v(t + tau) v(t)>`, same conventions as
/// [`ensemble_msd`].
pub fn ensemble_vacf(records: &[TrajectoryRecord], tau_grid: &[f64], burn_in: f64) -> Result<Vec<EnsembleStats>> {
    lagged_average(records, tau_grid, burn_in, |r| &r.velocities, |a, b| a * b)
}

/// Stationary `<v^2>`.
pub fn velocity_variance(records: &[TrajectoryRecord], burn_in: f64) -> Result<EnsembleStats> {
    let mut v = ensemble_vacf(records, &[0.0], burn_in)?;
    Ok(v.remove(0))
}

/// Result of fitting `MSD(tau) = c + 2 D tau + B tau^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionFit {
    pub diffusion: f64,
    pub diffusion_err: f64,
    pub quadratic: f64,
    pub quadratic_err: f64,
    /// Absorbs the ballistic-to-diffusive offset `-2 D / Gamma`.
    pub intercept: f64,
    pub intercept_err: f64,
    pub n_points: usize,
}

/// Weighted least-squares fit of the MSD on lags inside `fit_window`.
///
/// Weights are `1 / std_error^2`; if any point in the window has zero error
/// (synthetic input) all points get unit weight.
pub fn estimate_diffusion(tau_grid: &[f64], msd: &[EnsembleStats], fit_window: (f64, f64)) -> Result<DiffusionFit> {
    if tau_grid.len() != msd.len() {
        return Err(Error::Dimension(format!(
            "{} lags for {} MSD values",
            tau_grid.len(),
            msd.len()
        )));
    }
    let (lo, hi) = fit_window;
    if !(hi > lo) {
        return Err(Error::param("fit_window", "upper edge must exceed lower edge"));
    }
    let chosen: Vec<usize> = (0..tau_grid.len())
        .filter(|&i| tau_grid[i] >= lo && tau_grid[i] <= hi)
        .collect();
    let exact = chosen.iter().any(|&i| msd[i].std_error == 0.0);
    let rows: Vec<Vec<f64>> = chosen
        .iter()
        .map(|&i| vec![1.0, 2.0 * tau_grid[i], tau_grid[i] * tau_grid[i]])
        .collect();
    let y: Vec<f64> = chosen.iter().map(|&i| msd[i].mean).collect();
    let w: Vec<f64> = chosen
        .iter()
        .map(|&i| if exact { 1.0 } else { msd[i].std_error.powi(-2) })
        .collect();
    if rows.len() < 3 {
        return Err(Error::SingularFit(format!("{} lags in the fit window", rows.len())));
    }
    let (beta, err) = weighted_least_squares(&rows, &y, &w)?;
    Ok(DiffusionFit {
        intercept: beta[0],
        intercept_err: err[0],
        diffusion: beta[1],
        diffusion_err: err[1],
        quadratic: beta[2],
        quadratic_err: err[2],
        n_points: rows.len(),
    })
}

/// Which term dominates the MSD at lag `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadingRegime {
    /// `2 D tau` dominates: `hbar omega_c` small against `sqrt(kB T hbar / tau)`.
    Diffusive,
    /// The zero-point `B tau^2` term dominates.
    LinearSpreading,
}

/// Regime at lag `tau` together with `hbar omega_c / sqrt(kB T hbar / tau)`.
///
/// With `D = kB T / (m Gamma)` and `B = hbar omega_c^2 / (2 pi m Gamma)` the
/// two MSD terms balance where that ratio equals `sqrt(4 pi)`.
pub fn spreading_regime(omega_c: f64, temperature: f64, tau: f64) -> (SpreadingRegime, f64) {
    let ratio = HBAR * omega_c / (KB * temperature * HBAR / tau).sqrt();
    let regime = if ratio * ratio < 4.0 * std::f64::consts::PI {
        SpreadingRegime::Diffusive
    } else {
        SpreadingRegime::LinearSpreading
    };
    (regime, ratio)
}
