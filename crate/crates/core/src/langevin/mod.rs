//! Tagged-particle dynamics: the generalized Langevin equation driven by the
//! pilot-wave bath force, its Markovian limit, and the statistics built on
//! ensembles of trajectories.

mod gle;
mod gold;
mod markov;
mod msd;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::potential::{PotentialSpec, QuantumPotentialSpec};
use crate::rng::{map_chunks, StreamRng};
use crate::time::step_count;
use crate::units::{HBAR, KB};
use crate::{Error, Result};

pub use gle::integrate_gle;
pub use gold::{gold_case, GoldCase};
pub use markov::{integrate_markovian, NoiseSource};
pub use msd::{
    ensemble_msd, ensemble_vacf, estimate_diffusion, spreading_regime, velocity_variance, DiffusionFit, SpreadingRegime,
};

/// How the memory integral of the GLE is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryMethod {
    /// Auxiliary variable for Lorentzian baths, history otherwise.
    #[default]
    Auto,
    /// One auxiliary state `z' = -omega_c z + omega_c Gamma v` carrying the
    /// continuum exponential kernel.
    Auxiliary,
    /// Trapezoid convolution with the bath's own discrete kernel.
    History,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GleConfig {
    pub mass: f64,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub q_s: QuantumPotentialSpec,
    /// Friction rate of the Markovian equation. The GLE takes its friction
    /// from the bath kernel instead.
    pub gamma0: f64,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub x0: f64,
    pub v0: f64,
    /// Include `-m gamma(t - t0) x(t0)`.
    pub slip_term: bool,
    #[serde(default)]
    pub memory: MemoryMethod,
    /// Store every `record_every`-th step.
    pub record_every: usize,
}

impl Default for GleConfig {
    fn default() -> Self {
        GleConfig {
            mass: 1.0,
            potential: PotentialSpec::Free,
            q_s: QuantumPotentialSpec::None,
            gamma0: 1.0,
            t0: 0.0,
            t_end: 10.0,
            dt: 1e-3,
            x0: 0.0,
            v0: 0.0,
            slip_term: true,
            memory: MemoryMethod::Auto,
            record_every: 1,
        }
    }
}

impl GleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::param("mass", "must be positive and finite"));
        }
        if !(self.gamma0 >= 0.0 && self.gamma0.is_finite()) {
            return Err(Error::param("gamma0", "must be >= 0 and finite"));
        }
        if !(self.x0.is_finite() && self.v0.is_finite() && self.t0.is_finite()) {
            return Err(Error::param("x0", "initial conditions must be finite"));
        }
        if self.record_every == 0 {
            return Err(Error::param("record_every", "must be >= 1"));
        }
        self.potential.validate()?;
        self.steps().map(|_| ())
    }

    pub(crate) fn steps(&self) -> Result<usize> {
        step_count(self.t0, self.t_end, self.dt)
    }

    /// Deterministic force `-grad(V + Q_S)`.
    pub(crate) fn system_force(&self, x: f64, t: f64) -> f64 {
        -self.potential.gradient(x) + self.q_s.force(x, t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    /// `F'` at each stored time.
    pub force_samples: Vec<f64>,
    /// End of the interval free of bath recurrences.
    pub window_valid_until: f64,
}

impl TrajectoryRecord {
    pub(crate) fn with_capacity(n: usize, window_valid_until: f64) -> Self {
        TrajectoryRecord {
            times: Vec::with_capacity(n),
            positions: Vec::with_capacity(n),
            velocities: Vec::with_capacity(n),
            force_samples: Vec::with_capacity(n),
            window_valid_until,
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: f64, v: f64, f: f64) {
        self.times.push(t);
        self.positions.push(x);
        self.velocities.push(v);
        self.force_samples.push(f);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Spacing of the stored times.
    pub fn spacing(&self) -> Option<f64> {
        (self.times.len() >= 2).then(|| self.times[1] - self.times[0])
    }
}

/// `T (1 + (hbar omega_c / kB T) (omega_c / (2 pi Gamma)))`: the temperature
/// read off the stationary velocity variance once the zero-point force floor
/// is included.
pub fn effective_temperature(temperature: f64, omega_c: f64, gamma0: f64) -> f64 {
    temperature * (1.0 + HBAR * omega_c / (KB * temperature) * omega_c / (2.0 * std::f64::consts::PI * gamma0))
}

/// Run `n` independent realizations in parallel. Realization `i` receives
/// the RNG of its chunk; output order and content do not depend on the
/// number of worker threads.
pub fn run_ensemble<F>(n: usize, seed: u64, realize: F) -> Result<Vec<TrajectoryRecord>>
where
    F: Fn(&mut StreamRng, usize) -> Result<TrajectoryRecord> + Sync,
{
    if n == 0 {
        return Err(Error::param("n_realizations", "need at least one realization"));
    }
    let parts = map_chunks(n, seed, |rng, range| {
        range.map(|i| realize(rng, i)).collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(n);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Warn when `t_end` exceeds the recurrence window. Repeats for the same
/// window (e.g. every member of an ensemble) are logged at debug level.
pub(crate) fn warn_past_window(t_end: f64, window: f64) {
    static LAST: AtomicU64 = AtomicU64::new(0);
    if t_end > window {
        if LAST.swap(window.to_bits(), Ordering::Relaxed) != window.to_bits() {
            log::warn!("integration to t = {t_end} runs past the bath recurrence window ending at {window}");
        } else {
            log::debug!("integration to t = {t_end} runs past the bath recurrence window ending at {window}");
        }
    }
}
