//! Caldeira-Leggett oscillator bath.
//!
//! The bath is a finite set of oscillators `(m_n, omega_n, c_n)` bilinearly
//! coupled to the tagged particle of mass `m`. It enters the particle's
//! equation of motion through the memory kernel
//! `gamma(tau) = (1/m) sum_n c_n^2 / (m_n omega_n^2) cos(omega_n tau)` and
//! through the fluctuating force `F'(t) = sum_n c_n x_n(t)` built from the
//! Bohmian trajectories of the bath modes.

mod force;
mod io;
mod microscopic;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::units::HBAR;
use crate::{Error, Result};

pub use force::{bath_force, CoherentSample, PreparedForce};
pub use io::{bath_to_toml, read_bath, write_bath, write_kernel_csv};
pub use microscopic::{integrate_full_microscopic, microscopic_energy, BathState, MicroscopicTrajectory};

/// Default upper frequency for Lorentzian baths, in units of the cutoff.
pub const DEFAULT_FREQ_MAX_RATIO: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffShape {
    /// `g(omega) = 2 Gamma / pi` on `[0, omega_c]`.
    Sharp,
    /// `g(omega) = (2 Gamma / pi) omega_c^2 / (omega^2 + omega_c^2)`, giving
    /// `gamma(tau) = omega_c Gamma exp(-omega_c |tau|)` in the continuum.
    Lorentzian,
}

impl std::str::FromStr for CutoffShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sharp" => Ok(CutoffShape::Sharp),
            "lorentzian" => Ok(CutoffShape::Lorentzian),
            other => Err(Error::param(
                "cutoff_shape",
                format!("unknown shape `{other}` (expected `sharp` or `lorentzian`)"),
            )),
        }
    }
}

impl std::fmt::Display for CutoffShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CutoffShape::Sharp => "sharp",
            CutoffShape::Lorentzian => "lorentzian",
        })
    }
}

/// Discretized bath together with the continuum parameters it approximates.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    /// Mass `m` of the tagged particle the kernel is normalized to.
    pub system_mass: f64,
    pub mode_mass: Vec<f64>,
    pub mode_freq: Vec<f64>,
    pub coupling: Vec<f64>,
    /// Friction rate `Gamma`.
    pub gamma0: f64,
    /// Cutoff frequency `omega_c`.
    pub cutoff: f64,
    pub cutoff_shape: CutoffShape,
    /// Upper edge of the frequency grid.
    pub freq_max: f64,
    /// Grid spacing; sets the recurrence time `2 pi / delta_omega`.
    pub delta_omega: f64,
}

/// Continuum spectral density `g(omega)` of the Ohmic model.
pub fn spectral_density(shape: CutoffShape, gamma0: f64, cutoff: f64, omega: f64) -> f64 {
    let flat = 2.0 * gamma0 / PI;
    match shape {
        CutoffShape::Sharp => {
            if omega <= cutoff {
                flat
            } else {
                0.0
            }
        }
        CutoffShape::Lorentzian => flat * cutoff * cutoff / (omega * omega + cutoff * cutoff),
    }
}

/// Continuum memory kernel the discretization converges to.
///
/// Sharp cutoff: `2 Gamma sin(omega_c tau) / (pi tau)`; Lorentzian:
/// `omega_c Gamma exp(-omega_c |tau|)` (the infinite-band limit).
pub fn continuum_kernel(shape: CutoffShape, gamma0: f64, cutoff: f64, tau: f64) -> f64 {
    match shape {
        CutoffShape::Sharp => {
            let x = cutoff * tau;
            if x.abs() < 1e-8 {
                2.0 * gamma0 * cutoff / PI
            } else {
                2.0 * gamma0 * x.sin() / (PI * tau)
            }
        }
        CutoffShape::Lorentzian => cutoff * gamma0 * (-cutoff * tau.abs()).exp(),
    }
}

/// Discretize the Ohmic bath on a midpoint grid `omega_n = (n - 1/2) d_omega`
/// with `c_n^2 = m m_n omega_n^2 g(omega_n) d_omega` and unit mode masses.
///
/// The grid spans `[0, omega_c]` for the sharp cutoff and `[0, freq_max]`
/// for the Lorentzian one. `gamma0 = 0` gives a decoupled bath.
pub fn discretize_ohmic(
    gamma0: f64,
    cutoff: f64,
    n_modes: usize,
    cutoff_shape: CutoffShape,
    freq_max: f64,
) -> Result<BathSpec> {
    discretize_ohmic_with_mass(1.0, gamma0, cutoff, n_modes, cutoff_shape, freq_max)
}

pub fn discretize_ohmic_with_mass(
    system_mass: f64,
    gamma0: f64,
    cutoff: f64,
    n_modes: usize,
    cutoff_shape: CutoffShape,
    freq_max: f64,
) -> Result<BathSpec> {
    if !(gamma0 >= 0.0 && gamma0.is_finite()) {
        return Err(Error::param("gamma0", "friction rate must be >= 0 and finite"));
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::param("cutoff", "cutoff frequency must be positive and finite"));
    }
    if n_modes == 0 {
        return Err(Error::param("n_modes", "need at least one mode"));
    }
    if !(freq_max >= cutoff && freq_max.is_finite()) {
        return Err(Error::param("freq_max", format!("must be >= cutoff ({cutoff})")));
    }
    if !(system_mass > 0.0 && system_mass.is_finite()) {
        return Err(Error::param("mass", "must be positive and finite"));
    }
    let band = match cutoff_shape {
        CutoffShape::Sharp => cutoff,
        CutoffShape::Lorentzian => freq_max,
    };
    let d_omega = band / n_modes as f64;
    let mode_freq: Vec<f64> = (0..n_modes).map(|n| (n as f64 + 0.5) * d_omega).collect();
    let mode_mass = vec![1.0; n_modes];
    let coupling = mode_freq
        .iter()
        .zip(&mode_mass)
        .map(|(&w, &mn)| {
            let g = spectral_density(cutoff_shape, gamma0, cutoff, w);
            (system_mass * mn * w * w * g * d_omega).sqrt()
        })
        .collect();
    Ok(BathSpec {
        system_mass,
        mode_mass,
        mode_freq,
        coupling,
        gamma0,
        cutoff,
        cutoff_shape,
        freq_max,
        delta_omega: d_omega,
    })
}

impl BathSpec {
    /// Bath from explicit mode lists.
    #[allow(clippy::too_many_arguments)]
    pub fn from_modes(
        system_mass: f64,
        mode_mass: Vec<f64>,
        mode_freq: Vec<f64>,
        coupling: Vec<f64>,
        gamma0: f64,
        cutoff: f64,
        cutoff_shape: CutoffShape,
        delta_omega: f64,
    ) -> Result<Self> {
        let freq_max = mode_freq.iter().copied().fold(cutoff, f64::max);
        let spec = BathSpec {
            system_mass,
            mode_mass,
            mode_freq,
            coupling,
            gamma0,
            cutoff,
            cutoff_shape,
            freq_max,
            delta_omega,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mode_freq.len();
        if n == 0 {
            return Err(Error::param("n_modes", "need at least one mode"));
        }
        if self.mode_mass.len() != n || self.coupling.len() != n {
            return Err(Error::Dimension(format!(
                "bath arrays have lengths {} (mass), {} (freq), {} (coupling)",
                self.mode_mass.len(),
                n,
                self.coupling.len()
            )));
        }
        if self.mode_freq.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::param("mode_freq", "all frequencies must be positive and finite"));
        }
        if self.mode_mass.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::param("mode_mass", "all masses must be positive and finite"));
        }
        if self.coupling.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("coupling", "couplings must be finite"));
        }
        if !(self.system_mass > 0.0 && self.system_mass.is_finite()) {
            return Err(Error::param("mass", "must be positive and finite"));
        }
        if !self.memory_kernel(0.0).is_finite() {
            return Err(Error::param("coupling", "kernel at zero lag is not finite"));
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        self.mode_freq.len()
    }

    pub fn max_freq(&self) -> f64 {
        self.mode_freq.iter().copied().fold(0.0, f64::max)
    }

    /// Kernel weights `c_n^2 / (m m_n omega_n^2)`.
    pub fn kernel_weights(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.system_mass;
        self.coupling
            .iter()
            .zip(&self.mode_mass)
            .zip(&self.mode_freq)
            .map(move |((c, mn), w)| c * c / (m * mn * w * w))
    }

    /// `gamma(tau) = (1/m) sum_n c_n^2 / (m_n omega_n^2) cos(omega_n tau)`.
    pub fn memory_kernel(&self, tau: f64) -> f64 {
        self.kernel_weights()
            .zip(&self.mode_freq)
            .map(|(k, w)| k * (w * tau).cos())
            .sum()
    }

    /// Kernel tabulated at `tau = k * dt`, `k = 0..len`.
    pub fn kernel_table(&self, dt: f64, len: usize) -> Vec<f64> {
        (0..len).map(|k| self.memory_kernel(k as f64 * dt)).collect()
    }

    /// Zero-point constant `A = sum_n c_n^2 / (m_n omega_n^2) * hbar omega_n / 2`.
    pub fn zpf_constant(&self) -> f64 {
        self.coupling
            .iter()
            .zip(&self.mode_mass)
            .zip(&self.mode_freq)
            .map(|((c, mn), w)| c * c / (mn * w * w) * 0.5 * HBAR * w)
            .sum()
    }

    /// Continuum value of [`Self::zpf_constant`]: `m Gamma hbar omega_c^2 / (2 pi)`
    /// for the sharp cutoff, times `ln(1 + (freq_max / omega_c)^2)` for the
    /// Lorentzian one, whose integral grows logarithmically with the band edge.
    pub fn zpf_continuum(&self) -> f64 {
        let sharp = self.system_mass * self.gamma0 * HBAR * self.cutoff * self.cutoff / (2.0 * PI);
        match self.cutoff_shape {
            CutoffShape::Sharp => sharp,
            CutoffShape::Lorentzian => sharp * (self.freq_max / self.cutoff).powi(2).ln_1p(),
        }
    }

    /// Time after which the discrete bath starts to rephase.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.delta_omega
    }

    /// Concatenate the modes of two baths.
    pub fn merge(&self, other: &BathSpec) -> Result<BathSpec> {
        if (self.system_mass - other.system_mass).abs() > 1e-12 * self.system_mass {
            return Err(Error::param("mass", "merged baths must share the system mass"));
        }
        let cat = |a: &[f64], b: &[f64]| a.iter().chain(b).copied().collect::<Vec<_>>();
        Ok(BathSpec {
            system_mass: self.system_mass,
            mode_mass: cat(&self.mode_mass, &other.mode_mass),
            mode_freq: cat(&self.mode_freq, &other.mode_freq),
            coupling: cat(&self.coupling, &other.coupling),
            gamma0: self.gamma0 + other.gamma0,
            cutoff: self.cutoff.max(other.cutoff),
            cutoff_shape: self.cutoff_shape,
            freq_max: self.freq_max.max(other.freq_max),
            delta_omega: self.delta_omega.min(other.delta_omega),
        })
    }
}

/// Free function form of [`BathSpec::memory_kernel`].
pub fn memory_kernel(spec: &BathSpec, tau: f64) -> f64 {
    spec.memory_kernel(tau)
}

/// Free function form of [`BathSpec::zpf_constant`].
pub fn zpf_constant(spec: &BathSpec) -> f64 {
    spec.zpf_constant()
}

/// Largest `|gamma_N(tau) - gamma(tau)|` over `n_points` uniform lags in
/// `[0, tau_max]`, where `gamma` is the continuum kernel.
pub fn kernel_sup_error(spec: &BathSpec, tau_max: f64, n_points: usize) -> f64 {
    (0..n_points)
        .map(|i| {
            let tau = tau_max * i as f64 / (n_points - 1).max(1) as f64;
            let exact = continuum_kernel(spec.cutoff_shape, spec.gamma0, spec.cutoff, tau);
            (spec.memory_kernel(tau) - exact).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_friction_decouples() {
        for shape in [CutoffShape::Sharp, CutoffShape::Lorentzian] {
            let spec = discretize_ohmic(0.0, 2.0, 50, shape, 60.0).unwrap();
            assert!(spec.coupling.iter().all(|&c| c == 0.0));
            assert_eq!(spec.memory_kernel(0.37), 0.0);
            assert_eq!(spec.zpf_constant(), 0.0);
        }
    }

    #[test]
    fn parameter_errors() {
        let lor = CutoffShape::Lorentzian;
        assert!(discretize_ohmic(-1.0, 1.0, 10, lor, 30.0).is_err());
        assert!(discretize_ohmic(1.0, 0.0, 10, lor, 30.0).is_err());
        assert!(discretize_ohmic(1.0, 1.0, 0, lor, 30.0).is_err());
        assert!(discretize_ohmic(1.0, 2.0, 10, lor, 1.0).is_err());
    }

    #[test]
    fn sharp_kernel_at_zero_lag() {
        // integral of 2 Gamma / pi over [0, omega_c], exact for the midpoint rule
        let spec = discretize_ohmic(0.7, 3.0, 500, CutoffShape::Sharp, 3.0).unwrap();
        assert_relative_eq!(spec.memory_kernel(0.0), 2.0 * 0.7 * 3.0 / PI, epsilon = 1e-12);
    }

    #[test]
    fn lorentzian_kernel_one_over_cutoff() {
        let spec = discretize_ohmic(1.0, 2.0, 4000, CutoffShape::Lorentzian, 120.0).unwrap();
        let expected = 2.0 * (-1.0f64).exp();
        assert!((spec.memory_kernel(0.5) - expected).abs() < 0.01 * 2.0);
    }

    #[test]
    fn sharp_zpf_matches_continuum() {
        let spec = discretize_ohmic(0.5, 4.0, 2000, CutoffShape::Sharp, 4.0).unwrap();
        assert_relative_eq!(spec.zpf_constant(), spec.zpf_continuum(), max_relative = 1e-10);
        let lor = discretize_ohmic(0.7, 2.0, 4000, CutoffShape::Lorentzian, 60.0).unwrap();
        assert_relative_eq!(lor.zpf_constant(), lor.zpf_continuum(), max_relative = 1e-5);
    }

    #[test]
    fn zpf_small_against_thermal_in_classical_regime() {
        let spec = discretize_ohmic(1.0, 1.0, 2000, CutoffShape::Sharp, 1.0).unwrap();
        let kt = 50.0; // hbar omega_c / kT = 0.02
        assert!(spec.zpf_constant() < kt * spec.system_mass * spec.memory_kernel(0.0));
    }

    #[test]
    fn lorentzian_sup_error_shrinks_with_modes() {
        let errs: Vec<f64> = [500, 1000, 2000, 4000, 8000]
            .iter()
            .map(|&n| {
                let s = discretize_ohmic(1.0, 1.0, n, CutoffShape::Lorentzian, 30.0).unwrap();
                kernel_sup_error(&s, 5.0, 501)
            })
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] * 1.001, "{errs:?}");
        }
    }

    #[test]
    fn zpf_is_additive_over_merged_modes() {
        let a = discretize_ohmic(0.3, 1.0, 40, CutoffShape::Sharp, 1.0).unwrap();
        let mut b = discretize_ohmic(0.8, 2.0, 70, CutoffShape::Lorentzian, 20.0).unwrap();
        b.system_mass = a.system_mass;
        let merged = a.merge(&b).unwrap();
        assert_relative_eq!(
            merged.zpf_constant(),
            a.zpf_constant() + b.zpf_constant(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn validate_rejects_bad_modes() {
        let mut spec = discretize_ohmic(1.0, 1.0, 5, CutoffShape::Sharp, 1.0).unwrap();
        spec.mode_freq[2] = 0.0;
        assert!(spec.validate().is_err());
        let mut spec = discretize_ohmic(1.0, 1.0, 5, CutoffShape::Sharp, 1.0).unwrap();
        spec.coupling.pop();
        assert!(matches!(spec.validate(), Err(Error::Dimension(_))));
    }

    proptest! {
        #[test]
        fn kernel_is_even(tau in -50.0f64..50.0, n in 1usize..200) {
            let spec = discretize_ohmic(1.3, 0.9, n, CutoffShape::Lorentzian, 27.0).unwrap();
            prop_assert_eq!(spec.memory_kernel(tau), spec.memory_kernel(-tau));
            prop_assert!(spec.memory_kernel(tau) <= spec.memory_kernel(0.0) + 1e-12);
        }
    }
}
