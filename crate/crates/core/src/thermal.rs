//! Thermal mixtures of coherent states.
//!
//! A thermal oscillator is sampled through its Glauber P-function: `|alpha|^2`
//! is exponential with mean occupation `n`, the phase `sigma` is uniform, and
//! the Bohmian particle sits at a Gaussian offset `u` (variance
//! `hbar / (2 m omega)`) from the packet center.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bath::{BathSpec, CoherentSample, PreparedForce};
use crate::coherent::CoherentState;
use crate::rng::{map_chunks, StreamRng};
use crate::stats::{Accumulator, EnsembleStats};
use crate::units::{HBAR, KB};
use crate::{Error, Result};

/// `hbar omega / kB T` above which the high-temperature picture is doubtful.
pub const HIGH_TEMPERATURE_LIMIT: f64 = 0.3;

/// Mean occupation law used for `<|alpha|^2>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occupation {
    /// `1 / (exp(hbar omega / kB T) - 1)`.
    #[default]
    Bose,
    /// `kB T / (hbar omega)`, the classical limit of the Bose law.
    HighTemperature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalSampler {
    /// `kB T`.
    pub temperature: f64,
    pub seed: u64,
    pub n_samples: usize,
    #[serde(default)]
    pub occupation: Occupation,
}

impl ThermalSampler {
    pub fn new(temperature: f64, seed: u64, n_samples: usize) -> Result<Self> {
        let s = ThermalSampler {
            temperature,
            seed,
            n_samples,
            occupation: Occupation::Bose,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_occupation(mut self, occupation: Occupation) -> Self {
        self.occupation = occupation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::param("temperature", "must be positive and finite"));
        }
        if self.n_samples == 0 {
            return Err(Error::param("n_samples", "need at least one sample"));
        }
        Ok(())
    }

    /// `hbar omega / kB T`.
    pub fn quantum_ratio(&self, omega: f64) -> f64 {
        HBAR * omega / (KB * self.temperature)
    }

    pub fn mean_occupation(&self, omega: f64) -> f64 {
        let r = self.quantum_ratio(omega);
        match self.occupation {
            Occupation::Bose => 1.0 / r.exp_m1(),
            Occupation::HighTemperature => 1.0 / r,
        }
    }

    /// Draw one thermal coherent state of the oscillator `(mass, omega)`.
    pub fn sample_mode<R: Rng + ?Sized>(&self, rng: &mut R, omega: f64, mass: f64, t0: f64) -> CoherentState {
        let n_bar = self.mean_occupation(omega);
        let e: f64 = Exp1.sample(rng);
        let sigma = rng.random::<f64>() * 2.0 * PI;
        let z: f64 = StandardNormal.sample(rng);
        CoherentState {
            mass,
            omega,
            amp0: (n_bar * e).sqrt(),
            sigma: if sigma >= 2.0 * PI { 0.0 } else { sigma },
            t0,
            offset: z * (HBAR / (2.0 * mass * omega)).sqrt(),
        }
    }

    /// Draw a full bath realization.
    pub fn sample_bath<R: Rng + ?Sized>(&self, rng: &mut R, spec: &BathSpec, t0: f64) -> CoherentSample {
        let n = spec.n_modes();
        let mut sample = CoherentSample::zeros(n, t0);
        for i in 0..n {
            let s = self.sample_mode(rng, spec.mode_freq[i], spec.mode_mass[i], t0);
            sample.amp[i] = s.amp0;
            sample.phase[i] = s.sigma;
            sample.offset[i] = s.offset;
        }
        sample
    }

    fn warn_if_cold(&self, omega_max: f64) {
        let r = self.quantum_ratio(omega_max);
        if r > HIGH_TEMPERATURE_LIMIT {
            log::warn!(
                "hbar omega / kB T = {r:.3} exceeds {HIGH_TEMPERATURE_LIMIT}; the thermal P-function picture is outside its high-temperature regime"
            );
        }
    }
}

/// Checked single draw; warns when `hbar omega / kB T > 0.3`.
pub fn sample_coherent_mode(
    sampler: &ThermalSampler,
    rng: &mut StreamRng,
    omega: f64,
    mass: f64,
    t0: f64,
) -> Result<CoherentState> {
    sampler.validate()?;
    if !(omega > 0.0 && omega.is_finite()) || !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::param("omega", "frequency and mass must be positive and finite"));
    }
    sampler.warn_if_cold(omega);
    Ok(sampler.sample_mode(rng, omega, mass, t0))
}

/// Monte Carlo thermal average of `observable(state, t)`.
pub fn thermal_average<F>(
    observable: F,
    sampler: &ThermalSampler,
    omega: f64,
    mass: f64,
    t: f64,
) -> Result<EnsembleStats>
where
    F: Fn(&CoherentState, f64) -> f64 + Sync,
{
    sampler.validate()?;
    if !(omega > 0.0 && omega.is_finite()) || !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::param("omega", "frequency and mass must be positive and finite"));
    }
    sampler.warn_if_cold(omega);
    let parts = map_chunks(sampler.n_samples, sampler.seed, |rng, range| {
        let mut acc = Accumulator::default();
        for _ in range {
            let state = sampler.sample_mode(rng, omega, mass, 0.0);
            acc.push(observable(&state, t));
        }
        acc
    });
    let mut total = Accumulator::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total.stats())
}

/// Thermal averages of the energy pieces of one oscillator with mean
/// occupation `n`: `kinetic = hbar omega n / 2`, `potential =
/// hbar omega / 4 + hbar omega n / 2`, `quantum = hbar omega / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalMoments {
    pub kinetic: f64,
    pub potential: f64,
    pub quantum: f64,
    /// `hbar omega (n + 1/2)`.
    pub total: f64,
}

impl ThermalMoments {
    pub fn new(omega: f64, mean_occupation: f64) -> Self {
        let q = HBAR * omega;
        ThermalMoments {
            kinetic: 0.5 * q * mean_occupation,
            potential: 0.25 * q + 0.5 * q * mean_occupation,
            quantum: 0.25 * q,
            total: q * (mean_occupation + 0.5),
        }
    }

    /// `total - (kinetic + potential + quantum)`.
    pub fn closure_residual(&self) -> f64 {
        self.total - (self.kinetic + self.potential + self.quantum)
    }
}

/// Thermal `<m omega^2 x^2 / 2> = hbar omega / 4 + kB T / 2`.
pub fn potential_moment_analytic(omega: f64, temperature: f64) -> f64 {
    0.25 * HBAR * omega + 0.5 * KB * temperature
}

/// `|psi|^2`-averaged trajectory product `<x(t + tau) x(t)>` for one coherent
/// state: `hbar/(2 m omega) + (2 hbar / m omega) |alpha|^2 cos(theta(t)) cos(theta(t + tau))`.
pub fn pwi_correlator_single_mode(state: &CoherentState, t: f64, tau: f64) -> f64 {
    let w = state.omega;
    let th = |s: f64| w * (s - state.t0) - state.sigma;
    let base = HBAR / (state.mass * w);
    0.5 * base + 2.0 * base * state.amp0 * state.amp0 * th(t).cos() * th(t + tau).cos()
}

/// Phase average of [`pwi_correlator_single_mode`]:
/// `hbar/(2 m omega) + (hbar / m omega) |alpha|^2 cos(omega tau)`.
pub fn sigma_averaged_pwi_correlator(amp0: f64, omega: f64, mass: f64, tau: f64) -> f64 {
    let base = HBAR / (mass * omega);
    0.5 * base + base * amp0 * amp0 * (omega * tau).cos()
}

/// `A + kB T m gamma(tau)`: the force correlator under the high-temperature
/// occupation law.
pub fn force_correlator_analytic(spec: &BathSpec, temperature: f64, tau: f64) -> f64 {
    spec.zpf_constant() + KB * temperature * spec.system_mass * spec.memory_kernel(tau)
}

/// `sum_n c_n^2 <x_n(t + tau) x_n(t)>` with the sampler's occupation law.
/// Equals [`force_correlator_analytic`] for [`Occupation::HighTemperature`].
pub fn force_correlator_thermal(spec: &BathSpec, sampler: &ThermalSampler, tau: f64) -> f64 {
    (0..spec.n_modes())
        .map(|i| {
            let (w, mn, c) = (spec.mode_freq[i], spec.mode_mass[i], spec.coupling[i]);
            let n_bar = sampler.mean_occupation(w);
            c * c * sigma_averaged_pwi_correlator(n_bar.sqrt(), w, mn, tau)
        })
        .sum()
}

/// Monte Carlo force statistics at a reference time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceStatistics {
    pub t_ref: f64,
    pub tau: Vec<f64>,
    /// `<F'(t_ref)>`.
    pub mean_force: EnsembleStats,
    /// `<F'(t_ref + tau) F'(t_ref)>` per lag.
    pub correlator: Vec<EnsembleStats>,
}

/// Sample full bath realizations and estimate `<F'>` and the two-time force
/// correlator from products of [`crate::bath::bath_force`] values.
pub fn force_statistics_mc(
    spec: &BathSpec,
    sampler: &ThermalSampler,
    tau_grid: &[f64],
    t_ref: f64,
) -> Result<ForceStatistics> {
    if tau_grid.is_empty() {
        return Err(Error::param("tau_grid", "need at least one lag"));
    }
    sampler.validate()?;
    spec.validate()?;
    sampler.warn_if_cold(spec.max_freq());
    let n_tau = tau_grid.len();
    let parts = map_chunks(sampler.n_samples, sampler.seed, |rng, range| {
        let mut mean = Accumulator::default();
        let mut corr = vec![Accumulator::default(); n_tau];
        for _ in range {
            let sample = sampler.sample_bath(rng, spec, 0.0);
            let force = PreparedForce::new(spec, &sample);
            let f0 = force.at(t_ref);
            mean.push(f0);
            for (acc, &tau) in corr.iter_mut().zip(tau_grid) {
                acc.push(force.at(t_ref + tau) * f0);
            }
        }
        (mean, corr)
    });
    let mut mean = Accumulator::default();
    let mut corr = vec![Accumulator::default(); n_tau];
    for (m, c) in &parts {
        mean.merge(m);
        for (total, part) in corr.iter_mut().zip(c) {
            total.merge(part);
        }
    }
    Ok(ForceStatistics {
        t_ref,
        tau: tau_grid.to_vec(),
        mean_force: mean.stats(),
        correlator: corr.iter().map(Accumulator::stats).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{discretize_ohmic, CutoffShape};
    use crate::rng::stream;
    use approx::assert_relative_eq;

    fn hot(seed: u64, n: usize) -> ThermalSampler {
        ThermalSampler::new(5.0, seed, n).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ThermalSampler::new(0.0, 1, 10).is_err());
        assert!(ThermalSampler::new(-1.0, 1, 10).is_err());
        assert!(ThermalSampler::new(1.0, 1, 0).is_err());
        let s = ThermalSampler {
            temperature: 1.0,
            seed: 0,
            n_samples: 0,
            occupation: Occupation::Bose,
        };
        assert!(thermal_average(|_, _| 1.0, &s, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn same_seed_same_first_sample() {
        let s = hot(11, 1);
        let a = sample_coherent_mode(&s, &mut stream(11, 0), 1.3, 0.7, 0.0).unwrap();
        let b = sample_coherent_mode(&s, &mut stream(11, 0), 1.3, 0.7, 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn occupation_in_classical_limit() {
        // hbar omega / kT = 1e-3: Bose and high-temperature laws coincide.
        let omega = 1e-3;
        let s = ThermalSampler::new(1.0, 3, 100_000).unwrap();
        let stats = thermal_average(|st, _| st.amp0 * st.amp0, &s, omega, 1.0, 0.0).unwrap();
        assert!(stats.agrees_with(1.0 / omega, 3.0), "{stats:?}");
        assert_relative_eq!(s.mean_occupation(omega), 1.0 / omega, max_relative = 1e-3);
    }

    #[test]
    fn offset_has_packet_width() {
        let (omega, mass) = (2.0, 0.5);
        let s = hot(5, 100_000);
        let mean = thermal_average(|st, _| st.offset, &s, omega, mass, 0.0).unwrap();
        assert!(mean.agrees_with(0.0, 3.0), "{mean:?}");
        let var = thermal_average(|st, _| st.offset * st.offset, &s, omega, mass, 0.0).unwrap();
        assert!(var.agrees_with(HBAR / (2.0 * mass * omega), 3.0), "{var:?}");
    }

    #[test]
    fn constant_observable_is_exact() {
        let stats = thermal_average(|_, _| 1.0, &hot(1, 1000), 1.0, 1.0, 0.3).unwrap();
        assert_eq!(stats.mean, 1.0);
        assert_eq!(stats.std_error, 0.0);
        assert_eq!(stats.n_samples, 1000);
    }

    #[test]
    fn bose_energy_matches_planck() {
        let (omega, mass) = (1.5, 1.0);
        let s = ThermalSampler::new(2.0, 9, 100_000).unwrap();
        let m = ThermalMoments::new(omega, s.mean_occupation(omega));
        let direct = thermal_average(
            |st, _| HBAR * st.omega * (st.amp0 * st.amp0 + 0.5),
            &s,
            omega,
            mass,
            0.0,
        )
        .unwrap();
        assert!(direct.agrees_with(m.total, 3.0), "{direct:?} vs {}", m.total);
    }

    #[test]
    fn moments_close_the_energy_balance() {
        for &(omega, n) in &[(0.3, 4.0), (2.0, 0.1), (1.0, 0.0)] {
            let m = ThermalMoments::new(omega, n);
            assert!(m.closure_residual().abs() < 1e-14);
        }
        assert_relative_eq!(potential_moment_analytic(3.0, 0.0), 0.75);
        let s = hot(0, 1).with_occupation(Occupation::HighTemperature);
        let m = ThermalMoments::new(0.8, s.mean_occupation(0.8));
        assert_relative_eq!(m.potential, potential_moment_analytic(0.8, 5.0), max_relative = 1e-14);
        assert_relative_eq!(m.kinetic, 2.5, max_relative = 1e-14);
    }

    #[test]
    fn potential_moment_by_monte_carlo() {
        let (omega, mass, t) = (0.8, 1.2, 0.7);
        let s = hot(21, 100_000).with_occupation(Occupation::HighTemperature);
        let stats = thermal_average(
            |st, t| {
                let x = st.trajectory_position(t);
                0.5 * st.mass * st.omega * st.omega * x * x
            },
            &s,
            omega,
            mass,
            t,
        )
        .unwrap();
        assert!(
            stats.agrees_with(potential_moment_analytic(omega, 5.0), 3.0),
            "{stats:?}"
        );
    }

    #[test]
    fn pwi_correlator_closed_forms() {
        let g = CoherentState::ground(2.0, 3.0, 0.0).unwrap();
        assert_relative_eq!(pwi_correlator_single_mode(&g, 0.4, 0.0), HBAR / 12.0);
        let amp = 1.7;
        assert_relative_eq!(
            sigma_averaged_pwi_correlator(amp, 3.0, 2.0, 0.0),
            HBAR / 12.0 + HBAR / 6.0 * amp * amp
        );
    }

    #[test]
    fn pwi_correlator_by_sampling_offsets_and_phases() {
        use rand_distr::{Distribution, StandardNormal};
        let (amp, omega, mass, t, tau) = (1.3, 2.0, 0.5, 0.6, 0.45);
        let mut rng = stream(4, 0);
        let mut acc = Accumulator::default();
        for _ in 0..200_000 {
            let sigma = rng.random::<f64>() * 2.0 * PI;
            let u: f64 = StandardNormal.sample(&mut rng);
            let st = CoherentState::new(
                mass,
                omega,
                amp,
                sigma % (2.0 * PI),
                0.0,
                u * (HBAR / (2.0 * mass * omega)).sqrt(),
            )
            .unwrap();
            acc.push(st.trajectory_position(t + tau) * st.trajectory_position(t));
        }
        let exact = sigma_averaged_pwi_correlator(amp, omega, mass, tau);
        assert!(acc.stats().agrees_with(exact, 3.0), "{:?} vs {exact}", acc.stats());
    }

    #[test]
    fn analytic_correlator_limits() {
        let spec = discretize_ohmic(1.0, 2.0, 400, CutoffShape::Lorentzian, 60.0).unwrap();
        let a = spec.zpf_constant();
        assert_relative_eq!(
            force_correlator_analytic(&spec, 3.0, 0.0),
            a + 3.0 * spec.memory_kernel(0.0)
        );
        let late = force_correlator_analytic(&spec, 3.0, 8.0);
        assert!((late - a).abs() < 1e-3 * a, "{late} vs {a}");
        let decoupled = discretize_ohmic(0.0, 2.0, 40, CutoffShape::Sharp, 2.0).unwrap();
        assert_eq!(force_correlator_analytic(&decoupled, 3.0, 0.7), 0.0);
        let ht = hot(0, 1).with_occupation(Occupation::HighTemperature);
        for &tau in &[0.0, 0.3, 2.0] {
            assert_relative_eq!(
                force_correlator_thermal(&spec, &ht, tau),
                force_correlator_analytic(&spec, 5.0, tau),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn force_statistics_validate_inputs() {
        let spec = discretize_ohmic(1.0, 2.0, 10, CutoffShape::Sharp, 2.0).unwrap();
        assert!(force_statistics_mc(&spec, &hot(0, 10), &[], 0.0).is_err());
    }

    #[test]
    fn single_mode_bath_reduces_to_mode_correlator() {
        let spec =
            BathSpec::from_modes(1.0, vec![1.3], vec![0.9], vec![0.6], 0.0, 0.9, CutoffShape::Sharp, 0.1).unwrap();
        let s = hot(8, 100_000);
        let taus = [0.0, 0.5, 2.0];
        let stats = force_statistics_mc(&spec, &s, &taus, 0.2).unwrap();
        assert!(stats.mean_force.agrees_with(0.0, 3.0));
        for (st, &tau) in stats.correlator.iter().zip(&taus) {
            let exact = force_correlator_thermal(&spec, &s, tau);
            assert!(st.agrees_with(exact, 3.0), "tau {tau}: {st:?} vs {exact}");
        }
    }

    #[test]
    fn force_statistics_are_deterministic_and_stationary() {
        let spec = discretize_ohmic(0.5, 3.0, 60, CutoffShape::Sharp, 3.0).unwrap();
        let s = hot(77, 20_000).with_occupation(Occupation::HighTemperature);
        let taus = [0.0, 0.4];
        let a = force_statistics_mc(&spec, &s, &taus, 0.0).unwrap();
        let b = force_statistics_mc(&spec, &s, &taus, 0.0).unwrap();
        assert_eq!(a, b);
        let c = force_statistics_mc(&spec, &s, &taus, 3.7).unwrap();
        for (x, y) in a.correlator.iter().zip(&c.correlator) {
            let se = x.std_error.hypot(y.std_error);
            assert!((x.mean - y.mean).abs() < 4.0 * se, "{x:?} vs {y:?}");
        }
    }

    #[test]
    fn standard_and_pwi_correlators_differ_by_zero_point_term() {
        let s = CoherentState::new(1.0, 1.7, 0.9, 1.1, 0.0, 0.0).unwrap();
        for &(t, tau) in &[(0.2, 0.0), (0.2, 0.6), (1.5, 2.4)] {
            let standard = s.standard_two_time_correlator(t, tau);
            let pwi = pwi_correlator_single_mode(&s, t, tau);
            let expected = s.width_sq() * (1.0 - (s.omega * tau).cos());
            assert_relative_eq!(pwi - standard.re, expected, epsilon = 1e-12);
        }
    }
}
