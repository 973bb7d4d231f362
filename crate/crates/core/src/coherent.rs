//! Closed-form Bohmian dynamics of a harmonic oscillator in a coherent state.
//!
//! With `theta(t) = omega (t - t0) - sigma` the packet center is
//! `X(t) = sqrt(2 hbar / (m omega)) |alpha0| cos theta` and every Bohmian
//! trajectory is `X(t) + u` for a constant offset `u`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::units::HBAR;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentState {
    pub mass: f64,
    pub omega: f64,
    /// `|alpha(t0)|`.
    pub amp0: f64,
    /// `Arg alpha(t0)`, in `[0, 2 pi)`.
    pub sigma: f64,
    pub t0: f64,
    /// Offset `u` of the Bohmian particle from the packet center.
    pub offset: f64,
}

impl CoherentState {
    pub fn new(mass: f64, omega: f64, amp0: f64, sigma: f64, t0: f64, offset: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::param("mass", "must be positive and finite"));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::param("omega", "must be positive and finite"));
        }
        if !(amp0 >= 0.0 && amp0.is_finite()) {
            return Err(Error::param("amp0", "must be non-negative and finite"));
        }
        if !sigma.is_finite() || !offset.is_finite() || !t0.is_finite() {
            return Err(Error::param("sigma", "phase, offset and t0 must be finite"));
        }
        Ok(CoherentState {
            mass,
            omega,
            amp0,
            sigma: sigma.rem_euclid(2.0 * PI),
            t0,
            offset,
        })
    }

    /// Ground state (`alpha = 0`) with the particle at `offset`.
    pub fn ground(mass: f64, omega: f64, offset: f64) -> Result<Self> {
        Self::new(mass, omega, 0.0, 0.0, 0.0, offset)
    }

    /// State whose packet center starts at `x0` with velocity `v0`.
    pub fn from_center(mass: f64, omega: f64, x0: f64, v0: f64, t0: f64, offset: f64) -> Result<Self> {
        let r = x0.hypot(v0 / omega);
        let sigma = (v0 / omega).atan2(x0);
        Self::new(mass, omega, r / Self::length_scale(mass, omega), sigma, t0, offset)
    }

    /// `sqrt(2 hbar / (m omega))`.
    pub fn length_scale(mass: f64, omega: f64) -> f64 {
        (2.0 * HBAR / (mass * omega)).sqrt()
    }

    /// Position variance `hbar / (2 m omega)` of `|psi|^2`.
    pub fn width_sq(&self) -> f64 {
        HBAR / (2.0 * self.mass * self.omega)
    }

    fn theta(&self, t: f64) -> f64 {
        self.omega * (t - self.t0) - self.sigma
    }

    /// `alpha(t) = alpha(t0) exp(-i omega (t - t0))`.
    pub fn alpha(&self, t: f64) -> Complex64 {
        Complex64::from_polar(self.amp0, -self.theta(t))
    }

    /// `<x>_alpha(t)`, the packet center.
    pub fn packet_center(&self, t: f64) -> f64 {
        Self::length_scale(self.mass, self.omega) * self.amp0 * self.theta(t).cos()
    }

    /// Amplitude `a >= 0` and phase `S` (action units) of the wavefunction.
    pub fn wavefunction_amplitude_phase(&self, x: f64, t: f64) -> (f64, f64) {
        let (m, w) = (self.mass, self.omega);
        let alpha = self.alpha(t);
        let center = Self::length_scale(m, w) * alpha.re;
        let norm = (m * w / (PI * HBAR)).powf(0.25);
        let a = norm * (-(m * w / (2.0 * HBAR)) * (x - center).powi(2)).exp();
        let dt = t - self.t0;
        let phase_over_hbar = (2.0 * m * w / HBAR).sqrt() * alpha.im * x - 0.5 * w * dt
            + 0.5 * self.amp0 * self.amp0 * (2.0 * w * dt - 2.0 * self.sigma).sin();
        (a, HBAR * phase_over_hbar)
    }

    /// Complex wavefunction value.
    pub fn psi(&self, x: f64, t: f64) -> Complex64 {
        let (a, s) = self.wavefunction_amplitude_phase(x, t);
        Complex64::from_polar(a, s / HBAR)
    }

    /// Guidance velocity `grad S / m`, uniform in space.
    pub fn guidance_velocity(&self, t: f64) -> f64 {
        -(2.0 * HBAR * self.omega / self.mass).sqrt() * self.amp0 * self.theta(t).sin()
    }

    /// Bohmian trajectory `X(t) + u`.
    pub fn trajectory_position(&self, t: f64) -> f64 {
        self.packet_center(t) + self.offset
    }

    /// Analytic acceleration of the trajectory, `-omega^2 (x - u)`.
    pub fn trajectory_acceleration(&self, t: f64) -> f64 {
        -self.omega * self.omega * self.packet_center(t)
    }

    /// `Q = hbar omega / 2 - m omega^2 (x - X(t))^2 / 2`.
    pub fn quantum_potential(&self, x: f64, t: f64) -> f64 {
        let d = x - self.packet_center(t);
        0.5 * HBAR * self.omega - 0.5 * self.mass * self.omega * self.omega * d * d
    }

    /// `-dQ/dx = m omega^2 (x - X(t))`.
    pub fn quantum_force(&self, x: f64, t: f64) -> f64 {
        self.mass * self.omega * self.omega * (x - self.packet_center(t))
    }

    /// Energy `-dS/dt` carried by the particle along its trajectory.
    pub fn particle_energy(&self, t: f64) -> f64 {
        let w = self.omega;
        HBAR * w * self.amp0 * self.amp0
            + 0.5 * HBAR * w
            + w * (2.0 * self.mass * HBAR * w).sqrt() * self.offset * self.amp0 * self.theta(t).cos()
    }

    /// `<alpha| x(t + tau) x(t) |alpha>` from ladder-operator algebra.
    pub fn standard_two_time_correlator(&self, t: f64, tau: f64) -> Complex64 {
        let zpf = HBAR / (2.0 * self.mass * self.omega);
        let x1 = self.packet_center(t + tau);
        let x0 = self.packet_center(t);
        Complex64::new(x1 * x0, 0.0) + Complex64::from_polar(zpf, -self.omega * tau)
    }
}
