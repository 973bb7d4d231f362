use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::BathSpec;
use crate::coherent::CoherentState;
use crate::units::HBAR;
use crate::{Error, Result};

/// One realization of the bath: a coherent state per mode plus the Bohmian
/// offset of each mode's particle from its packet center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentSample {
    /// `|alpha_n(t0)|`.
    pub amp: Vec<f64>,
    /// `sigma_n` in `[0, 2 pi)`.
    pub phase: Vec<f64>,
    /// `u_n`.
    pub offset: Vec<f64>,
    pub t0: f64,
}

impl CoherentSample {
    pub fn zeros(n: usize, t0: f64) -> Self {
        CoherentSample {
            amp: vec![0.0; n],
            phase: vec![0.0; n],
            offset: vec![0.0; n],
            t0,
        }
    }

    pub fn len(&self) -> usize {
        self.amp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amp.is_empty()
    }

    /// Sample reproducing classical bath initial conditions `x_n(t0)`,
    /// `v_n(t0)` with zero offsets: each mode then follows the free classical
    /// orbit through that phase-space point.
    pub fn from_classical(spec: &BathSpec, positions: &[f64], velocities: &[f64], t0: f64) -> Result<Self> {
        let n = spec.n_modes();
        if positions.len() != n || velocities.len() != n {
            return Err(Error::Dimension(format!(
                "{} positions and {} velocities for {n} modes",
                positions.len(),
                velocities.len()
            )));
        }
        let mut sample = CoherentSample::zeros(n, t0);
        for i in 0..n {
            let w = spec.mode_freq[i];
            let r = positions[i].hypot(velocities[i] / w);
            sample.amp[i] = r / CoherentState::length_scale(spec.mode_mass[i], w);
            sample.phase[i] = (velocities[i] / w).atan2(positions[i]).rem_euclid(2.0 * PI);
        }
        Ok(sample)
    }

    pub fn check(&self, spec: &BathSpec) -> Result<()> {
        let n = spec.n_modes();
        if self.amp.len() != n || self.phase.len() != n || self.offset.len() != n {
            return Err(Error::Dimension(format!(
                "sample has {}/{}/{} entries for a bath of {n} modes",
                self.amp.len(),
                self.phase.len(),
                self.offset.len()
            )));
        }
        if self.amp.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(Error::param("amp", "coherent amplitudes must be non-negative"));
        }
        if self.phase.iter().any(|p| !(*p >= 0.0 && *p < 2.0 * PI)) {
            return Err(Error::param("phase", "phases must lie in [0, 2 pi)"));
        }
        Ok(())
    }

    /// Coherent state of mode `n`.
    pub fn mode_state(&self, spec: &BathSpec, n: usize) -> CoherentState {
        CoherentState {
            mass: spec.mode_mass[n],
            omega: spec.mode_freq[n],
            amp0: self.amp[n],
            sigma: self.phase[n],
            t0: self.t0,
            offset: self.offset[n],
        }
    }
}

/// `F'(t) = sum_n c_n x_n(t)` with `x_n` the Bohmian trajectory of mode `n`.
pub fn bath_force(spec: &BathSpec, sample: &CoherentSample, t: f64) -> Result<f64> {
    sample.check(spec)?;
    Ok(PreparedForce::new(spec, sample).at(t))
}

/// Fluctuating force of a fixed realization, pre-reduced for repeated
/// evaluation: `F'(t) = F0 + sum_n Re[b_n exp(i omega_n (t - t0))]`.
#[derive(Debug, Clone)]
pub struct PreparedForce {
    freq: Vec<f64>,
    weight: Vec<Complex64>,
    constant: f64,
    t0: f64,
}

impl PreparedForce {
    /// Dimensions are assumed to match; use [`bath_force`] for a checked call.
    pub fn new(spec: &BathSpec, sample: &CoherentSample) -> Self {
        let n = spec.n_modes();
        let mut weight = Vec::with_capacity(n);
        let mut constant = 0.0;
        for i in 0..n {
            let c = spec.coupling[i];
            let scale = (2.0 * HBAR / (spec.mode_mass[i] * spec.mode_freq[i])).sqrt();
            weight.push(Complex64::from_polar(c * scale * sample.amp[i], -sample.phase[i]));
            constant += c * sample.offset[i];
        }
        PreparedForce {
            freq: spec.mode_freq.clone(),
            weight,
            constant,
            t0: sample.t0,
        }
    }

    /// Static part `sum_n c_n u_n`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn at(&self, t: f64) -> f64 {
        let dt = t - self.t0;
        self.constant
            + self
                .freq
                .iter()
                .zip(&self.weight)
                .map(|(w, b)| {
                    let (s, c) = (w * dt).sin_cos();
                    b.re * c - b.im * s
                })
                .sum::<f64>()
    }

    /// `F'(t_start + k h)` for `k = 0..count`, using phasor recurrences that
    /// are re-anchored every 512 steps.
    pub fn series(&self, t_start: f64, h: f64, count: usize) -> Vec<f64> {
        const RESYNC: usize = 512;
        let n = self.freq.len();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        let mut rot_re = vec![0.0; n];
        let mut rot_im = vec![0.0; n];
        for i in 0..n {
            let (s, c) = (self.freq[i] * h).sin_cos();
            rot_re[i] = c;
            rot_im[i] = s;
        }
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            if k % RESYNC == 0 {
                let dt = t_start + k as f64 * h - self.t0;
                for i in 0..n {
                    let p = self.weight[i] * Complex64::from_polar(1.0, self.freq[i] * dt);
                    re[i] = p.re;
                    im[i] = p.im;
                }
            } else {
                for i in 0..n {
                    let r = re[i] * rot_re[i] - im[i] * rot_im[i];
                    im[i] = re[i] * rot_im[i] + im[i] * rot_re[i];
                    re[i] = r;
                }
            }
            out.push(self.constant + re.iter().sum::<f64>());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{discretize_ohmic, CutoffShape};
    use approx::assert_relative_eq;

    fn bath() -> BathSpec {
        discretize_ohmic(0.8, 2.0, 64, CutoffShape::Lorentzian, 40.0).unwrap()
    }

    #[test]
    fn empty_sample_gives_no_force() {
        let spec = bath();
        let s = CoherentSample::zeros(spec.n_modes(), 0.0);
        for t in [0.0, 1.3, 40.0] {
            assert_eq!(bath_force(&spec, &s, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_mode_at_initial_time() {
        let spec =
            BathSpec::from_modes(1.0, vec![2.0], vec![3.0], vec![0.5], 1.0, 3.0, CutoffShape::Sharp, 3.0).unwrap();
        let mut s = CoherentSample::zeros(1, 0.7);
        s.amp[0] = 1.0;
        let f = bath_force(&spec, &s, 0.7).unwrap();
        assert_relative_eq!(f, 0.5 * (2.0f64 / 6.0).sqrt(), epsilon = 1e-15);
        let period = 2.0 * PI / 3.0;
        for t in [1.1, 2.5] {
            assert_relative_eq!(
                bath_force(&spec, &s, t).unwrap(),
                bath_force(&spec, &s, t + period).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn force_equals_sum_of_mode_trajectories() {
        let spec = bath();
        let n = spec.n_modes();
        let sample = CoherentSample {
            amp: (0..n).map(|i| 0.1 * i as f64).collect(),
            phase: (0..n).map(|i| (0.37 * i as f64) % (2.0 * PI)).collect(),
            offset: (0..n).map(|i| ((i % 5) as f64 - 2.0) * 0.1).collect(),
            t0: 0.2,
        };
        let t = 3.3;
        let direct: f64 = (0..n)
            .map(|i| spec.coupling[i] * sample.mode_state(&spec, i).trajectory_position(t))
            .sum();
        assert_relative_eq!(bath_force(&spec, &sample, t).unwrap(), direct, max_relative = 1e-12);
    }

    #[test]
    fn series_matches_direct_evaluation() {
        let spec = bath();
        let n = spec.n_modes();
        let sample = CoherentSample {
            amp: (0..n).map(|i| 1.0 + (i % 3) as f64).collect(),
            phase: (0..n).map(|i| (1.1 * i as f64) % (2.0 * PI)).collect(),
            offset: vec![0.05; n],
            t0: 0.0,
        };
        let f = PreparedForce::new(&spec, &sample);
        let series = f.series(0.5, 0.01, 2000);
        let scale = series.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (k, v) in series.iter().enumerate().step_by(97) {
            let t = 0.5 + k as f64 * 0.01;
            assert!((v - f.at(t)).abs() < 1e-11 * scale);
        }
    }

    #[test]
    fn mismatched_sample_is_rejected() {
        let spec = bath();
        let s = CoherentSample::zeros(3, 0.0);
        assert!(matches!(bath_force(&spec, &s, 0.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn classical_initial_conditions_round_trip() {
        let spec = bath();
        let n = spec.n_modes();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
        let s = CoherentSample::from_classical(&spec, &x, &v, 1.0).unwrap();
        for i in 0..n {
            let st = s.mode_state(&spec, i);
            assert_relative_eq!(st.trajectory_position(1.0), x[i], epsilon = 1e-12);
            assert_relative_eq!(st.guidance_velocity(1.0), v[i], epsilon = 1e-12);
        }
    }
}
