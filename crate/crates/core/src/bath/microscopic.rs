//! Exact classical (1+N)-body dynamics of particle plus bath.
//!
//! Strang splitting of `H = H_free + H_coupling`: the free part (particle
//! drift and uncoupled oscillator rotations) is propagated exactly, the
//! position-only coupling part `V(x) - x sum c_n x_n + x^2 sum c_n^2/(2 m_n w_n^2)`
//! by half kicks. The map is symplectic and second order.

use super::BathSpec;
use crate::potential::PotentialSpec;
use crate::time::step_count;
use crate::{Error, Result};

/// Classical bath phase-space point.
#[derive(Debug, Clone, PartialEq)]
pub struct BathState {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl BathState {
    pub fn at_rest(n: usize) -> Self {
        BathState {
            positions: vec![0.0; n],
            velocities: vec![0.0; n],
        }
    }
}

#[derive(Debug, Clone)]
pub struct MicroscopicTrajectory {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    /// Bath coordinates, one row of `n_modes` entries per time.
    pub bath_positions: Vec<Vec<f64>>,
    /// Total energy of the full Hamiltonian at each time.
    pub energy: Vec<f64>,
    pub window_valid_until: f64,
}

/// Full Hamiltonian including the counter-term.
pub fn microscopic_energy(spec: &BathSpec, potential: &PotentialSpec, x: f64, v: f64, bath: &BathState) -> f64 {
    let mut e = 0.5 * spec.system_mass * v * v + potential.value(x);
    for i in 0..spec.n_modes() {
        let (mn, w, c) = (spec.mode_mass[i], spec.mode_freq[i], spec.coupling[i]);
        let d = bath.positions[i] - c * x / (mn * w * w);
        e += 0.5 * mn * bath.velocities[i].powi(2) + 0.5 * mn * w * w * d * d;
    }
    e
}

#[allow(clippy::too_many_arguments)]
pub fn integrate_full_microscopic(
    spec: &BathSpec,
    potential: &PotentialSpec,
    x0: f64,
    v0: f64,
    bath_init: &BathState,
    t0: f64,
    t_end: f64,
    dt: f64,
) -> Result<MicroscopicTrajectory> {
    spec.validate()?;
    potential.validate()?;
    let n = spec.n_modes();
    if bath_init.positions.len() != n || bath_init.velocities.len() != n {
        return Err(Error::Dimension(format!(
            "bath initial state has {}/{} entries for {n} modes",
            bath_init.positions.len(),
            bath_init.velocities.len()
        )));
    }
    let limit = 0.1 / spec.max_freq();
    if dt > limit {
        return Err(Error::Unstable {
            reason: format!(
                "dt = {dt:.3e} does not resolve the fastest bath mode (omega_max = {:.3e})",
                spec.max_freq()
            ),
            suggested_dt: limit,
        });
    }
    let steps = step_count(t0, t_end, dt)?;
    let m = spec.system_mass;
    let counter: f64 = spec.kernel_weights().sum::<f64>() * m;
    let rot: Vec<(f64, f64)> = spec.mode_freq.iter().map(|w| (w * dt).sin_cos()).collect();

    let mut x = x0;
    let mut v = v0;
    let mut bath = bath_init.clone();

    let kick = |x: f64, v: &mut f64, bath: &mut BathState, h: f64| {
        let mut coupling_force = 0.0;
        for i in 0..n {
            coupling_force += spec.coupling[i] * bath.positions[i];
            bath.velocities[i] += h * spec.coupling[i] * x / spec.mode_mass[i];
        }
        let f = -potential.gradient(x) + coupling_force - counter * x;
        *v += h * f / m;
    };

    let mut out = MicroscopicTrajectory {
        times: Vec::with_capacity(steps + 1),
        positions: Vec::with_capacity(steps + 1),
        velocities: Vec::with_capacity(steps + 1),
        bath_positions: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        window_valid_until: t0 + spec.recurrence_time(),
    };
    let mut record = |t: f64, x: f64, v: f64, bath: &BathState| {
        out.times.push(t);
        out.positions.push(x);
        out.velocities.push(v);
        out.bath_positions.push(bath.positions.clone());
        out.energy.push(microscopic_energy(spec, potential, x, v, bath));
    };
    record(t0, x, v, &bath);
    for k in 1..=steps {
        kick(x, &mut v, &mut bath, 0.5 * dt);
        x += v * dt;
        for i in 0..n {
            let w = spec.mode_freq[i];
            let (s, c) = rot[i];
            let xn = bath.positions[i];
            let vn = bath.velocities[i];
            bath.positions[i] = xn * c + vn / w * s;
            bath.velocities[i] = -xn * w * s + vn * c;
        }
        kick(x, &mut v, &mut bath, 0.5 * dt);
        record(t0 + k as f64 * dt, x, v, &bath);
    }
    if t_end > out.window_valid_until {
        log::warn!(
            "microscopic run to t = {t_end} exceeds the bath recurrence window ({})",
            out.window_valid_until
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{discretize_ohmic, CutoffShape};
    use approx::assert_relative_eq;

    #[test]
    fn decoupled_free_particle_is_ballistic() {
        let spec = discretize_ohmic(0.0, 1.0, 20, CutoffShape::Sharp, 1.0).unwrap();
        let traj = integrate_full_microscopic(
            &spec,
            &PotentialSpec::Free,
            0.3,
            -1.2,
            &BathState::at_rest(20),
            0.0,
            5.0,
            0.01,
        )
        .unwrap();
        for (t, x) in traj.times.iter().zip(&traj.positions) {
            assert_relative_eq!(*x, 0.3 - 1.2 * t, epsilon = 1e-12);
        }
    }

    #[test]
    fn energy_is_conserved() {
        let spec = discretize_ohmic(0.5, 2.0, 100, CutoffShape::Lorentzian, 20.0).unwrap();
        let n = spec.n_modes();
        let bath = BathState {
            positions: (0..n).map(|i| 0.2 * (i as f64).sin()).collect(),
            velocities: (0..n).map(|i| 0.5 * (1.7 * i as f64).cos()).collect(),
        };
        let traj = integrate_full_microscopic(
            &spec,
            &PotentialSpec::Harmonic { k: 1.0 },
            1.0,
            0.0,
            &bath,
            0.0,
            20.0,
            0.002,
        )
        .unwrap();
        let e0 = traj.energy[0];
        let drift = traj.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-4 * e0.abs(), "drift {drift} of {e0}");
    }

    #[test]
    fn coarse_step_is_refused() {
        let spec = discretize_ohmic(0.5, 2.0, 10, CutoffShape::Lorentzian, 20.0).unwrap();
        let err = integrate_full_microscopic(
            &spec,
            &PotentialSpec::Free,
            0.0,
            0.0,
            &BathState::at_rest(10),
            0.0,
            1.0,
            0.1,
        )
        .unwrap_err();
        match err {
            Error::Unstable { suggested_dt, .. } => assert_relative_eq!(suggested_dt, 0.1 / spec.max_freq()),
            other => panic!("unexpected {other}"),
        }
    }
}
