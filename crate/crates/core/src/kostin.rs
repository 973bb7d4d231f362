//! Schrödinger-Langevin (Kostin) equation on a periodic grid.
//!
//! `i hbar d_t Psi = [-hbar^2 lap / 2m + V - x F(t) + Gamma S] Psi`, where `S`
//! is the (unwrapped) phase of `Psi` in action units. The Bohmian particles
//! of this field obey `m x'' = -grad(V + Q) - m Gamma x' + F(t)`.
//!
//! Time stepping is Strang splitting: a half step of the local term, solved
//! exactly for the phase, a full spectral kinetic step, and another half step
//! of the local term. Both parts are unitary up to round-off.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::coherent::CoherentState;
use crate::potential::PotentialSpec;
use crate::units::HBAR;
use crate::{Error, Result};

/// Nodes with `|Psi|` below this carry no phase information.
pub const AMPLITUDE_FLOOR: f64 = 1e-10;

/// External force `F(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drive {
    None,
    Constant {
        force: f64,
    },
    /// Samples at `t0 + k dt`, linearly interpolated and held constant
    /// outside the covered range.
    Series {
        t0: f64,
        dt: f64,
        values: Vec<f64>,
    },
}

impl Drive {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Drive::None => 0.0,
            Drive::Constant { force } => *force,
            Drive::Series { t0, dt, values } => {
                if values.is_empty() {
                    return 0.0;
                }
                let s = ((t - t0) / dt).clamp(0.0, (values.len() - 1) as f64);
                let i = (s.floor() as usize).min(values.len() - 1);
                let j = (i + 1).min(values.len() - 1);
                let w = s - i as f64;
                values[i] * (1.0 - w) + values[j] * w
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KostinState {
    pub x_min: f64,
    pub h: f64,
    pub field: Vec<Complex64>,
    pub mass: f64,
    pub gamma0: f64,
    pub potential: PotentialSpec,
    pub drive: Drive,
    /// Use `Gamma (S - <S>)` in place of `Gamma S`.
    pub mean_phase_subtraction: bool,
    pub t: f64,
}

impl KostinState {
    /// Periodic grid of `n` nodes on `[x_min, x_max)` filled with `init(x)`,
    /// normalized to unit norm.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        x_min: f64,
        x_max: f64,
        n: usize,
        mass: f64,
        gamma0: f64,
        potential: PotentialSpec,
        drive: Drive,
        init: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        if n < 8 {
            return Err(Error::param("n_nodes", "need at least 8 nodes"));
        }
        if !(x_max > x_min) {
            return Err(Error::param("x_max", "must exceed x_min"));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::param("mass", "must be positive and finite"));
        }
        if !(gamma0 >= 0.0 && gamma0.is_finite()) {
            return Err(Error::param("gamma0", "must be >= 0 and finite"));
        }
        potential.validate()?;
        let h = (x_max - x_min) / n as f64;
        let mut state = KostinState {
            x_min,
            h,
            field: (0..n).map(|i| init(x_min + i as f64 * h)).collect(),
            mass,
            gamma0,
            potential,
            drive,
            mean_phase_subtraction: false,
            t: 0.0,
        };
        let norm = state.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::param("field", "initial field must have finite nonzero norm"));
        }
        let scale = 1.0 / norm.sqrt();
        state.field.iter_mut().for_each(|z| *z *= scale);
        Ok(state)
    }

    /// Field of a harmonic coherent state at time `state.t0`.
    #[allow(clippy::too_many_arguments)]
    pub fn coherent(
        x_min: f64,
        x_max: f64,
        n: usize,
        packet: &CoherentState,
        gamma0: f64,
        potential: PotentialSpec,
        drive: Drive,
    ) -> Result<Self> {
        let mut s = Self::new(x_min, x_max, n, packet.mass, gamma0, potential, drive, |x| {
            packet.psi(x, packet.t0)
        })?;
        s.t = packet.t0;
        Ok(s)
    }

    pub fn with_mean_phase_subtraction(mut self, on: bool) -> Self {
        self.mean_phase_subtraction = on;
        self
    }

    pub fn n(&self) -> usize {
        self.field.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h
    }

    pub fn density(&self) -> Vec<f64> {
        self.field.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.h * self.field.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn mean_position(&self) -> f64 {
        self.h * (0..self.n()).map(|i| self.x(i) * self.field[i].norm_sqr()).sum::<f64>()
    }

    /// `<p> = hbar int Im(Psi* dPsi/dx)`.
    pub fn mean_momentum(&self) -> f64 {
        let d = Spectral::new(self.n(), self.h).derivative(&self.field);
        HBAR * self.h * self.field.iter().zip(&d).map(|(z, dz)| (z.conj() * dz).im).sum::<f64>()
    }

    /// `<H>` of the linear part: kinetic plus `V` (no drive, no phase term).
    pub fn energy(&self) -> f64 {
        let sp = Spectral::new(self.n(), self.h);
        let d = sp.derivative(&self.field);
        let kinetic = HBAR * HBAR / (2.0 * self.mass) * self.h * d.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let potential = self.h
            * (0..self.n())
                .map(|i| self.potential.value(self.x(i)) * self.field[i].norm_sqr())
                .sum::<f64>();
        kinetic + potential
    }

    /// Phase `S` (action units) unwrapped outwards from the node of largest
    /// amplitude. Nodes outside the support (below [`AMPLITUDE_FLOOR`]) carry
    /// the phase of the nearest supported node; a sub-floor node inside the
    /// support is an error.
    pub fn unwrapped_phase(&self) -> Result<Vec<f64>> {
        let n = self.n();
        let amp: Vec<f64> = self.field.iter().map(|z| z.norm()).collect();
        let start = (0..n).max_by(|&a, &b| amp[a].total_cmp(&amp[b])).unwrap();
        let first = (0..n).find(|&i| amp[i] >= AMPLITUDE_FLOOR).unwrap_or(start);
        let last = (0..n).rev().find(|&i| amp[i] >= AMPLITUDE_FLOOR).unwrap_or(start);
        if let Some(bad) = (first..=last).find(|&i| amp[i] < AMPLITUDE_FLOOR) {
            return Err(Error::PhaseUnwrap {
                node: bad,
                x: self.x(bad),
                amplitude: amp[bad],
            });
        }
        let mut phase = vec![0.0; n];
        phase[start] = self.field[start].arg();
        let step = |prev: f64, z: Complex64| {
            let raw = z.arg();
            prev + (raw - prev + PI).rem_euclid(2.0 * PI) - PI
        };
        for i in start + 1..=last {
            phase[i] = step(phase[i - 1], self.field[i]);
        }
        for i in (first..start).rev() {
            phase[i] = step(phase[i + 1], self.field[i]);
        }
        for p in phase.iter_mut().take(first) {
            *p = 0.0;
        }
        let (left, right) = (phase[first], phase[last]);
        phase[..first].iter_mut().for_each(|p| *p = left);
        phase[last + 1..].iter_mut().for_each(|p| *p = right);
        Ok(phase.into_iter().map(|p| HBAR * p).collect())
    }

    /// Local part over a substep `tau`: `S -> S e^{-Gamma tau} - U (1 - e^{-Gamma tau}) / Gamma`
    /// with `U = V - x F` (or the mean-subtracted analogue).
    fn local_step(&mut self, tau: f64, force: f64) -> Result<()> {
        let n = self.n();
        let s = self.unwrapped_phase()?;
        let u: Vec<f64> = (0..n)
            .map(|i| self.potential.value(self.x(i)) - self.x(i) * force)
            .collect();
        let g = self.gamma0;
        let decay = (-g * tau).exp();
        // (1 - e^{-g tau}) / g, finite as g -> 0.
        let lag = if g * tau > 1e-12 { -(-g * tau).exp_m1() / g } else { tau };
        let new_phase: Vec<f64> = if self.mean_phase_subtraction {
            let rho = self.density();
            let mass: f64 = rho.iter().sum();
            let s_bar = rho.iter().zip(&s).map(|(r, s)| r * s).sum::<f64>() / mass;
            let u_bar = rho.iter().zip(&u).map(|(r, u)| r * u).sum::<f64>() / mass;
            (0..n)
                .map(|i| s_bar - u_bar * tau + (s[i] - s_bar) * decay - (u[i] - u_bar) * lag)
                .collect()
        } else {
            (0..n).map(|i| s[i] * decay - u[i] * lag).collect()
        };
        for i in 0..n {
            let dphi = (new_phase[i] - s[i]) / HBAR;
            self.field[i] *= Complex64::from_polar(1.0, dphi);
        }
        Ok(())
    }

    /// Largest local phase-increment difference between neighbors per unit
    /// time, `max |U_{i+1} - U_i| / hbar`.
    fn local_phase_rate(&self) -> f64 {
        let force = match &self.drive {
            Drive::None => 0.0,
            Drive::Constant { force } => force.abs(),
            Drive::Series { values, .. } => values.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        };
        (0..self.n() - 1)
            .map(|i| {
                let dv = (self.potential.value(self.x(i + 1)) - self.potential.value(self.x(i))).abs();
                (dv + force * self.h) / HBAR
            })
            .fold(0.0, f64::max)
    }
}

/// FFT helper for a fixed periodic grid.
struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl Spectral {
    fn new(n: usize, h: f64) -> Self {
        let mut planner = FftPlanner::new();
        let k = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * m / (n as f64 * h)
            })
            .collect();
        Spectral {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            k,
        }
    }

    /// Multiply the spectrum of `u` by `mult(k)` in place.
    fn apply(&self, u: &mut [Complex64], mult: impl Fn(f64) -> Complex64) {
        let n = u.len();
        self.forward.process(u);
        let scale = 1.0 / n as f64;
        for (z, &k) in u.iter_mut().zip(&self.k) {
            *z *= mult(k) * scale;
        }
        self.inverse.process(u);
    }

    fn derivative(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut d = u.to_vec();
        let n = u.len();
        let nyquist = if n.is_multiple_of(2) { Some(self.k[n / 2]) } else { None };
        self.apply(&mut d, |k| {
            if Some(k) == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k)
            }
        });
        d
    }

    fn second_derivative(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut d = u.to_vec();
        self.apply(&mut d, |k| Complex64::new(-k * k, 0.0));
        d
    }
}

/// Advance by `n_steps` Strang steps of size `dt`.
pub fn evolve_kostin(state: &KostinState, dt: f64, n_steps: usize) -> Result<KostinState> {
    let (out, _) = evolve_with_history(state, dt, n_steps, 0)?;
    Ok(out)
}

/// Stored fields at uniform times, used for trajectory extraction.
#[derive(Debug, Clone)]
pub struct FieldHistory {
    pub template: KostinState,
    pub times: Vec<f64>,
    pub fields: Vec<Vec<Complex64>>,
}

/// Evolve and keep every `store_every`-th field (including the initial
/// one). `store_every = 0` keeps nothing.
pub fn evolve_with_history(
    state: &KostinState,
    dt: f64,
    n_steps: usize,
    store_every: usize,
) -> Result<(KostinState, FieldHistory)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", "must be positive and finite"));
    }
    let rate = state.local_phase_rate();
    if rate * dt > 1.0 {
        return Err(Error::Unstable {
            reason: "potential phase varies by more than one radian between neighboring nodes per step".into(),
            suggested_dt: 1.0 / rate,
        });
    }
    let sp = Spectral::new(state.n(), state.h);
    let mut s = state.clone();
    let mut history = FieldHistory {
        template: KostinState {
            field: Vec::new(),
            ..state.clone()
        },
        times: Vec::new(),
        fields: Vec::new(),
    };
    if store_every > 0 {
        history.times.push(s.t);
        history.fields.push(s.field.clone());
    }
    let kin = HBAR * dt / (2.0 * s.mass);
    for step in 1..=n_steps {
        let t = s.t;
        s.local_step(0.5 * dt, s.drive.at(t + 0.25 * dt))?;
        sp.apply(&mut s.field, |k| Complex64::from_polar(1.0, -kin * k * k));
        s.local_step(0.5 * dt, s.drive.at(t + 0.75 * dt))?;
        s.t = state.t + step as f64 * dt;
        if store_every > 0 && step % store_every == 0 {
            history.times.push(s.t);
            history.fields.push(s.field.clone());
        }
    }
    Ok((s, history))
}

/// Cubic Lagrange interpolation on nodes `i-1..=i+2` around `x`; returns the
/// value and derivative, or `None` if the stencil leaves the grid.
fn lagrange(values: &[f64], x_min: f64, h: f64, x: f64) -> Option<(f64, f64)> {
    let s = (x - x_min) / h;
    let i = s.floor();
    if !s.is_finite() || i < 1.0 || i + 2.0 > (values.len() - 1) as f64 {
        return None;
    }
    let i = i as usize;
    let u = s - i as f64;
    let f = [values[i - 1], values[i], values[i + 1], values[i + 2]];
    let nodes = [-1.0, 0.0, 1.0, 2.0];
    let mut val = 0.0;
    let mut der = 0.0;
    for a in 0..4 {
        let mut l = 1.0;
        let mut dl = 0.0;
        for b in 0..4 {
            if b == a {
                continue;
            }
            let denom = nodes[a] - nodes[b];
            let mut term = 1.0 / denom;
            for c in 0..4 {
                if c != a && c != b {
                    term *= (u - nodes[c]) / (nodes[a] - nodes[c]);
                }
            }
            dl += term;
            l *= (u - nodes[b]) / denom;
        }
        val += f[a] * l;
        der += f[a] * dl;
    }
    Some((val, der / h))
}

/// Per-snapshot fields derived from the stored wavefunctions.
#[derive(Debug, Clone)]
pub struct DerivedFields {
    /// `(hbar / m) Im(Psi* dPsi) / |Psi|^2`.
    pub velocity: Vec<Vec<f64>>,
    /// `-hbar^2 a'' / (2 m a)` with `a = |Psi|`.
    pub quantum_potential: Vec<Vec<f64>>,
}

impl FieldHistory {
    pub fn x_min(&self) -> f64 {
        self.template.x_min
    }

    pub fn h(&self) -> f64 {
        self.template.h
    }

    pub fn derived(&self) -> DerivedFields {
        let n = self.fields.first().map_or(0, Vec::len);
        let sp = Spectral::new(n.max(1), self.h());
        let m = self.template.mass;
        let mut velocity = Vec::with_capacity(self.fields.len());
        let mut quantum_potential = Vec::with_capacity(self.fields.len());
        for field in &self.fields {
            let d = sp.derivative(field);
            velocity.push(
                field
                    .iter()
                    .zip(&d)
                    .map(|(z, dz)| {
                        let r = z.norm_sqr();
                        if r > AMPLITUDE_FLOOR * AMPLITUDE_FLOOR {
                            HBAR / m * (z.conj() * dz).im / r
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            );
            let amp: Vec<Complex64> = field.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect();
            let dd = sp.second_derivative(&amp);
            quantum_potential.push(
                amp.iter()
                    .zip(&dd)
                    .map(|(a, d2)| {
                        if a.re > AMPLITUDE_FLOOR {
                            -HBAR * HBAR * d2.re / (2.0 * m * a.re)
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            );
        }
        DerivedFields {
            velocity,
            quantum_potential,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BohmianTrajectory {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    /// The trajectory left the interpolation range and was cut short.
    pub truncated: bool,
}

/// Integrate `x' = v(x, t)` through the stored history with RK4, cubic
/// interpolation in `x` and linear interpolation in `t`.
pub fn bohmian_trajectories_from_field(
    history: &FieldHistory,
    derived: &DerivedFields,
    x_starts: &[f64],
) -> Result<Vec<BohmianTrajectory>> {
    if history.times.len() < 2 {
        return Err(Error::InsufficientData("need at least two stored fields".into()));
    }
    let (x_min, h) = (history.x_min(), history.h());
    let vel = |j: usize, x: f64| lagrange(&derived.velocity[j], x_min, h, x).map(|(v, _)| v);
    let mid = |j: usize, x: f64| Some(0.5 * (vel(j, x)? + vel(j + 1, x)?));
    Ok(x_starts
        .iter()
        .map(|&x0| {
            let mut traj = BohmianTrajectory {
                times: vec![history.times[0]],
                positions: vec![x0],
                truncated: false,
            };
            let mut x = x0;
            for j in 0..history.times.len() - 1 {
                let dt = history.times[j + 1] - history.times[j];
                let step = (|| {
                    let k1 = vel(j, x)?;
                    let k2 = mid(j, x + 0.5 * dt * k1)?;
                    let k3 = mid(j, x + 0.5 * dt * k2)?;
                    let k4 = vel(j + 1, x + dt * k3)?;
                    Some(x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
                })();
                match step {
                    Some(next) => {
                        x = next;
                        traj.times.push(history.times[j + 1]);
                        traj.positions.push(x);
                    }
                    None => {
                        traj.truncated = true;
                        break;
                    }
                }
            }
            traj
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub times: Vec<f64>,
    pub residual: Vec<f64>,
    pub max_abs: f64,
    pub rms: f64,
}

/// `r = m x'' + grad(V + Q) + m Gamma x' - F(t)` along a trajectory, with
/// `x'` and `x''` from central differences of the stored positions.
pub fn langevin_residual(
    history: &FieldHistory,
    derived: &DerivedFields,
    trajectory: &BohmianTrajectory,
) -> Result<ResidualSeries> {
    let len = trajectory.positions.len();
    if len < 3 {
        return Err(Error::InsufficientData("trajectory needs at least three points".into()));
    }
    let st = &history.template;
    let (x_min, h) = (history.x_min(), history.h());
    let mut out = ResidualSeries {
        times: Vec::with_capacity(len - 2),
        residual: Vec::with_capacity(len - 2),
        max_abs: 0.0,
        rms: 0.0,
    };
    for j in 1..len - 1 {
        let dt_b = trajectory.times[j] - trajectory.times[j - 1];
        let dt_f = trajectory.times[j + 1] - trajectory.times[j];
        let (xm, x, xp) = (
            trajectory.positions[j - 1],
            trajectory.positions[j],
            trajectory.positions[j + 1],
        );
        let v = (xp - xm) / (dt_b + dt_f);
        let a = 2.0 * ((xp - x) / dt_f - (x - xm) / dt_b) / (dt_b + dt_f);
        let Some((_, grad_q)) = lagrange(&derived.quantum_potential[j], x_min, h, x) else {
            break;
        };
        let t = trajectory.times[j];
        let r = st.mass * a + st.potential.gradient(x) + grad_q + st.mass * st.gamma0 * v - st.drive.at(t);
        out.times.push(t);
        out.residual.push(r);
    }
    if out.residual.is_empty() {
        return Err(Error::InsufficientData("trajectory left the grid immediately".into()));
    }
    out.max_abs = out.residual.iter().fold(0.0, |m, r| m.max(r.abs()));
    out.rms = (out.residual.iter().map(|r| r * r).sum::<f64>() / out.residual.len() as f64).sqrt();
    Ok(out)
}
