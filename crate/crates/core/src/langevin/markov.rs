use rand_distr::{Distribution, StandardNormal};

use super::{warn_past_window, GleConfig, TrajectoryRecord};
use crate::bath::{BathSpec, CoherentSample, PreparedForce};
use crate::rng::stream;
use crate::units::KB;
use crate::{Error, Result};

/// Fluctuating force of the Markovian equation.
#[derive(Debug, Clone)]
pub enum NoiseSource {
    None,
    /// Gaussian white noise of intensity `2 m Gamma kB T` per unit time.
    White {
        temperature: f64,
        seed: u64,
    },
    /// Smooth force `F'(t)` of one bath realization.
    SampledBath {
        spec: BathSpec,
        sample: CoherentSample,
    },
}

/// Largest `dt * omega_max` accepted for a sampled-bath force.
const MAX_PHASE_PER_STEP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scheme {
    Rk4,
    SemiImplicit,
}

/// Integrate `m x'' = -grad(V + Q_S) - m Gamma x' + F'(t)`.
///
/// Deterministic forcing (none or a sampled bath) uses classical RK4 with the
/// force evaluated at half steps. White noise uses the semi-implicit Euler
/// scheme `v' = (v + dt a + sqrt(2 Gamma kB T dt / m) xi) / (1 + Gamma dt)`,
/// `x' = x + dt v'`.
pub fn integrate_markovian(config: &GleConfig, noise: &NoiseSource) -> Result<TrajectoryRecord> {
    config.validate()?;
    let dt = config.dt;
    if config.gamma0 * dt > 1.0 {
        return Err(Error::Unstable {
            reason: format!("Gamma dt = {:.3} resolves no friction time", config.gamma0 * dt),
            suggested_dt: 1.0 / config.gamma0,
        });
    }
    let steps = config.steps()?;
    let scheme = match noise {
        NoiseSource::White { temperature, .. } => {
            if !(*temperature >= 0.0 && temperature.is_finite()) {
                return Err(Error::param("temperature", "must be >= 0 and finite"));
            }
            Scheme::SemiImplicit
        }
        NoiseSource::SampledBath { spec, sample } => {
            spec.validate()?;
            sample.check(spec)?;
            let limit = MAX_PHASE_PER_STEP / spec.max_freq();
            if dt > limit {
                return Err(Error::Unstable {
                    reason: format!("dt = {dt:.3e} does not resolve the fastest bath mode"),
                    suggested_dt: limit,
                });
            }
            Scheme::Rk4
        }
        NoiseSource::None => Scheme::Rk4,
    };
    let window = match noise {
        NoiseSource::SampledBath { spec, .. } => config.t0 + spec.recurrence_time(),
        _ => f64::INFINITY,
    };
    warn_past_window(config.t_end, window);

    let m = config.mass;
    let gamma = config.gamma0;
    let t0 = config.t0;
    let mut out = TrajectoryRecord::with_capacity(steps / config.record_every + 1, window);
    let mut x = config.x0;
    let mut v = config.v0;

    match scheme {
        Scheme::Rk4 => {
            // Force at t0 + j dt / 2.
            let half = match noise {
                NoiseSource::SampledBath { spec, sample } => {
                    PreparedForce::new(spec, sample).series(t0, 0.5 * dt, 2 * steps + 1)
                }
                _ => vec![0.0; 2 * steps + 1],
            };
            let accel = |x: f64, v: f64, t: f64, f: f64| (config.system_force(x, t) + f) / m - gamma * v;
            out.push(t0, x, v, half[0]);
            for k in 0..steps {
                let t = t0 + k as f64 * dt;
                let (f0, fh, f1) = (half[2 * k], half[2 * k + 1], half[2 * k + 2]);
                let k1x = v;
                let k1v = accel(x, v, t, f0);
                let k2x = v + 0.5 * dt * k1v;
                let k2v = accel(x + 0.5 * dt * k1x, k2x, t + 0.5 * dt, fh);
                let k3x = v + 0.5 * dt * k2v;
                let k3v = accel(x + 0.5 * dt * k2x, k3x, t + 0.5 * dt, fh);
                let k4x = v + dt * k3v;
                let k4v = accel(x + dt * k3x, k4x, t + dt, f1);
                x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
                v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
                if (k + 1) % config.record_every == 0 {
                    out.push(t + dt, x, v, f1);
                }
            }
        }
        Scheme::SemiImplicit => {
            let NoiseSource::White { temperature, seed } = noise else {
                unreachable!()
            };
            let mut rng = stream(*seed, 0);
            let amp = (2.0 * gamma * KB * temperature * dt / m).sqrt();
            out.push(t0, x, v, 0.0);
            for k in 0..steps {
                let t = t0 + k as f64 * dt;
                let xi: f64 = StandardNormal.sample(&mut rng);
                v = (v + dt * config.system_force(x, t) / m + amp * xi) / (1.0 + gamma * dt);
                x += dt * v;
                if (k + 1) % config.record_every == 0 {
                    // Report the realized force increment as an equivalent force.
                    out.push(t + dt, x, v, m * amp * xi / dt);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langevin::{run_ensemble, velocity_variance};
    use crate::potential::PotentialSpec;
    use approx::assert_relative_eq;

    #[test]
    fn damped_free_particle() {
        let cfg = GleConfig {
            gamma0: 0.7,
            v0: 2.0,
            t_end: 5.0,
            dt: 0.01,
            ..GleConfig::default()
        };
        let rec = integrate_markovian(&cfg, &NoiseSource::None).unwrap();
        for (t, v) in rec.times.iter().zip(&rec.velocities) {
            assert_relative_eq!(*v, 2.0 * (-0.7 * t).exp(), max_relative = 1e-8);
        }
        let x_end = *rec.positions.last().unwrap();
        assert_relative_eq!(x_end, 2.0 / 0.7 * (1.0 - (-3.5f64).exp()), max_relative = 1e-8);
    }

    #[test]
    fn white_noise_equipartition() {
        let (temperature, gamma0) = (0.8, 2.0);
        let cfg = GleConfig {
            gamma0,
            t_end: 60.0,
            dt: 0.005,
            potential: PotentialSpec::Harmonic { k: 1.0 },
            record_every: 20,
            ..GleConfig::default()
        };
        let recs = run_ensemble(64, 3, |_, i| {
            integrate_markovian(
                &cfg,
                &NoiseSource::White {
                    temperature,
                    seed: 1000 + i as u64,
                },
            )
        })
        .unwrap();
        let var = velocity_variance(&recs, 8.0 / gamma0).unwrap();
        // The semi-implicit scheme has an O(Gamma dt) variance bias.
        assert_relative_eq!(var.mean, temperature, max_relative = 0.05);
    }

    #[test]
    fn coarse_steps_are_refused() {
        let spec = crate::bath::discretize_ohmic(1.0, 50.0, 50, crate::bath::CutoffShape::Sharp, 50.0).unwrap();
        let cfg = GleConfig {
            dt: 0.05,
            ..GleConfig::default()
        };
        let noise = NoiseSource::SampledBath {
            sample: CoherentSample::zeros(50, 0.0),
            spec,
        };
        assert!(matches!(integrate_markovian(&cfg, &noise), Err(Error::Unstable { .. })));
        let cfg = GleConfig {
            gamma0: 200.0,
            dt: 0.01,
            ..GleConfig::default()
        };
        assert!(integrate_markovian(&cfg, &NoiseSource::None).is_err());
    }
}
