use super::{warn_past_window, GleConfig, MemoryMethod, TrajectoryRecord};
use crate::bath::{continuum_kernel, BathSpec, CoherentSample, CutoffShape, PreparedForce};
use crate::{Error, Result};

/// Integrate `m x'' = -grad(V + Q_S) - m gamma(t - t0) x(t0) - m int gamma(t - s) x'(s) ds + F'(t)`
/// for one bath realization.
///
/// Positions advance as in velocity Verlet; the velocity update treats the
/// memory integral implicitly (trapezoid rule), which keeps the scheme second
/// order. The memory integral uses either the bath's discrete kernel
/// (history summation, `O(steps^2)`) or, for Lorentzian baths, one auxiliary
/// variable carrying the continuum exponential kernel.
pub fn integrate_gle(spec: &BathSpec, sample: &CoherentSample, config: &GleConfig) -> Result<TrajectoryRecord> {
    config.validate()?;
    spec.validate()?;
    sample.check(spec)?;
    if (config.mass - spec.system_mass).abs() > 1e-12 * config.mass {
        return Err(Error::param(
            "mass",
            format!(
                "config mass {} differs from the bath's system mass {}",
                config.mass, spec.system_mass
            ),
        ));
    }
    let method = match config.memory {
        MemoryMethod::Auto if spec.cutoff_shape == CutoffShape::Lorentzian => MemoryMethod::Auxiliary,
        MemoryMethod::Auto => MemoryMethod::History,
        m => m,
    };
    let dt = config.dt;
    match method {
        MemoryMethod::Auxiliary => {
            if spec.cutoff_shape != CutoffShape::Lorentzian {
                return Err(Error::param(
                    "memory",
                    "the auxiliary variable needs a Lorentzian kernel",
                ));
            }
            let limit = 0.05 / spec.cutoff;
            if dt > limit {
                return Err(Error::Unstable {
                    reason: format!("dt = {dt:.3e} does not resolve the kernel decay time 1/omega_c"),
                    suggested_dt: limit,
                });
            }
        }
        _ => {
            let limit = 0.1 / spec.max_freq();
            if dt > limit {
                return Err(Error::Unstable {
                    reason: format!("dt = {dt:.3e} does not resolve the fastest bath mode"),
                    suggested_dt: limit,
                });
            }
        }
    }

    let steps = config.steps()?;
    let window = config.t0 + spec.recurrence_time();
    warn_past_window(config.t_end, window);
    let force = PreparedForce::new(spec, sample).series(config.t0, dt, steps + 1);
    let m = config.mass;
    let t0 = config.t0;
    let slip = |t: f64| -> f64 {
        if !config.slip_term {
            return 0.0;
        }
        let g = match method {
            MemoryMethod::Auxiliary => continuum_kernel(spec.cutoff_shape, spec.gamma0, spec.cutoff, t - t0),
            _ => spec.memory_kernel(t - t0),
        };
        g * config.x0
    };

    let mut out = TrajectoryRecord::with_capacity(steps / config.record_every + 1, window);
    let mut x = config.x0;
    let mut v = config.v0;
    let mut a = (config.system_force(x, t0) + force[0]) / m - slip(t0);
    out.push(t0, x, v, force[0]);

    match method {
        MemoryMethod::Auxiliary => {
            let wc = spec.cutoff;
            let denom = 1.0 + 0.5 * wc * dt;
            let q = 0.5 * wc * spec.gamma0 * dt / denom;
            let mut z = 0.0;
            for k in 1..=steps {
                let t = t0 + k as f64 * dt;
                x += dt * v + 0.5 * dt * dt * a;
                let p = (z * (1.0 - 0.5 * wc * dt) + 0.5 * wc * spec.gamma0 * dt * v) / denom;
                let b = (config.system_force(x, t) + force[k]) / m - slip(t);
                let v_new = (v + 0.5 * dt * (a + b - p)) / (1.0 + 0.5 * dt * q);
                z = p + q * v_new;
                a = b - z;
                v = v_new;
                if k % config.record_every == 0 {
                    out.push(t, x, v, force[k]);
                }
            }
        }
        _ => {
            let kernel = spec.kernel_table(dt, steps + 1);
            let mut history = Vec::with_capacity(steps + 1);
            history.push(v);
            for k in 1..=steps {
                let t = t0 + k as f64 * dt;
                x += dt * v + 0.5 * dt * dt * a;
                // Trapezoid memory sum without the unknown v_k term.
                let mut mem = 0.5 * kernel[k] * history[0];
                for j in 1..k {
                    mem += kernel[k - j] * history[j];
                }
                mem *= dt;
                let b = (config.system_force(x, t) + force[k]) / m - slip(t) - mem;
                let g0 = kernel[0];
                let v_new = (v + 0.5 * dt * (a + b)) / (1.0 + 0.25 * dt * dt * g0);
                a = b - 0.5 * dt * g0 * v_new;
                v = v_new;
                history.push(v);
                if k % config.record_every == 0 {
                    out.push(t, x, v, force[k]);
                }
            }
        }
    }
    Ok(out)
}
