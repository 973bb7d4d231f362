//! Relaxation of a non-equilibrium density `rho` towards `|psi|^2`.
//!
//! Two Fokker-Planck dynamics are provided:
//!
//! * paired: `rho` and `|psi|^2` both obey `d_t u = -div(u v) + D lap(u)`;
//! * osmotic: `|psi|^2` is only advected while
//!   `d_t rho = -div(rho v) + D div(rho grad ln f)` with `f = rho / |psi|^2`.
//!
//! Both decrease the relative entropy `H = int rho ln f`. The discretization
//! is a node-centered finite-volume scheme (half cells at reflecting walls,
//! so cell masses are trapezoid weights). Advection uses the Lax-Wendroff
//! flux with at least upwind diffusion, and the step-size guard keeps every
//! update a nonnegative, mass-conserving linear map of the cell masses. The
//! discrete `H` is then nonincreasing by the data-processing inequality.

use serde::{Deserialize, Serialize};

use crate::coherent::CoherentState;
use crate::{Error, Result};

/// Lower bound for `|psi|^2` in the denominator of `f`.
pub const F_FLOOR: f64 = 1e-12;

/// Stability safety factor applied to the diffusive and advective limits.
pub const CFL_SAFETY: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Zero flux through both walls; the walls carry nodes.
    Reflecting,
    /// `x_max` identified with `x_min`.
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Velocity {
    Uniform {
        v: f64,
    },
    /// Spatially uniform guidance velocity of a coherent packet at time `t`.
    CoherentPacket(CoherentState),
    Nodal {
        v: Vec<f64>,
    },
}

impl Velocity {
    /// Velocity on interface `i + 1/2`.
    fn interface(&self, i: usize, n: usize, t: f64) -> f64 {
        match self {
            Velocity::Uniform { v } => *v,
            Velocity::CoherentPacket(s) => s.guidance_velocity(t),
            Velocity::Nodal { v } => 0.5 * (v[i] + v[(i + 1) % n]),
        }
    }

    /// Bound on `|v|` over all times.
    fn bound(&self) -> f64 {
        match self {
            Velocity::Uniform { v } => v.abs(),
            Velocity::CoherentPacket(s) => (2.0 * crate::units::HBAR * s.omega / s.mass).sqrt() * s.amp0,
            Velocity::Nodal { v } => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub x_min: f64,
    /// Node spacing.
    pub h: f64,
    pub rho: Vec<f64>,
    pub psi_sq: Vec<f64>,
    pub velocity: Velocity,
    pub diffusion: f64,
    pub boundary: Boundary,
    pub time: f64,
    /// Nodes where `|psi|^2` fell below [`F_FLOOR`] while forming `f`.
    pub floor_clamps: usize,
}

impl FieldGrid {
    /// Grid on `[x_min, x_max]` with `n` nodes. Reflecting grids include
    /// both walls; periodic grids omit `x_max`. Densities are normalized.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        x_min: f64,
        x_max: f64,
        n: usize,
        boundary: Boundary,
        diffusion: f64,
        velocity: Velocity,
        rho: impl Fn(f64) -> f64,
        psi_sq: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::param("n_nodes", "need at least 3 nodes"));
        }
        if !(x_max > x_min) {
            return Err(Error::param("x_max", "must exceed x_min"));
        }
        let h = match boundary {
            Boundary::Reflecting => (x_max - x_min) / (n - 1) as f64,
            Boundary::Periodic => (x_max - x_min) / n as f64,
        };
        let xs: Vec<f64> = (0..n).map(|i| x_min + i as f64 * h).collect();
        let mut grid = FieldGrid {
            x_min,
            h,
            rho: xs.iter().map(|&x| rho(x)).collect(),
            psi_sq: xs.iter().map(|&x| psi_sq(x)).collect(),
            velocity,
            diffusion,
            boundary,
            time: 0.0,
            floor_clamps: 0,
        };
        let (mr, mp) = (grid.integrate(&grid.rho), grid.integrate(&grid.psi_sq));
        if !(mr > 0.0 && mp > 0.0) {
            return Err(Error::param("rho", "densities must have positive mass"));
        }
        grid.rho.iter_mut().for_each(|r| *r /= mr);
        grid.psi_sq.iter_mut().for_each(|p| *p /= mp);
        grid.validate()?;
        Ok(grid)
    }

    pub fn n(&self) -> usize {
        self.rho.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h
    }

    /// Quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        match self.boundary {
            Boundary::Reflecting if i == 0 || i + 1 == self.n() => 0.5 * self.h,
            _ => self.h,
        }
    }

    pub fn integrate(&self, u: &[f64]) -> f64 {
        u.iter().enumerate().map(|(i, v)| self.weight(i) * v).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.psi_sq.len() != n {
            return Err(Error::Dimension(format!(
                "{n} rho nodes, {} psi nodes",
                self.psi_sq.len()
            )));
        }
        if let Velocity::Nodal { v } = &self.velocity {
            if v.len() != n {
                return Err(Error::Dimension(format!("{n} nodes, {} velocities", v.len())));
            }
        }
        if !(self.diffusion >= 0.0 && self.diffusion.is_finite()) {
            return Err(Error::param("diffusion", "must be >= 0 and finite"));
        }
        if self.rho.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::param("rho", "density must be nonnegative"));
        }
        if self.psi_sq.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::param("psi_sq", "reference density must be positive"));
        }
        for (name, u) in [("rho", &self.rho), ("psi_sq", &self.psi_sq)] {
            let mass = self.integrate(u);
            if (mass - 1.0).abs() > 1e-6 {
                return Err(Error::param(name, format!("integrates to {mass}, expected 1")));
            }
        }
        Ok(())
    }

    fn interfaces(&self) -> usize {
        match self.boundary {
            Boundary::Reflecting => self.n() - 1,
            Boundary::Periodic => self.n(),
        }
    }

    /// Largest step accepted by the paired dynamics.
    pub fn stable_dt(&self) -> f64 {
        let (h, d, v) = (self.h, self.diffusion, self.velocity.bound());
        let mut dt = f64::INFINITY;
        if d > 0.0 {
            dt = dt.min(h * h / (2.0 * d));
        }
        if v > 0.0 {
            dt = dt.min(h / v);
        }
        dt *= CFL_SAFETY;
        // Positivity of the cell update: v dt/h + 2 D dt/h^2 + (v dt/h)^2 <= 1.
        let a = v * v / (h * h);
        let b = v / h + 2.0 * d / (h * h);
        let positive = if a > 0.0 {
            (-b + (b * b + 4.0 * a).sqrt()) / (2.0 * a)
        } else if b > 0.0 {
            1.0 / b
        } else {
            f64::INFINITY
        };
        dt.min(positive)
    }

    fn check_dt(&self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", "must be positive and finite"));
        }
        let limit = self.stable_dt();
        if dt > limit {
            return Err(Error::Unstable {
                reason: format!(
                    "dt = {dt:.3e} exceeds the diffusion/advection limit (h = {:.3e}, D = {}, |v| <= {:.3e})",
                    self.h,
                    self.diffusion,
                    self.velocity.bound()
                ),
                suggested_dt: limit,
            });
        }
        Ok(())
    }

    fn weights(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.weight(i)).collect()
    }

    /// Lax-Wendroff advection plus diffusion flux of `u`, with the
    /// diffusion raised to the upwind value `|v| h / 2` where it falls
    /// below it so the update stays positive.
    fn advection_diffusion_flux(&self, u: &[f64], dt: f64, diffusion: f64, out: &mut Vec<f64>) {
        let n = self.n();
        out.clear();
        for j in 0..self.interfaces() {
            let (a, b) = (u[j], u[(j + 1) % n]);
            let v = self.velocity.interface(j, n, self.time);
            let d_eff = (diffusion + 0.5 * v * v * dt).max(0.5 * v.abs() * self.h);
            out.push(0.5 * v * (a + b) - d_eff * (b - a) / self.h);
        }
    }

    /// `f = rho / max(|psi|^2, floor)`; counts floor hits.
    fn relative_density(&mut self) -> Vec<f64> {
        let mut clamps = 0;
        let f = self
            .rho
            .iter()
            .zip(&self.psi_sq)
            .map(|(r, p)| {
                if *p < F_FLOOR {
                    clamps += 1;
                }
                r / p.max(F_FLOOR)
            })
            .collect();
        self.floor_clamps += clamps;
        f
    }
}

/// Apply `u_i += -dt (J_{i+1/2} - J_{i-1/2}) / w_i` for fluxes `flux[j]`
/// on interface `j + 1/2`.
fn apply_fluxes(u: &mut [f64], flux: &[f64], dt: f64, weights: &[f64]) {
    let n = u.len();
    for (j, &f) in flux.iter().enumerate() {
        let (l, r) = (j, (j + 1) % n);
        u[l] -= dt * f / weights[l];
        u[r] += dt * f / weights[r];
    }
}

/// Advance the paired dynamics: `rho` and `|psi|^2` share one
/// advection-diffusion operator, so `rho = |psi|^2` is an exact fixed point.
pub fn evolve_fp_paired(grid: &FieldGrid, dt: f64, n_steps: usize) -> Result<FieldGrid> {
    grid.validate()?;
    grid.check_dt(dt)?;
    let mut g = grid.clone();
    let w = g.weights();
    let mut flux = Vec::with_capacity(g.n());
    for _ in 0..n_steps {
        g.advection_diffusion_flux(&g.rho, dt, g.diffusion, &mut flux);
        apply_fluxes(&mut g.rho, &flux, dt, &w);
        g.advection_diffusion_flux(&g.psi_sq, dt, g.diffusion, &mut flux);
        apply_fluxes(&mut g.psi_sq, &flux, dt, &w);
        g.time += dt;
    }
    Ok(g)
}

/// Advance the osmotic dynamics. Each step applies the osmotic flux
/// `-D |psi|^2_{i+1/2} (f_{i+1} - f_i) / h` to `rho` (the discrete
/// `D div(|psi|^2 grad f) = D div(rho grad ln f)`), then advects both
/// densities with the same Lax-Wendroff flux.
pub fn evolve_fp_osmotic(grid: &FieldGrid, dt: f64, n_steps: usize) -> Result<FieldGrid> {
    grid.validate()?;
    grid.check_dt(dt)?;
    let mut g = grid.clone();
    let n = g.n();
    let w = g.weights();
    let mut flux = Vec::with_capacity(n);
    for _ in 0..n_steps {
        let f = g.relative_density();
        flux.clear();
        // Fraction of each cell's mass leaving through the osmotic flux.
        let mut outflow = vec![0.0; n];
        for j in 0..g.interfaces() {
            let r = (j + 1) % n;
            let p_mid = 0.5 * (g.psi_sq[j] + g.psi_sq[r]);
            flux.push(-g.diffusion * p_mid * (f[r] - f[j]) / g.h);
            let rate = dt * g.diffusion * p_mid / g.h;
            outflow[j] += rate / (w[j] * g.psi_sq[j].max(F_FLOOR));
            outflow[r] += rate / (w[r] * g.psi_sq[r].max(F_FLOOR));
        }
        let worst = outflow.iter().fold(0.0f64, |m, &o| m.max(o));
        if worst > 1.0 {
            return Err(Error::Unstable {
                reason: "osmotic step would drive a cell negative where |psi|^2 varies sharply".into(),
                suggested_dt: dt / worst,
            });
        }
        apply_fluxes(&mut g.rho, &flux, dt, &w);
        g.advection_diffusion_flux(&g.rho, dt, 0.0, &mut flux);
        apply_fluxes(&mut g.rho, &flux, dt, &w);
        g.advection_diffusion_flux(&g.psi_sq, dt, 0.0, &mut flux);
        apply_fluxes(&mut g.psi_sq, &flux, dt, &w);
        g.time += dt;
    }
    Ok(g)
}

/// `H = int rho ln(rho / |psi|^2) dx` with `0 ln 0 = 0`.
pub fn h_functional(grid: &FieldGrid) -> f64 {
    (0..grid.n())
        .map(|i| {
            let r = grid.rho[i];
            if r > 0.0 {
                grid.weight(i) * r * (r / grid.psi_sq[i]).ln()
            } else {
                0.0
            }
        })
        .sum()
}

/// `-int D |psi|^2 (grad f)^2 / f dx`, evaluated on interfaces with
/// one-cell differences of `f` and midpoint values of `|psi|^2` and `f`.
pub fn h_dissipation_rate(grid: &FieldGrid) -> f64 {
    let n = grid.n();
    let f: Vec<f64> = grid
        .rho
        .iter()
        .zip(&grid.psi_sq)
        .map(|(r, p)| r / p.max(F_FLOOR))
        .collect();
    let mut total = 0.0;
    for j in 0..grid.interfaces() {
        let r = (j + 1) % n;
        let f_mid = 0.5 * (f[j] + f[r]);
        if f_mid <= 0.0 {
            continue;
        }
        let grad = (f[r] - f[j]) / grid.h;
        let p_mid = 0.5 * (grid.psi_sq[j] + grid.psi_sq[r]);
        total += grid.h * p_mid * grad * grad / f_mid;
    }
    -grid.diffusion * total
}

/// `int |rho - |psi|^2| dx`.
pub fn equilibrium_distance(grid: &FieldGrid) -> f64 {
    (0..grid.n())
        .map(|i| grid.weight(i) * (grid.rho[i] - grid.psi_sq[i]).abs())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `rho` and `|psi|^2` share one advection-diffusion operator.
    Paired,
    /// `|psi|^2` is only advected; `rho` relaxes through the osmotic term.
    Osmotic,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paired" => Ok(Variant::Paired),
            "osmotic" => Ok(Variant::Osmotic),
            other => Err(Error::param("variant", format!("unknown variant `{other}`"))),
        }
    }
}

/// One row of a relaxation time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationSample {
    pub t: f64,
    pub h: f64,
    pub dh_dt: f64,
    pub l1: f64,
}

/// Evolve for `n_steps`, sampling `(t, H, dH/dt, L1)` every `every` steps
/// (and at the start). The callback sees each sampled grid, e.g. to write
/// density snapshots.
pub fn relax_with_monitor(
    grid: &FieldGrid,
    variant: Variant,
    dt: f64,
    n_steps: usize,
    every: usize,
    mut on_sample: impl FnMut(&FieldGrid),
) -> Result<(FieldGrid, Vec<RelaxationSample>)> {
    if every == 0 {
        return Err(Error::param("every", "must be >= 1"));
    }
    let sample = |g: &FieldGrid| RelaxationSample {
        t: g.time,
        h: h_functional(g),
        dh_dt: h_dissipation_rate(g),
        l1: equilibrium_distance(g),
    };
    let mut g = grid.clone();
    let mut out = vec![sample(&g)];
    on_sample(&g);
    let mut done = 0;
    while done < n_steps {
        let chunk = every.min(n_steps - done);
        g = match variant {
            Variant::Paired => evolve_fp_paired(&g, dt, chunk)?,
            Variant::Osmotic => evolve_fp_osmotic(&g, dt, chunk)?,
        };
        done += chunk;
        out.push(sample(&g));
        on_sample(&g);
    }
    Ok((g, out))
}
