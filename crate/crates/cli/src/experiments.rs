use std::collections::BTreeMap;

use clap::ValueEnum;
use pilot_brownian::bath::{continuum_kernel, discretize_ohmic_with_mass, BathSpec, CutoffShape};
use pilot_brownian::coherent::CoherentState;
use pilot_brownian::kostin::{
    bohmian_trajectories_from_field, evolve_with_history, langevin_residual, Drive, KostinState,
};
use pilot_brownian::langevin::{
    ensemble_msd, estimate_diffusion, gold_case, integrate_gle, integrate_markovian, run_ensemble, spreading_regime,
    velocity_variance, GleConfig, NoiseSource, TrajectoryRecord,
};
use pilot_brownian::potential::PotentialSpec;
use pilot_brownian::relax::{relax_with_monitor, FieldGrid, Velocity};
use pilot_brownian::thermal::{force_correlator_analytic, force_statistics_mc, ThermalSampler};
use pilot_brownian::units::KB;
use pilot_brownian::Error;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{NoiseKind, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BathCheck,
    Correlator,
    Gle,
    Markovian,
    Relax,
    Kostin,
    Gold,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::BathCheck => "bath-check",
            Experiment::Correlator => "correlator",
            Experiment::Gle => "gle",
            Experiment::Markovian => "markovian",
            Experiment::Relax => "relax",
            Experiment::Kostin => "kostin",
            Experiment::Gold => "gold",
        }
    }
}

/// Numeric table written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub summary: BTreeMap<String, Value>,
    pub tables: Vec<DataTable>,
    /// Extra text artifacts `(file name, contents)`.
    pub texts: Vec<(String, String)>,
}

impl Outcome {
    fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    fn table(&mut self, name: &str, header: &[&'static str], rows: Vec<Vec<f64>>) {
        self.tables.push(DataTable {
            name: name.to_string(),
            header: header.to_vec(),
            rows,
        });
    }
}

pub fn run(experiment: Experiment, cfg: &RunConfig) -> pilot_brownian::Result<Outcome> {
    match experiment {
        Experiment::BathCheck => bath_check(cfg),
        Experiment::Correlator => correlator(cfg),
        Experiment::Gle | Experiment::Markovian => dynamics(experiment, cfg),
        Experiment::Relax => relax(cfg),
        Experiment::Kostin => kostin(cfg),
        Experiment::Gold => gold(),
    }
}

pub fn build_bath(cfg: &RunConfig) -> pilot_brownian::Result<BathSpec> {
    let b = &cfg.bath;
    discretize_ohmic_with_mass(
        b.mass,
        b.gamma0,
        b.cutoff,
        b.n_modes,
        b.cutoff_shape,
        b.freq_max_ratio * b.cutoff,
    )
}

fn sampler(cfg: &RunConfig, n_samples: usize) -> pilot_brownian::Result<ThermalSampler> {
    Ok(ThermalSampler::new(cfg.thermal.temperature, cfg.seed, n_samples)?.with_occupation(cfg.thermal.occupation))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn bath_check(cfg: &RunConfig) -> pilot_brownian::Result<Outcome> {
    let spec = build_bath(cfg)?;
    let p = &cfg.bath_check;
    if p.n_tau < 2 {
        return Err(Error::param("bath_check.n_tau", "need at least 2 lags"));
    }
    let taus = linspace(0.0, p.tau_max / spec.cutoff, p.n_tau);
    let peak = continuum_kernel(spec.cutoff_shape, spec.gamma0, spec.cutoff, 0.0);
    let mut out = Outcome::default();
    let mut max_rel: f64 = 0.0;
    let mut max_rel_peak: f64 = 0.0;
    let rows = taus
        .iter()
        .map(|&tau| {
            let g_n = spec.memory_kernel(tau);
            let g = continuum_kernel(spec.cutoff_shape, spec.gamma0, spec.cutoff, tau);
            let rel = if g != 0.0 { (g_n - g).abs() / g.abs() } else { 0.0 };
            max_rel = max_rel.max(rel);
            max_rel_peak = max_rel_peak.max((g_n - g).abs() / peak);
            vec![tau, g_n, g, rel]
        })
        .collect();
    out.table("kernel", &["tau", "gamma_discrete", "gamma_continuum", "rel_dev"], rows);
    // Pointwise relative deviation is only meaningful for a positive kernel.
    if spec.cutoff_shape == CutoffShape::Lorentzian {
        out.put("kernel_max_rel_error", max_rel);
    }
    out.put("kernel_max_error_rel_peak", max_rel_peak);
    let (a, a_cont) = (spec.zpf_constant(), spec.zpf_continuum());
    out.put("zpf_constant", a);
    out.put("zpf_continuum", a_cont);
    out.put("zpf_rel_error", (a - a_cont).abs() / a_cont.abs());
    out.put("recurrence_time", spec.recurrence_time());
    out.texts
        .push(("bath.toml".into(), pilot_brownian::bath::bath_to_toml(&spec)?));
    Ok(out)
}

fn correlator(cfg: &RunConfig) -> pilot_brownian::Result<Outcome> {
    let spec = build_bath(cfg)?;
    let p = &cfg.correlator;
    let sampler = sampler(cfg, p.n_samples)?;
    let taus = linspace(0.0, p.tau_max, p.n_tau);
    let stats = force_statistics_mc(&spec, &sampler, &taus, p.t_ref)?;
    let kt = KB * cfg.thermal.temperature;
    let mut out = Outcome::default();
    let mut max_z: f64 = 0.0;
    let (mut wsum, mut wfloor) = (0.0, 0.0);
    let rows = taus
        .iter()
        .zip(&stats.correlator)
        .map(|(&tau, c)| {
            let analytic = force_correlator_analytic(&spec, cfg.thermal.temperature, tau);
            let z = c.z_score(analytic);
            max_z = max_z.max(z.abs());
            if c.std_error > 0.0 {
                let w = c.std_error.powi(-2);
                wsum += w;
                wfloor += w * (c.mean - kt * spec.system_mass * spec.memory_kernel(tau));
            }
            vec![tau, c.mean, c.std_error, analytic, z]
        })
        .collect();
    out.table("correlator", &["tau", "mc_mean", "mc_std_error", "analytic", "z"], rows);
    out.put("mean_force", stats.mean_force.mean);
    out.put("mean_force_std_error", stats.mean_force.std_error);
    out.put("mean_force_z", stats.mean_force.z_score(0.0));
    out.put("max_abs_z", max_z);
    out.put("zpf_constant", spec.zpf_constant());
    if wsum > 0.0 {
        out.put("floor_estimate", wfloor / wsum);
        out.put("floor_estimate_std_error", wsum.powf(-0.5));
    }
    Ok(out)
}

fn dynamics(experiment: Experiment, cfg: &RunConfig) -> pilot_brownian::Result<Outcome> {
    let spec = build_bath(cfg)?;
    let p = &cfg.dynamics;
    let sampler = sampler(cfg, p.n_realizations)?;
    let gle = GleConfig {
        mass: cfg.bath.mass,
        potential: if p.spring > 0.0 {
            PotentialSpec::Harmonic { k: p.spring }
        } else {
            PotentialSpec::Free
        },
        gamma0: cfg.bath.gamma0,
        t_end: p.t_end,
        dt: p.dt,
        x0: p.x0,
        v0: p.v0,
        slip_term: p.slip_term,
        memory: p.memory,
        record_every: p.record_every,
        ..GleConfig::default()
    };
    let temperature = cfg.thermal.temperature;
    let records: Vec<TrajectoryRecord> = run_ensemble(p.n_realizations, cfg.seed, |rng, _| match experiment {
        Experiment::Gle => integrate_gle(&spec, &sampler.sample_bath(rng, &spec, 0.0), &gle),
        _ => {
            let noise = match p.noise {
                NoiseKind::None => NoiseSource::None,
                NoiseKind::White => NoiseSource::White {
                    temperature,
                    seed: rng.random(),
                },
                NoiseKind::SampledBath => NoiseSource::SampledBath {
                    spec: spec.clone(),
                    sample: sampler.sample_bath(rng, &spec, 0.0),
                },
            };
            integrate_markovian(&gle, &noise)
        }
    })?;

    let mut out = Outcome::default();
    let first = &records[0];
    out.table(
        "trajectory_0",
        &["t", "x", "v", "force"],
        (0..first.len())
            .map(|i| {
                vec![
                    first.times[i],
                    first.positions[i],
                    first.velocities[i],
                    first.force_samples[i],
                ]
            })
            .collect(),
    );
    let spacing = first.spacing().unwrap_or(p.dt);
    let start = (p.burn_in / spacing).ceil() as usize;
    let stride = p.lag_stride.max(1);
    let taus: Vec<f64> = (0..)
        .map(|k| k * stride)
        .take_while(|&k| start + k < first.len())
        .map(|k| k as f64 * spacing)
        .collect();
    if taus.is_empty() {
        return Err(Error::InsufficientData("no samples after burn-in".into()));
    }
    let msd = ensemble_msd(&records, &taus, p.burn_in)?;
    out.table(
        "msd",
        &["tau", "msd", "std_error"],
        taus.iter()
            .zip(&msd)
            .map(|(t, s)| vec![*t, s.mean, s.std_error])
            .collect(),
    );
    let m = cfg.bath.mass;
    let g = cfg.bath.gamma0;
    let kt = KB * temperature;
    let v2 = velocity_variance(&records, p.burn_in)?;
    out.put("v2", v2.mean);
    out.put("v2_std_error", v2.std_error);
    // The zero-point floor A of the force correlator adds A / (m Gamma)^2.
    let floor = match (experiment, p.noise) {
        (Experiment::Markovian, NoiseKind::White | NoiseKind::None) => 0.0,
        _ if g > 0.0 => spec.zpf_constant() / (m * m * g * g),
        _ => 0.0,
    };
    out.put("v2_expected", kt / m + floor);
    out.put("window_valid_until", first.window_valid_until);
    match estimate_diffusion(&taus, &msd, (p.fit_lo, p.fit_hi)) {
        Ok(fit) => {
            out.put("diffusion", fit.diffusion);
            out.put("diffusion_std_error", fit.diffusion_err);
            out.put("quadratic", fit.quadratic);
            out.put("quadratic_std_error", fit.quadratic_err);
            out.put("intercept", fit.intercept);
            out.put("fit_points", fit.n_points);
        }
        Err(e) => log::warn!("diffusion fit skipped: {e}"),
    }
    if g > 0.0 {
        out.put("diffusion_expected", kt / (m * g));
        out.put("quadratic_expected", spec.zpf_constant() / (m * m * g * g));
    }
    let (regime, ratio) = spreading_regime(spec.cutoff, temperature, p.fit_hi);
    out.put("regime", json!(regime));
    out.put("regime_ratio", ratio);
    Ok(out)
}

fn gaussian(center: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |x| (-(x - center).powi(2) / (2.0 * width * width)).exp()
}

fn relax(cfg: &RunConfig) -> pilot_brownian::Result<Outcome> {
    let p = &cfg.relax;
    let grid = FieldGrid::new(
        p.x_min,
        p.x_max,
        p.n_nodes,
        p.boundary,
        p.diffusion,
        Velocity::Uniform { v: p.velocity },
        gaussian(p.rho_center, p.rho_width),
        gaussian(0.0, p.psi_width),
    )?;
    let dt = if p.dt > 0.0 { p.dt } else { grid.stable_dt() };
    if !(p.t_end > 0.0) {
        return Err(Error::param("relax.t_end", "must be positive"));
    }
    let n_steps = (p.t_end / dt).ceil() as usize;
    let (last, samples) = relax_with_monitor(&grid, p.variant, dt, n_steps, p.monitor_every.max(1), |_| {})?;
    let mut out = Outcome::default();
    let monotone = samples.windows(2).all(|w| w[1].h <= w[0].h + 1e-12);
    out.table(
        "relax",
        &["t", "h", "dh_dt", "l1"],
        samples.iter().map(|s| vec![s.t, s.h, s.dh_dt, s.l1]).collect(),
    );
    out.table(
        "density",
        &["x", "rho", "psi_sq"],
        (0..last.n())
            .map(|i| vec![last.x(i), last.rho[i], last.psi_sq[i]])
            .collect(),
    );
    out.put("dt", dt);
    out.put("n_steps", n_steps);
    out.put("h_initial", samples[0].h);
    out.put("h_final", samples.last().map_or(f64::NAN, |s| s.h));
    out.put("l1_final", samples.last().map_or(f64::NAN, |s| s.l1));
    out.put("h_monotone", monotone);
    out.put("floor_clamps", last.floor_clamps);
    Ok(out)
}

fn kostin(cfg: &RunConfig) -> pilot_brownian::Result<Outcome> {
    let p = &cfg.kostin;
    let packet = CoherentState::from_center(p.mass, p.omega, p.x0, p.v0, 0.0, 0.0)?;
    let drive = if p.force != 0.0 {
        Drive::Constant { force: p.force }
    } else {
        Drive::None
    };
    let state = KostinState::coherent(
        p.x_min,
        p.x_max,
        p.n_nodes,
        &packet,
        p.gamma0,
        PotentialSpec::Harmonic {
            k: p.mass * p.omega * p.omega,
        },
        drive,
    )?
    .with_mean_phase_subtraction(p.mean_phase_subtraction);
    let (_, history) = evolve_with_history(&state, p.dt, p.n_steps, p.store_every.max(1))?;
    let mut out = Outcome::default();
    let mut snapshot = state.clone();
    let mut norm_drift: f64 = 0.0;
    let rows: Vec<Vec<f64>> = history
        .times
        .iter()
        .zip(&history.fields)
        .map(|(&t, field)| {
            snapshot.field.clone_from(field);
            let norm = snapshot.norm();
            norm_drift = norm_drift.max((norm - 1.0).abs());
            vec![
                t,
                norm,
                snapshot.mean_position(),
                snapshot.mean_momentum(),
                snapshot.energy(),
            ]
        })
        .collect();
    out.table("observables", &["t", "norm", "mean_x", "mean_p", "energy"], rows);
    out.put("norm_drift", norm_drift);

    let derived = history.derived();
    let width = packet.width_sq().sqrt();
    let starts = linspace(p.x0 - 2.0 * width, p.x0 + 2.0 * width, p.n_trajectories);
    let trajectories = bohmian_trajectories_from_field(&history, &derived, &starts)?;
    let mut rows = Vec::new();
    let (mut res_max, mut res_sq, mut res_n) = (0.0f64, 0.0, 0usize);
    for (id, tr) in trajectories.iter().enumerate() {
        rows.extend(tr.times.iter().zip(&tr.positions).map(|(t, x)| vec![id as f64, *t, *x]));
        if let Ok(r) = langevin_residual(&history, &derived, tr) {
            res_max = res_max.max(r.max_abs);
            res_sq += r.rms * r.rms * r.residual.len() as f64;
            res_n += r.residual.len();
        }
    }
    out.table("trajectories", &["id", "t", "x"], rows);
    out.put(
        "truncated_trajectories",
        trajectories.iter().filter(|t| t.truncated).count(),
    );
    out.put("residual_max", res_max);
    if res_n > 0 {
        out.put("residual_rms", (res_sq / res_n as f64).sqrt());
    }
    Ok(out)
}

fn gold() -> pilot_brownian::Result<Outcome> {
    let g = gold_case();
    let mut out = Outcome::default();
    if let Value::Object(map) = json!(g) {
        out.summary.extend(map);
    }
    out.put("d_q_discrepancy_percent", 100.0 * (g.d_q - g.d_q_quoted) / g.d_q_quoted);
    out.texts.push(("gold.txt".into(), format!("{g}\n")));
    Ok(out)
}
