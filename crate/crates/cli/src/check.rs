//! Fast self-checks of the library against closed forms.

use std::f64::consts::PI;

use pilot_brownian::bath::{continuum_kernel, discretize_ohmic, CutoffShape};
use pilot_brownian::coherent::CoherentState;
use pilot_brownian::langevin::gold_case;
use pilot_brownian::thermal::{potential_moment_analytic, Occupation, ThermalMoments, ThermalSampler};
use pilot_brownian::units::{HBAR, KB};

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn kernel_fidelity() -> CheckResult {
    let (gamma0, wc) = (1.0, 1.0);
    let detail;
    let passed = match discretize_ohmic(gamma0, wc, 4000, CutoffShape::Lorentzian, 30.0 * wc) {
        Ok(spec) => {
            let worst = (0..=500)
                .map(|i| {
                    let tau = 5.0 / wc * i as f64 / 500.0;
                    let exact = continuum_kernel(CutoffShape::Lorentzian, gamma0, wc, tau);
                    (spec.memory_kernel(tau) - exact).abs() / exact
                })
                .fold(0.0, f64::max);
            detail = format!("max relative deviation {:.3}% (limit 2%)", 100.0 * worst);
            worst <= 0.02
        }
        Err(e) => {
            detail = e.to_string();
            false
        }
    };
    result("kernel fidelity", passed, detail)
}

fn zero_point_constant() -> CheckResult {
    let (gamma0, wc) = (1.0, 3.0);
    match discretize_ohmic(gamma0, wc, 2000, CutoffShape::Sharp, wc) {
        Ok(spec) => {
            let expected = gamma0 * HBAR * wc * wc / (2.0 * PI);
            let rel = (spec.zpf_constant() - expected).abs() / expected;
            result(
                "zero-point constant",
                rel <= 0.01,
                format!("relative error {rel:.2e} (limit 1e-2)"),
            )
        }
        Err(e) => result("zero-point constant", false, e.to_string()),
    }
}

fn thermal_moments() -> CheckResult {
    let (omega, t) = (1.0, 50.0);
    let sampler = ThermalSampler::new(t, 0, 1)
        .map(|s| s.with_occupation(Occupation::HighTemperature))
        .expect("valid sampler");
    let m = ThermalMoments::new(omega, sampler.mean_occupation(omega));
    let expected = KB * t + 0.5 * HBAR * omega;
    let rel = (m.total - expected).abs() / expected;
    let closure = m.closure_residual().abs();
    let pot = (m.potential - potential_moment_analytic(omega, t)).abs();
    result(
        "thermal moments",
        rel <= 0.01 && closure < 1e-12 && pot < 1e-9,
        format!("<H> relative error {rel:.2e}, closure residual {closure:.1e}"),
    )
}

fn gold_arithmetic() -> CheckResult {
    let g = gold_case();
    let passed = (g.d_over_dq - 112.0).abs() <= 1.0
        && (g.lambda_ratio - 0.037).abs() <= 0.001
        && (5.5e-5..=5.8e-5).contains(&g.d_q);
    result(
        "gold arithmetic",
        passed,
        format!(
            "D/D_Q = {:.2}, ratio = {:.5}, D_Q = {:.4e}",
            g.d_over_dq, g.lambda_ratio, g.d_q
        ),
    )
}

fn coherent_identities() -> CheckResult {
    let Ok(s) = CoherentState::new(1.3, 2.1, 0.8, 0.4, 0.0, 0.25) else {
        return result("coherent identities", false, "invalid state".into());
    };
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let t = 0.07 * i as f64;
        let x = s.trajectory_position(t);
        let newton = s.mass * s.trajectory_acceleration(t) + s.mass * s.omega * s.omega * (x - s.offset);
        worst = worst.max(newton.abs());
        let q = s.quantum_potential(x, t);
        let kinetic = 0.5 * s.mass * s.guidance_velocity(t).powi(2);
        let potential = 0.5 * s.mass * s.omega * s.omega * x * x;
        worst = worst.max((s.particle_energy(t) - (kinetic + potential + q)).abs());
    }
    result(
        "coherent identities",
        worst <= 1e-10,
        format!("worst residual {worst:.1e}"),
    )
}

pub fn run_checks() -> Vec<CheckResult> {
    vec![
        kernel_fidelity(),
        zero_point_constant(),
        thermal_moments(),
        gold_arithmetic(),
        coherent_identities(),
    ]
}
