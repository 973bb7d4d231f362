//! Free-electron estimate of the pilot-wave diffusion constant in gold.
//!
//! Electrons of a Fermi gas at effective temperature `(2/3) T_F` diffuse with
//! `D = (2/3) E_F tau_r / m_e`, so `D / D_Q = (4/3) E_F / (hbar Gamma)` with
//! `D_Q = hbar / (2 m_e)` and `tau_r = 1 / Gamma`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

/// SI constants (CODATA 2018, exact where defined).
pub mod si {
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const PLANCK: f64 = 2.0 * std::f64::consts::PI * HBAR;
    pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
    pub const BOLTZMANN: f64 = 1.380_649e-23;
}

/// Energy width of the momentum relaxation, `hbar Gamma`, in eV.
pub const GOLD_HBAR_GAMMA_EV: f64 = 0.0658;
pub const GOLD_FERMI_ENERGY_EV: f64 = 5.53;
/// Tabulated Fermi wavelength, nm.
pub const GOLD_FERMI_WAVELENGTH_NM: f64 = 0.55;
/// Commonly quoted rounded value of `hbar / (2 m_e)`, m^2/s.
pub const QUOTED_QUANTUM_DIFFUSIVITY: f64 = 5.5e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoldCase {
    pub hbar_gamma_ev: f64,
    pub fermi_energy_ev: f64,
    /// `tau_r = hbar / (hbar Gamma) = 1 / Gamma`, seconds.
    pub tau_r: f64,
    /// `h / (hbar Gamma) = 2 pi / Gamma`, seconds; the convention behind the
    /// frequently quoted `6.2e-14 s`.
    pub tau_r_planck: f64,
    /// `D / D_Q = (4/3) E_F / (hbar Gamma)`.
    pub d_over_dq: f64,
    /// `lambda_F / (v_F tau_r) = pi hbar Gamma / E_F`.
    pub lambda_ratio: f64,
    /// `D_Q = hbar / (2 m_e)`, m^2/s.
    pub d_q: f64,
    pub d_q_quoted: f64,
    /// `D = (D / D_Q) D_Q`, m^2/s.
    pub diffusion: f64,
    /// `v_F = sqrt(2 E_F / m_e)`, m/s.
    pub fermi_velocity: f64,
    /// `T_F = E_F / kB`, kelvin.
    pub fermi_temperature: f64,
    /// `h / (m_e v_F)` from the Fermi energy, nm.
    pub fermi_wavelength_from_energy_nm: f64,
    pub fermi_wavelength_tabulated_nm: f64,
}

pub fn gold_case() -> GoldCase {
    let hbar_gamma = GOLD_HBAR_GAMMA_EV * si::ELECTRON_VOLT;
    let e_f = GOLD_FERMI_ENERGY_EV * si::ELECTRON_VOLT;
    let m = si::ELECTRON_MASS;
    let d_q = si::HBAR / (2.0 * m);
    let d_over_dq = 4.0 / 3.0 * e_f / hbar_gamma;
    let v_f = (2.0 * e_f / m).sqrt();
    GoldCase {
        hbar_gamma_ev: GOLD_HBAR_GAMMA_EV,
        fermi_energy_ev: GOLD_FERMI_ENERGY_EV,
        tau_r: si::HBAR / hbar_gamma,
        tau_r_planck: si::PLANCK / hbar_gamma,
        d_over_dq,
        lambda_ratio: PI * hbar_gamma / e_f,
        d_q,
        d_q_quoted: QUOTED_QUANTUM_DIFFUSIVITY,
        diffusion: d_over_dq * d_q,
        fermi_velocity: v_f,
        fermi_temperature: e_f / si::BOLTZMANN,
        fermi_wavelength_from_energy_nm: si::PLANCK / (m * v_f) * 1e9,
        fermi_wavelength_tabulated_nm: GOLD_FERMI_WAVELENGTH_NM,
    }
}

impl fmt::Display for GoldCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Free-electron diffusion estimate for gold")?;
        writeln!(
            f,
            "  inputs: hbar*Gamma = {} eV, E_F = {} eV",
            self.hbar_gamma_ev, self.fermi_energy_ev
        )?;
        writeln!(f, "  T_F                 = {:.0} K", self.fermi_temperature)?;
        writeln!(f, "  v_F                 = {:.4e} m/s", self.fermi_velocity)?;
        writeln!(f, "  tau_r = 1/Gamma     = {:.4e} s", self.tau_r)?;
        writeln!(
            f,
            "  tau_r = 2 pi/Gamma  = {:.4e} s   (h / hbar*Gamma convention)",
            self.tau_r_planck
        )?;
        writeln!(f, "  D / D_Q             = {:.2}", self.d_over_dq)?;
        writeln!(f, "  lambda_F/(v_F tau_r)= {:.5}", self.lambda_ratio)?;
        writeln!(
            f,
            "  D_Q = hbar/(2 m_e)  = {:.4e} m^2/s   (rounded value often quoted: {:.1e}; differs by {:.1}%)",
            self.d_q,
            self.d_q_quoted,
            100.0 * (self.d_q - self.d_q_quoted) / self.d_q_quoted
        )?;
        writeln!(f, "  D                   = {:.4e} m^2/s", self.diffusion)?;
        write!(
            f,
            "  lambda_F            = {:.3} nm from E_F, {:.2} nm tabulated",
            self.fermi_wavelength_from_energy_nm, self.fermi_wavelength_tabulated_nm
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_are_dimensionless_and_consistent() {
        let g = gold_case();
        let direct = g.diffusion / g.d_q;
        assert!((direct - g.d_over_dq).abs() < 1e-12 * g.d_over_dq);
        // lambda_F / (v_F tau_r) from its pieces.
        let lambda = g.fermi_wavelength_from_energy_nm * 1e-9;
        let ratio = lambda / (g.fermi_velocity * g.tau_r);
        assert!((ratio - g.lambda_ratio).abs() < 1e-12 * ratio);
        assert!((g.tau_r_planck / g.tau_r - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn report_mentions_both_conventions() {
        let text = gold_case().to_string();
        assert!(text.contains("1/Gamma"));
        assert!(text.contains("2 pi/Gamma"));
        assert!(text.contains("tabulated"));
    }
}
