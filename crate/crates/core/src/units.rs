//! Reduced units.
//!
//! Every quantity in the numerical modules is expressed in units where
//! `hbar = k_B = 1`. The tagged particle mass is a free parameter but is
//! usually set to 1 as well. With these choices:
//!
//! | quantity      | unit                         |
//! |---------------|------------------------------|
//! | action        | `hbar`                       |
//! | energy        | `hbar * omega_ref`           |
//! | temperature   | energy / `k_B`               |
//! | time          | `1 / omega_ref`              |
//! | length        | `sqrt(hbar / (m omega_ref))` |
//! | force         | energy / length              |
//!
//! where `omega_ref` is whatever frequency the caller picks as reference
//! (typically `Gamma` or `omega_c`). Physical SI values appear only in
//! [`crate::langevin::gold`].

/// Reduced Planck constant.
pub const HBAR: f64 = 1.0;

/// Boltzmann constant.
pub const KB: f64 = 1.0;
