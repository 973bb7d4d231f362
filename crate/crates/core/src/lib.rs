//! Quantum Brownian motion in the de Broglie-Bohm pilot-wave picture.
//!
//! A tagged particle is coupled to a Caldeira-Leggett bath of harmonic
//! oscillators. Each bath oscillator sits in a coherent state drawn from the
//! thermal Glauber P-distribution, and its Bohmian trajectory feeds a
//! quasi-deterministic fluctuating force into a generalized Langevin
//! equation. The crate provides:
//!
//! * [`bath`]: discretized Ohmic baths, memory kernel, zero-point constant,
//!   fluctuating force, and the exact microscopic (1+N)-body integrator.
//! * [`coherent`]: closed-form Bohmian dynamics of a coherent state.
//! * [`thermal`]: thermal samplers, Monte Carlo averages and force correlators.
//! * [`langevin`]: GLE / Markovian integrators, MSD and diffusion fits, and
//!   the free-electron gold estimate.
//! * [`relax`]: Fokker-Planck relaxation towards `|psi|^2` with the H-functional.
//! * [`kostin`]: the Schrödinger-Langevin (Kostin) equation and its Bohmian
//!   trajectories.
//!
//! All numerics use reduced units, see [`units`].

pub mod bath;
pub mod coherent;
pub mod error;
pub mod kostin;
pub mod langevin;
pub mod potential;
pub mod relax;
pub mod rng;
pub mod stats;
pub mod thermal;
pub mod units;

mod time;

pub use error::{Error, Result};
