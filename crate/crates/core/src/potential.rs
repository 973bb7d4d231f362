//! External and system quantum potentials acting on the tagged particle.

use serde::{Deserialize, Serialize};

use crate::coherent::CoherentState;
use crate::{Error, Result};

/// External potential `V(x)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// Constant potential, no force.
    #[default]
    Free,
    /// `V = k x^2 / 2`.
    Harmonic { k: f64 },
    /// Tabulated `V(x)` and `dV/dx` on an increasing grid; linear
    /// interpolation inside, linear continuation of `V` with the edge slope
    /// outside.
    Tabulated {
        x: Vec<f64>,
        value: Vec<f64>,
        gradient: Vec<f64>,
    },
}

impl PotentialSpec {
    /// Build a table by sampling a potential and its derivative.
    pub fn tabulate(x: Vec<f64>, value: impl Fn(f64) -> f64, gradient: impl Fn(f64) -> f64) -> Result<Self> {
        let v = x.iter().map(|&xi| value(xi)).collect();
        let g = x.iter().map(|&xi| gradient(xi)).collect();
        let spec = PotentialSpec::Tabulated {
            x,
            value: v,
            gradient: g,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks table shape and that the tabulated gradient agrees with finite
    /// differences of the tabulated values.
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Free => Ok(()),
            PotentialSpec::Harmonic { k } => {
                if k.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("potential.k", "spring constant must be finite"))
                }
            }
            PotentialSpec::Tabulated { x, value, gradient } => {
                if x.len() < 2 || value.len() != x.len() || gradient.len() != x.len() {
                    return Err(Error::Dimension(format!(
                        "tabulated potential with {} nodes, {} values, {} gradients",
                        x.len(),
                        value.len(),
                        gradient.len()
                    )));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::param("potential.x", "grid must be strictly increasing"));
                }
                let scale = gradient.iter().fold(1e-12f64, |m, g| m.max(g.abs()));
                for i in 0..x.len() - 1 {
                    let fd = (value[i + 1] - value[i]) / (x[i + 1] - x[i]);
                    let mid = 0.5 * (gradient[i] + gradient[i + 1]);
                    if (fd - mid).abs() > 0.05 * scale + 1e-9 {
                        return Err(Error::param(
                            "potential.gradient",
                            format!(
                                "gradient inconsistent with values on [{}, {}]: finite difference {fd:.4e} vs tabulated {mid:.4e}",
                                x[i],
                                x[i + 1]
                            ),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Harmonic { k } => 0.5 * k * x * x,
            PotentialSpec::Tabulated {
                x: grid,
                value,
                gradient,
            } => {
                let n = grid.len();
                if x <= grid[0] {
                    value[0] + gradient[0] * (x - grid[0])
                } else if x >= grid[n - 1] {
                    value[n - 1] + gradient[n - 1] * (x - grid[n - 1])
                } else {
                    let (i, w) = locate(grid, x);
                    value[i] * (1.0 - w) + value[i + 1] * w
                }
            }
        }
    }

    pub fn gradient(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Harmonic { k } => k * x,
            PotentialSpec::Tabulated { x: grid, gradient, .. } => {
                let n = grid.len();
                if x <= grid[0] {
                    gradient[0]
                } else if x >= grid[n - 1] {
                    gradient[n - 1]
                } else {
                    let (i, w) = locate(grid, x);
                    gradient[i] * (1.0 - w) + gradient[i + 1] * w
                }
            }
        }
    }
}

fn locate(grid: &[f64], x: f64) -> (usize, f64) {
    let i = grid.partition_point(|&g| g <= x).saturating_sub(1).min(grid.len() - 2);
    let w = (x - grid[i]) / (grid[i + 1] - grid[i]);
    (i, w)
}

/// System part `Q_S` of the factorized quantum potential.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuantumPotentialSpec {
    /// Spatially uniform amplitude: `Q_S` constant, no force.
    #[default]
    None,
    /// `Q_S` of a harmonic coherent packet for the system itself.
    CoherentPacket(CoherentState),
}

impl QuantumPotentialSpec {
    /// `-dQ_S/dx` at `(x, t)`.
    pub fn force(&self, x: f64, t: f64) -> f64 {
        match self {
            QuantumPotentialSpec::None => 0.0,
            QuantumPotentialSpec::CoherentPacket(state) => state.quantum_force(x, t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_gradient() {
        let v = PotentialSpec::Harmonic { k: 2.0 };
        assert_relative_eq!(v.value(3.0), 9.0);
        assert_relative_eq!(v.gradient(3.0), 6.0);
    }

    #[test]
    fn tabulated_matches_analytic_quartic() {
        let x: Vec<f64> = (0..=400).map(|i| -2.0 + 0.01 * f64::from(i)).collect();
        let v = PotentialSpec::tabulate(x, |x| x.powi(4), |x| 4.0 * x.powi(3)).unwrap();
        assert_relative_eq!(v.value(0.5), 0.0625, epsilon = 1e-4);
        assert_relative_eq!(v.gradient(0.5), 0.5, epsilon = 1e-3);
        // linear continuation outside the table
        assert_relative_eq!(v.value(2.5), 16.0 + 32.0 * 0.5, epsilon = 1e-9);
    }

    #[test]
    fn inconsistent_gradient_rejected() {
        let x: Vec<f64> = (0..50).map(|i| 0.1 * f64::from(i)).collect();
        let err = PotentialSpec::tabulate(x, |x| x * x, |x| -2.0 * x).unwrap_err();
        assert!(matches!(
            err,
            Error::Parameter {
                name: "potential.gradient",
                ..
            }
        ));
    }
}
