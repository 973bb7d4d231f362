//! Monte Carlo summaries and small least-squares helpers.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mean of an i.i.d. Monte Carlo estimator with its standard error
/// (sample standard deviation over `sqrt(n_samples)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl EnsembleStats {
    /// Distance from `target` in units of the standard error. An exact match
    /// with zero error gives 0; a mismatch with zero error gives infinity.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else if self.std_error == 0.0 {
            f64::INFINITY
        } else {
            diff / self.std_error
        }
    }

    pub fn agrees_with(&self, target: f64, n_sigma: f64) -> bool {
        self.z_score(target) <= n_sigma
    }

    pub fn from_samples(samples: &[f64]) -> Self {
        let mut acc = Accumulator::default();
        for &s in samples {
            acc.push(s);
        }
        acc.stats()
    }
}

/// Welford accumulator; chunks merge with Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn stats(&self) -> EnsembleStats {
        EnsembleStats {
            mean: self.mean,
            std_error: if self.n == 0 {
                0.0
            } else {
                (self.variance() / self.n as f64).sqrt()
            },
            n_samples: self.n,
        }
    }
}

/// Weighted linear least squares `y ~ sum_j beta_j * basis_j(x)`.
///
/// Returns the coefficients and their standard errors taken from the
/// diagonal of `(A^T W A)^{-1}`.
pub fn weighted_least_squares(rows: &[Vec<f64>], y: &[f64], weights: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rows.len();
    if n == 0 || y.len() != n || weights.len() != n {
        return Err(Error::Dimension(format!(
            "least squares with {} rows, {} targets, {} weights",
            n,
            y.len(),
            weights.len()
        )));
    }
    let p = rows[0].len();
    if n < p {
        return Err(Error::SingularFit(format!("{n} points for {p} parameters")));
    }
    let mut normal = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    for ((row, &yi), &wi) in rows.iter().zip(y).zip(weights) {
        for a in 0..p {
            rhs[a] += wi * row[a] * yi;
            for b in 0..p {
                normal[a][b] += wi * row[a] * row[b];
            }
        }
    }
    let inverse = invert_spd(&normal)?;
    let beta: Vec<f64> = (0..p).map(|a| (0..p).map(|b| inverse[a][b] * rhs[b]).sum()).collect();
    let errors = (0..p).map(|a| inverse[a][a].max(0.0).sqrt()).collect();
    Ok((beta, errors))
}

/// Gauss-Jordan inverse with partial pivoting and a relative singularity test.
fn invert_spd(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let p = m.len();
    let scale = m.iter().enumerate().map(|(i, r)| r[i].abs()).fold(0.0f64, f64::max);
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() <= 1e-13 * scale || !a[pivot][col].is_finite() {
            return Err(Error::SingularFit(format!(
                "pivot {:.3e} in column {col}",
                a[pivot][col]
            )));
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..p {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..p {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..p {
                        a[i][j] -= f * a[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn std_error_matches_definition() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let s = EnsembleStats::from_samples(&xs);
        assert_relative_eq!(s.mean, 2.5);
        // sample sd = sqrt(5/3)
        assert_relative_eq!(s.std_error, (5.0f64 / 3.0).sqrt() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn merge_equals_single_pass() {
        let xs: Vec<f64> = (0..101).map(|i| ((i * 37) % 11) as f64 * 0.3 - 1.0).collect();
        let whole = EnsembleStats::from_samples(&xs);
        let mut a = Accumulator::default();
        let mut b = Accumulator::default();
        xs[..40].iter().for_each(|&x| a.push(x));
        xs[40..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_relative_eq!(a.stats().mean, whole.mean, epsilon = 1e-14);
        assert_relative_eq!(a.stats().std_error, whole.std_error, epsilon = 1e-14);
    }

    #[test]
    fn constant_samples_have_zero_error() {
        let s = EnsembleStats::from_samples(&[1.0; 17]);
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.std_error, 0.0);
        assert_eq!(s.z_score(1.0), 0.0);
    }

    #[test]
    fn least_squares_recovers_quadratic() {
        let xs: Vec<f64> = (1..20).map(f64::from).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x, x * x]).collect();
        let y: Vec<f64> = xs.iter().map(|&x| 0.5 - 2.0 * x + 0.25 * x * x).collect();
        let (beta, _) = weighted_least_squares(&rows, &y, &vec![1.0; xs.len()]).unwrap();
        assert_relative_eq!(beta[0], 0.5, epsilon = 1e-9);
        assert_relative_eq!(beta[1], -2.0, epsilon = 1e-10);
        assert_relative_eq!(beta[2], 0.25, epsilon = 1e-11);
    }

    #[test]
    fn degenerate_design_is_singular() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let err = weighted_least_squares(&rows, &[1.0, 2.0, 3.0], &[1.0; 3]).unwrap_err();
        assert!(matches!(err, Error::SingularFit(_)));
    }
}
