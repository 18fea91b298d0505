//! Gaussian-process regression with an RBF kernel, fitted by Cholesky
//! factorization with escalating jitter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::squared_distance;

const BASE_JITTER: f64 = 1e-9;
const MAX_JITTER: f64 = 1e-3;

/// Stationary covariance function. Only the RBF (squared-exponential)
/// kernel is supported: k(x, x') = σ_f² · exp(−‖x−x'‖² / (2ℓ²)).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Kernel {
    pub lengthscale: f64,
    pub signal_variance: f64,
}

impl Kernel {
    pub fn rbf(lengthscale: f64, signal_variance: f64) -> Result<Self> {
        if !(lengthscale > 0.0) || !(signal_variance > 0.0) {
            return Err(Error::contract(
                "kernel lengthscale and signal variance must be positive",
            ));
        }
        Ok(Kernel {
            lengthscale,
            signal_variance,
        })
    }

    pub fn evaluate(&self, a: &[f64], b: &[f64]) -> f64 {
        let d2 = squared_distance(a, b);
        self.signal_variance * (-d2 / (2.0 * self.lengthscale * self.lengthscale)).exp()
    }

    /// Data-driven defaults: lengthscale from the median heuristic over
    /// pairwise training distances, signal variance from the target
    /// variance (floored at 1e-4). Falls back to 1.0 where the data give
    /// no signal (fewer than two points, or all points coincident).
    pub fn data_defaults(points: &[(Vec<f64>, f64)]) -> Kernel {
        let lengthscale = median_pairwise_distance(points).filter(|d| *d > 0.0).unwrap_or(1.0);
        let signal_variance = if points.is_empty() {
            1.0
        } else {
            let mean = points.iter().map(|(_, y)| y).sum::<f64>() / points.len() as f64;
            let var = points
                .iter()
                .map(|(_, y)| (y - mean) * (y - mean))
                .sum::<f64>()
                / points.len() as f64;
            var.max(1e-4)
        };
        Kernel {
            lengthscale,
            signal_variance,
        }
    }
}

fn median_pairwise_distance(points: &[(Vec<f64>, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let mut distances = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            distances.push(squared_distance(&points[i].0, &points[j].0).sqrt());
        }
    }
    distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = distances.len() / 2;
    let median = if distances.len() % 2 == 0 {
        (distances[mid - 1] + distances[mid]) / 2.0
    } else {
        distances[mid]
    };
    Some(median)
}

/// A fitted GP posterior over embedding space.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GprModel {
    kernel: Kernel,
    inputs: Vec<Vec<f64>>,
    noise: f64,
    /// Lower-triangular Cholesky factor of K + (noise + jitter)·I, row-major.
    chol: Vec<Vec<f64>>,
    /// (K + σ_n²I)⁻¹ (y − mean).
    alpha: Vec<f64>,
    prior_mean: f64,
    dim: usize,
}

impl GprModel {
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn n_training(&self) -> usize {
        self.inputs.len()
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    /// Max |L·Lᵀ − (K + σ_n²I)| relative to the matrix scale; the fit
    /// contract keeps this within 1e-8.
    pub fn reconstruction_error(&self) -> f64 {
        let n = self.inputs.len();
        if n == 0 {
            return 0.0;
        }
        let mut max_abs = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut k = self.kernel.evaluate(&self.inputs[i], &self.inputs[j]);
                if i == j {
                    k += self.noise;
                }
                let recon: f64 = (0..=i.min(j)).map(|t| self.chol[i][t] * self.chol[j][t]).sum();
                max_abs = max_abs.max((recon - k).abs());
                scale = scale.max(k.abs());
            }
        }
        if scale == 0.0 {
            max_abs
        } else {
            max_abs / scale
        }
    }
}

/// Fits a GP on (embedding, score) points. The prior mean is the target
/// mean (0 with no data); jitter starts at 1e-9 and escalates ×10 up to
/// 1e-3 until the Cholesky factorization succeeds.
pub fn gpr_fit(points: &[(Vec<f64>, f64)], kernel: Kernel, noise: f64) -> Result<GprModel> {
    if noise < 0.0 {
        return Err(Error::contract("gpr noise must be non-negative"));
    }
    let dim = points.first().map(|(x, _)| x.len()).unwrap_or(0);
    for (x, _) in points {
        if x.len() != dim {
            return Err(Error::contract(format!(
                "gpr input dimension mismatch: expected {dim}, got {}",
                x.len()
            )));
        }
    }
    let n = points.len();
    let prior_mean = if n == 0 {
        0.0
    } else {
        points.iter().map(|(_, y)| y).sum::<f64>() / n as f64
    };
    if n == 0 {
        return Ok(GprModel {
            kernel,
            inputs: Vec::new(),
            noise,
            chol: Vec::new(),
            alpha: Vec::new(),
            prior_mean,
            dim,
        });
    }

    let inputs: Vec<Vec<f64>> = points.iter().map(|(x, _)| x.clone()).collect();
    let centered: Vec<f64> = points.iter().map(|(_, y)| y - prior_mean).collect();

    let mut gram = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let k = kernel.evaluate(&inputs[i], &inputs[j]);
            gram[i][j] = k;
            gram[j][i] = k;
        }
    }

    let mut jitter = BASE_JITTER;
    let (chol, effective_noise) = loop {
        match cholesky(&gram, noise + jitter) {
            Some(l) => break (l, noise + jitter),
            None => {
                jitter *= 10.0;
                if jitter > MAX_JITTER {
                    return Err(Error::numeric(format!(
                        "kernel matrix not positive definite after jitter {MAX_JITTER}"
                    )));
                }
            }
        }
    };

    let alpha = {
        let z = solve_lower(&chol, &centered);
        solve_upper_transposed(&chol, &z)
    };

    Ok(GprModel {
        kernel,
        inputs,
        noise: effective_noise,
        chol,
        alpha,
        prior_mean,
        dim,
    })
}

/// Posterior mean and variance at a query point. Variance is clamped to
/// [0, k(x,x)].
pub fn gpr_predict(model: &GprModel, x: &[f64]) -> Result<(f64, f64)> {
    let prior_var = model.kernel.evaluate(x, x);
    if model.inputs.is_empty() {
        return Ok((model.prior_mean, prior_var));
    }
    if x.len() != model.dim {
        return Err(Error::contract(format!(
            "gpr query dimension mismatch: expected {}, got {}",
            model.dim,
            x.len()
        )));
    }
    let k_star: Vec<f64> = model.inputs.iter().map(|xi| model.kernel.evaluate(xi, x)).collect();
    let mean = model.prior_mean + k_star.iter().zip(&model.alpha).map(|(k, a)| k * a).sum::<f64>();
    let v = solve_lower(&model.chol, &k_star);
    let explained: f64 = v.iter().map(|x| x * x).sum();
    let variance = (prior_var - explained).clamp(0.0, prior_var);
    Ok((mean, variance))
}

/// Cholesky factorization of (gram + diagonal·I); returns the lower factor,
/// or `None` when a pivot is not strictly positive.
fn cholesky(gram: &[Vec<f64>], diagonal: f64) -> Option<Vec<Vec<f64>>> {
    let n = gram.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = gram[i][j];
            if i == j {
                sum += diagonal;
            }
            for t in 0..j {
                sum -= l[i][t] * l[j][t];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solves L z = b for lower-triangular L.
fn solve_lower(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for t in 0..i {
            sum -= l[i][t] * z[t];
        }
        z[i] = sum / l[i][i];
    }
    z
}

/// Solves Lᵀ x = z for lower-triangular L.
fn solve_upper_transposed(l: &[Vec<f64>], z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = z[i];
        for t in (i + 1)..n {
            sum -= l[t][i] * x[t];
        }
        x[i] = sum / l[i][i];
    }
    x
}
