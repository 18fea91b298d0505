//! Self-contained numerical kernels: RBF kernel, Gaussian-process
//! regression via Cholesky factorization, and k-means clustering with
//! k-means++ seeding. Everything here is deterministic given its inputs
//! (and seed, where one applies).

mod gpr;
mod kmeans;

pub use gpr::{gpr_fit, gpr_predict, GprModel, Kernel};
pub use kmeans::{kmeans, Clustering};

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Standard normal probability density.
pub fn standard_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal cumulative distribution, via the complementary error
/// function.
pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}
