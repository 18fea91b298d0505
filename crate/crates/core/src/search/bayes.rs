//! Expected-improvement selection over a GP posterior on prompt embeddings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gpr_fit, gpr_predict, standard_normal_cdf, standard_normal_pdf, Kernel};
use crate::types::PromptCandidate;

pub const DEFAULT_XI: f64 = 0.01;
pub const DEFAULT_GPR_NOISE: f64 = 1e-4;

/// Acquisition settings: exploration offset ξ and selection budget N.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct AcquisitionConfig {
    pub xi: f64,
    pub n: usize,
}

impl AcquisitionConfig {
    pub fn new(xi: f64, n: usize) -> Result<Self> {
        if xi < 0.0 {
            return Err(Error::contract("acquisition xi must be >= 0"));
        }
        if n == 0 {
            return Err(Error::contract("acquisition budget N must be >= 1"));
        }
        Ok(AcquisitionConfig { xi, n })
    }
}

/// Closed-form expected improvement of a Gaussian posterior (μ, σ) over the
/// incumbent f* with exploration offset ξ:
///
/// EI = (μ − f* − ξ)·Φ(Z) + σ·φ(Z),  Z = (μ − f* − ξ)/σ
///
/// degenerating to max(μ − f* − ξ, 0) at σ = 0. Always ≥ 0.
pub fn expected_improvement(mu: f64, sigma: f64, f_star: f64, xi: f64) -> f64 {
    let gap = mu - f_star - xi;
    if sigma <= 0.0 {
        return gap.max(0.0);
    }
    let z = gap / sigma;
    (gap * standard_normal_cdf(z) + sigma * standard_normal_pdf(z)).max(0.0)
}

/// Fits a GP on the evaluation history and returns the top-N candidates by
/// expected improvement (ties broken by candidate id ascending).
///
/// Every candidate must carry an embedding of the history's dimension. The
/// incumbent f* is the best history score, or 0 with no history (the prior
/// then ties all candidates and the first N by id are returned).
pub fn bayes_select(
    candidates: &[PromptCandidate],
    history: &[(Vec<f64>, f64)],
    config: &AcquisitionConfig,
) -> Result<Vec<PromptCandidate>> {
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let dim = history
        .first()
        .map(|(x, _)| x.len())
        .or_else(|| candidates[0].embedding.as_ref().map(Vec::len))
        .unwrap_or(0);
    for c in candidates {
        match &c.embedding {
            Some(e) if e.len() == dim => {}
            Some(e) => {
                return Err(Error::contract(format!(
                    "candidate `{}` embedding dimension {} != {}",
                    c.id,
                    e.len(),
                    dim
                )))
            }
            None => {
                return Err(Error::contract(format!(
                    "candidate `{}` has no embedding",
                    c.id
                )))
            }
        }
    }

    let kernel = Kernel::data_defaults(history);
    let model = gpr_fit(history, kernel, DEFAULT_GPR_NOISE)?;
    let f_star = history
        .iter()
        .map(|&(_, y)| y)
        .fold(f64::NEG_INFINITY, f64::max);
    let f_star = if f_star.is_finite() { f_star } else { 0.0 };

    let mut ranked: Vec<(f64, &PromptCandidate)> = candidates
        .iter()
        .map(|c| {
            let (mu, var) = gpr_predict(&model, c.embedding.as_ref().unwrap())?;
            Ok((expected_improvement(mu, var.sqrt(), f_star, config.xi), c))
        })
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.1.id.cmp(&b.1.id))
    });
    Ok(ranked
        .into_iter()
        .take(config.n)
        .map(|(_, c)| c.clone())
        .collect())
}
