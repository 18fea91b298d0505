//! Candidate pre-selection: expected-improvement Bayesian search over a GP
//! posterior, and a UCB bandit over k-means clusters of the candidate pool.

mod bandit;
mod bayes;

pub use bandit::{mab_select, ucb_score, BanditConfig, BanditState, MabOutcome, UcbScore, UcbTime};
pub use bayes::{bayes_select, expected_improvement, AcquisitionConfig};
