//! Clustered UCB bandit selection: candidates are embedded, k-means
//! clustered, and each cluster becomes an arm. Pulling an arm evaluates one
//! of its prompts; UCB steers the evaluation budget toward clusters that
//! keep paying off.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{kmeans, DEFAULT_MAX_ITERS};
use crate::types::PromptCandidate;

pub const DEFAULT_UCB_C: f64 = std::f64::consts::SQRT_2;
pub const DEFAULT_CLUSTERS: usize = 5;
pub const DEFAULT_TOP_ARMS: usize = 3;

/// Which time count feeds the UCB logarithm. The prose definition uses the
/// total pull count across arms; the per-step loop-counter reading is kept
/// behind this switch.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum UcbTime {
    #[default]
    TotalPulls,
    LoopCounter,
}

/// A UCB score. Unpulled arms sort above every finite score so they are
/// explored first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UcbScore {
    Forced,
    Value(f64),
}

impl UcbScore {
    fn rank(&self) -> f64 {
        match self {
            UcbScore::Forced => f64::INFINITY,
            UcbScore::Value(v) => *v,
        }
    }
}

impl PartialOrd for UcbScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.rank().partial_cmp(&other.rank())
    }
}

/// UCB criterion for one arm: r̄ + c·√(ln N / n), `Forced` when the arm has
/// never been pulled.
pub fn ucb_score(mean_reward: f64, pulls: u64, total_pulls: u64, c: f64) -> UcbScore {
    if pulls == 0 {
        return UcbScore::Forced;
    }
    let t = total_pulls.max(1) as f64;
    UcbScore::Value(mean_reward + c * (t.ln() / pulls as f64).sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BanditConfig {
    /// K: number of k-means clusters (arms).
    pub clusters: usize,
    /// T_s: time steps of the selection loop.
    pub time_steps: usize,
    /// Exploration constant c.
    pub c: f64,
    /// |S_K|: how many top-UCB arms are pulled per step.
    pub top_arms: usize,
    pub time: UcbTime,
    pub seed: u64,
}

impl Default for BanditConfig {
    fn default() -> Self {
        BanditConfig {
            clusters: DEFAULT_CLUSTERS,
            time_steps: 0,
            c: DEFAULT_UCB_C,
            top_arms: DEFAULT_TOP_ARMS,
            time: UcbTime::TotalPulls,
            seed: 0,
        }
    }
}

/// Bandit statistics after a selection run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BanditState {
    /// Candidate ids per arm.
    pub arms: Vec<Vec<String>>,
    pub mean_reward: Vec<f64>,
    pub pulls: Vec<u64>,
    pub total_pulls: u64,
    pub c: f64,
}

/// Result of [`mab_select`]: every evaluated prompt with its observed
/// reward (best first), plus the final arm statistics.
#[derive(Debug, Clone)]
pub struct MabOutcome {
    pub evaluated: Vec<(PromptCandidate, f64)>,
    pub state: BanditState,
}

/// Runs the clustered UCB loop.
///
/// Within an arm, prompts are sampled without replacement until the arm is
/// exhausted, then with replacement. Each pull calls `evaluate`; rewards
/// update the arm's mean incrementally. Returns all evaluated prompts
/// sorted by observed reward descending (ties by id).
pub fn mab_select(
    candidates: &[PromptCandidate],
    config: &BanditConfig,
    evaluate: &mut dyn FnMut(&PromptCandidate) -> Result<f64>,
) -> Result<MabOutcome> {
    if config.clusters == 0 {
        return Err(Error::contract("bandit needs K >= 1 clusters"));
    }
    if config.top_arms == 0 {
        return Err(Error::contract("bandit needs top_arms >= 1"));
    }
    if candidates.is_empty() || config.time_steps == 0 {
        return Ok(MabOutcome {
            evaluated: Vec::new(),
            state: BanditState {
                arms: Vec::new(),
                mean_reward: Vec::new(),
                pulls: Vec::new(),
                total_pulls: 0,
                c: config.c,
            },
        });
    }

    let embeddings: Vec<Vec<f64>> = candidates
        .iter()
        .map(|c| {
            c.embedding
                .clone()
                .ok_or_else(|| Error::contract(format!("candidate `{}` has no embedding", c.id)))
        })
        .collect::<Result<_>>()?;
    let clustering = kmeans(&embeddings, config.clusters, config.seed, DEFAULT_MAX_ITERS)?;

    // Arm membership sorted by candidate id for deterministic sampling.
    let mut arms: Vec<Vec<usize>> = clustering
        .members()
        .into_iter()
        .filter(|m| !m.is_empty())
        .collect();
    for arm in &mut arms {
        arm.sort_by(|&a, &b| candidates[a].id.cmp(&candidates[b].id));
    }

    let k = arms.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut mean_reward = vec![0.0f64; k];
    let mut pulls = vec![0u64; k];
    let mut total_pulls = 0u64;
    let mut fresh: Vec<Vec<usize>> = arms.clone();
    let mut observed: BTreeMap<usize, f64> = BTreeMap::new();

    for step in 1..=config.time_steps {
        let time = match config.time {
            UcbTime::TotalPulls => total_pulls,
            UcbTime::LoopCounter => step as u64,
        };
        let mut ranked: Vec<usize> = (0..k).collect();
        ranked.sort_by(|&a, &b| {
            let sa = ucb_score(mean_reward[a], pulls[a], time, config.c).rank();
            let sb = ucb_score(mean_reward[b], pulls[b], time, config.c).rank();
            sb.partial_cmp(&sa).unwrap_or(Ordering::Equal).then(a.cmp(&b))
        });
        for &arm in ranked.iter().take(config.top_arms.min(k)) {
            let index = if fresh[arm].is_empty() {
                arms[arm][rng.random_range(0..arms[arm].len())]
            } else {
                fresh[arm].remove(rng.random_range(0..fresh[arm].len()))
            };
            let reward = evaluate(&candidates[index])?;
            observed.insert(index, reward);
            pulls[arm] += 1;
            total_pulls += 1;
            mean_reward[arm] += (reward - mean_reward[arm]) / pulls[arm] as f64;
        }
    }

    let mut evaluated: Vec<(PromptCandidate, f64)> = observed
        .into_iter()
        .map(|(index, reward)| (candidates[index].clone(), reward))
        .collect();
    evaluated.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.id.cmp(&b.0.id))
    });

    Ok(MabOutcome {
        evaluated,
        state: BanditState {
            arms: arms
                .iter()
                .map(|arm| arm.iter().map(|&i| candidates[i].id.clone()).collect())
                .collect(),
            mean_reward,
            pulls,
            total_pulls,
            c: config.c,
        },
    })
}
