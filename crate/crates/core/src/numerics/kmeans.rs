//! Lloyd's k-means with k-means++ seeding and deterministic tie-breaking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::squared_distance;

pub const DEFAULT_MAX_ITERS: usize = 100;

/// A clustering of m points into K centroids.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Clustering {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Point indices belonging to each cluster, in input order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.centroids.len()];
        for (point, &cluster) in self.assignments.iter().enumerate() {
            out[cluster].push(point);
        }
        out
    }
}

/// Clusters `points` into at most `k` groups (capped at the number of
/// distinct points). Seeding is k-means++ from a seeded RNG; Lloyd
/// iterations run until the assignments reach a fixpoint or `max_iters`.
/// Empty clusters are reseeded to the point farthest from its centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iters: usize) -> Result<Clustering> {
    if points.is_empty() {
        return Err(Error::contract("kmeans requires at least one point"));
    }
    if k == 0 {
        return Err(Error::contract("kmeans requires k >= 1"));
    }
    let dim = points[0].len();
    for p in points {
        if p.len() != dim {
            return Err(Error::contract("kmeans points must share one dimension"));
        }
    }
    let effective_k = k.min(count_distinct(points));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_seeds(points, effective_k, &mut rng);
    let mut assignments = assign_all(points, &centroids);

    for _ in 0..max_iters {
        centroids = recompute_centroids(points, &assignments, &centroids);
        reseed_empty_clusters(points, &mut centroids, &mut assignments);
        let next = assign_all(points, &centroids);
        if next == assignments {
            break;
        }
        assignments = next;
    }

    let inertia = points
        .iter()
        .zip(&assignments)
        .map(|(p, &c)| squared_distance(p, &centroids[c]))
        .sum();
    Ok(Clustering {
        centroids,
        assignments,
        inertia,
    })
}

fn count_distinct(points: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = points
        .iter()
        .map(|p| p.iter().map(|x| x.to_bits()).collect())
        .collect();
    keys.sort();
    keys.dedup();
    keys.len()
}

fn plus_plus_seeds(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())].clone());
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        centroids.push(points[next].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(squared_distance(p, centroids.last().unwrap()));
        }
    }
    centroids
}

/// Nearest centroid per point; ties go to the lowest centroid index.
fn assign_all(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = squared_distance(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn recompute_centroids(
    points: &[Vec<f64>],
    assignments: &[usize],
    previous: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; previous.len()];
    let mut counts = vec![0usize; previous.len()];
    for (p, &c) in points.iter().zip(assignments) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(p) {
            *s += x;
        }
    }
    sums.into_iter()
        .enumerate()
        .map(|(c, mut sum)| {
            if counts[c] == 0 {
                previous[c].clone()
            } else {
                for s in &mut sum {
                    *s /= counts[c] as f64;
                }
                sum
            }
        })
        .collect()
}

/// Moves the globally farthest point into each empty cluster.
fn reseed_empty_clusters(
    points: &[Vec<f64>],
    centroids: &mut [Vec<f64>],
    assignments: &mut [usize],
) {
    loop {
        let mut counts = vec![0usize; centroids.len()];
        for &c in assignments.iter() {
            counts[c] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut farthest = 0;
        let mut farthest_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            // Only steal from clusters that can spare a point.
            if counts[assignments[i]] <= 1 {
                continue;
            }
            let d = squared_distance(p, &centroids[assignments[i]]);
            if d > farthest_d {
                farthest_d = d;
                farthest = i;
            }
        }
        if farthest_d < 0.0 {
            return;
        }
        centroids[empty] = points[farthest].clone();
        assignments[farthest] = empty;
    }
}
