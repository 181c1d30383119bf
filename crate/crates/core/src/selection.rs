//! Position-based antenna subset selection.
//!
//! Antenna-count sweeps need an M_s-element subset of the ceiling array
//! that stays spatially even as M_s shrinks. The subset is chosen purely
//! from geometry: k-means clustering of the antenna (x, y) positions into
//! M_s clusters, then the antenna nearest to each cluster center. Channel
//! knowledge is deliberately not used — the selection must be decidable at
//! installation time, before any measurement exists.
//!
//! Everything here is a pure function of (points, k, seed): k-means++
//! initialization draws from the seeded PRNG, Lloyd iterations and the
//! collision rule are deterministic, so a selection can be reproduced from
//! its seed alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::AntennaLayout;
use crate::seeding::rng_from_seed;
use rand::Rng;

/// Hard iteration cap for Lloyd's algorithm.
pub const KMEANS_MAX_ITERATIONS: usize = 300;
/// Converged when no centroid moves farther than this [m].
pub const KMEANS_TOLERANCE_M: f64 = 1e-9;

/// K-means output over 2-D points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Cluster centers, length k.
    pub centroids: Vec<[f64; 2]>,
    /// Cluster index of every input point.
    pub assignment: Vec<usize>,
    /// Lloyd iterations until convergence (or the cap).
    pub iterations: usize,
}

/// A chosen antenna subset with the clustering that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Distinct antenna indices, sorted ascending.
    pub chosen_indices: Vec<usize>,
    /// The cluster centers the antennas were matched against.
    pub centroids: Vec<[f64; 2]>,
    pub iterations: usize,
    pub seed: u64,
}

fn dist_sq(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Index of the centroid nearest to `p` (ties to the lower index).
fn nearest_centroid(p: [f64; 2], centroids: &[[f64; 2]]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &c) in centroids.iter().enumerate() {
        let d = dist_sq(p, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Cluster 2-D points with Lloyd's algorithm and k-means++ initialization.
///
/// Convergence: every centroid moved less than [`KMEANS_TOLERANCE_M`], or
/// [`KMEANS_MAX_ITERATIONS`] reached. An emptied cluster is reseeded to the
/// point farthest from its assigned centroid, keeping all k clusters alive.
pub fn kmeans_cluster(points: &[[f64; 2]], k: usize, seed: u64) -> Result<Clustering> {
    if k == 0 {
        return Err(Error::domain("cluster count must be at least 1"));
    }
    if k > points.len() {
        return Err(Error::domain(format!(
            "cannot form {k} clusters from {} points",
            points.len()
        )));
    }
    let mut rng = rng_from_seed(seed);

    // k-means++: first center uniform, each next center drawn with
    // probability proportional to its squared distance from the centers
    // already chosen.
    let mut centroids: Vec<[f64; 2]> = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|&p| dist_sq(p, centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // All remaining points coincide with existing centers
            // (duplicate inputs); any choice is as good.
            rng.random_range(0..points.len())
        };
        let c = points[next];
        centroids.push(c);
        for (i, &p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist_sq(p, c));
        }
    }

    let mut assignment = vec![0usize; points.len()];
    let mut iterations = 0;
    while iterations < KMEANS_MAX_ITERATIONS {
        iterations += 1;
        for (i, &p) in points.iter().enumerate() {
            assignment[i] = nearest_centroid(p, &centroids);
        }
        // Means of the assigned points; empty clusters steal the point
        // farthest from its current centroid (deterministic: largest
        // distance, ties to the lower point index).
        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (i, &p) in points.iter().enumerate() {
            let c = assignment[i];
            sums[c][0] += p[0];
            sums[c][1] += p[1];
            counts[c] += 1;
        }
        let mut moved = 0.0f64;
        for c in 0..k {
            let new = if counts[c] > 0 {
                [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64]
            } else {
                let mut far = 0usize;
                let mut far_d = -1.0f64;
                for (i, &p) in points.iter().enumerate() {
                    let d = dist_sq(p, centroids[assignment[i]]);
                    if d > far_d {
                        far_d = d;
                        far = i;
                    }
                }
                assignment[far] = c;
                points[far]
            };
            moved = moved.max(dist_sq(new, centroids[c]).sqrt());
            centroids[c] = new;
        }
        if moved < KMEANS_TOLERANCE_M {
            break;
        }
    }
    // Assignments consistent with the final centroids.
    for (i, &p) in points.iter().enumerate() {
        assignment[i] = nearest_centroid(p, &centroids);
    }
    Ok(Clustering {
        centroids,
        assignment,
        iterations,
    })
}

/// Choose `m_s` antennas: cluster the ceiling (x, y) positions into `m_s`
/// groups and take the antenna nearest to each center.
///
/// When two centers want the same antenna, the nearer center keeps it and
/// the other walks on to its next-nearest unclaimed antenna (deferred
/// acceptance, so the result does not depend on processing order).
pub fn select_subset(layout: &AntennaLayout, m_s: usize, seed: u64) -> Result<SelectionResult> {
    let m = layout.len();
    if m_s == 0 || m_s > m {
        return Err(Error::domain(format!(
            "subset size must lie in [1, {m}], got {m_s}"
        )));
    }
    let points: Vec<[f64; 2]> = layout.positions.iter().map(|p| [p.x, p.y]).collect();
    let clustering = kmeans_cluster(&points, m_s, seed)?;

    // Preference list per centroid: antennas by increasing distance, ties
    // to the lower antenna index.
    let prefs: Vec<Vec<usize>> = clustering
        .centroids
        .iter()
        .map(|&c| {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| {
                dist_sq(points[a], c)
                    .partial_cmp(&dist_sq(points[b], c))
                    .unwrap()
                    .then(a.cmp(&b))
            });
            order
        })
        .collect();

    // Deferred acceptance: centroids propose in preference order; an
    // antenna held by a farther centroid is stolen, sending that centroid
    // onward from where it stopped. Ownership distances only shrink, so
    // cursors never need to back up and the loop terminates.
    let mut owner: Vec<Option<usize>> = vec![None; m];
    let mut cursor = vec![0usize; m_s];
    let mut queue: Vec<usize> = (0..m_s).collect();
    while let Some(c) = queue.pop() {
        loop {
            let a = prefs[c][cursor[c]];
            cursor[c] += 1;
            match owner[a] {
                None => {
                    owner[a] = Some(c);
                    break;
                }
                Some(other) => {
                    let mine = dist_sq(points[a], clustering.centroids[c]);
                    let theirs = dist_sq(points[a], clustering.centroids[other]);
                    // Strictly nearer steals; ties keep the incumbent.
                    if mine < theirs {
                        owner[a] = Some(c);
                        queue.push(other);
                        break;
                    }
                }
            }
        }
    }

    let mut chosen_indices: Vec<usize> = owner
        .iter()
        .enumerate()
        .filter_map(|(a, o)| o.map(|_| a))
        .collect();
    chosen_indices.sort_unstable();
    debug_assert_eq!(chosen_indices.len(), m_s);
    Ok(SelectionResult {
        chosen_indices,
        centroids: clustering.centroids,
        iterations: clustering.iterations,
        seed,
    })
}
