//! K-means++ seeding and Lloyd iteration under squared Euclidean distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ClusterError;

pub const DEFAULT_MAX_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    pub centers: Vec<Vec<f64>>,
    /// Cluster index for each input point, in input order.
    pub assignment: Vec<usize>,
    /// Within-cluster sum of squares after each assignment step.
    pub wcss_history: Vec<f64>,
    pub converged: bool,
    /// Seeding had to reuse a point because there were fewer distinct points than clusters.
    pub duplicate_centers: bool,
}

impl ClusterModel {
    pub fn wcss(&self) -> f64 {
        *self.wcss_history.last().unwrap_or(&0.0)
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == cluster).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center, lower index on ties, with its distance.
pub fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn check(points: &[Vec<f64>], k: usize) -> Result<(), ClusterError> {
    if k < 1 {
        return Err(ClusterError::InvalidK);
    }
    let first = points.first().ok_or(ClusterError::NoPoints)?;
    if points.iter().any(|p| p.len() != first.len()) {
        return Err(ClusterError::Ragged);
    }
    Ok(())
}

/// K-means++ seeding: the first center is a uniformly drawn point, each
/// further one is drawn with probability proportional to its squared
/// distance from the nearest chosen center. Returns the centers and whether
/// a point had to be reused.
pub fn kmeanspp_seed(points: &[Vec<f64>], k: usize, seed: u64) -> Result<(Vec<Vec<f64>>, bool), ClusterError> {
    check(points, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| squared_distance(p, &centers[0])).collect();
    let mut duplicated = false;
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // rounding can leave the target just past the final sum
            chosen.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            duplicated = true;
            rng.random_range(0..n)
        };
        let center = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, &center));
        }
        centers.push(center);
    }
    Ok((centers, duplicated))
}

fn assign(points: &[Vec<f64>], centers: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut wcss = 0.0;
    let assignment = points
        .iter()
        .map(|p| {
            let (i, d) = nearest(p, centers);
            wcss += d;
            i
        })
        .collect();
    (assignment, wcss)
}

/// Move centers to their members' centroids. An empty cluster takes the
/// point farthest from its own center.
fn update(points: &[Vec<f64>], assignment: &[usize], centers: &mut [Vec<f64>]) {
    let dim = points[0].len();
    let k = centers.len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignment) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
        }
    }
    let mut taken = vec![false; points.len()];
    for c in (0..k).filter(|&c| counts[c] == 0) {
        let mut far: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let d = squared_distance(p, &centers[assignment[i]]);
            if far.is_none_or(|(_, best)| d > best) {
                far = Some((i, d));
            }
        }
        if let Some((i, _)) = far {
            taken[i] = true;
            centers[c] = points[i].clone();
        }
    }
}

/// Lloyd iteration from K-means++ seeds until the assignment is stable or
/// `max_iters` updates have run.
pub fn kmeans_cluster(points: &[Vec<f64>], k: usize, seed: u64, max_iters: usize) -> Result<ClusterModel, ClusterError> {
    let (mut centers, duplicate_centers) = kmeanspp_seed(points, k, seed)?;
    let (mut assignment, wcss) = assign(points, &centers);
    let mut wcss_history = vec![wcss];
    let mut converged = false;
    for _ in 0..max_iters.max(1) {
        update(points, &assignment, &mut centers);
        let (next, wcss) = assign(points, &centers);
        wcss_history.push(wcss);
        if next == assignment {
            converged = true;
            break;
        }
        assignment = next;
    }
    Ok(ClusterModel { k, centers, assignment, wcss_history, converged, duplicate_centers })
}
