//! Fit results and full-dataset quality measures shared by every fitter.

use serde::{Deserialize, Serialize};

use crate::distance::{pairwise_distances, PNorm};
use crate::error::Result;
use crate::points::Points;
use crate::scalar::Scalar;
use crate::selection::{assignments, build_mask, mask_distances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    SgdKMeans,
    SgdBsq,
    Lloyd,
    BsqEm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::SgdKMeans, Algorithm::SgdBsq, Algorithm::Lloyd, Algorithm::BsqEm];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::SgdKMeans => "sgd-kmeans",
            Algorithm::SgdBsq => "sgd-bsq",
            Algorithm::Lloyd => "lloyd",
            Algorithm::BsqEm => "bsq-em",
        }
    }

    pub fn is_sgd(self) -> bool {
        matches!(self, Algorithm::SgdKMeans | Algorithm::SgdBsq)
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected sgd-kmeans, sgd-bsq, lloyd or bsq-em)"))
    }
}

/// Nearest-centroid assignment of a whole dataset and the resulting errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Evaluation<T> {
    pub assignments: Vec<usize>,
    /// Distance of every point to its assigned centroid.
    pub distances: Vec<T>,
    /// Points assigned to each quantum.
    pub counts: Vec<usize>,
    /// Largest assigned distance per quantum, zero for empty quanta.
    pub radii: Vec<T>,
    pub mean_distance: T,
    pub max_distance: T,
}

/// Assigns every row to its nearest centroid (lowest index on ties).
pub fn evaluate<T: Scalar>(data: &Points<T>, centroids: &Points<T>, norm: PNorm) -> Result<Evaluation<T>> {
    let k = centroids.len();
    let mut assigned = Vec::with_capacity(data.len());
    let mut distances = Vec::with_capacity(data.len());
    // Chunked so the distance matrix stays small for large n.
    const CHUNK: usize = 4096;
    let rows: Vec<usize> = (0..data.len()).collect();
    for chunk in rows.chunks(CHUNK) {
        let batch = data.select(chunk)?;
        let d = pairwise_distances(&batch, centroids, norm)?;
        let m = build_mask(&d);
        let dm = mask_distances(&d, &m)?;
        assigned.extend(assignments(&m));
        distances.extend_from_slice(dm.row_sums());
    }
    let mut counts = vec![0usize; k];
    let mut radii = vec![T::zero(); k];
    for (&j, &v) in assigned.iter().zip(&distances) {
        counts[j] += 1;
        radii[j] = radii[j].max(v);
    }
    let total: T = distances.iter().copied().sum();
    Ok(Evaluation {
        mean_distance: total / T::of(data.len() as f64),
        max_distance: radii.iter().copied().fold(T::zero(), T::max),
        assignments: assigned,
        distances,
        counts,
        radii,
    })
}

/// Rows to re-seed dead quanta at: the points farthest from their assigned
/// centroids, one distinct point per dead quantum, in descending distance
/// (lowest row index first on ties).
pub(crate) fn revival_rows<T: Scalar>(evaluation: &Evaluation<T>, dead: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..evaluation.distances.len()).collect();
    order.sort_by(|&a, &b| {
        evaluation.distances[b]
            .partial_cmp(&evaluation.distances[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(dead);
    order
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FitReport<T> {
    pub algorithm: Algorithm,
    pub centroids: Points<T>,
    /// SGD: the update-time loss `l`, one per update. EM: the objective
    /// after each iteration (mean distance for Lloyd, max distance for BSQ).
    pub loss_per_update: Vec<T>,
    /// Mean point-to-assigned-centroid distance per epoch (SGD: measured on
    /// the fly against the centroids each batch saw) or per EM iteration.
    pub epoch_losses: Vec<T>,
    /// Largest point-to-assigned-centroid distance per epoch or iteration.
    pub epoch_max_distances: Vec<T>,
    /// Final mean distance over the whole dataset.
    pub mean_distance: T,
    /// Final largest point-to-assigned-centroid distance.
    pub max_distance: T,
    /// Final per-quantum radius (largest assigned distance).
    pub radii: Vec<T>,
    /// Final per-quantum point counts.
    pub counts: Vec<usize>,
    /// Epochs (SGD) or EM iterations run.
    pub iterations: usize,
    pub updates_performed: usize,
    /// EM only: whether the stopping rule fired before `max_iterations`.
    pub converged: Option<bool>,
    pub wall_time_seconds: f64,
}

impl<T: Scalar> FitReport<T> {
    pub(crate) fn finish(
        algorithm: Algorithm,
        data: &Points<T>,
        centroids: Points<T>,
        norm: PNorm,
        traces: Traces<T>,
        started: std::time::Instant,
    ) -> Result<Self> {
        let eval = evaluate(data, &centroids, norm)?;
        Ok(FitReport {
            algorithm,
            centroids,
            loss_per_update: traces.loss_per_update,
            epoch_losses: traces.epoch_losses,
            epoch_max_distances: traces.epoch_max_distances,
            mean_distance: eval.mean_distance,
            max_distance: eval.max_distance,
            radii: eval.radii,
            counts: eval.counts,
            iterations: traces.iterations,
            updates_performed: traces.updates_performed,
            converged: traces.converged,
            wall_time_seconds: started.elapsed().as_secs_f64(),
        })
    }
}

#[derive(Debug, Default)]
pub(crate) struct Traces<T> {
    pub loss_per_update: Vec<T>,
    pub epoch_losses: Vec<T>,
    pub epoch_max_distances: Vec<T>,
    pub iterations: usize,
    pub updates_performed: usize,
    pub converged: Option<bool>,
}
