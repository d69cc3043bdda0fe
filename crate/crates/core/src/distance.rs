//! The distance layer: every point of a batch against every centroid.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_config, Error, Result};
use crate::points::Points;
use crate::scalar::Scalar;

/// A p-norm with `p ≥ 1`. `p = 1` and `p = 2` take dedicated kernels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PNorm(f64);

impl PNorm {
    pub const L1: PNorm = PNorm(1.0);
    pub const L2: PNorm = PNorm(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(invalid_config(format!("p-norm requires finite p >= 1, got {p}")));
        }
        Ok(PNorm(p))
    }

    pub fn p(self) -> f64 {
        self.0
    }

    pub fn is_euclidean(self) -> bool {
        self.0 == 2.0
    }
}

impl Default for PNorm {
    fn default() -> Self {
        PNorm::L2
    }
}

impl TryFrom<f64> for PNorm {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        PNorm::new(p)
    }
}

impl From<PNorm> for f64 {
    fn from(p: PNorm) -> f64 {
        p.0
    }
}

/// `n × k` matrix of point-to-centroid distances, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix<T> {
    data: Vec<T>,
    rows: usize,
    cols: usize,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Wraps precomputed distances; entries must be finite and non-negative.
    pub fn new(data: Vec<T>, rows: usize, cols: usize) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("distance matrix"));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { data, rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> std::slice::ChunksExact<'_, T> {
        self.data.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// Computes `D[i][j] = ‖batch[i] − centroids[j]‖_p`.
pub fn pairwise_distances<T: Scalar>(
    batch: &Points<T>,
    centroids: &Points<T>,
    norm: PNorm,
) -> Result<DistanceMatrix<T>> {
    if batch.dim() != centroids.dim() {
        return Err(Error::DimensionMismatch {
            expected: centroids.dim(),
            found: batch.dim(),
        });
    }
    let k = centroids.len();
    let mut data = Vec::with_capacity(batch.len() * k);
    for point in batch.iter_rows() {
        data.extend(centroids.iter_rows().map(|c| distance_unchecked(point, c, norm)));
    }
    Ok(DistanceMatrix {
        data,
        rows: batch.len(),
        cols: k,
    })
}

/// The scalar kernel: `‖point − centroid‖_p`.
pub fn distance_point_to_centroid<T: Scalar>(point: &[T], centroid: &[T], norm: PNorm) -> Result<T> {
    if point.len() != centroid.len() {
        return Err(Error::DimensionMismatch {
            expected: point.len(),
            found: centroid.len(),
        });
    }
    Ok(distance_unchecked(point, centroid, norm))
}

pub(crate) fn distance_unchecked<T: Scalar>(a: &[T], b: &[T], norm: PNorm) -> T {
    debug_assert_eq!(a.len(), b.len());
    if norm.0 == 2.0 {
        squared_euclidean(a, b).sqrt()
    } else if norm.0 == 1.0 {
        a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum()
    } else {
        let p = T::of(norm.0);
        let s: T = a.iter().zip(b).map(|(&x, &y)| (x - y).abs().powf(p)).sum();
        s.powf(p.recip())
    }
}

/// Sum of squared differences with four fixed accumulator lanes; the
/// reduction order depends only on the length, never on scheduling.
pub(crate) fn squared_euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for lane in 0..4 {
            let t = x[lane] - y[lane];
            acc[lane] = acc[lane] + t * t;
        }
    }
    let mut tail = T::zero();
    for (&x, &y) in ca.remainder().iter().zip(cb.remainder()) {
        let t = x - y;
        tail = tail + t * t;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
