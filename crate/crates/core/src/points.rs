//! Row-major point matrices: the training data and the centroid sets.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite, non-empty `rows × dim` matrix stored row-major.
///
/// Used both for datasets (one row per training point) and for centroid
/// sets (one row per quantum), see the [`Dataset`] and [`Centroids`] aliases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoints<T>", into = "RawPoints<T>")]
#[serde(bound = "T: Scalar")]
pub struct Points<T> {
    data: Vec<T>,
    rows: usize,
    dim: usize,
}

pub type Dataset<T> = Points<T>;
pub type Centroids<T> = Points<T>;

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawPoints<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<RawPoints<T>> for Points<T> {
    type Error = Error;

    fn try_from(raw: RawPoints<T>) -> Result<Self> {
        Points::from_rows(&raw.rows)
    }
}

impl<T: Scalar> From<Points<T>> for RawPoints<T> {
    fn from(p: Points<T>) -> Self {
        RawPoints {
            rows: p.iter_rows().map(<[T]>::to_vec).collect(),
        }
    }
}

impl<T: Scalar> Points<T> {
    pub fn new(data: Vec<T>, rows: usize, dim: usize) -> Result<Self> {
        if rows == 0 {
            return Err(Error::Empty("point set has no rows"));
        }
        if dim == 0 {
            return Err(Error::Empty("points have zero dimensions"));
        }
        if data.len() != rows * dim {
            return Err(Error::DimensionMismatch {
                expected: rows * dim,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self { data, rows, dim })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty("point set has no rows"))?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(data, rows.len(), dim)
    }

    /// Number of rows (`n` for a dataset, `k` for centroids).
    pub fn len(&self) -> usize {
        self.rows
    }

    /// Always false; kept for the `len`/`is_empty` convention.
    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [T] {
        let d = self.dim;
        &mut self.data[i * d..(i + 1) * d]
    }

    pub fn iter_rows(&self) -> std::slice::ChunksExact<'_, T> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Gathers the given rows, in order, into a new point set.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self::new(data, indices.len(), self.dim)
    }

    pub fn cast<U: Scalar>(&self) -> Points<U> {
        Points {
            data: self.data.iter().map(|v| U::of(v.to_f64_lossy())).collect(),
            rows: self.rows,
            dim: self.dim,
        }
    }

    /// SHA-256 over the shape and the little-endian bit patterns of every entry.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.rows as u64).to_le_bytes());
        h.update((self.dim as u64).to_le_bytes());
        for v in &self.data {
            h.update(v.le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
