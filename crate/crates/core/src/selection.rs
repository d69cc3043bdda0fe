//! The selection layer: a one-hot mask at each row minimum of the distance
//! matrix, and the masked distances `D ∘ M`.
//!
//! Both are stored by index (one column per row) rather than as dense
//! `n × k` matrices; [`Mask::get`] and [`MaskedDistances::get`] expose the
//! dense view.

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    columns: Vec<usize>,
    k: usize,
}

impl Mask {
    /// Builds a mask from a dense 0/1 matrix; every row must be one-hot.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let k = rows.first().map(Vec::len).ok_or(Error::Empty("mask"))?;
        let mut columns = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: r.len(),
                });
            }
            let ones: Vec<usize> = r.iter().enumerate().filter(|(_, &v)| v != 0).map(|(j, _)| j).collect();
            if ones.len() != 1 || r[ones[0]] != 1 {
                return Err(Error::Format(format!("mask row {i} is not one-hot")));
            }
            columns.push(ones[0]);
        }
        Ok(Self { columns, k })
    }

    pub fn rows(&self) -> usize {
        self.columns.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.columns[i] == j
    }

    pub fn column_of(&self, i: usize) -> usize {
        self.columns[i]
    }

    /// Column sums of the mask: points assigned to each quantum.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.k];
        for &j in &self.columns {
            c[j] += 1;
        }
        c
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.columns
            .iter()
            .map(|&j| {
                let mut r = vec![0u8; self.k];
                r[j] = 1;
                r
            })
            .collect()
    }
}

/// `D ∘ M`: only each point's distance to its assigned quantum survives.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedDistances<T> {
    columns: Vec<usize>,
    values: Vec<T>,
    k: usize,
}

impl<T: Scalar> MaskedDistances<T> {
    pub fn rows(&self) -> usize {
        self.columns.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.columns[i] == j {
            self.values[i]
        } else {
            T::zero()
        }
    }

    /// The only (possibly) nonzero entry of row `i`, with its column.
    pub fn selected(&self, i: usize) -> (usize, T) {
        (self.columns[i], self.values[i])
    }

    pub fn row_sums(&self) -> &[T] {
        &self.values
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.rows())
            .map(|i| (0..self.k).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// One-hot at each row minimum; ties go to the lowest column index.
pub fn build_mask<T: Scalar>(distances: &DistanceMatrix<T>) -> Mask {
    let columns = distances
        .iter_rows()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v < row[best] {
                    best = j;
                }
            }
            best
        })
        .collect();
    Mask {
        columns,
        k: distances.cols(),
    }
}

pub fn mask_distances<T: Scalar>(distances: &DistanceMatrix<T>, mask: &Mask) -> Result<MaskedDistances<T>> {
    if distances.shape() != (mask.rows(), mask.k()) {
        return Err(Error::ShapeMismatch {
            expected: distances.shape(),
            found: (mask.rows(), mask.k()),
        });
    }
    let values = mask
        .columns
        .iter()
        .enumerate()
        .map(|(i, &j)| distances.get(i, j))
        .collect();
    Ok(MaskedDistances {
        columns: mask.columns.clone(),
        values,
        k: mask.k,
    })
}

/// Quantum index of every point.
pub fn assignments(mask: &Mask) -> Vec<usize> {
    mask.columns.clone()
}

pub fn one_hot(assignments: &[usize], k: usize) -> Result<Mask> {
    if let Some(&bad) = assignments.iter().find(|&&j| j >= k) {
        return Err(Error::DimensionMismatch { expected: k, found: bad });
    }
    Ok(Mask {
        columns: assignments.to_vec(),
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(rows: &[&[f64]]) -> DistanceMatrix<f64> {
        let k = rows[0].len();
        DistanceMatrix::new(rows.concat(), rows.len(), k).unwrap()
    }

    #[test]
    fn mask_picks_row_minimum() {
        let m = build_mask(&dm(&[&[0.0, 1.0], &[5.0, 4.2426]]));
        assert_eq!(m.to_dense(), vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn ties_go_to_lowest_column() {
        let m = build_mask(&dm(&[&[3.0, 3.0, 3.0]]));
        assert_eq!(m.to_dense(), vec![vec![1, 0, 0]]);
        let m = build_mask(&dm(&[&[4.0, 2.0, 2.0]]));
        assert_eq!(assignments(&m), vec![1]);
    }

    #[test]
    fn masking_multiplies_elementwise() {
        let d = dm(&[&[2.0, 7.0]]);
        let m = Mask::from_dense(&[vec![1, 0]]).unwrap();
        let dm = mask_distances(&d, &m).unwrap();
        assert_eq!(dm.to_dense(), vec![vec![2.0, 0.0]]);
    }

    #[test]
    fn masked_row_sums_are_row_minima() {
        let d = dm(&[&[2.0, 7.0, 1.5], &[0.5, 0.25, 9.0]]);
        let dm = mask_distances(&d, &build_mask(&d)).unwrap();
        assert_eq!(dm.row_sums(), &[1.5, 0.25]);
    }

    #[test]
    fn assignments_examples() {
        let m = Mask::from_dense(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(assignments(&m), vec![0, 1]);
        let m = Mask::from_dense(&[vec![0, 0, 1]]).unwrap();
        assert_eq!(assignments(&m), vec![2]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let d = dm(&[&[2.0, 7.0]]);
        let m = Mask::from_dense(&[vec![1, 0, 0]]).unwrap();
        assert!(matches!(mask_distances(&d, &m), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn dense_mask_must_be_one_hot() {
        assert!(Mask::from_dense(&[vec![1, 1]]).is_err());
        assert!(Mask::from_dense(&[vec![0, 0]]).is_err());
        assert!(Mask::from_dense(&[vec![0, 2]]).is_err());
        assert!(one_hot(&[0, 3], 3).is_err());
    }
}
