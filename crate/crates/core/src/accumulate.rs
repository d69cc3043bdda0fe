//! Cross-batch accumulation of per-quantum targets `T` and weights `W`.
//!
//! For k-Means, `T[i]` is the running mean of the points assigned to
//! quantum `i` since the last reset and `W[i]` their count. For BSQ,
//! `T[i]` is the farthest assigned point seen so far and `W[i]` its
//! distance to the centroid. Weights are zeroed after every centroid update.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_config, Error, Result};
use crate::points::Points;
use crate::scalar::Scalar;
use crate::selection::{Mask, MaskedDistances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    KMeans,
    Bsq,
}

/// Per-batch `T′`/`W′`. Rows with zero weight carry no information.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchSummary<T> {
    targets: Vec<T>,
    weights: Vec<T>,
    dim: usize,
}

impl<T: Scalar> BatchSummary<T> {
    pub fn new(targets: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        let (targets, dim) = flatten(targets, weights.len())?;
        Ok(Self { targets, weights, dim })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn target(&self, i: usize) -> &[T] {
        &self.targets[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccumulatorState<T> {
    variant: Variant,
    targets: Vec<T>,
    weights: Vec<T>,
    dim: usize,
}

impl<T: Scalar> AccumulatorState<T> {
    /// An empty accumulator: zero targets, zero weights.
    pub fn new(variant: Variant, k: usize, dim: usize) -> Self {
        Self {
            variant,
            targets: vec![T::zero(); k * dim],
            weights: vec![T::zero(); k],
            dim,
        }
    }

    pub fn from_parts(variant: Variant, targets: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(invalid_config("accumulator weights must be finite and non-negative"));
        }
        let (targets, dim) = flatten(targets, weights.len())?;
        Ok(Self {
            variant,
            targets,
            weights,
            dim,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn target(&self, i: usize) -> &[T] {
        &self.targets[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Whether quantum `i` has received anything since the last reset.
    pub fn is_active(&self, i: usize) -> bool {
        self.weights[i] > T::zero()
    }

    /// Merges with the rule matching this accumulator's variant.
    pub fn merge(&mut self, summary: &BatchSummary<T>) -> Result<()> {
        match self.variant {
            Variant::KMeans => merge_kmeans(self, summary),
            Variant::Bsq => merge_bsq(self, summary),
        }
    }

    pub fn reset(&mut self) {
        reset(self)
    }

    fn check_shape(&self, summary: &BatchSummary<T>) -> Result<()> {
        if summary.k() != self.k() || summary.dim != self.dim {
            return Err(Error::ShapeMismatch {
                expected: (self.k(), self.dim),
                found: (summary.k(), summary.dim),
            });
        }
        Ok(())
    }
}

fn flatten<T: Scalar>(rows: Vec<Vec<T>>, k: usize) -> Result<(Vec<T>, usize)> {
    if rows.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: rows.len(),
        });
    }
    let dim = rows.first().map(Vec::len).unwrap_or(0);
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    Ok((rows.concat(), dim))
}

fn check_rows<T: Scalar>(batch: &Points<T>, rows: usize) -> Result<()> {
    if batch.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: batch.len(),
            found: rows,
        });
    }
    Ok(())
}

/// Per-quantum mean of the assigned batch points (`T′`) and their count (`W′`).
pub fn summarize_batch_kmeans<T: Scalar>(batch: &Points<T>, mask: &Mask) -> Result<BatchSummary<T>> {
    check_rows(batch, mask.rows())?;
    let (k, d) = (mask.k(), batch.dim());
    let mut targets = vec![T::zero(); k * d];
    let mut counts = vec![0usize; k];
    for (i, point) in batch.iter_rows().enumerate() {
        let j = mask.column_of(i);
        counts[j] += 1;
        for (t, &x) in targets[j * d..(j + 1) * d].iter_mut().zip(point) {
            *t = *t + x;
        }
    }
    for (j, &c) in counts.iter().enumerate() {
        if c > 0 {
            let c = T::of(c as f64);
            for t in &mut targets[j * d..(j + 1) * d] {
                *t = *t / c;
            }
        }
    }
    Ok(BatchSummary {
        targets,
        weights: counts.into_iter().map(|c| T::of(c as f64)).collect(),
        dim: d,
    })
}

/// Per-quantum farthest assigned batch point (`T′`) and its distance (`W′`):
/// the row holding the column maximum of `D_m`, lowest row index on ties.
pub fn summarize_batch_bsq<T: Scalar>(batch: &Points<T>, masked: &MaskedDistances<T>) -> Result<BatchSummary<T>> {
    check_rows(batch, masked.rows())?;
    let (k, d) = (masked.k(), batch.dim());
    // Column j of D_m is zero outside the points assigned to j, so the
    // column maximum is either an assigned distance or zero at the first row.
    let mut best_row = vec![0usize; k];
    let mut best = vec![T::zero(); k];
    for i in 0..masked.rows() {
        let (j, v) = masked.selected(i);
        if v > best[j] {
            best[j] = v;
            best_row[j] = i;
        }
    }
    let mut targets = Vec::with_capacity(k * d);
    for &r in &best_row {
        targets.extend_from_slice(batch.row(r));
    }
    Ok(BatchSummary {
        targets,
        weights: best,
        dim: d,
    })
}

/// Running-mean merge: `T ← (W·T + W′·T′)/(W + W′)`, `W ← W + W′`.
pub fn merge_kmeans<T: Scalar>(state: &mut AccumulatorState<T>, summary: &BatchSummary<T>) -> Result<()> {
    if state.variant != Variant::KMeans {
        return Err(invalid_config("merge_kmeans on a BSQ accumulator"));
    }
    state.check_shape(summary)?;
    let d = state.dim;
    for i in 0..state.k() {
        let (w, w_new) = (state.weights[i], summary.weights[i]);
        let total = w + w_new;
        if w_new > T::zero() && total > T::zero() {
            let incoming = summary.target(i);
            for (t, &t_new) in state.targets[i * d..(i + 1) * d].iter_mut().zip(incoming) {
                *t = (w * *t + w_new * t_new) / total;
            }
        }
        state.weights[i] = total;
    }
    Ok(())
}

/// Farthest-point merge: overwrite `T[i]`, `W[i]` only where `W′[i] > W[i]`.
pub fn merge_bsq<T: Scalar>(state: &mut AccumulatorState<T>, summary: &BatchSummary<T>) -> Result<()> {
    if state.variant != Variant::Bsq {
        return Err(invalid_config("merge_bsq on a k-Means accumulator"));
    }
    state.check_shape(summary)?;
    let d = state.dim;
    for i in 0..state.k() {
        if summary.weights[i] > state.weights[i] {
            state.weights[i] = summary.weights[i];
            state.targets[i * d..(i + 1) * d].copy_from_slice(summary.target(i));
        }
    }
    Ok(())
}

/// Zeroes all weights; targets stay in place but are inactive.
pub fn reset<T: Scalar>(state: &mut AccumulatorState<T>) {
    state.weights.iter_mut().for_each(|w| *w = T::zero());
}
