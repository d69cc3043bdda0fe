//! Gradient-descent training of k-Means and BSQ centroids.
//!
//! Each epoch shuffles the data and walks it in batches. Every batch goes
//! through the distance layer, the selection mask and the per-variant batch
//! summary, which is merged into the accumulator. After every
//! `⌈n_batches / r⌉` batches (and at the end of every epoch) the
//! accumulated targets drive one gradient step on the centroids and the
//! accumulator is reset. Centroids never change between two updates.

mod init;
mod schedule;

pub use init::{init_centroids, InitMethod};
pub use schedule::{lr_schedule_value, r_schedule_value, update_interval, RSchedule};

use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::accumulate::{summarize_batch_bsq, summarize_batch_kmeans, AccumulatorState, Variant};
use crate::distance::{distance_unchecked, pairwise_distances, PNorm};
use crate::error::{invalid_config, Error, Result};
use crate::points::Points;
use crate::report::{evaluate, revival_rows, Algorithm, FitReport, Traces};
use crate::rng::seeded;
use crate::scalar::Scalar;
use crate::selection::{build_mask, mask_distances};

/// Offsets the shuffling stream from the initialization stream of the same seed.
const SHUFFLE_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

/// Where the starting centroids come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", bound = "T: Scalar")]
pub enum Initialization<T> {
    Method(InitMethod),
    Given(Points<T>),
}

impl<T: Scalar> Initialization<T> {
    pub(crate) fn centroids(&self, data: &Points<T>, k: usize, seed: u64) -> Result<Points<T>> {
        match self {
            Initialization::Method(m) => init_centroids(data, k, *m, seed),
            Initialization::Given(c) => {
                if c.len() != k || c.dim() != data.dim() {
                    return Err(invalid_config(format!(
                        "initial centroids are {}x{}, expected {}x{}",
                        c.len(),
                        c.dim(),
                        k,
                        data.dim()
                    )));
                }
                Ok(c.clone())
            }
        }
    }
}

impl<T> Default for Initialization<T> {
    fn default() -> Self {
        Initialization::Method(InitMethod::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TrainConfig<T> {
    pub k: usize,
    pub variant: Variant,
    pub norm: PNorm,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_initial: f64,
    pub lr_final: f64,
    pub r_schedule: RSchedule,
    pub seed: u64,
    pub init: Initialization<T>,
    /// Never step past the target (p = 2: step length `min(lr, distance)`).
    pub clamp_step: bool,
}

impl<T: Scalar> TrainConfig<T> {
    pub fn new(k: usize, variant: Variant) -> Self {
        Self {
            k,
            variant,
            norm: PNorm::L2,
            epochs: 100,
            batch_size: 512,
            lr_initial: 0.1,
            lr_final: 0.001,
            r_schedule: RSchedule::LinearRamp,
            seed: 0,
            init: Initialization::default(),
            clamp_step: true,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(invalid_config(format!("k must satisfy 1 <= k <= n (k = {}, n = {n})", self.k)));
        }
        if self.epochs == 0 {
            return Err(invalid_config("epochs must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(invalid_config("batch_size must be >= 1"));
        }
        if !(self.lr_initial > 0.0 && self.lr_initial.is_finite()) || !(self.lr_final > 0.0) {
            return Err(invalid_config("learning rates must be positive and finite"));
        }
        if self.lr_final > self.lr_initial {
            return Err(invalid_config("lr_final must not exceed lr_initial"));
        }
        Ok(())
    }
}

/// Hooks into the training loop, for instrumentation and tests.
#[derive(Debug)]
pub enum TrainEvent<'a, T> {
    /// A batch summary was merged; `centroids` are the ones it was computed against.
    BatchMerged {
        epoch: usize,
        batch: usize,
        centroids: &'a Points<T>,
    },
    /// A gradient step was applied.
    Updated {
        epoch: usize,
        batch: usize,
        loss: T,
        centroids: &'a Points<T>,
    },
    /// Quanta that were empty for the whole epoch were re-seeded.
    Revived { epoch: usize, quanta: &'a [usize] },
}

pub fn fit<T: Scalar>(data: &Points<T>, config: &TrainConfig<T>) -> Result<FitReport<T>> {
    fit_with_observer(data, config, |_| {})
}

pub fn fit_with_observer<T: Scalar, F>(data: &Points<T>, config: &TrainConfig<T>, mut observe: F) -> Result<FitReport<T>>
where
    F: FnMut(TrainEvent<'_, T>),
{
    let started = Instant::now();
    config.validate(data.len())?;
    let (n, k, d) = (data.len(), config.k, data.dim());
    let mut centroids = config.init.centroids(data, k, config.seed)?;
    let mut acc = AccumulatorState::new(config.variant, k, d);
    let mut rng = seeded(config.seed ^ SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..n).collect();
    let n_batches = n.div_ceil(config.batch_size);
    let mut traces = Traces::default();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let r = config.r_schedule.value(epoch, config.epochs, n_batches);
        let interval = update_interval(r, n_batches);
        let lr = T::of(lr_schedule_value(epoch, config.epochs, config.lr_initial, config.lr_final));
        let mut epoch_sum = T::zero();
        let mut epoch_max = T::zero();
        let mut epoch_counts = vec![0usize; k];
        let mut pending = 0;

        for (b, rows) in order.chunks(config.batch_size).enumerate() {
            let batch = data.select(rows)?;
            let dist = pairwise_distances(&batch, &centroids, config.norm)?;
            let mask = build_mask(&dist);
            let masked = mask_distances(&dist, &mask)?;
            for (c, m) in epoch_counts.iter_mut().zip(mask.counts()) {
                *c += m;
            }
            for &v in masked.row_sums() {
                epoch_sum = epoch_sum + v;
                epoch_max = epoch_max.max(v);
            }
            let summary = match config.variant {
                Variant::KMeans => summarize_batch_kmeans(&batch, &mask)?,
                Variant::Bsq => summarize_batch_bsq(&batch, &masked)?,
            };
            acc.merge(&summary)?;
            observe(TrainEvent::BatchMerged {
                epoch,
                batch: b,
                centroids: &centroids,
            });
            pending += 1;

            if pending == interval || b + 1 == n_batches {
                let loss = update_loss(&centroids, &acc, config.norm)?;
                centroids = update_step_with(&centroids, &acc, lr, config.norm, config.clamp_step)?;
                traces.loss_per_update.push(loss);
                traces.updates_performed += 1;
                observe(TrainEvent::Updated {
                    epoch,
                    batch: b,
                    loss,
                    centroids: &centroids,
                });
                acc.reset();
                pending = 0;
            }
        }
        traces.epoch_losses.push(epoch_sum / T::of(n as f64));
        traces.epoch_max_distances.push(epoch_max);
        traces.iterations += 1;

        let dead: Vec<usize> = (0..k).filter(|&i| epoch_counts[i] == 0).collect();
        if !dead.is_empty() {
            revive(data, &mut centroids, &dead, config.norm)?;
            observe(TrainEvent::Revived { epoch, quanta: &dead });
        }
    }

    let algorithm = match config.variant {
        Variant::KMeans => Algorithm::SgdKMeans,
        Variant::Bsq => Algorithm::SgdBsq,
    };
    FitReport::finish(algorithm, data, centroids, config.norm, traces, started)
}

/// Moves each dead quantum onto the data point currently farthest from its
/// assigned centroid.
pub(crate) fn revive<T: Scalar>(data: &Points<T>, centroids: &mut Points<T>, dead: &[usize], norm: PNorm) -> Result<()> {
    let eval = evaluate(data, centroids, norm)?;
    for (&q, row) in dead.iter().zip(revival_rows(&eval, dead.len())) {
        centroids.row_mut(q).copy_from_slice(data.row(row));
    }
    Ok(())
}

/// The update-time loss: `Σ ‖Q[i] − T[i]‖_p` over quanta active in the accumulator.
pub fn update_loss<T: Scalar>(centroids: &Points<T>, state: &AccumulatorState<T>, norm: PNorm) -> Result<T> {
    check_state(centroids, state)?;
    Ok((0..state.k())
        .filter(|&i| state.is_active(i))
        .map(|i| distance_unchecked(centroids.row(i), state.target(i), norm))
        .sum())
}

/// One gradient step with clamping enabled.
pub fn update_step<T: Scalar>(centroids: &Points<T>, state: &AccumulatorState<T>, lr: T, norm: PNorm) -> Result<Points<T>> {
    update_step_with(centroids, state, lr, norm, true)
}

/// Moves every active centroid by `lr` along the negative gradient of
/// `‖Q[i] − T[i]‖_p`. At coincidence the subgradient is zero. With `clamp`,
/// a step never covers more Euclidean length than the current distance to
/// the target, so for `p = 2` the step is `min(lr, ‖Q[i] − T[i]‖)`.
pub fn update_step_with<T: Scalar>(
    centroids: &Points<T>,
    state: &AccumulatorState<T>,
    lr: T,
    norm: PNorm,
    clamp: bool,
) -> Result<Points<T>> {
    check_state(centroids, state)?;
    if !(lr > T::zero()) {
        return Err(invalid_config("learning rate must be positive"));
    }
    let mut next = centroids.clone();
    for i in 0..state.k() {
        if !state.is_active(i) {
            continue;
        }
        let Some(grad) = distance_gradient(centroids.row(i), state.target(i), norm) else {
            continue;
        };
        let mut scale = lr;
        if clamp {
            let grad_len = grad.iter().map(|&g| g * g).sum::<T>().sqrt();
            let gap = crate::distance::squared_euclidean(centroids.row(i), state.target(i)).sqrt();
            if lr * grad_len > gap {
                scale = gap / grad_len;
            }
        }
        let row = next.row_mut(i);
        for (q, &g) in row.iter_mut().zip(&grad) {
            *q = *q - scale * g;
        }
        if norm.is_euclidean() && clamp && scale < lr {
            // Landing exactly on the target avoids round-off residue.
            row.copy_from_slice(state.target(i));
        }
    }
    if let Some(pos) = next.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / next.dim(),
            col: pos % next.dim(),
        });
    }
    Ok(next)
}

/// `∇_q ‖q − t‖_p`, or `None` where `q == t`.
pub fn distance_gradient<T: Scalar>(q: &[T], t: &[T], norm: PNorm) -> Option<Vec<T>> {
    let dist = distance_unchecked(q, t, norm);
    if dist <= T::zero() {
        return None;
    }
    let p = T::of(norm.p());
    let denom = dist.powf(p - T::one());
    Some(
        q.iter()
            .zip(t)
            .map(|(&a, &b)| {
                let delta = a - b;
                if delta == T::zero() {
                    T::zero()
                } else if norm.is_euclidean() {
                    delta / dist
                } else {
                    delta.signum() * delta.abs().powf(p - T::one()) / denom
                }
            })
            .collect(),
    )
}

fn check_state<T: Scalar>(centroids: &Points<T>, state: &AccumulatorState<T>) -> Result<()> {
    if centroids.len() != state.k() || centroids.dim() != state.dim() {
        return Err(Error::ShapeMismatch {
            expected: (centroids.len(), centroids.dim()),
            found: (state.k(), state.dim()),
        });
    }
    Ok(())
}
