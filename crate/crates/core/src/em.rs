//! Expectation–maximization baselines: Lloyd's k-Means (recentre at the
//! mean of the assigned points) and BSQ (recentre at the centre of their
//! minimal enclosing ball).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::distance::PNorm;
use crate::error::{invalid_config, Result};
use crate::meb::{enclosing_ball_of_rows, MebOptions};
use crate::points::Points;
use crate::report::{evaluate, revival_rows, Algorithm, Evaluation, FitReport, Traces};
use crate::scalar::Scalar;
use crate::trainer::Initialization;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EmConfig<T> {
    pub k: usize,
    pub norm: PNorm,
    pub max_iterations: usize,
    /// Lloyd stops once the relative change of the mean distance drops to this.
    pub tol: f64,
    pub seed: u64,
    pub init: Initialization<T>,
    #[serde(skip)]
    pub meb: MebOptions,
}

impl<T: Scalar> EmConfig<T> {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            norm: PNorm::L2,
            max_iterations: 100,
            tol: 1e-6,
            seed: 0,
            init: Initialization::default(),
            meb: MebOptions::default(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(invalid_config(format!("k must satisfy 1 <= k <= n (k = {}, n = {n})", self.k)));
        }
        if self.max_iterations == 0 {
            return Err(invalid_config("max_iterations must be >= 1"));
        }
        if !(self.tol >= 0.0) {
            return Err(invalid_config("tol must be >= 0"));
        }
        Ok(())
    }
}

/// Reported after every maximization step.
#[derive(Debug)]
pub struct MStep<'a, T> {
    pub iteration: usize,
    /// The assignment the new centroids were fitted to.
    pub assignments: &'a [usize],
    pub centroids: &'a Points<T>,
    /// Quanta that had no points and were re-seeded instead of refitted.
    pub revived: &'a [usize],
}

pub fn lloyd_fit<T: Scalar>(data: &Points<T>, config: &EmConfig<T>) -> Result<FitReport<T>> {
    lloyd_fit_with_observer(data, config, |_| {})
}

pub fn lloyd_fit_with_observer<T: Scalar, F>(data: &Points<T>, config: &EmConfig<T>, mut observe: F) -> Result<FitReport<T>>
where
    F: FnMut(MStep<'_, T>),
{
    let started = Instant::now();
    config.validate(data.len())?;
    let mut centroids = config.init.centroids(data, config.k, config.seed)?;
    let mut traces = Traces {
        converged: Some(false),
        ..Traces::default()
    };
    let mut previous_loss: Option<T> = None;
    for iteration in 1..=config.max_iterations {
        let eval = evaluate(data, &centroids, config.norm)?;
        record(&mut traces, &eval, eval.mean_distance);
        let (next, revived) = maximize(data, &centroids, &eval, |rows| Ok(mean(data, rows)))?;
        observe(MStep {
            iteration,
            assignments: &eval.assignments,
            centroids: &next,
            revived: &revived,
        });
        let unchanged = next == centroids;
        let settled = previous_loss.is_some_and(|prev| {
            (prev - eval.mean_distance).abs() <= T::of(config.tol) * prev.abs()
        });
        centroids = next;
        if unchanged || settled {
            traces.converged = Some(true);
            break;
        }
        previous_loss = Some(eval.mean_distance);
    }
    FitReport::finish(Algorithm::Lloyd, data, centroids, config.norm, traces, started)
}

/// BSQ by EM. Requires the Euclidean norm. Stops when an assignment step
/// changes no point's quantum; hitting `max_iterations` first is reported
/// as `converged == Some(false)` rather than an error, since the minimax
/// objective can make the iteration cycle.
pub fn bsq_em_fit<T: Scalar>(data: &Points<T>, config: &EmConfig<T>) -> Result<FitReport<T>> {
    bsq_em_fit_with_observer(data, config, |_| {})
}

pub fn bsq_em_fit_with_observer<T: Scalar, F>(data: &Points<T>, config: &EmConfig<T>, mut observe: F) -> Result<FitReport<T>>
where
    F: FnMut(MStep<'_, T>),
{
    let started = Instant::now();
    config.validate(data.len())?;
    if !config.norm.is_euclidean() {
        return Err(invalid_config(format!(
            "bounding-sphere EM needs the Euclidean norm, got p = {}",
            config.norm.p()
        )));
    }
    let mut centroids = config.init.centroids(data, config.k, config.seed)?;
    let mut traces = Traces {
        converged: Some(false),
        ..Traces::default()
    };
    let mut previous: Option<Vec<usize>> = None;
    for iteration in 1..=config.max_iterations {
        let eval = evaluate(data, &centroids, config.norm)?;
        if previous.as_deref() == Some(eval.assignments.as_slice()) {
            traces.converged = Some(true);
            break;
        }
        record(&mut traces, &eval, eval.max_distance);
        let (next, revived) = maximize(data, &centroids, &eval, |rows| {
            let members: Vec<&[T]> = rows.iter().map(|&r| data.row(r)).collect();
            Ok(enclosing_ball_of_rows(&members, config.meb)?.center)
        })?;
        observe(MStep {
            iteration,
            assignments: &eval.assignments,
            centroids: &next,
            revived: &revived,
        });
        centroids = next;
        previous = Some(eval.assignments);
    }
    FitReport::finish(Algorithm::BsqEm, data, centroids, config.norm, traces, started)
}

fn record<T: Scalar>(traces: &mut Traces<T>, eval: &Evaluation<T>, objective: T) {
    traces.loss_per_update.push(objective);
    traces.epoch_losses.push(eval.mean_distance);
    traces.epoch_max_distances.push(eval.max_distance);
    traces.iterations += 1;
    traces.updates_performed += 1;
}

/// Refits every non-empty quantum with `center_of(member rows)` and re-seeds
/// empty ones at the points farthest from their centroids.
fn maximize<T: Scalar, F>(
    data: &Points<T>,
    centroids: &Points<T>,
    eval: &Evaluation<T>,
    mut center_of: F,
) -> Result<(Points<T>, Vec<usize>)>
where
    F: FnMut(&[usize]) -> Result<Vec<T>>,
{
    let k = centroids.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &j) in eval.assignments.iter().enumerate() {
        members[j].push(i);
    }
    let mut next = centroids.clone();
    let mut dead = Vec::new();
    for (j, rows) in members.iter().enumerate() {
        if rows.is_empty() {
            dead.push(j);
        } else {
            let c = center_of(rows)?;
            next.row_mut(j).copy_from_slice(&c);
        }
    }
    for (&q, row) in dead.iter().zip(revival_rows(eval, dead.len())) {
        next.row_mut(q).copy_from_slice(data.row(row));
    }
    Ok((next, dead))
}

fn mean<T: Scalar>(data: &Points<T>, rows: &[usize]) -> Vec<T> {
    let mut acc = vec![T::zero(); data.dim()];
    for &r in rows {
        for (a, &v) in acc.iter_mut().zip(data.row(r)) {
            *a = *a + v;
        }
    }
    let n = T::of(rows.len() as f64);
    acc.into_iter().map(|a| a / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::InitMethod;

    fn line(values: &[f64]) -> Points<f64> {
        let rows: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
        Points::<f64>::from_rows(&rows).unwrap()
    }

    #[test]
    fn lloyd_fixed_point_in_one_iteration() {
        let data = Points::<f64>::from_rows(&[[0.0, 1.0], [5.0, 5.0], [-3.0, 2.0]]).unwrap();
        let mut cfg = EmConfig::new(3);
        cfg.init = Initialization::Given(data.clone());
        let r = lloyd_fit(&data, &cfg).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.converged, Some(true));
        assert_eq!(r.mean_distance, 0.0);
        assert_eq!(r.centroids, data);
    }

    #[test]
    fn lloyd_two_obvious_clusters() {
        let data = line(&[0.0, 1.0, 8.0, 9.0]);
        let mut cfg = EmConfig::new(2);
        cfg.init = Initialization::Given(line(&[0.0, 9.0]));
        let r = lloyd_fit(&data, &cfg).unwrap();
        assert_eq!(r.centroids.as_slice(), &[0.5, 8.5]);
        assert_eq!(r.converged, Some(true));
    }

    #[test]
    fn lloyd_revives_empty_quanta() {
        let data = line(&[0.0, 1.0, 2.0, 10.0]);
        let mut cfg = EmConfig::new(2);
        cfg.init = Initialization::Given(line(&[1.0, 1000.0]));
        let r = lloyd_fit(&data, &cfg).unwrap();
        assert!(r.counts.iter().all(|&c| c > 0), "{:?}", r.counts);
    }

    #[test]
    fn bsq_em_single_quantum_midpoint() {
        let data = Points::<f64>::from_rows(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let r = bsq_em_fit(&data, &EmConfig::new(1)).unwrap();
        assert!((r.centroids.row(0)[0] - 1.0).abs() < 1e-12);
        assert!(r.centroids.row(0)[1].abs() < 1e-12);
    }

    #[test]
    fn bsq_em_interior_point_irrelevant() {
        let data = Points::<f64>::from_rows(&[[0.0, 0.0], [4.0, 0.0], [2.0, 0.1]]).unwrap();
        let r = bsq_em_fit(&data, &EmConfig::new(1)).unwrap();
        assert!((r.centroids.row(0)[0] - 2.0).abs() < 1e-12);
        assert!(r.centroids.row(0)[1].abs() < 1e-12);
        assert!((r.max_distance - 2.0).abs() < 1e-12);
        assert_eq!(r.converged, Some(true));
    }

    #[test]
    fn bsq_em_rejects_non_euclidean() {
        let data = line(&[0.0, 1.0]);
        let mut cfg = EmConfig::new(1);
        cfg.norm = PNorm::L1;
        assert!(bsq_em_fit(&data, &cfg).is_err());
    }

    #[test]
    fn k_larger_than_n_rejected() {
        let data = line(&[0.0, 1.0]);
        assert!(lloyd_fit(&data, &EmConfig::new(3)).is_err());
        assert!(bsq_em_fit(&data, &EmConfig::new(3)).is_err());
    }

    #[test]
    fn bsq_em_stops_at_max_iterations() {
        let data = crate::data::generate::<f64>(&crate::data::SyntheticSpec::new(
            300,
            2,
            crate::data::Distribution::UniformCube,
            2,
        ))
        .unwrap();
        let mut cfg = EmConfig::new(6);
        cfg.max_iterations = 1;
        cfg.init = Initialization::Method(InitMethod::RandomPoints);
        let r = bsq_em_fit(&data, &cfg).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.converged, Some(false));
    }
}
