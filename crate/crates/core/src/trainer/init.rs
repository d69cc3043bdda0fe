use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::distance::squared_euclidean;
use crate::error::{invalid_config, Result};
use crate::points::Points;
use crate::rng::seeded;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMethod {
    /// `k` distinct rows sampled without replacement.
    RandomPoints,
    /// k-means++ seeding: each next row drawn with probability ∝ squared
    /// Euclidean distance to the nearest row already chosen.
    #[default]
    KMeansPlusPlus,
}

pub fn init_centroids<T: Scalar>(data: &Points<T>, k: usize, method: InitMethod, seed: u64) -> Result<Points<T>> {
    let n = data.len();
    if k == 0 || k > n {
        return Err(invalid_config(format!("k must satisfy 1 <= k <= n (k = {k}, n = {n})")));
    }
    let mut rng = seeded(seed);
    let indices = match method {
        InitMethod::RandomPoints => sample(&mut rng, n, k).into_vec(),
        InitMethod::KMeansPlusPlus => {
            let mut chosen = Vec::with_capacity(k);
            let mut taken = vec![false; n];
            let first = rng.gen_range(0..n);
            chosen.push(first);
            taken[first] = true;
            let mut nearest: Vec<f64> = data
                .iter_rows()
                .map(|r| squared_euclidean(r, data.row(first)).to_f64_lossy())
                .collect();
            while chosen.len() < k {
                let total: f64 = nearest.iter().sum();
                let next = if total > 0.0 {
                    let mut target = rng.gen::<f64>() * total;
                    let mut pick = None;
                    for (i, &w) in nearest.iter().enumerate() {
                        if w <= 0.0 {
                            continue;
                        }
                        pick = Some(i);
                        if target < w {
                            break;
                        }
                        target -= w;
                    }
                    pick.expect("positive total has a positive weight")
                } else {
                    // Every remaining row duplicates a chosen one.
                    let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
                    free[rng.gen_range(0..free.len())]
                };
                chosen.push(next);
                taken[next] = true;
                for (w, r) in nearest.iter_mut().zip(data.iter_rows()) {
                    *w = w.min(squared_euclidean(r, data.row(next)).to_f64_lossy());
                }
            }
            chosen
        }
    };
    data.select(&indices)
}
