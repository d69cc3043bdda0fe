//! Operation-level checks against the reference computations in `common`.

mod common;

use bsquant::accumulate::{
    merge_bsq, merge_kmeans, summarize_batch_bsq, summarize_batch_kmeans, AccumulatorState, Variant,
};
use bsquant::data::{generate, Distribution, SyntheticSpec};
use bsquant::em::{bsq_em_fit, lloyd_fit, lloyd_fit_with_observer, EmConfig};
use bsquant::meb::min_enclosing_ball;
use bsquant::selection::one_hot;
use bsquant::trainer::{fit, init_centroids, update_step, InitMethod, Initialization, TrainConfig};
use bsquant::{assignments, build_mask, mask_distances, pairwise_distances, PNorm, Points};
use common::*;
use rand::Rng as _;

fn points(rows: &[Vec<f64>]) -> Points<f64> {
    Points::from_rows(rows).unwrap()
}

#[test]
fn distances_match_double_loop() {
    let mut r = rng(1);
    let b = random_matrix(&mut r, 50, 7, 5.0);
    let q = random_matrix(&mut r, 9, 7, 5.0);
    for p in [1.0, 2.0, 3.0] {
        let got = pairwise_distances(&points(&b), &points(&q), PNorm::new(p).unwrap()).unwrap();
        let want = double_loop_distances(&b, &q, p);
        for i in 0..50 {
            for j in 0..9 {
                assert!((got.get(i, j) - want[i][j]).abs() <= 1e-9, "p={p} ({i},{j})");
            }
        }
    }
}

#[test]
fn mask_matches_linear_scan() {
    let mut r = rng(2);
    let b = random_matrix(&mut r, 40, 3, 1.0);
    let q = random_matrix(&mut r, 8, 3, 1.0);
    let d = pairwise_distances(&points(&b), &points(&q), PNorm::L2).unwrap();
    let m = build_mask(&d);
    for i in 0..40 {
        assert_eq!(m.column_of(i), linear_argmin(d.row(i)));
    }
}

#[test]
fn masked_row_sums_equal_row_minima() {
    let mut r = rng(3);
    let b = random_matrix(&mut r, 30, 4, 1.0);
    let q = random_matrix(&mut r, 5, 4, 1.0);
    let d = pairwise_distances(&points(&b), &points(&q), PNorm::L2).unwrap();
    let dm = mask_distances(&d, &build_mask(&d)).unwrap();
    for i in 0..30 {
        let row_min = d.row(i).iter().copied().fold(f64::INFINITY, f64::min);
        let row_sum: f64 = (0..5).map(|j| dm.get(i, j)).sum();
        assert_eq!(row_sum, row_min);
    }
}

#[test]
fn one_hot_inverts_assignments() {
    let mut r = rng(4);
    for _ in 0..50 {
        let k = r.gen_range(1..10);
        let idx: Vec<usize> = (0..r.gen_range(1..40)).map(|_| r.gen_range(0..k)).collect();
        let m = one_hot(&idx, k).unwrap();
        assert_eq!(one_hot(&assignments(&m), k).unwrap(), m);
        assert_eq!(bsquant::Mask::from_dense(&m.to_dense()).unwrap(), m);
    }
}

#[test]
fn kmeans_summary_matches_grouping_loop() {
    let mut r = rng(5);
    let b = random_matrix(&mut r, 64, 3, 4.0);
    let q = random_matrix(&mut r, 5, 3, 4.0);
    let assign = nearest(&b, &q);
    let mask = one_hot(&assign, 5).unwrap();
    let s = summarize_batch_kmeans(&points(&b), &mask).unwrap();
    let (means, counts) = pooled_means(&b, &assign, 5);
    for j in 0..5 {
        assert_eq!(s.weights()[j], counts[j] as f64);
        for m in 0..3 {
            assert!((s.target(j)[m] - means[j][m]).abs() <= 1e-12);
        }
    }
}

#[test]
fn bsq_summary_matches_column_scan() {
    let mut r = rng(6);
    let b = random_matrix(&mut r, 64, 3, 4.0);
    let q = random_matrix(&mut r, 5, 3, 4.0);
    let d = pairwise_distances(&points(&b), &points(&q), PNorm::L2).unwrap();
    let dm = mask_distances(&d, &build_mask(&d)).unwrap();
    let s = summarize_batch_bsq(&points(&b), &dm).unwrap();
    for j in 0..5 {
        let mut best = (0usize, 0.0f64);
        for i in 0..64 {
            if dm.get(i, j) > best.1 {
                best = (i, dm.get(i, j));
            }
        }
        assert_eq!(s.weights()[j], best.1);
        assert_eq!(s.target(j), b[best.0].as_slice());
    }
}

fn split_into_batches(r: &mut bsquant::rng::Rng, n: usize) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < n {
        let len = r.gen_range(1..=n - start);
        out.push(start..start + len);
        start += len;
    }
    out
}

#[test]
fn sequential_kmeans_merges_give_pooled_mean() {
    let mut r = rng(7);
    let b = random_matrix(&mut r, 300, 4, 3.0);
    let q = random_matrix(&mut r, 6, 4, 3.0);
    let assign = nearest(&b, &q);
    let mut st = AccumulatorState::new(Variant::KMeans, 6, 4);
    for range in split_into_batches(&mut r, 300) {
        let mask = one_hot(&assign[range.clone()], 6).unwrap();
        let s = summarize_batch_kmeans(&points(&b[range]), &mask).unwrap();
        merge_kmeans(&mut st, &s).unwrap();
    }
    let (means, counts) = pooled_means(&b, &assign, 6);
    for j in 0..6 {
        assert_eq!(st.weights()[j], counts[j] as f64);
        for m in 0..4 {
            assert!((st.target(j)[m] - means[j][m]).abs() <= 1e-9);
        }
    }
}

#[test]
fn sequential_bsq_merges_give_global_farthest() {
    let mut r = rng(8);
    let b = random_matrix(&mut r, 300, 2, 3.0);
    let q = random_matrix(&mut r, 6, 2, 3.0);
    let assign = nearest(&b, &q);
    let qp = points(&q);
    let mut st = AccumulatorState::new(Variant::Bsq, 6, 2);
    for range in split_into_batches(&mut r, 300) {
        let batch = points(&b[range]);
        let d = pairwise_distances(&batch, &qp, PNorm::L2).unwrap();
        let dm = mask_distances(&d, &build_mask(&d)).unwrap();
        merge_bsq(&mut st, &summarize_batch_bsq(&batch, &dm).unwrap()).unwrap();
    }
    for (j, best) in farthest_scan(&b, &q, &assign).into_iter().enumerate() {
        match best {
            Some((i, dist)) if dist > 0.0 => {
                assert_eq!(st.weights()[j], dist);
                assert_eq!(st.target(j), b[i].as_slice());
            }
            _ => assert_eq!(st.weights()[j], 0.0),
        }
    }
}

#[test]
fn update_direction_matches_finite_differences() {
    let mut r = rng(9);
    for _ in 0..20 {
        let q = random_matrix(&mut r, 1, 5, 2.0);
        let t = random_matrix(&mut r, 1, 5, 2.0);
        let st = AccumulatorState::from_parts(Variant::KMeans, t.clone(), vec![1.0]).unwrap();
        let lr = 1e-4;
        let next = update_step(&points(&q), &st, lr, PNorm::L2).unwrap();
        let fd = central_difference(|x| p_distance(x, &t[0], 2.0), &q[0], 1e-6);
        for m in 0..5 {
            let step = (q[0][m] - next.row(0)[m]) / lr;
            assert!((step - fd[m]).abs() <= 1e-5 * fd.iter().map(|v| v.abs()).fold(0.0, f64::max));
        }
    }
}

#[test]
fn plus_plus_seeds_one_per_separated_cluster() {
    let centres = [[0.0, 0.0], [50.0, 0.0], [0.0, 50.0], [50.0, 50.0], [25.0, 100.0]];
    let mut r = rng(10);
    let mut rows = Vec::new();
    for c in &centres {
        for _ in 0..40 {
            rows.push(vec![c[0] + r.gen_range(-0.5..0.5), c[1] + r.gen_range(-0.5..0.5)]);
        }
    }
    let data = points(&rows);
    let mut good = 0;
    for seed in 0..20 {
        let init = init_centroids(&data, 5, InitMethod::KMeansPlusPlus, seed).unwrap();
        let mut hit = [false; 5];
        for c in init.iter_rows() {
            let owner = (0..5)
                .min_by(|&a, &b| {
                    p_distance(c, &centres[a], 2.0).total_cmp(&p_distance(c, &centres[b], 2.0))
                })
                .unwrap();
            hit[owner] = true;
        }
        if hit.iter().all(|&h| h) {
            good += 1;
        }
    }
    assert!(good >= 18, "{good}/20 runs seeded every cluster");
}

#[test]
fn meb_matches_brute_force() {
    let mut r = rng(11);
    for trial in 0..30 {
        let d = 2 + trial % 2;
        let n = r.gen_range(1..=25);
        let rows = random_matrix(&mut r, n, d, 10.0);
        let ball = min_enclosing_ball(&points(&rows)).unwrap();
        let (_, radius) = brute_force_meb(&rows);
        assert!((ball.radius - radius).abs() <= 1e-7, "trial {trial}: {} vs {radius}", ball.radius);
    }
}

fn gaussian(n: usize, d: usize, seed: u64) -> Points<f64> {
    generate(&SyntheticSpec::new(n, d, Distribution::standard_gaussian(), seed)).unwrap()
}

#[test]
fn sgd_kmeans_close_to_lloyd_on_gaussian_data() {
    let data = gaussian(10_000, 10, 21);
    let init = init_centroids(&data, 32, InitMethod::KMeansPlusPlus, 21).unwrap();
    let mut sgd = TrainConfig::new(32, Variant::KMeans);
    sgd.init = Initialization::Given(init.clone());
    let mut em = EmConfig::new(32);
    em.init = Initialization::Given(init);
    let a = fit(&data, &sgd).unwrap().mean_distance;
    let b = lloyd_fit(&data, &em).unwrap().mean_distance;
    assert!((a - b).abs() <= 0.05 * b, "sgd {a} vs lloyd {b}");
}

#[test]
fn lloyd_squared_error_never_increases() {
    let data = gaussian(2000, 3, 22);
    let mut cfg = EmConfig::new(12);
    cfg.tol = 0.0;
    cfg.init = Initialization::Method(InitMethod::RandomPoints);
    let mut sse = Vec::new();
    let mut last_centroids: Option<Points<f64>> = None;
    lloyd_fit_with_observer(&data, &cfg, |step| {
        // Objective of the assignment that was just refitted, under the refit centroids.
        let total: f64 = data
            .iter_rows()
            .zip(step.assignments)
            .map(|(p, &j)| p_distance(p, step.centroids.row(j), 2.0).powi(2))
            .sum();
        sse.push(total);
        last_centroids = Some(step.centroids.clone());
    })
    .unwrap();
    assert!(sse.len() > 2);
    for w in sse.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn bsq_em_max_distance_not_worse_than_lloyd() {
    let mut bsq = Vec::new();
    let mut lloyd = Vec::new();
    for seed in 0..5 {
        let data: Points<f64> = generate(&SyntheticSpec::new(1000, 2, Distribution::UniformCube, 100 + seed)).unwrap();
        let mut cfg = EmConfig::new(10);
        cfg.seed = seed;
        cfg.init = Initialization::Method(InitMethod::KMeansPlusPlus);
        bsq.push(bsq_em_fit(&data, &cfg).unwrap().max_distance);
        lloyd.push(lloyd_fit(&data, &cfg).unwrap().max_distance);
    }
    assert!(median(&bsq) <= median(&lloyd), "bsq {bsq:?} lloyd {lloyd:?}");
}
