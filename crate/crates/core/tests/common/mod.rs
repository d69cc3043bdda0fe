//! Independent reference computations for the integration tests. Nothing
//! here calls into the code paths it is used to check.

#![allow(dead_code)]

use bsquant::rng::{seeded, Rng};
use rand::Rng as _;

pub fn rng(seed: u64) -> Rng {
    seeded(seed)
}

pub fn random_matrix(rng: &mut Rng, rows: usize, cols: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-scale..scale)).collect())
        .collect()
}

/// `(Σ |a_m − b_m|^p)^(1/p)` by a plain loop.
pub fn p_distance(a: &[f64], b: &[f64], p: f64) -> f64 {
    let mut s = 0.0;
    if p == 2.0 {
        for m in 0..a.len() {
            s += (a[m] - b[m]) * (a[m] - b[m]);
        }
        return s.sqrt();
    }
    for m in 0..a.len() {
        s += (a[m] - b[m]).abs().powf(p);
    }
    s.powf(1.0 / p)
}

pub fn double_loop_distances(points: &[Vec<f64>], centroids: &[Vec<f64>], p: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; centroids.len()]; points.len()];
    for i in 0..points.len() {
        for j in 0..centroids.len() {
            out[i][j] = p_distance(&points[i], &centroids[j], p);
        }
    }
    out
}

/// Index of the first minimum in a row.
pub fn linear_argmin(row: &[f64]) -> usize {
    let mut best = 0;
    for j in 1..row.len() {
        if row[j] < row[best] {
            best = j;
        }
    }
    best
}

pub fn nearest(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let row: Vec<f64> = centroids.iter().map(|c| p_distance(p, c, 2.0)).collect();
            linear_argmin(&row)
        })
        .collect()
}

/// Per-quantum mean and count from sums over the whole set at once.
pub fn pooled_means(points: &[Vec<f64>], assign: &[usize], k: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let d = points[0].len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (p, &j) in points.iter().zip(assign) {
        counts[j] += 1;
        for m in 0..d {
            sums[j][m] += p[m];
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            for m in 0..d {
                sums[j][m] /= counts[j] as f64;
            }
        }
    }
    (sums, counts)
}

/// Farthest assigned point per quantum by one scan; first index wins ties.
pub fn farthest_scan(points: &[Vec<f64>], centroids: &[Vec<f64>], assign: &[usize]) -> Vec<Option<(usize, f64)>> {
    let mut best: Vec<Option<(usize, f64)>> = vec![None; centroids.len()];
    for (i, p) in points.iter().enumerate() {
        let j = assign[i];
        let dist = p_distance(p, &centroids[j], 2.0);
        match best[j] {
            Some((_, b)) if dist <= b => {}
            _ => best[j] = Some((i, dist)),
        }
    }
    best
}

/// Solves `A x = b` by Cramer's rule (m ≤ 3), `None` if `A` is singular.
fn cramer(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    fn det(m: &[Vec<f64>]) -> f64 {
        match m.len() {
            1 => m[0][0],
            2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
            3 => {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            }
            _ => unimplemented!("oracle handles up to 3 unknowns"),
        }
    }
    let scale: f64 = a.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let d = det(a);
    if d.abs() <= 1e-12 * scale.powi(a.len() as i32) {
        return None;
    }
    Some(
        (0..a.len())
            .map(|c| {
                let mut m = a.to_vec();
                for r in 0..a.len() {
                    m[r][c] = b[r];
                }
                det(&m) / d
            })
            .collect(),
    )
}

/// Circumsphere of a support set inside its affine hull.
fn circumsphere(support: &[&Vec<f64>]) -> Option<(Vec<f64>, f64)> {
    let o = support[0];
    if support.len() == 1 {
        return Some((o.clone(), 0.0));
    }
    let v: Vec<Vec<f64>> = support[1..]
        .iter()
        .map(|p| p.iter().zip(o).map(|(a, b)| a - b).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let a: Vec<Vec<f64>> = v.iter().map(|x| v.iter().map(|y| 2.0 * dot(x, y)).collect()).collect();
    let b: Vec<f64> = v.iter().map(|x| dot(x, x)).collect();
    let lambda = cramer(&a, &b)?;
    let mut c = o.clone();
    for (w, x) in lambda.iter().zip(&v) {
        for m in 0..c.len() {
            c[m] += w * x[m];
        }
    }
    let r = p_distance(&c, o, 2.0);
    Some((c, r))
}

/// Smallest enclosing ball by enumerating every support set of up to
/// `d + 1` points. Exponential; for small `n` only.
pub fn brute_force_meb(points: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let n = points.len();
    let d = points[0].len();
    let mut half_diameter: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            half_diameter = half_diameter.max(0.5 * p_distance(&points[i], &points[j], 2.0));
        }
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut consider = |idx: &[usize]| {
        let support: Vec<&Vec<f64>> = idx.iter().map(|&i| &points[i]).collect();
        let Some((c, r)) = circumsphere(&support) else { return };
        if r < half_diameter * (1.0 - 1e-9) {
            return;
        }
        if best.as_ref().is_some_and(|(_, b)| r >= *b) {
            return;
        }
        let tol = 1e-9 * (1.0 + r);
        if points.iter().all(|p| p_distance(p, &c, 2.0) <= r + tol) {
            best = Some((c, r));
        }
    };
    let mut idx = Vec::new();
    fn rec(start: usize, n: usize, left: usize, idx: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if !idx.is_empty() {
            f(idx);
        }
        if left == 0 {
            return;
        }
        for i in start..n {
            idx.push(i);
            rec(i + 1, n, left - 1, idx, f);
            idx.pop();
        }
    }
    rec(0, n, d + 1, &mut idx, &mut consider);
    best.expect("some support set always encloses the points")
}

pub fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|m| {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[m] += h;
            minus[m] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}
