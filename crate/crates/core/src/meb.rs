//! Minimal enclosing ball (smallest bounding sphere) of a point set.
//!
//! Low dimensions use Welzl's algorithm with the move-to-front heuristic,
//! which is exact. Above [`WELZL_MAX_DIM`] the recursion gets expensive, so
//! a core-set Frank–Wolfe iteration with away steps is used instead; it
//! stops once its dual bound certifies `radius ≤ (1 + ε) · optimum`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::distance::squared_euclidean;
use crate::error::{invalid_config, Error, Result};
use crate::points::Points;
use crate::rng::seeded;
use crate::scalar::Scalar;

pub const WELZL_MAX_DIM: usize = 10;
pub const DEFAULT_CORESET_EPSILON: f64 = 1e-3;
const DEFAULT_SEED: u64 = 0x5EED_BA11;
const CORESET_MAX_ITERATIONS: usize = 200_000;
const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Ball<T> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Scalar> Ball<T> {
    pub fn contains(&self, point: &[T], eps: T) -> bool {
        squared_euclidean(point, &self.center).sqrt() <= self.radius + eps
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MebMethod {
    /// Welzl up to [`WELZL_MAX_DIM`] dimensions, core-set iterations above.
    Auto,
    Welzl,
    CoreSet { epsilon: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MebOptions {
    pub method: MebMethod,
    /// Seeds the point order for Welzl.
    pub seed: u64,
}

impl Default for MebOptions {
    fn default() -> Self {
        Self {
            method: MebMethod::Auto,
            seed: DEFAULT_SEED,
        }
    }
}

pub fn min_enclosing_ball<T: Scalar>(points: &Points<T>) -> Result<Ball<T>> {
    min_enclosing_ball_with(points, MebOptions::default())
}

pub fn min_enclosing_ball_with<T: Scalar>(points: &Points<T>, options: MebOptions) -> Result<Ball<T>> {
    let rows: Vec<&[T]> = points.iter_rows().collect();
    enclosing_ball_of_rows(&rows, options)
}

/// Ball around borrowed rows of equal length (Euclidean metric).
pub fn enclosing_ball_of_rows<T: Scalar>(rows: &[&[T]], options: MebOptions) -> Result<Ball<T>> {
    let first = rows.first().ok_or(Error::Empty("no points to enclose"))?;
    let d = first.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    let method = match options.method {
        MebMethod::Auto if d <= WELZL_MAX_DIM => MebMethod::Welzl,
        MebMethod::Auto => MebMethod::CoreSet {
            epsilon: DEFAULT_CORESET_EPSILON,
        },
        m => m,
    };
    let center = match method {
        MebMethod::Welzl => welzl(rows, options.seed),
        MebMethod::CoreSet { epsilon } => {
            if !(epsilon > 0.0) {
                return Err(invalid_config("core-set epsilon must be positive"));
            }
            core_set(rows, T::of(epsilon))
        }
        MebMethod::Auto => unreachable!(),
    };
    // The reported radius always covers every point exactly.
    let radius = rows
        .iter()
        .map(|r| squared_euclidean(r, &center))
        .fold(T::zero(), T::max)
        .sqrt();
    Ok(Ball { center, radius })
}

/// Candidate ball during the recursion; `radius_sq < 0` encloses nothing.
struct Candidate<T> {
    center: Vec<T>,
    radius_sq: T,
}

impl<T: Scalar> Candidate<T> {
    fn empty(d: usize) -> Self {
        Self {
            center: vec![T::zero(); d],
            radius_sq: -T::one(),
        }
    }

    fn contains(&self, p: &[T]) -> bool {
        if self.radius_sq < T::zero() {
            return false;
        }
        let tol = T::of(RANK_TOLERANCE);
        squared_euclidean(p, &self.center) <= self.radius_sq + tol * (T::one() + self.radius_sq)
    }
}

fn welzl<T: Scalar>(rows: &[&[T]], seed: u64) -> Vec<T> {
    let d = rows[0].len();
    let mut order: Vec<&[T]> = rows.to_vec();
    order.shuffle(&mut seeded(seed));
    let mut support = Vec::with_capacity(d + 1);
    let end = order.len();
    move_to_front(&mut order, end, &mut support, d).center
}

fn move_to_front<'a, T: Scalar>(
    order: &mut [&'a [T]],
    end: usize,
    support: &mut Vec<&'a [T]>,
    d: usize,
) -> Candidate<T> {
    let mut ball = ball_through(support, d);
    if support.len() == d + 1 {
        return ball;
    }
    for i in 0..end {
        if !ball.contains(order[i]) {
            support.push(order[i]);
            ball = move_to_front(order, i, support, d);
            support.pop();
            order[..=i].rotate_right(1);
        }
    }
    ball
}

/// Smallest ball with every support point on its boundary: the
/// circumsphere within the support's affine hull. An affinely dependent
/// last point is dropped and the ball widened to still cover it.
fn ball_through<T: Scalar>(support: &[&[T]], d: usize) -> Candidate<T> {
    match support.len() {
        0 => return Candidate::empty(d),
        1 => {
            return Candidate {
                center: support[0].to_vec(),
                radius_sq: T::zero(),
            }
        }
        _ => {}
    }
    let origin = support[0];
    let edges: Vec<Vec<T>> = support[1..]
        .iter()
        .map(|p| p.iter().zip(origin).map(|(&a, &b)| a - b).collect())
        .collect();
    let m = edges.len();
    let mut a = vec![vec![T::zero(); m + 1]; m];
    for j in 0..m {
        for l in 0..m {
            a[j][l] = T::of(2.0) * dot(&edges[j], &edges[l]);
        }
        a[j][m] = dot(&edges[j], &edges[j]);
    }
    match solve(a) {
        Some(lambda) => {
            let mut center = origin.to_vec();
            for (e, &w) in edges.iter().zip(&lambda) {
                for (c, &v) in center.iter_mut().zip(e) {
                    *c = *c + w * v;
                }
            }
            let radius_sq = squared_euclidean(&center, origin);
            Candidate { center, radius_sq }
        }
        None => {
            let mut ball = ball_through(&support[..support.len() - 1], d);
            let last = support[support.len() - 1];
            ball.radius_sq = ball.radius_sq.max(squared_euclidean(last, &ball.center));
            ball
        }
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting on an augmented `m × (m+1)`
/// system. `None` when a pivot falls below the relative rank tolerance.
fn solve<T: Scalar>(mut a: Vec<Vec<T>>) -> Option<Vec<T>> {
    let m = a.len();
    let scale = (0..m).map(|i| a[i][i].abs()).fold(T::zero(), T::max);
    if scale <= T::zero() {
        return None;
    }
    let tol = T::of(RANK_TOLERANCE) * scale;
    for col in 0..m {
        let pivot = (col..m).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())?;
        if a[pivot][col].abs() <= tol {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            for c in col..=m {
                let v = a[col][c];
                a[row][c] = a[row][c] - f * v;
            }
        }
    }
    let mut x = vec![T::zero(); m];
    for row in (0..m).rev() {
        let mut s = a[row][m];
        for c in row + 1..m {
            s = s - a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Frank–Wolfe on the dual of the enclosing-ball problem with away steps.
/// `φ = Σ uᵢ‖pᵢ − c‖²` lower-bounds the optimal squared radius, so stopping
/// at `max ‖pᵢ − c‖² ≤ (1+ε)² φ` certifies the radius to within `1 + ε`.
fn core_set<T: Scalar>(rows: &[&[T]], epsilon: T) -> Vec<T> {
    let m = rows.len();
    let far_from = |c: &[T]| -> usize {
        let mut best = 0;
        let mut best_d = -T::one();
        for (i, r) in rows.iter().enumerate() {
            let dd = squared_euclidean(r, c);
            if dd > best_d {
                best_d = dd;
                best = i;
            }
        }
        best
    };
    let a = far_from(rows[0]);
    let b = far_from(rows[a]);
    let mut weights = vec![T::zero(); m];
    let half = T::of(0.5);
    weights[a] = weights[a] + half;
    weights[b] = weights[b] + half;
    let mut center: Vec<T> = rows[a].iter().zip(rows[b]).map(|(&x, &y)| half * (x + y)).collect();

    let threshold = (T::one() + epsilon) * (T::one() + epsilon) - T::one();
    let mut dist = vec![T::zero(); m];
    for _ in 0..CORESET_MAX_ITERATIONS {
        for (dd, r) in dist.iter_mut().zip(rows) {
            *dd = squared_euclidean(r, &center);
        }
        let phi: T = weights.iter().zip(&dist).map(|(&u, &dd)| u * dd).sum();
        if phi <= T::zero() {
            break;
        }
        let (far, far_d) = dist
            .iter()
            .copied()
            .enumerate()
            .fold((0, -T::one()), |acc, (i, dd)| if dd > acc.1 { (i, dd) } else { acc });
        let delta_plus = far_d / phi - T::one();
        if delta_plus <= threshold {
            break;
        }
        let (near, near_d) = dist
            .iter()
            .copied()
            .enumerate()
            .filter(|&(i, _)| weights[i] > T::zero())
            .fold((0, T::infinity()), |acc, (i, dd)| if dd < acc.1 { (i, dd) } else { acc });
        let delta_minus = T::one() - near_d / phi;
        if delta_plus >= delta_minus {
            let step = delta_plus / (T::of(2.0) * (T::one() + delta_plus));
            weights.iter_mut().for_each(|u| *u = *u * (T::one() - step));
            weights[far] = weights[far] + step;
            for (c, &p) in center.iter_mut().zip(rows[far]) {
                *c = (T::one() - step) * *c + step * p;
            }
        } else {
            let u = weights[near];
            let drop = u / (T::one() - u);
            let line = delta_minus / (T::of(2.0) * (T::one() - delta_minus));
            let step = line.min(drop);
            weights.iter_mut().for_each(|w| *w = *w * (T::one() + step));
            weights[near] = if step == drop { T::zero() } else { weights[near] - step };
            for (c, &p) in center.iter_mut().zip(rows[near]) {
                *c = (T::one() + step) * *c - step * p;
            }
        }
    }
    center
}
