//! Data for redrawing a fitted quantization: points coloured by quantum,
//! centroids, per-quantum radii, and for 2-D data samples along the cell
//! boundaries.

use serde::{Deserialize, Serialize};

use crate::distance::PNorm;
use crate::error::Result;
use crate::points::Points;
use crate::report::evaluate;
use crate::scalar::Scalar;
use crate::selection::build_mask;

pub const PLOT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub x: f64,
    pub y: f64,
    /// The two quanta the sample separates, lower index first.
    pub quanta: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotExport {
    pub schema_version: u32,
    pub label: Option<String>,
    pub dim: usize,
    pub norm_p: f64,
    pub points: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Largest assigned distance per quantum; 0 for an empty quantum.
    pub radii: Vec<f64>,
    pub counts: Vec<usize>,
    /// Only present for 2-D data.
    pub boundary: Option<Vec<BoundarySample>>,
    pub warnings: Vec<String>,
}

/// `boundary_resolution` is the number of grid steps per axis used to trace
/// cell boundaries; `None` or non-2-D data skips the tracing.
pub fn build_plot_export<T: Scalar>(
    data: &Points<T>,
    centroids: &Points<T>,
    norm: PNorm,
    boundary_resolution: Option<usize>,
    label: Option<String>,
) -> Result<PlotExport> {
    let eval = evaluate(data, centroids, norm)?;
    let rows = |p: &Points<T>| -> Vec<Vec<f64>> {
        p.iter_rows()
            .map(|r| r.iter().map(|v| v.to_f64_lossy()).collect())
            .collect()
    };
    let mut warnings = Vec::new();
    let boundary = match boundary_resolution {
        Some(res) if data.dim() == 2 && res >= 2 => Some(trace_boundaries(data, centroids, norm, res)?),
        Some(_) if data.dim() != 2 => {
            warnings.push(format!("cell boundaries need 2-D data, got d = {}; omitted", data.dim()));
            None
        }
        _ => None,
    };
    Ok(PlotExport {
        schema_version: PLOT_SCHEMA_VERSION,
        label,
        dim: data.dim(),
        norm_p: norm.p(),
        points: rows(data),
        assignments: eval.assignments,
        centroids: rows(centroids),
        radii: eval.radii.iter().map(|v| v.to_f64_lossy()).collect(),
        counts: eval.counts,
        boundary,
        warnings,
    })
}

/// Labels a `res × res` lattice over the bounding box of points and
/// centroids, emitting the midpoint of every lattice edge whose endpoints
/// fall into different quanta.
fn trace_boundaries<T: Scalar>(data: &Points<T>, centroids: &Points<T>, norm: PNorm, res: usize) -> Result<Vec<BoundarySample>> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for r in data.iter_rows().chain(centroids.iter_rows()) {
        for a in 0..2 {
            let v = r[a].to_f64_lossy();
            lo[a] = lo[a].min(v);
            hi[a] = hi[a].max(v);
        }
    }
    let step = [(hi[0] - lo[0]) / (res - 1) as f64, (hi[1] - lo[1]) / (res - 1) as f64];
    let at = |i: usize, j: usize| [lo[0] + i as f64 * step[0], lo[1] + j as f64 * step[1]];
    let mut lattice = Vec::with_capacity(res * res * 2);
    for j in 0..res {
        for i in 0..res {
            let p = at(i, j);
            lattice.push(T::of(p[0]));
            lattice.push(T::of(p[1]));
        }
    }
    let lattice = Points::new(lattice, res * res, 2)?;
    let dist = crate::distance::pairwise_distances(&lattice, centroids, norm)?;
    let labels = crate::selection::assignments(&build_mask(&dist));
    let label = |i: usize, j: usize| labels[j * res + i];
    let mut out = Vec::new();
    let mut push = |a: [f64; 2], b: [f64; 2], qa: usize, qb: usize| {
        out.push(BoundarySample {
            x: 0.5 * (a[0] + b[0]),
            y: 0.5 * (a[1] + b[1]),
            quanta: [qa.min(qb), qa.max(qb)],
        })
    };
    for j in 0..res {
        for i in 0..res {
            if i + 1 < res && label(i, j) != label(i + 1, j) {
                push(at(i, j), at(i + 1, j), label(i, j), label(i + 1, j));
            }
            if j + 1 < res && label(i, j) != label(i, j + 1) {
                push(at(i, j), at(i, j + 1), label(i, j), label(i, j + 1));
            }
        }
    }
    Ok(out)
}
