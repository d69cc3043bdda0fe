//! Timing harness over a `(k, n, d)` grid of fitters on seeded Gaussian data.
//!
//! Cells run one after another. Each cell performs one discarded warm-up
//! fit and then `repeats` timed fits; only the fit call is inside the
//! monotonic clock. Cells with `k > n` are skipped and flagged.

use std::collections::btree_map::{BTreeMap, Entry};
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::accumulate::Variant;
use crate::data::{generate, Distribution, SyntheticSpec};
use crate::em::{bsq_em_fit, lloyd_fit, EmConfig};
use crate::error::{invalid_config, Error, Result};
use crate::points::Points;
use crate::report::{Algorithm, FitReport};
use crate::trainer::{fit, InitMethod, Initialization, TrainConfig};

/// Rendered in place of numbers for skipped cells.
pub const SKIPPED_MARK: &str = "−";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchGrid {
    pub k_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub d_values: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub epochs: usize,
    pub batch_size: usize,
    pub repeats: usize,
    pub seed: u64,
    pub lr_initial: f64,
    pub lr_final: f64,
}

impl Default for BenchGrid {
    /// The desk-scale grid.
    fn default() -> Self {
        Self {
            k_values: vec![32, 512],
            n_values: vec![1_000, 10_000],
            d_values: vec![10, 100],
            algorithms: Algorithm::ALL.to_vec(),
            epochs: 100,
            batch_size: 512,
            repeats: 3,
            seed: 0,
            lr_initial: 0.1,
            lr_final: 0.001,
        }
    }
}

impl BenchGrid {
    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() || self.n_values.is_empty() || self.d_values.is_empty() || self.algorithms.is_empty() {
            return Err(invalid_config("benchmark grid lists must be non-empty"));
        }
        if self.repeats == 0 || self.epochs == 0 || self.batch_size == 0 {
            return Err(invalid_config("repeats, epochs and batch_size must be >= 1"));
        }
        if self.n_values.contains(&0) || self.d_values.contains(&0) || self.k_values.contains(&0) {
            return Err(invalid_config("grid values must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub algorithm: Algorithm,
    pub k: usize,
    pub n: usize,
    pub d: usize,
    /// Why the cell did not run, if it did not.
    pub skipped: Option<String>,
    /// Wall seconds of each timed repeat, in run order.
    pub seconds: Vec<f64>,
    pub final_loss: Option<f64>,
    pub final_max_distance: Option<f64>,
    /// Centroid fingerprints of the warm-up run followed by every repeat.
    pub fingerprints: Vec<String>,
}

impl CellResult {
    pub fn median(&self) -> Option<f64> {
        median(&self.seconds)
    }

    pub fn min(&self) -> Option<f64> {
        self.seconds.iter().copied().reduce(f64::min)
    }

    pub fn max(&self) -> Option<f64> {
        self.seconds.iter().copied().reduce(f64::max)
    }

    /// All runs of the cell ended on bitwise-identical centroids.
    pub fn deterministic(&self) -> bool {
        self.fingerprints.windows(2).all(|w| w[0] == w[1])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub cells: Vec<CellResult>,
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

pub fn run_grid(grid: &BenchGrid) -> Result<BenchResult> {
    run_grid_with_progress(grid, |_| {})
}

/// Runs the grid, calling `progress` after each finished cell.
pub fn run_grid_with_progress<F: FnMut(&CellResult)>(grid: &BenchGrid, mut progress: F) -> Result<BenchResult> {
    grid.validate()?;
    let mut ks = grid.k_values.clone();
    let mut ns = grid.n_values.clone();
    let mut ds = grid.d_values.clone();
    for v in [&mut ks, &mut ns, &mut ds] {
        v.sort_unstable();
        v.dedup();
    }
    let mut algorithms = grid.algorithms.clone();
    algorithms.sort();
    algorithms.dedup();

    let mut datasets: BTreeMap<(usize, usize), Points<f64>> = BTreeMap::new();
    let mut cells = Vec::new();
    for &k in &ks {
        for &n in &ns {
            for &d in &ds {
                for &algorithm in &algorithms {
                    let cell = if k > n {
                        CellResult {
                            algorithm,
                            k,
                            n,
                            d,
                            skipped: Some(format!("k = {k} exceeds n = {n}")),
                            seconds: Vec::new(),
                            final_loss: None,
                            final_max_distance: None,
                            fingerprints: Vec::new(),
                        }
                    } else {
                        let data = match datasets.entry((n, d)) {
                            Entry::Occupied(e) => e.into_mut(),
                            Entry::Vacant(e) => {
                                let spec = SyntheticSpec::new(n, d, Distribution::standard_gaussian(), data_seed(grid.seed, n, d));
                                e.insert(generate(&spec)?)
                            }
                        };
                        run_cell(grid, algorithm, k, data)?
                    };
                    progress(&cell);
                    cells.push(cell);
                }
            }
        }
    }
    Ok(BenchResult { cells })
}

fn data_seed(seed: u64, n: usize, d: usize) -> u64 {
    seed ^ ((n as u64) << 20) ^ (d as u64)
}

fn fit_once(grid: &BenchGrid, algorithm: Algorithm, k: usize, data: &Points<f64>) -> Result<FitReport<f64>> {
    let init = Initialization::Method(InitMethod::RandomPoints);
    match algorithm {
        Algorithm::SgdKMeans | Algorithm::SgdBsq => {
            let variant = if algorithm == Algorithm::SgdKMeans { Variant::KMeans } else { Variant::Bsq };
            let mut cfg = TrainConfig::new(k, variant);
            cfg.epochs = grid.epochs;
            cfg.batch_size = grid.batch_size;
            cfg.seed = grid.seed;
            cfg.lr_initial = grid.lr_initial;
            cfg.lr_final = grid.lr_final;
            cfg.init = init;
            fit(data, &cfg)
        }
        Algorithm::Lloyd | Algorithm::BsqEm => {
            let mut cfg = EmConfig::new(k);
            cfg.max_iterations = grid.epochs;
            cfg.seed = grid.seed;
            cfg.init = init;
            if algorithm == Algorithm::Lloyd {
                lloyd_fit(data, &cfg)
            } else {
                bsq_em_fit(data, &cfg)
            }
        }
    }
}

fn run_cell(grid: &BenchGrid, algorithm: Algorithm, k: usize, data: &Points<f64>) -> Result<CellResult> {
    let warm = fit_once(grid, algorithm, k, data)?;
    let mut fingerprints = vec![warm.centroids.fingerprint()];
    let mut seconds = Vec::with_capacity(grid.repeats);
    let mut last = warm;
    for _ in 0..grid.repeats {
        let t = Instant::now();
        let report = fit_once(grid, algorithm, k, data)?;
        // Clamped away from zero so that sub-resolution timings stay positive.
        seconds.push(t.elapsed().as_secs_f64().max(1e-9));
        fingerprints.push(report.centroids.fingerprint());
        last = report;
    }
    Ok(CellResult {
        algorithm,
        k,
        n: data.len(),
        d: data.dim(),
        skipped: None,
        seconds,
        final_loss: Some(last.mean_distance),
        final_max_distance: Some(last.max_distance),
        fingerprints,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Markdown,
    Csv,
}

fn cell_key(c: &CellResult) -> (usize, usize, usize, Algorithm) {
    (c.k, c.n, c.d, c.algorithm)
}

/// Renders median wall seconds (2 decimals). Markdown has one row per
/// `(k, n, d)` and one column per algorithm; CSV has one row per cell with
/// min/median/max. Rows ascend in `(k, n, d)`.
pub fn render_table(result: &BenchResult, format: TableFormat) -> String {
    let mut cells: Vec<&CellResult> = result.cells.iter().collect();
    cells.sort_by_key(|c| cell_key(c));
    let secs = |v: Option<f64>| v.map_or_else(|| SKIPPED_MARK.to_string(), |s| format!("{s:.2}"));
    let num = |v: Option<f64>| v.map_or_else(|| SKIPPED_MARK.to_string(), |s| s.to_string());
    let mut out = String::new();
    match format {
        TableFormat::Markdown => {
            let mut algorithms: Vec<Algorithm> = cells.iter().map(|c| c.algorithm).collect();
            algorithms.sort();
            algorithms.dedup();
            let mut rows: BTreeMap<(usize, usize, usize), BTreeMap<Algorithm, &CellResult>> = BTreeMap::new();
            for c in &cells {
                rows.entry((c.k, c.n, c.d)).or_default().insert(c.algorithm, c);
            }
            out.push_str("| k | n | d |");
            for a in &algorithms {
                let _ = write!(out, " {a} |");
            }
            out.push_str("\n|---|---|---|");
            for _ in &algorithms {
                out.push_str("---:|");
            }
            out.push('\n');
            for ((k, n, d), by_algo) in rows {
                let _ = write!(out, "| {k} | {n} | {d} |");
                for a in &algorithms {
                    let v = by_algo.get(a).and_then(|c| c.median());
                    let _ = write!(out, " {} |", secs(v));
                }
                out.push('\n');
            }
        }
        TableFormat::Csv => {
            out.push_str("algorithm,k,n,d,median_s,min_s,max_s,final_loss,final_max_distance\n");
            for c in cells {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    c.algorithm,
                    c.k,
                    c.n,
                    c.d,
                    secs(c.median()),
                    secs(c.min()),
                    secs(c.max()),
                    num(c.final_loss),
                    num(c.final_max_distance)
                );
            }
        }
    }
    out
}

/// One summary row of a CSV table produced by [`render_table`].
#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub algorithm: Algorithm,
    pub k: usize,
    pub n: usize,
    pub d: usize,
    pub median_s: Option<f64>,
    pub min_s: Option<f64>,
    pub max_s: Option<f64>,
    pub final_loss: Option<f64>,
    pub final_max_distance: Option<f64>,
}

fn parse_field<V: std::str::FromStr>(s: &str, row: usize, col: usize) -> Result<V> {
    s.trim().parse().map_err(|_| Error::Parse {
        row,
        col,
        message: format!("cannot parse {s:?}"),
    })
}

fn parse_optional(s: &str, row: usize, col: usize) -> Result<Option<f64>> {
    if s.trim() == SKIPPED_MARK {
        Ok(None)
    } else {
        parse_field(s, row, col).map(Some)
    }
}

pub fn parse_table_csv(text: &str) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Parse {
                row: i + 1,
                col: f.len(),
                message: "expected 9 fields".into(),
            });
        }
        let r = i + 1;
        rows.push(TableRow {
            algorithm: f[0].parse().map_err(|m| Error::Parse { row: r, col: 1, message: m })?,
            k: parse_field(f[1], r, 2)?,
            n: parse_field(f[2], r, 3)?,
            d: parse_field(f[3], r, 4)?,
            median_s: parse_optional(f[4], r, 5)?,
            min_s: parse_optional(f[5], r, 6)?,
            max_s: parse_optional(f[6], r, 7)?,
            final_loss: parse_optional(f[7], r, 8)?,
            final_max_distance: parse_optional(f[8], r, 9)?,
        });
    }
    Ok(rows)
}

/// Full-precision record of every timed run, one row per `(cell, repeat)`.
/// Skipped cells appear once with repeat `−`.
pub fn render_repeats_csv(result: &BenchResult) -> String {
    let mut out = String::from("algorithm,k,n,d,repeat,seconds,final_loss,final_max_distance,centroid_sha256\n");
    for c in &result.cells {
        if c.skipped.is_some() {
            let m = SKIPPED_MARK;
            let _ = writeln!(out, "{},{},{},{},{m},{m},{m},{m},{m}", c.algorithm, c.k, c.n, c.d);
            continue;
        }
        for (r, s) in c.seconds.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.algorithm,
                c.k,
                c.n,
                c.d,
                r,
                s,
                c.final_loss.unwrap_or(f64::NAN),
                c.final_max_distance.unwrap_or(f64::NAN),
                c.fingerprints.get(r + 1).map_or("", String::as_str)
            );
        }
    }
    out
}

/// One row of [`render_repeats_csv`] output; `repeat` is `None` for a skipped cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RepeatRow {
    pub algorithm: Algorithm,
    pub k: usize,
    pub n: usize,
    pub d: usize,
    pub repeat: Option<usize>,
    pub seconds: Option<f64>,
    pub final_loss: Option<f64>,
    pub final_max_distance: Option<f64>,
    pub centroid_sha256: Option<String>,
}

pub fn parse_repeats_csv(text: &str) -> Result<Vec<RepeatRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let r = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Parse {
                row: r,
                col: f.len(),
                message: "expected 9 fields".into(),
            });
        }
        let skipped = f[4].trim() == SKIPPED_MARK;
        rows.push(RepeatRow {
            algorithm: f[0].parse().map_err(|m| Error::Parse { row: r, col: 1, message: m })?,
            k: parse_field(f[1], r, 2)?,
            n: parse_field(f[2], r, 3)?,
            d: parse_field(f[3], r, 4)?,
            repeat: if skipped { None } else { Some(parse_field(f[4], r, 5)?) },
            seconds: parse_optional(f[5], r, 6)?,
            final_loss: parse_optional(f[6], r, 7)?,
            final_max_distance: parse_optional(f[7], r, 8)?,
            centroid_sha256: (!skipped).then(|| f[8].to_string()),
        });
    }
    Ok(rows)
}

/// Pairs of SGD cells that differ in exactly one of `n`, `k`, `d` where the
/// larger setting has a median runtime below `(1 − noise)` times the smaller.
pub fn scaling_violations(result: &BenchResult, noise: f64) -> Vec<String> {
    let sgd: Vec<&CellResult> = result
        .cells
        .iter()
        .filter(|c| c.algorithm.is_sgd() && c.skipped.is_none())
        .collect();
    let mut out = Vec::new();
    for a in &sgd {
        for b in &sgd {
            if a.algorithm != b.algorithm {
                continue;
            }
            let differs = [(a.k, b.k), (a.n, b.n), (a.d, b.d)];
            let changed: Vec<usize> = (0..3).filter(|&i| differs[i].0 != differs[i].1).collect();
            if changed.len() != 1 || differs[changed[0]].0 >= differs[changed[0]].1 {
                continue;
            }
            let (small, large) = (a.median().unwrap_or(0.0), b.median().unwrap_or(0.0));
            if large < small * (1.0 - noise) {
                out.push(format!(
                    "{}: (k={}, n={}, d={}) {:.4}s > (k={}, n={}, d={}) {:.4}s",
                    a.algorithm, a.k, a.n, a.d, small, b.k, b.n, b.d, large
                ));
            }
        }
    }
    out
}
