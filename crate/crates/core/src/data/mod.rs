//! Synthetic datasets and dataset files.

mod binary;
mod csv;

pub use self::binary::{load_binary, read_binary, save_binary, write_binary, BINARY_MAGIC, BINARY_VERSION};
pub use self::csv::{load_csv, read_csv, save_csv, write_csv};

use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_config, Result};
use crate::points::Points;
use crate::rng::{seeded, standard_normal_pair};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Distribution {
    /// Independent normal coordinates.
    Gaussian { mean: f64, std: f64 },
    /// Independent uniform coordinates in `[0, 1)`.
    UniformCube,
    /// Equal-weight mixture of isotropic Gaussians whose centres are drawn
    /// uniformly from `[-spread, spread]^d`, at least `8 · component_std` apart.
    GaussianMixture {
        components: usize,
        component_std: f64,
        spread: f64,
    },
}

impl Distribution {
    pub fn standard_gaussian() -> Self {
        Distribution::Gaussian { mean: 0.0, std: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub distribution: Distribution,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n: usize, d: usize, distribution: Distribution, seed: u64) -> Self {
        Self { n, d, distribution, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(invalid_config("synthetic data needs n >= 1 and d >= 1"));
        }
        match self.distribution {
            Distribution::Gaussian { mean, std } => {
                if !mean.is_finite() || !(std > 0.0 && std.is_finite()) {
                    return Err(invalid_config("gaussian needs finite mean and std > 0"));
                }
            }
            Distribution::UniformCube => {}
            Distribution::GaussianMixture {
                components,
                component_std,
                spread,
            } => {
                if components == 0 {
                    return Err(invalid_config("mixture needs at least one component"));
                }
                if !(component_std > 0.0 && component_std.is_finite()) || !(spread > 0.0 && spread.is_finite()) {
                    return Err(invalid_config("mixture needs component_std > 0 and spread > 0"));
                }
            }
        }
        Ok(())
    }
}

/// Draws an `n × d` dataset; the output depends only on `spec`.
pub fn generate<T: Scalar>(spec: &SyntheticSpec) -> Result<Points<T>> {
    spec.validate()?;
    let mut rng = seeded(spec.seed);
    let len = spec.n * spec.d;
    let values: Vec<f64> = match spec.distribution {
        Distribution::Gaussian { mean, std } => normals(&mut rng, len).into_iter().map(|z| mean + std * z).collect(),
        Distribution::UniformCube => (0..len).map(|_| rng.gen::<f64>()).collect(),
        Distribution::GaussianMixture {
            components,
            component_std,
            spread,
        } => {
            let centres = mixture_centres(&mut rng, components, spec.d, spread, 8.0 * component_std)?;
            let mut out = Vec::with_capacity(len);
            for _ in 0..spec.n {
                let c = rng.gen_range(0..components);
                let noise = normals(&mut rng, spec.d);
                out.extend(centres[c].iter().zip(noise).map(|(m, z)| m + component_std * z));
            }
            out
        }
    };
    Points::new(values.into_iter().map(T::of).collect(), spec.n, spec.d)
}

fn normals(rng: &mut crate::rng::Rng, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len + 1);
    while out.len() < len {
        let (a, b) = standard_normal_pair(rng);
        out.push(a);
        out.push(b);
    }
    out.truncate(len);
    out
}

fn mixture_centres(
    rng: &mut crate::rng::Rng,
    components: usize,
    d: usize,
    spread: f64,
    min_separation: f64,
) -> Result<Vec<Vec<f64>>> {
    const MAX_ATTEMPTS: usize = 10_000;
    let mut centres: Vec<Vec<f64>> = Vec::with_capacity(components);
    let mut attempts = 0;
    while centres.len() < components {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(invalid_config(format!(
                "cannot place {components} mixture centres {min_separation} apart within spread {spread}"
            )));
        }
        let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-spread..spread)).collect();
        let far_enough = centres.iter().all(|o| {
            let d2: f64 = o.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() >= min_separation
        });
        if far_enough {
            centres.push(c);
        }
    }
    Ok(centres)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Csv,
    Bin,
}

impl FileFormat {
    /// `.bin` means binary; anything else is read as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("bin") => FileFormat::Bin,
            _ => FileFormat::Csv,
        }
    }
}

pub fn load<T: Scalar>(path: &Path) -> Result<Points<T>> {
    match FileFormat::from_path(path) {
        FileFormat::Csv => load_csv(path),
        FileFormat::Bin => load_binary(path),
    }
}

pub fn save<T: Scalar>(points: &Points<T>, path: &Path, format: FileFormat) -> Result<()> {
    match format {
        FileFormat::Csv => save_csv(points, path),
        FileFormat::Bin => save_binary(points, path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column_stats(p: &Points<f64>, j: usize) -> (f64, f64) {
        let n = p.len() as f64;
        let mean = p.iter_rows().map(|r| r[j]).sum::<f64>() / n;
        let var = p.iter_rows().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var.sqrt())
    }

    #[test]
    fn gaussian_moments() {
        let spec = SyntheticSpec::new(100_000, 10, Distribution::standard_gaussian(), 2024);
        let p: Points<f64> = generate(&spec).unwrap();
        for j in 0..10 {
            let (m, s) = column_stats(&p, j);
            assert!(m.abs() <= 0.02, "column {j} mean {m}");
            assert!((s - 1.0).abs() <= 0.02, "column {j} std {s}");
        }
    }

    #[test]
    fn same_seed_same_bits() {
        for dist in [
            Distribution::standard_gaussian(),
            Distribution::UniformCube,
            Distribution::GaussianMixture {
                components: 3,
                component_std: 0.5,
                spread: 10.0,
            },
        ] {
            let spec = SyntheticSpec::new(257, 3, dist, 11);
            let a: Points<f64> = generate(&spec).unwrap();
            let b: Points<f64> = generate(&spec).unwrap();
            assert_eq!(a.fingerprint(), b.fingerprint());
            let c: Points<f64> = generate(&SyntheticSpec { seed: 12, ..spec }).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn uniform_cube_range() {
        let p: Points<f64> = generate(&SyntheticSpec::new(5000, 4, Distribution::UniformCube, 5)).unwrap();
        assert!(p.as_slice().iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn mixture_centres_are_separated() {
        let mut rng = seeded(0);
        let cs = mixture_centres(&mut rng, 4, 2, 10.0, 4.0).unwrap();
        for i in 0..4 {
            for j in 0..i {
                let d: f64 = cs[i].iter().zip(&cs[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                assert!(d >= 4.0);
            }
        }
        assert!(mixture_centres(&mut rng, 50, 1, 1.0, 10.0).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(generate::<f64>(&SyntheticSpec::new(0, 2, Distribution::UniformCube, 0)).is_err());
        assert!(generate::<f64>(&SyntheticSpec::new(5, 2, Distribution::Gaussian { mean: 0.0, std: 0.0 }, 0)).is_err());
    }

    #[test]
    fn f32_generation_matches_f64_rounded() {
        let spec = SyntheticSpec::new(10, 2, Distribution::standard_gaussian(), 1);
        let a: Points<f64> = generate(&spec).unwrap();
        let b: Points<f32> = generate(&spec).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert_eq!(*x as f32, *y);
        }
    }
}
