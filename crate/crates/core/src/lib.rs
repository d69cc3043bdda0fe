//! Vector quantization with k-Means and bounding-sphere quantization (BSQ).
//!
//! Both quantizers are available in their classic EM form ([`em`]) and as
//! batched gradient descent with cross-batch accumulation ([`trainer`]):
//! distances ([`distance`]) are masked to each point's nearest centroid
//! ([`selection`]), the masked result is accumulated across batches
//! ([`accumulate`]) and the accumulated targets drive centroid updates.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

pub mod accumulate;
pub mod bench;
pub mod data;
pub mod distance;
pub mod em;
pub mod error;
pub mod export;
pub mod meb;
pub mod points;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod selection;
pub mod trainer;

pub use accumulate::{BatchSummary, Variant};
pub use distance::{distance_point_to_centroid, pairwise_distances, PNorm};
pub use error::{Error, Result};
pub use points::Points;
pub use report::{evaluate, Algorithm};
pub use scalar::Scalar;
pub use selection::{assignments, build_mask, mask_distances, Mask};

pub type Dataset = points::Dataset<f64>;
pub type Centroids = points::Centroids<f64>;
pub type DistanceMatrix = distance::DistanceMatrix<f64>;
pub type MaskedDistances = selection::MaskedDistances<f64>;
pub type AccumulatorState = accumulate::AccumulatorState<f64>;
pub type Ball = meb::Ball<f64>;
pub type TrainConfig = trainer::TrainConfig<f64>;
pub type EmConfig = em::EmConfig<f64>;
pub type FitReport = report::FitReport<f64>;
pub type Evaluation = report::Evaluation<f64>;

pub type Dataset32 = points::Dataset<f32>;
pub type Centroids32 = points::Centroids<f32>;
pub type TrainConfig32 = trainer::TrainConfig<f32>;
pub type FitReport32 = report::FitReport<f32>;
