//! Datasets: synthetic generators, LIBSVM ingestion, and PU resampling.

mod labeled;
pub mod libsvm;
mod pu;
mod rng;
pub mod synthetic;

pub use labeled::LabeledDataset;
pub use pu::{make_pu, Composition, PuSample};
pub use rng::RngStream;
