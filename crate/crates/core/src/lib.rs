//! # wmmd-pu
//!
//! Positive-unlabeled (PU) classification with the closed-form weighted
//! maximum mean discrepancy (WMMD) classifier.
//!
//! Given a sample of positives and a sample of unlabeled points, the WMMD
//! score of a query `z` is the ratio of its kernel means against the two
//! samples. The classifier thresholds that score at `1 / (2 pi_plus)`; no
//! optimization is involved, so fitting is just storing the data and picking
//! the kernel width.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`kernel`] | Gaussian / inverse kernels, log-space kernel means |
//! | [`wmmd`] | score, classifier, WMMD value, witness, hinge risk |
//! | [`bounds`] | estimation-error bound calculators |
//! | [`model_select`] | holdout split, gamma grid search, prior estimation |
//! | [`data`] | synthetic generators, LIBSVM I/O, PU resampling |
//! | [`baselines`] | LOG / DH kernel risk minimizers, threshold adjustment |
//! | [`eval`] | accuracy, AUC, Bayes reference, replicated experiments |
//! | [`bench_tables`] | parameter sweeps and dataset protocols |
//!
//! ## Feature flags
//!
//! - `parallel` (default): batch scoring, Gram sums, grid cells and
//!   replications run on rayon. Without it everything runs sequentially with
//!   identical results.

pub mod baselines;
pub mod bench_tables;
pub mod bounds;
pub mod data;
mod error;
pub mod eval;
pub mod kernel;
pub mod model_select;
pub mod par;
pub mod wmmd;

pub use error::{Error, Result};
pub use kernel::{KernelFamily, KernelSpec};
pub use par::Execution;
pub use wmmd::{PuDataset, WmmdModel};
