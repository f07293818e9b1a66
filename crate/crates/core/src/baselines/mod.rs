//! Comparison PU learners: LOG / DH kernel-expansion risk minimizers and
//! threshold adjustment (tADJ).

mod kernel_expansion;
mod loss;
mod tadj;

pub use kernel_expansion::{fit_log_dh, CellResult, LogDhFit, PuObjective, RbfExpansionModel, TrainSchedule, MAX_EXPANSION_SIZE};
pub use loss::{loss_double_hinge, loss_logistic, PuLoss};
pub use tadj::{fit_logistic, fit_tadj, LogisticModel, TadjConfig, TadjModel};
