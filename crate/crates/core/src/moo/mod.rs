//! Set-oriented multi-objective minimization.
//!
//! A covering of the Pareto set is refined by alternating dyadic box
//! subdivision with sampling-based nondominance tests against a global
//! archive; see [`sampling::sampling_algorithm`] for the loop and
//! [`archive::ParetoArchive`] for the dominance bookkeeping.

pub mod archive;
pub mod boxes;
pub mod lowdisc;
pub mod sampling;

pub use archive::{dominates, ArchiveEntry, ParetoArchive};
pub use boxes::{BoxTree, DecisionBox};
pub use lowdisc::HaltonSampler;
pub use sampling::{
    sampling_algorithm, sampling_step, IterationRecord, SamplingConfig, SamplingOutcome,
};
