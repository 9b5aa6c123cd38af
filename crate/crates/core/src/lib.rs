//! L1-norm analysis of check-all-that-apply (CATA) data.
//!
//! Every citation counts once: dispersion is measured with medians and
//! absolute deviations, significance with permutation tests that shuffle
//! product labels within each assessor, and low-rank structure with
//! L1-norm principal components.

pub mod classical;
pub mod cluster;
pub mod data;
pub mod error;
pub mod fdr;
pub mod l1pca;
pub mod perm;
pub mod report;
pub mod stats;

pub use data::{CataArray, CataTable};
pub use error::{Error, ErrorKind, Result};
pub use fdr::{bh_stepup, BhRule, FdrResult};
pub use perm::{run_tests, simulate, FdrOptions, PermutationPlan, TestId, TestReport};
