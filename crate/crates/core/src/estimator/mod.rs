//! Discrete seminorms of computed solutions checked against the regularity bounds.

pub mod bounds;
pub mod liouville;
pub mod report;
pub mod seminorms;

pub use bounds::{
    largest_stable_alpha, scheme_error_budget, verify_cauchy_bounds, verify_growth_bound, verify_holder_bound,
    verify_local_bound, verify_theorem_pw, AlphaScan, ErrorBudget, GrowthConstants, Profile,
};
pub use liouville::{liouville_diagnose, LiouvilleReport, LongRun};
pub use report::{BoundRow, CheckMode, RegularityReport, Verdict};
pub use seminorms::{seminorms, Seminorms};
