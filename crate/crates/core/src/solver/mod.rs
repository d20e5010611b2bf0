//! Monotone explicit finite differences on truncated boxes, `N ∈ {1, 2}`.

pub mod grid;
pub mod oracle;
pub mod scheme;
pub mod solution;

pub use grid::Grid;
pub use oracle::{exact_oracle, Datum, OracleKind, OracleParams};
pub use scheme::{default_margin, max_stable_dt, solve_isaacs, solve_linear, Boundary, SchemeConfig, Stepper, CFL_LIMIT};
pub use solution::GridSolution;
