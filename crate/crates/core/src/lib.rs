//! Numerical laboratory for global Lipschitz and Hölder regularizing
//! estimates of linear and Bellman–Isaacs parabolic equations.
//!
//! The crate is organised by role:
//!
//! * [`math`]: the comparison profile `f`, the sharp constants, PSD square
//!   roots and the block-matrix trace inequalities;
//! * [`problem`]: coefficient fields, Isaacs families, fixtures and the
//!   sampling audits of the structural hypotheses;
//! * [`solver`]: explicit monotone finite differences on truncated boxes;
//! * [`estimator`]: discrete seminorms and bound verification reports;
//! * [`coupling`]: the mirror-coupled pair diffusion and its statistics.

pub mod coupling;
pub mod error;
pub mod estimator;
pub mod math;
pub mod problem;
pub mod solver;

pub use error::{Error, Result};
