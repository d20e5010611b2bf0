//! Coefficient fields, Isaacs families, named fixtures and the sampling
//! audits of the structural hypotheses.

pub mod audit;
pub mod field;
pub mod fixtures;
pub mod isaacs;

pub use audit::{
    check_g_asymptotics, check_lyapunov, check_lyapunov_quadratic, check_potential, check_prec, check_pw, AuditReport,
    GAsymptotics, PrecForm, SampleRange,
};
pub use field::{CoefficientField, LyapunovCandidate};
pub use fixtures::{fixture, Fixture, Problem, FIXTURE_IDS};
pub use isaacs::{isaacs_value, IsaacsFamily};
