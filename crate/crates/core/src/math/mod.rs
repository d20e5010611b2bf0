//! Quadrature, small linear algebra, the modulus `g`, the auxiliary profile
//! `f` and the matrix trace inequalities.

pub mod aux;
pub mod inequalities;
pub mod linalg;
pub mod modulus;
pub mod quadrature;

pub use aux::{aux_bounds_check, aux_function, ode_residual, sharp_constants, AuxBoundsReport, AuxFunction, AuxValue};
pub use inequalities::{block_trace_inequalities, sample_feasible_instance, FeasibleInstance, TraceResiduals};
pub use linalg::{psd_sqrt, SquareMatrix, SymMatrix, Vector, MAX_DIM};
pub use modulus::{ModulusFlags, ModulusG, ModulusSpec};
