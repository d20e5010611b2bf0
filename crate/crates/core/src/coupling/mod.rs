//! The mirror-coupled pair diffusion: coupling-time statistics, Monte Carlo
//! solution differences and the supersolution residual of the pair generator.

pub mod mirror;
pub mod simulate;
pub mod supersolution;

pub use mirror::{mirror_coupling_matrix, reflect};
pub use simulate::{
    coupling_probability, mc_solution, pair_increment_moments, simulate_pair, simulate_single, CouplingConfig,
    CouplingMode, CouplingRow, CouplingStats, IncrementMoments, McEstimate, PairSample, PathRecord,
};
pub use supersolution::{residual_at, sample_points, supersolution_residual, theorem_constants, SamplePoint, SupersolutionReport};
