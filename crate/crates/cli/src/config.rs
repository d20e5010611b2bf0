//! Experiment configuration. Every struct rejects unknown keys so that a typo
//! fails loudly instead of silently falling back to a default.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use reglab_core::estimator::GrowthConstants;
use reglab_core::math::{ModulusSpec, Vector, MAX_DIM};
use reglab_core::solver::{Datum, OracleParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Named fixture, see `reglab_core::problem::FIXTURE_IDS`.
    pub fixture: String,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the config file unless absolute.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub audit: Option<AuditSection>,
    #[serde(default)]
    pub solve: Option<SolveSection>,
    #[serde(default)]
    pub verify: Option<VerifySection>,
    #[serde(default)]
    pub couple: Option<CoupleSection>,
    #[serde(default)]
    pub liouville: Option<LiouvilleSection>,
    #[serde(default)]
    pub aux: Option<AuxSection>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub half_width: f64,
    #[serde(default = "unit")]
    pub horizon: f64,
    /// Modulus to audit against; the fixture's own modulus by default.
    #[serde(default)]
    pub g: Option<ModulusSpec>,
}

fn default_samples() -> usize {
    2000
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub half_width: f64,
    pub nodes: usize,
    pub horizon: f64,
    pub datum: Datum,
    /// Explicit step; when absent, `dt_fraction` times the largest stable step.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub dt_fraction: Option<f64>,
    #[serde(default)]
    pub margin: Option<f64>,
    /// Number of equally spaced snapshots after `t = 0`.
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    /// Exact solution to compare against at the final time.
    #[serde(default)]
    pub oracle: Option<OracleCheck>,
}

fn default_snapshots() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheck {
    /// `heat-sine`, `heat-kernel` or `ou`.
    pub kind: String,
    #[serde(default)]
    pub params: OracleParams,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Global Lipschitz bound with the sharp constants (absolute).
    Pw,
    /// Hölder variant (absolute).
    Holder,
    /// Gradient bound under a potential (shape).
    Cauchy,
    /// Oscillation growth and Lipschitz conservation (shape).
    Growth,
    /// Local bound on a ball (shape).
    Local,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub bound: BoundKind,
    #[serde(default)]
    pub g: Option<ModulusSpec>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub k0: Option<f64>,
    #[serde(default)]
    pub k1: Option<f64>,
    #[serde(default)]
    pub growth: Option<GrowthConstants>,
    #[serde(default)]
    pub center: Option<Vector>,
    #[serde(default)]
    pub radius: Option<f64>,
    /// Sample size of the hypothesis audits attached to the report.
    #[serde(default = "default_samples")]
    pub audit_samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupleSection {
    pub x: Vector,
    pub y: Vector,
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub mesh: Vec<f64>,
    #[serde(default)]
    pub eps_couple: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub histogram_bins: Option<usize>,
    /// Monte Carlo estimate of `u(t,x) − u(t,y)` for this datum.
    #[serde(default)]
    pub mc: Option<McSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub datum: Datum,
    pub t: f64,
    #[serde(default)]
    pub n_paths: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiouvilleSection {
    pub g: ModulusSpec,
    #[serde(default = "half")]
    pub alpha: f64,
    #[serde(default = "unit")]
    pub r: f64,
    #[serde(default)]
    pub expect: Option<LiouvilleExpectation>,
    #[serde(default)]
    pub long_run: Option<LongRunSection>,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiouvilleExpectation {
    pub bounded: bool,
    pub holder: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LongRunSection {
    pub datum: Datum,
    pub half_width: f64,
    pub nodes: usize,
    pub horizon: f64,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
    /// Required `osc(u(T)) / osc(u₀)`.
    #[serde(default = "default_decay")]
    pub max_decay: f64,
}

fn default_decay() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxSection {
    pub lambda: Vec<f64>,
    pub delta: Vec<f64>,
    pub g: Vec<ModulusSpec>,
    /// Radii per profile written to the CSV.
    #[serde(default = "default_profile_points")]
    pub points: usize,
}

fn default_profile_points() -> usize {
    101
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Module {
    Audit,
    Solve,
    Verify,
    Couple,
    Liouville,
    Aux,
}

impl Module {
    pub const ALL: [Module; 6] = [
        Module::Audit,
        Module::Aux,
        Module::Solve,
        Module::Verify,
        Module::Couple,
        Module::Liouville,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Module::Audit => "audit",
            Module::Solve => "solve",
            Module::Verify => "verify",
            Module::Couple => "couple",
            Module::Liouville => "liouville",
            Module::Aux => "aux",
        }
    }
}

impl ExperimentConfig {
    pub fn has(&self, m: Module) -> bool {
        match m {
            Module::Audit => self.audit.is_some(),
            Module::Solve => self.solve.is_some(),
            Module::Verify => self.verify.is_some(),
            Module::Couple => self.couple.is_some(),
            Module::Liouville => self.liouville.is_some(),
            Module::Aux => self.aux.is_some(),
        }
    }

    /// Structural checks that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            bail!("config error at key `name`: must be a non-empty plain name");
        }
        if !(1..=MAX_DIM).contains(&self.dim) {
            bail!("config error at key `dim`: {} is outside 1..={MAX_DIM}", self.dim);
        }
        if !Module::ALL.iter().any(|&m| self.has(m)) {
            bail!("config error: no module section (audit, solve, verify, couple, liouville, aux)");
        }
        if self.verify.is_some() && self.solve.is_none() {
            bail!("config error at key `verify`: needs a `solve` section to produce the solution");
        }
        if let Some(c) = &self.couple {
            if c.x.dim() != self.dim || c.y.dim() != self.dim {
                bail!("config error at key `couple.x`/`couple.y`: expected {} coordinates", self.dim);
            }
            if c.mesh.is_empty() {
                bail!("config error at key `couple.mesh`: empty");
            }
        }
        if let Some(a) = &self.aux {
            if a.lambda.is_empty() || a.delta.is_empty() || a.g.is_empty() {
                bail!("config error at key `aux`: lambda, delta and g must be non-empty");
            }
        }
        Ok(())
    }
}

/// Parses and validates; errors carry the file, line and column from the
/// JSON parser (unknown keys included).
pub fn load(path: &Path) -> Result<(ExperimentConfig, String)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("config error in {}: {e}", path.display()))?;
    cfg.validate()?;
    Ok((cfg, text))
}
