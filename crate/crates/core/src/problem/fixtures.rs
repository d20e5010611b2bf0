//! Named fixtures addressable by string id (CLI configs, tests).

use serde::Serialize;

use super::field::CoefficientField;
use super::isaacs::IsaacsFamily;
use crate::error::{Error, Result};
use crate::math::linalg::{SymMatrix, Vector};
use crate::math::modulus::ModulusG;

pub const FIXTURE_IDS: &[&str] = &[
    "heat",
    "heat_unit_source",
    "ou",
    "quartic",
    "variable_ellipticity",
    "cordes",
    "isaacs_two_drift",
    "heat_potential",
    "anti_ou",
    "cubic_drift",
    "transport",
];

#[derive(Debug, Clone)]
pub enum Problem {
    Linear(CoefficientField),
    Isaacs(IsaacsFamily),
}

impl Problem {
    pub fn dim(&self) -> usize {
        match self {
            Problem::Linear(f) => f.dim(),
            Problem::Isaacs(f) => f.dim(),
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            Problem::Linear(f) => f.lambda(),
            Problem::Isaacs(f) => f.lambda(),
        }
    }

    /// Every member field: the field itself for linear problems.
    pub fn fields(&self) -> Vec<&CoefficientField> {
        match self {
            Problem::Linear(f) => vec![f],
            Problem::Isaacs(f) => f.members().iter().collect(),
        }
    }

    pub fn is_time_independent(&self) -> bool {
        match self {
            Problem::Linear(f) => f.is_time_independent(),
            Problem::Isaacs(f) => f.is_time_independent(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub id: String,
    pub problem: Problem,
    /// A modulus for which the sigma/drift condition is expected to hold
    /// (or, for the negative fixtures, the one that is expected to fail).
    pub g: ModulusG,
    /// Whether the fixture is expected to satisfy the modulus condition.
    pub expect_pw: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureInfo {
    pub id: String,
    pub dim: usize,
    pub lambda: f64,
    pub g: String,
    pub expect_pw: bool,
}

impl Fixture {
    pub fn info(&self) -> FixtureInfo {
        FixtureInfo {
            id: self.id.clone(),
            dim: self.problem.dim(),
            lambda: self.problem.lambda(),
            g: self.g.name().to_string(),
            expect_pw: self.expect_pw,
        }
    }

    pub fn field(&self) -> Result<&CoefficientField> {
        match &self.problem {
            Problem::Linear(f) => Ok(f),
            Problem::Isaacs(_) => Err(Error::Invalid(format!("fixture `{}` is an Isaacs family", self.id))),
        }
    }
}

fn identity_q(dim: usize) -> impl Fn(f64, &Vector) -> SymMatrix + Send + Sync + 'static {
    move |_, _| SymMatrix::identity(dim)
}

fn heat(dim: usize) -> Result<CoefficientField> {
    CoefficientField::new("heat", dim, 1.0, f64::INFINITY, identity_q(dim))
}

/// `q = I`, `b = −x`.
pub fn ou(dim: usize) -> Result<CoefficientField> {
    Ok(CoefficientField::new("ou", dim, 1.0, f64::INFINITY, identity_q(dim))?.with_drift(|_, x| -*x))
}

/// `(1+|x|⁴)Δ − 4N|x|²x·D`, `λ = 1`, `σ = |x|² I`.
pub fn quartic(dim: usize) -> Result<CoefficientField> {
    let n = dim as f64;
    Ok(
        CoefficientField::new("quartic", dim, 1.0, f64::INFINITY, move |_, x| {
            SymMatrix::scalar(dim, 1.0 + x.dot(x).powi(2))
        })?
        .with_drift(move |_, x| x.scale(-4.0 * n * x.dot(x))),
    )
}

/// `(1+|x|²)Δ` with floor `λ = 1`; the natural pointwise floor is `1+|x|²`.
pub fn variable_ellipticity(dim: usize) -> Result<CoefficientField> {
    CoefficientField::new("variable_ellipticity", dim, 1.0, f64::INFINITY, move |_, x| {
        SymMatrix::scalar(dim, 1.0 + x.dot(x))
    })
}

pub fn variable_ellipticity_floor(_t: f64, x: &Vector) -> f64 {
    1.0 + x.dot(x)
}

/// 1D diffusion jumping between `λ = 1` and `Λ = 2` on unit-period cells;
/// `Λ/λ = 2 < (N+4)/N = 5`.
pub fn cordes() -> Result<CoefficientField> {
    CoefficientField::new("cordes", 1, 1.0, f64::INFINITY, |_, x| {
        let upper = (2.0 * std::f64::consts::PI * x[0]).sin() >= 0.0;
        SymMatrix::diag(&[if upper { 2.0 } else { 1.0 }])
    })
}

fn constant_drift(b: f64) -> Result<CoefficientField> {
    Ok(CoefficientField::new(format!("b={b}"), 1, 1.0, f64::INFINITY, identity_q(1))?
        .with_drift(move |_, _| Vector::from_slice(&[b])))
}

/// `sup_{b=±1} {−u″ − b u′} = −u″ + |u′|`.
pub fn isaacs_two_drift() -> Result<IsaacsFamily> {
    IsaacsFamily::new("isaacs_two_drift", 2, 1, vec![constant_drift(-1.0)?, constant_drift(1.0)?])
}

pub fn fixture(id: &str, dim: usize) -> Result<Fixture> {
    let one_d = |id: &str| -> Result<()> {
        if dim != 1 {
            return Err(Error::Invalid(format!("fixture `{id}` is one-dimensional")));
        }
        Ok(())
    };
    let (problem, g, expect_pw) = match id {
        "heat" => (Problem::Linear(heat(dim)?), ModulusG::zero(), true),
        "heat_unit_source" => (
            Problem::Linear(heat(dim)?.with_source(|_, _| 1.0).with_name("heat_unit_source")),
            ModulusG::zero(),
            true,
        ),
        "ou" => (Problem::Linear(ou(dim)?), ModulusG::zero(), true),
        "quartic" => (Problem::Linear(quartic(dim)?), ModulusG::linear(1.0)?, true),
        // σ = |x|I gives ‖σ(x)−σ(y)‖² = N(|x|−|y|)² ≤ N|x−y|².
        "variable_ellipticity" => (
            Problem::Linear(variable_ellipticity(dim)?),
            ModulusG::linear(dim as f64)?,
            true,
        ),
        // ‖σ(x)−σ(y)‖² ≤ Λ − λ = 1, so g(r) = 1/r: only the Hölder branch applies.
        "cordes" => {
            one_d(id)?;
            (Problem::Linear(cordes()?), ModulusG::power(1.0, -1.0)?, true)
        }
        "isaacs_two_drift" => {
            one_d(id)?;
            (Problem::Isaacs(isaacs_two_drift()?), ModulusG::zero(), true)
        }
        "heat_potential" => {
            one_d(id)?;
            (
                Problem::Linear(heat(1)?.with_potential(|_, x| x[0] * x[0]).with_name("heat_potential")),
                ModulusG::zero(),
                true,
            )
        }
        "anti_ou" => (
            Problem::Linear(
                CoefficientField::new("anti_ou", dim, 1.0, f64::INFINITY, identity_q(dim))?.with_drift(|_, x| *x),
            ),
            ModulusG::zero(),
            false,
        ),
        "cubic_drift" => {
            one_d(id)?;
            (
                Problem::Linear(
                    CoefficientField::new("cubic_drift", 1, 1.0, f64::INFINITY, identity_q(1))?
                        .with_drift(|_, x| Vector::from_slice(&[x[0].powi(3)])),
                ),
                ModulusG::zero(),
                false,
            )
        }
        "transport" => {
            one_d(id)?;
            (
                Problem::Linear(
                    CoefficientField::new("transport", 1, 0.0, f64::INFINITY, |_, _| SymMatrix::zeros(1))?
                        .with_drift(|_, x| -*x),
                ),
                ModulusG::zero(),
                true,
            )
        }
        other => {
            return Err(Error::Invalid(format!(
                "unknown fixture `{other}`; known: {}",
                FIXTURE_IDS.join(", ")
            )))
        }
    };
    Ok(Fixture {
        id: id.to_string(),
        problem,
        g,
        expect_pw,
    })
}
