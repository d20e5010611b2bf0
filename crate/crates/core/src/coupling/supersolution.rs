//! Residual of the comparison function `ψ = K f(|x−y|) + C₀(t−t₀)²` under the
//! coupling operator
//! `𝒜_c ψ = tr(q(x)D²ₓψ) + tr(q(y)D²ᵧψ) + 2tr(c D²ₓᵧψ) + b(x)·Dₓψ + b(y)·Dᵧψ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::mirror::mirror_coupling_matrix;
use crate::error::{Error, Result};
use crate::math::aux::AuxFunction;
use crate::math::linalg::{SquareMatrix, Vector};
use crate::math::modulus::ModulusG;
use crate::problem::CoefficientField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplePoint {
    pub t: f64,
    pub x: Vector,
    pub y: Vector,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupersolutionReport {
    pub k: f64,
    pub c0: f64,
    pub t0: f64,
    pub delta: f64,
    pub n: usize,
    pub min_residual: f64,
    pub argmin: Option<SamplePoint>,
}

/// `(K, C₀)` from the oscillations of `u` and `h` on the window around `t₀`:
/// `C₀ = 4ω/t₀²`, `K = 4ω/t₀ + ω_h + ω/f(δ)`.
pub fn theorem_constants(osc_u: f64, osc_h: f64, t0: f64, f_delta: f64) -> (f64, f64) {
    let c0 = 4.0 * osc_u / (t0 * t0);
    let k = 4.0 * osc_u / t0 + osc_h + osc_u / f_delta;
    (k, c0)
}

/// Uniform samples with `t ∈ (t₀/2, 3t₀/2)`, `x ∈ [−half_width, half_width]^N`
/// and `y = x − r ê` for `r ∈ (0, δ)` and `ê` uniform on the sphere.
pub fn sample_points(dim: usize, t0: f64, delta: f64, half_width: f64, n: usize, seed: u64) -> Vec<SamplePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let t = t0 * rng.random_range(0.5..1.5);
        let r = delta * rng.random::<f64>();
        if t <= t0 / 2.0 || r == 0.0 {
            continue;
        }
        let mut x = Vector::zeros(dim);
        let mut e = Vector::zeros(dim);
        for i in 0..dim {
            x[i] = rng.random_range(-half_width..=half_width);
            e[i] = rng.sample(StandardNormal);
        }
        let ne = e.norm();
        if ne == 0.0 {
            continue;
        }
        let y = x - e.scale(r / ne);
        if y != x {
            out.push(SamplePoint { t, x, y });
        }
    }
    out
}

/// `∂ₜψ − 𝒜_c ψ` at one point, with `σ = √(q − λI)` on both sides.
pub fn residual_at(field: &CoefficientField, lambda: f64, aux: &AuxFunction, k: f64, c0: f64, t0: f64, p: &SamplePoint) -> Result<f64> {
    let d = p.x - p.y;
    let r = d.norm();
    if r == 0.0 {
        return Err(Error::SamplePointOnDiagonal);
    }
    let dim = d.dim();
    let e = d.scale(1.0 / r);
    let fv = aux.eval(r)?;
    // Hessian of f(|z|) in z
    let ee = e.outer(&e);
    let hess = ee.scale(fv.f_second) + (SquareMatrix::identity(dim) - ee).scale(fv.f_prime / r);
    let sx = field.sigma_with_floor(p.t, &p.x, lambda)?;
    let sy = field.sigma_with_floor(p.t, &p.y, lambda)?;
    let c = mirror_coupling_matrix(&sx, &sy, lambda, &p.x, &p.y)?;
    let qx = field.q(p.t, &p.x);
    let qy = field.q(p.t, &p.y);
    // D²ₓᵧψ = −K·hess, so the cross term enters with a minus sign
    let second = qx.contract(&hess) + qy.contract(&hess) - 2.0 * c.contract(&hess);
    let first = fv.f_prime * (field.b(p.t, &p.x) - field.b(p.t, &p.y)).dot(&e);
    Ok(2.0 * c0 * (p.t - t0) - k * (second + first))
}

/// Minimum of `∂ₜψ − 𝒜_c ψ` over the samples. Every sample must satisfy
/// `t ∈ (t₀/2, 3t₀/2)` and `0 < |x−y| < δ`.
#[allow(clippy::too_many_arguments)]
pub fn supersolution_residual(
    field: &CoefficientField,
    lambda: f64,
    g: &ModulusG,
    k: f64,
    c0: f64,
    t0: f64,
    delta: f64,
    samples: &[SamplePoint],
) -> Result<SupersolutionReport> {
    let aux = AuxFunction::new(g, lambda, delta)?;
    let mut report = SupersolutionReport {
        k,
        c0,
        t0,
        delta,
        n: samples.len(),
        min_residual: f64::INFINITY,
        argmin: None,
    };
    for p in samples {
        if p.x.dim() != field.dim() || p.y.dim() != field.dim() {
            return Err(Error::Dimension {
                expected: field.dim(),
                got: p.x.dim().max(p.y.dim()),
            });
        }
        if !(p.t > t0 / 2.0 && p.t < 1.5 * t0) {
            return Err(Error::Domain {
                name: "sample t",
                value: p.t,
                expected: format!("({}, {})", t0 / 2.0, 1.5 * t0),
            });
        }
        let r = (p.x - p.y).norm();
        if r >= delta {
            return Err(Error::Domain {
                name: "|x−y|",
                value: r,
                expected: format!("(0, {delta})"),
            });
        }
        let res = residual_at(field, lambda, &aux, k, c0, t0, p)?;
        if res < report.min_residual {
            report.min_residual = res;
            report.argmin = Some(*p);
        }
    }
    Ok(report)
}
