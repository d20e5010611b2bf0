//! Initial data and exact reference solutions.

use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::linalg::Vector;
use crate::math::quadrature::{integrate, Tolerance};

/// Initial data shared by fixtures and configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Datum {
    Constant { c: f64 },
    /// `Π_i sin(k x_i)`.
    Sine { k: f64 },
    /// `a x₁`.
    Linear { a: f64 },
    /// `1[x₁ > 0]`.
    Indicator,
    /// `tanh(x₁)`.
    Tanh,
    /// `√(|x|² + ε²)`, a smoothed `|x|`.
    SmoothAbs { eps: f64 },
    /// `−√(|x|² + ε²)`.
    NegSmoothAbs { eps: f64 },
    /// `(|x|² + ε²)^{1/4}`, a smoothed `|x|^{1/2}`.
    SmoothRootAbs { eps: f64 },
}

impl Datum {
    pub fn eval(&self, x: &Vector) -> f64 {
        match *self {
            Datum::Constant { c } => c,
            Datum::Sine { k } => x.iter().map(|xi| (k * xi).sin()).product(),
            Datum::Linear { a } => a * x[0],
            Datum::Indicator => {
                if x[0] > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Datum::Tanh => x[0].tanh(),
            Datum::SmoothAbs { eps } => (x.dot(x) + eps * eps).sqrt(),
            Datum::NegSmoothAbs { eps } => -(x.dot(x) + eps * eps).sqrt(),
            Datum::SmoothRootAbs { eps } => (x.dot(x) + eps * eps).powf(0.25),
        }
    }

    pub fn eval_1d(&self, x: f64) -> f64 {
        self.eval(&Vector::from_slice(&[x]))
    }

    /// Points where the datum is not smooth (1D).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Datum::Indicator => vec![0.0],
            _ => vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    HeatSine,
    HeatKernel,
    Ou,
}

impl FromStr for OracleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat-sine" => Ok(Self::HeatSine),
            "heat-kernel" => Ok(Self::HeatKernel),
            "ou" => Ok(Self::Ou),
            other => Err(Error::UnsupportedKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleParams {
    /// Diffusion coefficient `q` (heat kinds).
    pub q: f64,
    /// Wave number (heat-sine).
    pub k: f64,
    /// Initial datum (heat-kernel, ou).
    pub datum: Datum,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            q: 1.0,
            k: 1.0,
            datum: Datum::Sine { k: 1.0 },
        }
    }
}

/// Exact solutions:
/// * `heat-sine`: `e^{−N q t k²} Π sin(k x_i)` for `∂_t u = qΔu`;
/// * `heat-kernel`: `u₀ ∗ N(0, 2qt)` by adaptive quadrature (1D);
/// * `ou`: `E u₀(e^{−t}x + √(1−e^{−2t}) ξ)` by Gauss–Hermite (1D, `q = 1`, `b = −x`).
pub fn exact_oracle(kind: &str, params: &OracleParams, t: f64, x: &Vector) -> Result<f64> {
    match kind.parse::<OracleKind>()? {
        OracleKind::HeatSine => Ok(heat_sine(params.q, params.k, t, x)),
        OracleKind::HeatKernel => heat_kernel(&params.datum, params.q, t, x),
        OracleKind::Ou => ou(&params.datum, t, x),
    }
}

pub fn heat_sine(q: f64, k: f64, t: f64, x: &Vector) -> f64 {
    let n = x.dim() as f64;
    (-n * q * t * k * k).exp() * x.iter().map(|xi| (k * xi).sin()).product::<f64>()
}

fn one_d(x: &Vector) -> Result<f64> {
    if x.dim() != 1 {
        return Err(Error::Dimension { expected: 1, got: x.dim() });
    }
    Ok(x[0])
}

/// Standard normal density mass beyond ±12 is below 1e-32.
const GAUSS_CUTOFF: f64 = 12.0;

pub fn heat_kernel(datum: &Datum, q: f64, t: f64, x: &Vector) -> Result<f64> {
    let x0 = one_d(x)?;
    if t == 0.0 {
        return Ok(datum.eval_1d(x0));
    }
    let s = (2.0 * q * t).sqrt();
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut cuts = vec![-GAUSS_CUTOFF];
    for bp in datum.breakpoints() {
        let z = (bp - x0) / s;
        if z.abs() < GAUSS_CUTOFF {
            cuts.push(z);
        }
    }
    cuts.push(GAUSS_CUTOFF);
    cuts.sort_by(f64::total_cmp);
    let tol = Tolerance { abs: 1e-14, rel: 1e-12 };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate(|z| datum.eval_1d(x0 + s * z) * (-0.5 * z * z).exp() * norm, w[0], w[1], tol)?.value;
    }
    Ok(total)
}

const HERMITE_NODES: usize = 80;

/// Nodes and weights of the Gauss rule for the standard normal law
/// (Golub–Welsch on the probabilists' Hermite recurrence).
pub fn gauss_hermite() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = HERMITE_NODES;
        let jacobi = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64).sqrt() } else { 0.0 });
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.into_iter().unzip()
    })
}

pub fn ou(datum: &Datum, t: f64, x: &Vector) -> Result<f64> {
    let x0 = one_d(x)?;
    let mean = (-t).exp() * x0;
    let sd = (1.0 - (-2.0 * t).exp()).sqrt();
    let (nodes, weights) = gauss_hermite();
    Ok(nodes.iter().zip(weights).map(|(z, w)| w * datum.eval_1d(mean + sd * z)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: f64) -> Vector {
        Vector::from_slice(&[x])
    }

    #[test]
    fn heat_sine_value() {
        let p = OracleParams::default();
        let u = exact_oracle("heat-sine", &p, 1.0, &v(std::f64::consts::FRAC_PI_2)).unwrap();
        assert_relative_eq!(u, (-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn ou_linear_datum() {
        let p = OracleParams {
            datum: Datum::Linear { a: 1.0 },
            ..Default::default()
        };
        let u = exact_oracle("ou", &p, 2f64.ln(), &v(2.0)).unwrap();
        assert_relative_eq!(u, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn heat_kernel_indicator_symmetry() {
        let p = OracleParams {
            datum: Datum::Indicator,
            ..Default::default()
        };
        let u = exact_oracle("heat-kernel", &p, 1.0, &v(0.0)).unwrap();
        assert_relative_eq!(u, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn hermite_rule_moments() {
        let (x, w) = gauss_hermite();
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(4)).sum();
        assert_relative_eq!(m0, 1.0, max_relative = 1e-12);
        assert_relative_eq!(m2, 1.0, max_relative = 1e-12);
        assert_relative_eq!(m4, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn unknown_kind() {
        let r = exact_oracle("wave", &OracleParams::default(), 0.0, &v(0.0));
        assert_eq!(r, Err(Error::UnsupportedKind("wave".into())));
    }
}
