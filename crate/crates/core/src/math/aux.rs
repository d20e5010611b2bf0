//! The auxiliary profile `f` solving `4λ f″ + g f′ = −1`, `f(0) = 0`,
//! `f′(δ) = 0`, written in closed form as
//!
//! ```text
//! f(r) = (1/4λ) ∫₀^r e^{−G(ξ)/4λ} ∫_ξ^δ e^{G(τ)/4λ} dτ dξ,   G(ξ) = ∫₀^ξ g.
//! ```
//!
//! The nested integrals are tabulated once at geometrically graded knots
//! `δ 2^{-k}` (plus the breakpoints of `g`); queries only integrate inside a
//! single knot interval. Exponents are always taken as differences
//! `G(τ) − G(ξ)` so that large `∫ g / 4λ` does not overflow prematurely.

use serde::Serialize;

use super::modulus::ModulusG;
use super::quadrature::{integrate, try_integrate, Tolerance};
use crate::error::{Error, Result};

const GRADING_LEVELS: i32 = 50;

fn tight() -> Tolerance {
    Tolerance { abs: 1e-300, rel: 1e-12 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuxValue {
    pub f: f64,
    pub f_prime: f64,
    pub f_second: f64,
}

#[derive(Debug, Clone)]
pub struct AuxFunction {
    lambda: f64,
    delta: f64,
    g: ModulusG,
    knots: Vec<f64>,
    /// `G` at the knots.
    big_g: Vec<f64>,
    /// `∫_{ξ_k}^δ e^{(G(τ)−G(ξ_k))/4λ} dτ = 4λ f′(ξ_k)`.
    j: Vec<f64>,
    /// `f` at the knots.
    f: Vec<f64>,
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "(0, ∞)".into(),
        })
    }
}

impl AuxFunction {
    /// Builds the profile for any `δ > 0`. The regularity estimates use
    /// `δ ≤ 1`; larger `δ` serve the Liouville diagnostics.
    pub fn new(g: &ModulusG, lambda: f64, delta: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        positive("delta", delta)?;
        if !g.flags().integrable_01 {
            return Err(Error::NonIntegrableModulus(g.name().to_string()));
        }
        let mut knots: Vec<f64> = (0..=GRADING_LEVELS).map(|k| delta * 2f64.powi(-k)).collect();
        knots.extend(g.breakpoints().iter().copied().filter(|&b| b < delta));
        knots.push(0.0);
        knots.sort_by(f64::total_cmp);
        knots.dedup();

        let mut aux = Self {
            lambda,
            delta,
            g: g.clone(),
            big_g: Vec::with_capacity(knots.len()),
            j: vec![0.0; knots.len()],
            f: vec![0.0; knots.len()],
            knots,
        };
        let m = aux.knots.len() - 1;

        aux.big_g.push(0.0);
        aux.big_g.push(g.antiderivative(aux.knots[1])?);
        for k in 1..m {
            let next = aux.big_g[k] + g.integral(aux.knots[k], aux.knots[k + 1])?;
            aux.big_g.push(next);
        }

        let four_lambda = 4.0 * lambda;
        for k in (0..m).rev() {
            let inner = aux.local_exp_integral(k, aux.knots[k], 0.0)?;
            let carry = ((aux.big_g[k + 1] - aux.big_g[k]) / four_lambda).exp() * aux.j[k + 1];
            aux.j[k] = inner + carry;
            if !aux.j[k].is_finite() {
                return Err(Error::Invalid(format!(
                    "auxiliary function overflows for g = {}, λ = {lambda}, δ = {delta}",
                    g.name()
                )));
            }
        }

        for k in 0..m {
            let (lo, hi) = (aux.knots[k], aux.knots[k + 1]);
            let piece = try_integrate(|xi| aux.f_prime_in(k, xi), lo, hi, tight())?;
            aux.f[k + 1] = aux.f[k] + piece.value;
        }
        Ok(aux)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn modulus(&self) -> &ModulusG {
        &self.g
    }

    /// Tabulation knots, ascending, from `0` to `δ`.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// `G(ξ) − G(ξ_k)` for `ξ` in knot interval `k`.
    fn local_g(&self, k: usize, xi: f64) -> Result<f64> {
        if k == 0 {
            self.g.antiderivative(xi)
        } else if self.g.has_exact_antiderivative() {
            self.g.integral(self.knots[k], xi)
        } else {
            integrate(|s| self.g.eval(s), self.knots[k], xi, tight()).map(|e| e.value)
        }
    }

    /// `∫_ξ^{ξ_{k+1}} e^{(G(τ) − G(ξ))/4λ} dτ` given `G(ξ) − G(ξ_k) = g_xi`.
    fn local_exp_integral(&self, k: usize, xi: f64, g_xi: f64) -> Result<f64> {
        let four_lambda = 4.0 * self.lambda;
        let est = try_integrate(
            |tau| Ok(((self.local_g(k, tau)? - g_xi) / four_lambda).exp()),
            xi,
            self.knots[k + 1],
            tight(),
        )?;
        Ok(est.value)
    }

    fn f_prime_in(&self, k: usize, xi: f64) -> Result<f64> {
        let four_lambda = 4.0 * self.lambda;
        let g_xi = self.local_g(k, xi)?;
        let inner = self.local_exp_integral(k, xi, g_xi)?;
        let carry = ((self.big_g[k + 1] - self.big_g[k] - g_xi) / four_lambda).exp() * self.j[k + 1];
        Ok((inner + carry) / four_lambda)
    }

    fn locate(&self, r: f64) -> Result<usize> {
        if !(0.0..=self.delta).contains(&r) {
            return Err(Error::Domain {
                name: "r",
                value: r,
                expected: format!("[0, {}]", self.delta),
            });
        }
        let idx = self.knots.partition_point(|&k| k <= r);
        Ok(idx.saturating_sub(1).min(self.knots.len() - 2))
    }

    /// `G(r) = ∫₀^r g`.
    pub fn big_g(&self, r: f64) -> Result<f64> {
        let k = self.locate(r)?;
        Ok(self.big_g[k] + self.local_g(k, r)?)
    }

    pub fn f_prime(&self, r: f64) -> Result<f64> {
        let k = self.locate(r)?;
        if r == self.knots[k] {
            return Ok(self.j[k] / (4.0 * self.lambda));
        }
        self.f_prime_in(k, r)
    }

    pub fn f(&self, r: f64) -> Result<f64> {
        let k = self.locate(r)?;
        if r == self.knots[k] {
            return Ok(self.f[k]);
        }
        let piece = try_integrate(|xi| self.f_prime_in(k, xi), self.knots[k], r, tight())?;
        Ok(self.f[k] + piece.value)
    }

    /// `f″ = −(1 + g f′)/4λ`. At `r = 0` with `g` singular this is `−∞`.
    pub fn f_second(&self, r: f64) -> Result<f64> {
        let fp = self.f_prime(r)?;
        Ok(self.f_second_from(r, fp))
    }

    fn f_second_from(&self, r: f64, f_prime: f64) -> f64 {
        let gr = if f_prime == 0.0 { 0.0 } else { self.g.eval(r) };
        -(1.0 + gr * f_prime) / (4.0 * self.lambda)
    }

    pub fn eval(&self, r: f64) -> Result<AuxValue> {
        let f = self.f(r)?;
        let f_prime = self.f_prime(r)?;
        Ok(AuxValue {
            f,
            f_prime,
            f_second: self.f_second_from(r, f_prime),
        })
    }

    pub fn f_delta(&self) -> f64 {
        *self.f.last().unwrap()
    }

    pub fn f_prime_zero(&self) -> f64 {
        self.j[0] / (4.0 * self.lambda)
    }
}

/// Evaluates `(f, f′, f″)` at `r`. Callers evaluating many points should
/// build an [`AuxFunction`] once instead.
pub fn aux_function(g: &ModulusG, lambda: f64, delta: f64, r: f64) -> Result<AuxValue> {
    AuxFunction::new(g, lambda, delta)?.eval(r)
}

/// Worst margins of the lower/upper bounds on `f` over a dense sample.
/// Every margin is `bound side − measured side`, so nonnegative means the
/// inequality holds.
#[derive(Debug, Clone, Serialize)]
pub struct AuxBoundsReport {
    pub lambda: f64,
    pub delta: f64,
    /// `min_r f(r) − δr/8λ`.
    pub linear_lower: f64,
    pub linear_lower_at: f64,
    /// `f(δ) − δ²/8λ`.
    pub endpoint_lower: f64,
    /// `(δ/4λ) e^{(1/4λ)∫₀^{max(δ,1)} g} − f′(0)`.
    pub slope_upper: f64,
    /// `min_r f′(r)`.
    pub increasing: f64,
    pub increasing_at: f64,
    /// `min_r (−f″(r))`.
    pub concave: f64,
    pub concave_at: f64,
    /// `min_r f′(0) r − f(r)`.
    pub chord: f64,
    pub chord_at: f64,
    pub samples: usize,
}

const BOUND_TOL: f64 = 1e-9;

/// Checks `f(r) ≥ δr/8λ`, `f(δ) ≥ δ²/8λ`, `f′(0) ≤ (δ/4λ)e^{(1/4λ)∫₀¹g}`,
/// monotonicity, concavity and `f(r) ≤ f′(0) r` on 400 sample radii.
///
/// For `δ > 1` the exponent uses `∫₀^δ g`, the range `G` actually spans.
pub fn aux_bounds_check(aux: &AuxFunction) -> Result<AuxBoundsReport> {
    let (lambda, delta) = (aux.lambda, aux.delta);
    let n = 400;
    let fp0 = aux.f_prime_zero();
    let g_range = aux.modulus().antiderivative(delta.max(1.0))?;
    let slope_bound = delta / (4.0 * lambda) * (g_range / (4.0 * lambda)).exp();

    let mut rep = AuxBoundsReport {
        lambda,
        delta,
        linear_lower: f64::INFINITY,
        linear_lower_at: 0.0,
        endpoint_lower: aux.f_delta() - delta * delta / (8.0 * lambda),
        slope_upper: slope_bound - fp0,
        increasing: f64::INFINITY,
        increasing_at: 0.0,
        concave: f64::INFINITY,
        concave_at: 0.0,
        chord: f64::INFINITY,
        chord_at: 0.0,
        samples: n,
    };
    for i in 1..=n {
        let r = delta * i as f64 / n as f64;
        let v = aux.eval(r)?;
        let scale = 1.0 + v.f.abs();
        let lin = (v.f - delta * r / (8.0 * lambda)) / scale;
        if lin < rep.linear_lower {
            rep.linear_lower = lin;
            rep.linear_lower_at = r;
        }
        if v.f_prime < rep.increasing {
            rep.increasing = v.f_prime;
            rep.increasing_at = r;
        }
        if -v.f_second < rep.concave {
            rep.concave = -v.f_second;
            rep.concave_at = r;
        }
        let chord = (fp0 * r - v.f) / scale;
        if chord < rep.chord {
            rep.chord = chord;
            rep.chord_at = r;
        }
    }

    let checks = [
        ("f(r) >= δr/(8λ)", rep.linear_lower, rep.linear_lower_at),
        ("f(δ) >= δ²/(8λ)", rep.endpoint_lower, delta),
        ("f'(0) <= (δ/4λ)exp(∫g/4λ)", rep.slope_upper, 0.0),
        ("f' >= 0", rep.increasing, rep.increasing_at),
        ("f'' <= 0", rep.concave, rep.concave_at),
        ("f(r) <= f'(0) r", rep.chord, rep.chord_at),
    ];
    for (bound, margin, at) in checks {
        if margin < -BOUND_TOL {
            return Err(Error::BoundViolation { bound, at, margin });
        }
    }
    Ok(rep)
}

/// Largest `|4λ f″ + g f′ + 1|` on `r ∈ [0.05δ, 0.95δ]`, with `f″` taken as a
/// 5-point difference of `f′` (step `10⁻³δ`) rather than from the ODE itself.
/// Returns the residual and where it occurs.
pub fn ode_residual(aux: &AuxFunction, points: usize) -> Result<(f64, f64)> {
    let (lambda, delta) = (aux.lambda, aux.delta);
    let h = 1e-3 * delta;
    let mut worst = (0.0, 0.05 * delta);
    for i in 0..points.max(2) {
        let r = delta * (0.05 + 0.9 * i as f64 / (points.max(2) - 1) as f64);
        let d = |k: f64| aux.f_prime(r + k * h);
        let fpp = (d(-2.0)? - 8.0 * d(-1.0)? + 8.0 * d(1.0)? - d(2.0)?) / (12.0 * h);
        let res = (4.0 * lambda * fpp + aux.modulus().eval(r) * aux.f_prime(r)? + 1.0).abs();
        if res > worst.0 {
            worst = (res, r);
        }
    }
    Ok(worst)
}

/// `(ĉ₁, ĉ₂) = ((1+2λ)/λ · E, E/4λ)` with `E = e^{(1/4λ)∫₀¹ g}`.
pub fn sharp_constants(g: &ModulusG, lambda: f64) -> Result<(f64, f64)> {
    positive("lambda", lambda)?;
    if !g.flags().integrable_01 {
        return Err(Error::NonIntegrableModulus(g.name().to_string()));
    }
    let e = (g.integral_01()? / (4.0 * lambda)).exp();
    Ok(((1.0 + 2.0 * lambda) / lambda * e, e / (4.0 * lambda)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_modulus_closed_form() {
        let v = aux_function(&ModulusG::zero(), 1.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(v.f, 0.09375, max_relative = 1e-12);
        assert_relative_eq!(v.f_prime, 0.5 / 4.0, max_relative = 1e-12);
        assert_relative_eq!(v.f_second, -0.25, max_relative = 1e-12);
        let aux = AuxFunction::new(&ModulusG::zero(), 1.0, 1.0).unwrap();
        assert_relative_eq!(aux.f_prime_zero(), 0.25, max_relative = 1e-12);
        assert_relative_eq!(aux.f_delta(), 0.125, max_relative = 1e-12);
    }

    #[test]
    fn unit_constant_endpoint() {
        let v = aux_function(&ModulusG::constant(1.0).unwrap(), 1.0, 1.0, 1.0).unwrap();
        let expected = 4.0 * (0.25f64.exp() - 1.0) - 1.0;
        assert_relative_eq!(v.f, expected, max_relative = 1e-10);
        assert_eq!(v.f_prime, 0.0);
    }

    #[test]
    fn ode_residual_small_for_singular_modulus() {
        for g in [ModulusG::zero(), ModulusG::constant(1.0).unwrap(), ModulusG::power(2.0, -0.5).unwrap()] {
            let aux = AuxFunction::new(&g, 0.5, 1.0).unwrap();
            let (res, _) = ode_residual(&aux, 50).unwrap();
            assert!(res < 1e-6, "{}: {res}", g.name());
        }
    }

    #[test]
    fn domain_errors() {
        let aux = AuxFunction::new(&ModulusG::zero(), 1.0, 0.5).unwrap();
        assert!(matches!(aux.eval(0.6), Err(Error::Domain { name: "r", .. })));
        assert!(matches!(aux.eval(-0.1), Err(Error::Domain { .. })));
        let bad = ModulusG::power(1.0, -1.5).unwrap();
        assert!(matches!(AuxFunction::new(&bad, 1.0, 1.0), Err(Error::NonIntegrableModulus(_))));
    }

    #[test]
    fn bounds_tight_for_zero_modulus() {
        let aux = AuxFunction::new(&ModulusG::zero(), 1.0, 1.0).unwrap();
        let rep = aux_bounds_check(&aux).unwrap();
        assert!(rep.slope_upper.abs() < 1e-12);
        assert!(rep.endpoint_lower.abs() < 1e-12);

        let aux = AuxFunction::new(&ModulusG::zero(), 2.0, 0.5).unwrap();
        let rep = aux_bounds_check(&aux).unwrap();
        assert!(rep.endpoint_lower.abs() < 1e-12);
    }

    #[test]
    fn unit_constant_slope_bound() {
        let aux = AuxFunction::new(&ModulusG::constant(1.0).unwrap(), 1.0, 1.0).unwrap();
        assert_relative_eq!(aux.f_prime_zero(), 0.25f64.exp() - 1.0, max_relative = 1e-10);
        let rep = aux_bounds_check(&aux).unwrap();
        assert_relative_eq!(rep.slope_upper, 0.25 * 0.25f64.exp() - (0.25f64.exp() - 1.0), max_relative = 1e-9);
    }

    #[test]
    fn sharp_constant_values() {
        let (c1, c2) = sharp_constants(&ModulusG::zero(), 1.0).unwrap();
        assert_relative_eq!(c1, 3.0);
        assert_relative_eq!(c2, 0.25);
        let (c1, c2) = sharp_constants(&ModulusG::zero(), 0.5).unwrap();
        assert_relative_eq!(c1, 4.0);
        assert_relative_eq!(c2, 0.5);
        let (c1, c2) = sharp_constants(&ModulusG::constant(1.0).unwrap(), 1.0).unwrap();
        assert_relative_eq!(c1, 3.0 * 0.25f64.exp(), max_relative = 1e-12);
        assert_relative_eq!(c2, 0.25 * 0.25f64.exp(), max_relative = 1e-12);
    }
}
