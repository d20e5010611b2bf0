//! The modulus `g` bounding `‖σ(x)−σ(y)‖² + (b(x)−b(y))·(x−y)` per unit distance.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quadrature::{integrate, integrate_from_zero, Tolerance};
use crate::error::{Error, Result};

/// Asymptotic facts about `g`. Constructors fill these in analytically;
/// [`crate::problem::audit::check_g_asymptotics`] estimates them numerically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusFlags {
    /// `∫₀¹ g < ∞`.
    pub integrable_01: bool,
    /// `s g(s) → 0` as `s → 0⁺`.
    pub sg_to_zero: bool,
    /// `g(r) = O(r)` as `r → ∞`.
    pub linear_at_infinity: bool,
    /// `limsup_{s→0⁺} s g(s)`, possibly `+∞`.
    pub limsup_sg: f64,
    /// `limsup_{s→∞} s g(s)`, possibly `+∞`.
    pub limsup_sg_infinity: f64,
}

/// Serializable description of the moduli the fixtures and configs use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModulusSpec {
    Zero,
    Constant { c: f64 },
    /// `c s^p` with `p > -1`.
    Power { c: f64, p: f64 },
    /// `c s`.
    Linear { c: f64 },
    /// `c / s` for `s ≥ s0`, zero below.
    InverseTail { c: f64, s0: f64 },
}

impl ModulusSpec {
    pub fn build(&self) -> Result<ModulusG> {
        match *self {
            ModulusSpec::Zero => Ok(ModulusG::zero()),
            ModulusSpec::Constant { c } => ModulusG::constant(c),
            ModulusSpec::Power { c, p } => ModulusG::power(c, p),
            ModulusSpec::Linear { c } => ModulusG::linear(c),
            ModulusSpec::InverseTail { c, s0 } => ModulusG::inverse_tail(c, s0),
        }
    }
}

type EvalFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A nonnegative function on `(0, ∞)` together with its asymptotic flags and
/// the points where it fails to be smooth (quadrature splits there).
#[derive(Clone)]
pub struct ModulusG {
    name: String,
    eval: Arc<EvalFn>,
    flags: ModulusFlags,
    breakpoints: Vec<f64>,
    /// Exact `G(ξ) = ∫₀^ξ g` when known; quadrature otherwise.
    primitive: Option<Arc<EvalFn>>,
}

impl fmt::Debug for ModulusG {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModulusG")
            .field("name", &self.name)
            .field("flags", &self.flags)
            .field("breakpoints", &self.breakpoints)
            .field("exact_primitive", &self.primitive.is_some())
            .finish()
    }
}

fn check_nonneg(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "[0, ∞)".into(),
        })
    }
}

impl ModulusG {
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        flags: ModulusFlags,
        breakpoints: Vec<f64>,
    ) -> Self {
        let mut breakpoints: Vec<f64> = breakpoints.into_iter().filter(|&b| b > 0.0).collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            flags,
            breakpoints,
            primitive: None,
        }
    }

    /// Attaches an exact `G(ξ) = ∫₀^ξ g`, used by [`Self::antiderivative`]
    /// and [`Self::integral`] in place of quadrature.
    pub fn with_antiderivative(mut self, primitive: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.primitive = Some(Arc::new(primitive));
        self
    }

    pub fn has_exact_antiderivative(&self) -> bool {
        self.primitive.is_some()
    }

    pub fn zero() -> Self {
        Self::custom(
            "0",
            |_| 0.0,
            ModulusFlags {
                integrable_01: true,
                sg_to_zero: true,
                linear_at_infinity: true,
                limsup_sg: 0.0,
                limsup_sg_infinity: 0.0,
            },
            vec![],
        )
        .with_antiderivative(|_| 0.0)
    }

    pub fn constant(c: f64) -> Result<Self> {
        check_nonneg("c", c)?;
        if c == 0.0 {
            return Ok(Self::zero());
        }
        Ok(Self::custom(
            format!("{c}"),
            move |_| c,
            ModulusFlags {
                integrable_01: true,
                sg_to_zero: true,
                linear_at_infinity: true,
                limsup_sg: 0.0,
                limsup_sg_infinity: f64::INFINITY,
            },
            vec![],
        )
        .with_antiderivative(move |xi| c * xi))
    }

    /// `g(s) = c s^p`. Exponents `p ≤ -1` are accepted so that the
    /// non-integrable case can be represented and rejected downstream.
    pub fn power(c: f64, p: f64) -> Result<Self> {
        check_nonneg("c", c)?;
        if !p.is_finite() {
            return Err(Error::Domain {
                name: "p",
                value: p,
                expected: "a finite exponent".into(),
            });
        }
        if c == 0.0 {
            return Ok(Self::zero());
        }
        let at_zero = match p {
            p if p > -1.0 => 0.0,
            p if p == -1.0 => c,
            _ => f64::INFINITY,
        };
        let at_infinity = match p {
            p if p < -1.0 => 0.0,
            p if p == -1.0 => c,
            _ => f64::INFINITY,
        };
        let g = Self::custom(
            format!("{c}*s^{p}"),
            move |s| c * s.powf(p),
            ModulusFlags {
                integrable_01: p > -1.0,
                sg_to_zero: p > -1.0,
                linear_at_infinity: p <= 1.0,
                limsup_sg: at_zero,
                limsup_sg_infinity: at_infinity,
            },
            vec![],
        );
        Ok(if p > -1.0 {
            g.with_antiderivative(move |xi| c * xi.powf(p + 1.0) / (p + 1.0))
        } else {
            g
        })
    }

    pub fn linear(c: f64) -> Result<Self> {
        Self::power(c, 1.0)
    }

    /// `g(s) = c/s` for `s ≥ s0` and `0` below; bounded near 0, with the
    /// borderline `1/s` decay at infinity that drives the Liouville dichotomy.
    pub fn inverse_tail(c: f64, s0: f64) -> Result<Self> {
        check_nonneg("c", c)?;
        if !(s0 > 0.0 && s0.is_finite()) {
            return Err(Error::Domain {
                name: "s0",
                value: s0,
                expected: "(0, ∞)".into(),
            });
        }
        Ok(Self::custom(
            format!("{c}/s on [{s0}, ∞)"),
            move |s| if s >= s0 { c / s } else { 0.0 },
            ModulusFlags {
                integrable_01: true,
                sg_to_zero: true,
                linear_at_infinity: true,
                limsup_sg: 0.0,
                limsup_sg_infinity: c,
            },
            vec![s0],
        )
        .with_antiderivative(move |xi| if xi > s0 { c * (xi / s0).ln() } else { 0.0 }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> ModulusFlags {
        self.flags
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    /// `∫_a^b g` for `0 < a ≤ b`, split at the breakpoints.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        match &self.primitive {
            Some(p) => Ok(p(b) - p(a)),
            None => self.integral_by_quadrature(a, b),
        }
    }

    /// [`Self::integral`] by adaptive quadrature, ignoring any exact primitive.
    pub fn integral_by_quadrature(&self, a: f64, b: f64) -> Result<f64> {
        let mut total = 0.0;
        let mut lo = a;
        for &bp in self.breakpoints.iter().filter(|&&bp| bp > a && bp < b) {
            total += integrate(|s| self.eval(s), lo, bp, Tolerance::default())?.value;
            lo = bp;
        }
        total += integrate(|s| self.eval(s), lo, b, Tolerance::default())?.value;
        Ok(total)
    }

    /// `G(ξ) = ∫₀^ξ g`.
    pub fn antiderivative(&self, xi: f64) -> Result<f64> {
        match &self.primitive {
            Some(p) if xi > 0.0 => Ok(p(xi)),
            Some(_) => Ok(0.0),
            None => self.antiderivative_by_quadrature(xi),
        }
    }

    /// [`Self::antiderivative`] by quadrature (singular-endpoint rule on the
    /// first piece), ignoring any exact primitive.
    pub fn antiderivative_by_quadrature(&self, xi: f64) -> Result<f64> {
        if xi <= 0.0 {
            return Ok(0.0);
        }
        let first = self.breakpoints.iter().copied().find(|&bp| bp < xi).unwrap_or(xi);
        let head = integrate_from_zero(|s| self.eval(s), first, Tolerance::default(), &self.name)?.value;
        Ok(head + if first < xi { self.integral_by_quadrature(first, xi)? } else { 0.0 })
    }

    /// `∫₀¹ g`.
    pub fn integral_01(&self) -> Result<f64> {
        self.antiderivative(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_integrals() {
        let g = ModulusG::power(2.0, -0.5).unwrap();
        assert_relative_eq!(g.antiderivative_by_quadrature(1.0).unwrap(), 4.0, max_relative = 1e-9);
        assert_relative_eq!(g.antiderivative_by_quadrature(0.25).unwrap(), 2.0, max_relative = 1e-9);
        assert_relative_eq!(g.integral_01().unwrap(), 4.0, max_relative = 1e-12);
        assert!(g.flags().integrable_01);
        assert!(!g.flags().linear_at_infinity || g.flags().limsup_sg == 0.0);
    }

    #[test]
    fn non_integrable_is_rejected() {
        let g = ModulusG::power(1.0, -1.0).unwrap();
        assert!(!g.flags().integrable_01);
        assert!(matches!(g.integral_01(), Err(Error::NonIntegrableModulus(_))));
    }

    #[test]
    fn inverse_tail_splits_at_breakpoint() {
        let g = ModulusG::inverse_tail(2.0, 1.0).unwrap();
        assert_eq!(g.antiderivative_by_quadrature(1.0).unwrap(), 0.0);
        assert_relative_eq!(g.antiderivative_by_quadrature(10.0).unwrap(), 2.0 * 10f64.ln(), max_relative = 1e-10);
    }

    #[test]
    fn exact_primitives_match_quadrature() {
        let moduli = [
            ModulusG::zero(),
            ModulusG::constant(1.5).unwrap(),
            ModulusG::power(2.0, -0.5).unwrap(),
            ModulusG::power(0.7, -0.9).unwrap(),
            ModulusG::linear(3.0).unwrap(),
            ModulusG::inverse_tail(2.0, 1.0).unwrap(),
            ModulusG::inverse_tail(8.0, 0.3).unwrap(),
        ];
        for g in &moduli {
            assert!(g.has_exact_antiderivative());
            for xi in [1e-6, 0.01, 0.3, 1.0, 2.5, 40.0] {
                let (exact, quad) = (g.antiderivative(xi).unwrap(), g.antiderivative_by_quadrature(xi).unwrap());
                assert!((exact - quad).abs() <= 1e-8 * exact.abs().max(1.0), "{}: {xi}: {exact} vs {quad}", g.name());
            }
            let (exact, quad) = (g.integral(0.2, 3.0).unwrap(), g.integral_by_quadrature(0.2, 3.0).unwrap());
            assert!((exact - quad).abs() <= 1e-9 * exact.abs().max(1.0), "{}", g.name());
        }
        assert!(!ModulusG::power(1.0, -1.0).unwrap().has_exact_antiderivative());
    }

    #[test]
    fn constant_rejects_negative() {
        assert!(ModulusG::constant(-1.0).is_err());
        let g = ModulusG::constant(1.0).unwrap();
        assert_relative_eq!(g.antiderivative(0.3).unwrap(), 0.3, max_relative = 1e-12);
    }

    #[test]
    fn description_round_trip() {
        let s: ModulusSpec = serde_json::from_str(r#"{"kind":"power","c":2.0,"p":-0.5}"#).unwrap();
        assert_eq!(s, ModulusSpec::Power { c: 2.0, p: -0.5 });
        assert_eq!(s.build().unwrap().eval(4.0), 1.0);
    }
}
