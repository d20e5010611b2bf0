//! Coefficient fields `(q, b, h, V)` and Lyapunov candidates.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::math::linalg::{psd_sqrt, SymMatrix, Vector, PSD_TOL};

pub type ScalarFn = Arc<dyn Fn(f64, &Vector) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(f64, &Vector) -> Vector + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(f64, &Vector) -> SymMatrix + Send + Sync>;

/// Coefficients of `∂_t u − tr(q D²u) − b·Du + V u = h` with ellipticity
/// floor `q ≥ λI`.
///
/// Absent drift, source and potential evaluate to zero; the solver uses
/// their absence to skip work.
#[derive(Clone)]
pub struct CoefficientField {
    name: String,
    dim: usize,
    lambda: f64,
    horizon: f64,
    time_independent: bool,
    q: MatrixFn,
    b: Option<VectorFn>,
    h: Option<ScalarFn>,
    v: Option<ScalarFn>,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lambda", &self.lambda)
            .field("horizon", &self.horizon)
            .field("time_independent", &self.time_independent)
            .field("drift", &self.b.is_some())
            .field("source", &self.h.is_some())
            .field("potential", &self.v.is_some())
            .finish()
    }
}

impl CoefficientField {
    /// `lambda = 0` is accepted for the degenerate transport fixtures; every
    /// estimate needing ellipticity checks `lambda > 0` itself.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        lambda: f64,
        horizon: f64,
        q: impl Fn(f64, &Vector) -> SymMatrix + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Domain {
                name: "dim",
                value: dim as f64,
                expected: "{1, 2}".into(),
            });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Domain {
                name: "lambda",
                value: lambda,
                expected: "[0, ∞)".into(),
            });
        }
        if !(horizon > 0.0) {
            return Err(Error::Domain {
                name: "horizon",
                value: horizon,
                expected: "(0, ∞]".into(),
            });
        }
        Ok(Self {
            name: name.into(),
            dim,
            lambda,
            horizon,
            time_independent: true,
            q: Arc::new(q),
            b: None,
            h: None,
            v: None,
        })
    }

    pub fn with_drift(mut self, b: impl Fn(f64, &Vector) -> Vector + Send + Sync + 'static) -> Self {
        self.b = Some(Arc::new(b));
        self
    }

    pub fn with_source(mut self, h: impl Fn(f64, &Vector) -> f64 + Send + Sync + 'static) -> Self {
        self.h = Some(Arc::new(h));
        self
    }

    pub fn with_potential(mut self, v: impl Fn(f64, &Vector) -> f64 + Send + Sync + 'static) -> Self {
        self.v = Some(Arc::new(v));
        self
    }

    /// Declares that some coefficient depends on `t`.
    pub fn time_dependent(mut self) -> Self {
        self.time_independent = false;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn is_time_independent(&self) -> bool {
        self.time_independent
    }

    pub fn has_drift(&self) -> bool {
        self.b.is_some()
    }

    pub fn has_source(&self) -> bool {
        self.h.is_some()
    }

    pub fn has_potential(&self) -> bool {
        self.v.is_some()
    }

    #[inline]
    pub fn q(&self, t: f64, x: &Vector) -> SymMatrix {
        (self.q)(t, x)
    }

    #[inline]
    pub fn b(&self, t: f64, x: &Vector) -> Vector {
        match &self.b {
            Some(b) => b(t, x),
            None => Vector::zeros(self.dim),
        }
    }

    #[inline]
    pub fn h(&self, t: f64, x: &Vector) -> f64 {
        self.h.as_ref().map_or(0.0, |h| h(t, x))
    }

    #[inline]
    pub fn v(&self, t: f64, x: &Vector) -> f64 {
        self.v.as_ref().map_or(0.0, |v| v(t, x))
    }

    /// `σ = √(q − λI)`.
    pub fn sigma(&self, t: f64, x: &Vector) -> Result<SymMatrix> {
        self.sigma_with_floor(t, x, self.lambda)
    }

    /// `√(q − μI)` for a caller-chosen floor `μ ≤ λ_min(q)`.
    pub fn sigma_with_floor(&self, t: f64, x: &Vector, mu: f64) -> Result<SymMatrix> {
        psd_sqrt(&(self.q(t, x) - SymMatrix::scalar(self.dim, mu)))
    }

    /// `q(t,x) ≥ λI` up to the PSD tolerance.
    pub fn is_elliptic_at(&self, t: f64, x: &Vector) -> bool {
        let q = self.q(t, x);
        q.is_symmetric(1e-12) && q.min_eigenvalue() >= self.lambda - PSD_TOL
    }
}

/// `φ(t,x)` with analytic derivatives and the growth rate `M` of
/// `A_t φ ≤ Mφ + ∂_t φ`.
#[derive(Clone)]
pub struct LyapunovCandidate {
    pub name: String,
    pub m: f64,
    phi: ScalarFn,
    dt: ScalarFn,
    grad: VectorFn,
    hess: MatrixFn,
}

impl fmt::Debug for LyapunovCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LyapunovCandidate")
            .field("name", &self.name)
            .field("m", &self.m)
            .finish()
    }
}

/// Step of the first-order central differences used by [`LyapunovCandidate::finite_difference`].
pub const FD_STEP: f64 = 1e-5;

impl LyapunovCandidate {
    pub fn new(
        name: impl Into<String>,
        m: f64,
        phi: impl Fn(f64, &Vector) -> f64 + Send + Sync + 'static,
        dt: impl Fn(f64, &Vector) -> f64 + Send + Sync + 'static,
        grad: impl Fn(f64, &Vector) -> Vector + Send + Sync + 'static,
        hess: impl Fn(f64, &Vector) -> SymMatrix + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            m,
            phi: Arc::new(phi),
            dt: Arc::new(dt),
            grad: Arc::new(grad),
            hess: Arc::new(hess),
        }
    }

    /// `φ = 1 + |x|²`.
    pub fn quadratic(dim: usize, m: f64) -> Self {
        Self::new(
            "1+|x|^2",
            m,
            |_, x| 1.0 + x.dot(x),
            |_, _| 0.0,
            |_, x| x.scale(2.0),
            move |_, _| SymMatrix::scalar(dim, 2.0),
        )
    }

    /// Derivatives by central differences: step [`FD_STEP`] for first
    /// derivatives and `1e-4` for second ones (a `1e-5` second difference
    /// loses six digits to cancellation). Expect errors around `1e-7·|φ|`,
    /// which dominate the audit tolerance for rapidly growing `φ`.
    pub fn finite_difference(
        name: impl Into<String>,
        dim: usize,
        m: f64,
        phi: impl Fn(f64, &Vector) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let phi: ScalarFn = Arc::new(phi);
        let (p1, p2, p3) = (phi.clone(), phi.clone(), phi.clone());
        let h = FD_STEP;
        Self {
            name: name.into(),
            m,
            phi,
            dt: Arc::new(move |t, x| (p1(t + h, x) - p1((t - h).max(0.0), x)) / (t + h - (t - h).max(0.0))),
            grad: Arc::new(move |t, x| {
                let mut g = Vector::zeros(dim);
                for i in 0..dim {
                    let e = Vector::unit(dim, i).scale(h);
                    g[i] = (p2(t, &(*x + e)) - p2(t, &(*x - e))) / (2.0 * h);
                }
                g
            }),
            hess: Arc::new(move |t, x| {
                let hh = 1e-4;
                let f0 = p3(t, x);
                SymMatrix::from_upper(dim, |i, j| {
                    let ei = Vector::unit(dim, i).scale(hh);
                    if i == j {
                        (p3(t, &(*x + ei)) - 2.0 * f0 + p3(t, &(*x - ei))) / (hh * hh)
                    } else {
                        let ej = Vector::unit(dim, j).scale(hh);
                        (p3(t, &(*x + ei + ej)) - p3(t, &(*x + ei - ej)) - p3(t, &(*x - ei + ej))
                            + p3(t, &(*x - ei - ej)))
                            / (4.0 * hh * hh)
                    }
                })
            }),
        }
    }

    pub fn phi(&self, t: f64, x: &Vector) -> f64 {
        (self.phi)(t, x)
    }

    pub fn dt(&self, t: f64, x: &Vector) -> f64 {
        (self.dt)(t, x)
    }

    pub fn grad(&self, t: f64, x: &Vector) -> Vector {
        (self.grad)(t, x)
    }

    pub fn hess(&self, t: f64, x: &Vector) -> SymMatrix {
        (self.hess)(t, x)
    }

    /// `A_t φ = tr(q D²φ) + b·Dφ`.
    pub fn generator(&self, field: &CoefficientField, t: f64, x: &Vector) -> f64 {
        field.q(t, x).contract(&self.hess(t, x)) + field.b(t, x).dot(&self.grad(t, x))
    }
}
