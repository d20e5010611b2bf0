//! Finite Bellman–Isaacs families
//! `F(t,x,p,X) = inf_β sup_α {−tr(q_{αβ} X) − b_{αβ}·p − f_{αβ}}`.

use std::sync::Arc;

use super::field::{CoefficientField, ScalarFn};
use crate::error::{Error, Result};
use crate::math::linalg::{SymMatrix, Vector};

/// Members are stored α-major: member `(α, β)` sits at `α·n_beta + β`.
/// The source term of each member field plays the role of `f_{αβ}`.
#[derive(Clone, Debug)]
pub struct IsaacsFamily {
    name: String,
    n_alpha: usize,
    n_beta: usize,
    members: Vec<CoefficientField>,
    source: Option<ScalarFnDebug>,
}

#[derive(Clone)]
struct ScalarFnDebug(ScalarFn);

impl std::fmt::Debug for ScalarFnDebug {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("<source>")
    }
}

impl IsaacsFamily {
    pub fn new(name: impl Into<String>, n_alpha: usize, n_beta: usize, members: Vec<CoefficientField>) -> Result<Self> {
        if n_alpha == 0 || n_beta == 0 || members.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if members.len() != n_alpha * n_beta {
            return Err(Error::Dimension {
                expected: n_alpha * n_beta,
                got: members.len(),
            });
        }
        let dim = members[0].dim();
        let lambda = members[0].lambda();
        if let Some(m) = members.iter().find(|m| m.dim() != dim) {
            return Err(Error::Dimension { expected: dim, got: m.dim() });
        }
        if members.iter().any(|m| m.lambda() != lambda) {
            return Err(Error::PreconditionFailed("family members must share λ".into()));
        }
        Ok(Self {
            name: name.into(),
            n_alpha,
            n_beta,
            members,
            source: None,
        })
    }

    /// Family reduced to one linear operator.
    pub fn singleton(field: CoefficientField) -> Self {
        Self {
            name: field.name().to_string(),
            n_alpha: 1,
            n_beta: 1,
            members: vec![field],
            source: None,
        }
    }

    /// Right-hand side `h` of `∂_t u + F = h`.
    pub fn with_source(mut self, h: impl Fn(f64, &Vector) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Some(ScalarFnDebug(Arc::new(h)));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn lambda(&self) -> f64 {
        self.members[0].lambda()
    }

    pub fn horizon(&self) -> f64 {
        self.members.iter().map(|m| m.horizon()).fold(f64::INFINITY, f64::min)
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn member(&self, alpha: usize, beta: usize) -> &CoefficientField {
        &self.members[alpha * self.n_beta + beta]
    }

    pub fn members(&self) -> &[CoefficientField] {
        &self.members
    }

    pub fn source(&self, t: f64, x: &Vector) -> f64 {
        self.source.as_ref().map_or(0.0, |h| (h.0)(t, x))
    }

    pub fn has_source(&self) -> bool {
        self.source.is_some()
    }

    pub fn is_time_independent(&self) -> bool {
        self.members.iter().all(|m| m.is_time_independent())
    }
}

/// `−tr(qX) − b·p − f` for one member.
pub fn linear_value(field: &CoefficientField, t: f64, x: &Vector, p: &Vector, xx: &SymMatrix) -> f64 {
    -field.q(t, x).contract(xx) - field.b(t, x).dot(p) - field.h(t, x)
}

/// `inf_β sup_α {−tr(q_{αβ}X) − b_{αβ}·p − f_{αβ}}` by enumeration.
pub fn isaacs_value(family: &IsaacsFamily, t: f64, x: &Vector, p: &Vector, xx: &SymMatrix) -> Result<f64> {
    if family.members.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut inf = f64::INFINITY;
    for beta in 0..family.n_beta {
        let sup = (0..family.n_alpha)
            .map(|alpha| linear_value(family.member(alpha, beta), t, x, p, xx))
            .fold(f64::NEG_INFINITY, f64::max);
        inf = inf.min(sup);
    }
    Ok(inf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drift(b: f64) -> CoefficientField {
        CoefficientField::new(format!("b={b}"), 1, 1.0, 1.0, |_, _| SymMatrix::identity(1))
            .unwrap()
            .with_drift(move |_, _| Vector::from_slice(&[b]))
    }

    #[test]
    fn two_drift_value() {
        let fam = IsaacsFamily::new("two-drift", 2, 1, vec![drift(-1.0), drift(1.0)]).unwrap();
        let x = Vector::zeros(1);
        let v = isaacs_value(&fam, 0.0, &x, &Vector::from_slice(&[2.0]), &SymMatrix::diag(&[1.0])).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn constant_table() {
        // values −f_{αβ}: rows α, columns β
        let table = [[1.0, 4.0], [3.0, 2.0]];
        let mut members = Vec::new();
        for row in table {
            for v in row {
                members.push(
                    CoefficientField::new("c", 1, 1.0, 1.0, |_, _| SymMatrix::identity(1))
                        .unwrap()
                        .with_source(move |_, _| -v),
                );
            }
        }
        let fam = IsaacsFamily::new("table", 2, 2, members).unwrap();
        let z = Vector::zeros(1);
        // β=0: max(1,3)=3; β=1: max(4,2)=4; inf = 3
        assert_eq!(isaacs_value(&fam, 0.0, &z, &z, &SymMatrix::zeros(1)).unwrap(), 3.0);
    }

    #[test]
    fn shape_errors() {
        assert_eq!(IsaacsFamily::new("e", 0, 1, vec![]).unwrap_err(), Error::EmptyFamily);
        assert!(matches!(
            IsaacsFamily::new("e", 2, 2, vec![drift(1.0)]),
            Err(Error::Dimension { expected: 4, got: 1 })
        ));
    }
}
