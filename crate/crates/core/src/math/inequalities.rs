//! Trace consequences of the doubled-variable matrix inequality
//!
//! ```text
//! [X̃ 0; 0 Ỹ] ≤ [A −A; −A A]
//! ```
//!
//! and a rejection sampler producing feasible instances of it.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::linalg::{SquareMatrix, SymMatrix, PSD_TOL};
use crate::error::{Error, Result};

/// Slacks (right side minus left side) of the three trace inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceResiduals {
    /// `tr((σ₁−σ₂)²A) − tr(σ₁²X̃ + σ₂²Ỹ)`.
    pub rep1: f64,
    /// `2t tr(PA) − tr(X̃+Ỹ)`.
    pub rep2: f64,
    /// `4λ̃ tr(PA) + ‖σ₁−σ₂‖² sup_{|e|=1}|Ce·e| − λ̃ tr(X̃+Ỹ) − tr(σ₁²X̃ + σ₂²Ỹ)`.
    pub rep3: f64,
}

impl TraceResiduals {
    pub fn min(&self) -> f64 {
        self.rep1.min(self.rep2).min(self.rep3)
    }
}

/// Smallest eigenvalue of `[A−X̃, −A; −A, A−Ỹ]`.
pub fn block_slack(x_t: &SymMatrix, y_t: &SymMatrix, a: &SymMatrix) -> f64 {
    let n = a.dim();
    let m = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        let (ii, jj) = (i % n, j % n);
        match (bi, bj) {
            (0, 0) => a.get(ii, jj) - x_t.get(ii, jj),
            (1, 1) => a.get(ii, jj) - y_t.get(ii, jj),
            _ => -a.get(ii, jj),
        }
    });
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[allow(clippy::too_many_arguments)]
pub fn block_trace_inequalities(
    x_t: &SymMatrix,
    y_t: &SymMatrix,
    a: &SymMatrix,
    sigma1: &SymMatrix,
    sigma2: &SymMatrix,
    p: &SymMatrix,
    t: f64,
    c: &SymMatrix,
    lambda_t: f64,
) -> Result<TraceResiduals> {
    let n = a.dim();
    for m in [x_t, y_t, sigma1, sigma2, p, c] {
        if m.dim() != n {
            return Err(Error::Dimension { expected: n, got: m.dim() });
        }
    }
    if !(0.0..=2.0).contains(&t) {
        return Err(Error::Domain {
            name: "t",
            value: t,
            expected: "[0, 2]".into(),
        });
    }
    if !(lambda_t > 0.0) {
        return Err(Error::Domain {
            name: "lambda_t",
            value: lambda_t,
            expected: "(0, ∞)".into(),
        });
    }
    let slack = block_slack(x_t, y_t, a);
    if slack < -PSD_TOL {
        return Err(Error::PreconditionFailed(format!(
            "block inequality fails: smallest eigenvalue {slack:e}"
        )));
    }
    if p.min_eigenvalue() < -PSD_TOL || (SymMatrix::identity(n) - *p).min_eigenvalue() < -PSD_TOL {
        return Err(Error::PreconditionFailed("P is not between 0 and I".into()));
    }
    if (*c - *a).min_eigenvalue() < -PSD_TOL {
        return Err(Error::PreconditionFailed("A ≤ C fails".into()));
    }

    let diff = *sigma1 - *sigma2;
    let weighted = sigma1.square().contract(x_t) + sigma2.square().contract(y_t);
    let tr_sum = x_t.trace() + y_t.trace();
    let tr_pa = (*p * *a).trace();
    let rep1 = diff.square().contract(a) - weighted;
    let rep2 = 2.0 * t * tr_pa - tr_sum;
    let rep3 = 4.0 * lambda_t * tr_pa + diff.frobenius().powi(2) * c.spectral_radius() - lambda_t * tr_sum - weighted;
    Ok(TraceResiduals { rep1, rep2, rep3 })
}

/// One feasible instance of the block inequality with admissible auxiliary
/// matrices.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibleInstance {
    pub x_t: SymMatrix,
    pub y_t: SymMatrix,
    pub a: SymMatrix,
    pub sigma1: SymMatrix,
    pub sigma2: SymMatrix,
    pub p: SymMatrix,
    pub t: f64,
    pub c: SymMatrix,
    pub lambda_t: f64,
    /// Candidates drawn before this one was accepted.
    pub attempts: usize,
}

impl FeasibleInstance {
    pub fn residuals(&self) -> Result<TraceResiduals> {
        block_trace_inequalities(
            &self.x_t,
            &self.y_t,
            &self.a,
            &self.sigma1,
            &self.sigma2,
            &self.p,
            self.t,
            &self.c,
            self.lambda_t,
        )
    }
}

fn gaussian_square(n: usize, rng: &mut impl Rng) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, rng.sample(StandardNormal));
        }
    }
    m
}

fn gaussian_sym(n: usize, rng: &mut impl Rng) -> SymMatrix {
    gaussian_square(n, rng).symmetric_part()
}

fn gram(b: SquareMatrix) -> SymMatrix {
    (b * b.transpose()).symmetric_part()
}

/// Draws `A = BBᵀ`, `X̃ = R₁ − c₁I`, `Ỹ = R₂ − c₂I` with Gaussian `B, R_i`
/// and `c_i ~ U[0,3]` until the block inequality holds; then `P = Q diag(u) Qᵀ`
/// with Haar-ish `Q` and `u ~ U[0,1]^N`, `C = A + DDᵀ/2`, arbitrary symmetric
/// `σ_i`, `t ~ U[0,2]`, `λ̃ ~ U[0.1,3]`.
pub fn sample_feasible_instance(n: usize, rng: &mut impl Rng) -> FeasibleInstance {
    let mut attempts = 0;
    let (a, x_t, y_t) = loop {
        attempts += 1;
        let a = gram(gaussian_square(n, rng));
        let x_t = gaussian_sym(n, rng) - SymMatrix::scalar(n, rng.random_range(0.0..3.0));
        let y_t = gaussian_sym(n, rng) - SymMatrix::scalar(n, rng.random_range(0.0..3.0));
        if block_slack(&x_t, &y_t, &a) >= 0.0 {
            break (a, x_t, y_t);
        }
    };
    let q = gaussian_square(n, rng).to_nalgebra().qr().q();
    let u: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
    let p = SymMatrix::from_upper(n, |i, j| (0..n).map(|k| u[k] * q[(i, k)] * q[(j, k)]).sum());
    let c = a + gram(gaussian_square(n, rng)).scale(0.5);
    FeasibleInstance {
        x_t,
        y_t,
        a,
        sigma1: gaussian_sym(n, rng),
        sigma2: gaussian_sym(n, rng),
        p,
        t: rng.random_range(0.0..=2.0),
        c,
        lambda_t: rng.random_range(0.1..3.0),
        attempts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constructed_feasible_instance() {
        let i2 = SymMatrix::identity(2);
        let xt = SymMatrix::scalar(2, -0.1);
        let e1 = SymMatrix::diag(&[1.0, 0.0]);
        let r = block_trace_inequalities(&xt, &xt, &i2, &i2, &i2, &e1, 2.0, &i2, 1.0).unwrap();
        // tr(X̃+Ỹ) = −0.4 against 2·2·tr(PA) = 4
        assert!((r.rep2 - 4.4).abs() < 1e-14);
        assert!(r.min() >= 0.0);
    }

    #[test]
    fn zero_case() {
        let z = SymMatrix::zeros(3);
        let a = SymMatrix::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap();
        let s1 = SymMatrix::diag(&[1.0, 2.0, 3.0]);
        let p = SymMatrix::scalar(3, 0.5);
        let r = block_trace_inequalities(&z, &z, &a, &s1, &z, &p, 1.0, &a, 1.0).unwrap();
        assert!(r.rep1 >= 0.0 && r.rep2 >= 0.0 && r.rep3 >= 0.0);
    }

    #[test]
    fn rejects_infeasible() {
        let i2 = SymMatrix::identity(2);
        let x = SymMatrix::scalar(2, 1.0);
        let r = block_trace_inequalities(&x, &x, &i2, &i2, &i2, &i2, 1.0, &i2, 1.0);
        assert!(matches!(r, Err(Error::PreconditionFailed(_))));
        let z = SymMatrix::zeros(2);
        let r = block_trace_inequalities(&z, &z, &i2, &i2, &i2, &SymMatrix::scalar(2, 1.5), 1.0, &i2, 1.0);
        assert!(matches!(r, Err(Error::PreconditionFailed(_))));
        let r = block_trace_inequalities(&z, &z, &i2, &i2, &i2, &i2, 1.0, &z, 1.0);
        assert!(matches!(r, Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn sampled_instances_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3] {
            for _ in 0..50 {
                let inst = sample_feasible_instance(n, &mut rng);
                assert!(inst.residuals().unwrap().min() >= -1e-9);
            }
        }
    }
}
