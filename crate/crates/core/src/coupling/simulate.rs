//! Euler–Maruyama simulation of the mirror-coupled pair
//! `dX = b(X)dt + √2 σ(X)dW₁ + √(2λ)dW₂`,
//! `dY = b(Y)dt + √2 σ(Y)dW₁ + √(2λ)(I − 2ê⊗ê)dW₂`, `ê = (X−Y)/|X−Y|`,
//! with `Y ← X` from the coupling time on.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::mirror::{mirror_coupling_matrix, reflect};
use crate::error::{Error, Result};
use crate::math::linalg::{psd_sqrt, SquareMatrix, SymMatrix, Vector};
use crate::problem::CoefficientField;

/// Increments beyond this many standard scales abort the run.
const STEP_SCALE_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    Mirror,
    /// Shared noise without reflection; diagnostic only.
    Synchronous,
}

#[derive(Debug, Clone)]
pub struct CouplingConfig {
    pub field: CoefficientField,
    /// Ellipticity split `q = λI + σ²`; defaults to the field's `λ`.
    pub lambda: f64,
    pub x: Vector,
    pub y: Vector,
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    /// Coupling is declared when the pair comes within this distance;
    /// `None` means `√(8λΔt)`.
    pub eps_couple: Option<f64>,
    pub seed: u64,
    pub mode: CouplingMode,
}

impl CouplingConfig {
    pub fn new(field: CoefficientField, x: Vector, y: Vector, horizon: f64, dt: f64, n_paths: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            lambda: field.lambda(),
            field,
            x,
            y,
            horizon,
            dt,
            n_paths,
            eps_couple: None,
            seed,
            mode: CouplingMode::Mirror,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.field.dim();
        for v in [&self.x, &self.y] {
            if v.dim() != dim {
                return Err(Error::Dimension { expected: dim, got: v.dim() });
            }
        }
        if !self.field.is_time_independent() {
            return Err(Error::PreconditionFailed("pair simulation needs time-independent coefficients".into()));
        }
        let positive = [("dt", self.dt), ("horizon", self.horizon), ("lambda", self.lambda)];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Domain {
                    name,
                    value,
                    expected: "(0, ∞)".into(),
                });
            }
        }
        if self.n_paths == 0 {
            return Err(Error::Domain {
                name: "n_paths",
                value: 0.0,
                expected: "≥ 1".into(),
            });
        }
        if let Some(e) = self.eps_couple {
            if !(e > 0.0) {
                return Err(Error::Domain {
                    name: "eps_couple",
                    value: e,
                    expected: "(0, ∞)".into(),
                });
            }
        }
        Ok(())
    }

    pub fn eps(&self) -> f64 {
        self.eps_couple.unwrap_or_else(|| (8.0 * self.lambda * self.dt).sqrt())
    }

    /// Number of steps and the uniform step landing on the horizon.
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.horizon / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.horizon / n as f64)
    }

    fn rng(&self, path: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path as u64);
        rng
    }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    let mut v = Vector::zeros(n);
    for i in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        v[i] = scale * z;
    }
    v
}

/// `σ = √(q(x) − λI)` together with `tr q(x)`. Dimensions 1 and 2 use the
/// closed form `√A = (A + √det A·I)/√(tr A + 2√det A)`; anything the closed
/// form cannot certify as PSD goes through the spectral root.
#[derive(Debug, Clone, Copy)]
struct Root {
    n: usize,
    m: [[f64; 2]; 2],
    tr_q: f64,
}

impl Root {
    fn new(field: &CoefficientField, lambda: f64, x: &Vector) -> Result<Self> {
        let q = field.q(0.0, x);
        let n = q.dim();
        let tr_q = q.trace();
        let mut m = [[0.0; 2]; 2];
        match n {
            1 if q.get(0, 0) - lambda >= 0.0 => m[0][0] = (q.get(0, 0) - lambda).sqrt(),
            2 => {
                let (a, b, d) = (q.get(0, 0) - lambda, q.get(0, 1), q.get(1, 1) - lambda);
                let det = a * d - b * b;
                if det >= 0.0 && a >= 0.0 && d >= 0.0 {
                    let sd = det.sqrt();
                    let denom = (a + d + 2.0 * sd).sqrt();
                    if denom > 0.0 {
                        m = [[(a + sd) / denom, b / denom], [b / denom, (d + sd) / denom]];
                    }
                } else {
                    m = Self::spectral(&q, lambda)?;
                }
            }
            _ => m = Self::spectral(&q, lambda)?,
        }
        Ok(Self { n, m, tr_q })
    }

    fn spectral(q: &SymMatrix, lambda: f64) -> Result<[[f64; 2]; 2]> {
        let s = psd_sqrt(&(*q - SymMatrix::scalar(q.dim(), lambda)))?;
        let mut m = [[0.0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate().take(s.dim()) {
            for (j, v) in row.iter_mut().enumerate().take(s.dim()) {
                *v = s.get(i, j);
            }
        }
        Ok(m)
    }

    /// `√2 σ dW₁ + √(2λ) dW₂`.
    #[inline]
    fn noise(&self, lambda: f64, dw1: &Vector, dw2: &Vector) -> Vector {
        let mut out = dw2.scale((2.0 * lambda).sqrt());
        let r2 = std::f64::consts::SQRT_2;
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self.m[i][j] * dw1[j];
            }
            out[i] += r2 * acc;
        }
        out
    }
}

/// Squared distance from the origin to the segment `[a, b]`.
fn segment_distance_sq(a: &Vector, b: &Vector) -> f64 {
    let d = *b - *a;
    let dd = d.dot(&d);
    let s = if dd == 0.0 { 0.0 } else { (-a.dot(&d) / dd).clamp(0.0, 1.0) };
    let p = *a + d.scale(s);
    p.dot(&p)
}

#[derive(Debug, Clone, Serialize)]
pub struct PathRecord {
    /// Index of the step at whose end the pair coupled (`0` if it started coupled).
    pub coupling_step: Option<usize>,
    /// Mesh values, `dim` entries per mesh point.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `Σ|Δ(X−Y)|²` and elapsed time over steps strictly before coupling.
    pub qv: f64,
    pub qv_time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSample {
    pub dt: f64,
    pub mesh: Vec<f64>,
    pub mesh_steps: Vec<usize>,
    pub dim: usize,
    pub paths: Vec<PathRecord>,
}

impl PairSample {
    pub fn coupling_time(&self, p: usize) -> Option<f64> {
        self.paths[p].coupling_step.map(|k| k as f64 * self.dt)
    }

    /// Whether path `p` is still uncoupled at mesh point `m` (`t < T_c`).
    pub fn uncoupled_at(&self, p: usize, m: usize) -> bool {
        self.paths[p].coupling_step.is_none_or(|k| k > self.mesh_steps[m])
    }

    pub fn x_at(&self, p: usize, m: usize) -> Vector {
        Vector::from_slice(&self.paths[p].x[m * self.dim..(m + 1) * self.dim])
    }

    pub fn y_at(&self, p: usize, m: usize) -> Vector {
        Vector::from_slice(&self.paths[p].y[m * self.dim..(m + 1) * self.dim])
    }
}

fn mesh_steps(mesh: &[f64], dt: f64, horizon: f64) -> Result<Vec<usize>> {
    mesh.iter()
        .map(|&t| {
            if !(0.0..=horizon * (1.0 + 1e-12)).contains(&t) {
                return Err(Error::Domain {
                    name: "mesh time",
                    value: t,
                    expected: format!("[0, {horizon}]"),
                });
            }
            Ok((t / dt).round() as usize)
        })
        .collect()
}

fn simulate_path(cfg: &CouplingConfig, path: usize, steps: &[usize], record: bool) -> Result<PathRecord> {
    let (n_steps, dt) = cfg.steps();
    let dim = cfg.field.dim();
    let lambda = cfg.lambda;
    let eps_sq = cfg.eps().powi(2);
    let sqdt = dt.sqrt();
    let drift = cfg.field.has_drift();
    let step_drift = |z: &Vector| if drift { cfg.field.b(0.0, z).scale(dt) } else { Vector::zeros(dim) };
    let mut rng = cfg.rng(path);
    let (mut x, mut y) = (cfg.x, cfg.y);
    let mut rec = PathRecord {
        coupling_step: (x == y).then_some(0),
        x: Vec::new(),
        y: Vec::new(),
        qv: 0.0,
        qv_time: 0.0,
    };
    let last = if record { steps.iter().copied().max().unwrap_or(0).min(n_steps) } else { n_steps };
    let mut m = 0;
    let mut push = |k: usize, x: &Vector, y: &Vector, rec: &mut PathRecord| {
        while m < steps.len() && steps[m] == k {
            rec.x.extend_from_slice(x);
            rec.y.extend_from_slice(y);
            m += 1;
        }
    };
    if record {
        push(0, &x, &y, &mut rec);
    }
    for k in 1..=last {
        if rec.coupling_step.is_some() && !record {
            break;
        }
        let dw1 = gaussian(&mut rng, dim, sqdt);
        let dw2 = gaussian(&mut rng, dim, sqdt);
        let rx = Root::new(&cfg.field, lambda, &x)?;
        let nx_noise = rx.noise(lambda, &dw1, &dw2);
        let limit_sq = STEP_SCALE_LIMIT * STEP_SCALE_LIMIT * dt * rx.tr_q;
        // also rejects NaN increments or limits
        if !(nx_noise.dot(&nx_noise) <= limit_sq) {
            return Err(Error::StepTooLarge {
                path,
                increment: nx_noise.norm(),
                limit: limit_sq.sqrt(),
            });
        }
        let nx = x + step_drift(&x) + nx_noise;
        if rec.coupling_step.is_some() {
            x = nx;
            y = nx;
        } else {
            let d = x - y;
            let dw2y = match cfg.mode {
                CouplingMode::Mirror => reflect(&dw2, &d.scale(1.0 / d.norm())),
                CouplingMode::Synchronous => dw2,
            };
            let ry = Root::new(&cfg.field, lambda, &y)?;
            let ny = y + step_drift(&y) + ry.noise(lambda, &dw1, &dw2y);
            let nd = nx - ny;
            if segment_distance_sq(&d, &nd) <= eps_sq {
                rec.coupling_step = Some(k);
                x = nx;
                y = nx;
            } else {
                let inc = nd - d;
                rec.qv += inc.dot(&inc);
                rec.qv_time += dt;
                x = nx;
                y = ny;
            }
        }
        if record {
            push(k, &x, &y, &mut rec);
        }
    }
    Ok(rec)
}

/// Simulates `n_paths` pairs, recording positions at the mesh times
/// (rounded to the step grid). Path `p` draws from stream `p` of the seed,
/// so results do not depend on scheduling.
pub fn simulate_pair(cfg: &CouplingConfig, mesh: &[f64]) -> Result<PairSample> {
    cfg.validate()?;
    let (_, dt) = cfg.steps();
    let steps = mesh_steps(mesh, dt, cfg.horizon)?;
    let paths = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| simulate_path(cfg, p, &steps, true))
        .collect::<Result<Vec<_>>>()?;
    Ok(PairSample {
        dt,
        mesh: mesh.to_vec(),
        mesh_steps: steps,
        dim: cfg.field.dim(),
        paths,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CouplingRow {
    pub t: f64,
    pub p_hat: f64,
    pub ci_half: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CouplingStats {
    pub distance: f64,
    pub eps_couple: f64,
    pub dt: f64,
    pub rows: Vec<CouplingRow>,
    /// Smallest `k` with `P̂(t < T_c) ≤ k|x−y|/√(t∧1)` on the mesh.
    pub fitted_k: f64,
    /// Coupling times of the paths that coupled before the horizon.
    pub coupling_times: Vec<f64>,
    /// `Σ|Δ(X−Y)|² / Σ dt` over pre-coupling steps of all paths.
    pub qv_rate: f64,
}

impl CouplingStats {
    /// `t,p_hat,ci_half,n`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,p_hat,ci_half,n")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.t, r.p_hat, r.ci_half, r.n)?;
        }
        Ok(())
    }

    /// `bin_start,bin_end,count` over `[0, horizon]`.
    pub fn write_histogram_csv(&self, horizon: f64, bins: usize, mut w: impl Write) -> std::io::Result<()> {
        let bins = bins.max(1);
        let width = horizon / bins as f64;
        let mut counts = vec![0usize; bins];
        for &t in &self.coupling_times {
            counts[((t / width) as usize).min(bins - 1)] += 1;
        }
        writeln!(w, "bin_start,bin_end,count")?;
        for (i, c) in counts.iter().enumerate() {
            writeln!(w, "{},{},{}", i as f64 * width, (i + 1) as f64 * width, c)?;
        }
        Ok(())
    }
}

/// `P̂(t < T_c)` on `mesh` with 95% binomial half-widths.
pub fn coupling_probability(cfg: &CouplingConfig, mesh: &[f64]) -> Result<CouplingStats> {
    cfg.validate()?;
    let (_, dt) = cfg.steps();
    let steps = mesh_steps(mesh, dt, cfg.horizon)?;
    let recs = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| simulate_path(cfg, p, &steps, false))
        .collect::<Result<Vec<_>>>()?;
    let n = recs.len();
    let distance = (cfg.x - cfg.y).norm();
    let mut rows = Vec::with_capacity(mesh.len());
    let mut fitted_k: f64 = 0.0;
    for (&t, &k) in mesh.iter().zip(&steps) {
        let alive = recs.iter().filter(|r| r.coupling_step.is_none_or(|c| c > k)).count();
        let p = alive as f64 / n as f64;
        if distance > 0.0 && t > 0.0 {
            fitted_k = fitted_k.max(p * t.min(1.0).sqrt() / distance);
        }
        rows.push(CouplingRow {
            t,
            p_hat: p,
            ci_half: 1.96 * (p * (1.0 - p) / n as f64).sqrt(),
            n,
        });
    }
    let (qv, qt) = recs.iter().fold((0.0, 0.0), |(a, b), r| (a + r.qv, b + r.qv_time));
    Ok(CouplingStats {
        distance,
        eps_couple: cfg.eps(),
        dt,
        rows,
        fitted_k,
        coupling_times: recs.iter().filter_map(|r| r.coupling_step.map(|k| k as f64 * dt)).collect(),
        qv_rate: if qt > 0.0 { qv / qt } else { 0.0 },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct McEstimate {
    pub t: f64,
    pub u_x: f64,
    pub u_y: f64,
    /// Mean of `u₀(X_t) − u₀(Y_t)`.
    pub difference: f64,
    /// 95% half-width of the difference.
    pub ci: f64,
    pub ci_x: f64,
    pub ci_y: f64,
    pub p_hat: f64,
    /// Largest `|u₀|` seen at the sampled endpoints.
    pub u0_sup: f64,
    /// `2‖u₀‖∞ P̂(t < T_c)`.
    pub coupling_bound: f64,
    /// `|difference| ≤ coupling_bound + 3·ci`.
    pub coupling_inequality: bool,
    /// Every coupled path has `u₀(X_t) = u₀(Y_t)` exactly.
    pub pathwise_equal_after_coupling: bool,
}

fn mean_ci(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, 1.96 * (var / n).sqrt())
}

/// `u(t,x) − u(t,y)` estimated with coupled pairs.
pub fn mc_solution(cfg: &CouplingConfig, u0: impl Fn(&Vector) -> f64 + Sync, t: f64) -> Result<McEstimate> {
    let sample = simulate_pair(cfg, &[t])?;
    let n = sample.paths.len();
    let ux: Vec<f64> = (0..n).map(|p| u0(&sample.x_at(p, 0))).collect();
    let uy: Vec<f64> = (0..n).map(|p| u0(&sample.y_at(p, 0))).collect();
    let diffs: Vec<f64> = ux.iter().zip(&uy).map(|(a, b)| a - b).collect();
    let alive = (0..n).filter(|&p| sample.uncoupled_at(p, 0)).count();
    let p_hat = alive as f64 / n as f64;
    let u0_sup = ux.iter().chain(&uy).map(|v| v.abs()).fold(0.0, f64::max);
    let pathwise = (0..n).filter(|&p| !sample.uncoupled_at(p, 0)).all(|p| ux[p] == uy[p]);
    let (u_x, ci_x) = mean_ci(&ux);
    let (u_y, ci_y) = mean_ci(&uy);
    let (difference, ci) = mean_ci(&diffs);
    let coupling_bound = 2.0 * u0_sup * p_hat;
    Ok(McEstimate {
        t,
        u_x,
        u_y,
        difference,
        ci,
        ci_x,
        ci_y,
        p_hat,
        u0_sup,
        coupling_bound,
        coupling_inequality: difference.abs() <= coupling_bound + 3.0 * ci,
        pathwise_equal_after_coupling: pathwise,
    })
}

/// Positions at `horizon` of `n` independent single diffusions from `x0`
/// (reference for the marginal-law check).
pub fn simulate_single(field: &CoefficientField, x0: &Vector, horizon: f64, dt: f64, n: usize, seed: u64) -> Result<Vec<Vector>> {
    let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;
    let dim = field.dim();
    (0..n)
        .into_par_iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            let mut x = *x0;
            for _ in 0..steps {
                let q = field.q(0.0, &x);
                // full diffusion matrix √(2q) in one draw
                let root = psd_sqrt(&q.scale(2.0))?;
                let dw = gaussian(&mut rng, dim, h.sqrt());
                x = x + field.b(0.0, &x).scale(h) + root.mul_vec(&dw);
            }
            Ok(x)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct IncrementMoments {
    /// Empirical `Cov(ΔX, ΔY)` of one step from `(x, y)`.
    pub empirical: SquareMatrix,
    /// `2Δt·c(x, y)`.
    pub predicted: SquareMatrix,
    /// `‖empirical − predicted‖_F / ‖predicted‖_F`.
    pub relative_error: f64,
}

/// One-step cross-covariance of the pair increments against `2Δt·c(x,y)`.
pub fn pair_increment_moments(cfg: &CouplingConfig) -> Result<IncrementMoments> {
    cfg.validate()?;
    let dim = cfg.field.dim();
    let dt = cfg.dt;
    let lambda = cfg.lambda;
    let d = cfg.x - cfg.y;
    if d.norm() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let e = d.scale(1.0 / d.norm());
    let (rx, ry) = (Root::new(&cfg.field, lambda, &cfg.x)?, Root::new(&cfg.field, lambda, &cfg.y)?);
    let incs: Vec<(Vector, Vector)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = cfg.rng(p);
            let dw1 = gaussian(&mut rng, dim, dt.sqrt());
            let dw2 = gaussian(&mut rng, dim, dt.sqrt());
            let dx = rx.noise(lambda, &dw1, &dw2);
            let dy = ry.noise(lambda, &dw1, &reflect(&dw2, &e));
            (dx, dy)
        })
        .collect();
    let n = incs.len() as f64;
    let mx = incs.iter().fold(Vector::zeros(dim), |a, (x, _)| a + *x).scale(1.0 / n);
    let my = incs.iter().fold(Vector::zeros(dim), |a, (_, y)| a + *y).scale(1.0 / n);
    let empirical = incs
        .iter()
        .fold(SquareMatrix::zeros(dim), |a, (x, y)| a + (*x - mx).outer(&(*y - my)))
        .scale(1.0 / (n - 1.0));
    // predicted side uses the spectral root, independent of the simulator's closed form
    let sx = cfg.field.sigma_with_floor(0.0, &cfg.x, lambda)?;
    let sy = cfg.field.sigma_with_floor(0.0, &cfg.y, lambda)?;
    let predicted = mirror_coupling_matrix(&sx, &sy, lambda, &cfg.x, &cfg.y)?.scale(2.0 * dt);
    let relative_error = (empirical - predicted).frobenius() / predicted.frobenius();
    Ok(IncrementMoments {
        empirical,
        predicted,
        relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distance_cases() {
        let a = Vector::from_slice(&[1.0]);
        assert_eq!(segment_distance_sq(&a, &Vector::from_slice(&[-1.0])), 0.0);
        assert_eq!(segment_distance_sq(&a, &Vector::from_slice(&[0.5])), 0.25);
        assert_eq!(segment_distance_sq(&a, &a), 1.0);
        let p = Vector::from_slice(&[1.0, 1.0]);
        let q = Vector::from_slice(&[-1.0, 1.0]);
        assert!((segment_distance_sq(&p, &q) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_root_matches_spectral_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (a, b, c): (f64, f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let lambda = 0.3;
            // q = λI + LLᵀ, singular one time in four
            let m = if rng.random::<f64>() < 0.25 { [[a * a, a * b], [a * b, b * b]] } else { [[a * a + b * b, b * c], [b * c, c * c]] };
            let field = CoefficientField::new("r", 2, lambda, f64::INFINITY, move |_, _| {
                SymMatrix::from_rows(&[&[lambda + m[0][0], m[0][1]], &[m[1][0], lambda + m[1][1]]]).unwrap()
            })
            .unwrap();
            let x = Vector::zeros(2);
            let root = Root::new(&field, lambda, &x).unwrap();
            let s = field.sigma(0.0, &x).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((root.m[i][j] - s.get(i, j)).abs() < 1e-7, "{m:?}");
                }
            }
        }
    }

    #[test]
    fn nan_diffusion_aborts_with_step_too_large() {
        let field = CoefficientField::new("nan", 1, 1.0, f64::INFINITY, |_, x| {
            SymMatrix::diag(&[if x[0] > 0.5 { f64::NAN } else { 1.0 }])
        })
        .unwrap();
        let cfg = CouplingConfig::new(field, Vector::from_slice(&[1.0]), Vector::from_slice(&[0.0]), 0.1, 0.01, 4, 1).unwrap();
        assert!(matches!(coupling_probability(&cfg, &[0.1]), Err(Error::StepTooLarge { path: 0, .. })));
    }
}
