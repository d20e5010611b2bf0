//! Sampling audits of the structural hypotheses. They certify nothing over
//! all of `ℝ^N`; sample counts, ranges and seeds go into every report so
//! each verdict can be reproduced.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::field::{CoefficientField, LyapunovCandidate};
use crate::error::Result;
use crate::math::linalg::Vector;
use crate::math::modulus::ModulusG;
use crate::math::quadrature::{integrate, Tolerance};

/// A verdict is PASS iff the worst violation is at most this.
pub const AUDIT_TOL: f64 = 1e-9;

/// Sampling box `[lower, upper] × [t_min, t_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRange {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
}

impl SampleRange {
    /// `[−half_width, half_width]^dim × [0, horizon]`.
    pub fn cube(dim: usize, half_width: f64, horizon: f64) -> Self {
        Self {
            lower: vec![-half_width; dim],
            upper: vec![half_width; dim],
            t_min: 0.0,
            t_max: horizon,
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn point(&self, rng: &mut impl Rng) -> Vector {
        let xs: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect();
        Vector::from_slice(&xs)
    }

    fn time(&self, rng: &mut impl Rng) -> f64 {
        self.t_min + (self.t_max - self.t_min) * rng.random::<f64>()
    }

    /// Largest distance from the origin to a corner.
    fn outer_radius(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// A sample `(t, x, y)` attaining the reported worst value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub t: f64,
    pub x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub hypothesis: String,
    pub pass: bool,
    /// Largest value of (left side − right side) over the samples.
    pub max_violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Smallest constant that would have made the sampled inequality hold,
    /// for audits with a free constant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_constant: Option<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub range: SampleRange,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl AuditReport {
    fn new(hypothesis: impl Into<String>, n_samples: usize, seed: u64, range: &SampleRange) -> Self {
        Self {
            hypothesis: hypothesis.into(),
            pass: true,
            max_violation: f64::NEG_INFINITY,
            witness: None,
            fitted_constant: None,
            n_samples,
            seed,
            range: range.clone(),
            notes: Vec::new(),
        }
    }

    fn record(&mut self, value: f64, t: f64, x: &Vector, y: Option<&Vector>) {
        if value > self.max_violation || value.is_nan() {
            self.max_violation = value;
            self.witness = Some(Witness {
                t,
                x: x.to_vec(),
                y: y.map(|y| y.to_vec()),
            });
        }
    }

    fn finish(mut self) -> Self {
        self.pass = self.max_violation <= AUDIT_TOL;
        if !self.pass && self.max_violation.is_nan() {
            self.notes.push("NaN encountered while evaluating the inequality".into());
        }
        if !self.max_violation.is_finite() && !self.max_violation.is_nan() && self.max_violation < 0.0 {
            self.max_violation = 0.0;
        }
        self
    }

    /// Records an audit that has no finite check, keeping it visible in reports.
    pub fn unaudited(hypothesis: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            hypothesis: hypothesis.into(),
            pass: false,
            max_violation: f64::NAN,
            witness: None,
            fitted_constant: None,
            n_samples: 0,
            seed: 0,
            range: SampleRange::cube(0, 0.0, 0.0),
            notes: vec![reason.into()],
        }
    }
}

/// A second point: within unit distance of `x` or anywhere in the box.
fn partner(x: &Vector, range: &SampleRange, restrict_to_unit: bool, rng: &mut impl Rng) -> Vector {
    if !restrict_to_unit {
        return range.point(rng);
    }
    let n = x.dim();
    let mut dir = Vector::zeros(n);
    loop {
        for i in 0..n {
            dir[i] = rng.sample(StandardNormal);
        }
        let norm = dir.norm();
        if norm > 1e-12 {
            dir = dir.scale(1.0 / norm);
            break;
        }
    }
    // Radius uniform on (0, 1] with extra mass near 0, where moduli are stressed.
    let u: f64 = rng.random::<f64>();
    let r = if rng.random::<bool>() { 1.0 - u } else { (1.0 - u).powi(4) };
    *x + dir.scale(r.max(1e-12))
}

/// `‖σ(t,x)−σ(t,y)‖² + (b(t,x)−b(t,y))·(x−y) ≤ g(|x−y|)|x−y|`, `σ = √(q−λI)`.
pub fn check_pw(
    field: &CoefficientField,
    g: &ModulusG,
    range: &SampleRange,
    n_samples: usize,
    restrict_to_unit: bool,
    seed: u64,
) -> AuditReport {
    let mut rep = AuditReport::new(
        format!("sigma/drift modulus bound with g = {}", g.name()),
        n_samples,
        seed,
        range,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        let t = range.time(&mut rng);
        let x = range.point(&mut rng);
        let y = partner(&x, range, restrict_to_unit, &mut rng);
        let value = pw_lhs(field, t, &x, &y).map(|(lhs, r)| lhs - g.eval(r) * r);
        match value {
            Ok(v) => rep.record(v, t, &x, Some(&y)),
            Err(e) => {
                rep.record(f64::NAN, t, &x, Some(&y));
                rep.notes.push(format!("σ unavailable: {e}"));
                break;
            }
        }
    }
    rep.finish()
}

/// Left side of the modulus condition and `|x − y|`.
pub fn pw_lhs(field: &CoefficientField, t: f64, x: &Vector, y: &Vector) -> Result<(f64, f64)> {
    let d = *x - *y;
    let r = d.norm();
    if r == 0.0 {
        return Ok((0.0, 0.0));
    }
    let ds = field.sigma(t, x)? - field.sigma(t, y)?;
    Ok((ds.frobenius().powi(2) + (field.b(t, x) - field.b(t, y)).dot(&d), r))
}

/// Which side of the variable-ellipticity condition to audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecForm {
    /// `‖√(q(x)−μI) − √(q(y)−μI)‖²` with `μ = λ_x ∧ λ_y`.
    Root,
    /// `‖q(x) − q(y)‖² / (2μ)`, which implies the root form.
    Sufficient,
}

/// `(1/|x−y|)(S + (b(x)−b(y))·(x−y)) ≤ μ g₀(|x−y|)`, `μ = λ_{t,x} ∧ λ_{t,y}`,
/// for `0 < |x−y| ≤ 1`, with `S` chosen by `form`.
///
/// `fitted_constant` is the smallest factor `c` such that `c·g₀` passes.
#[allow(clippy::too_many_arguments)]
pub fn check_prec(
    field: &CoefficientField,
    g0: &ModulusG,
    lambda_field: impl Fn(f64, &Vector) -> f64,
    range: &SampleRange,
    n_samples: usize,
    seed: u64,
    form: PrecForm,
) -> AuditReport {
    let mut rep = AuditReport::new(
        format!("variable-ellipticity modulus bound ({form:?} form) with g0 = {}", g0.name()),
        n_samples,
        seed,
        range,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scale: f64 = 0.0;
    for _ in 0..n_samples {
        let t = range.time(&mut rng);
        let x = range.point(&mut rng);
        let y = partner(&x, range, true, &mut rng);
        let mu = lambda_field(t, &x).min(lambda_field(t, &y));
        let d = x - y;
        let r = d.norm();
        let spread = match form {
            PrecForm::Root => field
                .sigma_with_floor(t, &x, mu)
                .and_then(|sx| Ok((sx - field.sigma_with_floor(t, &y, mu)?).frobenius().powi(2))),
            PrecForm::Sufficient => Ok((field.q(t, &x) - field.q(t, &y)).frobenius().powi(2) / (2.0 * mu)),
        };
        let spread = match spread {
            Ok(s) => s,
            Err(e) => {
                rep.record(f64::NAN, t, &x, Some(&y));
                rep.notes.push(format!("λ_(t,x) exceeds the spectrum of q: {e}"));
                break;
            }
        };
        let lhs = (spread + (field.b(t, &x) - field.b(t, &y)).dot(&d)) / r;
        let rhs = mu * g0.eval(r);
        rep.record(lhs - rhs, t, &x, Some(&y));
        if lhs > 0.0 {
            scale = scale.max(if rhs > 0.0 { lhs / rhs } else { f64::INFINITY });
        }
    }
    rep.fitted_constant = Some(scale);
    rep.finish()
}

/// Number of doubling shells used to detect unbounded growth.
const SHELLS: usize = 6;

/// `A_t φ ≤ Mφ + ∂_t φ` at samples, plus coercivity of `φ` (shell minima
/// increase on the expanding shells `|x| ∈ [R_k, 2R_k]`, `R_k = R 2^{k−K}`).
pub fn check_lyapunov(
    field: &CoefficientField,
    cand: &LyapunovCandidate,
    range: &SampleRange,
    n_samples: usize,
    seed: u64,
) -> AuditReport {
    let mut rep = AuditReport::new(
        format!("Lyapunov inequality for {} with M = {}", cand.name, cand.m),
        n_samples,
        seed,
        range,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        let t = range.time(&mut rng);
        let x = range.point(&mut rng);
        let phi = cand.phi(t, &x);
        let lhs = cand.generator(field, t, &x) - cand.m * phi - cand.dt(t, &x);
        // Relative slack: both sides scale with φ.
        rep.record(lhs / (1.0 + phi.abs()), t, &x, None);
    }
    let minima = shell_extrema(range, &mut rng, |x| cand.phi(range.t_max, x)).0;
    if !minima.windows(2).all(|w| w[1] > w[0]) {
        rep.max_violation = rep.max_violation.max(f64::INFINITY);
        rep.notes.push(format!("φ is not coercive on the sampled shells: minima {minima:?}"));
    }
    rep.finish()
}

/// Samples `|x| ∈ [R_k, 2R_k]` and returns per-shell `(min, max)` of `f`.
fn shell_extrema(range: &SampleRange, rng: &mut impl Rng, f: impl Fn(&Vector) -> f64) -> (Vec<f64>, Vec<f64>) {
    let outer = range.outer_radius();
    let n = range.dim();
    let mut mins = Vec::with_capacity(SHELLS);
    let mut maxs = Vec::with_capacity(SHELLS);
    for k in 0..SHELLS {
        let r_lo = outer * 2f64.powi(k as i32 - SHELLS as i32);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..200 {
            let mut dir = Vector::zeros(n);
            for i in 0..n {
                dir[i] = rng.sample(StandardNormal);
            }
            let norm = dir.norm().max(1e-300);
            let radius = r_lo * (1.0 + rng.random::<f64>());
            let v = f(&dir.scale(radius / norm));
            lo = lo.min(v);
            hi = hi.max(v);
        }
        mins.push(lo);
        maxs.push(hi);
    }
    (mins, maxs)
}

/// Convenience audit with `φ = 1 + |x|²`: fits the smallest `C` with
/// `tr q + b·x ≤ C(1 + |x|²)` on the box and fails when the shell maxima of
/// the ratio keep growing (no finite `C`).
pub fn check_lyapunov_quadratic(field: &CoefficientField, range: &SampleRange, n_samples: usize, seed: u64) -> AuditReport {
    let mut rep = AuditReport::new("quadratic Lyapunov bound tr q + b·x ≤ C(1+|x|²)", n_samples, seed, range);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ratio = |t: f64, x: &Vector| (field.q(t, x).trace() + field.b(t, x).dot(x)) / (1.0 + x.dot(x));
    let mut c: f64 = 0.0;
    let mut worst = (0.0, Vector::zeros(range.dim()));
    for _ in 0..n_samples {
        let t = range.time(&mut rng);
        let x = range.point(&mut rng);
        let r = ratio(t, &x);
        if r > c {
            c = r;
            worst = (t, x);
        }
    }
    let t_shell = range.t_max;
    let maxima = shell_extrema(range, &mut rng, |x| ratio(t_shell, x)).1;
    let tail = &maxima[SHELLS - 3..];
    let growing = tail[0] > 0.0 && tail[1] > 1.5 * tail[0] && tail[2] > 1.5 * tail[1];
    rep.fitted_constant = Some(c);
    if growing {
        rep.max_violation = f64::INFINITY;
        rep.witness = Some(Witness {
            t: worst.0,
            x: worst.1.to_vec(),
            y: None,
        });
        rep.notes.push(format!("ratio grows without bound on expanding shells: {maxima:?}"));
    } else {
        rep.max_violation = 0.0;
        rep.notes.push(format!("A(1+|x|²) ≤ M(1+|x|²) with M = 2C = {}", 2.0 * c));
    }
    rep.finish()
}

/// `|V(t,x) − V(t,y)| ≤ k₀ + k₁|x−y|^α max(V(t,x), V(t,y))` for `|x−y| ≤ 1`.
pub fn check_potential(
    v: impl Fn(f64, &Vector) -> f64,
    k0: f64,
    k1: f64,
    alpha: f64,
    range: &SampleRange,
    n_samples: usize,
    seed: u64,
) -> AuditReport {
    let mut rep = AuditReport::new(
        format!("potential oscillation bound with k0 = {k0}, k1 = {k1}, alpha = {alpha}"),
        n_samples,
        seed,
        range,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        let t = range.time(&mut rng);
        let x = range.point(&mut rng);
        let y = partner(&x, range, true, &mut rng);
        let (vx, vy) = (v(t, &x), v(t, &y));
        if vx < 0.0 || vy < 0.0 {
            rep.notes.push("negative potential sampled".into());
        }
        let r = (x - y).norm();
        let lhs = (vx - vy).abs() - k0 - k1 * r.powf(alpha) * vx.max(vy);
        rep.record(lhs / (1.0 + vx.abs().max(vy.abs())), t, &x, Some(&y));
    }
    rep.finish()
}

/// Numerical asymptotics of `g` deciding which estimates and Liouville
/// statements apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GAsymptotics {
    pub lambda: f64,
    pub alpha: f64,
    /// `∫₀¹ g`, absent when the integral diverges.
    pub integral_01: Option<f64>,
    /// `max s g(s)` over `s ∈ [1e-12, 1e-6]`.
    pub limsup_sg_zero: f64,
    pub sg_to_zero: bool,
    /// `limsup s g(s) < 4λ` near 0 (fixed-α Hölder branch).
    pub holder_fixed_alpha: bool,
    /// Increments `∫_{10^k}^{10^{k+1}} e^{−G(r)/4λ} dr`, `k = 0..5`.
    pub tail_increments: Vec<f64>,
    /// `∫₀^∞ e^{−G(r)/4λ} dr = ∞` (bounded solutions are constant).
    pub liouville_bounded: bool,
    /// `max s g(s)` over `s ∈ [1e4, 1e6]`.
    pub limsup_sg_infinity: f64,
    /// `limsup s g(s) < 4λ(1−α)` at infinity (α-Hölder-growth solutions are constant).
    pub liouville_holder: bool,
}

fn log_mesh(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

pub fn check_g_asymptotics(g: &ModulusG, lambda: f64, alpha: f64) -> Result<GAsymptotics> {
    let integral_01 = g.integral_01().ok();
    let sg = |s: f64| s * g.eval(s);
    let limsup_sg_zero = log_mesh(1e-12, 1e-6, 200).map(sg).fold(0.0, f64::max);
    let near_zero: Vec<f64> = log_mesh(1e-12, 1e-3, 10).map(sg).collect();
    let sg_to_zero = near_zero[0] <= 1e-3 * near_zero[9].max(1.0) && near_zero.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-9));

    let four_lambda = 4.0 * lambda;
    let mut increments = Vec::new();
    let mut liouville_bounded = false;
    if integral_01.is_some() {
        // G at decade ends, then e^{−G/4λ} integrated decade by decade.
        let mut g_left = g.antiderivative(1.0)?;
        for k in 0..6 {
            let (a, b) = (10f64.powi(k), 10f64.powi(k + 1));
            let mut pieces = vec![a];
            pieces.extend(g.breakpoints().iter().copied().filter(|&p| p > a && p < b));
            pieces.push(b);
            let mut inc = 0.0;
            let mut g_at = g_left;
            for w in pieces.windows(2) {
                let base = g_at;
                let lo = w[0];
                inc += integrate(
                    |r| {
                        let gr = base + integrate(|s| g.eval(s), lo, r, Tolerance::default()).map_or(f64::NAN, |e| e.value);
                        (-gr / four_lambda).exp()
                    },
                    w[0],
                    w[1],
                    Tolerance { abs: 1e-300, rel: 1e-8 },
                )?
                .value;
                g_at += g.integral(w[0], w[1])?;
            }
            g_left = g_at;
            increments.push(inc);
        }
        let n = increments.len();
        liouville_bounded = increments[n - 1] >= 0.5 * increments[n - 2];
    }
    let limsup_sg_infinity = log_mesh(1e4, 1e6, 200).map(sg).fold(0.0, f64::max);
    Ok(GAsymptotics {
        lambda,
        alpha,
        integral_01,
        limsup_sg_zero,
        sg_to_zero,
        holder_fixed_alpha: limsup_sg_zero < four_lambda,
        tail_increments: increments,
        liouville_bounded,
        limsup_sg_infinity,
        liouville_holder: limsup_sg_infinity < four_lambda * (1.0 - alpha),
    })
}
