//! Measured seminorms against the regularity bounds.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::report::{BoundRow, CheckMode, RegularityReport, Verdict};
use super::seminorms::{mask_of, pair_max};
use crate::error::{Error, Result};
use crate::math::aux::sharp_constants;
use crate::math::linalg::{SymMatrix, Vector};
use crate::math::modulus::ModulusG;
use crate::problem::CoefficientField;
use crate::solver::oracle::heat_sine;
use crate::solver::{max_stable_dt, solve_linear, GridSolution, SchemeConfig};

/// Lipschitz quotients use pairs up to this many cells apart.
const LIP_PAIR_CELLS: f64 = 3.0;

/// Oscillations `ω(t, ·)` are taken over pairs with `|x − y| ≤ 1`.
const OSC_RADIUS: f64 = 1.0;

/// Relative agreement required of fitted constants across resolutions.
pub const STABILITY_TOL: f64 = 0.2;

/// Discretization allowance of a grid/time step pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBudget {
    /// Heat-sine L∞ error on the solution's grid with its time step.
    pub heat_sine_error: f64,
    /// `3 × heat_sine_error`, the allowance for values.
    pub values: f64,
    /// `2 × values / h`, the allowance for difference quotients.
    pub quotients: f64,
}

fn budget_cache() -> &'static Mutex<HashMap<(usize, u64, usize, u64, u64), ErrorBudget>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64, usize, u64, u64), ErrorBudget>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Runs the heat-sine problem `u₀ = Π sin(k x_i)`, `k = π/L`, on the
/// solution's box with the same spacing and step, to `min(0.5, T)`.
pub fn scheme_error_budget(sol: &GridSolution) -> Result<ErrorBudget> {
    let grid = &sol.grid;
    let t_end = sol.horizon.min(0.5);
    let key = (grid.dim, grid.half_width.to_bits(), grid.nodes_per_axis, sol.dt.to_bits(), t_end.to_bits());
    if let Some(b) = budget_cache().lock().expect("budget cache").get(&key) {
        return Ok(*b);
    }
    let dim = grid.dim;
    let heat = CoefficientField::new("heat", dim, 1.0, f64::INFINITY, move |_, _| SymMatrix::identity(dim))?;
    let dt = sol.dt.min(max_stable_dt(&[&heat], grid, 0.0)?);
    let k = std::f64::consts::PI / grid.half_width;
    let u0 = move |x: &Vector| x.iter().map(|xi| (k * xi).sin()).product::<f64>();
    let run = solve_linear(&heat, u0, t_end, grid, &SchemeConfig::new(dt).with_margin(0.0))?;
    let err = run.max_error(t_end, |x| heat_sine(1.0, k, t_end, x))?;
    let b = ErrorBudget {
        heat_sine_error: err,
        values: 3.0 * err,
        quotients: 2.0 * 3.0 * err / grid.h(),
    };
    budget_cache().lock().expect("budget cache").insert(key, b);
    Ok(b)
}

/// Per-snapshot seminorm series on the interior subgrid.
#[derive(Debug, Clone, Serialize)]
pub struct Profile {
    pub times: Vec<f64>,
    pub lip: Vec<f64>,
    /// Oscillation of `u` over `|x − y| ≤ 1`.
    pub osc_u: Vec<f64>,
    /// Oscillation of `h` over `|x − y| ≤ 1`.
    pub osc_h: Vec<f64>,
    pub sup_u: Vec<f64>,
    pub sup_h: Vec<f64>,
}

impl Profile {
    pub fn measure(sol: &GridSolution) -> Result<Self> {
        Self::measure_on(sol, &sol.interior()?)
    }

    pub fn measure_on(sol: &GridSolution, nodes: &[usize]) -> Result<Self> {
        let grid = &sol.grid;
        let mask = mask_of(grid, nodes);
        let lip_r = LIP_PAIR_CELLS * grid.h();
        let sup = |v: &[f64]| nodes.iter().map(|&k| v[k].abs()).fold(0.0, f64::max);
        let mut p = Profile {
            times: sol.times.clone(),
            lip: Vec::new(),
            osc_u: Vec::new(),
            osc_h: Vec::new(),
            sup_u: Vec::new(),
            sup_h: Vec::new(),
        };
        for (u, h) in sol.values.iter().zip(&sol.sources) {
            p.lip.push(pair_max(grid, u, &mask, lip_r, |du, d| du / d));
            p.osc_u.push(pair_max(grid, u, &mask, OSC_RADIUS, |du, _| du));
            p.osc_h.push(pair_max(grid, h, &mask, OSC_RADIUS, |du, _| du));
            p.sup_u.push(sup(u));
            p.sup_h.push(sup(h));
        }
        Ok(p)
    }

    /// Maximum of `series` over snapshots in `[t/2, min(T, 3t/2)]`.
    pub fn window_max(&self, series: &[f64], t: f64, horizon: f64) -> f64 {
        let (lo, hi) = (0.5 * t, horizon.min(1.5 * t));
        let eps = 1e-12 * t.max(1.0);
        self.times
            .iter()
            .zip(series)
            .filter(|(&s, _)| s >= lo - eps && s <= hi + eps)
            .map(|(_, &v)| v)
            .fold(0.0, f64::max)
    }
}

/// `lip(t) ≤ ĉ₁/√(t∧1)·ω(t,u) + ĉ₂√(t∧1)·ω(t,h)` with
/// `ĉ₁ = (1+2λ)/λ·E`, `ĉ₂ = E/(4λ)`, `E = exp(∫₀¹ g/(4λ))`.
pub fn verify_theorem_pw(sol: &GridSolution, g: &ModulusG, lambda: f64) -> Result<RegularityReport> {
    let (c1, c2) = sharp_constants(g, lambda)?;
    let budget = scheme_error_budget(sol)?;
    let prof = Profile::measure(sol)?;
    let mut rep = RegularityReport::new(
        "lipschitz-global",
        "lip(t) <= c1/sqrt(t^1) w(t,u) + c2 sqrt(t^1) w(t,h)",
        CheckMode::Absolute,
    );
    rep.constants.insert("c1".into(), c1);
    rep.constants.insert("c2".into(), c2);
    rep.constants.insert("lambda".into(), lambda);
    rep.constants.insert("quotient_budget".into(), budget.quotients);
    for (i, &t) in prof.times.iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        let s = t.min(1.0).sqrt();
        let wu = prof.window_max(&prof.osc_u, t, sol.horizon);
        let wh = prof.window_max(&prof.osc_h, t, sol.horizon);
        let bound = c1 / s * wu + c2 * s * wh;
        rep.rows.push(BoundRow::new(t, prof.lip[i], bound, budget.quotients));
    }
    rep.verdict = if rep.rows.iter().all(|r| r.pass) { Verdict::Pass } else { Verdict::Fail };
    Ok(rep)
}

/// Fits `C = max measured/shape` and fills the rows with `bound = C·shape`.
fn fit_shape(rep: &mut RegularityReport, rows: Vec<(f64, f64, f64)>) {
    let c = rows
        .iter()
        .filter(|(_, m, _)| *m > 0.0)
        .map(|(_, m, s)| m / s)
        .fold(0.0, f64::max);
    rep.fitted_constant = Some(c);
    rep.verdict = if c.is_finite() { Verdict::Consistent(c) } else { Verdict::Inconsistent };
    for (t, m, s) in rows {
        rep.rows.push(BoundRow::new(t, m, c * s, 0.0));
    }
}

/// Least-squares slope of `ln y` against `ln t` over points with `t, y > 0`.
pub fn log_log_slope(t: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(&t, &y)| t > 0.0 && y > 0.0)
        .map(|(t, y)| (t.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Gradient bound with a potential:
/// `lip(t) ≤ C₀{[1/√(t∧1) + √(t∧1)k₀ + k₁](‖u₀‖∞ + (T∧3t/2)‖h‖∞) + √(t∧1)‖h‖∞}`,
/// with `k₀, k₁` the potential constants audited by `check_potential` and `C₀` fitted.
pub fn verify_cauchy_bounds(sol: &GridSolution, k0: f64, k1: f64) -> Result<RegularityReport> {
    let prof = Profile::measure(sol)?;
    let u0_sup = sol.values[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let h_sup = sol.sources.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let mut rep = RegularityReport::new(
        "gradient-potential",
        "lip(t) <= C0 {[1/sqrt(t^1) + sqrt(t^1) k0 + k1](|u0| + (T^3t/2)|h|) + sqrt(t^1)|h|}",
        CheckMode::Shape,
    );
    rep.constants.insert("k0".into(), k0);
    rep.constants.insert("k1".into(), k1);
    rep.constants.insert("u0_sup".into(), u0_sup);
    rep.constants.insert("h_sup".into(), h_sup);
    let rows = prof
        .times
        .iter()
        .zip(&prof.lip)
        .filter(|(&t, _)| t > 0.0)
        .map(|(&t, &lip)| {
            let s = t.min(1.0).sqrt();
            let shape = (1.0 / s + s * k0 + k1) * (u0_sup + sol.horizon.min(1.5 * t) * h_sup) + s * h_sup;
            (t, lip, shape)
        })
        .collect();
    fit_shape(&mut rep, rows);
    rep.slope = log_log_slope(&prof.times, &prof.lip);
    Ok(rep)
}

/// Oscillation constants of the data:
/// `|u₀(x)−u₀(y)| ≤ k₀ + k_α|x−y|^α + k₁|x−y|`, same for `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConstants {
    pub k0: f64,
    pub k_alpha: f64,
    pub k1: f64,
    #[serde(default)]
    pub h0: f64,
    #[serde(default)]
    pub h_alpha: f64,
    #[serde(default)]
    pub h1: f64,
    pub alpha: f64,
}

/// Two checks of the growth theorem:
/// oscillation conservation `|u(t,x)−u(t,y)| ≤ k₀ + (K + L M t) r^α + (k₁ + M t(h₁+k₁)) r`
/// with `M` fitted, and the Lipschitz shape
/// `lip(t) ≤ c{k₀/√(t∧1) + k_α/(t∧1)^{(1−α)/2} + k₁ + √(t∧1)(h₀ + h_α(t∧1)^{α/2} + h₁√(t∧1))}`
/// with `c` fitted and the log-log slope reported.
pub fn verify_growth_bound(sol: &GridSolution, c: &GrowthConstants, lambda: f64) -> Result<(RegularityReport, RegularityReport)> {
    let prof = Profile::measure(sol)?;
    let grid = &sol.grid;
    let mask = mask_of(grid, &sol.interior()?);
    let a = c.alpha;
    let k_cap = if c.h0 > 0.0 {
        (c.h0 / (2.0 * a * lambda * (1.0 - a))).max(c.k_alpha).max(c.k1)
    } else {
        c.k_alpha.max(c.k1)
    };
    let l_cap = [c.h0, c.h_alpha, c.h1, c.k_alpha, c.k1].into_iter().fold(0.0, f64::max);

    let mut osc = RegularityReport::new(
        "oscillation-growth",
        "|u(t,x)-u(t,y)| <= k0 + (K + L M t) r^a + (k1 + M t (h1 + k1)) r",
        CheckMode::Shape,
    );
    osc.constants.insert("K".into(), k_cap);
    osc.constants.insert("L".into(), l_cap);
    // rows: measured = largest excess over the t = 0 structure, shape = its t-proportional part at r = 1
    let mut m_fit: f64 = 0.0;
    let mut rows = Vec::new();
    for (i, &t) in sol.times.iter().enumerate() {
        let u = &sol.values[i];
        let excess = pair_max(grid, u, &mask, OSC_RADIUS, |du, r| {
            (du - c.k0 - k_cap * r.powf(a) - c.k1 * r).max(0.0)
        });
        if t > 0.0 {
            let slope = pair_max(grid, u, &mask, OSC_RADIUS, |du, r| {
                let e = du - c.k0 - k_cap * r.powf(a) - c.k1 * r;
                if e <= 0.0 {
                    0.0
                } else {
                    e / (t * (l_cap * r.powf(a) + (c.h1 + c.k1) * r))
                }
            });
            m_fit = m_fit.max(slope);
        }
        rows.push((t, excess));
    }
    osc.fitted_constant = Some(m_fit);
    osc.verdict = if m_fit.is_finite() { Verdict::Consistent(m_fit) } else { Verdict::Inconsistent };
    for (t, excess) in rows {
        osc.rows.push(BoundRow::new(t, excess, m_fit * t * (l_cap + c.h1 + c.k1), 0.0));
    }

    let mut lip = RegularityReport::new(
        "lipschitz-growth",
        "lip(t) <= c {k0/sqrt(t^1) + ka/(t^1)^((1-a)/2) + k1 + sqrt(t^1)(h0 + ha (t^1)^(a/2) + h1 sqrt(t^1))}",
        CheckMode::Shape,
    );
    let rows = prof
        .times
        .iter()
        .zip(&prof.lip)
        .filter(|(&t, _)| t > 0.0)
        .map(|(&t, &m)| {
            let tt = t.min(1.0);
            let s = tt.sqrt();
            let shape = c.k0 / s + c.k_alpha / tt.powf(0.5 - 0.5 * a) + c.k1 + s * (c.h0 + c.h_alpha * tt.powf(0.5 * a) + c.h1 * s);
            (t, m, shape)
        })
        .collect();
    fit_shape(&mut lip, rows);
    lip.slope = log_log_slope(&prof.times, &prof.lip);
    lip.constants.insert("predicted_slope".into(), -(1.0 - a) / 2.0);
    Ok((osc, lip))
}

/// `[u(t)]_α ≤ c̃/(λα(1−α))·(ω(t,u)/(t∧1)^{α/2} + (t∧1)^{1−α/2}ω(t,h))`, `c̃` fitted.
pub fn verify_holder_bound(sol: &GridSolution, alpha: f64, lambda: f64) -> Result<RegularityReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            expected: "(0, 1)".into(),
        });
    }
    let prof = Profile::measure(sol)?;
    let grid = &sol.grid;
    let mask = mask_of(grid, &sol.interior()?);
    let mut rep = RegularityReport::new(
        "holder-global",
        "[u(t)]_a <= c/(lambda a (1-a)) (w(t,u)/(t^1)^(a/2) + (t^1)^(1-a/2) w(t,h))",
        CheckMode::Shape,
    );
    rep.constants.insert("alpha".into(), alpha);
    rep.constants.insert("lambda".into(), lambda);
    let pre = 1.0 / (lambda * alpha * (1.0 - alpha));
    let rows = sol
        .times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 0.0)
        .map(|(i, &t)| {
            let holder = pair_max(grid, &sol.values[i], &mask, OSC_RADIUS, |du, r| du / r.powf(alpha));
            let tt = t.min(1.0);
            let wu = prof.window_max(&prof.osc_u, t, sol.horizon);
            let wh = prof.window_max(&prof.osc_h, t, sol.horizon);
            (t, holder, pre * (wu / tt.powf(0.5 * alpha) + tt.powf(1.0 - 0.5 * alpha) * wh))
        })
        .collect();
    fit_shape(&mut rep, rows);
    Ok(rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaScan {
    /// `(α, c̃ coarse, c̃ fine, stable)`.
    pub rows: Vec<(f64, f64, f64, bool)>,
    pub largest_stable: Option<f64>,
}

/// Largest `α` whose fitted Hölder constant agrees within ±20% on two resolutions.
pub fn largest_stable_alpha(coarse: &GridSolution, fine: &GridSolution, lambda: f64, alphas: &[f64]) -> Result<AlphaScan> {
    let mut rows = Vec::new();
    let mut largest = None;
    for &a in alphas {
        let c0 = verify_holder_bound(coarse, a, lambda)?.fitted_constant.unwrap_or(f64::INFINITY);
        let c1 = verify_holder_bound(fine, a, lambda)?.fitted_constant.unwrap_or(f64::INFINITY);
        let stable = c0.is_finite() && c1.is_finite() && c0 > 0.0 && (c1 / c0 - 1.0).abs() <= STABILITY_TOL;
        if stable {
            largest = Some(largest.map_or(a, |b: f64| b.max(a)));
        }
        rows.push((a, c0, c1, stable));
    }
    Ok(AlphaScan {
        rows,
        largest_stable: largest,
    })
}

/// `lip over B_R(x₀) ≤ M₀/√(t∧1)`, `M₀` fitted; needs `B_{2R}(x₀)` inside the measured box.
pub fn verify_local_bound(sol: &GridSolution, center: &Vector, radius: f64) -> Result<RegularityReport> {
    let grid = &sol.grid;
    if center.dim() != grid.dim {
        return Err(Error::Dimension {
            expected: grid.dim,
            got: center.dim(),
        });
    }
    let inner = grid.half_width - sol.margin;
    if !(radius > 0.0) || center.iter().any(|c| c.abs() + 2.0 * radius > inner + 1e-12) {
        return Err(Error::BallOutsideGrid {
            center: center.to_vec(),
            radius,
        });
    }
    let nodes: Vec<usize> = (0..grid.len())
        .filter(|&k| (grid.coord(k) - *center).norm() <= radius * (1.0 + 1e-12))
        .collect();
    let prof = Profile::measure_on(sol, &nodes)?;
    let mut rep = RegularityReport::new("lipschitz-local", "lip(t; B_R(x0)) <= M0/sqrt(t^1)", CheckMode::Shape);
    rep.constants.insert("radius".into(), radius);
    for (i, c) in center.iter().enumerate() {
        rep.constants.insert(format!("x0_{i}"), *c);
    }
    let ball_sup = prof.sup_u.iter().fold(0.0f64, |a, &b| a.max(b));
    rep.constants.insert("ball_sup_u".into(), ball_sup);
    let rows = prof
        .times
        .iter()
        .zip(&prof.lip)
        .filter(|(&t, _)| t > 0.0)
        .map(|(&t, &m)| (t, m, 1.0 / t.min(1.0).sqrt()))
        .collect();
    fit_shape(&mut rep, rows);
    Ok(rep)
}

/// `|a/b − 1| ≤ 20%`.
pub fn is_stable(a: f64, b: f64) -> bool {
    a.is_finite() && b.is_finite() && b != 0.0 && (a / b - 1.0).abs() <= STABILITY_TOL
}

