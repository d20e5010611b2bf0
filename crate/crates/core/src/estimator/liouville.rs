//! Liouville diagnostics: classification of `g` at infinity, the decay of
//! `f_δ(r)/f_δ(δ)` as `δ → ∞`, and an optional long-run oscillation decay.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::aux::AuxFunction;
use crate::math::modulus::ModulusG;
use crate::problem::{check_g_asymptotics, GAsymptotics, Problem};
use crate::solver::{max_stable_dt, solve_isaacs, solve_linear, Datum, Grid, GridSolution, SchemeConfig};

pub const LIOUVILLE_DELTAS: [f64; 4] = [10.0, 100.0, 1000.0, 10000.0];

#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub delta: f64,
    /// `f_δ(r)/f_δ(δ)`.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct LongRun {
    pub datum: Datum,
    pub grid: Grid,
    pub horizon: f64,
    pub snapshots: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiouvilleReport {
    pub asymptotics: GAsymptotics,
    /// Bounded solutions of the stationary equation are constant.
    pub bounded_class: bool,
    /// Solutions with `α`-Hölder growth are constant.
    pub holder_class: bool,
    pub r: f64,
    pub ratios: Vec<RatioRow>,
    pub ratio_decreasing: bool,
    /// `(t, max u − min u)` over the whole grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub long_run: Option<Vec<(f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub long_run_decay: Option<f64>,
}

/// `f_δ(r)/f_δ(δ)` for each `δ`.
pub fn aux_ratios(g: &ModulusG, lambda: f64, r: f64, deltas: &[f64]) -> Result<Vec<RatioRow>> {
    deltas
        .iter()
        .map(|&delta| {
            let aux = AuxFunction::new(g, lambda, delta)?;
            Ok(RatioRow {
                delta,
                ratio: aux.f(r)? / aux.f_delta(),
            })
        })
        .collect()
}

fn spread(u: &[f64]) -> f64 {
    let (lo, hi) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    hi - lo
}

pub fn liouville_diagnose(
    problem: &Problem,
    g: &ModulusG,
    lambda: f64,
    alpha: f64,
    r: f64,
    long_run: Option<&LongRun>,
) -> Result<LiouvilleReport> {
    if !problem.is_time_independent() {
        return Err(Error::PreconditionFailed("Liouville diagnostics need time-independent coefficients".into()));
    }
    let asymptotics = check_g_asymptotics(g, lambda, alpha)?;
    let ratios = aux_ratios(g, lambda, r, &LIOUVILLE_DELTAS)?;
    let ratio_decreasing = ratios.windows(2).all(|w| w[1].ratio < w[0].ratio);
    let (series, decay) = match long_run {
        Some(run) => {
            let sol = run_long(problem, run)?;
            let series: Vec<(f64, f64)> = sol.times.iter().zip(&sol.values).map(|(&t, u)| (t, spread(u))).collect();
            let decay = series.last().expect("nonempty").1 / series[0].1;
            (Some(series), Some(decay))
        }
        None => (None, None),
    };
    Ok(LiouvilleReport {
        bounded_class: asymptotics.liouville_bounded,
        holder_class: asymptotics.liouville_holder,
        asymptotics,
        r,
        ratios,
        ratio_decreasing,
        long_run: series,
        long_run_decay: decay,
    })
}

fn run_long(problem: &Problem, run: &LongRun) -> Result<GridSolution> {
    let dt = 0.9 * max_stable_dt(&problem.fields(), &run.grid, 0.0)?;
    let n = run.snapshots.max(1);
    let snaps = (1..=n).map(|i| run.horizon * i as f64 / n as f64).collect();
    // whole-grid oscillation: the default margin would swallow a bounded box at long horizons
    let scheme = SchemeConfig::new(dt).with_margin(0.0).with_snapshots(snaps);
    let u0 = |x: &crate::math::Vector| run.datum.eval(x);
    match problem {
        Problem::Linear(f) => solve_linear(f, u0, run.horizon, &run.grid, &scheme),
        Problem::Isaacs(f) => solve_isaacs(f, u0, run.horizon, &run.grid, &scheme),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_ratio_closed_form() {
        // (δr − r²/2)/(δ²/2)
        let rows = aux_ratios(&ModulusG::zero(), 1.0, 1.0, &LIOUVILLE_DELTAS).unwrap();
        for row in rows {
            let d = row.delta;
            let exact = (d - 0.5) / (0.5 * d * d);
            assert!((row.ratio - exact).abs() <= 1e-8 * exact, "{} vs {exact}", row.ratio);
        }
    }
}
