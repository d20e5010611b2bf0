//! Explicit monotone finite differences for
//! `∂_t u = tr(q D²u) + b·Du − V u + h` and its Isaacs counterpart
//! `∂_t u = h + sup_β inf_α {tr(q_{αβ} D²u) + b_{αβ}·Du − V_{αβ} u + f_{αβ}}`.
//!
//! Every operator is written in difference form `Σ_j w_j (u_j − u_i)` with
//! nonnegative weights, so one explicit step is a monotone map as soon as
//! `Δt (Σ_j w_j + V) ≤ 1`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::grid::Grid;
use super::solution::GridSolution;
use crate::error::{Error, Result};
use crate::math::linalg::Vector;
use crate::problem::{CoefficientField, IsaacsFamily};

/// Upper bound on `Δt·(2 max tr q/h² + max|b|₁/h + max V)`.
pub const CFL_LIMIT: f64 = 0.95;

/// Diagonal dominance is checked up to this relative slack.
const DOMINANCE_TOL: f64 = 1e-12;

/// Grids at least this large update nodes in parallel.
const PAR_THRESHOLD: usize = 4096;

pub type ExactFn = Arc<dyn Fn(f64, &Vector) -> f64 + Send + Sync>;

#[derive(Clone, Default)]
pub enum Boundary {
    /// Boundary nodes keep their initial values.
    #[default]
    FromDatum,
    /// Boundary nodes follow a supplied exact solution.
    Exact(ExactFn),
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::FromDatum => f.write_str("FromDatum"),
            Boundary::Exact(_) => f.write_str("Exact"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SchemeConfig {
    pub dt: f64,
    pub boundary: Boundary,
    /// Measurement margin; `None` picks `1 + √T·√(2 max tr q)`.
    pub margin: Option<f64>,
    /// Snapshot times in `(0, T]`; `T` and `0` are always recorded.
    pub snapshots: Vec<f64>,
}

impl SchemeConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            boundary: Boundary::FromDatum,
            margin: None,
            snapshots: Vec::new(),
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = Some(margin);
        self
    }

    pub fn with_snapshots(mut self, snapshots: Vec<f64>) -> Self {
        self.snapshots = snapshots;
        self
    }
}

/// Stencil of one linear operator on the interior nodes.
#[derive(Clone, Debug)]
struct Stencil {
    /// `w[k][s]` multiplies `u[nbr[k][s]] − u[node k]`.
    w: Vec<[f64; 8]>,
    v: Vec<f64>,
    h: Vec<f64>,
    /// `Σ_j w_j + V` maximized over nodes, and the CFL quantity.
    cfl_rate: f64,
}

/// Interior node list and neighbor table shared by all stencils on a grid.
#[derive(Clone, Debug)]
struct Layout {
    nodes: Vec<usize>,
    nbr: Vec<[usize; 8]>,
    slots: usize,
}

impl Layout {
    fn new(grid: &Grid) -> Self {
        let n = grid.nodes_per_axis;
        let nodes: Vec<usize> = (0..grid.len()).filter(|&k| !grid.is_boundary(k)).collect();
        let nbr = nodes
            .iter()
            .map(|&k| {
                let mut out = [k; 8];
                if grid.dim == 1 {
                    out[0] = k - 1;
                    out[1] = k + 1;
                } else {
                    // slots: x−, x+, y−, y+, (+,+), (−,−), (+,−), (−,+)
                    out[0] = k - n;
                    out[1] = k + n;
                    out[2] = k - 1;
                    out[3] = k + 1;
                    out[4] = k + n + 1;
                    out[5] = k - n - 1;
                    out[6] = k + n - 1;
                    out[7] = k - n + 1;
                }
                out
            })
            .collect();
        Self {
            nodes,
            nbr,
            slots: if grid.dim == 1 { 2 } else { 8 },
        }
    }
}

fn build_stencil(field: &CoefficientField, t: f64, grid: &Grid, layout: &Layout) -> Result<Stencil> {
    let h = grid.h();
    let h2 = h * h;
    let mut w = Vec::with_capacity(layout.nodes.len());
    let mut v = Vec::with_capacity(layout.nodes.len());
    let mut src = Vec::with_capacity(layout.nodes.len());
    let mut max_tr: f64 = 0.0;
    let mut max_b: f64 = 0.0;
    let mut max_v: f64 = 0.0;
    for &k in &layout.nodes {
        let x = grid.coord(k);
        let q = field.q(t, &x);
        let b = field.b(t, &x);
        let mut row = [0.0; 8];
        if grid.dim == 1 {
            let q11 = q.get(0, 0);
            if q11 < 0.0 {
                return Err(Error::NonMonotoneStencil {
                    x: x.to_vec(),
                    q: vec![q11],
                });
            }
            row[0] = q11 / h2 + (-b[0]).max(0.0) / h;
            row[1] = q11 / h2 + b[0].max(0.0) / h;
        } else {
            let (q11, q12, q22) = (q.get(0, 0), q.get(0, 1), q.get(1, 1));
            let c = q12.abs();
            let slack = DOMINANCE_TOL * q11.abs().max(q22.abs()).max(1.0);
            if q11 - c < -slack || q22 - c < -slack {
                return Err(Error::NonMonotoneStencil {
                    x: x.to_vec(),
                    q: vec![q11, q12, q12, q22],
                });
            }
            let ax = (q11 - c).max(0.0) / h2;
            let ay = (q22 - c).max(0.0) / h2;
            row[0] = ax + (-b[0]).max(0.0) / h;
            row[1] = ax + b[0].max(0.0) / h;
            row[2] = ay + (-b[1]).max(0.0) / h;
            row[3] = ay + b[1].max(0.0) / h;
            let d = c / h2;
            if q12 >= 0.0 {
                row[4] = d;
                row[5] = d;
            } else {
                row[6] = d;
                row[7] = d;
            }
        }
        max_tr = max_tr.max(q.trace());
        max_b = max_b.max(b.iter().map(|c| c.abs()).sum());
        let vk = field.v(t, &x);
        max_v = max_v.max(vk);
        w.push(row);
        v.push(vk);
        src.push(field.h(t, &x));
    }
    Ok(Stencil {
        w,
        v,
        h: src,
        cfl_rate: 2.0 * max_tr / h2 + max_b / h + max_v,
    })
}

/// Largest admissible step for the given fields at time `t` on `grid`.
pub fn max_stable_dt(fields: &[&CoefficientField], grid: &Grid, t: f64) -> Result<f64> {
    let layout = Layout::new(grid);
    let mut rate: f64 = 0.0;
    for f in fields {
        rate = rate.max(build_stencil(f, t, grid, &layout)?.cfl_rate);
    }
    Ok(if rate > 0.0 { CFL_LIMIT / rate } else { f64::INFINITY })
}

/// `1 + √T·√(2 max tr q)` over the box, maximized over the given fields.
pub fn default_margin(fields: &[&CoefficientField], grid: &Grid, horizon: f64) -> f64 {
    let mut max_tr: f64 = 0.0;
    for k in 0..grid.len() {
        let x = grid.coord(k);
        for f in fields {
            max_tr = max_tr.max(f.q(0.0, &x).trace());
            if !f.is_time_independent() {
                max_tr = max_tr.max(f.q(horizon, &x).trace());
            }
        }
    }
    1.0 + horizon.sqrt() * (2.0 * max_tr).sqrt()
}

#[derive(Clone, Debug)]
enum Operator {
    Linear(CoefficientField),
    Isaacs(IsaacsFamily),
}

impl Operator {
    fn fields(&self) -> Vec<&CoefficientField> {
        match self {
            Operator::Linear(f) => vec![f],
            Operator::Isaacs(f) => f.members().iter().collect(),
        }
    }

    fn is_time_independent(&self) -> bool {
        match self {
            Operator::Linear(f) => f.is_time_independent(),
            Operator::Isaacs(f) => f.is_time_independent(),
        }
    }

    fn descriptor(&self) -> String {
        match self {
            Operator::Linear(f) => format!("linear:{}", f.name()),
            Operator::Isaacs(f) => format!("isaacs:{}", f.name()),
        }
    }

    /// Right-hand side `h` of the equation at the nodes (for oscillation of the data).
    fn source_at(&self, t: f64, x: &Vector) -> f64 {
        match self {
            Operator::Linear(f) => f.h(t, x),
            Operator::Isaacs(f) => f.source(t, x),
        }
    }
}

/// Explicit time stepper; exposes the state for per-step comparisons.
#[derive(Clone, Debug)]
pub struct Stepper {
    op: Operator,
    grid: Grid,
    layout: Layout,
    boundary: Boundary,
    u: Vec<f64>,
    next: Vec<f64>,
    t: f64,
    cached: Option<Vec<Stencil>>,
    steps: usize,
}

impl Stepper {
    pub fn linear(field: &CoefficientField, u0: impl Fn(&Vector) -> f64, grid: &Grid, boundary: Boundary) -> Result<Self> {
        Self::build(Operator::Linear(field.clone()), u0, grid, boundary)
    }

    pub fn isaacs(family: &IsaacsFamily, u0: impl Fn(&Vector) -> f64, grid: &Grid, boundary: Boundary) -> Result<Self> {
        Self::build(Operator::Isaacs(family.clone()), u0, grid, boundary)
    }

    fn build(op: Operator, u0: impl Fn(&Vector) -> f64, grid: &Grid, boundary: Boundary) -> Result<Self> {
        let dim = op.fields()[0].dim();
        if dim != grid.dim {
            return Err(Error::Dimension { expected: grid.dim, got: dim });
        }
        let u: Vec<f64> = (0..grid.len()).map(|k| u0(&grid.coord(k))).collect();
        if let Some(k) = u.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("initial datum is not finite at {:?}", grid.coord(k).to_vec())));
        }
        let layout = Layout::new(grid);
        let mut s = Self {
            next: u.clone(),
            u,
            op,
            grid: grid.clone(),
            layout,
            boundary,
            t: 0.0,
            cached: None,
            steps: 0,
        };
        if s.op.is_time_independent() {
            s.cached = Some(s.stencils(0.0)?);
        }
        s.apply_boundary(0.0, true);
        Ok(s)
    }

    fn stencils(&self, t: f64) -> Result<Vec<Stencil>> {
        self.op
            .fields()
            .into_iter()
            .map(|f| build_stencil(f, t, &self.grid, &self.layout))
            .collect()
    }

    fn apply_boundary(&mut self, t: f64, current: bool) {
        if let Boundary::Exact(exact) = &self.boundary {
            let target = if current { &mut self.u } else { &mut self.next };
            for k in 0..self.grid.len() {
                if self.grid.is_boundary(k) {
                    target[k] = exact(t, &self.grid.coord(k));
                }
            }
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `Δt` times the CFL rate at the current time.
    pub fn cfl_number(&self, dt: f64) -> Result<f64> {
        let rate = match &self.cached {
            Some(st) => st.iter().map(|s| s.cfl_rate).fold(0.0, f64::max),
            None => self.stencils(self.t)?.iter().map(|s| s.cfl_rate).fold(0.0, f64::max),
        };
        Ok(dt * rate)
    }

    /// One explicit step of length `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let fresh;
        let stencils: &[Stencil] = match &self.cached {
            Some(s) => s,
            None => {
                fresh = self.stencils(self.t)?;
                &fresh
            }
        };
        let rate = stencils.iter().map(|s| s.cfl_rate).fold(0.0, f64::max);
        if dt * rate > CFL_LIMIT * (1.0 + 1e-12) {
            return Err(Error::CflViolation {
                t: self.t,
                value: dt * rate,
                limit: CFL_LIMIT,
            });
        }
        let u = &self.u;
        let nbr = &self.layout.nbr;
        let slots = self.layout.slots;
        let grid = &self.grid;
        let nodes = &self.layout.nodes;
        let t = self.t;
        let update: Box<dyn Fn(usize) -> f64 + Sync + '_> = match &self.op {
            Operator::Linear(_) => {
                let s = &stencils[0];
                Box::new(move |i: usize| {
                    let k = nodes[i];
                    let ui = u[k];
                    let lu = diff_sum(&s.w[i], &nbr[i], slots, u, ui);
                    ui + dt * (lu - s.v[i] * ui + s.h[i])
                })
            }
            Operator::Isaacs(fam) => {
                let (na, nb) = (fam.n_alpha(), fam.n_beta());
                Box::new(move |i: usize| {
                    let k = nodes[i];
                    let ui = u[k];
                    let mut sup = f64::NEG_INFINITY;
                    for beta in 0..nb {
                        let mut inf = f64::INFINITY;
                        for alpha in 0..na {
                            let s = &stencils[alpha * nb + beta];
                            let lu = diff_sum(&s.w[i], &nbr[i], slots, u, ui);
                            inf = inf.min(lu - s.v[i] * ui + s.h[i]);
                        }
                        sup = sup.max(inf);
                    }
                    let hf = if fam.has_source() { fam.source(t, &grid.coord(k)) } else { 0.0 };
                    ui + dt * (hf + sup)
                })
            }
        };
        let n = self.layout.nodes.len();
        let new_vals: Vec<f64> = if grid.len() >= PAR_THRESHOLD {
            (0..n).into_par_iter().map(&update).collect()
        } else {
            (0..n).map(&update).collect()
        };
        drop(update);
        for (i, &k) in self.layout.nodes.iter().enumerate() {
            self.next[k] = new_vals[i];
        }
        self.apply_boundary(t + dt, false);
        std::mem::swap(&mut self.u, &mut self.next);
        if let Some(k) = self.layout.nodes.iter().find(|&&k| !self.u[k].is_finite()) {
            return Err(Error::Invalid(format!("non-finite value at node {k} after step to t = {}", t + dt)));
        }
        self.t = t + dt;
        self.steps += 1;
        Ok(())
    }

    /// Steps of equal length `≤ dt` landing exactly on `target`.
    pub fn advance_to(&mut self, target: f64, dt: f64) -> Result<()> {
        let start = self.t;
        let span = target - start;
        if span <= 0.0 {
            return Ok(());
        }
        let n = (span / dt - 1e-9).ceil().max(1.0) as usize;
        let sub = span / n as f64;
        for j in 1..=n {
            self.step(sub)?;
            // re-anchor to avoid drift of the accumulated time
            self.t = if j == n { target } else { start + j as f64 * sub };
        }
        Ok(())
    }

    fn sources(&self, t: f64) -> Vec<f64> {
        (0..self.grid.len()).map(|k| self.op.source_at(t, &self.grid.coord(k))).collect()
    }
}

#[inline]
fn diff_sum(w: &[f64; 8], nbr: &[usize; 8], slots: usize, u: &[f64], ui: f64) -> f64 {
    let mut acc = 0.0;
    for s in 0..slots {
        acc += w[s] * (u[nbr[s]] - ui);
    }
    acc
}

fn snapshot_times(scheme: &SchemeConfig, horizon: f64) -> Result<Vec<f64>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain {
            name: "T",
            value: horizon,
            expected: "(0, ∞)".into(),
        });
    }
    if !(scheme.dt > 0.0 && scheme.dt.is_finite()) {
        return Err(Error::Domain {
            name: "dt",
            value: scheme.dt,
            expected: "(0, ∞)".into(),
        });
    }
    let mut times: Vec<f64> = scheme.snapshots.iter().copied().filter(|&s| s > 0.0 && s < horizon).collect();
    if let Some(bad) = scheme.snapshots.iter().find(|&&s| !(0.0..=horizon).contains(&s)) {
        return Err(Error::Domain {
            name: "snapshot",
            value: *bad,
            expected: format!("[0, {horizon}]"),
        });
    }
    times.push(0.0);
    times.push(horizon);
    times.sort_by(f64::total_cmp);
    times.dedup();
    Ok(times)
}

fn run(mut stepper: Stepper, horizon: f64, scheme: &SchemeConfig) -> Result<GridSolution> {
    let times = snapshot_times(scheme, horizon)?;
    let fields = stepper.op.fields();
    let margin = match scheme.margin {
        Some(m) => m,
        None => default_margin(&fields, &stepper.grid, horizon),
    };
    let lambda = fields[0].lambda();
    let descriptor = stepper.op.descriptor();
    let mut values = Vec::with_capacity(times.len());
    let mut sources = Vec::with_capacity(times.len());
    for &t in &times {
        stepper.advance_to(t, scheme.dt)?;
        values.push(stepper.u.clone());
        sources.push(stepper.sources(t));
    }
    Ok(GridSolution {
        grid: stepper.grid.clone(),
        times,
        values,
        sources,
        descriptor,
        lambda,
        dt: scheme.dt,
        margin,
        horizon,
        boundary_exact: matches!(scheme.boundary, Boundary::Exact(_)),
    })
}

pub fn solve_linear(
    field: &CoefficientField,
    u0: impl Fn(&Vector) -> f64,
    horizon: f64,
    grid: &Grid,
    scheme: &SchemeConfig,
) -> Result<GridSolution> {
    run(Stepper::linear(field, u0, grid, scheme.boundary.clone())?, horizon, scheme)
}

pub fn solve_isaacs(
    family: &IsaacsFamily,
    u0: impl Fn(&Vector) -> f64,
    horizon: f64,
    grid: &Grid,
    scheme: &SchemeConfig,
) -> Result<GridSolution> {
    run(Stepper::isaacs(family, u0, grid, scheme.boundary.clone())?, horizon, scheme)
}
