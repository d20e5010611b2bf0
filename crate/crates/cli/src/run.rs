//! One runner per module. Runners never print; they return a JSON report,
//! the absolute checks that decide the exit status, and CSV artifacts.

use anyhow::{anyhow, bail, Context as _, Result};
use reglab_core::coupling::{coupling_probability, mc_solution, CouplingConfig};
use reglab_core::estimator::{
    liouville_diagnose, verify_cauchy_bounds, verify_growth_bound, verify_holder_bound, verify_local_bound,
    verify_theorem_pw, CheckMode, LongRun, RegularityReport,
};
use reglab_core::math::{aux_bounds_check, ode_residual, AuxFunction, ModulusG, Vector};
use reglab_core::problem::{
    check_g_asymptotics, check_lyapunov_quadratic, check_potential, check_pw, fixture, AuditReport, Fixture, Problem,
    SampleRange,
};
use reglab_core::solver::{
    exact_oracle, max_stable_dt, solve_isaacs, solve_linear, Grid, GridSolution, SchemeConfig,
};
use serde::Serialize;
use serde_json::{json, Value};
use statrs::function::erf::erf;

use crate::config::{BoundKind, ExperimentConfig, Module, SolveSection};

/// Bound margins from the profile checks must be at least this.
const AUX_TOL: f64 = 1e-9;
const ODE_TOL: f64 = 1e-6;
const MAX_PRINCIPLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Default)]
pub struct ModuleOutput {
    pub report: Value,
    pub checks: Vec<Check>,
    /// `(file name, contents)`.
    pub csvs: Vec<(String, String)>,
}

pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub seed: u64,
    fixture: Fixture,
    solution: Option<GridSolution>,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a ExperimentConfig, seed: u64) -> Result<Self> {
        let fixture = fixture(&cfg.fixture, cfg.dim).with_context(|| format!("config key `fixture` = {:?}", cfg.fixture))?;
        Ok(Self {
            cfg,
            seed,
            fixture,
            solution: None,
        })
    }

    pub fn run(&mut self, m: Module) -> Result<ModuleOutput> {
        match m {
            Module::Audit => self.audit(),
            Module::Solve => self.solve(),
            Module::Verify => self.verify(),
            Module::Couple => self.couple(),
            Module::Liouville => self.liouville(),
            Module::Aux => self.aux(),
        }
    }

    fn lambda(&self) -> f64 {
        self.fixture.problem.lambda()
    }

    fn modulus(&self, spec: Option<&reglab_core::math::ModulusSpec>) -> Result<ModulusG> {
        Ok(match spec {
            Some(s) => s.build()?,
            None => self.fixture.g.clone(),
        })
    }

    fn audit(&mut self) -> Result<ModuleOutput> {
        let sec = self.cfg.audit.as_ref().ok_or_else(|| anyhow!("config has no `audit` section"))?;
        let g = self.modulus(sec.g.as_ref())?;
        let range = SampleRange::cube(self.cfg.dim, sec.half_width, sec.horizon);
        let mut audits = Vec::new();
        for f in self.fixture.problem.fields() {
            audits.push(check_pw(f, &g, &range, sec.samples, false, self.seed));
            audits.push(check_lyapunov_quadratic(f, &range, sec.samples, self.seed));
        }
        let asymptotics = check_g_asymptotics(&g, self.lambda().max(f64::MIN_POSITIVE), 0.5).ok();
        let pw_pass = audits.iter().step_by(2).all(|a| a.pass);
        let expected = self.fixture.expect_pw;
        let checks = vec![Check::new(
            "modulus condition matches fixture expectation",
            pw_pass == expected,
            format!("audit {} (expected {})", pass_word(pw_pass), pass_word(expected)),
        )];
        let mut csv = String::from("hypothesis,pass,max_violation,fitted_constant,n_samples\n");
        for a in &audits {
            csv.push_str(&format!(
                "\"{}\",{},{},{},{}\n",
                a.hypothesis,
                a.pass,
                a.max_violation,
                a.fitted_constant.map(|c| c.to_string()).unwrap_or_default(),
                a.n_samples
            ));
        }
        Ok(ModuleOutput {
            report: json!({
                "fixture": self.fixture.info(),
                "audits": audits,
                "g_asymptotics": asymptotics,
            }),
            checks,
            csvs: vec![("audit.csv".into(), csv)],
        })
    }

    fn solution(&mut self) -> Result<&GridSolution> {
        if self.solution.is_none() {
            let sec = self.cfg.solve.as_ref().ok_or_else(|| anyhow!("config has no `solve` section"))?;
            self.solution = Some(solve_fixture(&self.fixture, self.cfg.dim, sec)?);
        }
        Ok(self.solution.as_ref().unwrap())
    }

    fn solve(&mut self) -> Result<ModuleOutput> {
        let sec = self.cfg.solve.clone().ok_or_else(|| anyhow!("config has no `solve` section"))?;
        let has_source = self.fixture.problem.fields().iter().any(|f| f.has_source());
        let sol = self.solution()?;
        let mut checks = Vec::new();
        let mut report = json!({
            "grid": { "dim": sol.grid.dim, "half_width": sol.grid.half_width, "nodes_per_axis": sol.grid.nodes_per_axis },
            "dt": sol.dt,
            "margin": sol.margin,
            "horizon": sol.horizon,
            "snapshots": sol.times,
        });
        if !has_source {
            // monotone scheme without source: |u| never exceeds max |u₀|
            let u0_max = sol.values[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
            let u_max = sol.values.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
            checks.push(Check::new(
                "discrete maximum principle",
                u_max <= u0_max + MAX_PRINCIPLE_TOL,
                format!("max |u| = {u_max}, max |u0| = {u0_max}"),
            ));
        }
        if let Some(o) = &sec.oracle {
            let err = sol.max_error(sol.horizon, |x| exact_oracle(&o.kind, &o.params, sol.horizon, x).unwrap_or(f64::NAN))?;
            checks.push(Check::new(
                format!("{} oracle error at t = {}", o.kind, sol.horizon),
                err <= o.tolerance,
                format!("max error {err} (tolerance {})", o.tolerance),
            ));
            report["oracle_error"] = json!(err);
        }
        Ok(ModuleOutput {
            report,
            checks,
            csvs: vec![("solution.csv".into(), sol.to_csv())],
        })
    }

    fn verify(&mut self) -> Result<ModuleOutput> {
        let sec = self.cfg.verify.clone().ok_or_else(|| anyhow!("config has no `verify` section"))?;
        let g = self.modulus(sec.g.as_ref())?;
        let lambda = self.lambda();
        let seed = self.seed;
        let fields: Vec<_> = self.fixture.problem.fields().into_iter().cloned().collect();
        let sol = self.solution()?.clone();
        let inner = sol.grid.half_width - sol.margin;
        let range = SampleRange::cube(sol.grid.dim, inner.max(0.0), sol.horizon);
        let pw_audits = || -> Vec<AuditReport> { fields.iter().map(|f| check_pw(f, &g, &range, sec.audit_samples, false, seed)).collect() };
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| anyhow!("config key `verify.{key}` is required for this bound"));
        let reports: Vec<RegularityReport> = match sec.bound {
            BoundKind::Pw => vec![verify_theorem_pw(&sol, &g, lambda)?.with_hypotheses(pw_audits())],
            BoundKind::Holder => {
                vec![verify_holder_bound(&sol, need(sec.alpha, "alpha")?, lambda)?.with_hypotheses(pw_audits())]
            }
            BoundKind::Cauchy => {
                let (k0, k1) = (need(sec.k0, "k0")?, need(sec.k1, "k1")?);
                let mut hyps = pw_audits();
                for f in &fields {
                    hyps.push(check_potential(|t, x| f.v(t, x), k0, k1, sec.alpha.unwrap_or(1.0), &range, sec.audit_samples, seed));
                }
                vec![verify_cauchy_bounds(&sol, k0, k1)?.with_hypotheses(hyps)]
            }
            BoundKind::Growth => {
                let c = sec.growth.ok_or_else(|| anyhow!("config key `verify.growth` is required for this bound"))?;
                let mut hyps = pw_audits();
                hyps.extend(fields.iter().map(|f| check_lyapunov_quadratic(f, &range, sec.audit_samples, seed)));
                let (osc, lip) = verify_growth_bound(&sol, &c, lambda)?;
                vec![osc.with_hypotheses(hyps.clone()), lip.with_hypotheses(hyps)]
            }
            BoundKind::Local => {
                let center = sec.center.ok_or_else(|| anyhow!("config key `verify.center` is required for this bound"))?;
                vec![verify_local_bound(&sol, &center, need(sec.radius, "radius")?)?.with_hypotheses(pw_audits())]
            }
        };
        let mut checks = Vec::new();
        let mut csvs = Vec::new();
        for r in &reports {
            if r.mode == CheckMode::Absolute {
                checks.push(Check::new(format!("{} bound", r.bound_id), !r.verdict.is_fail(), format!("verdict {}, min margin {}", r.verdict, r.min_margin())));
            }
            let mut buf = Vec::new();
            r.write_csv(&mut buf)?;
            csvs.push((format!("verify_{}.csv", r.bound_id), String::from_utf8(buf)?));
        }
        Ok(ModuleOutput {
            report: json!({ "reports": reports }),
            checks,
            csvs,
        })
    }

    fn couple(&mut self) -> Result<ModuleOutput> {
        let sec = self.cfg.couple.clone().ok_or_else(|| anyhow!("config has no `couple` section"))?;
        let field = self.fixture.field()?.clone();
        let mut cc = CouplingConfig::new(field, sec.x, sec.y, sec.horizon, sec.dt, sec.n_paths, self.seed)?;
        if let Some(l) = sec.lambda {
            cc.lambda = l;
        }
        cc.eps_couple = sec.eps_couple;
        cc.validate()?;
        let stats = coupling_probability(&cc, &sec.mesh)?;
        let mut checks = vec![Check::new(
            "survival nonincreasing in t",
            stats.rows.windows(2).all(|w| w[1].p_hat <= w[0].p_hat),
            "",
        )];
        let mut oracle_rows = Vec::new();
        if self.cfg.fixture == "heat" && self.cfg.dim == 1 {
            // X − Y is a Brownian motion of variance rate 8λ absorbed at 0
            for r in &stats.rows {
                let exact = erf(stats.distance / (4.0 * (cc.lambda * r.t).sqrt()));
                let ok = (r.p_hat - exact).abs() <= 3.0 * r.ci_half;
                oracle_rows.push(json!({ "t": r.t, "p_hat": r.p_hat, "exact": exact, "ci_half": r.ci_half, "pass": ok }));
                checks.push(Check::new(
                    format!("P(t < T_c) vs erf oracle at t = {}", r.t),
                    ok,
                    format!("p_hat {} exact {} half-width {}", r.p_hat, exact, r.ci_half),
                ));
            }
        }
        let mut report = json!({
            "distance": stats.distance,
            "eps_couple": stats.eps_couple,
            "dt": stats.dt,
            "lambda": cc.lambda,
            "rows": stats.rows,
            "fitted_k": stats.fitted_k,
            "coupled_paths": stats.coupling_times.len(),
            "qv_rate": stats.qv_rate,
            "qv_rate_expected": 8.0 * cc.lambda,
            "oracle": oracle_rows,
        });
        let mut csvs = Vec::new();
        let mut buf = Vec::new();
        stats.write_csv(&mut buf)?;
        csvs.push(("coupling.csv".into(), String::from_utf8(buf)?));
        if let Some(bins) = sec.histogram_bins {
            let mut buf = Vec::new();
            stats.write_histogram_csv(sec.horizon, bins, &mut buf)?;
            csvs.push(("coupling_times.csv".into(), String::from_utf8(buf)?));
        }
        if let Some(mc) = &sec.mc {
            let mut mcc = cc.clone();
            mcc.horizon = mc.t;
            mcc.n_paths = mc.n_paths.unwrap_or(cc.n_paths);
            let datum = mc.datum.clone();
            let est = mc_solution(&mcc, move |x: &Vector| datum.eval(x), mc.t)?;
            checks.push(Check::new(
                "coupling inequality |u(t,x)-u(t,y)| <= 2 sup|u0| P(t < T_c)",
                est.coupling_inequality,
                format!("difference {} bound {} ci {}", est.difference, est.coupling_bound, est.ci),
            ));
            checks.push(Check::new("coupled paths agree exactly", est.pathwise_equal_after_coupling, ""));
            report["mc"] = json!(est);
        }
        Ok(ModuleOutput { report, checks, csvs })
    }

    fn liouville(&mut self) -> Result<ModuleOutput> {
        let sec = self.cfg.liouville.clone().ok_or_else(|| anyhow!("config has no `liouville` section"))?;
        let g = sec.g.build()?;
        let long_run = match &sec.long_run {
            Some(l) => Some(LongRun {
                datum: l.datum.clone(),
                grid: Grid::new(self.cfg.dim, l.half_width, l.nodes)?,
                horizon: l.horizon,
                snapshots: l.snapshots,
            }),
            None => None,
        };
        let rep = liouville_diagnose(&self.fixture.problem, &g, self.lambda(), sec.alpha, sec.r, long_run.as_ref())?;
        let mut checks = Vec::new();
        if let Some(e) = sec.expect {
            checks.push(Check::new(
                "bounded-solution classification",
                rep.bounded_class == e.bounded,
                format!("got {} expected {}", rep.bounded_class, e.bounded),
            ));
            checks.push(Check::new(
                "Hölder-growth classification",
                rep.holder_class == e.holder,
                format!("got {} expected {}", rep.holder_class, e.holder),
            ));
        }
        if rep.bounded_class {
            let last = rep.ratios.last().map_or(f64::NAN, |r| r.ratio);
            checks.push(Check::new(
                "profile ratio f(r)/f(delta) decreases below 0.01",
                rep.ratio_decreasing && last < 0.01,
                format!("decreasing {} last {last}", rep.ratio_decreasing),
            ));
        }
        let mut csvs = vec![(
            "liouville_ratios.csv".to_string(),
            std::iter::once("delta,ratio\n".to_string())
                .chain(rep.ratios.iter().map(|r| format!("{},{}\n", r.delta, r.ratio)))
                .collect(),
        )];
        if let (Some(series), Some(decay), Some(l)) = (&rep.long_run, rep.long_run_decay, &sec.long_run) {
            checks.push(Check::new(
                "long-run oscillation decay",
                decay <= l.max_decay,
                format!("osc(u(T))/osc(u0) = {decay} (limit {})", l.max_decay),
            ));
            csvs.push((
                "liouville_long_run.csv".to_string(),
                std::iter::once("t,osc\n".to_string())
                    .chain(series.iter().map(|(t, o)| format!("{t},{o}\n")))
                    .collect(),
            ));
        }
        Ok(ModuleOutput {
            report: json!(rep),
            checks,
            csvs,
        })
    }

    fn aux(&mut self) -> Result<ModuleOutput> {
        let sec = self.cfg.aux.clone().ok_or_else(|| anyhow!("config has no `aux` section"))?;
        let mut rows = Vec::new();
        let mut checks = Vec::new();
        let mut csv = String::from("g,lambda,delta,r,f,f_prime,f_second\n");
        for spec in &sec.g {
            let g = spec.build()?;
            for &lambda in &sec.lambda {
                for &delta in &sec.delta {
                    let aux = AuxFunction::new(&g, lambda, delta)?;
                    let bounds = aux_bounds_check(&aux)?;
                    let (residual, at) = ode_residual(&aux, 200)?;
                    let worst = [bounds.linear_lower, bounds.endpoint_lower, bounds.slope_upper, bounds.increasing, bounds.concave, bounds.chord]
                        .into_iter()
                        .fold(f64::INFINITY, f64::min);
                    let label = format!("g = {}, lambda = {lambda}, delta = {delta}", g.name());
                    checks.push(Check::new(format!("profile bounds ({label})"), worst >= -AUX_TOL, format!("worst margin {worst}")));
                    checks.push(Check::new(format!("ODE residual ({label})"), residual <= ODE_TOL, format!("{residual} at r = {at}")));
                    for i in 0..sec.points.max(2) {
                        let r = delta * i as f64 / (sec.points.max(2) - 1) as f64;
                        let v = aux.eval(r)?;
                        csv.push_str(&format!("{},{lambda},{delta},{r},{},{},{}\n", g.name(), v.f, v.f_prime, v.f_second));
                    }
                    rows.push(json!({ "g": g.name(), "lambda": lambda, "delta": delta, "bounds": bounds, "ode_residual": residual, "f_delta": aux.f_delta() }));
                }
            }
        }
        Ok(ModuleOutput {
            report: json!({ "profiles": rows }),
            checks,
            csvs: vec![("aux_profiles.csv".into(), csv)],
        })
    }
}

fn pass_word(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn solve_fixture(fx: &Fixture, dim: usize, sec: &SolveSection) -> Result<GridSolution> {
    let grid = Grid::new(dim, sec.half_width, sec.nodes)?;
    let fields = fx.problem.fields();
    let dt = match (sec.dt, sec.dt_fraction) {
        (Some(_), Some(_)) => bail!("config keys `solve.dt` and `solve.dt_fraction` are exclusive"),
        (Some(dt), None) => dt,
        (None, frac) => frac.unwrap_or(0.5) * max_stable_dt(&fields, &grid, 0.0)?,
    };
    let snaps: Vec<f64> = (1..=sec.snapshots).map(|i| sec.horizon * i as f64 / sec.snapshots as f64).collect();
    let mut scheme = SchemeConfig::new(dt).with_snapshots(snaps);
    if let Some(m) = sec.margin {
        scheme = scheme.with_margin(m);
    }
    let datum = sec.datum.clone();
    let u0 = move |x: &Vector| datum.eval(x);
    Ok(match &fx.problem {
        Problem::Linear(f) => solve_linear(f, u0, sec.horizon, &grid, &scheme)?,
        Problem::Isaacs(fam) => solve_isaacs(fam, u0, sec.horizon, &grid, &scheme)?,
    })
}
