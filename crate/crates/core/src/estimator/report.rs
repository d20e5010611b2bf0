use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::Write;

use serde::{Serialize, Serializer};

use crate::problem::AuditReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// The bound has explicit constants; the verdict is PASS or FAIL.
    Absolute,
    /// The bound has an unnamed constant; it is fitted and reported.
    Shape,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail,
    Consistent(f64),
    Inconsistent,
}

impl Verdict {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("PASS"),
            Verdict::Fail => f.write_str("FAIL"),
            Verdict::Consistent(c) => write!(f, "CONSISTENT(C = {c:.6e})"),
            Verdict::Inconsistent => f.write_str("INCONSISTENT"),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub t: f64,
    pub measured: f64,
    pub bound: f64,
    /// `bound − measured`.
    pub margin: f64,
    /// Discretization allowance: the row passes iff `margin ≥ −tolerance`.
    pub tolerance: f64,
    pub pass: bool,
}

impl BoundRow {
    pub fn new(t: f64, measured: f64, bound: f64, tolerance: f64) -> Self {
        let margin = bound - measured;
        Self {
            t,
            measured,
            bound,
            margin,
            tolerance,
            pass: margin >= -tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    /// Stable identifier of the bound, e.g. `lipschitz-global`.
    pub bound_id: String,
    pub statement: String,
    pub mode: CheckMode,
    pub constants: BTreeMap<String, f64>,
    pub rows: Vec<BoundRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_constant: Option<f64>,
    /// Log-log slope of the measured series against `t`, when relevant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    pub verdict: Verdict,
    /// Audits of the hypotheses the bound assumes (attached by the caller).
    pub hypotheses: Vec<AuditReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RegularityReport {
    pub fn new(bound_id: impl Into<String>, statement: impl Into<String>, mode: CheckMode) -> Self {
        Self {
            bound_id: bound_id.into(),
            statement: statement.into(),
            mode,
            constants: BTreeMap::new(),
            rows: Vec::new(),
            fitted_constant: None,
            slope: None,
            verdict: Verdict::Pass,
            hypotheses: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_hypotheses(mut self, audits: Vec<AuditReport>) -> Self {
        self.hypotheses = audits;
        self
    }

    /// Smallest row margin (most negative first).
    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[{}] {}  {}", self.verdict, self.bound_id, self.statement);
        for (k, v) in &self.constants {
            let _ = writeln!(s, "  {k} = {v:.6e}");
        }
        if let Some(c) = self.fitted_constant {
            let _ = writeln!(s, "  fitted constant = {c:.6e}");
        }
        if let Some(p) = self.slope {
            let _ = writeln!(s, "  log-log slope = {p:.4}");
        }
        for h in &self.hypotheses {
            let _ = writeln!(s, "  hypothesis {}: {}", h.hypothesis, if h.pass { "PASS" } else { "FAIL" });
        }
        let _ = writeln!(s, "  {:>10} {:>14} {:>14} {:>14} {:>12}  ok", "t", "measured", "bound", "margin", "tolerance");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "  {:>10.4} {:>14.6e} {:>14.6e} {:>14.6e} {:>12.3e}  {}",
                r.t,
                r.measured,
                r.bound,
                r.margin,
                r.tolerance,
                if r.pass { "yes" } else { "NO" }
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        s
    }

    /// `t,measured,bound,margin` rows.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,measured,bound,margin")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.t, r.measured, r.bound, r.margin)?;
        }
        Ok(())
    }
}
