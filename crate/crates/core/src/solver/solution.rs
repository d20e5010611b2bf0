use std::io::Write;

use serde::Serialize;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::math::linalg::Vector;

/// Snapshots of a discrete solution.
#[derive(Debug, Clone, Serialize)]
pub struct GridSolution {
    pub grid: Grid,
    /// Strictly increasing, starting at 0.
    pub times: Vec<f64>,
    /// `values[s][k]`: node `k` at `times[s]`.
    pub values: Vec<Vec<f64>>,
    /// Right-hand side `h` at the nodes for each snapshot.
    pub sources: Vec<Vec<f64>>,
    pub descriptor: String,
    pub lambda: f64,
    pub dt: f64,
    pub margin: f64,
    pub horizon: f64,
    pub boundary_exact: bool,
}

impl GridSolution {
    pub fn snapshot_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .ok_or_else(|| Error::Invalid(format!("t = {t} is not a snapshot time")))
    }

    pub fn at(&self, t: f64) -> Result<&[f64]> {
        Ok(&self.values[self.snapshot_index(t)?])
    }

    /// Interior nodes for measurements.
    pub fn interior(&self) -> Result<Vec<usize>> {
        self.grid.interior(self.margin)
    }

    /// Largest `|u − exact|` over the interior nodes at snapshot `t`.
    pub fn max_error(&self, t: f64, exact: impl Fn(&Vector) -> f64) -> Result<f64> {
        let u = self.at(t)?;
        Ok(self
            .interior()?
            .into_iter()
            .map(|k| (u[k] - exact(&self.grid.coord(k))).abs())
            .fold(0.0, f64::max))
    }

    /// Value at a grid node given by its coordinates.
    pub fn value_at(&self, t: f64, x: &Vector) -> Result<f64> {
        let idx: Vec<usize> = x
            .iter()
            .map(|&c| self.grid.axis_index(c).ok_or_else(|| Error::Invalid(format!("{c} is not a grid coordinate"))))
            .collect::<Result<_>>()?;
        let k = if self.grid.dim == 1 { idx[0] } else { self.grid.flat(idx[0], idx[1]) };
        Ok(self.at(t)?[k])
    }

    /// `t,x[,y],u` rows, time-major, nodes in lexicographic order.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        if self.grid.dim == 1 {
            writeln!(w, "t,x,u")?;
        } else {
            writeln!(w, "t,x,y,u")?;
        }
        for (t, vals) in self.times.iter().zip(&self.values) {
            for (k, v) in vals.iter().enumerate() {
                let x = self.grid.coord(k);
                if self.grid.dim == 1 {
                    writeln!(w, "{t},{},{v}", x[0])?;
                } else {
                    writeln!(w, "{t},{},{},{v}", x[0], x[1])?;
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}
