//! Uniform grids on `[−L, L]^N`, `N ∈ {1, 2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::linalg::Vector;

/// Nodes are numbered lexicographically: `k = i·n + j` with `i` the first
/// coordinate index. The outermost layer of nodes is the Dirichlet boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub dim: usize,
    pub half_width: f64,
    /// Nodes per axis, odd so that the origin is a node.
    pub nodes_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, nodes_per_axis: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Domain {
                name: "dim",
                value: dim as f64,
                expected: "{1, 2}".into(),
            });
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Domain {
                name: "half_width",
                value: half_width,
                expected: "(0, ∞)".into(),
            });
        }
        if nodes_per_axis < 5 || nodes_per_axis % 2 == 0 {
            return Err(Error::Domain {
                name: "nodes_per_axis",
                value: nodes_per_axis as f64,
                expected: "an odd integer ≥ 5".into(),
            });
        }
        Ok(Self {
            dim,
            half_width,
            nodes_per_axis,
        })
    }

    /// Grid with spacing `h`; `L/h` must be an integer up to rounding.
    pub fn with_spacing(dim: usize, half_width: f64, h: f64) -> Result<Self> {
        let cells = half_width / h;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::Invalid(format!("L/h = {cells} is not an integer")));
        }
        Self::new(dim, half_width, 2 * cells.round() as usize + 1)
    }

    /// Same box, spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            nodes_per_axis: 2 * self.nodes_per_axis - 1,
            ..self.clone()
        }
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.nodes_per_axis - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nodes_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis indices of node `k`.
    #[inline]
    pub fn multi_index(&self, k: usize) -> [usize; 2] {
        if self.dim == 1 {
            [k, 0]
        } else {
            [k / self.nodes_per_axis, k % self.nodes_per_axis]
        }
    }

    #[inline]
    pub fn axis_coord(&self, i: usize) -> f64 {
        // Centered formula keeps the origin and symmetric nodes exact.
        let c = (self.nodes_per_axis - 1) as f64 / 2.0;
        (i as f64 - c) * self.h()
    }

    pub fn coord(&self, k: usize) -> Vector {
        let [i, j] = self.multi_index(k);
        if self.dim == 1 {
            Vector::from_slice(&[self.axis_coord(i)])
        } else {
            Vector::from_slice(&[self.axis_coord(i), self.axis_coord(j)])
        }
    }

    pub fn coords(&self) -> Vec<Vector> {
        (0..self.len()).map(|k| self.coord(k)).collect()
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        let last = self.nodes_per_axis - 1;
        let [i, j] = self.multi_index(k);
        i == 0 || i == last || (self.dim == 2 && (j == 0 || j == last))
    }

    /// Nodes whose coordinates all lie in `[−(L − margin), L − margin]`,
    /// excluding the boundary layer.
    pub fn interior(&self, margin: f64) -> Result<Vec<usize>> {
        let limit = self.half_width - margin + 1e-9 * self.h();
        let nodes: Vec<usize> = (0..self.len())
            .filter(|&k| !self.is_boundary(k) && self.coord(k).iter().all(|c| c.abs() <= limit))
            .collect();
        if nodes.is_empty() {
            return Err(Error::NoInteriorNodes { margin });
        }
        Ok(nodes)
    }

    /// Axis index of coordinate `x` if it is a node.
    pub fn axis_index(&self, x: f64) -> Option<usize> {
        let c = (self.nodes_per_axis - 1) as f64 / 2.0;
        let i = x / self.h() + c;
        let r = i.round();
        ((i - r).abs() < 1e-9 && r >= 0.0 && r < self.nodes_per_axis as f64).then_some(r as usize)
    }

    /// Flat index from per-axis indices.
    pub fn flat(&self, i: usize, j: usize) -> usize {
        if self.dim == 1 {
            i
        } else {
            i * self.nodes_per_axis + j
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_coordinates() {
        let g = Grid::new(1, 1.0, 5).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.coord(2)[0], 0.0);
        assert_eq!(g.coord(0)[0], -1.0);
        assert_eq!(g.coord(4)[0], 1.0);
        assert!(g.is_boundary(0) && g.is_boundary(4) && !g.is_boundary(1));
        assert_eq!(g.refined().nodes_per_axis, 9);
    }

    #[test]
    fn two_dimensional_layout() {
        let g = Grid::new(2, 2.0, 5).unwrap();
        assert_eq!(g.len(), 25);
        let x = g.coord(g.flat(1, 3));
        assert_eq!((x[0], x[1]), (-1.0, 1.0));
        assert_eq!(g.interior(0.0).unwrap().len(), 9);
        assert_eq!(g.interior(1.0).unwrap().len(), 9);
        assert_eq!(g.interior(1.5).unwrap().len(), 1);
        assert!(matches!(g.interior(2.5), Err(Error::NoInteriorNodes { .. })));
    }

    #[test]
    fn rejects_even_counts_and_non_integral_spacing() {
        assert!(Grid::new(1, 1.0, 4).is_err());
        assert!(Grid::with_spacing(1, 1.0, 0.3).is_err());
        assert_eq!(Grid::with_spacing(1, 1.0, 0.25).unwrap().nodes_per_axis, 9);
    }
}
