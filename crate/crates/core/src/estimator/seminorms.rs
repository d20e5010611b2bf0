//! Discrete seminorms over node pairs.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::solver::{Grid, GridSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Seminorms {
    /// Largest chord slope over pairs at distance `≤ δ`.
    pub lip: f64,
    /// Largest `|Δu|/|x−y|^α` over pairs at distance `≤ min(δ, 1)`.
    pub holder: f64,
    /// Largest `|Δu|` over pairs at distance `≤ δ`.
    pub osc: f64,
}

/// Pair offsets `(di, dj)` in a half space, with their lengths.
fn offsets(grid: &Grid, radius: f64) -> Vec<(isize, isize, f64)> {
    let h = grid.h();
    let reach = ((radius / h) * (1.0 + 1e-12)).floor() as isize;
    let mut out = Vec::new();
    if grid.dim == 1 {
        for di in 1..=reach {
            out.push((di, 0, di as f64 * h));
        }
    } else {
        for di in 0..=reach {
            for dj in -reach..=reach {
                if di == 0 && dj <= 0 {
                    continue;
                }
                let d = h * ((di * di + dj * dj) as f64).sqrt();
                if d <= radius * (1.0 + 1e-12) {
                    out.push((di, dj, d));
                }
            }
        }
    }
    out
}

/// Largest `score(|u(x) − u(y)|, |x − y|)` over masked pairs within `radius`.
pub fn pair_max(grid: &Grid, u: &[f64], mask: &[bool], radius: f64, score: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
    let offs = offsets(grid, radius);
    let n = grid.nodes_per_axis as isize;
    let nodes: Vec<usize> = (0..grid.len()).filter(|&k| mask[k]).collect();
    let body = |&k: &usize| -> f64 {
        let [i, j] = grid.multi_index(k);
        let (i, j) = (i as isize, j as isize);
        let mut best: f64 = 0.0;
        for &(di, dj, d) in &offs {
            let (a, b) = (i + di, j + dj);
            if a >= n || b < 0 || b >= n {
                continue;
            }
            let m = grid.flat(a as usize, b as usize);
            if mask[m] {
                best = best.max(score((u[k] - u[m]).abs(), d));
            }
        }
        best
    };
    if nodes.len() * offs.len() > 1 << 16 {
        nodes.par_iter().map(body).reduce(|| 0.0, f64::max)
    } else {
        nodes.iter().map(body).fold(0.0, f64::max)
    }
}

/// Membership mask of the given node list.
pub fn mask_of(grid: &Grid, nodes: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; grid.len()];
    for &k in nodes {
        mask[k] = true;
    }
    mask
}

/// Seminorms of nodal values restricted to `mask`.
pub fn seminorms_on(grid: &Grid, u: &[f64], mask: &[bool], alpha: f64, delta: f64) -> Seminorms {
    Seminorms {
        lip: pair_max(grid, u, mask, delta, |du, d| du / d),
        holder: pair_max(grid, u, mask, delta.min(1.0), |du, d| du / d.powf(alpha)),
        osc: pair_max(grid, u, mask, delta, |du, _| du),
    }
}

/// Seminorms of a snapshot on the interior-margin subgrid.
pub fn seminorms(sol: &GridSolution, t: f64, alpha: f64, delta: f64) -> Result<Seminorms> {
    let u = sol.at(t)?;
    let mask = mask_of(&sol.grid, &sol.interior()?);
    Ok(seminorms_on(&sol.grid, u, &mask, alpha, delta))
}
