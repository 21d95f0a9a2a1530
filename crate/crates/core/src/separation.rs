//! Soft separating hyperplanes between pairs of groups, and the polyhedral
//! regions they carve out.
//!
//! For groups `G_k` and `G_r` the hyperplane `(p, q)` minimizes total margin
//! violation:
//!
//! ```text
//! min  sum eps
//! s.t. p . x_i - q <= -1 + eps_i   (i in G_k)
//!      p . x_l - q >=  1 - eps_l   (l in G_r)
//!      sum_j p_j >= 1   (or <= -1 in the mirrored problem)
//! ```
//!
//! The sum constraint rules out the trivial `p = 0`. Both orientations are
//! solved and the one with the smaller objective is kept.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lp::{dot, solve_lp, LinearProgram, LpStatus, Relation};

/// Tolerance used by [`contains`].
pub const CONTAINS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub p: Vec<f64>,
    pub q: f64,
    /// Total soft violation attained.
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `p . x <= q`
    Le,
    /// `p . x >= q`
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub p: Vec<f64>,
    pub q: f64,
    pub side: Side,
}

impl Halfspace {
    pub fn holds(&self, x: &[f64], tol: f64) -> bool {
        let v = dot(&self.p, x);
        match self.side {
            Side::Le => v <= self.q + tol,
            Side::Ge => v >= self.q - tol,
        }
    }
}

/// Region of group `group` (1-based): the intersection of its halfspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    pub group: usize,
    pub halfspaces: Vec<Halfspace>,
}

impl Polyhedron {
    pub fn contains(&self, x: &[f64]) -> bool {
        contains(self, x)
    }
}

pub fn contains(poly: &Polyhedron, x: &[f64]) -> bool {
    poly.halfspaces.iter().all(|h| h.holds(x, CONTAINS_TOL))
}

fn solve_oriented<R: AsRef<[f64]>>(gk: &[R], gr: &[R], d: usize, positive: bool) -> Result<Hyperplane> {
    let q = d;
    let first_eps = d + 1;
    let mut lp = LinearProgram::new(first_eps + gk.len() + gr.len());
    for j in 0..=d {
        lp.set_free(j);
    }
    for (idx, row) in gk.iter().chain(gr).enumerate() {
        let eps = first_eps + idx;
        lp.set_cost(eps, 1.0);
        let mut coeffs: Vec<(usize, f64)> = row
            .as_ref()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, &v)| (j, v))
            .collect();
        coeffs.push((q, -1.0));
        if idx < gk.len() {
            coeffs.push((eps, -1.0));
            lp.add_constraint(coeffs, Relation::Le, -1.0);
        } else {
            coeffs.push((eps, 1.0));
            lp.add_constraint(coeffs, Relation::Ge, 1.0);
        }
    }
    let sum = (0..d).map(|j| (j, 1.0)).collect();
    if positive {
        lp.add_constraint(sum, Relation::Ge, 1.0);
    } else {
        lp.add_constraint(sum, Relation::Le, -1.0);
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!(
            "separation LP ended with status {:?}",
            sol.status
        )));
    }
    Ok(Hyperplane {
        p: sol.values[..d].to_vec(),
        q: sol.values[q],
        objective: sol.objective_value,
    })
}

/// Soft-separates `gk` (negative side) from `gr` (positive side).
pub fn separate_pair<R: AsRef<[f64]>>(gk: &[R], gr: &[R]) -> Result<Hyperplane> {
    if gk.is_empty() || gr.is_empty() {
        return Err(Error::invalid("cannot separate an empty group"));
    }
    let d = gk[0].as_ref().len();
    if gk.iter().chain(gr).any(|r| r.as_ref().len() != d) {
        return Err(Error::invalid("points of different dimensions"));
    }
    let pos = solve_oriented(gk, gr, d, true)?;
    let neg = solve_oriented(gk, gr, d, false)?;
    Ok(if neg.objective < pos.objective { neg } else { pos })
}

/// Builds the `K` regions from hyperplanes keyed by 1-based pairs `(k, r)`,
/// `k < r`, each computed with group `k` on the negative side.
pub fn build_polyhedra(k: usize, hyperplanes: &BTreeMap<(usize, usize), Hyperplane>) -> Result<Vec<Polyhedron>> {
    let mut polys: Vec<Polyhedron> = (1..=k)
        .map(|group| Polyhedron {
            group,
            halfspaces: Vec::with_capacity(k.saturating_sub(1)),
        })
        .collect();
    for g in 1..=k {
        for other in 1..=k {
            if other == g {
                continue;
            }
            let (a, b, side) = if g < other { (g, other, Side::Le) } else { (other, g, Side::Ge) };
            let h = hyperplanes
                .get(&(a, b))
                .ok_or_else(|| Error::invalid(format!("no hyperplane for groups ({a}, {b})")))?;
            polys[g - 1].halfspaces.push(Halfspace {
                p: h.p.clone(),
                q: h.q,
                side,
            });
        }
    }
    Ok(polys)
}
