//! Assignment of clusters to regression groups by mixed-integer optimization.
//!
//! Binary `a[k][l]` says cluster `l` belongs to group `k`; group 0 collects
//! discarded outliers. The model minimizes total absolute error
//!
//! ```text
//! min  sum_i delta_i
//! s.t. delta_i >=  (y_i - beta_k . x_i) - M (1 - a[k][l(i)])   k = 1..K
//!      delta_i >= -(y_i - beta_k . x_i) - M (1 - a[k][l(i)])   k = 1..K
//!      sum_k a[k][l] = 1                                       k = 0..K
//!      sum_l |C_l| a[0][l] <= rho n
//!      a binary, delta >= 0, beta free
//! ```
//!
//! and is solved by branch-and-bound over the `a` variables. Group labels are
//! made unique by requiring group `k` to start at a later cluster than group
//! `k - 1`.
//!
//! A node is bounded by the summed L1 error of the clusters already pinned to
//! each group. That never exceeds the big-M LP relaxation of the node and
//! matches it once the free clusters can take zero error, but costs only a few
//! memoized fits. A small LP over `a` alone detects infeasible fixings and
//! supplies the fractional values used for rounding and branching.
//!
//! The objective of a complete assignment is evaluated without `M`, so the
//! result is the optimum of the model whenever `M` exceeds every residual;
//! [`big_m_audit`] reports when that may not hold.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::time::Instant;

use crate::clustering::Clustering;
use crate::config::Config;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::lp::{dot, l1_fit, solve_lp, LinearProgram, LpStatus, Relation};

/// Largest number of assignments the enumeration oracle will visit.
pub const ORACLE_LIMIT: u64 = 1_000_000;

const INTEGRAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimality {
    Proven,
    /// Stopped with the given relative gap still open.
    Gap(f64),
    TimeLimit { gap: f64 },
}

impl fmt::Display for Optimality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Optimality::Proven => write!(f, "proven"),
            Optimality::Gap(g) => write!(f, "gap {:.4}%", 100.0 * g),
            Optimality::TimeLimit { gap } => write!(f, "time-limit (gap {:.4}%)", 100.0 * gap),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Group of each cluster: 0 for the outlier group, otherwise `1..=K`.
    pub cluster_group: Vec<usize>,
    /// `beta_k` for `k = 1..=K`, stored at index `k - 1`. Empty groups keep
    /// zero coefficients.
    pub betas: Vec<Vec<f64>>,
    /// Absolute error of every point; zero for discarded points.
    pub deltas: Vec<f64>,
    pub objective: f64,
    pub eliminated_fraction: f64,
    pub optimality: Optimality,
    /// Relaxation value at the root node.
    pub root_bound: f64,
    pub nodes: usize,
}

impl Assignment {
    pub fn num_groups(&self) -> usize {
        self.betas.len()
    }

    /// The `(K + 1) x L` indicator matrix; row 0 is the outlier group.
    pub fn indicator(&self) -> Vec<Vec<u8>> {
        let mut a = vec![vec![0u8; self.cluster_group.len()]; self.num_groups() + 1];
        for (l, &k) in self.cluster_group.iter().enumerate() {
            a[k][l] = 1;
        }
        a
    }

    /// Group of every point.
    pub fn point_groups(&self, clustering: &Clustering) -> Vec<usize> {
        clustering
            .assignments
            .iter()
            .map(|&l| self.cluster_group[l])
            .collect()
    }

    pub fn groups(&self, clustering: &Clustering) -> Groups {
        let mut members = vec![Vec::new(); self.num_groups() + 1];
        for (i, g) in self.point_groups(clustering).into_iter().enumerate() {
            members[g].push(i);
        }
        Groups { members }
    }
}

/// Point sets of each group; index 0 holds the discarded outliers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Groups {
    pub members: Vec<Vec<usize>>,
}

impl Groups {
    pub fn num_groups(&self) -> usize {
        self.members.len() - 1
    }

    pub fn outliers(&self) -> &[usize] {
        &self.members[0]
    }

    pub fn group(&self, k: usize) -> &[usize] {
        &self.members[k]
    }
}

/// Everything the solvers need about one instance.
struct Instance<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    d: usize,
    k: usize,
    members: Vec<Vec<usize>>,
    sizes: Vec<usize>,
    budget: f64,
    big_m: f64,
    /// Memoized L1 fits keyed by the bitset of clusters in a group.
    fits: HashMap<Vec<u64>, (f64, Vec<f64>)>,
}

impl<'a> Instance<'a> {
    fn new(data: &'a Dataset, clustering: &Clustering, k: usize, rho: f64, big_m: f64) -> Result<Self> {
        if clustering.num_points() != data.n() {
            return Err(Error::invalid(format!(
                "clustering covers {} points but data has {}",
                clustering.num_points(),
                data.n()
            )));
        }
        if k < 1 {
            return Err(Error::config("K must be at least 1"));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::config(format!("outlier fraction {rho} outside [0, 1]")));
        }
        Ok(Instance {
            x: data.x(),
            y: data.y(),
            d: data.d(),
            k,
            members: clustering.members(),
            sizes: clustering.sizes.clone(),
            budget: rho * data.n() as f64,
            big_m,
            fits: HashMap::new(),
        })
    }

    fn l(&self) -> usize {
        self.sizes.len()
    }

    fn n(&self) -> usize {
        self.y.len()
    }

    fn within_budget(&self, groups: &[usize]) -> bool {
        let dropped: usize = groups
            .iter()
            .zip(&self.sizes)
            .filter(|(g, _)| **g == 0)
            .map(|(_, s)| s)
            .sum();
        dropped as f64 <= self.budget + 1e-9
    }

    /// L1 error and coefficients of the group made of `clusters`.
    fn group_fit(&mut self, clusters: &[usize]) -> Result<(f64, Vec<f64>)> {
        if clusters.is_empty() {
            return Ok((0.0, vec![0.0; self.d]));
        }
        let mut key = vec![0u64; self.l().div_ceil(64)];
        for &c in clusters {
            key[c / 64] |= 1 << (c % 64);
        }
        if let Some(hit) = self.fits.get(&key) {
            return Ok(hit.clone());
        }
        let rows: Vec<&[f64]> = clusters
            .iter()
            .flat_map(|&c| self.members[c].iter().map(|&i| self.x[i].as_slice()))
            .collect();
        let ys: Vec<f64> = clusters
            .iter()
            .flat_map(|&c| self.members[c].iter().map(|&i| self.y[i]))
            .collect();
        let fit = l1_fit(&rows, &ys)?;
        let out = (fit.total_abs_error, fit.beta);
        self.fits.insert(key, out.clone());
        Ok(out)
    }

    /// Objective of a complete assignment and its per-group coefficients.
    fn evaluate(&mut self, groups: &[usize]) -> Result<(f64, Vec<Vec<f64>>)> {
        let mut total = 0.0;
        let mut betas = Vec::with_capacity(self.k);
        for g in 1..=self.k {
            let clusters: Vec<usize> = (0..self.l()).filter(|&c| groups[c] == g).collect();
            let (err, beta) = self.group_fit(&clusters)?;
            total += err;
            betas.push(beta);
        }
        Ok((total, betas))
    }

    fn cluster_error(&self, c: usize, beta: &[f64]) -> f64 {
        self.members[c]
            .iter()
            .map(|&i| (self.y[i] - dot(&self.x[i], beta)).abs())
            .sum()
    }

    fn finish(
        &mut self,
        groups: Vec<usize>,
        optimality: Optimality,
        root_bound: f64,
        nodes: usize,
    ) -> Result<Assignment> {
        let groups = canonical_labels(&groups, self.k);
        let (objective, betas) = self.evaluate(&groups)?;
        let mut deltas = vec![0.0; self.n()];
        let mut dropped = 0usize;
        for (c, &g) in groups.iter().enumerate() {
            if g == 0 {
                dropped += self.sizes[c];
                continue;
            }
            for &i in &self.members[c] {
                deltas[i] = (self.y[i] - dot(&self.x[i], &betas[g - 1])).abs();
            }
        }
        Ok(Assignment {
            cluster_group: groups,
            betas,
            deltas,
            objective,
            eliminated_fraction: dropped as f64 / self.n() as f64,
            optimality,
            root_bound,
            nodes,
        })
    }
}

/// Relabels groups `1..=K` by the order of their first cluster; empty groups
/// end up last. Group 0 is left alone.
fn canonical_labels(groups: &[usize], k: usize) -> Vec<usize> {
    let mut map = vec![0usize; k + 1];
    let mut next = 1;
    for &g in groups {
        if g != 0 && map[g] == 0 {
            map[g] = next;
            next += 1;
        }
    }
    groups.iter().map(|&g| if g == 0 { 0 } else { map[g] }).collect()
}

/// Branch-and-bound state of one variable `a[k][l]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fix {
    Free,
    Zero,
    One,
}

#[derive(Debug, Clone)]
struct Node {
    fix: Vec<Fix>,
    bound: f64,
    depth: usize,
}

struct Relaxed {
    objective: f64,
    /// Relaxed `a[k][l]`, indexed `k * L + l`.
    a: Vec<f64>,
}

struct Layout {
    k: usize,
    l: usize,
    d: usize,
}

impl Layout {
    fn beta(&self, k: usize, j: usize) -> usize {
        (k - 1) * self.d + j
    }

    fn a(&self, k: usize, l: usize) -> usize {
        self.k * self.d + k * self.l + l
    }

    fn first_point_var(&self) -> usize {
        self.k * self.d + (self.k + 1) * self.l
    }
}

impl<'a> Instance<'a> {
    fn layout(&self) -> Layout {
        Layout {
            k: self.k,
            l: self.l(),
            d: self.d,
        }
    }

    /// The cluster-level structure shared by every relaxation: assignment
    /// rows, the outlier budget and the symmetry-breaking rows.
    fn base_rows(&self, lp: &mut LinearProgram, lay: &Layout) {
        for k in 1..=self.k {
            for j in 0..lay.d {
                lp.set_free(lay.beta(k, j));
            }
        }
        for k in 0..=self.k {
            for l in 0..self.l() {
                lp.set_bounds(lay.a(k, l), 0.0, 1.0);
            }
        }
        for l in 0..self.l() {
            let coeffs = (0..=self.k).map(|k| (lay.a(k, l), 1.0)).collect();
            lp.add_constraint(coeffs, Relation::Eq, 1.0);
        }
        let coeffs = (0..self.l())
            .map(|l| (lay.a(0, l), self.sizes[l] as f64))
            .collect();
        lp.add_constraint(coeffs, Relation::Le, self.budget);
        for k in 2..=self.k {
            lp.set_bounds(lay.a(k, 0), 0.0, 0.0);
            for l in 1..self.l() {
                let mut coeffs = vec![(lay.a(k, l), 1.0)];
                coeffs.extend((0..l).map(|p| (lay.a(k - 1, p), -1.0)));
                lp.add_constraint(coeffs, Relation::Le, 0.0);
            }
        }
    }

    /// `delta_i >= +-(y_i - beta_k . x_i) - M (1 - a[k][l])` for every point
    /// of cluster `l`, with `delta_i` given as a sparse expression.
    fn big_m_rows(&self, lp: &mut LinearProgram, lay: &Layout, k: usize, l: usize, delta: &[Vec<(usize, f64)>]) {
        for &i in &self.members[l] {
            for sign in [1.0, -1.0] {
                let mut coeffs = delta[i].clone();
                coeffs.extend(
                    self.x[i]
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(j, &v)| (lay.beta(k, j), sign * v)),
                );
                coeffs.push((lay.a(k, l), -self.big_m));
                lp.add_constraint(coeffs, Relation::Ge, sign * self.y[i] - self.big_m);
            }
        }
    }

    /// Full relaxation of the model with every big-M row present.
    fn full_relaxation(&self) -> LinearProgram {
        let lay = self.layout();
        let first = lay.first_point_var();
        let mut lp = LinearProgram::new(first + self.n());
        self.base_rows(&mut lp, &lay);
        let delta: Vec<Vec<(usize, f64)>> = (0..self.n()).map(|i| vec![(first + i, 1.0)]).collect();
        for i in 0..self.n() {
            lp.set_cost(first + i, 1.0);
        }
        for k in 1..=self.k {
            for l in 0..self.l() {
                self.big_m_rows(&mut lp, &lay, k, l, &delta);
            }
        }
        lp
    }

    /// Group each cluster is pinned to at this node, if any.
    fn fixed_groups(&self, fix: &[Fix]) -> Option<Vec<Option<usize>>> {
        let mut out = Vec::with_capacity(self.l());
        for l in 0..self.l() {
            let col: Vec<Fix> = (0..=self.k).map(|k| fix[k * self.l() + l]).collect();
            if let Some(k) = col.iter().position(|f| *f == Fix::One) {
                out.push(Some(k));
                continue;
            }
            let open: Vec<usize> = (0..=self.k).filter(|&k| col[k] == Fix::Free).collect();
            match open.len() {
                0 => return None,
                1 => out.push(Some(open[0])),
                _ => out.push(None),
            }
        }
        Some(out)
    }

    /// Node bound and a fractional assignment to guide rounding and
    /// branching.
    ///
    /// Points of a pinned cluster pay at least their group's L1 error in any
    /// completion, so the sum of the per-group fits of pinned clusters bounds
    /// the subtree from below. It is also a lower bound on the big-M LP
    /// relaxation of the node, and equals it when every free cluster can sit
    /// at zero error (`|r_ik| <= M (1 - a[k][l])`). The fractional assignment
    /// comes from a small LP over `a` alone: assignment, budget, symmetry and
    /// the node fixings, with each `a[k][l]` priced at the error cluster `l`
    /// would add to group `k`. If that LP is infeasible so is the subtree.
    fn relax(&mut self, node: &Node) -> Result<Option<Relaxed>> {
        let Some(fixed) = self.fixed_groups(&node.fix) else {
            return Ok(None);
        };
        let (kk, ll) = (self.k, self.l());
        let mut bound = 0.0;
        let mut betas = Vec::with_capacity(kk);
        for g in 1..=kk {
            let clusters: Vec<usize> = (0..ll).filter(|&l| fixed[l] == Some(g)).collect();
            let (err, beta) = self.group_fit(&clusters)?;
            bound += err;
            betas.push(beta);
        }

        let lay = Layout { k: kk, l: ll, d: 0 };
        let mut lp = LinearProgram::new((kk + 1) * ll);
        self.base_rows(&mut lp, &lay);
        for k in 0..=kk {
            for l in 0..ll {
                let var = lay.a(k, l);
                let (lo, hi) = match (fixed[l], node.fix[k * ll + l]) {
                    (Some(g), _) if g == k => (1.0, 1.0),
                    (Some(_), _) | (None, Fix::Zero) => (0.0, 0.0),
                    (None, Fix::One) => (1.0, 1.0),
                    (None, Fix::Free) => lp.bounds(var),
                };
                if lo > lp.bounds(var).1 {
                    return Ok(None);
                }
                lp.set_bounds(var, lo, hi.min(lp.bounds(var).1));
                if fixed[l].is_none() && k >= 1 {
                    lp.set_cost(var, self.cluster_error(l, &betas[k - 1]));
                }
            }
        }
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => Ok(Some(Relaxed {
                objective: bound,
                a: sol.values,
            })),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::Solver("assignment LP reported unbounded".into())),
        }
    }

    /// Rounds a relaxed solution to a feasible assignment and improves it by
    /// alternating refits and reassignments.
    fn round_and_improve(&mut self, a: &[f64]) -> Result<(f64, Vec<usize>)> {
        let (kk, ll) = (self.k, self.l());
        let mut used = 0usize;
        let mut groups = vec![1usize; ll];
        for l in 0..ll {
            let best_any = (0..=kk)
                .max_by(|&p, &q| a[p * ll + l].total_cmp(&a[q * ll + l]).then(q.cmp(&p)))
                .expect("K >= 1");
            if best_any == 0 && (used + self.sizes[l]) as f64 <= self.budget + 1e-9 {
                groups[l] = 0;
                used += self.sizes[l];
            } else {
                groups[l] = (1..=kk)
                    .max_by(|&p, &q| a[p * ll + l].total_cmp(&a[q * ll + l]).then(q.cmp(&p)))
                    .expect("K >= 1");
            }
        }
        let mut groups = canonical_labels(&groups, kk);
        let (mut best, mut betas) = self.evaluate(&groups)?;
        for _ in 0..20 {
            let nonempty: Vec<bool> = (1..=kk).map(|g| groups.contains(&g)).collect();
            let mut next = vec![1usize; ll];
            let mut best_err = vec![0.0; ll];
            for l in 0..ll {
                let mut pick = (f64::INFINITY, 1);
                for g in 1..=kk {
                    if nonempty[g - 1] {
                        let e = self.cluster_error(l, &betas[g - 1]);
                        if e < pick.0 {
                            pick = (e, g);
                        }
                    }
                }
                next[l] = pick.1;
                best_err[l] = pick.0;
            }
            let mut order: Vec<usize> = (0..ll).collect();
            order.sort_by(|&p, &q| best_err[q].total_cmp(&best_err[p]).then(p.cmp(&q)));
            let mut used = 0usize;
            for l in order {
                if (used + self.sizes[l]) as f64 <= self.budget + 1e-9 {
                    next[l] = 0;
                    used += self.sizes[l];
                }
            }
            let next = canonical_labels(&next, kk);
            if next == groups {
                break;
            }
            let (obj, nb) = self.evaluate(&next)?;
            if obj < best - 1e-12 {
                best = obj;
                betas = nb;
                groups = next;
            } else {
                break;
            }
        }
        Ok((best, groups))
    }
}

/// Heap entry ordered by bound, then by creation order.
struct Open {
    bound: f64,
    seq: usize,
    node: Node,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.seq.cmp(&other.seq))
    }
}

fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    if incumbent <= bound {
        0.0
    } else {
        (incumbent - bound) / incumbent.abs().max(1e-9)
    }
}

fn branch_and_bound(inst: &mut Instance<'_>, cfg: &Config) -> Result<Assignment> {
    let start = Instant::now();
    let (kk, ll) = (inst.k, inst.l());
    let prune_tol = |inc: f64| 1e-9 * (1.0 + inc.abs());

    // Everything in group 1 is always feasible.
    let mut best_groups = vec![1usize; ll];
    let (mut incumbent, _) = inst.evaluate(&best_groups)?;

    let mut root = Node {
        fix: vec![Fix::Free; (kk + 1) * ll],
        bound: f64::NEG_INFINITY,
        depth: 0,
    };
    for k in 2..=kk {
        root.fix[k * ll] = Fix::Zero;
    }
    for l in 0..ll {
        if inst.sizes[l] as f64 > inst.budget + 1e-9 {
            root.fix[l] = Fix::Zero;
        }
    }

    let mut heap: BinaryHeap<Reverse<Open>> = BinaryHeap::new();
    let mut seq = 0usize;
    let mut next = Some(root);
    let mut nodes = 0usize;
    let mut root_bound = f64::NAN;
    // Smallest bound among subtrees discarded only thanks to gap_tol.
    let mut gap_pruned = f64::INFINITY;
    let mut timed_out = false;

    loop {
        let node = match next.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(Reverse(open)) => open.node,
                None => break,
            },
        };
        if node.bound >= incumbent - prune_tol(incumbent) {
            continue;
        }
        if node.bound >= incumbent - cfg.gap_tol * incumbent.abs() {
            gap_pruned = gap_pruned.min(node.bound);
            continue;
        }
        if start.elapsed().as_secs_f64() > cfg.time_limit_s {
            timed_out = true;
            gap_pruned = gap_pruned.min(node.bound);
            break;
        }
        nodes += 1;
        let Some(relaxed) = inst.relax(&node)? else {
            continue;
        };
        if nodes == 1 {
            root_bound = relaxed.objective;
        }
        log::debug!(
            "node {nodes} depth {} bound {:.6} incumbent {:.6} open {}",
            node.depth,
            relaxed.objective,
            incumbent,
            heap.len()
        );

        let (obj, groups) = inst.round_and_improve(&relaxed.a)?;
        if obj < incumbent - prune_tol(incumbent) {
            incumbent = obj;
            best_groups = groups;
        }
        if relaxed.objective >= incumbent - prune_tol(incumbent) {
            continue;
        }
        if relaxed.objective >= incumbent - cfg.gap_tol * incumbent.abs() {
            gap_pruned = gap_pruned.min(relaxed.objective);
            continue;
        }

        // Most fractional free variable; ties go to the lowest (k, l).
        let mut pick: Option<(usize, f64)> = None;
        for (idx, f) in node.fix.iter().enumerate() {
            if *f != Fix::Free {
                continue;
            }
            let v = relaxed.a[idx];
            let frac = v.min(1.0 - v);
            if frac > INTEGRAL_TOL && pick.map_or(true, |(_, pf)| frac > pf) {
                pick = Some((idx, frac));
            }
        }
        let idx = match pick {
            Some((idx, _)) => idx,
            None => {
                let groups: Vec<usize> = (0..ll)
                    .map(|l| {
                        (0..=kk)
                            .max_by(|&p, &q| relaxed.a[p * ll + l].total_cmp(&relaxed.a[q * ll + l]))
                            .expect("K >= 1")
                    })
                    .collect();
                let (obj, _) = inst.evaluate(&groups)?;
                if inst.within_budget(&groups) && obj < incumbent - prune_tol(incumbent) {
                    incumbent = obj;
                    best_groups = canonical_labels(&groups, kk);
                }
                // An integral point closes the subtree only when it meets the
                // bound; otherwise branch on the first free variable at one.
                if obj <= relaxed.objective + 1e-6 * (1.0 + obj.abs()) {
                    continue;
                }
                match (0..node.fix.len())
                    .find(|&i| node.fix[i] == Fix::Free && relaxed.a[i] >= 0.5)
                {
                    Some(i) => i,
                    None => continue,
                }
            }
        };

        let mut one = Node {
            fix: node.fix.clone(),
            bound: relaxed.objective,
            depth: node.depth + 1,
        };
        one.fix[idx] = Fix::One;
        let l = idx % ll;
        for k in 0..=kk {
            if k * ll + l != idx {
                one.fix[k * ll + l] = Fix::Zero;
            }
        }
        let mut zero = Node {
            fix: node.fix,
            bound: relaxed.objective,
            depth: node.depth + 1,
        };
        zero.fix[idx] = Fix::Zero;

        let (first, second) = if relaxed.a[idx] >= 0.5 { (one, zero) } else { (zero, one) };
        seq += 1;
        heap.push(Reverse(Open {
            bound: second.bound,
            seq,
            node: second,
        }));
        next = Some(first);
    }

    let open_bound = heap
        .iter()
        .map(|Reverse(o)| o.bound)
        .fold(gap_pruned, f64::min);
    let optimality = if timed_out {
        Optimality::TimeLimit {
            gap: relative_gap(incumbent, open_bound),
        }
    } else if gap_pruned < incumbent - prune_tol(incumbent) {
        Optimality::Gap(relative_gap(incumbent, gap_pruned))
    } else {
        Optimality::Proven
    };
    if root_bound.is_nan() {
        root_bound = incumbent;
    }
    debug_assert!(
        root_bound <= incumbent + 1e-6 * (1.0 + incumbent.abs()),
        "root bound {root_bound} above objective {incumbent}"
    );
    log::info!(
        "branch-and-bound: {nodes} nodes, objective {incumbent:.6}, root bound {root_bound:.6}, {optimality}, {:.2}s",
        start.elapsed().as_secs_f64()
    );
    inst.finish(best_groups, optimality, root_bound, nodes)
}

/// Assigns the clusters of `clustering` to `cfg.k` groups plus the outlier
/// group, minimizing total absolute error.
pub fn solve_problem3(data: &Dataset, clustering: &Clustering, cfg: &Config) -> Result<Assignment> {
    cfg.validate()?;
    let rho = cfg.crisp_rho()?;
    let mut inst = Instance::new(data, clustering, cfg.k, rho, cfg.big_m)?;
    branch_and_bound(&mut inst, cfg)
}

/// Point-level variant: every point is its own cluster and nothing may be
/// discarded. Only practical for a few dozen points.
pub fn solve_problem1(data: &Dataset, cfg: &Config) -> Result<Assignment> {
    let clustering = Clustering::singletons(data.x(), data.y());
    let mut inst = Instance::new(data, &clustering, cfg.k, 0.0, cfg.big_m)?;
    if !(cfg.big_m > 0.0) {
        return Err(Error::config("M must be positive"));
    }
    branch_and_bound(&mut inst, cfg)
}

/// Exhaustive search over every cluster-to-group map within the outlier
/// budget. Independent of `M`; used to verify the branch-and-bound.
pub fn enumerate_oracle(data: &Dataset, clustering: &Clustering, cfg: &Config) -> Result<Assignment> {
    let rho = cfg.crisp_rho()?;
    let mut inst = Instance::new(data, clustering, cfg.k, rho, cfg.big_m)?;
    let (kk, ll) = (inst.k, inst.l());
    let radix = kk as u64 + 1;
    let total = (0..ll).try_fold(1u64, |acc, _| acc.checked_mul(radix).filter(|&v| v <= ORACLE_LIMIT));
    let Some(total) = total else {
        return Err(Error::Budget(format!(
            "(K+1)^L = {}^{} exceeds {ORACLE_LIMIT}",
            radix, ll
        )));
    };
    let mut groups = vec![0usize; ll];
    let mut best: Option<(f64, Vec<usize>)> = None;
    for code in 0..total {
        let mut c = code;
        for g in groups.iter_mut() {
            *g = (c % radix) as usize;
            c /= radix;
        }
        if !inst.within_budget(&groups) {
            continue;
        }
        let (obj, _) = inst.evaluate(&groups)?;
        if best.as_ref().map_or(true, |(b, _)| obj < *b - 1e-12) {
            best = Some((obj, groups.clone()));
        }
    }
    let (obj, groups) = best.expect("all-in-group-1 is always within budget");
    inst.finish(groups, Optimality::Proven, obj, total as usize)
}

/// The root relaxation with every big-M row written out, for inspection.
pub fn root_relaxation(data: &Dataset, clustering: &Clustering, cfg: &Config) -> Result<LinearProgram> {
    let inst = Instance::new(data, clustering, cfg.k, cfg.crisp_rho()?, cfg.big_m)?;
    Ok(inst.full_relaxation())
}

/// Warns when some residual `|y_i - beta_k . x_i|`, over every point and
/// every non-empty group, comes within 1% of `M`: the big-M rows may then be
/// cutting off better assignments.
pub fn big_m_audit(data: &Dataset, assignment: &Assignment, cfg: &Config) -> Vec<String> {
    let threshold = 0.99 * cfg.big_m;
    let mut warnings = Vec::new();
    for (g, beta) in assignment.betas.iter().enumerate() {
        if !assignment.cluster_group.contains(&(g + 1)) {
            continue;
        }
        let mut count = 0usize;
        let mut worst = 0.0f64;
        for i in 0..data.n() {
            let r = (data.y()[i] - dot(data.row(i), beta)).abs();
            if r > threshold {
                count += 1;
            }
            worst = worst.max(r);
        }
        if count > 0 {
            warnings.push(format!(
                "group {}: {count} residual(s) exceed 0.99*M = {threshold}; max residual {worst:.6e}",
                g + 1
            ));
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::cluster;
    use crate::fuzzy::FuzzyNumber;

    fn cfg(k: usize, l: usize, rho: f64) -> Config {
        Config {
            k,
            l,
            rho: FuzzyNumber::crisp(rho),
            ..Config::default()
        }
    }

    fn with_intercept(xs: &[f64], ys: &[f64]) -> Dataset {
        Dataset::from_rows(xs.iter().map(|&v| vec![v, 1.0]).collect(), ys.to_vec()).unwrap()
    }

    #[test]
    fn single_group_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|v| 3.0 * v).collect();
        let data = Dataset::from_rows(xs.iter().map(|&v| vec![v]).collect(), ys).unwrap();
        let c = cluster(data.x(), data.y(), 4).unwrap();
        let a = solve_problem3(&data, &c, &cfg(1, 4, 0.0)).unwrap();
        assert!(a.objective < 1e-9);
        assert!((a.betas[0][0] - 3.0).abs() < 1e-9);
        assert_eq!(a.eliminated_fraction, 0.0);
        assert_eq!(a.optimality, Optimality::Proven);
    }

    #[test]
    fn problem1_two_lines() {
        let data = with_intercept(&[1.0, 2.0, 1.5, 3.0], &[1.0, 2.0, 3.0, 6.0]);
        // Points 0,1 on y = x and 2,3 on y = 2x.
        let a = solve_problem1(&data, &cfg(2, 4, 0.0)).unwrap();
        assert!(a.objective < 1e-9, "{}", a.objective);
        let c = Clustering::singletons(data.x(), data.y());
        let oracle = enumerate_oracle(&data, &c, &cfg(2, 4, 0.0)).unwrap();
        assert!(oracle.objective < 1e-9);
    }

    #[test]
    fn problem1_degenerate_cases() {
        let data = with_intercept(&[0.0, 1.0, 2.0, 3.0, 4.0], &[1.0, -2.0, 5.0, 0.5, 2.0]);
        let a = solve_problem1(&data, &cfg(5, 5, 0.0)).unwrap();
        assert!(a.objective < 1e-9);
        let a = solve_problem1(&data, &cfg(1, 5, 0.0)).unwrap();
        let global = l1_fit(data.x(), data.y()).unwrap();
        assert!((a.objective - global.total_abs_error).abs() < 1e-9);
    }

    #[test]
    fn oracle_edge_cases() {
        let data = with_intercept(&[0.0, 1.0, 2.0, 3.0], &[0.0, 5.0, -1.0, 2.0]);
        let c1 = cluster(data.x(), data.y(), 1).unwrap();
        let a = enumerate_oracle(&data, &c1, &cfg(1, 1, 0.0)).unwrap();
        let global = l1_fit(data.x(), data.y()).unwrap();
        assert!((a.objective - global.total_abs_error).abs() < 1e-12);

        let c = cluster(data.x(), data.y(), 3).unwrap();
        let a = enumerate_oracle(&data, &c, &cfg(1, 3, 1.0)).unwrap();
        assert_eq!(a.objective, 0.0);

        let big = Dataset::from_rows(vec![vec![1.0]; 30], vec![0.0; 30]).unwrap();
        let singles = Clustering::singletons(big.x(), big.y());
        assert!(matches!(
            enumerate_oracle(&big, &singles, &cfg(2, 30, 0.0)),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn labels_are_canonical() {
        assert_eq!(canonical_labels(&[2, 0, 1, 2, 3], 3), vec![1, 0, 2, 1, 3]);
        assert_eq!(canonical_labels(&[0, 0], 2), vec![0, 0]);
    }

    #[test]
    fn indicator_columns_sum_to_one() {
        let data = with_intercept(&[0.0, 1.0, 2.0, 5.0, 6.0, 7.0], &[0.0, 1.0, 2.0, 0.0, -1.0, -2.0]);
        let c = cluster(data.x(), data.y(), 3).unwrap();
        let a = solve_problem3(&data, &c, &cfg(2, 3, 0.0)).unwrap();
        let ind = a.indicator();
        assert_eq!(ind.len(), 3);
        for l in 0..3 {
            assert_eq!(ind.iter().map(|row| row[l] as u32).sum::<u32>(), 1);
        }
        let groups = a.groups(&c);
        let mut all: Vec<usize> = groups.members.concat();
        all.sort_unstable();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn audit_flags_large_residuals() {
        let data = with_intercept(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1e5, -1e5, 3e5]);
        let c = Clustering::singletons(data.x(), data.y());
        let a = solve_problem3(&data, &c, &cfg(1, 4, 0.0)).unwrap();
        assert!(!big_m_audit(&data, &a, &cfg(1, 4, 0.0)).is_empty());

        let calm = with_intercept(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, -1.0, 3.0]);
        let a = solve_problem3(&calm, &c, &cfg(1, 4, 0.0)).unwrap();
        assert!(big_m_audit(&calm, &a, &cfg(1, 4, 0.0)).is_empty());
    }

    #[test]
    fn full_relaxation_has_every_row() {
        let data = with_intercept(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.0, 1.0, 2.0, 3.0, 4.0]);
        let c = cluster(data.x(), data.y(), 3).unwrap();
        let lp = root_relaxation(&data, &c, &cfg(2, 3, 0.2)).unwrap();
        // 2*K*n big-M rows, L assignment rows, one budget row, (K-1)(L-1)
        // symmetry rows.
        assert_eq!(lp.num_constraints(), 2 * 2 * 5 + 3 + 1 + 2);
        let sol = solve_lp(&lp).unwrap();
        assert!(sol.is_optimal());
        assert!(sol.objective_value <= 1e-9);
    }
}
