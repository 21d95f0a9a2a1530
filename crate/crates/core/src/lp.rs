//! Dense bounded two-phase primal simplex and the least-absolute-deviations fit built
//! on top of it.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    c . v
//! subject to  a_r . v  (<=, >=, =)  b_r      for every row r
//!             lo_j <= v_j <= hi_j             for every variable j
//! ```
//!
//! Every row gets a bounded logical variable, so the identity is always a
//! starting basis and variable bounds are handled directly by the ratio
//! test. Rows and then columns are scaled to unit max-norm. Pricing is
//! Dantzig's rule with a switch to Bland's rule after a run of degenerate
//! pivots; phase one minimizes the sum of bound violations.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Absolute feasibility tolerance on scaled rows.
pub const FEAS_TOL: f64 = 1e-7;
/// Working primal tolerance inside the ratio test.
const PRIMAL_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
/// Consecutive degenerate Dantzig pivots tolerated before Bland's rule.
const DEGENERATE_RUN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sparse row: `(variable, coefficient)` pairs. Repeated variables add up.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    /// A problem over `num_vars` variables, each bounded to `[0, +inf)` and
    /// with zero cost until told otherwise.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.objective[var] = cost;
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.lower[var] = lo;
        self.upper[var] = hi;
    }

    pub fn set_free(&mut self, var: usize) {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY);
    }

    /// Appends a row and returns its index.
    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::invalid("linear program has no variables"));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite cost on variable {j}")));
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::invalid(format!("bad bounds [{lo}, {hi}] on variable {j}")));
            }
        }
        for (r, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::invalid(format!("non-finite right-hand side in row {r}")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(Error::invalid(format!("row {r} references variable {j} of {n}")));
                }
                if !a.is_finite() {
                    return Err(Error::invalid(format!("non-finite coefficient in row {r}")));
                }
            }
        }
        Ok(())
    }

    /// Plain-text dump, one constraint per line, for cross-checking with
    /// other solvers.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vars {}", self.num_vars());
        let _ = write!(out, "minimize");
        for (j, c) in self.objective.iter().enumerate() {
            if *c != 0.0 {
                let _ = write!(out, " {j}:{c:?}");
            }
        }
        out.push('\n');
        for j in 0..self.num_vars() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo != 0.0 || hi != f64::INFINITY {
                let _ = writeln!(out, "bound {j} {lo:?} {hi:?}");
            }
        }
        for row in &self.constraints {
            let _ = write!(out, "row");
            for &(j, a) in &row.coeffs {
                let _ = write!(out, " {j}:{a:?}");
            }
            let _ = writeln!(out, " {} {:?}", row.relation.symbol(), row.rhs);
        }
        out
    }

    /// Reads the format written by [`to_text`](Self::to_text).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lp: Option<LinearProgram> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let mut parts = raw.split_whitespace();
            let Some(head) = parts.next() else { continue };
            if head == "vars" {
                let n = parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::parse(line, "bad variable count"))?;
                lp = Some(LinearProgram::new(n));
                continue;
            }
            let lp = lp.as_mut().ok_or_else(|| Error::parse(line, "expected `vars N` first"))?;
            let n = lp.num_vars();
            let num = |t: &str| -> Result<f64> {
                t.parse().map_err(|_| Error::parse(line, format!("bad number {t:?}")))
            };
            let term = |t: &str| -> Result<(usize, f64)> {
                let (j, a) = t
                    .split_once(':')
                    .ok_or_else(|| Error::parse(line, format!("bad term {t:?}")))?;
                let j: usize = j
                    .parse()
                    .ok()
                    .filter(|&j| j < n)
                    .ok_or_else(|| Error::parse(line, format!("bad variable index {j:?}")))?;
                Ok((j, num(a)?))
            };
            match head {
                "minimize" => {
                    for t in parts {
                        let (j, c) = term(t)?;
                        lp.set_cost(j, c);
                    }
                }
                "bound" => {
                    let f: Vec<&str> = parts.collect();
                    if f.len() != 3 {
                        return Err(Error::parse(line, "expected `bound j lo hi`"));
                    }
                    let (j, _) = term(&format!("{}:0", f[0]))?;
                    lp.set_bounds(j, num(f[1])?, num(f[2])?);
                }
                "row" => {
                    let f: Vec<&str> = parts.collect();
                    if f.len() < 2 {
                        return Err(Error::parse(line, "row without relation"));
                    }
                    let relation = match f[f.len() - 2] {
                        "<=" => Relation::Le,
                        ">=" => Relation::Ge,
                        "=" => Relation::Eq,
                        other => return Err(Error::parse(line, format!("bad relation {other:?}"))),
                    };
                    let coeffs = f[..f.len() - 2].iter().map(|t| term(t)).collect::<Result<_>>()?;
                    lp.add_constraint(coeffs, relation, num(f[f.len() - 1])?);
                }
                other => return Err(Error::parse(line, format!("unknown record {other:?}"))),
            }
        }
        lp.ok_or_else(|| Error::parse(1, "empty LP file"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable values; meaningful only when optimal.
    pub values: Vec<f64>,
    pub objective_value: f64,
    /// One multiplier per constraint row, in the sign convention of the
    /// minimization: `>=` rows get `y >= 0`, `<=` rows get `y <= 0`.
    pub duals: Vec<f64>,
}

impl LpSolution {
    fn empty(status: LpStatus, n: usize, m: usize) -> Self {
        LpSolution {
            status,
            values: vec![f64::NAN; n],
            objective_value: match status {
                LpStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
            duals: vec![0.0; m],
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Scaled working form `A x + s = b`: one logical `s_r` per row carries the
/// row's relation as bounds (`<=` gives `s >= 0`, `>=` gives `s <= 0`, `=`
/// fixes `s = 0`). Columns `0..n` are structural, `n..n+m` logical.
struct Working {
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    b: Vec<f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl Working {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.num_constraints();

        // Merge repeated entries and drop zeros.
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        let mut dense = vec![0.0; n];
        let mut touched = Vec::new();
        for con in &lp.constraints {
            for &(j, a) in &con.coeffs {
                if dense[j] == 0.0 {
                    touched.push(j);
                }
                dense[j] += a;
            }
            touched.sort_unstable();
            touched.dedup();
            rows.push(
                touched
                    .iter()
                    .map(|&j| (j, dense[j]))
                    .filter(|&(_, a)| a != 0.0)
                    .collect(),
            );
            for &j in &touched {
                dense[j] = 0.0;
            }
            touched.clear();
        }

        let row_scale: Vec<f64> = rows
            .iter()
            .map(|r| {
                let mx = r.iter().fold(0.0f64, |acc, &(_, a)| acc.max(a.abs()));
                if mx > 0.0 {
                    1.0 / mx
                } else {
                    1.0
                }
            })
            .collect();
        let mut col_max = vec![0.0f64; n];
        for (r, row) in rows.iter().enumerate() {
            for &(j, a) in row {
                col_max[j] = col_max[j].max((a * row_scale[r]).abs());
            }
        }
        let col_scale: Vec<f64> = col_max
            .iter()
            .map(|&mx| if mx > 0.0 { 1.0 / mx } else { 1.0 })
            .collect();

        let mut counts = vec![0usize; n + 1];
        for row in &rows {
            for &(j, _) in row {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let nnz = col_start[n];
        let mut row_idx = vec![0; nnz];
        let mut vals = vec![0.0; nnz];
        for (r, row) in rows.iter().enumerate() {
            for &(j, a) in row {
                let k = fill[j];
                row_idx[k] = r;
                vals[k] = a * row_scale[r] * col_scale[j];
                fill[j] += 1;
            }
        }

        let mut cost = vec![0.0; n + m];
        let mut lo = vec![0.0; n + m];
        let mut hi = vec![0.0; n + m];
        for j in 0..n {
            cost[j] = lp.objective[j] * col_scale[j];
            lo[j] = lp.lower[j] / col_scale[j];
            hi[j] = lp.upper[j] / col_scale[j];
        }
        for (r, con) in lp.constraints.iter().enumerate() {
            let (l, h) = match con.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo[n + r] = l;
            hi[n + r] = h;
        }
        let b = lp
            .constraints
            .iter()
            .zip(&row_scale)
            .map(|(c, s)| c.rhs * s)
            .collect();
        Working {
            m,
            n,
            col_start,
            row_idx,
            vals,
            cost,
            lo,
            hi,
            b,
            row_scale,
            col_scale,
        }
    }

    /// Calls `f(row, value)` for each nonzero of column `j`.
    fn for_col(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                f(self.row_idx[k], self.vals[k]);
            }
        } else {
            f(j - self.n, 1.0);
        }
    }

    fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            (self.col_start[j]..self.col_start[j + 1])
                .map(|k| self.vals[k] * y[self.row_idx[k]])
                .sum()
        } else {
            y[j - self.n]
        }
    }

    fn col_len(&self, j: usize) -> usize {
        if j < self.n {
            self.col_start[j + 1] - self.col_start[j]
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Free nonbasic variable held at zero.
    Zero,
}

/// Bounded revised simplex with an explicit, periodically refactored basis
/// inverse.
struct Simplex<'a> {
    w: &'a Working,
    basis: Vec<usize>,
    state: Vec<State>,
    x: Vec<f64>,
    /// Column-major `m x m` basis inverse: entry `(i, k)` at `k * m + i`.
    binv: Vec<f64>,
    since_refactor: usize,
}

/// Pivots between basis refactorizations.
const REFACTOR_EVERY: usize = 100;

impl<'a> Simplex<'a> {
    fn new(w: &'a Working) -> Result<Self> {
        let (m, n) = (w.m, w.n);
        let mut state = vec![State::Lower; n + m];
        let mut x = vec![0.0; n + m];
        for j in 0..n {
            let (l, h) = (w.lo[j], w.hi[j]);
            (state[j], x[j]) = if l.is_finite() {
                (State::Lower, l)
            } else if h.is_finite() {
                (State::Upper, h)
            } else {
                (State::Zero, 0.0)
            };
        }
        let mut basis: Vec<usize> = (n..n + m).collect();
        for j in n..n + m {
            state[j] = State::Basic;
        }

        // Logical values at the all-logical basis.
        let mut s = w.b.clone();
        for j in 0..n {
            if x[j] != 0.0 {
                w.for_col(j, |r, a| s[r] -= a * x[j]);
            }
        }
        // Crash: a row whose logical starts out of bounds takes a singleton
        // structural column instead, when that column can absorb the excess.
        let mut taken = vec![false; n];
        for r in 0..m {
            let (l, h) = (w.lo[n + r], w.hi[n + r]);
            let target = s[r].clamp(l, h);
            if target == s[r] {
                continue;
            }
            for j in 0..n {
                if taken[j] || w.col_len(j) != 1 || w.row_idx[w.col_start[j]] != r {
                    continue;
                }
                let a = w.vals[w.col_start[j]];
                let v = x[j] + (s[r] - target) / a;
                if v >= w.lo[j] && v <= w.hi[j] {
                    taken[j] = true;
                    basis[r] = j;
                    state[j] = State::Basic;
                    x[j] = v;
                    state[n + r] = if target == l { State::Lower } else { State::Upper };
                    x[n + r] = target;
                    break;
                }
            }
        }
        let mut sx = Simplex {
            w,
            basis,
            state,
            x,
            binv: Vec::new(),
            since_refactor: 0,
        };
        sx.refactor()?;
        Ok(sx)
    }

    /// Recomputes the basis inverse from scratch and the basic values from
    /// the nonbasic ones.
    fn refactor(&mut self) -> Result<()> {
        let m = self.w.m;
        if !self.singleton_inverse() {
            let mut bmat = nalgebra::DMatrix::<f64>::zeros(m, m);
            for (pos, &j) in self.basis.iter().enumerate() {
                self.w.for_col(j, |r, a| bmat[(r, pos)] = a);
            }
            let inv = bmat
                .lu()
                .try_inverse()
                .ok_or_else(|| Error::Solver("basis matrix became singular".into()))?;
            self.binv.clear();
            self.binv.extend_from_slice(inv.as_slice());
        }
        let mut rhs = self.w.b.clone();
        for j in 0..self.w.n + m {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                let v = self.x[j];
                self.w.for_col(j, |r, a| rhs[r] -= a * v);
            }
        }
        let mut xb = vec![0.0; m];
        for (k, &v) in rhs.iter().enumerate() {
            if v != 0.0 {
                for (xi, a) in xb.iter_mut().zip(&self.binv[k * m..(k + 1) * m]) {
                    *xi += a * v;
                }
            }
        }
        for (pos, v) in xb.into_iter().enumerate() {
            self.x[self.basis[pos]] = v;
        }
        self.since_refactor = 0;
        Ok(())
    }

    /// Inverts a basis made of singleton columns in distinct rows directly.
    fn singleton_inverse(&mut self) -> bool {
        let m = self.w.m;
        let mut entries = Vec::with_capacity(m);
        let mut seen = vec![false; m];
        for &j in &self.basis {
            let mut count = 0;
            let mut entry = (0, 0.0);
            self.w.for_col(j, |r, a| {
                if a != 0.0 {
                    count += 1;
                    entry = (r, a);
                }
            });
            if count != 1 || seen[entry.0] {
                return false;
            }
            seen[entry.0] = true;
            entries.push(entry);
        }
        self.binv.clear();
        self.binv.resize(m * m, 0.0);
        for (pos, (r, a)) in entries.into_iter().enumerate() {
            self.binv[r * m + pos] = 1.0 / a;
        }
        true
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        (self.w.lo[j] - v).max(v - self.w.hi[j]).max(0.0)
    }

    fn max_infeasibility(&self) -> f64 {
        self.basis.iter().map(|&j| self.infeasibility(j)).fold(0.0, f64::max)
    }

    /// `y = c_B B^-1` for the given basic costs.
    fn duals(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.w.m;
        (0..m)
            .map(|k| cb.iter().zip(&self.binv[k * m..(k + 1) * m]).map(|(c, a)| c * a).sum())
            .collect()
    }

    /// Phase-one costs: -1 below the lower bound, +1 above the upper bound.
    fn phase_one_costs(&self) -> Vec<f64> {
        self.basis
            .iter()
            .map(|&j| {
                if self.x[j] < self.w.lo[j] - PRIMAL_TOL {
                    -1.0
                } else if self.x[j] > self.w.hi[j] + PRIMAL_TOL {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn choose_entering(&self, y: &[f64], phase_one: bool, bland: bool, blocked: &[bool]) -> Option<(usize, f64)> {
        let w = self.w;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..w.n + w.m {
            let st = self.state[j];
            if st == State::Basic || blocked[j] || w.lo[j] == w.hi[j] {
                continue;
            }
            let c = if phase_one { 0.0 } else { w.cost[j] };
            let d = c - w.col_dot(j, y);
            let improving = match st {
                State::Lower => d < -OPT_TOL,
                State::Upper => d > OPT_TOL,
                State::Zero => d.abs() > OPT_TOL,
                State::Basic => false,
            };
            if !improving {
                continue;
            }
            if bland {
                return Some((j, d));
            }
            if best.map_or(true, |(_, bd)| d.abs() > bd.abs()) {
                best = Some((j, d));
            }
        }
        best
    }

    /// Bounds a basic variable must respect during the ratio test. In phase
    /// one an infeasible variable may travel up to the bound it violates.
    fn ratio_bounds(&self, j: usize, phase_one: bool) -> (f64, f64) {
        let (l, h) = (self.w.lo[j], self.w.hi[j]);
        let v = self.x[j];
        if phase_one && v < l - PRIMAL_TOL {
            (f64::NEG_INFINITY, l)
        } else if phase_one && v > h + PRIMAL_TOL {
            (h, f64::INFINITY)
        } else {
            (l, h)
        }
    }

    /// Runs pivots until optimal for the current phase.
    fn run(&mut self, phase_one: bool, limit: usize, iterations: &mut usize) -> Result<LpStatus> {
        let w = self.w;
        let m = w.m;
        let mut degenerate_run = 0usize;
        let mut blocked = vec![false; w.n + m];
        let mut alpha = vec![0.0; m];
        loop {
            if *iterations >= limit {
                return Err(Error::Solver(format!(
                    "simplex did not converge within {limit} pivots ({m} rows, {} columns)",
                    w.n
                )));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let cb: Vec<f64> = if phase_one {
                let c = self.phase_one_costs();
                if c.iter().all(|&v| v == 0.0) {
                    return Ok(LpStatus::Optimal);
                }
                c
            } else {
                self.basis.iter().map(|&j| w.cost[j]).collect()
            };
            let y = self.duals(&cb);
            let bland = degenerate_run >= DEGENERATE_RUN;
            let Some((q, d)) = self.choose_entering(&y, phase_one, bland, &blocked) else {
                return Ok(LpStatus::Optimal);
            };
            let dir = if d < 0.0 { 1.0 } else { -1.0 };
            alpha.iter_mut().for_each(|a| *a = 0.0);
            w.for_col(q, |r, a| {
                for (ai, b) in alpha.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
                    *ai += b * a;
                }
            });

            // Harris two-pass ratio test; Bland mode uses the exact test and
            // breaks ties by smallest variable index.
            let slack_tol = if bland { 0.0 } else { PRIMAL_TOL };
            let mut theta_max = f64::INFINITY;
            for i in 0..m {
                let rate = -dir * alpha[i];
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                let (l, h) = self.ratio_bounds(self.basis[i], phase_one);
                let v = self.x[self.basis[i]];
                let t = if rate < 0.0 {
                    (v - l + slack_tol) / -rate
                } else {
                    (h - v + slack_tol) / rate
                };
                theta_max = theta_max.min(t);
            }
            let mut leave: Option<(usize, f64, f64)> = None;
            let mut leave_key = f64::NEG_INFINITY;
            for i in 0..m {
                let rate = -dir * alpha[i];
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                let (l, h) = self.ratio_bounds(self.basis[i], phase_one);
                let v = self.x[self.basis[i]];
                let (t, bound) = if rate < 0.0 { ((v - l) / -rate, l) } else { ((h - v) / rate, h) };
                if !t.is_finite() || t > theta_max {
                    continue;
                }
                let key = if bland {
                    -(self.basis[i] as f64)
                } else {
                    alpha[i].abs()
                };
                if key > leave_key {
                    leave_key = key;
                    leave = Some((i, t.max(0.0), bound));
                }
            }
            let flip = w.hi[q] - w.lo[q];

            if leave.is_none() && !flip.is_finite() {
                if phase_one {
                    // Rounding noise: the column cannot reduce infeasibility.
                    blocked[q] = true;
                    continue;
                }
                return Ok(LpStatus::Unbounded);
            }
            *iterations += 1;
            let (theta, pivot) = match leave {
                Some((i, t, bound)) if t < flip => (t, Some((i, bound))),
                _ => (flip, None),
            };
            if theta <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
                blocked.iter_mut().for_each(|b| *b = false);
            }

            self.x[q] += dir * theta;
            for i in 0..m {
                if alpha[i] != 0.0 {
                    self.x[self.basis[i]] -= dir * theta * alpha[i];
                }
            }
            match pivot {
                None => {
                    self.state[q] = if dir > 0.0 { State::Upper } else { State::Lower };
                    self.x[q] = if dir > 0.0 { w.hi[q] } else { w.lo[q] };
                }
                Some((r, bound)) => {
                    let out = self.basis[r];
                    self.x[out] = bound;
                    self.state[out] = if bound == w.lo[out] {
                        State::Lower
                    } else if bound == w.hi[out] {
                        State::Upper
                    } else {
                        State::Zero
                    };
                    self.state[q] = State::Basic;
                    self.basis[r] = q;
                    self.pivot_inverse(r, &alpha);
                }
            }
        }
    }

    fn pivot_inverse(&mut self, r: usize, alpha: &[f64]) {
        let m = self.w.m;
        let p = alpha[r];
        for col in self.binv.chunks_exact_mut(m) {
            let v = col[r] / p;
            if v != 0.0 {
                for (c, a) in col.iter_mut().zip(alpha) {
                    *c -= a * v;
                }
            }
            col[r] = v;
        }
        self.since_refactor += 1;
    }

    fn solve(&mut self) -> Result<LpStatus> {
        let limit = 50 * (self.w.m + self.w.n) + 10_000;
        let mut iterations = 0usize;
        for _ in 0..4 {
            if self.max_infeasibility() > PRIMAL_TOL {
                self.run(true, limit, &mut iterations)?;
                self.refactor()?;
                if self.max_infeasibility() > FEAS_TOL {
                    return Ok(LpStatus::Infeasible);
                }
            }
            let status = self.run(false, limit, &mut iterations)?;
            if status == LpStatus::Unbounded {
                return Ok(status);
            }
            // Confirm on a fresh factorization before reporting optimality.
            self.refactor()?;
            if self.max_infeasibility() <= FEAS_TOL {
                let cb: Vec<f64> = self.basis.iter().map(|&j| self.w.cost[j]).collect();
                let y = self.duals(&cb);
                let blocked = vec![false; self.w.n + self.w.m];
                if self.choose_entering(&y, false, false, &blocked).is_none() {
                    return Ok(LpStatus::Optimal);
                }
            }
        }
        Err(Error::Solver("simplex failed to confirm optimality".into()))
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();
    let m = lp.num_constraints();
    if (0..n).any(|j| lp.lower[j] > lp.upper[j]) {
        return Ok(LpSolution::empty(LpStatus::Infeasible, n, m));
    }
    let w = Working::new(lp);
    let mut sx = Simplex::new(&w)?;
    let status = sx.solve()?;
    let mut sol = LpSolution::empty(status, n, m);
    if status != LpStatus::Optimal {
        return Ok(sol);
    }
    sol.values = (0..n).map(|j| sx.x[j] * w.col_scale[j]).collect();
    for (j, v) in sol.values.iter_mut().enumerate() {
        *v = v.clamp(lp.lower[j], lp.upper[j]);
    }
    sol.objective_value = sol.values.iter().zip(&lp.objective).map(|(v, c)| v * c).sum();
    let cb: Vec<f64> = sx.basis.iter().map(|&j| w.cost[j]).collect();
    let y = sx.duals(&cb);
    for r in 0..m {
        sol.duals[r] = y[r] * w.row_scale[r];
    }
    Ok(sol)
}

/// Coefficients of a least-absolute-deviations fit.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Fit {
    pub beta: Vec<f64>,
    pub total_abs_error: f64,
}

/// Minimizes `sum |y_i - beta . x_i|` over `beta`. No intercept is added.
pub fn l1_fit<R: AsRef<[f64]>>(x: &[R], y: &[f64]) -> Result<L1Fit> {
    if x.is_empty() {
        return Err(Error::invalid("l1_fit needs at least one point"));
    }
    if x.len() != y.len() {
        return Err(Error::invalid("l1_fit: x and y lengths differ"));
    }
    let d = x[0].as_ref().len();
    if x.iter().any(|row| row.as_ref().len() != d) {
        return Err(Error::invalid("l1_fit: ragged rows"));
    }
    // Solve the dual, max y.t s.t. X^T t = 0, -1 <= t <= 1, which has only
    // d rows; beta is read off its row duals. The primal form is the fallback
    // when the recovered beta does not attain the dual objective.
    let n = y.len();
    let mut dual = LinearProgram::new(n);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
    for (i, row) in x.iter().enumerate() {
        dual.set_bounds(i, -1.0, 1.0);
        dual.set_cost(i, -y[i]);
        for (j, &a) in row.as_ref().iter().enumerate() {
            if a != 0.0 {
                rows[j].push((i, a));
            }
        }
    }
    for coeffs in rows {
        dual.add_constraint(coeffs, Relation::Eq, 0.0);
    }
    let sol = solve_lp(&dual)?;
    if sol.is_optimal() {
        let beta: Vec<f64> = sol.duals.iter().map(|v| -v).collect();
        let total_abs_error = abs_error(x, y, &beta);
        let bound = -sol.objective_value;
        if total_abs_error <= bound + 1e-7 * (1.0 + bound.abs()) {
            return Ok(L1Fit {
                beta,
                total_abs_error,
            });
        }
    }
    primal_l1_fit(x, y, d)
}

fn primal_l1_fit<R: AsRef<[f64]>>(x: &[R], y: &[f64], d: usize) -> Result<L1Fit> {
    let n = y.len();
    // Layout: beta (d, free), u (n), v (n); beta.x_i + u_i - v_i = y_i.
    let mut lp = LinearProgram::new(d + 2 * n);
    for j in 0..d {
        lp.set_free(j);
    }
    for i in 0..n {
        lp.set_cost(d + i, 1.0);
        lp.set_cost(d + n + i, 1.0);
        let mut coeffs: Vec<(usize, f64)> = x[i]
            .as_ref()
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(j, &a)| (j, a))
            .collect();
        coeffs.push((d + i, 1.0));
        coeffs.push((d + n + i, -1.0));
        lp.add_constraint(coeffs, Relation::Eq, y[i]);
    }
    let sol = solve_lp(&lp)?;
    if !sol.is_optimal() {
        return Err(Error::Solver(format!("l1 fit LP ended {:?}", sol.status)));
    }
    let beta = sol.values[..d].to_vec();
    let total_abs_error = abs_error(x, y, &beta);
    Ok(L1Fit {
        beta,
        total_abs_error,
    })
}

/// `sum |y_i - beta . x_i|`.
pub fn abs_error<R: AsRef<[f64]>>(x: &[R], y: &[f64], beta: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(row, &yi)| (yi - dot(row.as_ref(), beta)).abs())
        .sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_row() {
        let mut lp = LinearProgram::new(1);
        lp.set_free(0);
        lp.set_cost(0, 1.0);
        lp.add_constraint(vec![(0, 1.0)], Relation::Ge, 3.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.values[0] - 3.0).abs() < 1e-12);
        assert!((sol.objective_value - 3.0).abs() < 1e-12);
        assert!((sol.duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_optimum_is_a_vertex() {
        let mut lp = LinearProgram::new(2);
        lp.set_cost(0, -1.0);
        lp.set_cost(1, -1.0);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.0);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        assert!((a.objective_value + 1.0).abs() < 1e-12);
        assert_eq!(a.values, b.values);
        let v = &a.values;
        assert!(
            (v[0] - 1.0).abs() < 1e-12 && v[1].abs() < 1e-12
                || (v[1] - 1.0).abs() < 1e-12 && v[0].abs() < 1e-12
        );
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_constraint(vec![(0, 1.0)], Relation::Le, -1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.set_cost(0, -1.0);
        lp.add_constraint(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);

        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, 2.0, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn bounds_of_every_shape() {
        // max x0 - x1 + x2 with x0 in [-inf, 4], x1 in [-2, 5], x2 fixed at 7,
        // x3 free, x0 + x3 = 1, x3 >= -10.
        let mut lp = LinearProgram::new(4);
        lp.set_cost(0, -1.0);
        lp.set_cost(1, 1.0);
        lp.set_cost(2, -1.0);
        lp.set_bounds(0, f64::NEG_INFINITY, 4.0);
        lp.set_bounds(1, -2.0, 5.0);
        lp.set_bounds(2, 7.0, 7.0);
        lp.set_free(3);
        lp.add_constraint(vec![(0, 1.0), (3, 1.0)], Relation::Eq, 1.0);
        lp.add_constraint(vec![(3, 1.0)], Relation::Ge, -10.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let expect = [4.0, -2.0, 7.0, -3.0];
        for (v, e) in sol.values.iter().zip(expect) {
            assert!((v - e).abs() < 1e-9, "{:?}", sol.values);
        }
        assert!((sol.objective_value + 13.0).abs() < 1e-9);
    }

    #[test]
    fn empty_rows_are_checked() {
        let mut lp = LinearProgram::new(1);
        lp.add_constraint(vec![(0, 0.0)], Relation::Ge, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
        let mut lp = LinearProgram::new(1);
        lp.add_constraint(vec![], Relation::Le, 1.0);
        lp.set_cost(0, 1.0);
        assert!(solve_lp(&lp).unwrap().is_optimal());
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.set_cost(0, 1.0);
        lp.set_cost(1, 2.0);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 2.0);
        lp.add_constraint(vec![(0, 2.0), (1, 2.0)], Relation::Eq, 4.0);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.objective_value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_programs_rejected() {
        assert!(solve_lp(&LinearProgram::new(0)).is_err());
        let mut lp = LinearProgram::new(1);
        lp.add_constraint(vec![(3, 1.0)], Relation::Le, 1.0);
        assert!(solve_lp(&lp).is_err());
        let mut lp = LinearProgram::new(1);
        lp.set_cost(0, f64::NAN);
        assert!(solve_lp(&lp).is_err());
    }

    #[test]
    fn l1_exact_line() {
        let x: Vec<Vec<f64>> = (1..=5).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (1..=5).map(|i| 2.0 * i as f64).collect();
        let fit = l1_fit(&x, &y).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 1e-9);
        assert!(fit.total_abs_error < 1e-9);
    }

    #[test]
    fn l1_intercept_only_is_median() {
        let x = vec![vec![1.0], vec![1.0], vec![1.0]];
        let y = [1.0, 3.0, 100.0];
        let fit = l1_fit(&x, &y).unwrap();
        assert!((fit.beta[0] - 3.0).abs() < 1e-9);
        assert!((fit.total_abs_error - 99.0).abs() < 1e-9);
        // Scanning oracle: the median minimizes the sum of absolute deviations.
        let best = (0..=10_000)
            .map(|s| {
                let c = s as f64 * 0.01;
                y.iter().map(|v| (v - c).abs()).sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((best - fit.total_abs_error).abs() < 1e-9);
    }

    #[test]
    fn l1_single_point_interpolates() {
        let fit = l1_fit(&[vec![-2.5, 0.0]], &[7.0]).unwrap();
        assert!(fit.total_abs_error < 1e-12);
    }

    #[test]
    fn dump_has_one_line_per_row() {
        let mut lp = LinearProgram::new(2);
        lp.set_cost(0, 1.0);
        lp.set_free(1);
        lp.add_constraint(vec![(0, 1.0), (1, -2.0)], Relation::Ge, 3.0);
        lp.add_constraint(vec![(1, 1.0)], Relation::Eq, 0.5);
        let text = lp.to_text();
        assert_eq!(text.lines().filter(|l| l.starts_with("row")).count(), 2);
        assert!(text.contains("row 0:1.0 1:-2.0 >= 3.0"));
        assert!(text.contains("bound 1 -inf inf"));
    }
}
