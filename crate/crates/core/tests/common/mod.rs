//! Instance generators and brute-force oracles shared by the test targets.
#![allow(dead_code, clippy::needless_range_loop)]

use fmiom::data::SplitMix64;
use fmiom::dataset::Dataset;
use fmiom::lp::{LinearProgram, Relation};

pub struct BoxedLp {
    pub lp: LinearProgram,
    /// Dense rows `a . v <= b` covering every constraint and every bound,
    /// equalities appear as a pair. Used only by the oracle.
    halfspaces: Vec<(Vec<f64>, f64)>,
    equalities: Vec<(Vec<f64>, f64)>,
    cost: Vec<f64>,
}

pub fn random_lp(rng: &mut SplitMix64) -> BoxedLp {
    let n = 1 + rng.below(5) as usize;
    let m = rng.below(9) as usize;
    let mut lp = LinearProgram::new(n);
    let mut halfspaces = Vec::new();
    let mut equalities = Vec::new();
    let cost: Vec<f64> = (0..n).map(|_| rng.uniform_in(-5.0, 5.0)).collect();
    let mut anchor = Vec::with_capacity(n);
    for (j, &c) in cost.iter().enumerate() {
        lp.set_cost(j, c);
        let lo = rng.uniform_in(-5.0, 1.0);
        let hi = lo + rng.uniform_in(0.5, 6.0);
        lp.set_bounds(j, lo, hi);
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        halfspaces.push((e.clone(), hi));
        halfspaces.push((e.iter().map(|v| -v).collect(), -lo));
        anchor.push(rng.uniform_in(lo, hi));
    }
    for r in 0..m {
        let a: Vec<f64> = (0..n).map(|_| rng.uniform_in(-3.0, 3.0)).collect();
        let at_anchor: f64 = a.iter().zip(&anchor).map(|(x, y)| x * y).sum();
        let slack = rng.uniform_in(0.0, 2.0);
        let coeffs = a.iter().copied().enumerate().collect();
        // Mostly feasible instances; every fourth row may cut the anchor off.
        let shift = if r % 4 == 3 { -slack * 3.0 } else { slack };
        match rng.below(5) {
            0 if r == 0 => {
                lp.add_constraint(coeffs, Relation::Eq, at_anchor);
                equalities.push((a, at_anchor));
            }
            0 | 1 => {
                lp.add_constraint(coeffs, Relation::Ge, at_anchor - shift);
                halfspaces.push((a.iter().map(|v| -v).collect(), -(at_anchor - shift)));
            }
            _ => {
                lp.add_constraint(coeffs, Relation::Le, at_anchor + shift);
                halfspaces.push((a, at_anchor + shift));
            }
        }
    }
    BoxedLp {
        lp,
        halfspaces,
        equalities,
        cost,
    }
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, k, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, n, &mut Vec::new(), &mut out);
    out
}

/// Minimum of the objective over all basic feasible points, or `None` when
/// the polytope is empty.
pub fn vertex_oracle(p: &BoxedLp) -> Option<f64> {
    let n = p.cost.len();
    let free = n - p.equalities.len();
    let mut best: Option<f64> = None;
    for subset in combinations(free, p.halfspaces.len()) {
        let mut rows: Vec<Vec<f64>> = p.equalities.iter().map(|e| e.0.clone()).collect();
        let mut rhs: Vec<f64> = p.equalities.iter().map(|e| e.1).collect();
        for &s in &subset {
            rows.push(p.halfspaces[s].0.clone());
            rhs.push(p.halfspaces[s].1);
        }
        let Some(v) = solve_dense(rows, rhs) else { continue };
        let feasible = p
            .halfspaces
            .iter()
            .all(|(a, b)| a.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() <= b + 1e-8)
            && p
                .equalities
                .iter()
                .all(|(a, b)| (a.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() - b).abs() <= 1e-8);
        if feasible {
            let obj: f64 = p.cost.iter().zip(&v).map(|(c, x)| c * x).sum();
            best = Some(best.map_or(obj, |b: f64| b.min(obj)));
        }
    }
    best
}

/// Noisy two-piece data with an optional intercept column.
pub fn instance(seed: u64) -> (Dataset, usize, usize, f64) {
    let mut rng = SplitMix64::new(seed);
    let n = 8 + rng.below(23) as usize;
    let l = 2 + rng.below(5) as usize;
    let k = 1 + rng.below(2) as usize;
    let rho = if rng.below(2) == 0 { 0.0 } else { 0.2 };
    let intercept = rng.below(2) == 0;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n {
        let v = rng.uniform_in(-2.0, 2.0);
        let base = if v < 0.0 { 1.5 * v + 1.0 } else { -0.5 * v + 1.0 };
        let outlier = rng.uniform() < 0.1;
        let noise = if outlier { rng.normal() * 5.0 } else { rng.normal() * 0.1 };
        x.push(if intercept { vec![v, 1.0] } else { vec![v] });
        y.push(base + noise);
    }
    (Dataset::from_rows(x, y).unwrap(), k, l, rho)
}

/// Two zero-noise segments with an intercept column: `y = x` on `[0, 1]`
/// and `y = 4 - x` on `[3, 4]`, 20 points each.
pub fn two_segments() -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..20 {
        let v = i as f64 / 19.0;
        x.push(vec![v, 1.0]);
        y.push(v);
    }
    for i in 0..20 {
        let v = 3.0 + i as f64 / 19.0;
        x.push(vec![v, 1.0]);
        y.push(-v + 4.0);
    }
    (x, y)
}

