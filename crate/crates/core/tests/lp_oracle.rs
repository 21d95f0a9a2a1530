//! Cross-checks the simplex against brute-force vertex enumeration.

mod common;

use common::{random_lp, vertex_oracle};
use fmiom::data::SplitMix64;
use fmiom::lp::{solve_lp, LinearProgram, LpStatus, Relation};

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = SplitMix64::new(2024);
    let mut feasible = 0;
    for case in 0..200 {
        let p = random_lp(&mut rng);
        let sol = solve_lp(&p.lp).unwrap();
        match vertex_oracle(&p) {
            Some(best) => {
                feasible += 1;
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
                assert!(
                    (sol.objective_value - best).abs() <= 1e-6 * (1.0 + best.abs()),
                    "case {case}: simplex {} vs oracle {best}",
                    sol.objective_value
                );
            }
            None => assert_eq!(sol.status, LpStatus::Infeasible, "case {case}"),
        }
    }
    assert!(feasible >= 50, "only {feasible} feasible instances");
}

#[test]
fn duals_certify_optimality() {
    // With v >= 0 and no upper bounds, y is dual feasible when its signs match
    // the rows and c - A'y >= 0; then b.y bounds the primal from below.
    let mut rng = SplitMix64::new(77);
    for _ in 0..100 {
        let n = 2 + rng.below(4) as usize;
        let m = 1 + rng.below(6) as usize;
        let mut lp = LinearProgram::new(n);
        let cost: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.1, 4.0)).collect();
        for (j, &c) in cost.iter().enumerate() {
            lp.set_cost(j, c);
        }
        let mut rows = Vec::new();
        for _ in 0..m {
            let a: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 3.0)).collect();
            let b = rng.uniform_in(-2.0, 5.0);
            let rel = if rng.below(2) == 0 { Relation::Ge } else { Relation::Le };
            lp.add_constraint(a.iter().copied().enumerate().collect(), rel, b);
            rows.push((a, rel, b));
        }
        let sol = solve_lp(&lp).unwrap();
        if !sol.is_optimal() {
            continue;
        }
        let mut dual_obj = 0.0;
        let mut reduced = cost.clone();
        for (r, (a, rel, b)) in rows.iter().enumerate() {
            let y = sol.duals[r];
            match rel {
                Relation::Ge => assert!(y >= -1e-9),
                Relation::Le => assert!(y <= 1e-9),
                Relation::Eq => {}
            }
            dual_obj += y * b;
            for j in 0..n {
                reduced[j] -= a[j] * y;
            }
        }
        assert!(reduced.iter().all(|&d| d >= -1e-9), "{reduced:?}");
        assert!(dual_obj <= sol.objective_value + 1e-9);
        assert!((dual_obj - sol.objective_value).abs() <= 1e-7 * (1.0 + dual_obj.abs()));
    }
}

#[test]
fn objective_invariant_under_row_permutation_and_scaling() {
    let mut rng = SplitMix64::new(5);
    for _ in 0..60 {
        let p = random_lp(&mut rng);
        let base = solve_lp(&p.lp).unwrap();
        if !base.is_optimal() {
            continue;
        }
        let n = p.lp.num_vars();
        let mut shuffled = LinearProgram::new(n);
        for j in 0..n {
            shuffled.set_cost(j, p.lp.objective()[j]);
            let (lo, hi) = p.lp.bounds(j);
            shuffled.set_bounds(j, lo, hi);
        }
        let mut rows: Vec<_> = p.lp.constraints().to_vec();
        rows.reverse();
        for row in rows {
            let s = rng.uniform_in(0.01, 100.0);
            let coeffs = row.coeffs.iter().map(|&(j, a)| (j, a * s)).collect();
            shuffled.add_constraint(coeffs, row.relation, row.rhs * s);
        }
        let other = solve_lp(&shuffled).unwrap();
        assert!(other.is_optimal());
        let tol = 1e-9 * (1.0 + base.objective_value.abs());
        assert!((other.objective_value - base.objective_value).abs() <= tol);
    }
}

#[test]
fn ill_conditioned_node_is_infeasible() {
    // Three singleton clusters forced out against an outlier budget of 2.5,
    // with big-M rows scaled over many orders of magnitude.
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/ill_conditioned.lp")).unwrap();
    let lp = LinearProgram::from_text(&text).unwrap();
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
}
