mod support;

use perfpriv_core::lp::{solve, LpStatus, StandardLp};
use perfpriv_core::Matrix;
use proptest::prelude::*;

/// Feasible LP whose columns and right-hand side are probability vectors.
#[derive(Debug, Clone)]
struct SimplexLp {
    cost: Vec<f64>,
    e: Matrix,
    b: Vec<f64>,
}

fn simplex_lp() -> impl Strategy<Value = SimplexLp> {
    (1usize..=4, 1usize..=7).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(0.0f64..1.0, m * n),
            prop::collection::vec(0.01f64..1.0, n),
            prop::collection::vec(0usize..n, 0..3),
        )
            .prop_map(move |(cost, raw, w, dups)| {
                let mut cols: Vec<Vec<f64>> = (0..n)
                    .map(|j| {
                        let c: Vec<f64> = (0..m).map(|i| raw[i * n + j] + 1e-3).collect();
                        let s: f64 = c.iter().sum();
                        c.into_iter().map(|v| v / s).collect()
                    })
                    .collect();
                // repeated columns make degenerate and redundant structure likely
                for (k, &d) in dups.iter().enumerate() {
                    let target = (d + k + 1) % n;
                    cols[target] = cols[d].clone();
                }
                let ws: f64 = w.iter().sum();
                let mut b = vec![0.0; m];
                for (c, wj) in cols.iter().zip(&w) {
                    for i in 0..m {
                        b[i] += c[i] * wj / ws;
                    }
                }
                SimplexLp {
                    cost,
                    e: Matrix::from_columns(m, &cols),
                    b,
                }
            })
    })
}

fn permuted(lp: &SimplexLp, perm: &[usize]) -> SimplexLp {
    let cols: Vec<Vec<f64>> = perm.iter().map(|&j| lp.e.column(j)).collect();
    SimplexLp {
        cost: perm.iter().map(|&j| lp.cost[j]).collect(),
        e: Matrix::from_columns(lp.e.rows(), &cols),
        b: lp.b.clone(),
    }
}

fn run(lp: &SimplexLp) -> perfpriv_core::lp::LpSolution {
    solve(&StandardLp::new(lp.cost.clone(), lp.e.clone(), lp.b.clone()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_basis_enumeration(lp in simplex_lp()) {
        let sol = run(&lp);
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        let oracle = support::brute_force_lp(&lp.cost, &lp.e, &lp.b).expect("oracle finds a basis");
        prop_assert!((sol.objective - oracle).abs() <= 1e-8, "lp {} oracle {}", sol.objective, oracle);
    }

    #[test]
    fn solution_is_feasible_and_sums_to_one(lp in simplex_lp()) {
        let sol = run(&lp);
        prop_assert!(sol.weights.iter().all(|&w| w >= -1e-12));
        let ew = lp.e.mul_vec(&sol.weights);
        prop_assert!(support::linf(&ew, &lp.b) <= 1e-8);
        prop_assert!((sol.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
        let obj: f64 = lp.cost.iter().zip(&sol.weights).map(|(c, w)| c * w).sum();
        prop_assert!((obj - sol.objective).abs() <= 1e-9);
    }

    #[test]
    fn dual_certifies_optimality(lp in simplex_lp()) {
        let sol = run(&lp);
        let ety = lp.e.transpose().mul_vec(&sol.dual);
        for (c, v) in lp.cost.iter().zip(&ety) {
            prop_assert!(c - v >= -1e-8, "reduced cost {}", c - v);
        }
        let by: f64 = lp.b.iter().zip(&sol.dual).map(|(b, y)| b * y).sum();
        prop_assert!((by - sol.objective).abs() <= 1e-7, "bᵀy {} objective {}", by, sol.objective);
    }

    #[test]
    fn column_permutation_invariance(lp in simplex_lp(), seed in any::<u64>()) {
        let n = lp.cost.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = run(&lp);
        let b = run(&permuted(&lp, &perm));
        prop_assert!((a.objective - b.objective).abs() <= 1e-9);
    }
}

#[test]
fn detects_infeasible_and_unbounded() {
    let e = Matrix::from_rows(&[[1.0, 1.0]]).unwrap();
    let inf = solve(&StandardLp::new(vec![1.0, 1.0], e.clone(), vec![-1.0]).unwrap()).unwrap();
    assert_eq!(inf.status, LpStatus::Infeasible);

    let e = Matrix::from_rows(&[[1.0, -1.0]]).unwrap();
    let unb = solve(&StandardLp::new(vec![-1.0, 0.0], e, vec![1.0]).unwrap()).unwrap();
    assert_eq!(unb.status, LpStatus::Unbounded);
}
