use proptest::prelude::*;
use seedfolio_core::matrix_game::{
    best_response_col, best_response_row, exploitability, solve_approx, solve_exact, LearningRate,
    MixedStrategy, PayoffMatrix,
};

fn matrix() -> impl Strategy<Value = PayoffMatrix> {
    (1usize..=12, 1usize..=12).prop_flat_map(|(r, c)| {
        prop::collection::vec(0.0f64..=1.0, r * c).prop_map(move |xs| {
            PayoffMatrix::from_rows(xs.chunks(c).map(|row| row.to_vec()).collect()).unwrap()
        })
    })
}

/// Matrices whose entries come from {0, 0.5, 1}, like game outcomes.
fn outcome_matrix() -> impl Strategy<Value = PayoffMatrix> {
    (1usize..=10, 1usize..=10).prop_flat_map(|(r, c)| {
        prop::collection::vec(0u8..3, r * c).prop_map(move |xs| {
            PayoffMatrix::from_rows(
                xs.chunks(c)
                    .map(|row| row.iter().map(|&x| x as f64 / 2.0).collect())
                    .collect(),
            )
            .unwrap()
        })
    })
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(200)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn exact_solution_is_a_saddle_point(m in matrix()) {
        let eq = solve_exact(&m).unwrap();
        let (_, worst_col) = best_response_col(&m, &eq.row_strategy).unwrap();
        let (_, best_row) = best_response_row(&m, &eq.col_strategy).unwrap();
        prop_assert!(worst_col >= eq.value - 1e-8);
        prop_assert!(best_row <= eq.value + 1e-8);
        prop_assert!(eq.residual <= 1e-8);
    }

    #[test]
    fn degenerate_outcome_matrices_solve(m in outcome_matrix()) {
        let eq = solve_exact(&m).unwrap();
        prop_assert!(eq.residual <= 1e-8, "residual {}", eq.residual);
    }

    #[test]
    fn value_is_affine_equivariant(m in matrix(), a in 0.05f64..=1.0, b in 0.0f64..=1.0) {
        // Keep the transformed entries inside [0, 1].
        let b = b * (1.0 - a);
        let v = solve_exact(&m).unwrap().value;
        let w = solve_exact(&m.affine(a, b).unwrap()).unwrap().value;
        prop_assert!((w - (a * v + b)).abs() <= 1e-8);
    }

    #[test]
    fn swapping_roles_complements_the_value(m in matrix()) {
        let v = solve_exact(&m).unwrap().value;
        let w = solve_exact(&m.swapped_roles()).unwrap().value;
        prop_assert!((v + w - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn nash_guarantees_the_value(m in matrix(), seed in any::<u64>()) {
        let eq = solve_exact(&m).unwrap();
        // Any column strategy, pure or mixed, concedes at least v to p.
        let j = (seed as usize) % m.cols();
        let pure = MixedStrategy::pure(m.cols(), j).unwrap();
        prop_assert!(m.expected(&eq.row_strategy, &pure).unwrap() >= eq.value - 1e-8);
        let u = MixedStrategy::uniform(m.cols()).unwrap();
        prop_assert!(m.expected(&eq.row_strategy, &u).unwrap() >= eq.value - 1e-8);
    }

    #[test]
    fn exploitability_is_non_negative(m in matrix()) {
        let v = solve_exact(&m).unwrap().value;
        let p = MixedStrategy::uniform(m.rows()).unwrap();
        let q = MixedStrategy::uniform(m.cols()).unwrap();
        let e = exploitability(&m, &p, &q, v).unwrap();
        prop_assert!(e.row >= 0.0 && e.col >= 0.0);
        prop_assert!((e.average - 0.5 * (e.row + e.col)).abs() < 1e-15);
    }
}

#[test]
fn approximate_solver_improves_with_iterations() {
    let m = PayoffMatrix::from_rows(vec![
        vec![0.5, 1.0, 0.0, 0.7],
        vec![0.0, 0.5, 1.0, 0.2],
        vec![1.0, 0.0, 0.5, 0.9],
    ])
    .unwrap();
    let v = solve_exact(&m).unwrap().value;
    let gap = |iters| {
        let eq = solve_approx(&m, iters, LearningRate::Anytime).unwrap();
        exploitability(&m, &eq.row_strategy, &eq.col_strategy, v)
            .unwrap()
            .average
    };
    let coarse = gap(200);
    let fine = gap(50_000);
    assert!(fine < 0.03, "exploitability {fine}");
    assert!(fine < coarse);
}
