mod common;

use common::{field, q, rank_over_q, Q};
use num_traits::Zero;
use proptest::prelude::*;
use rigid_hk::linalg::{PrecMatrix, SolveOutcome, SparseMatrix};
use rigid_hk::padic::KElement;
use rigid_hk::{Exec, HkError};

fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..7, 1usize..7).prop_flat_map(|(r, c)| {
        // a sparse-ish generator hits rank deficiency often
        proptest::collection::vec(proptest::collection::vec(prop_oneof![3 => Just(0i64), 5 => -9i64..10], c), r)
    })
}

fn over_q(rows: &[Vec<i64>]) -> PrecMatrix<Q> {
    PrecMatrix::from_rows(&(), rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn rank_and_kernel_over_q(rows in small_matrix()) {
        let m = over_q(&rows);
        let rank = rank_over_q(&rows);
        prop_assert_eq!(m.rank(0).unwrap(), rank);
        let ker = m.kernel_basis(0).unwrap();
        prop_assert_eq!(ker.len(), m.cols() - rank);
        for v in &ker {
            prop_assert!(m.apply(v).unwrap().iter().all(|x| x.is_zero()));
        }
        let stacked = PrecMatrix::from_columns(&(), m.cols(), &ker).unwrap();
        prop_assert_eq!(stacked.rank(0).unwrap(), ker.len());
    }

    #[test]
    fn rank_and_kernel_over_qp(rows in small_matrix(), p in prop_oneof![Just(3u64), Just(5), Just(7)]) {
        let k = field(p, 30, None);
        let m = PrecMatrix::from_rows(&k, rows.iter().map(|r| r.iter().map(|&x| KElement::from_int(&k, x)).collect()).collect()).unwrap();
        // minors of 6x6 matrices with entries below 10 have ord_p well under 20
        let rank = rank_over_q(&rows);
        prop_assert_eq!(m.rank(20).unwrap(), rank);
        let ker = m.kernel_basis(20).unwrap();
        prop_assert_eq!(ker.len(), m.cols() - rank);
        for v in &ker {
            prop_assert!(m.apply(v).unwrap().iter().all(|x| x.is_zero_to(15)));
        }
    }

    #[test]
    fn sparse_agrees_with_dense(rows in small_matrix()) {
        let cols: Vec<Vec<(usize, Q)>> = (0..rows[0].len())
            .map(|j| (0..rows.len()).filter(|&i| rows[i][j] != 0).map(|i| (i, q(rows[i][j]))).collect())
            .collect();
        let sm = SparseMatrix::from_columns(&(), rows.len(), cols);
        let rank = rank_over_q(&rows);
        for exec in [Exec::Parallel, Exec::Sequential] {
            prop_assert_eq!(sm.rank(exec, 0).unwrap(), rank);
            let ker = sm.kernel(exec, 0).unwrap();
            prop_assert_eq!(ker.len(), rows[0].len() - rank);
            for v in &ker {
                prop_assert!(sm.apply(v, 0).is_empty());
            }
        }
    }

    #[test]
    fn solve_finds_preimages(rows in small_matrix(), x in proptest::collection::vec(-5i64..6, 6)) {
        let m = over_q(&rows);
        let x: Vec<Q> = x[..m.cols()].iter().map(|&v| q(v)).collect();
        let b = m.apply(&x).unwrap();
        match m.solve(&b, 0).unwrap() {
            SolveOutcome::Solved(y) => prop_assert_eq!(m.apply(&y).unwrap(), b),
            SolveOutcome::Inconsistent { row } => prop_assert!(false, "inconsistent at {}", row),
        }
    }
}

#[test]
fn inconsistency_is_certified() {
    let m = over_q(&[vec![1, 2], vec![2, 4]]);
    assert!(matches!(m.solve(&[q(1), q(3)], 0).unwrap(), SolveOutcome::Inconsistent { .. }));
}

#[test]
fn ambiguous_pivots_are_refused() {
    let k = field(5, 20, None);
    // the (1,1) entry after elimination is 5^3 * O(5^3): nonzero or not cannot be told
    let coarse = KElement::from_int(&k, 0).cap_pi(3);
    let m = PrecMatrix::from_rows(&k, vec![vec![KElement::one(&k), KElement::zero(&k)], vec![KElement::zero(&k), coarse]])
        .unwrap();
    assert!(matches!(m.rank(10), Err(HkError::AmbiguousPivot { .. })));
    // asking only for 3 digits makes it a certified zero
    assert_eq!(m.rank(3).unwrap(), 1);
}

#[test]
fn valuation_pivoting_keeps_precision() {
    // the naive first pivot p would cost a digit, full pivoting picks the unit
    let k = field(5, 20, None);
    let m = PrecMatrix::from_rows(
        &k,
        vec![vec![KElement::from_int(&k, 5), KElement::from_int(&k, 1)], vec![KElement::from_int(&k, 1), KElement::from_int(&k, 7)]],
    )
    .unwrap();
    let b = vec![KElement::from_int(&k, 6), KElement::from_int(&k, 8)];
    let SolveOutcome::Solved(x) = m.solve(&b, 15).unwrap() else { panic!() };
    for xi in &x {
        assert!(xi.agrees_to(&KElement::one(&k), 19), "{xi}");
    }
}
