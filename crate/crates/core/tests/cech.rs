mod common;

use std::time::Instant;

use common::{field, q, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rigid_hk::cech::classes::{dr_e2, e1, hk_e2, hk_frobenius, hk_monodromy, standard_basis, top_class, unit_class};
use rigid_hk::cech::{
    class_matrix, h_rank_estimate, hodge_f1, lookahead, validate_basis, CechComplex, CohomologyClass, DrEnv, HkEnv,
};
use rigid_hk::chart::{ChartElement, Window};
use rigid_hk::kim_hain::KimHainForm;
use rigid_hk::linalg::SparseVec;
use rigid_hk::padic::KElement;
use rigid_hk::{Exec, HkError};

const WIN: Window = Window { s: 4, t: 4, u: 2 };

fn hk(r: u32, w: Window, exec: Exec) -> CechComplex<KimHainForm> {
    CechComplex::new(HkEnv { window: w }, r, exec, 0).unwrap()
}

fn dr(r: u32, p: u64, eis: Option<&str>) -> CechComplex<ChartElement<KElement>> {
    let k = field(p, 20, eis);
    let env = DrEnv { point: KElement::pi(&k), field: k, window: WIN };
    CechComplex::new(env, r, Exec::Parallel, 15).unwrap()
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> SparseVec<Q> {
    (0..n).filter_map(|i| rng.gen_bool(0.1).then(|| (i, q(rng.gen_range(1..9))))).collect()
}

#[test]
fn total_differential_squares_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for r in 1..=3 {
        let c = hk(r, WIN, Exec::Parallel);
        for k in 0..c.top() - 1 {
            for _ in 0..5 {
                let x = c.from_vec(k, &random_vec(c.basis(k).len(), &mut rng)).unwrap();
                let dx = c.total_differential(&x).unwrap();
                assert!(c.is_cocycle(&dx).unwrap(), "HK r={r} k={k}");
                assert!(c.coboundary_witness(&dx).unwrap().is_some());
            }
        }
        let d = dr(r, 5, Some("s^2-5"));
        let d0 = d.differential(0).unwrap();
        let d1 = d.differential(1).unwrap();
        for j in 0..d0.ncols() {
            assert!(d1.apply(d0.col(j), 15).is_empty(), "dR r={r} col {j}");
        }
    }
}

#[test]
fn standard_classes_are_independent_cocycles() {
    for r in 1..=3 {
        let c = hk(r, WIN, Exec::Parallel);
        for group in standard_basis(&c, hk_e2) {
            validate_basis(&c, &group).unwrap();
        }
        assert!(c.coboundary_witness(&e1(&c).rep).unwrap().is_none());
        let d = dr(r, 3, None);
        for group in standard_basis(&d, dr_e2) {
            validate_basis(&d, &group).unwrap();
        }
    }
}

#[test]
fn dependent_or_open_classes_are_rejected() {
    let c = hk(2, WIN, Exec::Parallel);
    let twice = CohomologyClass::new("2e1", e1(&c).rep.add(&e1(&c).rep).unwrap());
    assert!(matches!(validate_basis(&c, &[e1(&c), twice]), Err(HkError::DependentBasis)));
    // e2 without its u^[1] correction on W_1 is not closed
    let mut broken = hk_e2(&c);
    broken.rep.w[0] = KimHainForm::zero(broken.rep.w[0].chart(), 0, WIN);
    assert!(matches!(validate_basis(&c, &[broken]), Err(HkError::NotACocycle(_))));
}

#[test]
fn matrices_do_not_depend_on_representatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let c = hk(3, WIN, Exec::Parallel);
    let basis = vec![e1(&c), hk_e2(&c)];
    let phi = |b: &CohomologyClass<KimHainForm>| hk_frobenius(&b.rep, 3).unwrap();
    let plain: Vec<_> = basis.iter().map(|b| CohomologyClass::new(format!("φ{}", b.name), phi(b))).collect();
    let m = class_matrix(&c, &basis, &plain).unwrap();
    // shift every image by a random coboundary and the basis too
    let shifted_basis: Vec<_> = basis
        .iter()
        .map(|b| {
            let x = c.from_vec(0, &random_vec(c.basis(0).len(), &mut rng)).unwrap();
            CohomologyClass::new(b.name.clone(), b.rep.add(&c.total_differential(&x).unwrap()).unwrap())
        })
        .collect();
    let shifted: Vec<_> = plain
        .iter()
        .map(|b| {
            let x = c.from_vec(0, &random_vec(c.basis(0).len(), &mut rng)).unwrap();
            CohomologyClass::new(b.name.clone(), b.rep.add(&c.total_differential(&x).unwrap()).unwrap())
        })
        .collect();
    let m2 = class_matrix(&c, &shifted_basis, &shifted).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(m.get(i, j), m2.get(i, j));
        }
    }
    assert_eq!(m.get(1, 1), &q(3));
    let n: Vec<_> = basis.iter().map(|b| CohomologyClass::new(format!("N{}", b.name), hk_monodromy(&b.rep).unwrap())).collect();
    assert_eq!(class_matrix(&c, &basis, &n).unwrap().get(0, 1), &q(3));
}

#[test]
fn h0_and_h2_operators() {
    let c = hk(2, WIN, Exec::Parallel);
    let one = vec![unit_class(&c)];
    let m = class_matrix(&c, &one, &[CohomologyClass::new("φ1", hk_frobenius(&one[0].rep, 5).unwrap())]).unwrap();
    assert_eq!(m.get(0, 0), &q(1));
    let top = vec![top_class(&c)];
    let m = class_matrix(&c, &top, &[CohomologyClass::new("φt", hk_frobenius(&top[0].rep, 5).unwrap())]).unwrap();
    assert_eq!(m.get(0, 0), &q(5));
}

#[test]
fn hodge_filtration_dimensions() {
    for r in 1..=3 {
        let d = dr(r, 5, None);
        let dims: Vec<usize> = standard_basis(&d, dr_e2).iter().map(|g| hodge_f1(&d, g).unwrap().len()).collect();
        assert_eq!(dims, vec![0, 1, 1], "r={r}");
        // F^1 H^1 is spanned by e2 alone
        let f1 = hodge_f1(&d, &[e1(&d), dr_e2(&d)]).unwrap();
        assert!(f1[0][0].is_zero_to(15) && !f1[0][1].is_zero_to(15));
    }
}

#[test]
fn execution_policies_agree() {
    let a = hk(2, WIN, Exec::Parallel);
    let b = hk(2, WIN, Exec::Sequential);
    for k in 0..a.top() {
        let (da, db) = (a.differential(k).unwrap(), b.differential(k).unwrap());
        assert_eq!(da.ncols(), db.ncols());
        for j in 0..da.ncols() {
            assert_eq!(da.col(j), db.col(j));
        }
    }
}

#[test]
fn persistent_ranks_are_betti_numbers() {
    let t = Instant::now();
    let w = Window::new(3, 3, 1);
    let big = w.enlarged();
    let cs = [hk(2, w, Exec::Parallel), hk(2, lookahead(w), Exec::Parallel), hk(2, big, Exec::Parallel), hk(2, lookahead(big), Exec::Parallel)];
    let ranks: Vec<_> = (0..4).map(|k| h_rank_estimate([(&cs[0], &cs[1]), (&cs[2], &cs[3])], k).unwrap()).collect();
    assert_eq!(ranks.iter().map(|r| r.rank).collect::<Vec<_>>(), vec![1, 2, 1, 0]);
    assert!(ranks.iter().all(|r| r.stable));
    eprintln!("ranks in {:?}", t.elapsed());
}
