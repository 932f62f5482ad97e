//! Named cohomology classes, their representatives, and the matrices of
//! operators on them.

use super::complex::{CechComplex, Cochain};
use super::section::{LocalSection, TermKey};
use crate::chart::{ChartElement, ChartId, Form, MonomialIndex};
use crate::error::{HkError, Result};
use crate::kim_hain::KimHainForm;
use crate::linalg::{PrecMatrix, Scalar, SparseMatrix, SparseVec};
use crate::log::LogBranch;
use crate::padic::KElement;

#[derive(Clone, Debug)]
pub struct CohomologyClass<S> {
    pub name: String,
    pub rep: Cochain<S>,
}

impl<S> CohomologyClass<S> {
    pub fn new(name: impl Into<String>, rep: Cochain<S>) -> Self {
        CohomologyClass { name: name.into(), rep }
    }
}

fn constant<S: LocalSection>(env: &S::Env, chart: ChartId) -> S {
    let one = <S::Scalar as Scalar>::one(&S::ctx(env));
    S::term(env, chart, TermKey { m: MonomialIndex::new(0, 0), form: Form::One, u: 0 }, one)
}

/// The constant function `1` on every `Z_n`; spans `H^0`.
pub fn unit_class<S: LocalSection>(c: &CechComplex<S>) -> CohomologyClass<S> {
    let mut rep = c.zero_cochain(0);
    for (n, slot) in rep.z.iter_mut().enumerate() {
        *slot = constant(c.env(), ChartId::z(n as u32 + 1, c.r()));
    }
    CohomologyClass::new("1", rep)
}

/// `e_1`: the constant `1` on the last overlap `W_r`, zero elsewhere.
pub fn e1<S: LocalSection>(c: &CechComplex<S>) -> CohomologyClass<S> {
    let mut rep = c.zero_cochain(1);
    let r = c.r();
    rep.w[r as usize - 1] = constant(c.env(), ChartId::w(r, r));
    CohomologyClass::new("e1", rep)
}

/// Top class: `dlog w` on `W_r`, zero elsewhere.
pub fn top_class<S: LocalSection>(c: &CechComplex<S>) -> CohomologyClass<S> {
    let mut rep = c.zero_cochain(2);
    let r = c.r();
    rep.w[r as usize - 1] = S::dlog_w(c.env(), ChartId::w(r, r));
    CohomologyClass::new("e1e2", rep)
}

/// `e_2` on the Hyodo-Kato side: `dlog w_n` on every chart, with `-u^[1]` on
/// `W_1..W_{r-1}` and `u^[1]` on `W_r` to make it closed.
pub fn hk_e2(c: &CechComplex<KimHainForm>) -> CohomologyClass<KimHainForm> {
    let r = c.r();
    let window = c.window();
    let mut rep = c.zero_cochain(1);
    for n in 1..=r {
        rep.z[n as usize - 1] = KimHainForm::dlog_w(c.env(), ChartId::z(n, r));
        let u1 = KimHainForm::u(ChartId::w(n, r), 1, window);
        rep.w[n as usize - 1] = if n == r { u1 } else { u1.neg() };
    }
    CohomologyClass::new("e2", rep)
}

/// `e_2` on the de Rham side: `dlog w_n` restricted to the fiber.
pub fn dr_e2(c: &CechComplex<ChartElement<KElement>>) -> CohomologyClass<ChartElement<KElement>> {
    let r = c.r();
    let mut rep = c.zero_cochain(1);
    for n in 1..=r {
        rep.z[n as usize - 1] = <ChartElement<KElement> as LocalSection>::dlog_w(c.env(), ChartId::z(n, r));
    }
    CohomologyClass::new("e2", rep)
}

/// Standard basis of `H^0, H^1, H^2` on either side.
pub fn standard_basis<S: LocalSection>(
    c: &CechComplex<S>,
    e2: impl Fn(&CechComplex<S>) -> CohomologyClass<S>,
) -> Vec<Vec<CohomologyClass<S>>> {
    vec![vec![unit_class(c)], vec![e1(c), e2(c)], vec![top_class(c)]]
}

/// Sectionwise operators on Hyodo-Kato cochains.
pub fn hk_frobenius(c: &Cochain<KimHainForm>, p: u64) -> Result<Cochain<KimHainForm>> {
    c.map(|s| s.frobenius(p))
}

pub fn hk_monodromy(c: &Cochain<KimHainForm>) -> Result<Cochain<KimHainForm>> {
    c.map(|s| Ok(s.N()))
}

/// The Hyodo-Kato to de Rham comparison at the chosen branch, on the fiber
/// `s = a`.
pub fn psi(c: &Cochain<KimHainForm>, branch: &LogBranch, a: &KElement) -> Result<Cochain<ChartElement<KElement>>> {
    c.map_into(|s| s.psi_evaluate(branch, a))
}

/// Checks that every representative is closed and that they are
/// independent modulo coboundaries; returns their coordinate vectors.
pub fn validate_basis<S: LocalSection>(
    c: &CechComplex<S>,
    targets: &[CohomologyClass<S>],
) -> Result<Vec<SparseVec<S::Scalar>>> {
    let Some(k) = targets.first().map(|t| t.rep.degree) else {
        return Ok(vec![]);
    };
    let mut vecs = Vec::new();
    for t in targets {
        if t.rep.degree != k {
            return Err(HkError::Shape(format!("class `{}` has degree {}, expected {k}", t.name, t.rep.degree)));
        }
        if !c.is_cocycle(&t.rep)? {
            return Err(HkError::NotACocycle(t.name.clone()));
        }
        vecs.push(c.to_vec(&t.rep)?);
    }
    if c.independent_mod_boundaries(k, vecs.clone())? != vecs.len() {
        return Err(HkError::DependentBasis);
    }
    Ok(vecs)
}

/// Matrix of an operator in the target basis: column `k` holds the
/// coordinates of the `k`-th image, i.e. `op(e_k) = sum_j M[j][k] e_j`.
pub fn class_matrix<S: LocalSection>(
    c: &CechComplex<S>,
    targets: &[CohomologyClass<S>],
    images: &[CohomologyClass<S>],
) -> Result<PrecMatrix<S::Scalar>> {
    let reps = validate_basis(c, targets)?;
    let ctx = c.ctx();
    let mut cols = Vec::new();
    for img in images {
        if !c.is_cocycle(&img.rep)? {
            return Err(HkError::NotACocycle(img.name.clone()));
        }
        let v = c.to_vec(&img.rep)?;
        let coords = c.coordinates(img.rep.degree, &reps, &v)?.ok_or_else(|| HkError::NotInSpan {
            class: img.name.clone(),
            row: targets.iter().map(|t| t.name.as_str()).collect::<Vec<_>>().join(", "),
        })?;
        cols.push(coords);
    }
    let labels = |xs: &[CohomologyClass<S>]| xs.iter().map(|t| t.name.clone()).collect::<Vec<_>>();
    PrecMatrix::from_columns(&ctx, targets.len(), &cols)?.with_labels(labels(targets), labels(images))
}

/// `F^1` of the Hodge filtration on the span of `reps`: the classes with a
/// representative whose function components all vanish. Returned as a
/// basis of coordinate vectors in `reps`.
pub fn hodge_f1(
    c: &CechComplex<ChartElement<KElement>>,
    reps: &[CohomologyClass<ChartElement<KElement>>],
) -> Result<Vec<Vec<KElement>>> {
    let vecs = validate_basis(c, reps)?;
    let Some(k) = reps.first().map(|t| t.rep.degree) else {
        return Ok(vec![]);
    };
    let ctx = c.ctx();
    let basis = c.basis(k);
    let functions: Vec<usize> = (0..basis.len()).filter(|&i| basis[i].form == Form::One).collect();
    let row_of: std::collections::HashMap<usize, usize> = functions.iter().enumerate().map(|(a, &i)| (i, a)).collect();
    let project = |v: &SparseVec<KElement>| -> SparseVec<KElement> {
        v.iter().filter_map(|(i, x)| row_of.get(i).map(|a| (*a, x.clone()))).collect()
    };
    let mut cols: Vec<SparseVec<KElement>> = vecs.iter().map(&project).collect();
    if k >= 1 {
        let d = c.differential(k - 1)?;
        cols.extend((0..d.ncols()).map(|j| project(d.col(j))));
    }
    let m = SparseMatrix::from_columns(&ctx, functions.len(), cols);
    let kernel = m.kernel(c.exec(), c.zero_prec())?;
    let t = reps.len();
    let rows: Vec<Vec<KElement>> = kernel
        .iter()
        .filter(|v| v.iter().any(|(j, _)| *j < t))
        .map(|v| {
            let mut row = vec![KElement::zero(&ctx); t];
            for (j, x) in v {
                if *j < t {
                    row[*j] = x.clone();
                }
            }
            row
        })
        .collect();
    if rows.is_empty() {
        return Ok(vec![]);
    }
    let dense = PrecMatrix::from_rows(&ctx, rows)?;
    let ech = dense.row_reduce(c.zero_prec())?;
    Ok((0..ech.rank()).map(|i| ech.echelon.row(i).to_vec()).collect())
}
