//! `(phi, N)`-modules, filtered ones, and the identities relating the
//! comparison maps at different branches of the logarithm.
//!
//! `phi` and `N` are stored as exact rational matrices: the Frobenius of the
//! Witt vectors of `F_p` is the identity, so `phi` is linear. Matrices act
//! on coordinate columns, `op(e_k) = sum_j M[j][k] e_j`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{HkError, Result};
use crate::linalg::PrecMatrix;
use crate::log::LogBranch;
use crate::padic::{FieldDescriptor, KElement, Normalization, Valuation};

type Q = BigRational;

#[derive(Clone, Debug, PartialEq)]
pub struct PhiNModule {
    phi: PrecMatrix<Q>,
    n_op: PrecMatrix<Q>,
    p: u64,
    e: u32,
}

/// Outcome of [`PhiNModule::check_relation`]: the entry of `N phi - p phi N`
/// with the largest absolute value, if any.
#[derive(Clone, Debug, PartialEq)]
pub enum RelationCheck {
    Holds,
    Violated { row: usize, col: usize, value: Q },
}

impl RelationCheck {
    pub fn holds(&self) -> bool {
        matches!(self, RelationCheck::Holds)
    }
}

impl PhiNModule {
    pub fn new(phi: PrecMatrix<Q>, n_op: PrecMatrix<Q>, p: u64, e: u32) -> Result<Self> {
        let d = phi.rows();
        if phi.cols() != d || n_op.rows() != d || n_op.cols() != d {
            return Err(HkError::Shape(format!(
                "phi is {}x{}, N is {}x{}",
                phi.rows(),
                phi.cols(),
                n_op.rows(),
                n_op.cols()
            )));
        }
        if e == 0 {
            return Err(HkError::Invalid("ramification index must be positive".into()));
        }
        Ok(PhiNModule { phi, n_op, p, e })
    }

    /// `K(n)`'s underlying module: `phi = p^-n`, `N = 0`.
    pub fn tate_twist(p: u64, n: i32, e: u32) -> Self {
        let v = Q::from_integer(BigInt::from(p)).pow(-n);
        let phi = PrecMatrix::from_fn(&(), 1, 1, |_, _| v.clone());
        PhiNModule { phi, n_op: PrecMatrix::zeros(&(), 1, 1), p, e }
    }

    /// The module of `H^1` of the Tate curve with an `r`-gon reduction:
    /// `phi = diag(1, p)`, `N e_2 = r e_1`.
    pub fn tate_curve(p: u64, r: u32, e: u32) -> Self {
        let phi = PrecMatrix::from_fn(&(), 2, 2, |i, j| match (i, j) {
            (0, 0) => Q::one(),
            (1, 1) => Q::from_integer(BigInt::from(p)),
            _ => Q::zero(),
        });
        let n_op = PrecMatrix::from_fn(&(), 2, 2, |i, j| {
            if (i, j) == (0, 1) {
                Q::from_integer(BigInt::from(r))
            } else {
                Q::zero()
            }
        });
        PhiNModule { phi, n_op, p, e }
    }

    pub fn dim(&self) -> usize {
        self.phi.rows()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn phi(&self) -> &PrecMatrix<Q> {
        &self.phi
    }

    pub fn n_op(&self) -> &PrecMatrix<Q> {
        &self.n_op
    }

    /// The normalized monodromy `e^-1 N`.
    pub fn normalized_n(&self) -> PrecMatrix<Q> {
        self.n_op.scale(&Q::new(BigInt::one(), BigInt::from(self.e)))
    }

    /// Certifies `N phi = p phi N` exactly.
    pub fn check_relation(&self) -> Result<RelationCheck> {
        let p = Q::from_integer(BigInt::from(self.p));
        let lhs = self.n_op.mul(&self.phi)?;
        let rhs = self.phi.mul(&self.n_op)?.scale(&p);
        let diff = lhs.sub(&rhs)?;
        let mut worst: Option<(usize, usize, Q)> = None;
        for i in 0..diff.rows() {
            for j in 0..diff.cols() {
                let v = diff.get(i, j);
                if !v.is_zero() && worst.as_ref().is_none_or(|(_, _, w)| abs(v) > abs(w)) {
                    worst = Some((i, j, v.clone()));
                }
            }
        }
        Ok(match worst {
            None => RelationCheck::Holds,
            Some((row, col, value)) => RelationCheck::Violated { row, col, value },
        })
    }

    pub fn is_nilpotent(&self) -> Result<bool> {
        let mut m = PrecMatrix::identity(&(), self.dim());
        for _ in 0..self.dim() {
            m = m.mul(&self.n_op)?;
        }
        Ok(m.is_zero_at(0))
    }

    /// `sum_{k < dim} c^k 𝐍^k / k!` over `K`.
    pub fn exp_cn(&self, c: &KElement) -> Result<PrecMatrix<KElement>> {
        let field = c.field().clone();
        let n = lift(&field, &self.normalized_n());
        let d = self.dim();
        let mut term = PrecMatrix::identity(&field, d);
        let mut out = term.clone();
        for k in 1..d {
            term = term.mul(&n)?.scale(c).scale(&KElement::one(&field).div_int(&BigInt::from(k)));
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// `(phi, l N)` with ramification `e l`: pullback along `s -> s^l`,
    /// under which `u^[i] -> l^i u^[i]`. The normalized monodromy is unchanged.
    pub fn base_change(&self, l: u32) -> Result<Self> {
        if l == 0 {
            return Err(HkError::Invalid("base change degree must be positive".into()));
        }
        Ok(PhiNModule {
            phi: self.phi.clone(),
            n_op: self.n_op.scale(&Q::from_integer(BigInt::from(l))),
            p: self.p,
            e: self.e * l,
        })
    }

    /// Conjugate by an invertible change of basis `g`: `g^-1 M g`.
    pub fn conjugate(&self, g: &PrecMatrix<Q>) -> Result<Self> {
        let gi = inverse(g)?;
        Ok(PhiNModule {
            phi: gi.mul(&self.phi)?.mul(g)?,
            n_op: gi.mul(&self.n_op)?.mul(g)?,
            p: self.p,
            e: self.e,
        })
    }
}

fn abs(q: &Q) -> Q {
    if q < &Q::zero() {
        -q.clone()
    } else {
        q.clone()
    }
}

/// Rational matrix as a matrix over `K`.
pub fn lift(field: &Arc<FieldDescriptor>, m: &PrecMatrix<Q>) -> PrecMatrix<KElement> {
    PrecMatrix::from_fn(field, m.rows(), m.cols(), |i, j| KElement::from_rational(field, m.get(i, j)))
}

fn inverse(g: &PrecMatrix<Q>) -> Result<PrecMatrix<Q>> {
    let n = g.rows();
    if g.cols() != n {
        return Err(HkError::Shape("inverse of a non-square matrix".into()));
    }
    let ech = g.row_reduce(0)?;
    if ech.rank() != n {
        return Err(HkError::Invalid("change of basis is singular".into()));
    }
    // E = T g with E a permuted diagonal; g^-1 = E^-1 T.
    let mut inv = PrecMatrix::zeros(&(), n, n);
    for &(k, c) in &ech.pivots {
        let piv = ech.echelon.get(k, c);
        for j in 0..n {
            inv.set(c, j, ech.transform.get(k, j) / piv);
        }
    }
    Ok(inv)
}

/// `log_q(q') / ord_p(q')` with `ord_p(p) = 1`.
pub fn transition_constant(branch_q: &LogBranch, q_prime: &KElement) -> Result<KElement> {
    let field = branch_q.field();
    let log = branch_q.eval(q_prime)?;
    let ord = match q_prime.ord(Normalization::PAdic) {
        Valuation::Finite(v) => v,
        Valuation::AtLeast(_) => return Err(HkError::BadBranch("0".into())),
    };
    if ord <= Q::zero() {
        return Err(HkError::BadBranch(crate::padic::parse::rational_string(&ord)));
    }
    Ok(log.mul(&KElement::from_rational(field, &ord.recip())))
}

/// Predicted `Psi_{q'}` from `Psi_q` through
/// `Psi_q = Psi_{q'} ∘ exp(-(log_q q' / ord_p q') 𝐍)`.
pub fn transition_branch(
    psi_q: &PrecMatrix<KElement>,
    branch_q: &LogBranch,
    q_prime: &KElement,
    m: &PhiNModule,
) -> Result<PrecMatrix<KElement>> {
    let c = transition_constant(branch_q, q_prime)?;
    psi_q.mul(&m.exp_cn(&c)?)
}

/// One step `F^level` of a decreasing filtration, spanned by columns in the
/// de Rham basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FiltrationStep {
    pub level: i32,
    pub span: Vec<Vec<KElement>>,
}

impl FiltrationStep {
    pub fn dim(&self) -> usize {
        self.span.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilteredPhiNModule {
    pub base: PhiNModule,
    pub field: Arc<FieldDescriptor>,
    pub psi: PrecMatrix<KElement>,
    /// `F^level` for consecutive levels, ending with the first zero step.
    pub hodge: Vec<FiltrationStep>,
}

impl FilteredPhiNModule {
    pub fn dr_dim(&self) -> usize {
        self.psi.rows()
    }

    pub fn hodge_dims(&self) -> Vec<(i32, usize)> {
        self.hodge.iter().map(|s| (s.level, s.dim())).collect()
    }

    /// Levels where the filtration drops, with multiplicity.
    pub fn hodge_jumps(&self) -> Vec<i32> {
        let mut out = Vec::new();
        for w in self.hodge.windows(2) {
            for _ in w[1].dim()..w[0].dim() {
                out.push(w[0].level);
            }
        }
        out
    }

    pub fn is_valid(&self, zero_prec: i64) -> Result<bool> {
        let decreasing = self.hodge.windows(2).all(|w| w[0].dim() >= w[1].dim() && w[1].level == w[0].level + 1);
        let exhaustive = self.hodge.first().is_some_and(|s| s.dim() == self.dr_dim())
            && self.hodge.last().is_some_and(|s| s.dim() == 0);
        let invertible = self.psi.rows() == self.psi.cols() && self.psi.rank(zero_prec)? == self.psi.rows();
        Ok(decreasing && exhaustive && invertible)
    }

    /// Same dimension, `phi`, `N` and Hodge jumps as `other`.
    pub fn same_type(&self, other: &Self) -> bool {
        self.base.phi == other.base.phi && self.base.n_op == other.base.n_op && self.hodge_jumps() == other.hodge_jumps()
    }
}

/// `K(0)` and `K(-1)`: one-dimensional with `phi = p^-n`, `N = 0` and the
/// Hodge filtration jumping at `-n`.
pub fn tate_object(n: i32, field: &Arc<FieldDescriptor>) -> Result<FilteredPhiNModule> {
    if !(n == 0 || n == -1) {
        return Err(HkError::Invalid(format!("only K(0) and K(-1) are modelled, got K({n})")));
    }
    let base = PhiNModule::tate_twist(field.p(), n, field.e() as u32);
    let one = vec![KElement::one(field)];
    let hodge = (0..=-n)
        .map(|level| FiltrationStep { level, span: vec![one.clone()] })
        .chain(std::iter::once(FiltrationStep { level: -n + 1, span: vec![] }))
        .collect();
    Ok(FilteredPhiNModule { base, field: field.clone(), psi: PrecMatrix::identity(field, 1), hodge })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicContext;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn relation_and_failure() {
        let m = PhiNModule::tate_curve(5, 3, 1);
        assert!(m.check_relation().unwrap().holds());
        assert!(m.is_nilpotent().unwrap());
        let bad = PhiNModule::new(PrecMatrix::identity(&(), 2), PrecMatrix::identity(&(), 2), 5, 1).unwrap();
        assert!(!bad.check_relation().unwrap().holds());
        assert!(!bad.is_nilpotent().unwrap());
    }

    #[test]
    fn conjugation_keeps_relation() {
        let m = PhiNModule::tate_curve(3, 2, 1);
        let g = PrecMatrix::from_rows(&(), vec![vec![q(2), q(1)], vec![q(1), q(1)]]).unwrap();
        let c = m.conjugate(&g).unwrap();
        assert!(c.check_relation().unwrap().holds());
        assert_ne!(c.phi(), m.phi());
    }

    #[test]
    fn exponential() {
        let k = FieldDescriptor::unramified(PadicContext::new(5, 10).unwrap());
        let m = PhiNModule::tate_curve(5, 3, 1);
        let c = KElement::from_int(&k, 7);
        let ex = m.exp_cn(&c).unwrap();
        assert!(ex.get(0, 1).agrees_to(&KElement::from_int(&k, 21), 10));
        let zero = m.exp_cn(&KElement::zero(&k)).unwrap();
        assert!(zero.sub(&PrecMatrix::identity(&k, 2)).unwrap().is_zero_at(10));
        let c2 = KElement::from_int(&k, -4);
        let prod = ex.mul(&m.exp_cn(&c2).unwrap()).unwrap();
        let sum = m.exp_cn(&c.add(&c2)).unwrap();
        assert!(prod.sub(&sum).unwrap().is_zero_at(9));
    }

    #[test]
    fn base_change_scales_n() {
        let m = PhiNModule::tate_curve(5, 1, 1);
        let b = m.base_change(2).unwrap();
        assert_eq!(b.n_op(), PhiNModule::tate_curve(5, 2, 2).n_op());
        assert_eq!(b.normalized_n(), m.normalized_n());
        assert_eq!(m.base_change(1).unwrap(), m);
    }

    #[test]
    fn tate_objects() {
        let k = FieldDescriptor::unramified(PadicContext::new(5, 10).unwrap());
        let k0 = tate_object(0, &k).unwrap();
        let k1 = tate_object(-1, &k).unwrap();
        assert_eq!(k0.hodge_jumps(), vec![0]);
        assert_eq!(k1.hodge_jumps(), vec![1]);
        assert_eq!(k1.base.phi().get(0, 0), &q(5));
        assert!(k0.is_valid(5).unwrap() && k1.is_valid(5).unwrap());
        assert!(!k0.same_type(&k1));
    }
}
