use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::context::PadicContext;
use super::scalar::PadicScalar;
use crate::error::{HkError, Result};

/// Extra digits carried by field constants (Eisenstein coefficients and
/// `pi^-1`) so that they never limit the precision of a computation.
const CONSTANT_GUARD: i64 = 16;

/// A totally ramified extension `K = Q_p(pi)` cut out by an Eisenstein
/// polynomial `f = s^e + a_{e-1} s^{e-1} + ... + a_0`.
///
/// `e = 1` is the degenerate case `f = s - c` with `ord_p(c) = 1`, in which
/// `K = Q_p` and `pi = c`.
#[derive(Debug, Clone, Serialize)]
pub struct FieldDescriptor {
    context: PadicContext,
    #[serde(serialize_with = "ser_rationals")]
    eisenstein: Vec<BigRational>,
    #[serde(skip)]
    coeffs: Vec<PadicScalar>,
    #[serde(skip)]
    pi_inv: Vec<PadicScalar>,
}

fn ser_rationals<S: serde::Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| q.to_string()))
}

impl PartialEq for FieldDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.context == other.context && self.eisenstein == other.eisenstein
    }
}

impl Eq for FieldDescriptor {}

impl FieldDescriptor {
    /// `eisenstein` lists `a_0, ..., a_{e-1}` lowest degree first.
    pub fn new(context: PadicContext, eisenstein: Vec<BigRational>) -> Result<Arc<Self>> {
        let p = context.p();
        if eisenstein.is_empty() {
            return Err(HkError::NotEisenstein("degree must be at least 1".into()));
        }
        let cap = Self::constant_prec_for(&context, eisenstein.len());
        let coeffs: Vec<PadicScalar> =
            eisenstein.iter().map(|a| PadicScalar::from_rational(p, a, cap)).collect();
        for (i, a) in coeffs.iter().enumerate() {
            match a.valuation() {
                Some(v) if v >= 1 && (i > 0 || v == 1) => {}
                None if i > 0 => {}
                _ => {
                    return Err(HkError::NotEisenstein(format!(
                        "coefficient a_{i} = {} has p-adic valuation {:?}",
                        eisenstein[i],
                        a.valuation()
                    )))
                }
            }
        }
        // pi^-1 = -(pi^{e-1} + a_{e-1} pi^{e-2} + ... + a_1) / a_0
        let e = coeffs.len();
        let mut pi_inv = Vec::with_capacity(e);
        for i in 0..e {
            let top = if i + 1 == e { PadicScalar::one(p, cap) } else { coeffs[i + 1].clone() };
            pi_inv.push(top.div(&coeffs[0])?.neg());
        }
        Ok(Arc::new(FieldDescriptor { context, eisenstein, coeffs, pi_inv }))
    }

    /// `Q_p` itself, with `pi = p`.
    pub fn unramified(context: PadicContext) -> Arc<Self> {
        let p = BigInt::from(context.p());
        Self::new(context, vec![BigRational::from_integer(-p)]).expect("s - p is Eisenstein")
    }

    fn constant_prec_for(context: &PadicContext, e: usize) -> i64 {
        2 * context.prec() + CONSTANT_GUARD + e as i64
    }

    pub fn context(&self) -> &PadicContext {
        &self.context
    }

    pub fn p(&self) -> u64 {
        self.context.p()
    }

    pub fn e(&self) -> usize {
        self.coeffs.len()
    }

    /// Working precision in `pi`-adic units, `e * prec`.
    pub fn pi_prec(&self) -> i64 {
        self.e() as i64 * self.context.prec()
    }

    pub fn eisenstein(&self) -> &[BigRational] {
        &self.eisenstein
    }

    /// Human-readable form of `f`, e.g. `s^2 - 5`.
    pub fn polynomial_string(&self) -> String {
        let e = self.e();
        let mut s = if e == 1 { "s".to_string() } else { format!("s^{e}") };
        for i in (0..e).rev() {
            let a = &self.eisenstein[i];
            if a.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "*s".to_string(),
                _ => format!("*s^{i}"),
            };
            if a < &BigRational::zero() {
                s += &format!(" - {}{}", -a, mono);
            } else {
                s += &format!(" + {}{}", a, mono);
            }
        }
        s
    }
}

/// An element `sum c_i pi^i` (`0 <= i < e`) of `K` with capped-precision
/// coefficients in `Q_p`.
#[derive(Clone, Debug)]
pub struct KElement {
    field: Arc<FieldDescriptor>,
    coeffs: Vec<PadicScalar>,
}

/// A valuation as far as the precision allows: either certified, or a lower
/// bound when the value is indistinguishable from zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation<T> {
    Finite(T),
    AtLeast(T),
}

impl<T: fmt::Display> fmt::Display for Valuation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">= {v}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `ord(pi) = 1`
    PiAdic,
    /// `ord(p) = 1`
    PAdic,
}

impl KElement {
    pub fn from_coeffs(field: &Arc<FieldDescriptor>, coeffs: Vec<PadicScalar>) -> Self {
        assert_eq!(coeffs.len(), field.e(), "coefficient count must equal e");
        KElement { field: field.clone(), coeffs }
    }

    pub fn zero(field: &Arc<FieldDescriptor>) -> Self {
        let (p, n) = (field.p(), field.context.prec());
        KElement::from_coeffs(field, vec![PadicScalar::zero(p, n); field.e()])
    }

    pub fn from_scalar(field: &Arc<FieldDescriptor>, c: PadicScalar) -> Self {
        let (p, n) = (field.p(), c.abs_prec());
        let mut coeffs = vec![PadicScalar::zero(p, n); field.e()];
        coeffs[0] = c;
        KElement::from_coeffs(field, coeffs)
    }

    pub fn from_int(field: &Arc<FieldDescriptor>, n: i64) -> Self {
        Self::from_bigint(field, &BigInt::from(n))
    }

    pub fn from_bigint(field: &Arc<FieldDescriptor>, n: &BigInt) -> Self {
        let c = PadicScalar::from_bigint(field.p(), n, field.context.prec());
        Self::from_scalar(field, c)
    }

    pub fn from_rational(field: &Arc<FieldDescriptor>, q: &BigRational) -> Self {
        let c = PadicScalar::from_rational(field.p(), q, field.context.prec());
        Self::from_scalar(field, c)
    }

    pub fn one(field: &Arc<FieldDescriptor>) -> Self {
        Self::from_int(field, 1)
    }

    /// The uniformiser `pi`, i.e. the class of `s` modulo `f`.
    ///
    /// Carried at the extra precision of the field constants, so that
    /// multiplying or dividing by it costs no precision.
    pub fn pi(field: &Arc<FieldDescriptor>) -> Self {
        let p = field.p();
        let n = Self::constant_prec(field);
        if field.e() == 1 {
            let c = PadicScalar::from_rational(p, &(-field.eisenstein[0].clone()), n);
            return Self::from_scalar(field, c);
        }
        let mut coeffs = vec![PadicScalar::zero(p, n); field.e()];
        coeffs[1] = PadicScalar::one(p, n);
        KElement::from_coeffs(field, coeffs)
    }

    fn constant_prec(field: &FieldDescriptor) -> i64 {
        FieldDescriptor::constant_prec_for(&field.context, field.e())
    }

    /// `pi^-1`, computed from the field's defining relation.
    pub fn pi_inv(field: &Arc<FieldDescriptor>) -> Self {
        KElement::from_coeffs(field, field.pi_inv.clone())
    }

    /// `pi^k` for any integer `k`.
    pub fn pi_pow(field: &Arc<FieldDescriptor>, k: i64) -> Self {
        if k >= 0 {
            Self::pi(field).pow(k as u64)
        } else {
            Self::pi_inv(field).pow((-k) as u64)
        }
    }

    pub fn field(&self) -> &Arc<FieldDescriptor> {
        &self.field
    }

    pub fn coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    fn e(&self) -> i64 {
        self.coeffs.len() as i64
    }

    /// Absolute precision in `pi`-adic units: the value is known modulo `pi^N`.
    pub fn abs_prec_pi(&self) -> i64 {
        let e = self.e();
        self.coeffs.iter().enumerate().map(|(i, c)| e * c.abs_prec() + i as i64).min().unwrap()
    }

    /// Smallest `pi`-adic order among coefficients that are distinguishable from zero.
    fn raw_ord_pi(&self) -> Option<i64> {
        let e = self.e();
        self.coeffs
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.valuation().map(|v| e * v + i as i64))
            .min()
    }

    /// `pi`-adic valuation, or the precision bound when indistinguishable from zero.
    pub fn ord_pi(&self) -> Valuation<i64> {
        let prec = self.abs_prec_pi();
        match self.raw_ord_pi() {
            Some(v) if v < prec => Valuation::Finite(v),
            _ => Valuation::AtLeast(prec),
        }
    }

    /// Certified `pi`-adic valuation; errors when the value is indistinguishable from zero.
    pub fn ord_pi_certified(&self) -> Result<i64> {
        match self.ord_pi() {
            Valuation::Finite(v) => Ok(v),
            Valuation::AtLeast(b) => Err(HkError::AmbiguousValuation { bound: format!("{b} (pi-adic)") }),
        }
    }

    /// Valuation in either normalization; the `p`-adic one is `ord_pi / e`.
    pub fn ord(&self, normalization: Normalization) -> Valuation<BigRational> {
        let scale = |v: i64| match normalization {
            Normalization::PiAdic => BigRational::from_integer(v.into()),
            Normalization::PAdic => BigRational::new(v.into(), self.e().into()),
        };
        match self.ord_pi() {
            Valuation::Finite(v) => Valuation::Finite(scale(v)),
            Valuation::AtLeast(v) => Valuation::AtLeast(scale(v)),
        }
    }

    /// True when the value is indistinguishable from zero at its precision.
    pub fn is_zero(&self) -> bool {
        matches!(self.ord_pi(), Valuation::AtLeast(_))
    }

    /// True when `self` is zero to at least `prec` `p`-adic digits, i.e.
    /// either certified `ord_p >= prec` or indistinguishable from zero with
    /// precision at least `prec`.
    pub fn is_zero_to(&self, prec: i64) -> bool {
        let target = prec * self.e();
        match self.ord_pi() {
            Valuation::Finite(v) => v >= target,
            Valuation::AtLeast(b) => b >= target,
        }
    }

    /// Lowers the absolute precision to at most `pi^prec`.
    pub fn cap_pi(&self, prec: i64) -> Self {
        let e = self.e();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.cap((prec - i as i64 + e - 1).div_euclid(e)))
            .collect();
        KElement { field: self.field.clone(), coeffs }
    }

    fn check(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field == other.field,
            "{}",
            HkError::FieldMismatch
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect();
        KElement { field: self.field.clone(), coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.sub(b)).collect();
        KElement { field: self.field.clone(), coeffs }
    }

    pub fn neg(&self) -> Self {
        KElement { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let e = self.coeffs.len();
        if e == 1 {
            return KElement { field: self.field.clone(), coeffs: vec![self.coeffs[0].mul(&other.coeffs[0])] };
        }
        let mut prod: Vec<Option<PadicScalar>> = vec![None; 2 * e - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let t = a.mul(b);
                prod[i + j] = Some(match prod[i + j].take() {
                    Some(acc) => acc.add(&t),
                    None => t,
                });
            }
        }
        let mut prod: Vec<PadicScalar> = prod.into_iter().map(Option::unwrap).collect();
        // pi^e = -(a_0 + a_1 pi + ... + a_{e-1} pi^{e-1})
        for d in (e..2 * e - 1).rev() {
            let top = prod[d].clone();
            for (i, a) in self.field.coeffs.iter().enumerate() {
                prod[d - e + i] = prod[d - e + i].sub(&top.mul(a));
            }
        }
        prod.truncate(e);
        KElement { field: self.field.clone(), coeffs: prod }
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut acc: Option<KElement> = None;
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    Some(a) => a.mul(&base),
                    None => base.clone(),
                });
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc.unwrap_or_else(|| {
            let prec = self.coeffs.iter().map(|c| c.abs_prec()).min().unwrap().max(1);
            KElement::from_scalar(&self.field, PadicScalar::one(self.field.p(), prec))
        })
    }

    /// `Q_p`-matrix of multiplication by `self` in the basis `1, pi, ..., pi^{e-1}`.
    fn mult_matrix(&self) -> Vec<Vec<PadicScalar>> {
        let e = self.coeffs.len();
        let mut cols = Vec::with_capacity(e);
        let mut basis = self.clone();
        for j in 0..e {
            if j > 0 {
                basis = basis.mul(&KElement::pi(&self.field));
            }
            cols.push(basis.coeffs.clone());
        }
        // transpose into rows
        (0..e).map(|i| (0..e).map(|j| cols[j][i].clone()).collect()).collect()
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(HkError::DivisionByIndistinguishableZero {
                prec: self.abs_prec_pi() / self.e(),
            });
        }
        if self.coeffs.len() == 1 {
            return Ok(KElement { field: self.field.clone(), coeffs: vec![self.coeffs[0].inv()?] });
        }
        // write self = pi^k u with u a unit; invert u by solving M_u y = 1
        let k = self.ord_pi_certified()?;
        let u = self.mul(&KElement::pi_pow(&self.field, -k));
        let y = solve_small(u.mult_matrix(), self.field.p(), u.abs_prec_pi())?;
        Ok(KElement { field: self.field.clone(), coeffs: y }.mul(&KElement::pi_pow(&self.field, -k)))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn mul_int(&self, n: i64) -> Self {
        let n = BigInt::from(n);
        KElement { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c.mul_int(&n)).collect() }
    }

    /// Division by an exact nonzero integer; precision drops by `v_p(n)`.
    pub fn div_int(&self, n: &BigInt) -> Self {
        KElement { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c.div_int(n)).collect() }
    }

    pub fn mul_scalar(&self, c: &PadicScalar) -> Self {
        KElement { field: self.field.clone(), coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect() }
    }

    /// Residue in `F_p` of an integral element.
    pub fn residue(&self) -> Option<u64> {
        match self.ord_pi() {
            Valuation::Finite(v) if v < 0 => None,
            _ => self.coeffs[0].residue(),
        }
    }

    /// True when `self - other` is zero to at least `prec` `p`-adic digits.
    pub fn agrees_to(&self, other: &Self, prec: i64) -> bool {
        self.sub(other).is_zero_to(prec)
    }

    /// `pi`-adic digits `d_k` (in `0..p`) with `self = sum d_k pi^k`, starting
    /// at the valuation, together with that valuation and the absolute
    /// precision. An indistinguishable zero yields no digits.
    pub fn pi_digits(&self) -> (i64, Vec<u64>, i64) {
        let prec = self.abs_prec_pi();
        let start = match self.ord_pi() {
            Valuation::Finite(v) => v,
            Valuation::AtLeast(b) => return (b, Vec::new(), b),
        };
        let pi_inv = KElement::pi_inv(&self.field);
        let mut x = self.mul(&KElement::pi_pow(&self.field, -start));
        let mut digits = Vec::new();
        for _ in start..prec {
            let d = x.residue().expect("integral after shift");
            digits.push(d);
            x = x.sub(&KElement::from_int(&self.field, d as i64)).mul(&pi_inv);
        }
        (start, digits, prec)
    }
}

/// Gaussian elimination over `Q_p` with valuation pivoting for the `e x e`
/// inversion system `M y = (1, 0, ..., 0)`.
fn solve_small(mut m: Vec<Vec<PadicScalar>>, p: u64, prec_pi: i64) -> Result<Vec<PadicScalar>> {
    let e = m.len();
    let prec = prec_pi / e as i64 + 2;
    let mut rhs: Vec<PadicScalar> =
        (0..e).map(|i| PadicScalar::from_i64(p, (i == 0) as i64, prec)).collect();
    let mut order: Vec<usize> = Vec::new();
    let mut used = vec![false; e];
    for col in 0..e {
        let pivot = (0..e)
            .filter(|&r| !used[r])
            .filter_map(|r| m[r][col].valuation().map(|v| (v, r)))
            .min()
            .ok_or(HkError::DivisionByIndistinguishableZero { prec })?
            .1;
        used[pivot] = true;
        order.push(pivot);
        for r in 0..e {
            if r == pivot {
                continue;
            }
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].div(&m[pivot][col])?;
            for c in col..e {
                let t = f.mul(&m[pivot][c]);
                m[r][c] = m[r][c].sub(&t);
            }
            rhs[r] = rhs[r].sub(&f.mul(&rhs[pivot]));
        }
    }
    let mut y = vec![PadicScalar::zero(p, prec); e];
    for (col, &r) in order.iter().enumerate() {
        y[col] = rhs[r].div(&m[r][col])?;
    }
    Ok(y)
}

impl PartialEq for KElement {
    /// Equality of the stored approximations (same digits, same precisions).
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.coeffs == other.coeffs
    }
}

impl fmt::Display for KElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::pipeline::expansion::format_expansion(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramified() -> Arc<FieldDescriptor> {
        let ctx = PadicContext::new(5, 10).unwrap();
        FieldDescriptor::new(ctx, vec![BigRational::from_integer((-5).into()), BigRational::zero()]).unwrap()
    }

    #[test]
    fn eisenstein_condition() {
        let ctx = PadicContext::new(5, 10).unwrap();
        let q = |n: i64| BigRational::from_integer(n.into());
        assert!(FieldDescriptor::new(ctx.clone(), vec![q(-25)]).is_err());
        assert!(FieldDescriptor::new(ctx.clone(), vec![q(-5), q(1)]).is_err());
        assert!(FieldDescriptor::new(ctx, vec![q(10), q(5), q(0)]).is_ok());
    }

    #[test]
    fn reduction_by_defining_relation() {
        let k = ramified();
        let pi = KElement::pi(&k);
        let sq = pi.mul(&pi);
        assert!(sq.agrees_to(&KElement::from_int(&k, 5), 10));
        assert_eq!(pi.ord_pi(), Valuation::Finite(1));
        assert_eq!(
            pi.ord(Normalization::PAdic),
            Valuation::Finite(BigRational::new(1.into(), 2.into()))
        );
    }

    #[test]
    fn inverse_of_pi() {
        let k = ramified();
        let pi = KElement::pi(&k);
        let inv = pi.inv().unwrap();
        assert!(pi.mul(&inv).agrees_to(&KElement::one(&k), 9));
        assert!(inv.agrees_to(&KElement::pi_inv(&k), 9));
    }

    #[test]
    fn digits_of_p_in_ramified_field() {
        let k = ramified();
        let (v, digits, prec) = KElement::from_int(&k, 5).pi_digits();
        assert_eq!(v, 2);
        assert_eq!(digits[0], 1);
        assert!(digits[1..].iter().all(|&d| d == 0));
        assert_eq!(prec, 20);
    }
}
