//! The `p`-adic logarithm on units of `K` and its branches `log_q` on `K^x`.

use std::sync::Arc;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{HkError, Result};
use crate::padic::{unit_decompose, FieldDescriptor, KElement, Valuation};

/// Number of series terms needed for `log(1 - x)` with `ord_pi(x) = t` so
/// that every dropped term `x^n / n` has `pi`-adic valuation at least
/// `target`: the least `n` past the turning point of `n t - e log_p(n)`
/// where that bound reaches `target`. Terms `1 .. n_max - 1` are summed.
pub fn series_terms(p: u64, e: usize, t: i64, target: i64) -> u64 {
    assert!(t >= 1, "series only converges for ord_pi(x) >= 1");
    let (pf, ef, tf) = (p as f64, e as f64, t as f64);
    let turning = (ef / (tf * pf.ln())).ceil().max(1.0) as u64;
    // v_p(n) <= log_p(n), so this undercuts the true term valuation
    let bound = |n: u64| tf * n as f64 - ef * (n as f64).ln() / pf.ln();
    let mut n = turning;
    while bound(n) < target as f64 {
        n += 1;
    }
    n
}

/// `log(v) = -sum_{n >= 1} (1 - v)^n / n` for `v in 1 + m`.
///
/// The result is known to `min(abs_prec_pi(v), e * prec)`; precision lost to
/// the divisions by `n` is tracked by the arithmetic.
pub fn log_one_unit(v: &KElement) -> Result<KElement> {
    let field = v.field();
    let x = KElement::one(field).sub(v);
    let target = v.abs_prec_pi().min(field.pi_prec());
    let t = match x.ord_pi() {
        Valuation::Finite(t) if t >= 1 => t,
        Valuation::Finite(t) => return Err(HkError::NotAOneUnit(t.to_string())),
        Valuation::AtLeast(_) => return Ok(KElement::zero(field).cap_pi(target)),
    };
    let n_max = series_terms(field.p(), field.e(), t, target);
    let mut acc = KElement::zero(field);
    let mut power = KElement::one(field);
    for n in 1..n_max {
        power = power.mul(&x);
        acc = acc.sub(&power.div_int(&BigInt::from(n)));
    }
    Ok(acc.cap_pi(target))
}

/// `log(u)` for a unit `u`: zero on roots of unity, the series on the
/// one-unit part of `u = teich * one_unit`.
pub fn log_unit(u: &KElement) -> Result<KElement> {
    let dec = unit_decompose(u)?;
    if dec.exponent != 0 {
        return Err(HkError::NotAUnit(dec.exponent));
    }
    log_one_unit(&dec.one_unit)
}

/// The branch `log_q` of the logarithm on `K^x` determined by `log_q(q) = 0`.
///
/// Writing `q = pi^m v` with `v` a unit, `log_q(pi) = -log(v) / m`, and
/// `x = pi^a u` maps to `a log_q(pi) + log(u)`.
#[derive(Clone, Debug, Serialize)]
pub struct LogBranch {
    #[serde(skip)]
    field: Arc<FieldDescriptor>,
    #[serde(serialize_with = "ser_element")]
    q: KElement,
    m: i64,
    #[serde(serialize_with = "ser_element")]
    log_q_pi: KElement,
}

fn ser_element<S: serde::Serializer>(x: &KElement, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl LogBranch {
    pub fn new(q: &KElement) -> Result<Self> {
        let field = q.field().clone();
        let m = match q.ord_pi() {
            Valuation::Finite(m) if m > 0 => m,
            other => return Err(HkError::BadBranch(other.to_string())),
        };
        let v = q.mul(&KElement::pi_pow(&field, -m));
        let log_q_pi = log_unit(&v)?.neg().div_int(&BigInt::from(m));
        Ok(LogBranch { field, q: q.clone(), m, log_q_pi })
    }

    /// The branch with `log(pi) = 0`.
    pub fn pi(field: &Arc<FieldDescriptor>) -> Self {
        Self::new(&KElement::pi(field)).expect("pi has valuation 1")
    }

    pub fn q(&self) -> &KElement {
        &self.q
    }

    /// `ord_pi(q)`.
    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn field(&self) -> &Arc<FieldDescriptor> {
        &self.field
    }

    pub fn log_q_pi(&self) -> &KElement {
        &self.log_q_pi
    }

    pub fn eval(&self, x: &KElement) -> Result<KElement> {
        let dec = unit_decompose(x)?;
        let unit = KElement::from_scalar(&self.field, dec.teich).mul(&dec.one_unit);
        let log_u = log_unit(&unit)?;
        Ok(self.log_q_pi.mul_int(dec.exponent).add(&log_u))
    }
}

/// `log_q(x)`.
pub fn branch_log(branch: &LogBranch, x: &KElement) -> Result<KElement> {
    branch.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{teichmuller, PadicContext};

    fn qp(p: u64, prec: i64) -> Arc<FieldDescriptor> {
        FieldDescriptor::unramified(PadicContext::new(p, prec).unwrap())
    }

    #[test]
    fn terms_bound_grows_with_target() {
        assert!(series_terms(5, 1, 1, 20) >= 20);
        assert!(series_terms(5, 1, 1, 40) > series_terms(5, 1, 1, 20));
        assert!(series_terms(5, 1, 2, 20) <= series_terms(5, 1, 1, 20));
    }

    #[test]
    fn log_of_one_and_roots_of_unity() {
        let k = qp(5, 20);
        assert!(log_one_unit(&KElement::one(&k)).unwrap().is_zero_to(20));
        for a in 1..5 {
            let w = KElement::from_scalar(&k, teichmuller(a, k.context()).unwrap());
            assert!(log_unit(&w).unwrap().is_zero_to(20));
        }
        assert!(log_one_unit(&KElement::from_int(&k, 2)).is_err());
    }

    #[test]
    fn homomorphism_on_one_units() {
        let k = qp(5, 20);
        let v = KElement::from_int(&k, 6);
        let l1 = log_one_unit(&v).unwrap();
        let l2 = log_one_unit(&v.mul(&v)).unwrap();
        assert!(l2.agrees_to(&l1.mul_int(2), 19));
    }

    #[test]
    fn branch_kills_q() {
        let k = qp(5, 20);
        let q = KElement::from_int(&k, 30);
        let b = LogBranch::new(&q).unwrap();
        assert!(b.eval(&q).unwrap().is_zero_to(19));
        assert!(LogBranch::new(&KElement::from_int(&k, 2)).is_err());
        let pi = LogBranch::pi(&k);
        assert!(pi.log_q_pi().is_zero_to(20));
    }
}
