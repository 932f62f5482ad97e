use std::cmp::min;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::context::{pow_p, split_p};
use crate::error::{HkError, Result};

const EXACT: i64 = i64::MAX / 4;

/// An element of `Q_p` known modulo `p^abs_prec`.
///
/// A nonzero value is stored as `p^valuation * unit` with `unit` a residue
/// modulo `p^(abs_prec - valuation)` prime to `p`. A value whose valuation
/// reaches the precision collapses to the distinguished "zero known to
/// `O(p^abs_prec)`" form (`valuation == None`).
///
/// Arithmetic propagates worst-case absolute precision: sums keep the minimum
/// precision of the summands, products keep `min(v(x) + prec(y), v(y) + prec(x))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    p: u64,
    valuation: Option<i64>,
    unit: BigInt,
    abs_prec: i64,
}

impl PadicScalar {
    pub fn zero(p: u64, abs_prec: i64) -> Self {
        PadicScalar { p, valuation: None, unit: BigInt::zero(), abs_prec }
    }

    pub fn one(p: u64, abs_prec: i64) -> Self {
        Self::from_bigint(p, &BigInt::one(), abs_prec)
    }

    pub fn from_i64(p: u64, n: i64, abs_prec: i64) -> Self {
        Self::from_bigint(p, &BigInt::from(n), abs_prec)
    }

    pub fn from_bigint(p: u64, n: &BigInt, abs_prec: i64) -> Self {
        Self::normalize(p, n.clone(), 0, abs_prec)
    }

    /// Embeds an exact rational, capped at `abs_prec`.
    pub fn from_rational(p: u64, q: &BigRational, abs_prec: i64) -> Self {
        if q.is_zero() {
            return Self::zero(p, abs_prec);
        }
        let (vn, un) = split_p(p, q.numer());
        let (vd, ud) = split_p(p, q.denom());
        let v = vn - vd;
        if v >= abs_prec {
            return Self::zero(p, abs_prec);
        }
        let modulus = pow_p(p, abs_prec - v);
        let inv = mod_inverse(&ud, &modulus);
        let unit = (un * inv).mod_floor(&modulus);
        PadicScalar { p, valuation: Some(v), unit, abs_prec }
    }

    /// `p^shift * raw`, known modulo `p^abs_prec`.
    fn normalize(p: u64, raw: BigInt, shift: i64, abs_prec: i64) -> Self {
        if raw.is_zero() || shift >= abs_prec {
            return Self::zero(p, abs_prec);
        }
        let (k, cof) = split_p(p, &raw);
        let v = shift + k;
        if v >= abs_prec {
            return Self::zero(p, abs_prec);
        }
        let unit = cof.mod_floor(&pow_p(p, abs_prec - v));
        PadicScalar { p, valuation: Some(v), unit, abs_prec }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `None` when the value is indistinguishable from zero.
    pub fn valuation(&self) -> Option<i64> {
        self.valuation
    }

    pub fn abs_prec(&self) -> i64 {
        self.abs_prec
    }

    /// Number of known digits past the leading one (0 for an indistinguishable zero).
    pub fn rel_prec(&self) -> i64 {
        match self.valuation {
            Some(v) => self.abs_prec - v,
            None => 0,
        }
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    pub fn is_zero(&self) -> bool {
        self.valuation.is_none()
    }

    /// Residue modulo `p` of an integral element.
    pub fn residue(&self) -> Option<u64> {
        match self.valuation {
            None => Some(0),
            Some(v) if v > 0 => Some(0),
            Some(0) => {
                let r = self.unit.mod_floor(&BigInt::from(self.p));
                Some(u64::try_from(r).expect("residue fits"))
            }
            Some(_) => None,
        }
    }

    /// The canonical representative `p^v * unit` as an exact rational.
    pub fn lift(&self) -> BigRational {
        match self.valuation {
            None => BigRational::zero(),
            Some(v) if v >= 0 => BigRational::from_integer(&self.unit * pow_p(self.p, v)),
            Some(v) => BigRational::new(self.unit.clone(), pow_p(self.p, -v)),
        }
    }

    /// Lowers the absolute precision to at most `prec`.
    pub fn cap(&self, prec: i64) -> Self {
        if prec >= self.abs_prec {
            return self.clone();
        }
        match self.valuation {
            None => Self::zero(self.p, prec),
            Some(v) => Self::normalize(self.p, self.unit.clone(), v, prec),
        }
    }

    pub fn neg(&self) -> Self {
        match self.valuation {
            None => self.clone(),
            Some(v) => {
                let m = pow_p(self.p, self.abs_prec - v);
                PadicScalar { unit: (m - &self.unit).mod_floor(&pow_p(self.p, self.abs_prec - v)), ..self.clone() }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        let prec = min(self.abs_prec, other.abs_prec);
        match (self.valuation, other.valuation) {
            (None, None) => Self::zero(self.p, prec),
            (Some(_), None) => self.cap(prec),
            (None, Some(_)) => other.cap(prec),
            (Some(a), Some(b)) => {
                let base = min(a, b);
                if base >= prec {
                    return Self::zero(self.p, prec);
                }
                let raw = &self.unit * pow_p(self.p, a - base) + &other.unit * pow_p(self.p, b - base);
                Self::normalize(self.p, raw, base, prec)
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        match (self.valuation, other.valuation) {
            (None, None) => Self::zero(self.p, self.abs_prec + other.abs_prec),
            (Some(a), None) => Self::zero(self.p, a + other.abs_prec),
            (None, Some(b)) => Self::zero(self.p, b + self.abs_prec),
            (Some(a), Some(b)) => {
                let prec = min(a + other.abs_prec, b + self.abs_prec);
                Self::normalize(self.p, &self.unit * &other.unit, a + b, prec)
            }
        }
    }

    pub fn inv(&self) -> Result<Self> {
        Self::exact_one(self.p).div(self)
    }

    /// `1` with unbounded precision; only ever combined with finite-precision values.
    fn exact_one(p: u64) -> Self {
        PadicScalar { p, valuation: Some(0), unit: BigInt::one(), abs_prec: EXACT }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        let b = other
            .valuation
            .ok_or(HkError::DivisionByIndistinguishableZero { prec: other.abs_prec })?;
        match self.valuation {
            None => Ok(Self::zero(self.p, self.abs_prec - b)),
            Some(a) => {
                let rel = min(self.rel_prec(), other.rel_prec());
                let v = a - b;
                let modulus = pow_p(self.p, rel);
                let unit = (&self.unit * mod_inverse(&other.unit, &modulus)).mod_floor(&modulus);
                Ok(PadicScalar { p: self.p, valuation: Some(v), unit, abs_prec: v + rel })
            }
        }
    }

    /// Multiplication by an exact integer.
    pub fn mul_int(&self, n: &BigInt) -> Self {
        if n.is_zero() {
            return Self::zero(self.p, EXACT);
        }
        let (k, _) = split_p(self.p, n);
        match self.valuation {
            None => Self::zero(self.p, self.abs_prec + k),
            Some(v) => Self::normalize(self.p, &self.unit * n, v, self.abs_prec + k),
        }
    }

    /// Division by an exact nonzero integer; absolute precision drops by `v_p(n)`.
    pub fn div_int(&self, n: &BigInt) -> Self {
        assert!(!n.is_zero(), "division by the integer 0");
        let (k, cof) = split_p(self.p, n);
        match self.valuation {
            None => Self::zero(self.p, self.abs_prec - k),
            Some(v) => {
                let rel = self.rel_prec();
                let modulus = pow_p(self.p, rel);
                let unit = (&self.unit * mod_inverse(&cof, &modulus)).mod_floor(&modulus);
                PadicScalar { p: self.p, valuation: Some(v - k), unit, abs_prec: v - k + rel }
            }
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::exact_one(self.p);
        if e == 0 {
            return Self::one(self.p, self.abs_prec.max(1));
        }
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// True when `self - other` is indistinguishable from zero.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    /// `p`-adic digits `d_v, d_{v+1}, ...` of the canonical representative,
    /// from the valuation up to the precision.
    pub fn digits(&self) -> Vec<u64> {
        let mut out = Vec::new();
        if self.valuation.is_none() {
            return out;
        }
        let pb = BigInt::from(self.p);
        let mut u = self.unit.clone();
        for _ in 0..self.rel_prec() {
            let (q, r) = u.div_mod_floor(&pb);
            out.push(u64::try_from(r).expect("digit"));
            u = q;
        }
        out
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.valuation {
            None => write!(f, "O({}^{})", self.p, self.abs_prec),
            Some(v) => {
                let lifted = self.lift();
                if lifted.is_integer() {
                    let n = lifted.to_integer();
                    // print small negatives in signed form
                    let m = pow_p(self.p, self.abs_prec);
                    let signed = if (&n * 2) > m { n - m } else { n };
                    write!(f, "{} + O({}^{})", signed, self.p, self.abs_prec)
                } else {
                    write!(f, "{}*{}^{} + O({}^{})", self.unit, self.p, v, self.p, self.abs_prec)
                }
            }
        }
    }
}

/// Inverse of `a` modulo `m`; `a` must be prime to `m`.
pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    if m.is_one() {
        return BigInt::zero();
    }
    let e = a.mod_floor(m).extended_gcd(m);
    debug_assert!(e.gcd.abs().is_one(), "not invertible");
    e.x.mod_floor(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn s(n: i64) -> PadicScalar {
        PadicScalar::from_i64(5, n, 10)
    }

    #[test]
    fn integers_embed() {
        let two = s(1).add(&s(1));
        assert_eq!(two, s(2));
        assert_eq!(two.abs_prec(), 10);
        assert_eq!(s(50).valuation(), Some(2));
        assert_eq!(s(-1).unit(), &(pow_p(5, 10) - 1));
    }

    #[test]
    fn zero_normalizes() {
        let z = s(5).sub(&s(5));
        assert!(z.is_zero());
        assert_eq!(z.abs_prec(), 10);
        assert!(PadicScalar::from_bigint(5, &pow_p(5, 12), 10).is_zero());
    }

    #[test]
    fn product_precision() {
        let x = s(25); // v = 2, prec 10
        let y = s(3); // v = 0, prec 10
        let xy = x.mul(&y);
        assert_eq!(xy.valuation(), Some(2));
        assert_eq!(xy.abs_prec(), 10); // min(2 + 10, 0 + 10)
        let xx = x.mul(&x);
        assert_eq!(xx.abs_prec(), 12);
    }

    #[test]
    fn inverse_contract() {
        let x = s(6);
        let inv = x.inv().unwrap();
        let one = x.mul(&inv);
        assert!(one.agrees_with(&s(1)));
        assert!(s(0).inv().is_err());
    }

    #[test]
    fn integer_division_loses_valuation() {
        let x = s(7);
        let y = x.div_int(&BigInt::from(10));
        assert_eq!(y.valuation(), Some(-1));
        assert_eq!(y.abs_prec(), 9);
        assert!(y.mul_int(&BigInt::from(10)).agrees_with(&x));
    }

    #[test]
    fn rational_roundtrip() {
        let q = BigRational::new(BigInt::from(3), BigInt::from(10));
        let x = PadicScalar::from_rational(5, &q, 10);
        assert_eq!(x.valuation(), Some(-1));
        assert!(x.mul(&s(10)).agrees_with(&s(3)));
        assert_eq!(PadicScalar::from_rational(5, &x.lift(), 10), x);
    }

    #[test]
    fn digits_of_minus_one() {
        assert_eq!(PadicScalar::from_i64(3, -1, 4).digits(), vec![2, 2, 2, 2]);
    }
}
