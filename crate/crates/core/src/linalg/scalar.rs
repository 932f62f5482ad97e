use std::fmt::Debug;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{HkError, Result};
use crate::padic::{FieldDescriptor, KElement, Valuation};

/// How an entry looks to the elimination: certainly nonzero (with a pivot
/// quality key, smaller is better), zero, or too imprecise to tell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Nonzero { key: i64 },
    Zero,
    /// Indistinguishable from zero, but only known to this many `p`-adic digits.
    Ambiguous { prec: i64 },
}

/// Coefficient field for the linear algebra: exact rationals on the
/// Hyodo-Kato side, capped-precision `K` on the de Rham side.
pub trait Scalar: Clone + Debug + PartialEq + Send + Sync + 'static {
    type Ctx: Clone + Debug + Send + Sync;

    /// Exact arithmetic, so elimination never loses precision.
    const EXACT: bool;

    fn zero(ctx: &Self::Ctx) -> Self;
    fn from_int(ctx: &Self::Ctx, n: i64) -> Self;
    fn from_rational(ctx: &Self::Ctx, q: &BigRational) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, other: &Self) -> Result<Self>;
    /// `zero_prec` is the number of `p`-adic digits an indistinguishable zero
    /// must be known to for it to count as zero.
    fn status(&self, zero_prec: i64) -> Status;
    fn render(&self) -> String;
    /// Precision tag for reports: `exact` or the `pi`-adic cap.
    fn precision_tag(&self) -> String;

    fn one(ctx: &Self::Ctx) -> Self {
        Self::from_int(ctx, 1)
    }

    fn is_zero_at(&self, zero_prec: i64) -> bool {
        self.status(zero_prec) == Status::Zero
    }
}

impl Scalar for BigRational {
    type Ctx = ();
    const EXACT: bool = true;

    fn zero(_: &()) -> Self {
        <BigRational as Zero>::zero()
    }
    fn from_int(_: &(), n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_rational(_: &(), q: &BigRational) -> Self {
        q.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(HkError::Invalid("division by the rational 0".into()));
        }
        Ok(self / other)
    }
    fn status(&self, _: i64) -> Status {
        if self.is_zero() {
            Status::Zero
        } else {
            let key = self.numer().abs().bits() + self.denom().bits();
            let unit_bonus = if self.abs().is_one() { 0 } else { 1 };
            Status::Nonzero { key: (2 * key + unit_bonus) as i64 }
        }
    }
    fn render(&self) -> String {
        crate::padic::parse::rational_string(self)
    }
    fn precision_tag(&self) -> String {
        "exact".into()
    }
}

impl Scalar for KElement {
    type Ctx = Arc<FieldDescriptor>;
    const EXACT: bool = false;

    fn zero(ctx: &Self::Ctx) -> Self {
        KElement::zero(ctx)
    }
    fn from_int(ctx: &Self::Ctx, n: i64) -> Self {
        KElement::from_int(ctx, n)
    }
    fn from_rational(ctx: &Self::Ctx, q: &BigRational) -> Self {
        KElement::from_rational(ctx, q)
    }
    fn add(&self, other: &Self) -> Self {
        KElement::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        KElement::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        KElement::mul(self, other)
    }
    fn neg(&self) -> Self {
        KElement::neg(self)
    }
    fn div(&self, other: &Self) -> Result<Self> {
        KElement::div(self, other)
    }
    fn status(&self, zero_prec: i64) -> Status {
        let e = self.field().e() as i64;
        match self.ord_pi() {
            Valuation::Finite(v) => Status::Nonzero { key: v },
            Valuation::AtLeast(b) if b >= zero_prec.saturating_mul(e) => Status::Zero,
            Valuation::AtLeast(b) => Status::Ambiguous { prec: b.div_euclid(e) },
        }
    }
    fn render(&self) -> String {
        self.to_string()
    }
    fn precision_tag(&self) -> String {
        format!("O(π^{})", self.abs_prec_pi())
    }
}
