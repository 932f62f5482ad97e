use num_bigint::BigInt;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::error::{HkError, Result};

/// The prime `p` together with the default absolute precision cap (in powers
/// of `p`). The residue field is always `F_p`, so the Witt vector Frobenius
/// is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicContext {
    p: u64,
    default_prec: i64,
}

impl PadicContext {
    pub fn new(p: u64, default_prec: i64) -> Result<Self> {
        if !is_prime(p) {
            return Err(HkError::NotPrime(p));
        }
        if default_prec < 1 {
            return Err(HkError::BadPrecision(default_prec));
        }
        Ok(PadicContext { p, default_prec })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> i64 {
        self.default_prec
    }

    pub fn with_prec(&self, prec: i64) -> Result<Self> {
        PadicContext::new(self.p, prec)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn pow_p(p: u64, k: i64) -> BigInt {
    debug_assert!(k >= 0);
    if k <= 0 {
        return BigInt::one();
    }
    Pow::pow(BigInt::from(p), k as u64)
}

/// `p`-adic valuation of a nonzero integer, together with the cofactor.
pub(crate) fn split_p(p: u64, n: &BigInt) -> (i64, BigInt) {
    debug_assert!(n != &BigInt::from(0));
    let pb = BigInt::from(p);
    let mut k = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &pb);
        if r != BigInt::from(0) {
            return (k, m);
        }
        m = q;
        k += 1;
    }
}
