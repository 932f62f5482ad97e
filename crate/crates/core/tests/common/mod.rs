//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's logarithm or elimination code.

#![allow(dead_code)]

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rigid_hk::padic::parse::parse_field;
use rigid_hk::padic::{FieldDescriptor, KElement, PadicContext};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn field(p: u64, prec: i64, eisenstein: Option<&str>) -> Arc<FieldDescriptor> {
    parse_field(&PadicContext::new(p, prec).unwrap(), eisenstein).unwrap()
}

pub fn vp(x: &BigInt, p: u64) -> u32 {
    if x.is_zero() {
        return u32::MAX;
    }
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    while (&x % &p).is_zero() {
        x /= &p;
        v += 1;
    }
    v
}

/// `log(1 + x)` for a rational `x` with `ord_p(x) >= 1`, summed in exact
/// rationals until every dropped term has `ord_p >= digits`.
pub fn log_one_plus(x: &Q, p: u64, digits: i64) -> Q {
    let t = vp(x.numer(), p) as i64 - vp(x.denom(), p) as i64;
    assert!(t >= 1);
    let mut acc = Q::zero();
    let mut power = Q::one();
    let mut n: i64 = 1;
    loop {
        power *= x;
        // ord_p(x^n / n) >= n t - log_p(n)
        let lower = n * t - ((n as f64).ln() / (p as f64).ln()).floor() as i64;
        if lower >= digits + 4 && n > 1 {
            break;
        }
        let term = &power / q(n);
        if n % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
        n += 1;
    }
    acc
}

/// `log(a)` for an integer `a` prime to `p`: `log(a^(p-1)) / (p-1)`, which
/// avoids Teichmuller lifts altogether.
pub fn log_integer_unit(a: i64, p: u64, digits: i64) -> Q {
    assert!(a.rem_euclid(p as i64) != 0);
    let y = Q::from_integer(BigInt::from(a).pow(p as u32 - 1)) - Q::one();
    log_one_plus(&y, p, digits) / q(p as i64 - 1)
}

/// Rank of an integer matrix by plain Gaussian elimination over `Q`.
pub fn rank_over_q(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, piv);
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[rank][c];
                for j in c..ncols {
                    let sub = &f * &m[rank][j];
                    m[i][j] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// True when `x` and the rational `y` agree to `digits` `p`-adic digits.
pub fn agrees_with_rational(x: &KElement, y: &Q, digits: i64) -> bool {
    x.agrees_to(&KElement::from_rational(x.field(), y), digits)
}

pub fn is_abs_one(x: &Q) -> bool {
    x.abs().is_one()
}
