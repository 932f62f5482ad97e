//! `pi`-adic expansion strings such as `3 + 4·π + 1·π^2 + O(π^40)`.
//!
//! Digits lie in `0..p`, zero digits are omitted and the trailing `O(π^N)`
//! records the absolute precision. The format round-trips through
//! [`parse_expansion`].

use std::sync::Arc;

use crate::error::{HkError, Result};
use crate::padic::{FieldDescriptor, KElement, PadicScalar};

fn power(k: i64) -> String {
    match k {
        0 => String::new(),
        1 => "·π".to_string(),
        _ => format!("·π^{k}"),
    }
}

pub fn format_expansion(x: &KElement) -> String {
    let (start, digits, prec) = x.pi_digits();
    let mut parts: Vec<String> = Vec::new();
    for (k, d) in digits.iter().enumerate() {
        if *d != 0 {
            parts.push(format!("{d}{}", power(start + k as i64)));
        }
    }
    parts.push(format!("O(π^{prec})"));
    parts.join(" + ")
}

/// Inverse of [`format_expansion`]; `pi` is accepted in place of `π` and `*` in place of `·`.
pub fn parse_expansion(src: &str, field: &Arc<FieldDescriptor>) -> Result<KElement> {
    let norm = src.replace("pi", "π").replace('*', "·").replace(' ', "");
    let bad = || HkError::Parse(format!("not a π-adic expansion: `{src}`"));
    let mut terms: Vec<(i64, i64)> = Vec::new();
    let mut prec: Option<i64> = None;
    for term in norm.split('+') {
        if let Some(inner) = term.strip_prefix("O(π").and_then(|t| t.strip_suffix(')')) {
            let n = match inner.strip_prefix('^') {
                Some(e) => e.parse::<i64>().map_err(|_| bad())?,
                None if inner.is_empty() => 1,
                None => return Err(bad()),
            };
            prec = Some(n);
            continue;
        }
        let (digit, exp) = match term.split_once('·') {
            None => (term, 0),
            Some((d, rest)) => {
                let e = match rest.strip_prefix("π") {
                    Some("") => 1,
                    Some(e) => e.strip_prefix('^').ok_or_else(bad)?.parse::<i64>().map_err(|_| bad())?,
                    None => return Err(bad()),
                };
                (d, e)
            }
        };
        terms.push((digit.parse().map_err(|_| bad())?, exp));
    }
    let prec = prec.ok_or_else(bad)?;
    // The stated precision may exceed the field default (e.g. after a
    // multiplication by pi), so build at that precision.
    let (p, e) = (field.p(), field.e() as i64);
    let lowest = terms.iter().map(|t| t.1).min().unwrap_or(0).min(0);
    let digits = (prec - lowest).div_euclid(e) + 2;
    let mut acc = KElement::from_scalar(field, PadicScalar::zero(p, digits));
    for (d, exp) in terms {
        acc = acc.add(&KElement::pi_pow(field, exp).mul(&KElement::from_scalar(field, PadicScalar::from_i64(p, d, digits))));
    }
    Ok(acc.cap_pi(prec))
}

/// Entrywise comparison helper for reports: true when the two expansions
/// agree to `min(prec_a, prec_b, tol)` `pi`-adic digits.
pub fn expansions_agree(a: &str, b: &str, field: &Arc<FieldDescriptor>, tol: Option<i64>) -> Result<bool> {
    let x = parse_expansion(a, field)?;
    let y = parse_expansion(b, field)?;
    let mut target = x.abs_prec_pi().min(y.abs_prec_pi());
    if let Some(t) = tol {
        target = target.min(t);
    }
    let diff = x.sub(&y);
    Ok(match diff.ord_pi() {
        crate::padic::Valuation::Finite(v) => v >= target,
        crate::padic::Valuation::AtLeast(_) => true,
    })
}
