use std::sync::Arc;

use super::context::PadicContext;
use super::field::{FieldDescriptor, KElement};
use super::scalar::PadicScalar;
use crate::error::{HkError, Result};

/// Teichmuller lift of the residue class `a mod p`: the unique `(p-1)`-th
/// root of unity congruent to `a`.
///
/// Computed by repeated `p`-th powering until the value is stable at the
/// context precision; each step fixes one more digit.
pub fn teichmuller(a: u64, ctx: &PadicContext) -> Result<PadicScalar> {
    let p = ctx.p();
    if a.is_multiple_of(p) {
        return Err(HkError::Invalid(format!("no Teichmuller lift of 0 mod {p}")));
    }
    let mut x = PadicScalar::from_i64(p, (a % p) as i64, ctx.prec());
    loop {
        let next = x.pow(p);
        if next == x {
            return Ok(x);
        }
        x = next;
    }
}

/// Decomposition `x = pi^a * teich * one_unit` with `teich` a root of unity
/// and `one_unit` in `1 + m`.
#[derive(Clone, Debug)]
pub struct UnitDecomposition {
    pub exponent: i64,
    pub teich: PadicScalar,
    pub one_unit: KElement,
}

pub fn unit_decompose(x: &KElement) -> Result<UnitDecomposition> {
    let field: &Arc<FieldDescriptor> = x.field();
    let exponent = x.ord_pi_certified()?;
    let u = x.mul(&KElement::pi_pow(field, -exponent));
    let residue = u.residue().expect("unit is integral");
    let teich = teichmuller(residue, field.context())?;
    let one_unit = u.div(&KElement::from_scalar(field, teich.clone()))?;
    Ok(UnitDecomposition { exponent, teich, one_unit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lift_of_one_and_minus_one() {
        let ctx = PadicContext::new(5, 12).unwrap();
        assert_eq!(teichmuller(1, &ctx).unwrap(), PadicScalar::one(5, 12));
        assert_eq!(teichmuller(4, &ctx).unwrap(), PadicScalar::from_i64(5, -1, 12));
        assert!(teichmuller(10, &ctx).is_err());
    }

    #[test]
    fn lifts_are_roots_of_unity() {
        for p in [3u64, 5, 7, 11] {
            let ctx = PadicContext::new(p, 15).unwrap();
            for a in 1..p {
                let w = teichmuller(a, &ctx).unwrap();
                assert!(w.pow(p - 1).agrees_with(&PadicScalar::one(p, 15)), "p={p} a={a}");
                assert_eq!(w.residue(), Some(a));
            }
        }
    }

    #[test]
    fn decompose_uniformiser_and_minus_one() {
        let ctx = PadicContext::new(5, 10).unwrap();
        let k = FieldDescriptor::unramified(ctx);
        let d = unit_decompose(&KElement::pi(&k)).unwrap();
        assert_eq!(d.exponent, 1);
        assert!(d.teich.agrees_with(&PadicScalar::one(5, 10)));
        assert!(d.one_unit.agrees_to(&KElement::one(&k), 10));
        let d = unit_decompose(&KElement::from_int(&k, -1)).unwrap();
        assert_eq!(d.exponent, 0);
        assert!(d.teich.agrees_with(&PadicScalar::from_i64(5, -1, 10)));
        assert!(d.one_unit.agrees_to(&KElement::one(&k), 10));
    }
}
