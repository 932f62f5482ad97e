//! Parsing of Eisenstein polynomials and field elements from the command line.
//!
//! Expressions are polynomials in one variable (`s` for Eisenstein
//! polynomials, `pi` for elements) with rational coefficients and the
//! constant `p`, built from `+ - * / ^` and parentheses, e.g. `s^2-5` or
//! `p*(1+p)`. Eisenstein polynomials may also be given as a comma separated
//! coefficient list `a_0,...,a_{e-1}` (lowest degree first, monic term
//! implied).

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::context::PadicContext;
use super::field::{FieldDescriptor, KElement};
use crate::error::{HkError, Result};

/// Dense polynomial with rational coefficients, lowest degree first.
type Poly = Vec<BigRational>;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token::Num(s.parse().expect("digits")));
        } else if c.is_alphabetic() || c == 'π' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == 'π' || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()·".contains(c) {
            out.push(Token::Op(if c == '·' { '*' } else { c }));
            i += 1;
        } else {
            return Err(HkError::Parse(format!("unexpected character `{c}` in `{src}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    var: &'a [&'a str],
    p: u64,
    src: &'a str,
}

fn padd(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    let z = BigRational::zero();
    (0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect()
}

fn pneg(a: &Poly) -> Poly {
    a.iter().map(|c| -c).collect()
}

fn pmul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn trim(mut a: Poly) -> Poly {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> HkError {
        HkError::Parse(format!("{msg} in `{}`", self.src))
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = if self.eat('-') { pneg(&self.term()?) } else { self.term()? };
        loop {
            if self.eat('+') {
                acc = padd(&acc, &self.term()?);
            } else if self.eat('-') {
                acc = padd(&acc, &pneg(&self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = pmul(&acc, &self.power()?);
            } else if self.eat('/') {
                let d = trim(self.power()?);
                if d.len() != 1 {
                    return Err(self.err("division by a non-constant or zero"));
                }
                acc = acc.iter().map(|c| c / &d[0]).collect();
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            let exp = match self.tokens.get(self.pos) {
                Some(Token::Num(n)) => n.to_u32().ok_or_else(|| self.err("exponent too large"))?,
                _ => return Err(self.err("expected an integer exponent")),
            };
            self.pos += 1;
            let mut acc = vec![BigRational::one()];
            for _ in 0..exp {
                acc = pmul(&acc, &base);
            }
            if neg {
                let c = trim(acc);
                if c.len() != 1 {
                    return Err(self.err("negative power of a non-constant"));
                }
                return Ok(vec![c[0].recip()]);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        let tok = self.peek().cloned().ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        match tok {
            Token::Num(n) => Ok(vec![BigRational::from_integer(n)]),
            Token::Ident(name) if self.var.contains(&name.as_str()) => {
                Ok(vec![BigRational::zero(), BigRational::one()])
            }
            Token::Ident(name) if name == "p" => Ok(vec![BigRational::from_integer(self.p.into())]),
            Token::Ident(name) => Err(self.err(&format!("unknown symbol `{name}`"))),
            Token::Op('(') => {
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("missing `)`"));
                }
                Ok(inner)
            }
            Token::Op('-') => Ok(pneg(&self.power()?)),
            Token::Op(c) => Err(self.err(&format!("unexpected `{c}`"))),
        }
    }
}

fn parse_poly(src: &str, var: &[&str], p: u64) -> Result<Poly> {
    let tokens = tokenize(src)?;
    let mut parser = Parser { tokens, pos: 0, var, p, src };
    let poly = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.err("trailing input"));
    }
    Ok(trim(poly))
}

fn parse_rational(src: &str, p: u64) -> Result<BigRational> {
    let poly = parse_poly(src, &[], p)?;
    match poly.len() {
        0 => Ok(BigRational::zero()),
        1 => Ok(poly[0].clone()),
        _ => Err(HkError::Parse(format!("`{src}` is not a constant"))),
    }
}

/// Parses `s^2-5`-style shorthand or a coefficient list into
/// `a_0, ..., a_{e-1}`. Lists go lowest degree first and may include the
/// leading 1 (`-5,0,1`) or omit it (`-5,0`); the two cannot be confused since
/// an Eisenstein `a_{e-1}` is divisible by `p`.
pub fn parse_eisenstein(src: &str, p: u64) -> Result<Vec<BigRational>> {
    let src = src.trim();
    let list = src.trim_start_matches('[').trim_end_matches(']');
    if list.contains(',') || !(src.contains('s') || src.contains('x')) {
        let mut coeffs: Vec<BigRational> = list.split(',').map(|c| parse_rational(c.trim(), p)).collect::<Result<_>>()?;
        if coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_one()) {
            coeffs.pop();
        }
        return Ok(coeffs);
    }
    let poly = parse_poly(src, &["s", "x"], p)?;
    let lead = poly.last().ok_or_else(|| HkError::Parse(format!("`{src}` is zero")))?;
    if poly.len() < 2 || !lead.is_one() {
        return Err(HkError::NotEisenstein(format!("`{src}` is not monic of degree >= 1")));
    }
    Ok(poly[..poly.len() - 1].to_vec())
}

/// Builds the field from an Eisenstein specification; `None` means `Q_p` with `pi = p`.
pub fn parse_field(ctx: &PadicContext, eisenstein: Option<&str>) -> Result<Arc<FieldDescriptor>> {
    match eisenstein {
        None => Ok(FieldDescriptor::unramified(ctx.clone())),
        Some(src) => FieldDescriptor::new(ctx.clone(), parse_eisenstein(src, ctx.p())?),
    }
}

/// Parses an element of `K` written as a polynomial in `pi` (`p` allowed as a constant).
pub fn parse_element(src: &str, field: &Arc<FieldDescriptor>) -> Result<KElement> {
    let poly = parse_poly(src, &["pi", "π"], field.p())?;
    let pi = KElement::pi(field);
    let mut acc = KElement::zero(field);
    let mut power = KElement::one(field);
    for (k, c) in poly.iter().enumerate() {
        if k > 0 {
            power = power.mul(&pi);
        }
        if !c.is_zero() {
            acc = acc.add(&power.mul(&KElement::from_rational(field, c)));
        }
    }
    Ok(acc)
}

/// Renders a rational as the CLI accepts it back.
pub fn rational_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else if q.is_negative() {
        format!("-{}/{}", -q.numer(), q.denom())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn shorthand_and_list_agree() {
        assert_eq!(parse_eisenstein("s^2-5", 5).unwrap(), vec![q(-5), q(0)]);
        assert_eq!(parse_eisenstein("-5,0", 5).unwrap(), vec![q(-5), q(0)]);
        assert_eq!(parse_eisenstein("-5,0,1", 5).unwrap(), vec![q(-5), q(0)]);
        assert_eq!(parse_eisenstein("s - p", 3).unwrap(), vec![q(-3)]);
        assert_eq!(
            parse_eisenstein("[10/3, 5]", 5).unwrap(),
            vec![BigRational::new(10.into(), 3.into()), q(5)]
        );
        assert!(parse_eisenstein("2*s^2-5", 5).is_err());
    }

    #[test]
    fn elements() {
        let ctx = PadicContext::new(5, 10).unwrap();
        let k = parse_field(&ctx, Some("s^2-5")).unwrap();
        let x = parse_element("p*(1+p)", &k).unwrap();
        assert!(x.agrees_to(&KElement::from_int(&k, 30), 10));
        let y = parse_element("pi^2 - 5", &k).unwrap();
        assert!(y.is_zero_to(10));
        assert!(parse_element("pi + t", &k).is_err());
        assert!(parse_element("(1", &k).is_err());
    }
}
