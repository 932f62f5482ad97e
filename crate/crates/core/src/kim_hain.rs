//! Forms with divided-power coefficients `sum_i omega_i u^[i]`.
//!
//! Relations: `d u^[i+1] = -dlog s · u^[i]`, `u^[i] u^[j] = C(i+j, i) u^[i+j]`,
//! `N u^[i] = u^[i-1]`, `phi u^[i] = p^i u^[i]`. Orders above the window's
//! `u` bound are dropped and flag overflow, like monomials outside the window.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::chart::{ChartElement, ChartId, Form, MonomialIndex, Window};
use crate::error::{HkError, Result};
use crate::log::LogBranch;
use crate::padic::KElement;

type Q = BigRational;

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

#[derive(Clone, Debug, PartialEq)]
pub struct KimHainForm {
    chart: ChartId,
    degree: usize,
    window: Window,
    components: BTreeMap<u32, ChartElement<Q>>,
    overflow: bool,
}

impl KimHainForm {
    pub fn zero(chart: ChartId, degree: usize, window: Window) -> Self {
        KimHainForm { chart, degree, window, components: BTreeMap::new(), overflow: false }
    }

    /// `omega · u^[i]`.
    pub fn from_chart(omega: ChartElement<Q>, i: u32) -> Self {
        let mut x = Self::zero(omega.chart(), omega.degree(), omega.window());
        x.overflow = omega.overflow();
        x.put(i, omega);
        x
    }

    /// `c · monomial · form · u^[i]`.
    pub fn monomial(chart: ChartId, m: MonomialIndex, form: Form, u: u32, c: Q, window: Window) -> Self {
        Self::from_chart(ChartElement::monomial(&(), chart, m, form, c, window), u)
    }

    /// `u^[i]` as a function on `chart`.
    pub fn u(chart: ChartId, i: u32, window: Window) -> Self {
        Self::monomial(chart, MonomialIndex::new(0, 0), Form::One, i, Q::one(), window)
    }

    pub fn chart(&self) -> ChartId {
        self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn overflow(&self) -> bool {
        self.overflow || self.components.values().any(ChartElement::overflow)
    }

    pub fn components(&self) -> impl Iterator<Item = (&u32, &ChartElement<Q>)> {
        self.components.iter()
    }

    pub fn component(&self, i: u32) -> Option<&ChartElement<Q>> {
        self.components.get(&i)
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(ChartElement::is_zero)
    }

    /// All nonzero terms as `(monomial, form, u-order, coefficient)`.
    pub fn terms(&self) -> Vec<(MonomialIndex, Form, u32, Q)> {
        self.components
            .iter()
            .flat_map(|(i, w)| w.terms().map(move |((m, f), c)| (*m, *f, *i, c.clone())))
            .collect()
    }

    /// Adds `omega` into the `u^[i]` slot, or flags overflow past the window.
    fn put(&mut self, i: u32, omega: ChartElement<Q>) {
        self.overflow |= omega.overflow();
        if i > self.window.u {
            if !omega.is_zero() {
                self.overflow = true;
            }
            return;
        }
        let slot = match self.components.remove(&i) {
            Some(old) => old.add(&omega).expect("same chart and degree"),
            None => omega,
        };
        if !slot.is_zero() || slot.overflow() {
            self.components.insert(i, slot);
        }
    }

    fn like(&self, chart: ChartId, degree: usize) -> Self {
        KimHainForm { chart, degree, window: self.window, components: BTreeMap::new(), overflow: self.overflow }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.chart != other.chart {
            return Err(HkError::ChartMismatch(format!("{} vs {}", self.chart, other.chart)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.degree != other.degree {
            return Err(HkError::ChartMismatch(format!("degrees {} and {}", self.degree, other.degree)));
        }
        let mut out = self.clone();
        out.overflow |= other.overflow;
        for (i, w) in &other.components {
            out.put(*i, w.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.like(self.chart, self.degree);
        for (i, w) in &self.components {
            out.put(*i, w.neg());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = self.like(self.chart, self.degree);
        for (i, w) in &self.components {
            out.put(*i, w.scale(c));
        }
        out
    }

    /// `d(omega u^[i]) = d omega · u^[i] - (-1)^deg(omega) (omega ∧ dlog s) · u^[i-1]`.
    pub fn d(&self) -> Self {
        let mut out = self.like(self.chart, self.degree + 1);
        let dlog_s = {
            let m = MonomialIndex::new(0, 0);
            let dv = ChartElement::monomial(&(), self.chart, m, Form::DlogV, Q::one(), self.window);
            let dw = ChartElement::monomial(&(), self.chart, m, Form::DlogW, Q::one(), self.window);
            dv.add(&dw).expect("same chart")
        };
        let sign = if self.degree.is_multiple_of(2) { -Q::one() } else { Q::one() };
        for (i, w) in &self.components {
            out.put(*i, w.d());
            if *i > 0 && self.degree < 2 {
                let wedge = w.mul(&dlog_s).expect("degree at most 2");
                out.put(i - 1, wedge.scale(&sign));
            }
        }
        out
    }

    /// Product with `u^[i] u^[j] = C(i+j, i) u^[i+j]`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let degree = self.degree + other.degree;
        if degree > 2 {
            return Err(HkError::Invalid(format!("product of degrees {} and {}", self.degree, other.degree)));
        }
        let mut out = self.like(self.chart, degree);
        out.overflow |= other.overflow;
        for (i, a) in &self.components {
            for (j, b) in &other.components {
                let c = Q::from_integer(binomial(i + j, *i));
                out.put(i + j, a.mul(b)?.scale(&c));
            }
        }
        Ok(out)
    }

    /// Monodromy `u^[i] -> u^[i-1]`, killing the `u^[0]` slot.
    #[allow(non_snake_case)]
    pub fn N(&self) -> Self {
        let mut out = self.like(self.chart, self.degree);
        for (i, w) in &self.components {
            if *i > 0 {
                out.put(i - 1, w.clone());
            }
        }
        out
    }

    /// Chart Frobenius on the coefficients, times `p^i` on `u^[i]`.
    pub fn frobenius(&self, p: u64) -> Result<Self> {
        let mut out = self.like(self.chart, self.degree);
        for (i, w) in &self.components {
            let c = Q::from_integer(BigInt::from(p).pow(*i));
            out.put(*i, w.frobenius_pullback(p)?.scale(&c));
        }
        Ok(out)
    }

    pub fn restrict(&self, gluing: crate::chart::Gluing) -> Result<Self> {
        let target = self.chart.target(gluing)?;
        let mut out = self.like(target, self.degree);
        for (i, w) in &self.components {
            out.put(*i, w.restrict(gluing)?);
        }
        Ok(out)
    }

    /// `u^[i] -> (-log_q(pi))^i / i!`, then the fiber at `s = a`.
    pub fn psi_evaluate(&self, branch: &LogBranch, a: &KElement) -> Result<ChartElement<KElement>> {
        let field = branch.field();
        let minus_l = branch.log_q_pi().neg();
        let mut out = ChartElement::fiber_zero(field, self.chart, self.degree, a, self.window);
        for (i, w) in &self.components {
            let weight = if *i == 0 {
                KElement::one(field)
            } else {
                minus_l.pow(*i as u64).div_int(&factorial(*i))
            };
            out = out.add(&w.specialize(a)?.scale(&weight))?;
        }
        Ok(out)
    }
}

impl fmt::Display for KimHainForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0 on {}", self.chart);
        }
        let parts: Vec<String> = self
            .components
            .iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(i, w)| format!("[{w}]·u^[{i}]"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Exact rational equality of two forms, ignoring empty slots.
pub fn forms_equal(a: &KimHainForm, b: &KimHainForm) -> bool {
    match a.sub(b) {
        Ok(d) => d.is_zero(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Gluing;

    fn chart() -> ChartId {
        ChartId::z(1, 2)
    }

    fn win() -> Window {
        Window::new(8, 8, 4)
    }

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn generator_relation() {
        let du = KimHainForm::u(chart(), 1, win()).d();
        let expect = KimHainForm::monomial(chart(), MonomialIndex::new(0, 0), Form::DlogV, 0, q(-1), win())
            .add(&KimHainForm::monomial(chart(), MonomialIndex::new(0, 0), Form::DlogW, 0, q(-1), win()))
            .unwrap();
        assert!(forms_equal(&du, &expect));
        assert!(KimHainForm::u(chart(), 0, win()).d().is_zero());
    }

    #[test]
    fn divided_powers_multiply() {
        let u1 = KimHainForm::u(chart(), 1, win());
        let u2 = KimHainForm::u(chart(), 2, win());
        assert!(forms_equal(&u1.mul(&u1).unwrap(), &u2.scale(&q(2))));
        let u3 = KimHainForm::u(chart(), 3, win());
        assert!(forms_equal(&u1.mul(&u2).unwrap(), &u3.scale(&q(3))));
    }

    #[test]
    fn d_squared_and_relation() {
        let x = KimHainForm::monomial(chart(), MonomialIndex::new(1, 2), Form::One, 3, q(5), win());
        assert!(x.d().d().is_zero());
        // N phi = p phi N
        assert!(forms_equal(&x.frobenius(5).unwrap().N(), &x.N().frobenius(5).unwrap().scale(&q(5))));
        let r = x.restrict(Gluing::Next).unwrap();
        assert!(forms_equal(&r.d(), &x.d().restrict(Gluing::Next).unwrap()));
    }
}
