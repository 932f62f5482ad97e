//! Truncated coordinate rings and log forms on the charts of the `r`-gon model.
//!
//! `Z_n` has coordinates `v, w` with `v w = s`; a monomial `v^a w^b` is stored
//! in reduced form `s^i v^j` (`j >= 0`) or `s^i w^-j` (`j < 0`) with
//! `i = min(a, b)`. The overlap `W_n` inverts `w`, so its monomials are
//! `s^i w^j` with `j` of either sign. Log forms use the basis
//! `1, dlog v, dlog w, dlog v ∧ dlog w`; `dlog s = dlog v + dlog w`.
//!
//! A fiber element lives over the point `s = a` of the base: monomials are
//! `v^j` / `w^-j` (or `w^j` on `W_n`) with coefficients in `K`, and relative
//! forms have the single basis element `dlog v` since `dlog w = -dlog v`.
//!
//! Elements are truncated to a [`Window`]; anything pushed outside is dropped
//! and the element is flagged as overflowed.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{HkError, Result};
use crate::linalg::{Scalar, Status};
use crate::padic::KElement;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChartKind {
    Z,
    W,
}

/// Chart `Z_n` or overlap `W_n` of the `r`-gon covering, `1 <= n <= r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ChartId {
    pub kind: ChartKind,
    pub n: u32,
    pub r: u32,
}

impl ChartId {
    pub fn z(n: u32, r: u32) -> Self {
        assert!(r >= 1 && (1..=r).contains(&n), "chart index {n} out of 1..={r}");
        ChartId { kind: ChartKind::Z, n, r }
    }

    pub fn w(n: u32, r: u32) -> Self {
        assert!(r >= 1 && (1..=r).contains(&n), "chart index {n} out of 1..={r}");
        ChartId { kind: ChartKind::W, n, r }
    }

    /// The overlap a `Z`-chart restricts to under `gluing`.
    pub fn target(&self, gluing: Gluing) -> Result<ChartId> {
        if self.kind != ChartKind::Z {
            return Err(HkError::ChartMismatch(format!("{self} is not a Z-chart")));
        }
        Ok(match gluing {
            Gluing::Natural => ChartId::w(self.n, self.r),
            Gluing::Next if self.n == 1 => ChartId::w(self.r, self.r),
            Gluing::Next => ChartId::w(self.n - 1, self.r),
        })
    }
}

impl fmt::Display for ChartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}_{}", self.kind, self.n)
    }
}

/// How a `Z`-chart meets an overlap: `Z_n` is an open of itself along
/// `W_n` ([`Gluing::Natural`]); `Z_{n+1}` meets `W_n` through
/// `v_{n+1} = w_n^-1`, `w_{n+1} = s w_n` ([`Gluing::Next`]), and `Z_1` meets
/// `W_r` the same way.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gluing {
    Natural,
    Next,
}

/// Exponent of `s` and of the fiber coordinate; see the module docs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MonomialIndex {
    pub i: u32,
    pub j: i32,
}

impl MonomialIndex {
    pub fn new(i: u32, j: i32) -> Self {
        MonomialIndex { i, j }
    }

    /// Exponents `(a, b)` of `v^a w^b` on the chart's own coordinates.
    pub fn vw_exponents(&self, kind: ChartKind) -> (i64, i64) {
        let (i, j) = (self.i as i64, self.j as i64);
        match kind {
            ChartKind::Z => (i + j.max(0), i + (-j).max(0)),
            ChartKind::W => (i, i + j),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Form {
    One,
    DlogV,
    DlogW,
    DlogVW,
}

impl Form {
    pub fn degree(self) -> usize {
        match self {
            Form::One => 0,
            Form::DlogV | Form::DlogW => 1,
            Form::DlogVW => 2,
        }
    }

    /// Basis forms of a degree on a chart (absolute) or on a fiber (relative).
    pub fn basis(degree: usize, fiber: bool) -> &'static [Form] {
        match (degree, fiber) {
            (0, _) => &[Form::One],
            (1, false) => &[Form::DlogV, Form::DlogW],
            (1, true) => &[Form::DlogV],
            (2, false) => &[Form::DlogVW],
            _ => &[],
        }
    }

    /// `self ∧ other` as `(sign, form)`, or `None` when it vanishes.
    pub fn wedge(self, other: Form) -> Option<(i64, Form)> {
        use Form::*;
        match (self, other) {
            (One, f) | (f, One) => Some((1, f)),
            (DlogV, DlogW) => Some((1, DlogVW)),
            (DlogW, DlogV) => Some((-1, DlogVW)),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Form::One => "",
            Form::DlogV => " dlog v",
            Form::DlogW => " dlog w",
            Form::DlogVW => " dlog v∧dlog w",
        }
    }
}

/// Truncation window: `s`-exponent, fiber exponent and divided-power order.
///
/// `Z`-charts keep `i <= s`, `|j| <= t`; overlaps keep `i <= s + t`,
/// `|j| <= t`, which is exactly what the restriction maps need so that a
/// window of charts is closed under the Cech differential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub s: u32,
    pub t: u32,
    pub u: u32,
}

impl Window {
    pub fn new(s: u32, t: u32, u: u32) -> Self {
        Window { s, t, u }
    }

    /// `S = T = 2p + 2`, `U = 3`.
    pub fn default_for(p: u64) -> Self {
        let st = 2 * p as u32 + 2;
        Window { s: st, t: st, u: 3 }
    }

    /// `(S + 4, T + 4, U + 1)`.
    pub fn enlarged(&self) -> Self {
        Window { s: self.s + 4, t: self.t + 4, u: self.u + 1 }
    }

    pub fn contains(&self, kind: ChartKind, m: MonomialIndex, fiber: bool) -> bool {
        if m.j.unsigned_abs() > self.t {
            return false;
        }
        if fiber {
            return m.i == 0;
        }
        match kind {
            ChartKind::Z => m.i <= self.s,
            ChartKind::W => m.i <= self.s + self.t,
        }
    }

    /// All monomials of the window on a chart kind, in `(i, j)` order.
    pub fn monomials(&self, kind: ChartKind, fiber: bool) -> Vec<MonomialIndex> {
        let t = self.t as i32;
        let i_max = match (fiber, kind) {
            (true, _) => 0,
            (false, ChartKind::Z) => self.s,
            (false, ChartKind::W) => self.s + self.t,
        };
        (0..=i_max).flat_map(|i| (-t..=t).map(move |j| MonomialIndex::new(i, j))).collect()
    }
}

pub(crate) fn scalar_pow<C: Scalar>(ctx: &C::Ctx, x: &C, k: u64) -> C {
    (0..k).fold(C::one(ctx), |acc, _| acc.mul(x))
}

/// A form on one chart, truncated to a window.
#[derive(Clone, Debug)]
pub struct ChartElement<C: Scalar> {
    chart: ChartId,
    degree: usize,
    terms: BTreeMap<(MonomialIndex, Form), C>,
    fiber: Option<C>,
    window: Window,
    overflow: bool,
    ctx: C::Ctx,
}

impl<C: Scalar> PartialEq for ChartElement<C> {
    fn eq(&self, other: &Self) -> bool {
        self.chart == other.chart
            && self.degree == other.degree
            && self.terms == other.terms
            && self.fiber == other.fiber
            && self.overflow == other.overflow
    }
}

impl<C: Scalar> ChartElement<C> {
    pub fn zero(ctx: &C::Ctx, chart: ChartId, degree: usize, window: Window) -> Self {
        ChartElement { chart, degree, terms: BTreeMap::new(), fiber: None, window, overflow: false, ctx: ctx.clone() }
    }

    /// Zero on the fiber of `chart` over `s = a`.
    pub fn fiber_zero(ctx: &C::Ctx, chart: ChartId, degree: usize, a: &C, window: Window) -> Self {
        ChartElement { fiber: Some(a.clone()), ..Self::zero(ctx, chart, degree, window) }
    }

    /// `coeff * monomial * form`; flags overflow if the monomial is outside the window.
    pub fn monomial(ctx: &C::Ctx, chart: ChartId, m: MonomialIndex, form: Form, coeff: C, window: Window) -> Self {
        let mut x = Self::zero(ctx, chart, form.degree(), window);
        x.add_term(m, form, coeff);
        x
    }

    pub fn fiber_monomial(ctx: &C::Ctx, chart: ChartId, j: i32, form: Form, coeff: C, a: &C, window: Window) -> Self {
        let mut x = Self::fiber_zero(ctx, chart, form.degree(), a, window);
        x.add_term(MonomialIndex::new(0, j), form, coeff);
        x
    }

    /// `1` as a function on the chart.
    pub fn one(ctx: &C::Ctx, chart: ChartId, window: Window) -> Self {
        Self::monomial(ctx, chart, MonomialIndex::new(0, 0), Form::One, C::one(ctx), window)
    }

    fn empty_like(&self, chart: ChartId, degree: usize) -> Self {
        ChartElement {
            chart,
            degree,
            terms: BTreeMap::new(),
            fiber: self.fiber.clone(),
            window: self.window,
            overflow: self.overflow,
            ctx: self.ctx.clone(),
        }
    }

    fn add_term(&mut self, m: MonomialIndex, form: Form, c: C) {
        debug_assert_eq!(form.degree(), self.degree);
        if c.status(i64::MAX / 64) == Status::Zero {
            return;
        }
        if !self.window.contains(self.chart.kind, m, self.is_fiber()) {
            self.overflow = true;
            return;
        }
        let key = (m, form);
        let v = match self.terms.remove(&key) {
            Some(old) => old.add(&c),
            None => c,
        };
        if v.status(i64::MAX / 64) != Status::Zero {
            self.terms.insert(key, v);
        }
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
        self.overflow
    }

    pub fn is_fiber(&self) -> bool {
        self.fiber.is_some()
    }

    pub fn fiber_point(&self) -> Option<&C> {
        self.fiber.as_ref()
    }

    pub fn ctx(&self) -> &C::Ctx {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(MonomialIndex, Form), &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: MonomialIndex, form: Form) -> Option<&C> {
        self.terms.get(&(m, form))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every coefficient is zero at `zero_prec`.
    pub fn is_zero_at(&self, zero_prec: i64) -> bool {
        self.terms.values().all(|c| c.is_zero_at(zero_prec))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.chart != other.chart || self.is_fiber() != other.is_fiber() {
            return Err(HkError::ChartMismatch(format!("{} vs {}", self.chart, other.chart)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(HkError::ChartMismatch(format!("degrees {} and {}", self.degree, other.degree)));
        }
        let mut out = self.clone();
        out.overflow |= other.overflow;
        for ((m, f), c) in &other.terms {
            out.add_term(*m, *f, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &C) -> Self {
        let mut out = self.empty_like(self.chart, self.degree);
        for ((m, f), c) in &self.terms {
            out.add_term(*m, *f, c.mul(k));
        }
        out
    }

    /// Product of two monomials: resulting monomial and scalar factor.
    fn monomial_product(&self, x: MonomialIndex, y: MonomialIndex) -> (MonomialIndex, C) {
        let one = C::one(&self.ctx);
        match (self.chart.kind, &self.fiber) {
            (ChartKind::W, _) => (MonomialIndex::new(x.i + y.i, x.j + y.j), one),
            (ChartKind::Z, fiber) => {
                let (a1, b1) = x.vw_exponents(ChartKind::Z);
                let (a2, b2) = y.vw_exponents(ChartKind::Z);
                let (a, b) = (a1 + a2, b1 + b2);
                let i = a.min(b);
                let j = (a - b) as i32;
                match fiber {
                    None => (MonomialIndex::new(i as u32, j), one),
                    Some(pt) => (MonomialIndex::new(0, j), scalar_pow(&self.ctx, pt, i as u64)),
                }
            }
        }
    }

    /// Wedge product (graded commutative, total degree at most 2).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let degree = self.degree + other.degree;
        if degree > 2 {
            return Err(HkError::Invalid(format!("product of degrees {} and {}", self.degree, other.degree)));
        }
        let mut out = self.empty_like(self.chart, degree);
        out.overflow |= other.overflow;
        if self.is_fiber() && degree > 1 {
            return Ok(out);
        }
        for ((m1, f1), c1) in &self.terms {
            for ((m2, f2), c2) in &other.terms {
                let Some((sign, f)) = f1.wedge(*f2) else { continue };
                let (m, k) = self.monomial_product(*m1, *m2);
                out.add_term(m, f, c1.mul(c2).mul(&k).mul(&C::from_int(&self.ctx, sign)));
            }
        }
        Ok(out)
    }

    /// Exterior derivative. On a chart `d(v^a w^b) = v^a w^b (a dlog v + b dlog w)`;
    /// on a fiber the relation `dlog w = -dlog v` applies.
    pub fn d(&self) -> Self {
        let mut out = self.empty_like(self.chart, self.degree + 1);
        if self.degree >= 2 || (self.is_fiber() && self.degree >= 1) {
            return out;
        }
        for ((m, f), c) in &self.terms {
            if self.is_fiber() {
                // Z fiber: v^j -> j dlog v, w^k -> k dlog w = -k dlog v; W fiber: w^j -> -j dlog v
                let k = match self.chart.kind {
                    ChartKind::Z => m.j as i64,
                    ChartKind::W => -(m.j as i64),
                };
                out.add_term(*m, Form::DlogV, c.mul(&C::from_int(&self.ctx, k)));
                continue;
            }
            let (a, b) = m.vw_exponents(self.chart.kind);
            match f {
                Form::One => {
                    out.add_term(*m, Form::DlogV, c.mul(&C::from_int(&self.ctx, a)));
                    out.add_term(*m, Form::DlogW, c.mul(&C::from_int(&self.ctx, b)));
                }
                Form::DlogV => out.add_term(*m, Form::DlogVW, c.mul(&C::from_int(&self.ctx, -b))),
                Form::DlogW => out.add_term(*m, Form::DlogVW, c.mul(&C::from_int(&self.ctx, a))),
                Form::DlogVW => unreachable!(),
            }
        }
        out
    }

    /// Pullback along `v -> v^p`, `w -> w^p` (so `s -> s^p`); coefficients are
    /// fixed because the Witt vector Frobenius of `Z_p` is the identity.
    pub fn frobenius_pullback(&self, p: u64) -> Result<Self> {
        if self.is_fiber() {
            return Err(HkError::Invalid("Frobenius is only defined on charts over the base".into()));
        }
        let mut out = self.empty_like(self.chart, self.degree);
        let scale = C::from_int(&self.ctx, (p as i64).pow(self.degree as u32));
        for ((m, f), c) in &self.terms {
            let pm = MonomialIndex::new(m.i * p as u32, m.j * p as i32);
            out.add_term(pm, *f, c.mul(&scale));
        }
        Ok(out)
    }

    /// Restriction of a `Z`-chart element to the overlap given by `gluing`.
    pub fn restrict(&self, gluing: Gluing) -> Result<Self> {
        let target = self.chart.target(gluing)?;
        let mut out = self.empty_like(target, self.degree);
        for ((m, f), c) in &self.terms {
            let (i, j) = (m.i, m.j);
            let (tm, factor) = match (&self.fiber, gluing) {
                // v = s w^-1, w = w
                (None, Gluing::Natural) if j >= 0 => (MonomialIndex::new(i + j as u32, -j), None),
                (None, Gluing::Natural) => (MonomialIndex::new(i, -j), None),
                // v' = w^-1, w' = s w
                (None, Gluing::Next) if j >= 0 => (MonomialIndex::new(i, -j), None),
                (None, Gluing::Next) => (MonomialIndex::new(i + j.unsigned_abs(), -j), None),
                (Some(a), Gluing::Natural) if j >= 0 => (MonomialIndex::new(0, -j), Some((a, j as u64))),
                (Some(_), Gluing::Natural) => (MonomialIndex::new(0, -j), None),
                (Some(_), Gluing::Next) if j >= 0 => (MonomialIndex::new(0, -j), None),
                (Some(a), Gluing::Next) => (MonomialIndex::new(0, -j), Some((a, j.unsigned_abs() as u64))),
            };
            let c = match factor {
                Some((a, k)) => c.mul(&scalar_pow(&self.ctx, a, k)),
                None => c.clone(),
            };
            if self.is_fiber() || gluing == Gluing::Natural {
                out.add_term(tm, *f, c);
                continue;
            }
            // dlog v' = -dlog w, dlog w' = dlog v + 2 dlog w, dlog v'∧dlog w' = dlog v∧dlog w
            match f {
                Form::One | Form::DlogVW => out.add_term(tm, *f, c),
                Form::DlogV => out.add_term(tm, Form::DlogW, c.neg()),
                Form::DlogW => {
                    out.add_term(tm, Form::DlogV, c.clone());
                    out.add_term(tm, Form::DlogW, c.mul(&C::from_int(&self.ctx, 2)));
                }
            }
        }
        Ok(out)
    }
}

impl ChartElement<BigRational> {
    /// Fiber at `s = a` over `K`: `s -> a`, `dlog s -> 0` (so `dlog w -> -dlog v`).
    pub fn specialize(&self, a: &KElement) -> Result<ChartElement<KElement>> {
        if self.is_fiber() {
            return Err(HkError::Invalid("element is already on a fiber".into()));
        }
        let field = a.field();
        let mut out = ChartElement::fiber_zero(field, self.chart, self.degree, a, self.window);
        out.overflow = self.overflow;
        for ((m, f), c) in &self.terms {
            let k = KElement::from_rational(field, c).mul(&a.pow(m.i as u64));
            let jm = MonomialIndex::new(0, m.j);
            match f {
                Form::One | Form::DlogV => out.add_term(jm, *f, k),
                Form::DlogW => out.add_term(jm, Form::DlogV, k.neg()),
                Form::DlogVW => {}
            }
        }
        Ok(out)
    }
}

impl<C: Scalar> fmt::Display for ChartElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 on {}", self.chart);
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((m, form), c)| {
                let mono = monomial_name(self.chart.kind, *m);
                format!("({}){}{}", c.render(), mono, form.name())
            })
            .collect();
        write!(f, "{} on {}", parts.join(" + "), self.chart)?;
        if self.overflow {
            write!(f, " [overflow]")?;
        }
        Ok(())
    }
}

/// `s^i v^j`, `s^i w^k` and so on, for labels and display.
pub fn monomial_name(kind: ChartKind, m: MonomialIndex) -> String {
    let mut s = String::new();
    if m.i > 0 {
        s += &format!(" s^{}", m.i);
    }
    match (kind, m.j) {
        (_, 0) => {}
        (ChartKind::Z, j) if j > 0 => s += &format!(" v^{j}"),
        (ChartKind::Z, j) => s += &format!(" w^{}", -j),
        (ChartKind::W, j) => s += &format!(" w^{j}"),
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn win() -> Window {
        Window::new(8, 8, 3)
    }

    fn z(i: u32, j: i32, f: Form) -> ChartElement<Q> {
        ChartElement::monomial(&(), ChartId::z(1, 2), MonomialIndex::new(i, j), f, q(1), win())
    }

    #[test]
    fn relation_vw_is_s() {
        let vw = z(0, 1, Form::One).mul(&z(0, -1, Form::One)).unwrap();
        assert_eq!(vw, z(1, 0, Form::One));
        let x = z(1, 1, Form::One).mul(&z(0, -2, Form::One)).unwrap();
        assert_eq!(x, z(2, -1, Form::One));
    }

    #[test]
    fn differential_squares_to_zero() {
        let x = z(2, 3, Form::One);
        assert!(x.d().d().is_zero());
        let s = z(1, 0, Form::One);
        let ds = s.d();
        assert_eq!(ds.coeff(MonomialIndex::new(1, 0), Form::DlogV), Some(&q(1)));
        assert_eq!(ds.coeff(MonomialIndex::new(1, 0), Form::DlogW), Some(&q(1)));
    }

    #[test]
    fn next_gluing_of_forms() {
        let r = z(0, 0, Form::DlogV).restrict(Gluing::Next).unwrap();
        assert_eq!(r.coeff(MonomialIndex::new(0, 0), Form::DlogW), Some(&q(-1)));
        let v = z(0, 1, Form::One).restrict(Gluing::Next).unwrap();
        assert_eq!(v.coeff(MonomialIndex::new(0, -1), Form::One), Some(&q(1)));
        assert_eq!(v.chart(), ChartId::w(2, 2));
    }

    #[test]
    fn overflow_is_flagged() {
        let x = z(0, 5, Form::One).frobenius_pullback(5).unwrap();
        assert!(x.overflow() && x.is_zero());
    }
}
