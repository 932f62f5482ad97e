use std::sync::Arc;

use num_rational::BigRational;
use serde::Serialize;

use crate::chart::{ChartElement, ChartId, ChartKind, Form, Gluing, MonomialIndex, Window};
use crate::error::Result;
use crate::kim_hain::KimHainForm;
use crate::linalg::Scalar;
use crate::padic::{FieldDescriptor, KElement};

/// One basis element of a cochain group: chart, monomial, form, `u`-order.
///
/// The derived order (chart kind, chart index, `i`, `j`, form, `u`) is the
/// fixed enumeration order of every basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BasisKey {
    pub kind: ChartKind,
    pub n: u32,
    pub i: u32,
    pub j: i32,
    pub form: Form,
    pub u: u32,
}

impl BasisKey {
    pub fn term(&self) -> TermKey {
        TermKey { m: MonomialIndex::new(self.i, self.j), form: self.form, u: self.u }
    }

    pub fn label(&self) -> String {
        let mono = crate::chart::monomial_name(self.kind, MonomialIndex::new(self.i, self.j));
        let form = match self.form {
            Form::One => "",
            Form::DlogV => " dlog v",
            Form::DlogW => " dlog w",
            Form::DlogVW => " dlog v∧dlog w",
        };
        let u = if self.u > 0 { format!(" u^[{}]", self.u) } else { String::new() };
        let body = format!("{mono}{form}{u}");
        format!("{:?}_{}:{}", self.kind, self.n, if body.is_empty() { " 1".into() } else { body })
    }
}

/// A term inside one chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermKey {
    pub m: MonomialIndex,
    pub form: Form,
    pub u: u32,
}

/// What the Cech engine needs from the sections living on single charts.
pub trait LocalSection: Clone + Send + Sync + Sized + 'static {
    type Scalar: Scalar;
    type Env: Clone + Send + Sync;
    /// Relative forms on a fiber rather than absolute ones over the base.
    const FIBER: bool;

    fn ctx(env: &Self::Env) -> <Self::Scalar as Scalar>::Ctx;
    fn window(env: &Self::Env) -> Window;
    fn u_max(env: &Self::Env) -> u32;
    fn zero(env: &Self::Env, chart: ChartId, degree: usize) -> Self;
    fn term(env: &Self::Env, chart: ChartId, key: TermKey, c: Self::Scalar) -> Self;
    /// `dlog w` on the chart (on a fiber this is `-dlog v`).
    fn dlog_w(env: &Self::Env, chart: ChartId) -> Self;

    fn chart(&self) -> ChartId;
    fn degree(&self) -> usize;
    fn d(&self) -> Self;
    fn restrict(&self, gluing: Gluing) -> Result<Self>;
    fn add(&self, other: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn terms(&self) -> Vec<(TermKey, Self::Scalar)>;
    fn overflow(&self) -> bool;
}

/// Hyodo-Kato side: forms over the base with divided powers of `u`, exact
/// rational coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HkEnv {
    pub window: Window,
}

impl LocalSection for KimHainForm {
    type Scalar = BigRational;
    type Env = HkEnv;
    const FIBER: bool = false;

    fn ctx(_: &HkEnv) {}
    fn window(env: &HkEnv) -> Window {
        env.window
    }
    fn u_max(env: &HkEnv) -> u32 {
        env.window.u
    }
    fn zero(env: &HkEnv, chart: ChartId, degree: usize) -> Self {
        KimHainForm::zero(chart, degree, env.window)
    }
    fn term(env: &HkEnv, chart: ChartId, key: TermKey, c: BigRational) -> Self {
        KimHainForm::monomial(chart, key.m, key.form, key.u, c, env.window)
    }
    fn dlog_w(env: &HkEnv, chart: ChartId) -> Self {
        KimHainForm::monomial(chart, MonomialIndex::new(0, 0), Form::DlogW, 0, BigRational::from_integer(1.into()), env.window)
    }
    fn chart(&self) -> ChartId {
        KimHainForm::chart(self)
    }
    fn degree(&self) -> usize {
        KimHainForm::degree(self)
    }
    fn d(&self) -> Self {
        KimHainForm::d(self)
    }
    fn restrict(&self, gluing: Gluing) -> Result<Self> {
        KimHainForm::restrict(self, gluing)
    }
    fn add(&self, other: &Self) -> Result<Self> {
        KimHainForm::add(self, other)
    }
    fn neg(&self) -> Self {
        KimHainForm::neg(self)
    }
    fn terms(&self) -> Vec<(TermKey, BigRational)> {
        KimHainForm::terms(self).into_iter().map(|(m, form, u, c)| (TermKey { m, form, u }, c)).collect()
    }
    fn overflow(&self) -> bool {
        KimHainForm::overflow(self)
    }
}

/// De Rham side: relative forms on the fiber at `s = point` over `K`.
#[derive(Clone, Debug)]
pub struct DrEnv {
    pub field: Arc<FieldDescriptor>,
    pub point: KElement,
    pub window: Window,
}

impl LocalSection for ChartElement<KElement> {
    type Scalar = KElement;
    type Env = DrEnv;
    const FIBER: bool = true;

    fn ctx(env: &DrEnv) -> Arc<FieldDescriptor> {
        env.field.clone()
    }
    fn window(env: &DrEnv) -> Window {
        env.window
    }
    fn u_max(_: &DrEnv) -> u32 {
        0
    }
    fn zero(env: &DrEnv, chart: ChartId, degree: usize) -> Self {
        ChartElement::fiber_zero(&env.field, chart, degree, &env.point, env.window)
    }
    fn term(env: &DrEnv, chart: ChartId, key: TermKey, c: KElement) -> Self {
        debug_assert_eq!(key.u, 0);
        ChartElement::fiber_monomial(&env.field, chart, key.m.j, key.form, c, &env.point, env.window)
    }
    fn dlog_w(env: &DrEnv, chart: ChartId) -> Self {
        let minus_one = KElement::from_int(&env.field, -1);
        ChartElement::fiber_monomial(&env.field, chart, 0, Form::DlogV, minus_one, &env.point, env.window)
    }
    fn chart(&self) -> ChartId {
        ChartElement::chart(self)
    }
    fn degree(&self) -> usize {
        ChartElement::degree(self)
    }
    fn d(&self) -> Self {
        ChartElement::d(self)
    }
    fn restrict(&self, gluing: Gluing) -> Result<Self> {
        ChartElement::restrict(self, gluing)
    }
    fn add(&self, other: &Self) -> Result<Self> {
        ChartElement::add(self, other)
    }
    fn neg(&self) -> Self {
        ChartElement::neg(self)
    }
    fn terms(&self) -> Vec<(TermKey, KElement)> {
        ChartElement::terms(self).map(|((m, form), c)| (TermKey { m: *m, form: *form, u: 0 }, c.clone())).collect()
    }
    fn overflow(&self) -> bool {
        ChartElement::overflow(self)
    }
}
