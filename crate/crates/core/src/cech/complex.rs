use std::collections::HashMap;
use std::sync::OnceLock;

use serde::Serialize;

use super::section::{BasisKey, LocalSection, TermKey};
use crate::chart::{ChartId, ChartKind, Form, Gluing, Window};
use crate::error::{HkError, Result};
use crate::exec::Exec;
use crate::linalg::{normalize, Scalar, SparseMatrix, SparseVec};

/// A Cech cochain: degree-`k` forms on the charts `Z_1..Z_r` and
/// degree-`(k-1)` forms on the overlaps `W_1..W_r`.
#[derive(Clone, Debug)]
pub struct Cochain<S> {
    pub degree: usize,
    pub z: Vec<S>,
    pub w: Vec<S>,
}

impl<S: LocalSection> Cochain<S> {
    pub fn zero(env: &S::Env, r: u32, degree: usize) -> Self {
        let top = top_degree::<S>();
        let z = if degree < top { (1..=r).map(|n| S::zero(env, ChartId::z(n, r), degree)).collect() } else { vec![] };
        let w = if degree >= 1 { (1..=r).map(|n| S::zero(env, ChartId::w(n, r), degree - 1)).collect() } else { vec![] };
        Cochain { degree, z, w }
    }

    pub fn sections(&self) -> impl Iterator<Item = &S> {
        self.z.iter().chain(&self.w)
    }

    pub fn overflow(&self) -> bool {
        self.sections().any(S::overflow)
    }

    /// Applies a sectionwise map that preserves charts and degrees.
    pub fn map(&self, f: impl Fn(&S) -> Result<S>) -> Result<Self> {
        Ok(Cochain {
            degree: self.degree,
            z: self.z.iter().map(&f).collect::<Result<_>>()?,
            w: self.w.iter().map(&f).collect::<Result<_>>()?,
        })
    }

    /// Sectionwise map into another kind of section.
    pub fn map_into<T>(&self, f: impl Fn(&S) -> Result<T>) -> Result<Cochain<T>> {
        Ok(Cochain {
            degree: self.degree,
            z: self.z.iter().map(&f).collect::<Result<_>>()?,
            w: self.w.iter().map(&f).collect::<Result<_>>()?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree {
            return Err(HkError::Shape(format!("cochain degrees {} and {}", self.degree, other.degree)));
        }
        let pair = |a: &[S], b: &[S]| a.iter().zip(b).map(|(x, y)| x.add(y)).collect::<Result<Vec<S>>>();
        Ok(Cochain { degree: self.degree, z: pair(&self.z, &other.z)?, w: pair(&self.w, &other.w)? })
    }

    pub fn neg(&self) -> Self {
        Cochain { degree: self.degree, z: self.z.iter().map(S::neg).collect(), w: self.w.iter().map(S::neg).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }
}

/// Highest cochain degree: charts over the base carry forms up to degree 2,
/// fibers up to degree 1, and the overlaps add one.
pub fn top_degree<S: LocalSection>() -> usize {
    if S::FIBER {
        2
    } else {
        3
    }
}

/// The gluings a `Z_n` section is restricted along, with the sign of each
/// contribution to the overlap part of the differential.
fn gluing_signs(n: u32, r: u32) -> [(Gluing, i64); 2] {
    let natural = if n < r { -1 } else { 1 };
    let next = if n >= 2 { 1 } else { -1 };
    [(Gluing::Natural, natural), (Gluing::Next, next)]
}

/// Which complex a [`CechComplex`] models, for reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexShape {
    pub r: u32,
    pub fiber: bool,
    pub window: Window,
    pub dims: [usize; 4],
}

/// The truncated Cech total complex of the `r`-gon covering with a fixed
/// basis in every degree and lazily assembled sparse differentials.
pub struct CechComplex<S: LocalSection> {
    env: S::Env,
    r: u32,
    exec: Exec,
    zero_prec: i64,
    bases: Vec<Vec<BasisKey>>,
    index: Vec<HashMap<BasisKey, usize>>,
    diffs: Vec<OnceLock<SparseMatrix<S::Scalar>>>,
}

impl<S: LocalSection> CechComplex<S> {
    pub fn new(env: S::Env, r: u32, exec: Exec, zero_prec: i64) -> Result<Self> {
        if r == 0 {
            return Err(HkError::Invalid("the covering needs r >= 1".into()));
        }
        let top = top_degree::<S>();
        let window = S::window(&env);
        let u_max = S::u_max(&env);
        let mut bases = Vec::new();
        for k in 0..=top {
            let mut keys = Vec::new();
            let mut push = |kind: ChartKind, fd: usize| {
                let forms = Form::basis(fd, S::FIBER);
                for n in 1..=r {
                    for m in window.monomials(kind, S::FIBER) {
                        for &form in forms {
                            for u in 0..=u_max {
                                keys.push(BasisKey { kind, n, i: m.i, j: m.j, form, u });
                            }
                        }
                    }
                }
            };
            if k < top {
                push(ChartKind::Z, k);
            }
            if k >= 1 {
                push(ChartKind::W, k - 1);
            }
            keys.sort();
            bases.push(keys);
        }
        let index = bases.iter().map(|b| b.iter().enumerate().map(|(i, k)| (*k, i)).collect()).collect();
        let diffs = (0..top).map(|_| OnceLock::new()).collect();
        Ok(CechComplex { env, r, exec, zero_prec, bases, index, diffs })
    }

    pub fn env(&self) -> &S::Env {
        &self.env
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn zero_prec(&self) -> i64 {
        self.zero_prec
    }

    pub fn window(&self) -> Window {
        S::window(&self.env)
    }

    pub fn ctx(&self) -> <S::Scalar as Scalar>::Ctx {
        S::ctx(&self.env)
    }

    pub fn top(&self) -> usize {
        top_degree::<S>()
    }

    pub fn shape(&self) -> ComplexShape {
        let mut dims = [0; 4];
        for (k, b) in self.bases.iter().enumerate() {
            dims[k] = b.len();
        }
        ComplexShape { r: self.r, fiber: S::FIBER, window: self.window(), dims }
    }

    pub fn basis(&self, k: usize) -> &[BasisKey] {
        &self.bases[k]
    }

    pub fn index_of(&self, k: usize, key: &BasisKey) -> Option<usize> {
        self.index[k].get(key).copied()
    }

    pub fn zero_cochain(&self, degree: usize) -> Cochain<S> {
        Cochain::zero(&self.env, self.r, degree)
    }

    fn chart(&self, kind: ChartKind, n: u32) -> ChartId {
        match kind {
            ChartKind::Z => ChartId::z(n, self.r),
            ChartKind::W => ChartId::w(n, self.r),
        }
    }

    /// Coordinates of a section in the degree-`k` basis, appended to `out`.
    fn push_section(&self, k: usize, s: &S, sign: i64, out: &mut Vec<(usize, S::Scalar)>) -> Result<()> {
        let chart = s.chart();
        for (t, c) in s.terms() {
            let key = BasisKey { kind: chart.kind, n: chart.n, i: t.m.i, j: t.m.j, form: t.form, u: t.u };
            let idx = self.index_of(k, &key).ok_or(HkError::TaintedWindow)?;
            let c = if sign < 0 { c.neg() } else { c };
            out.push((idx, c));
        }
        if s.overflow() {
            return Err(HkError::TaintedWindow);
        }
        Ok(())
    }

    pub fn to_vec(&self, c: &Cochain<S>) -> Result<SparseVec<S::Scalar>> {
        let mut out = Vec::new();
        for s in c.sections() {
            self.push_section(c.degree, s, 1, &mut out)?;
        }
        Ok(normalize(out, self.zero_prec))
    }

    pub fn from_vec(&self, k: usize, v: &SparseVec<S::Scalar>) -> Result<Cochain<S>> {
        let mut c = self.zero_cochain(k);
        for (idx, val) in v {
            let key = self.bases[k][*idx];
            let term = S::term(&self.env, self.chart(key.kind, key.n), key.term(), val.clone());
            let slot = match key.kind {
                ChartKind::Z => &mut c.z[key.n as usize - 1],
                ChartKind::W => &mut c.w[key.n as usize - 1],
            };
            *slot = slot.add(&term)?;
        }
        Ok(c)
    }

    /// Contributions of one section of a degree-`k` cochain to `D` of it.
    fn image_parts(&self, k: usize, s: &S) -> Result<Vec<(S, i64)>> {
        let chart = s.chart();
        let mut parts = Vec::new();
        match chart.kind {
            ChartKind::Z => {
                if k + 1 < self.top() {
                    parts.push((s.d(), 1));
                }
                let sign = if k.is_multiple_of(2) { 1 } else { -1 };
                for (g, c) in gluing_signs(chart.n, self.r) {
                    parts.push((s.restrict(g)?, sign * c));
                }
            }
            ChartKind::W => parts.push((s.d(), 1)),
        }
        Ok(parts)
    }

    /// The total differential `D = d + (-1)^k ∂` applied sectionwise.
    pub fn total_differential(&self, c: &Cochain<S>) -> Result<Cochain<S>> {
        let k = c.degree;
        if k >= self.top() {
            return Err(HkError::Invalid(format!("no differential out of degree {k}")));
        }
        let mut out = self.zero_cochain(k + 1);
        for s in c.sections() {
            for (img, sign) in self.image_parts(k, s)? {
                let img = if sign < 0 { img.neg() } else { img };
                let t = img.chart();
                let slot = match t.kind {
                    ChartKind::Z => &mut out.z[t.n as usize - 1],
                    ChartKind::W => &mut out.w[t.n as usize - 1],
                };
                *slot = slot.add(&img)?;
            }
        }
        Ok(out)
    }

    /// The sparse matrix of `D` out of degree `k`, assembled once.
    pub fn differential(&self, k: usize) -> Result<&SparseMatrix<S::Scalar>> {
        if k >= self.top() {
            return Err(HkError::Invalid(format!("no differential out of degree {k}")));
        }
        if let Some(m) = self.diffs[k].get() {
            return Ok(m);
        }
        let ctx = self.ctx();
        let one = <S::Scalar as Scalar>::one(&ctx);
        let cols = self.exec.try_map(&self.bases[k], |key| {
            let s = S::term(&self.env, self.chart(key.kind, key.n), key.term(), one.clone());
            let mut out = Vec::new();
            for (img, sign) in self.image_parts(k, &s)? {
                self.push_section(k + 1, &img, sign, &mut out)?;
            }
            Ok::<_, HkError>(normalize(out, self.zero_prec))
        })?;
        let m = SparseMatrix::from_columns(&ctx, self.bases[k + 1].len(), cols);
        Ok(self.diffs[k].get_or_init(|| m))
    }

    /// `D` into degree `k`, or the empty map when `k = 0`.
    fn incoming(&self, k: usize) -> Result<SparseMatrix<S::Scalar>> {
        if k == 0 {
            Ok(SparseMatrix::new(&self.ctx(), self.bases[0].len()))
        } else {
            Ok(self.differential(k - 1)?.clone())
        }
    }

    /// Nonzero coordinates of `D c`, labelled; empty exactly for cocycles.
    pub fn cocycle_defect(&self, c: &Cochain<S>) -> Result<Vec<(String, S::Scalar)>> {
        if c.overflow() {
            return Err(HkError::TaintedWindow);
        }
        if c.degree >= self.top() {
            return Ok(vec![]);
        }
        let dc = self.total_differential(c)?;
        let v = self.to_vec(&dc)?;
        Ok(v.into_iter().map(|(i, x)| (self.bases[c.degree + 1][i].label(), x)).collect())
    }

    pub fn is_cocycle(&self, c: &Cochain<S>) -> Result<bool> {
        Ok(self.cocycle_defect(c)?.is_empty())
    }

    /// Some `b` with `D b = c`, or `None` when `c` is not a coboundary.
    pub fn coboundary_witness(&self, c: &Cochain<S>) -> Result<Option<Cochain<S>>> {
        let v = self.to_vec(c)?;
        if c.degree == 0 {
            return Ok(if v.is_empty() { Some(self.zero_cochain(0)) } else { None });
        }
        match self.differential(c.degree - 1)?.solve(&v, self.exec, self.zero_prec)? {
            Some(x) => Ok(Some(self.from_vec(c.degree - 1, &x)?)),
            None => Ok(None),
        }
    }

    /// Cocycle space of degree `k` as sparse vectors.
    pub fn cocycles(&self, k: usize) -> Result<Vec<SparseVec<S::Scalar>>> {
        if k >= self.top() {
            let one = <S::Scalar as Scalar>::one(&self.ctx());
            return Ok((0..self.bases[k].len()).map(|i| vec![(i, one.clone())]).collect());
        }
        self.differential(k)?.kernel(self.exec, self.zero_prec)
    }

    /// Number of the given degree-`k` vectors that are independent modulo
    /// coboundaries.
    pub fn independent_mod_boundaries(&self, k: usize, vecs: Vec<SparseVec<S::Scalar>>) -> Result<usize> {
        let front = vecs.len();
        self.incoming(k)?.prepend_columns(vecs).front_excess(front, self.exec, self.zero_prec)
    }

    /// Coordinates of `target` in `[reps | image of D]`, keeping only the
    /// `reps` part; `None` if `target` is outside the span.
    pub fn coordinates(
        &self,
        k: usize,
        reps: &[SparseVec<S::Scalar>],
        target: &SparseVec<S::Scalar>,
    ) -> Result<Option<Vec<S::Scalar>>> {
        let m = self.incoming(k)?.prepend_columns(reps.to_vec());
        let ctx = self.ctx();
        Ok(m.solve(target, self.exec, self.zero_prec)?.map(|x| {
            let mut coords = vec![<S::Scalar as Scalar>::zero(&ctx); reps.len()];
            for (j, v) in x {
                if j < reps.len() {
                    coords[j] = v;
                }
            }
            coords
        }))
    }

    /// A term key helper for building representatives by hand.
    pub fn section(&self, kind: ChartKind, n: u32, key: TermKey, c: S::Scalar) -> S {
        S::term(&self.env, self.chart(kind, n), key, c)
    }
}

/// Rank of the image of `H^k` of `small` in `H^k` of `large`. Classes that
/// only exist because of the truncation die in the larger window, so this
/// is the quantity that stabilises.
pub fn persistent_rank<S: LocalSection>(small: &CechComplex<S>, large: &CechComplex<S>, k: usize) -> Result<usize> {
    let cocycles = small.cocycles(k)?;
    let moved = cocycles
        .into_iter()
        .map(|v| {
            v.into_iter()
                .map(|(i, x)| {
                    let key = small.bases[k][i];
                    large
                        .index_of(k, &key)
                        .map(|j| (j, x))
                        .ok_or_else(|| HkError::Invalid(format!("window of {} is not nested", key.label())))
                })
                .collect::<Result<SparseVec<S::Scalar>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    large.independent_mod_boundaries(k, moved)
}

/// Extra divided-power orders a window is compared against. A class
/// `dlog v ∧ dlog s · u^[U]` at the top order only becomes a coboundary once
/// `u^[U+2]` is available (the correction on the overlaps needs one more
/// order than the one on the charts), so one extra order is not enough.
pub const U_LOOKAHEAD: u32 = 2;

/// `(S, T, U + U_LOOKAHEAD)`.
pub fn lookahead(w: Window) -> Window {
    Window::new(w.s, w.t, w.u + U_LOOKAHEAD)
}

/// Persistent ranks at a window and at its enlargement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RankEstimate {
    pub degree: usize,
    pub rank: usize,
    pub enlarged_rank: usize,
    pub stable: bool,
}

/// `h^k` as the persistent rank from a window into its [`lookahead`], and
/// again from the enlarged window; `pairs = [(W, look(W)), (W+, look(W+))]`.
pub fn h_rank_estimate<S: LocalSection>(pairs: [(&CechComplex<S>, &CechComplex<S>); 2], k: usize) -> Result<RankEstimate> {
    let rank = persistent_rank(pairs[0].0, pairs[0].1, k)?;
    let enlarged_rank = persistent_rank(pairs[1].0, pairs[1].1, k)?;
    Ok(RankEstimate { degree: k, rank, enlarged_rank, stable: rank == enlarged_rank })
}
