use std::fmt;

use super::scalar::{Scalar, Status};
use crate::error::{HkError, Result};

/// A dense matrix with labelled rows and columns.
///
/// Labels are opaque tags (basis monomials, class names) carried through
/// elimination so that failures can name the offending entry.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecMatrix<T: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    ctx: T::Ctx,
}

/// Reduced row echelon form `E = T A` from full-pivoting Gauss-Jordan
/// elimination. `pivots[k] = (k, c)`: row `k` of `E` has its pivot in column `c`.
#[derive(Clone, Debug)]
pub struct Echelon<T: Scalar> {
    pub echelon: PrecMatrix<T>,
    pub transform: PrecMatrix<T>,
    pub pivots: Vec<(usize, usize)>,
}

impl<T: Scalar> Echelon<T> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome<T> {
    Solved(Vec<T>),
    /// Certified inconsistency: the residual at this row is nonzero.
    Inconsistent { row: String },
}

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

impl<T: Scalar> PrecMatrix<T> {
    pub fn zeros(ctx: &T::Ctx, rows: usize, cols: usize) -> Self {
        PrecMatrix {
            rows,
            cols,
            data: vec![T::zero(ctx); rows * cols],
            row_labels: default_labels("r", rows),
            col_labels: default_labels("c", cols),
            ctx: ctx.clone(),
        }
    }

    pub fn identity(ctx: &T::Ctx, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, T::one(ctx));
        }
        m
    }

    pub fn from_fn(ctx: &T::Ctx, rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(ctx, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(ctx: &T::Ctx, rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(HkError::Shape("ragged rows".into()));
        }
        let mut m = Self::zeros(ctx, r, c);
        m.data = rows.into_iter().flatten().collect();
        Ok(m)
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(ctx: &T::Ctx, rows: usize, cols: &[Vec<T>]) -> Result<Self> {
        if cols.iter().any(|c| c.len() != rows) {
            return Err(HkError::Shape("column length mismatch".into()));
        }
        Ok(Self::from_fn(ctx, rows, cols.len(), |i, j| cols[j][i].clone()))
    }

    pub fn with_labels(mut self, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self> {
        if row_labels.len() != self.rows || col_labels.len() != self.cols {
            return Err(HkError::Shape("label count does not match the shape".into()));
        }
        for labels in [&row_labels, &col_labels] {
            let mut seen = std::collections::HashSet::new();
            if !labels.iter().all(|l| seen.insert(l)) {
                return Err(HkError::Shape("labels must be unique".into()));
            }
        }
        self.row_labels = row_labels;
        self.col_labels = col_labels;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ctx(&self) -> &T::Ctx {
        &self.ctx
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: T) {
        self.data[i * self.cols + j] = x;
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::from_fn(&self.ctx, self.cols, self.rows, |i, j| self.get(j, i).clone());
        t.row_labels = self.col_labels.clone();
        t.col_labels = self.row_labels.clone();
        t
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        PrecMatrix { data: self.data.iter().map(f).collect(), ..self.clone() }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.mul(c))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(HkError::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect();
        Ok(PrecMatrix { data, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect();
        Ok(PrecMatrix { data, ..self.clone() })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(HkError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(&self.ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = T::zero(&self.ctx);
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out.row_labels = self.row_labels.clone();
        out.col_labels = other.col_labels.clone();
        Ok(out)
    }

    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(HkError::Shape(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(T::zero(&self.ctx), |acc, (a, b)| acc.add(&a.mul(b)))
            })
            .collect())
    }

    /// True when every entry is zero at `zero_prec`.
    pub fn is_zero_at(&self, zero_prec: i64) -> bool {
        self.data.iter().all(|x| x.is_zero_at(zero_prec))
    }

    /// Gauss-Jordan elimination with full pivoting: at each step the pivot is
    /// the remaining entry of best quality (minimal valuation for `K`,
    /// smallest height for rationals), searched only over columns `< limit`.
    fn eliminate(&self, limit: usize, zero_prec: i64) -> Result<Echelon<T>> {
        let mut e = self.clone();
        let mut t = Self::identity(&self.ctx, self.rows);
        t.row_labels = self.row_labels.clone();
        let mut used_cols = vec![false; self.cols];
        let mut pivots = Vec::new();
        for k in 0..self.rows.min(limit) {
            let mut best: Option<(i64, usize, usize)> = None;
            let mut ambiguous: Option<(usize, usize, i64)> = None;
            for i in k..self.rows {
                for (j, used) in used_cols.iter().enumerate().take(limit) {
                    if *used {
                        continue;
                    }
                    match e.get(i, j).status(zero_prec) {
                        Status::Nonzero { key } => {
                            if best.is_none_or(|(b, _, _)| key < b) {
                                best = Some((key, i, j));
                            }
                        }
                        Status::Ambiguous { prec } => {
                            ambiguous.get_or_insert((i, j, prec));
                        }
                        Status::Zero => {}
                    }
                }
            }
            let Some((_, pi, pj)) = best else {
                if let Some((i, j, prec)) = ambiguous {
                    return Err(HkError::AmbiguousPivot {
                        row: e.row_labels[i].clone(),
                        col: e.col_labels[j].clone(),
                        prec: prec.to_string(),
                    });
                }
                break;
            };
            e.swap_rows(k, pi);
            t.swap_rows(k, pi);
            used_cols[pj] = true;
            pivots.push((k, pj));
            let piv = e.get(k, pj).clone();
            for i in 0..self.rows {
                if i == k {
                    continue;
                }
                let x = e.get(i, pj).clone();
                if x.status(zero_prec) == Status::Zero {
                    continue;
                }
                let f = x.div(&piv)?;
                e.axpy_row(i, k, &f);
                t.axpy_row(i, k, &f);
            }
        }
        Ok(Echelon { echelon: e, transform: t, pivots })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
        self.row_labels.swap(a, b);
    }

    /// `row[i] -= f * row[k]`
    fn axpy_row(&mut self, i: usize, k: usize, f: &T) {
        for j in 0..self.cols {
            let t = f.mul(self.get(k, j));
            let v = self.get(i, j).sub(&t);
            self.set(i, j, v);
        }
    }

    pub fn row_reduce(&self, zero_prec: i64) -> Result<Echelon<T>> {
        self.eliminate(self.cols, zero_prec)
    }

    pub fn rank(&self, zero_prec: i64) -> Result<usize> {
        Ok(self.row_reduce(zero_prec)?.rank())
    }

    /// Solves `A x = b`. The solution sets free variables to zero; an
    /// inconsistency is reported only when the residual is certified nonzero.
    pub fn solve(&self, b: &[T], zero_prec: i64) -> Result<SolveOutcome<T>> {
        if b.len() != self.rows {
            return Err(HkError::Shape(format!("right-hand side of length {} for {} rows", b.len(), self.rows)));
        }
        let mut aug = Self::zeros(&self.ctx, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        aug.row_labels = self.row_labels.clone();
        let mut cl = self.col_labels.clone();
        cl.push("rhs".into());
        aug.col_labels = cl;
        let ech = aug.eliminate(self.cols, zero_prec)?;
        let e = &ech.echelon;
        for i in ech.rank()..self.rows {
            match e.get(i, self.cols).status(zero_prec) {
                Status::Zero => {}
                Status::Nonzero { .. } => return Ok(SolveOutcome::Inconsistent { row: e.row_labels[i].clone() }),
                Status::Ambiguous { prec } => {
                    return Err(HkError::AmbiguousSolve { row: e.row_labels[i].clone(), prec: prec.to_string() })
                }
            }
        }
        let mut x = vec![T::zero(&self.ctx); self.cols];
        for &(k, c) in &ech.pivots {
            x[c] = e.get(k, self.cols).div(e.get(k, c))?;
        }
        Ok(SolveOutcome::Solved(x))
    }

    /// A basis of the kernel, one vector per non-pivot column.
    pub fn kernel_basis(&self, zero_prec: i64) -> Result<Vec<Vec<T>>> {
        let ech = self.row_reduce(zero_prec)?;
        let e = &ech.echelon;
        let mut pivot_of = vec![None; self.cols];
        for &(k, c) in &ech.pivots {
            pivot_of[c] = Some(k);
        }
        let mut basis = Vec::new();
        for f in 0..self.cols {
            if pivot_of[f].is_some() {
                continue;
            }
            let mut v = vec![T::zero(&self.ctx); self.cols];
            v[f] = T::one(&self.ctx);
            for &(k, c) in &ech.pivots {
                v[c] = e.get(k, f).div(e.get(k, c))?.neg();
            }
            basis.push(v);
        }
        Ok(basis)
    }
}

impl<T: Scalar> fmt::Display for PrecMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(Scalar::render).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
