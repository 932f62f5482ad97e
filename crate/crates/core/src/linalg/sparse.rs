//! Sparse column matrices split into independent blocks.
//!
//! The Cech differentials only ever couple a monomial with its images under
//! the gluing maps, so the column graph falls apart into many small connected
//! components. Each component is solved on its own, in parallel under
//! [`Exec::Parallel`]: exact scalars go through an incremental sparse echelon
//! form, `K`-valued ones through the dense full-pivoting elimination of
//! [`PrecMatrix`]. Results are assembled in block order, so they do not
//! depend on the execution policy.

use std::collections::HashMap;

use super::matrix::{PrecMatrix, SolveOutcome};
use super::scalar::{Scalar, Status};
use crate::error::{HkError, Result};
use crate::exec::Exec;

/// Sparse vector: `(index, value)` pairs sorted by index, no stored zeros.
pub type SparseVec<T> = Vec<(usize, T)>;

#[derive(Clone, Debug)]
pub struct SparseMatrix<T: Scalar> {
    rows: usize,
    cols: Vec<SparseVec<T>>,
    ctx: T::Ctx,
}

/// `a + f * b`, dropping entries that become exact zeros at `zero_prec`.
pub fn axpy<T: Scalar>(a: &SparseVec<T>, f: &T, b: &SparseVec<T>, zero_prec: i64) -> SparseVec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        let (idx, val) = if take_a {
            i += 1;
            (a[i - 1].0, a[i - 1].1.clone())
        } else if take_b {
            j += 1;
            (b[j - 1].0, f.mul(&b[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (a[i - 1].0, a[i - 1].1.add(&f.mul(&b[j - 1].1)))
        };
        if val.status(zero_prec) != Status::Zero {
            out.push((idx, val));
        }
    }
    out
}

/// Builds a sorted sparse vector, summing duplicate indices.
pub fn normalize<T: Scalar>(mut entries: Vec<(usize, T)>, zero_prec: i64) -> SparseVec<T> {
    entries.sort_by_key(|(i, _)| *i);
    let mut out: SparseVec<T> = Vec::with_capacity(entries.len());
    for (i, v) in entries {
        match out.last_mut() {
            Some((j, w)) if *j == i => *w = w.add(&v),
            _ => out.push((i, v)),
        }
    }
    out.retain(|(_, v)| v.status(zero_prec) != Status::Zero);
    out
}

/// Connected components of the bipartite row/column graph.
#[derive(Clone, Debug)]
pub struct Block {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn new(ctx: &T::Ctx, rows: usize) -> Self {
        SparseMatrix { rows, cols: Vec::new(), ctx: ctx.clone() }
    }

    pub fn from_columns(ctx: &T::Ctx, rows: usize, cols: Vec<SparseVec<T>>) -> Self {
        debug_assert!(cols.iter().flatten().all(|(i, _)| *i < rows));
        SparseMatrix { rows, cols, ctx: ctx.clone() }
    }

    pub fn push_col(&mut self, col: SparseVec<T>) {
        debug_assert!(col.iter().all(|(i, _)| *i < self.rows));
        self.cols.push(col);
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn col(&self, j: usize) -> &SparseVec<T> {
        &self.cols[j]
    }

    pub fn ctx(&self) -> &T::Ctx {
        &self.ctx
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// `A x` for a sparse `x` over the columns.
    pub fn apply(&self, x: &SparseVec<T>, zero_prec: i64) -> SparseVec<T> {
        let entries = x
            .iter()
            .flat_map(|(j, c)| self.cols[*j].iter().map(move |(i, a)| (*i, a.mul(c))))
            .collect();
        normalize(entries, zero_prec)
    }

    /// New matrix with the given columns placed before the existing ones.
    pub fn prepend_columns(&self, front: Vec<SparseVec<T>>) -> Self {
        let mut cols = front;
        cols.extend(self.cols.iter().cloned());
        SparseMatrix { rows: self.rows, cols, ctx: self.ctx.clone() }
    }

    /// Connected components; zero columns form singleton blocks without rows,
    /// and rows touched by no column are omitted.
    pub fn blocks(&self) -> Vec<Block> {
        let mut uf = UnionFind((0..self.rows).collect());
        for col in &self.cols {
            if let Some((first, _)) = col.first() {
                for (i, _) in &col[1..] {
                    uf.union(*first, *i);
                }
            }
        }
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut blocks: Vec<Block> = Vec::new();
        let mut zero_cols = Vec::new();
        for (j, col) in self.cols.iter().enumerate() {
            match col.first() {
                None => zero_cols.push(j),
                Some((i, _)) => {
                    let root = uf.find(*i);
                    let b = *index.entry(root).or_insert_with(|| {
                        blocks.push(Block { rows: Vec::new(), cols: Vec::new() });
                        blocks.len() - 1
                    });
                    blocks[b].cols.push(j);
                }
            }
        }
        let mut row_seen = vec![false; self.rows];
        for block in &mut blocks {
            for &j in &block.cols {
                for (i, _) in &self.cols[j] {
                    if !row_seen[*i] {
                        row_seen[*i] = true;
                        block.rows.push(*i);
                    }
                }
            }
            block.rows.sort_unstable();
        }
        blocks.extend(zero_cols.into_iter().map(|j| Block { rows: Vec::new(), cols: vec![j] }));
        blocks
    }

    /// Columns of a block re-indexed into its local row numbering.
    fn local(&self, block: &Block) -> (usize, Vec<SparseVec<T>>) {
        let pos: HashMap<usize, usize> = block.rows.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let cols = block
            .cols
            .iter()
            .map(|&j| self.cols[j].iter().map(|(i, v)| (pos[i], v.clone())).collect())
            .collect();
        (block.rows.len(), cols)
    }

    pub fn rank(&self, exec: Exec, zero_prec: i64) -> Result<usize> {
        let blocks = self.blocks();
        let ranks = exec.try_map(&blocks, |b| {
            let (n, cols) = self.local(b);
            block_rank(&self.ctx, n, &cols, zero_prec)
        })?;
        Ok(ranks.into_iter().sum())
    }

    /// How much the first `front` columns add to the rank of the rest:
    /// `rank(A) - rank(A without its first front columns)`.
    pub fn front_excess(&self, front: usize, exec: Exec, zero_prec: i64) -> Result<usize> {
        let blocks: Vec<Block> = self.blocks().into_iter().filter(|b| b.cols.iter().any(|&j| j < front)).collect();
        let excess = exec.try_map(&blocks, |b| {
            let (n, cols) = self.local(b);
            let back: Vec<SparseVec<T>> =
                b.cols.iter().zip(&cols).filter(|(j, _)| **j >= front).map(|(_, c)| c.clone()).collect();
            Ok::<_, HkError>(block_rank(&self.ctx, n, &cols, zero_prec)? - block_rank(&self.ctx, n, &back, zero_prec)?)
        })?;
        Ok(excess.into_iter().sum())
    }

    /// A kernel basis, block by block, in block order.
    pub fn kernel(&self, exec: Exec, zero_prec: i64) -> Result<Vec<SparseVec<T>>> {
        let blocks = self.blocks();
        let kernels = exec.try_map(&blocks, |b| {
            let (n, cols) = self.local(b);
            let local = block_kernel(&self.ctx, n, &cols, zero_prec)?;
            Ok::<_, HkError>(
                local
                    .into_iter()
                    .map(|v| v.into_iter().map(|(k, c)| (b.cols[k], c)).collect::<SparseVec<T>>())
                    .collect::<Vec<_>>(),
            )
        })?;
        Ok(kernels.into_iter().flatten().collect())
    }

    /// Solves `A x = b`; `None` when the system is certified inconsistent.
    pub fn solve(&self, b: &SparseVec<T>, exec: Exec, zero_prec: i64) -> Result<Option<SparseVec<T>>> {
        let blocks = self.blocks();
        let mut block_of_row = vec![usize::MAX; self.rows];
        for (k, bl) in blocks.iter().enumerate() {
            for &i in &bl.rows {
                block_of_row[i] = k;
            }
        }
        let mut rhs: HashMap<usize, SparseVec<T>> = HashMap::new();
        for (i, v) in b {
            let k = block_of_row[*i];
            if k == usize::MAX {
                match v.status(zero_prec) {
                    Status::Zero => continue,
                    Status::Nonzero { .. } => return Ok(None),
                    Status::Ambiguous { prec } => {
                        return Err(HkError::AmbiguousSolve { row: format!("#{i}"), prec: prec.to_string() })
                    }
                }
            }
            rhs.entry(k).or_default().push((*i, v.clone()));
        }
        let mut touched: Vec<(usize, SparseVec<T>)> = rhs.into_iter().collect();
        touched.sort_by_key(|(k, _)| *k);
        let parts = exec.try_map(&touched, |(k, rb)| {
            let bl = &blocks[*k];
            let (n, cols) = self.local(bl);
            let pos: HashMap<usize, usize> = bl.rows.iter().enumerate().map(|(a, &i)| (i, a)).collect();
            let local_b: SparseVec<T> = rb.iter().map(|(i, v)| (pos[i], v.clone())).collect();
            let local_b = normalize(local_b, zero_prec);
            Ok::<_, HkError>(
                block_solve(&self.ctx, n, &cols, &local_b, zero_prec)?
                    .map(|x| x.into_iter().map(|(c, v)| (bl.cols[c], v)).collect::<SparseVec<T>>()),
            )
        })?;
        let mut x = Vec::new();
        for part in parts {
            match part {
                None => return Ok(None),
                Some(p) => x.extend(p),
            }
        }
        Ok(Some(normalize(x, zero_prec)))
    }
}

/// Incremental echelon basis keyed by leading (smallest) row index.
///
/// Used for exact scalars, where the pivot choice cannot cost precision and
/// processing rows in basis order keeps fill-in local on banded blocks.
struct Incremental<T: Scalar> {
    pivots: HashMap<usize, (SparseVec<T>, SparseVec<T>)>,
    track: bool,
    zero_prec: i64,
}

impl<T: Scalar> Incremental<T> {
    fn new(track: bool, zero_prec: i64) -> Self {
        Incremental { pivots: HashMap::new(), track, zero_prec }
    }

    /// Reduces `(v, comb)` against the basis, returning the remainder.
    fn reduce(&self, mut v: SparseVec<T>, mut comb: SparseVec<T>) -> Result<(SparseVec<T>, SparseVec<T>)> {
        while let Some((lead, val)) = v.first().cloned() {
            let Some((w, wc)) = self.pivots.get(&lead) else { break };
            let f = val.div(&w[0].1)?.neg();
            v = axpy(&v, &f, w, self.zero_prec);
            if self.track {
                comb = axpy(&comb, &f, wc, self.zero_prec);
            }
        }
        Ok((v, comb))
    }

    /// Inserts a column; returns its kernel relation when it is dependent.
    fn insert(&mut self, v: SparseVec<T>, comb: SparseVec<T>) -> Result<Option<SparseVec<T>>> {
        let (v, comb) = self.reduce(v, comb)?;
        match v.first() {
            None => Ok(Some(comb)),
            Some((lead, _)) => {
                self.pivots.insert(*lead, (v, comb));
                Ok(None)
            }
        }
    }
}

fn to_dense<T: Scalar>(ctx: &T::Ctx, n: usize, cols: &[SparseVec<T>]) -> PrecMatrix<T> {
    let mut m = PrecMatrix::zeros(ctx, n, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col {
            m.set(*i, j, v.clone());
        }
    }
    m
}

fn block_rank<T: Scalar>(ctx: &T::Ctx, n: usize, cols: &[SparseVec<T>], zero_prec: i64) -> Result<usize> {
    if T::EXACT {
        let mut inc = Incremental::new(false, zero_prec);
        for col in cols {
            inc.insert(col.clone(), Vec::new())?;
        }
        Ok(inc.pivots.len())
    } else {
        to_dense(ctx, n, cols).rank(zero_prec)
    }
}

fn block_kernel<T: Scalar>(
    ctx: &T::Ctx,
    n: usize,
    cols: &[SparseVec<T>],
    zero_prec: i64,
) -> Result<Vec<SparseVec<T>>> {
    if T::EXACT {
        let mut inc = Incremental::new(true, zero_prec);
        let mut out = Vec::new();
        for (j, col) in cols.iter().enumerate() {
            if let Some(rel) = inc.insert(col.clone(), vec![(j, T::one(ctx))])? {
                out.push(normalize(rel, zero_prec));
            }
        }
        Ok(out)
    } else {
        let dense = to_dense(ctx, n, cols).kernel_basis(zero_prec)?;
        Ok(dense.into_iter().map(|v| normalize(v.into_iter().enumerate().collect(), zero_prec)).collect())
    }
}

fn block_solve<T: Scalar>(
    ctx: &T::Ctx,
    n: usize,
    cols: &[SparseVec<T>],
    b: &SparseVec<T>,
    zero_prec: i64,
) -> Result<Option<SparseVec<T>>> {
    if T::EXACT {
        let mut inc = Incremental::new(true, zero_prec);
        for (j, col) in cols.iter().enumerate() {
            inc.insert(col.clone(), vec![(j, T::one(ctx))])?;
        }
        let (rest, comb) = inc.reduce(b.clone(), Vec::new())?;
        if !rest.is_empty() {
            return Ok(None);
        }
        // b + sum f_k v_k = 0 with v_k = A c_k, so x = -comb
        Ok(Some(comb.into_iter().map(|(j, v)| (j, v.neg())).collect()))
    } else {
        let mut dense_b = vec![T::zero(ctx); n];
        for (i, v) in b {
            dense_b[*i] = v.clone();
        }
        match to_dense(ctx, n, cols).solve(&dense_b, zero_prec)? {
            SolveOutcome::Solved(x) => Ok(Some(normalize(x.into_iter().enumerate().collect(), zero_prec))),
            SolveOutcome::Inconsistent { .. } => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn blocks_split_and_solve() {
        // two independent 2x2 blocks and a zero column
        let cols = vec![
            vec![(0, q(1)), (1, q(1))],
            vec![(2, q(2))],
            vec![(0, q(1)), (1, q(-1))],
            vec![],
            vec![(2, q(4)), (3, q(1))],
        ];
        let m = SparseMatrix::from_columns(&(), 4, cols);
        assert_eq!(m.blocks().len(), 3);
        for exec in [Exec::Parallel, Exec::Sequential] {
            assert_eq!(m.rank(exec, 0).unwrap(), 4);
            let k = m.kernel(exec, 0).unwrap();
            assert_eq!(k, vec![vec![(3, q(1))]]);
            let b = vec![(0, q(3)), (1, q(1)), (3, q(5))];
            let x = m.solve(&b, exec, 0).unwrap().unwrap();
            assert_eq!(m.apply(&x, 0), b);
        }
    }

    #[test]
    fn inconsistent_rhs() {
        let m = SparseMatrix::from_columns(&(), 3, vec![vec![(0, q(1)), (1, q(1))]]);
        assert!(m.solve(&vec![(0, q(1))], Exec::Sequential, 0).unwrap().is_none());
        assert!(m.solve(&vec![(2, q(1))], Exec::Sequential, 0).unwrap().is_none());
    }
}
