//! Operands of one level of the sweep.
//!
//! At level `l` the matrix `ED(N,l)` has one column per level-`l` node `b`; its
//! rows are the indices of lower levels and column `b` is supported on the span
//! of `b` without its centre. Blocks are `Option`al so that band-refined
//! supports skip structural zeros, which is what makes the band path cheaper.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{DenseBlock, DyadicMatrix, FlopCounter, TAU_ZERO};
use crate::dyadic_index::{
    ancestor_at, level_of, lower_level_indices, span_of, span_radius,
    BlockSparsityPattern, DerivedKind, DerivedPattern, DyadicKind,
};
use crate::error::{Error, Result};

/// A matrix with `ED(N,l)` block-sparsity.
#[derive(Debug, Clone, PartialEq)]
pub struct ElongatedMatrix {
    height: u32,
    level: u32,
    k: usize,
    columns: Vec<Vec<Option<DenseBlock>>>,
}

impl ElongatedMatrix {
    /// All blocks structurally zero.
    pub fn empty(height: u32, level: u32, k: usize) -> Result<Self> {
        DerivedPattern::new(DerivedKind::Elongated, height, level, k)?;
        let len = (1usize << level) - 2;
        Ok(Self {
            height,
            level,
            k,
            columns: vec![vec![None; len]; 1usize << (height - level)],
        })
    }

    /// Reads an elongated matrix from dense storage in elongated coordinates.
    /// With `support`, blocks outside it stay structural zeros and must vanish.
    pub fn from_dense(
        m: &DMatrix<f64>,
        height: u32,
        level: u32,
        k: usize,
        support: Option<&BlockSparsityPattern>,
    ) -> Result<Self> {
        let mut out = Self::empty(height, level, k)?;
        let full = DerivedPattern::new(DerivedKind::Elongated, height, level, k)?.materialize();
        let (rows, cols) = (full.block_rows(), full.block_cols());
        if m.nrows() != rows * k || m.ncols() != cols * k {
            return Err(Error::DimensionMismatch(format!(
                "elongated matrix must be {}x{}, got {}x{}",
                rows * k,
                cols * k,
                m.nrows(),
                m.ncols()
            )));
        }
        let block_at = |bi: usize, bj: usize| {
            DenseBlock::from_fn(k, |i, j| m[((bi - 1) * k + i, (bj - 1) * k + j)])
        };
        for bi in 1..=rows {
            for bj in 1..=cols {
                let blk = block_at(bi, bj);
                let kept = full.contains(bi, bj) && support.is_none_or(|s| s.contains(bi, bj));
                if kept {
                    let t = (bi - 1) - (bj - 1) * out.column_len();
                    out.columns[bj - 1][t] = Some(blk);
                } else if blk.max_abs() > TAU_ZERO {
                    return Err(Error::PatternViolation {
                        row: bi,
                        col: bj,
                        detail: "nonzero block outside the elongated support".into(),
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let k = self.k;
        let len = self.column_len();
        let mut out = DMatrix::zeros(len * self.columns.len() * k, self.columns.len() * k);
        for (j, col) in self.columns.iter().enumerate() {
            for (t, blk) in col.iter().enumerate() {
                if let Some(blk) = blk {
                    let r0 = (j * len + t) * k;
                    for i in 0..k {
                        for c in 0..k {
                            out[(r0 + i, j * k + c)] = blk.get(i, c);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn columns(&self) -> usize {
        self.columns.len()
    }

    fn column_len(&self) -> usize {
        (1usize << self.level) - 2
    }

    /// Natural block index of the centre of column `j` (1-based).
    pub fn centre(&self, j: usize) -> usize {
        (1usize << (self.level - 1)) * (2 * j - 1)
    }

    fn slot(&self, j: usize, a: usize) -> Option<usize> {
        let b = self.centre(j);
        let span = span_of(b);
        if a == b || !span.contains(&a) {
            return None;
        }
        Some(if a < b { a - span.start() } else { a - span.start() - 1 })
    }

    fn natural(&self, j: usize, t: usize) -> usize {
        let b = self.centre(j);
        let start = b - span_radius(self.level);
        if start + t < b {
            start + t
        } else {
            start + t + 1
        }
    }

    /// Block of column `j` at natural row index `a`.
    pub fn get(&self, j: usize, a: usize) -> Option<&DenseBlock> {
        let t = self.slot(j, a)?;
        self.columns[j - 1][t].as_ref()
    }

    /// Sets the block of column `j` at natural row index `a`.
    pub fn set(&mut self, j: usize, a: usize, blk: Option<DenseBlock>) -> Result<()> {
        let t = self
            .slot(j, a)
            .ok_or_else(|| Error::range("elongated row", format!("{a} outside column {j}")))?;
        self.columns[j - 1][t] = blk;
        Ok(())
    }

    /// Stored blocks of column `j` as `(natural row, block)`, ascending.
    pub fn column_entries(&self, j: usize) -> impl Iterator<Item = (usize, &DenseBlock)> + '_ {
        self.columns[j - 1]
            .iter()
            .enumerate()
            .filter_map(move |(t, b)| b.as_ref().map(|b| (self.natural(j, t), b)))
    }

    /// Structural support in elongated coordinates.
    pub fn support(&self) -> BlockSparsityPattern {
        let len = self.column_len();
        let rows = len * self.columns.len();
        BlockSparsityPattern::new(
            rows,
            self.columns.len(),
            self.k,
            self.columns.iter().enumerate().flat_map(|(j, col)| {
                col.iter()
                    .enumerate()
                    .filter(|(_, b)| b.is_some())
                    .map(move |(t, _)| (j * len + t + 1, j + 1))
            }),
        )
        .expect("elongated slots are in range")
    }

    fn with_columns(&self, columns: Vec<Vec<Option<DenseBlock>>>) -> Self {
        Self {
            height: self.height,
            level: self.level,
            k: self.k,
            columns,
        }
    }
}

/// A block-diagonal matrix with pattern `D(N,l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMatrix {
    k: usize,
    blocks: Vec<DenseBlock>,
}

impl DiagonalMatrix {
    pub fn from_blocks(k: usize, blocks: Vec<DenseBlock>) -> Self {
        assert!(blocks.iter().all(|b| b.k() == k), "block size mismatch");
        Self { k, blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Diagonal block `j` (1-based).
    pub fn block(&self, j: usize) -> &DenseBlock {
        &self.blocks[j - 1]
    }

    pub fn blocks(&self) -> &[DenseBlock] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<DenseBlock> {
        self.blocks
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let k = self.k;
        let d = k * self.blocks.len();
        DMatrix::from_fn(d, d, |r, c| {
            if r / k == c / k {
                self.blocks[r / k].get(r % k, c % k)
            } else {
                0.0
            }
        })
    }
}

/// A vertically or horizontally dyadic matrix read only on levels below the
/// current sweep level, i.e. an `IV(N,l)` or `IH(N,l)` operand.
#[derive(Debug, Clone, Copy)]
pub enum IncompleteOperand<'a> {
    Vertical(&'a DyadicMatrix),
    Horizontal(&'a DyadicMatrix),
    /// `Pᵀ` for vertically dyadic `P`, an `IH` operand without materializing the transpose.
    TransposedVertical(&'a DyadicMatrix),
}

impl IncompleteOperand<'_> {
    fn matrix(&self) -> &DyadicMatrix {
        match self {
            IncompleteOperand::Vertical(m)
            | IncompleteOperand::Horizontal(m)
            | IncompleteOperand::TransposedVertical(m) => m,
        }
    }

    fn validate(&self) -> Result<()> {
        let (want, got) = match self {
            IncompleteOperand::Horizontal(m) => (DyadicKind::Horizontal, m.kind()),
            IncompleteOperand::Vertical(m) | IncompleteOperand::TransposedVertical(m) => {
                (DyadicKind::Vertical, m.kind())
            }
        };
        if want != got {
            return Err(Error::InvalidParameter(format!(
                "incomplete operand expects a {want:?} matrix, got {got:?}"
            )));
        }
        Ok(())
    }

    /// Dense restriction to indices of level below `level`, in natural order.
    pub fn to_dense_restricted(&self, level: u32) -> DMatrix<f64> {
        let m = self.matrix();
        let k = m.breadth();
        let idx = lower_level_indices(m.height(), level);
        let dense = match self {
            IncompleteOperand::TransposedVertical(m) => m.to_dense().transpose(),
            _ => m.to_dense(),
        };
        DMatrix::from_fn(idx.len() * k, idx.len() * k, |r, c| {
            dense[((idx[r / k] - 1) * k + r % k, (idx[c / k] - 1) * k + c % k)]
        })
    }
}

/// `X E` for `X` in `IV(N,l)` or `IH(N,l)` and `E` in `ED(N,l)`; the result is in `ED(N,l)`.
///
/// Only stored blocks of `E` are touched, so a band-refined `E` costs `O(dk^2)`
/// per level instead of `O(ldk^2)`.
pub fn multiply_patterned(
    x: IncompleteOperand<'_>,
    e: &ElongatedMatrix,
    flops: &mut FlopCounter,
) -> Result<ElongatedMatrix> {
    x.validate()?;
    let m = x.matrix();
    if m.height() != e.height() || m.breadth() != e.k() {
        return Err(Error::DimensionMismatch(format!(
            "operand is (N={}, k={}), elongated matrix is (N={}, k={})",
            m.height(),
            m.breadth(),
            e.height(),
            e.k()
        )));
    }
    let l = e.level();
    let k = e.k();
    let results: Vec<(Vec<Option<DenseBlock>>, u64)> = (1..=e.columns())
        .into_par_iter()
        .map(|j| {
            let mut col: Vec<Option<DenseBlock>> = vec![None; e.column_len()];
            let mut count = 0u64;
            for (c, ec) in e.column_entries(j) {
                let mut push = |a: usize, f: &dyn Fn(&mut DenseBlock)| {
                    let t = e.slot(j, a).expect("target stays in the column span");
                    f(col[t].get_or_insert_with(|| DenseBlock::zeros(k)));
                    count += 1;
                };
                match x {
                    IncompleteOperand::Vertical(v) => {
                        for a in span_of(c) {
                            let vac = v.block(a, c).expect("vertical pattern");
                            push(a, &|acc| acc.mul_acc(vac, ec));
                        }
                    }
                    IncompleteOperand::Horizontal(h) => {
                        for lev in level_of(c)..l {
                            let a = ancestor_at(c, lev);
                            let hac = h.block(a, c).expect("horizontal pattern");
                            push(a, &|acc| acc.mul_acc(hac, ec));
                        }
                    }
                    IncompleteOperand::TransposedVertical(p) => {
                        for lev in level_of(c)..l {
                            let a = ancestor_at(c, lev);
                            let pca = p.block(c, a).expect("vertical pattern");
                            push(a, &|acc| acc.mul_acc_tn(pca, ec));
                        }
                    }
                }
            }
            (col, count)
        })
        .collect();
    flops.block_multiplies += results.iter().map(|r| r.1).sum::<u64>();
    Ok(e.with_columns(results.into_iter().map(|r| r.0).collect()))
}

/// `H E` for `E` supported on the band refinement; the result lies on the
/// refined projected support.
pub fn multiply_patterned_band(
    h: IncompleteOperand<'_>,
    e: &ElongatedMatrix,
    flops: &mut FlopCounter,
) -> Result<ElongatedMatrix> {
    if matches!(h, IncompleteOperand::Vertical(_)) {
        return Err(Error::InvalidParameter(
            "band product expects a horizontal operand".into(),
        ));
    }
    let (refined, prime) =
        crate::dyadic_index::refined_ed_support(e.height(), e.level(), e.k())?;
    if !e.support().is_subset_of(&refined) {
        return Err(Error::InvalidParameter(
            "elongated operand is not on the band-refined support".into(),
        ));
    }
    let out = multiply_patterned(h, e, flops)?;
    if !out.support().is_subset_of(&prime) {
        return Err(Error::Consistency(
            "band product left the refined projected support".into(),
        ));
    }
    Ok(out)
}

/// `Eᵀ E` for `E` in `ED(N,l)`; block-diagonal with `2^(N-l)` blocks.
pub fn gram_ed(e: &ElongatedMatrix, flops: &mut FlopCounter) -> DiagonalMatrix {
    let k = e.k();
    let results: Vec<(DenseBlock, u64)> = (1..=e.columns())
        .into_par_iter()
        .map(|j| {
            let mut acc = DenseBlock::zeros(k);
            let mut count = 0;
            for (_, b) in e.column_entries(j) {
                acc.mul_acc_tn(b, b);
                count += 1;
            }
            (acc, count)
        })
        .collect();
    flops.block_multiplies += results.iter().map(|r| r.1).sum::<u64>();
    DiagonalMatrix::from_blocks(k, results.into_iter().map(|r| r.0).collect())
}

/// `E D` for `E` in `ED(N,l)` and `D` in `D(N,l)`.
pub fn ed_times_diag(
    e: &ElongatedMatrix,
    d: &DiagonalMatrix,
    flops: &mut FlopCounter,
) -> Result<ElongatedMatrix> {
    if d.len() != e.columns() || d.k != e.k() {
        return Err(Error::DimensionMismatch(format!(
            "{} diagonal blocks for {} elongated columns",
            d.len(),
            e.columns()
        )));
    }
    let results: Vec<(Vec<Option<DenseBlock>>, u64)> = (1..=e.columns())
        .into_par_iter()
        .map(|j| {
            let dj = d.block(j);
            let mut count = 0;
            let col = e.columns[j - 1]
                .iter()
                .map(|b| {
                    b.as_ref().map(|b| {
                        count += 1;
                        b.mul(dj)
                    })
                })
                .collect();
            (col, count)
        })
        .collect();
    flops.block_multiplies += results.iter().map(|r| r.1).sum::<u64>();
    Ok(e.with_columns(results.into_iter().map(|r| r.0).collect()))
}
