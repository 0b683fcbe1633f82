//! Block-sparse storage of dyadic matrices and the pattern-aware products.
//!
//! Blocks are kept in level-major, position-minor order. For each pyramid node
//! `b` the matrix stores a column segment (blocks `(a, b)` for `a` in the span of
//! `b`) when the pattern is vertical or symmetric, and a row segment (blocks
//! `(b, c)` for `c` in the span of `b`) when it is horizontal or symmetric. The
//! symmetric row segment skips the diagonal block, which lives in the column
//! segment.
//!
//! Every product records its work in a [`FlopCounter`].

mod block;
mod elongated;

pub use block::DenseBlock;
pub use elongated::{
    ed_times_diag, gram_ed, multiply_patterned, multiply_patterned_band, DiagonalMatrix,
    ElongatedMatrix, IncompleteOperand,
};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dyadic_index::{
    ancestor_at, level_of, level_positions, node_count, span_of, span_radius,
    BlockSparsityPattern, DyadicKind, DyadicPattern,
};
use crate::error::{Error, Result};

/// Absolute tolerance for "zero" entries outside a pattern.
pub const TAU_ZERO: f64 = 1e-14;
/// Tolerance for comparisons against a dense oracle.
pub const TAU_NUM: f64 = 1e-12;

/// Work counter for block products.
///
/// One block multiply is `k^3` multiply-adds, one block add is `k^2` flops, and
/// every scalar division, square root or stray multiply-add counts once.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlopCounter {
    pub block_multiplies: u64,
    pub block_adds: u64,
    pub scalar_ops: u64,
}

impl FlopCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn merge(&mut self, other: &FlopCounter) {
        self.block_multiplies += other.block_multiplies;
        self.block_adds += other.block_adds;
        self.scalar_ops += other.scalar_ops;
    }

    /// Total scalar flops for block size `k`.
    pub fn scalar_flops(&self, k: usize) -> u64 {
        let k = k as u64;
        self.block_multiplies * k * k * k + self.block_adds * k * k + self.scalar_ops
    }
}

impl std::ops::Add for FlopCounter {
    type Output = FlopCounter;

    fn add(mut self, rhs: FlopCounter) -> FlopCounter {
        self.merge(&rhs);
        self
    }
}

impl std::iter::Sum for FlopCounter {
    fn sum<I: Iterator<Item = FlopCounter>>(iter: I) -> Self {
        iter.fold(FlopCounter::default(), |a, b| a + b)
    }
}

const NONE: usize = usize::MAX;

/// A matrix with `HD`, `VD` or `SD` block-sparsity.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicMatrix {
    pattern: DyadicPattern,
    blocks: Vec<DenseBlock>,
    col_start: Vec<usize>,
    row_start: Vec<usize>,
}

impl DyadicMatrix {
    /// All stored blocks zero.
    pub fn zeros(pattern: DyadicPattern) -> Self {
        let n = pattern.height();
        let k = pattern.breadth();
        let nb = node_count(n);
        let mut col_start = vec![NONE; nb + 1];
        let mut row_start = vec![NONE; nb + 1];
        let mut len = 0;
        for l in 1..=n {
            let seg = (1usize << l) - 1;
            for b in level_positions(n, l).expect("valid level") {
                match pattern.kind() {
                    DyadicKind::Vertical => {
                        col_start[b] = len;
                        len += seg;
                    }
                    DyadicKind::Horizontal => {
                        row_start[b] = len;
                        len += seg;
                    }
                    DyadicKind::Symmetric => {
                        col_start[b] = len;
                        len += seg;
                        row_start[b] = len;
                        len += seg - 1;
                    }
                }
            }
        }
        Self {
            pattern,
            blocks: vec![DenseBlock::zeros(k); len],
            col_start,
            row_start,
        }
    }

    /// Identity blocks on the diagonal, zero elsewhere.
    pub fn identity(pattern: DyadicPattern) -> Self {
        let k = pattern.breadth();
        let mut m = Self::zeros(pattern);
        for b in 1..=m.blocks_per_side() {
            *m.block_mut(b, b).expect("diagonal is in every pattern") = DenseBlock::identity(k);
        }
        m
    }

    /// Builds a matrix by evaluating `f` on every block of the pattern.
    pub fn from_block_fn(
        pattern: DyadicPattern,
        mut f: impl FnMut(usize, usize) -> DenseBlock,
    ) -> Self {
        let mut m = Self::zeros(pattern);
        let coords: Vec<(usize, usize)> = m.stored_coords().collect();
        for (idx, (i, j)) in coords.into_iter().enumerate() {
            let b = f(i, j);
            assert_eq!(b.k(), pattern.breadth(), "block size mismatch");
            m.blocks[idx] = b;
        }
        m
    }

    /// Extracts the pattern blocks of `m`. Entries outside the pattern must not
    /// exceed [`TAU_ZERO`] in absolute value.
    pub fn from_dense(m: &DMatrix<f64>, pattern: DyadicPattern) -> Result<Self> {
        let d = pattern.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "expected {d}x{d} for N={}, k={}, got {}x{}",
                pattern.height(),
                pattern.breadth(),
                m.nrows(),
                m.ncols()
            )));
        }
        let k = pattern.breadth();
        let nb = pattern.blocks();
        for bi in 1..=nb {
            for bj in 1..=nb {
                if pattern.contains(bi, bj) {
                    continue;
                }
                for i in 0..k {
                    for j in 0..k {
                        let v = m[((bi - 1) * k + i, (bj - 1) * k + j)];
                        if v.abs() > TAU_ZERO {
                            return Err(Error::PatternViolation {
                                row: bi,
                                col: bj,
                                detail: format!("entry ({}, {}) = {v:e}", i + 1, j + 1),
                            });
                        }
                    }
                }
            }
        }
        Ok(Self::from_block_fn(pattern, |bi, bj| {
            DenseBlock::from_fn(k, |i, j| m[((bi - 1) * k + i, (bj - 1) * k + j)])
        }))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let k = self.breadth();
        let mut out = DMatrix::zeros(d, d);
        for ((bi, bj), b) in self.stored_blocks() {
            for i in 0..k {
                for j in 0..k {
                    out[((bi - 1) * k + i, (bj - 1) * k + j)] = b.get(i, j);
                }
            }
        }
        out
    }

    pub fn pattern(&self) -> DyadicPattern {
        self.pattern
    }

    pub fn kind(&self) -> DyadicKind {
        self.pattern.kind()
    }

    pub fn height(&self) -> u32 {
        self.pattern.height()
    }

    pub fn breadth(&self) -> usize {
        self.pattern.breadth()
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    /// Number of block rows, `2^N - 1`.
    pub fn blocks_per_side(&self) -> usize {
        self.pattern.blocks()
    }

    pub fn stored_count(&self) -> usize {
        self.blocks.len()
    }

    fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        let nb = self.blocks_per_side();
        if i == 0 || j == 0 || i > nb || j > nb {
            return None;
        }
        let kind = self.kind();
        if kind != DyadicKind::Horizontal {
            let span = span_of(j);
            if span.contains(&i) {
                return Some(self.col_start[j] + (i - span.start()));
            }
        }
        if kind != DyadicKind::Vertical {
            let span = span_of(i);
            if span.contains(&j) {
                let mut t = j - span.start();
                if kind == DyadicKind::Symmetric && j > i {
                    t -= 1;
                }
                return Some(self.row_start[i] + t);
            }
        }
        None
    }

    /// Block `(i, j)` (1-based), or `None` when it lies outside the pattern.
    pub fn block(&self, i: usize, j: usize) -> Option<&DenseBlock> {
        self.index_of(i, j).map(|idx| &self.blocks[idx])
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> Option<&mut DenseBlock> {
        self.index_of(i, j).map(move |idx| &mut self.blocks[idx])
    }

    /// Column segment of node `b`: blocks `(a, b)` for `a` in the span of `b`.
    pub fn column(&self, b: usize) -> Option<&[DenseBlock]> {
        let start = *self.col_start.get(b)?;
        (start != NONE).then(|| &self.blocks[start..start + 2 * span_radius(level_of(b)) + 1])
    }

    pub fn column_mut(&mut self, b: usize) -> Option<&mut [DenseBlock]> {
        let start = *self.col_start.get(b)?;
        let len = 2 * span_radius(level_of(b)) + 1;
        (start != NONE).then(move || &mut self.blocks[start..start + len])
    }

    /// Coordinates of stored blocks in storage order.
    pub fn stored_coords(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.height();
        let kind = self.kind();
        (1..=n)
            .flat_map(move |l| level_positions(n, l).expect("valid level"))
            .flat_map(move |b| {
                let col = (kind != DyadicKind::Horizontal)
                    .then(|| span_of(b).map(move |a| (a, b)))
                    .into_iter()
                    .flatten();
                let row = (kind != DyadicKind::Vertical)
                    .then(|| {
                        span_of(b)
                            .filter(move |&c| kind == DyadicKind::Horizontal || c != b)
                            .map(move |c| (b, c))
                    })
                    .into_iter()
                    .flatten();
                col.chain(row)
            })
    }

    pub fn stored_blocks(&self) -> impl Iterator<Item = ((usize, usize), &DenseBlock)> + '_ {
        self.stored_coords().zip(self.blocks.iter())
    }

    /// Blocks with at least one entry above `tol` in absolute value.
    pub fn support(&self, tol: f64) -> BlockSparsityPattern {
        let nb = self.blocks_per_side();
        BlockSparsityPattern::new(
            nb,
            nb,
            self.breadth(),
            self.stored_blocks()
                .filter(|(_, b)| b.max_abs() > tol)
                .map(|(c, _)| c),
        )
        .expect("stored blocks are in range")
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().fold(0.0, |m, b| m.max(b.max_abs()))
    }

    /// Transpose: vertical becomes horizontal and vice versa.
    pub fn transpose(&self) -> DyadicMatrix {
        let kind = match self.kind() {
            DyadicKind::Vertical => DyadicKind::Horizontal,
            DyadicKind::Horizontal => DyadicKind::Vertical,
            DyadicKind::Symmetric => DyadicKind::Symmetric,
        };
        DyadicMatrix::from_block_fn(self.pattern.with_kind(kind), |i, j| {
            self.block(j, i).expect("transposed pattern").transpose()
        })
    }

    /// Whether every block more than one step off the diagonal is exactly zero.
    pub fn is_block_tridiagonal(&self) -> bool {
        self.stored_blocks()
            .all(|((i, j), b)| i.abs_diff(j) <= 1 || b.is_zero())
    }

    /// Sorted column indices of the blocks in block row `i` admitted by the pattern.
    pub(crate) fn row_pattern(&self, i: usize) -> Vec<usize> {
        let n = self.height();
        let mut cols = Vec::new();
        if self.kind() != DyadicKind::Horizontal {
            cols.extend((level_of(i)..=n).map(|m| ancestor_at(i, m)));
        }
        if self.kind() != DyadicKind::Vertical {
            cols.extend(span_of(i));
        }
        cols.sort_unstable();
        cols.dedup();
        cols
    }
}

/// A `d x k` matrix stored as a column of `k x k` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct TallBlockMatrix {
    k: usize,
    blocks: Vec<DenseBlock>,
}

impl TallBlockMatrix {
    pub fn zeros(block_rows: usize, k: usize) -> Self {
        Self {
            k,
            blocks: vec![DenseBlock::zeros(k); block_rows],
        }
    }

    pub fn from_blocks(k: usize, blocks: Vec<DenseBlock>) -> Self {
        assert!(blocks.iter().all(|b| b.k() == k), "block size mismatch");
        Self { k, blocks }
    }

    pub fn from_dense(m: &DMatrix<f64>, k: usize) -> Result<Self> {
        if k == 0 || m.ncols() != k || !m.nrows().is_multiple_of(k) {
            return Err(Error::DimensionMismatch(format!(
                "tall matrix must be (multiple of {k}) x {k}, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let blocks = (0..m.nrows() / k)
            .map(|q| DenseBlock::from_fn(k, |i, j| m[(q * k + i, j)]))
            .collect();
        Ok(Self { k, blocks })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let k = self.k;
        DMatrix::from_fn(self.blocks.len() * k, k, |r, c| self.blocks[r / k].get(r % k, c))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn block_rows(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.k * self.blocks.len()
    }

    /// Block row `i` (1-based).
    pub fn block(&self, i: usize) -> &DenseBlock {
        &self.blocks[i - 1]
    }

    pub fn blocks(&self) -> &[DenseBlock] {
        &self.blocks
    }
}

fn multiply_tall(m: &DyadicMatrix, a: &TallBlockMatrix, flops: &mut FlopCounter) -> Result<TallBlockMatrix> {
    if a.k() != m.breadth() || a.block_rows() != m.blocks_per_side() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            m.dim(),
            m.dim(),
            a.dim(),
            a.k()
        )));
    }
    let k = m.breadth();
    let rows: Vec<(DenseBlock, u64)> = (1..=m.blocks_per_side())
        .into_par_iter()
        .map(|i| {
            let mut acc = DenseBlock::zeros(k);
            let cols = m.row_pattern(i);
            for &j in &cols {
                acc.mul_acc(m.block(i, j).expect("row pattern"), a.block(j));
            }
            (acc, cols.len() as u64)
        })
        .collect();
    flops.block_multiplies += rows.iter().map(|r| r.1).sum::<u64>();
    Ok(TallBlockMatrix::from_blocks(
        k,
        rows.into_iter().map(|r| r.0).collect(),
    ))
}

fn expect_kind(m: &DyadicMatrix, kind: DyadicKind, op: &str) -> Result<()> {
    if m.kind() != kind {
        return Err(Error::InvalidParameter(format!(
            "{op} expects a {kind:?} dyadic matrix, got {:?}",
            m.kind()
        )));
    }
    Ok(())
}

/// `S A` for symmetrically dyadic `S`. Costs exactly `(2N-3) 2^N + 3` block multiplies.
pub fn multiply_sd_tall(
    s: &DyadicMatrix,
    a: &TallBlockMatrix,
    flops: &mut FlopCounter,
) -> Result<TallBlockMatrix> {
    expect_kind(s, DyadicKind::Symmetric, "multiply_sd_tall")?;
    multiply_tall(s, a, flops)
}

/// `V A` for vertically dyadic `V`. Costs exactly `N 2^N - 2^N + 1` block multiplies.
pub fn multiply_vd_tall(
    v: &DyadicMatrix,
    a: &TallBlockMatrix,
    flops: &mut FlopCounter,
) -> Result<TallBlockMatrix> {
    expect_kind(v, DyadicKind::Vertical, "multiply_vd_tall")?;
    multiply_tall(v, a, flops)
}

/// `H A` for horizontally dyadic `H`.
pub fn multiply_hd_tall(
    h: &DyadicMatrix,
    a: &TallBlockMatrix,
    flops: &mut FlopCounter,
) -> Result<TallBlockMatrix> {
    expect_kind(h, DyadicKind::Horizontal, "multiply_hd_tall")?;
    multiply_tall(h, a, flops)
}

/// Dense `P Qᵀ` for vertically dyadic `P`, `Q` of the same shape.
///
/// Costs exactly `2^N (2^(N+1) - 2N - 1) - 1` block multiplies.
pub fn multiply_vd_vdt(
    p: &DyadicMatrix,
    q: &DyadicMatrix,
    flops: &mut FlopCounter,
) -> Result<DMatrix<f64>> {
    expect_kind(p, DyadicKind::Vertical, "multiply_vd_vdt")?;
    expect_kind(q, DyadicKind::Vertical, "multiply_vd_vdt")?;
    if p.pattern() != q.pattern() {
        return Err(Error::DimensionMismatch(
            "P and Q must share height and breadth".into(),
        ));
    }
    let n = p.height();
    let k = p.breadth();
    let nb = p.blocks_per_side();
    let rows: Vec<(Vec<Option<DenseBlock>>, u64)> = (1..=nb)
        .into_par_iter()
        .map(|a| {
            let mut row: Vec<Option<DenseBlock>> = vec![None; nb + 1];
            let mut count = 0u64;
            for m in level_of(a)..=n {
                let c = ancestor_at(a, m);
                let pac = p.block(a, c).expect("vertical pattern");
                for a2 in span_of(c) {
                    row[a2]
                        .get_or_insert_with(|| DenseBlock::zeros(k))
                        .mul_acc_nt(pac, q.block(a2, c).expect("vertical pattern"));
                    count += 1;
                }
            }
            (row, count)
        })
        .collect();
    let mut out = DMatrix::zeros(nb * k, nb * k);
    for (a, (row, count)) in rows.into_iter().enumerate() {
        flops.block_multiplies += count;
        for (a2, blk) in row.into_iter().enumerate() {
            if let Some(blk) = blk {
                for i in 0..k {
                    for j in 0..k {
                        out[(a * k + i, (a2 - 1) * k + j)] = blk.get(i, j);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Dense product of two dyadic matrices of equal shape. Used where no
/// structured product exists, for example `V H`.
pub fn multiply_dense(a: &DyadicMatrix, b: &DyadicMatrix) -> Result<DMatrix<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.to_dense() * b.to_dense())
}

/// Removes the level-1 block rows and columns, leaving a pyramid of height `N - 1`.
pub fn subsample(m: &DyadicMatrix) -> Result<DyadicMatrix> {
    let n = m.height();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "cannot subsample a pyramid of height 1".into(),
        ));
    }
    let pattern = DyadicPattern::new(n - 1, m.breadth(), m.kind())?;
    Ok(DyadicMatrix::from_block_fn(pattern, |i, j| {
        m.block(2 * i, 2 * j)
            .expect("even indices keep the dyadic pattern")
            .clone()
    }))
}

/// Embeds an irregular `d' x d'` matrix into `SD(N, k)`.
///
/// `placement[q]` is the 1-based scalar position of source row `q`; it must be
/// strictly increasing. Unplaced positions receive identity rows and columns.
pub fn embed_irregular(
    m: &DMatrix<f64>,
    placement: &[usize],
    height: u32,
    breadth: usize,
) -> Result<DyadicMatrix> {
    let pattern = DyadicPattern::symmetric(height, breadth)?;
    let d = pattern.dim();
    if m.nrows() != m.ncols() || m.nrows() != placement.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but placement has {} entries",
            m.nrows(),
            m.ncols(),
            placement.len()
        )));
    }
    for (q, &p) in placement.iter().enumerate() {
        if p == 0 || p > d {
            return Err(Error::range("placement", format!("{p} not in 1..={d}")));
        }
        if q > 0 && placement[q - 1] >= p {
            return Err(Error::InvalidParameter(
                "placement must be strictly increasing".into(),
            ));
        }
    }
    let mut full = DMatrix::identity(d, d);
    for (q, &p) in placement.iter().enumerate() {
        full[(p - 1, p - 1)] = 0.0;
        for (q2, &p2) in placement.iter().enumerate() {
            full[(p - 1, p2 - 1)] = m[(q, q2)];
        }
    }
    DyadicMatrix::from_dense(&full, pattern)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(pattern: DyadicPattern, rng: &mut ChaCha8Rng) -> DyadicMatrix {
        let k = pattern.breadth();
        DyadicMatrix::from_block_fn(pattern, |_, _| {
            DenseBlock::from_fn(k, |_, _| rng.random_range(-1.0..1.0))
        })
    }

    fn random_tall(rows: usize, k: usize, rng: &mut ChaCha8Rng) -> TallBlockMatrix {
        TallBlockMatrix::from_dense(&DMatrix::from_fn(rows, k, |_, _| rng.random_range(-1.0..1.0)), k)
            .unwrap()
    }

    fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn identity_round_trip() {
        let p = DyadicPattern::symmetric(2, 1).unwrap();
        let m = DyadicMatrix::from_dense(&DMatrix::identity(3, 3), p).unwrap();
        assert_eq!(m.stored_count(), 7);
        assert_eq!(m.to_dense(), DMatrix::identity(3, 3));
        assert_eq!(m, DyadicMatrix::identity(p));
    }

    #[test]
    fn from_dense_rejects_forbidden_entry() {
        let p = DyadicPattern::symmetric(3, 1).unwrap();
        let mut dense = DMatrix::identity(7, 7);
        dense[(0, 2)] = 0.5; // blocks (1,3): siblings at level 1
        match DyadicMatrix::from_dense(&dense, p) {
            Err(Error::PatternViolation { row, col, .. }) => assert_eq!((row, col), (1, 3)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(DyadicMatrix::from_dense(&DMatrix::identity(6, 6), p).is_err());
    }

    #[test]
    fn stored_count_matches_pattern() {
        for n in 1..=6 {
            for kind in [DyadicKind::Horizontal, DyadicKind::Vertical, DyadicKind::Symmetric] {
                let p = DyadicPattern::new(n, 2, kind).unwrap();
                let m = DyadicMatrix::zeros(p);
                assert_eq!(m.stored_count(), p.block_count());
                let coords: Vec<_> = m.stored_coords().collect();
                let pat = BlockSparsityPattern::new(p.blocks(), p.blocks(), 2, coords.clone()).unwrap();
                assert_eq!(pat, p.materialize());
                for (idx, (i, j)) in coords.into_iter().enumerate() {
                    assert_eq!(m.index_of(i, j), Some(idx));
                }
            }
        }
    }

    #[test]
    fn dense_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in [DyadicKind::Horizontal, DyadicKind::Vertical, DyadicKind::Symmetric] {
            let p = DyadicPattern::new(4, 2, kind).unwrap();
            let m = random_matrix(p, &mut rng);
            assert_eq!(DyadicMatrix::from_dense(&m.to_dense(), p).unwrap(), m);
            assert_eq!(m.transpose().to_dense(), m.to_dense().transpose());
        }
    }

    #[test]
    fn tall_products_match_dense_and_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_matrix(DyadicPattern::symmetric(4, 2).unwrap(), &mut rng);
        let a = random_tall(30, 2, &mut rng);
        let mut f = FlopCounter::new();
        let out = multiply_sd_tall(&s, &a, &mut f).unwrap();
        assert!(max_diff(&out.to_dense(), &(s.to_dense() * a.to_dense())) <= TAU_NUM);
        assert_eq!(f.block_multiplies, 83);

        let v = random_matrix(DyadicPattern::vertical(3, 3).unwrap(), &mut rng);
        let a = random_tall(21, 3, &mut rng);
        let mut f = FlopCounter::new();
        let out = multiply_vd_tall(&v, &a, &mut f).unwrap();
        assert!(max_diff(&out.to_dense(), &(v.to_dense() * a.to_dense())) <= TAU_NUM);
        assert_eq!(f.block_multiplies, 17);

        let h = v.transpose();
        let mut f = FlopCounter::new();
        let out = multiply_hd_tall(&h, &a, &mut f).unwrap();
        assert!(max_diff(&out.to_dense(), &(h.to_dense() * a.to_dense())) <= TAU_NUM);
        assert_eq!(f.block_multiplies, 17);

        assert!(multiply_sd_tall(&v, &a, &mut f).is_err());
        assert!(multiply_vd_tall(&v, &random_tall(12, 3, &mut rng), &mut f).is_err());
    }

    #[test]
    fn vd_vdt_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, expected) in [(1u32, 1u64), (2, 11)] {
            let p = random_matrix(DyadicPattern::vertical(n, 2).unwrap(), &mut rng);
            let q = random_matrix(DyadicPattern::vertical(n, 2).unwrap(), &mut rng);
            let mut f = FlopCounter::new();
            let out = multiply_vd_vdt(&p, &q, &mut f).unwrap();
            assert_eq!(f.block_multiplies, expected);
            assert!(max_diff(&out, &(p.to_dense() * q.to_dense().transpose())) <= TAU_NUM);
        }
        let id = DyadicMatrix::identity(DyadicPattern::vertical(3, 2).unwrap());
        let out = multiply_vd_vdt(&id, &id, &mut FlopCounter::new()).unwrap();
        assert_eq!(out, DMatrix::identity(14, 14));
    }

    #[test]
    fn subsample_keeps_even_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_matrix(DyadicPattern::symmetric(4, 1).unwrap(), &mut rng);
        let sub = subsample(&s).unwrap();
        let dense = s.to_dense();
        let expected = DMatrix::from_fn(7, 7, |i, j| dense[(2 * i + 1, 2 * j + 1)]);
        assert_eq!(sub.to_dense(), expected);
        let twice = subsample(&sub).unwrap();
        let direct = DMatrix::from_fn(3, 3, |i, j| dense[(4 * i + 3, 4 * j + 3)]);
        assert_eq!(twice.to_dense(), direct);
        let tiny = subsample(&random_matrix(DyadicPattern::symmetric(2, 2).unwrap(), &mut rng));
        assert_eq!(tiny.unwrap().stored_count(), 1);
        assert!(subsample(&twice).is_ok());
        assert!(subsample(&subsample(&twice).unwrap()).is_err());
    }

    #[test]
    fn embed_empty_is_identity() {
        let m = embed_irregular(&DMatrix::zeros(0, 0), &[], 3, 2).unwrap();
        assert_eq!(m.to_dense(), DMatrix::identity(14, 14));
    }

    #[test]
    fn embed_rejects_bad_placement() {
        let m = DMatrix::identity(2, 2);
        assert!(embed_irregular(&m, &[2, 1], 2, 1).is_err());
        assert!(embed_irregular(&m, &[1, 9], 2, 1).is_err());
        let mut full = DMatrix::identity(2, 2);
        full[(0, 1)] = 1.0;
        full[(1, 0)] = 1.0;
        // Positions 1 and 3 are level-1 siblings: their coupling is not dyadic.
        assert!(matches!(
            embed_irregular(&full, &[1, 3], 2, 1),
            Err(Error::PatternViolation { .. })
        ));
    }
}
