//! Combinatorics of the dyadic pyramid.
//!
//! A pyramid of height `N` indexes `2^N - 1` block rows. Level `l` (1-based)
//! holds the positions `2^(l-1) * (2r - 1)` for `r = 1..=2^(N-l)`, so level 1 is
//! every odd index and level `N` is the single central index `2^(N-1)`. Each
//! position `b` at level `l` governs the span `b - (2^(l-1) - 1) ..= b + (2^(l-1) - 1)`,
//! which is the union of its own position and the spans of its two children.
//!
//! All indices exposed here are 1-based block indices in natural order.
//! The sequential order used by the factorization lists level 1 first, then
//! level 2, and so on.
//!
//! Patterns (`HD`, `VD`, `SD` and the derived shapes consumed by the level
//! sweep) materialize into [`BlockSparsityPattern`], a sorted coordinate list
//! with a hash view for membership tests.

use std::collections::HashSet;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};

/// Largest supported pyramid height.
pub const MAX_HEIGHT: u32 = 30;

/// A node of the pyramid: position `r` within level `l`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PyramidCoord {
    pub r: usize,
    pub l: u32,
}

impl PyramidCoord {
    /// Natural (1-based) block index `2^(l-1) * (2r - 1)`.
    pub fn position(&self) -> usize {
        (1usize << (self.l - 1)) * (2 * self.r - 1)
    }
}

pub(crate) fn check_height(height: u32) -> Result<()> {
    if height == 0 || height > MAX_HEIGHT {
        return Err(Error::range(
            "pyramid height",
            format!("N = {height}, expected 1..={MAX_HEIGHT}"),
        ));
    }
    Ok(())
}

fn check_level(height: u32, level: u32) -> Result<()> {
    check_height(height)?;
    if level == 0 || level > height {
        return Err(Error::range(
            "level",
            format!("l = {level}, expected 1..={height}"),
        ));
    }
    Ok(())
}

/// Number of block indices in a pyramid of height `N`, i.e. `2^N - 1`.
pub fn node_count(height: u32) -> usize {
    (1usize << height) - 1
}

/// Number of positions on level `l`, i.e. `2^(N-l)`.
pub fn level_width(height: u32, level: u32) -> usize {
    1usize << (height - level)
}

/// Level of a natural block index (1-based level).
pub fn level_of(b: usize) -> u32 {
    debug_assert!(b > 0);
    b.trailing_zeros() + 1
}

/// Pyramid coordinate of a natural block index.
pub fn coord_of(height: u32, b: usize) -> Result<PyramidCoord> {
    check_height(height)?;
    if b == 0 || b > node_count(height) {
        return Err(Error::range(
            "block index",
            format!("{b} not in 1..={}", node_count(height)),
        ));
    }
    let l = level_of(b);
    Ok(PyramidCoord {
        r: (b >> (l - 1)).div_ceil(2),
        l,
    })
}

/// Level positions `I_l`, sorted ascending.
pub fn level_positions(height: u32, level: u32) -> Result<Vec<usize>> {
    check_level(height, level)?;
    let step = 1usize << level;
    let first = 1usize << (level - 1);
    Ok((0..level_width(height, level))
        .map(|q| first + q * step)
        .collect())
}

/// Half-length of the span of a node at `level`.
pub(crate) fn span_radius(level: u32) -> usize {
    (1usize << (level - 1)) - 1
}

/// Span of a natural block index.
pub(crate) fn span_of(b: usize) -> RangeInclusive<usize> {
    let radius = span_radius(level_of(b));
    (b - radius)..=(b + radius)
}

/// Span `I'_{r,l}`: the `2^l - 1` consecutive indices centred at the node.
pub fn span(height: u32, r: usize, level: u32) -> Result<RangeInclusive<usize>> {
    check_level(height, level)?;
    if r == 0 || r > level_width(height, level) {
        return Err(Error::range(
            "level position",
            format!("r = {r}, expected 1..={}", level_width(height, level)),
        ));
    }
    Ok(span_of(PyramidCoord { r, l: level }.position()))
}

/// The node at `level` whose span contains `b`. Requires `level >= level_of(b)`.
pub(crate) fn ancestor_at(b: usize, level: u32) -> usize {
    debug_assert!(level >= level_of(b));
    ((b >> level) << level) | (1usize << (level - 1))
}

/// Sequential index `i = 2^N (1 - 2^(1-l)) + r` of a pyramid node.
pub fn dyadic_to_sequential(height: u32, coord: PyramidCoord) -> Result<usize> {
    check_level(height, coord.l)?;
    if coord.r == 0 || coord.r > level_width(height, coord.l) {
        return Err(Error::range("level position", format!("{coord:?}")));
    }
    Ok(level_offset(height, coord.l) + coord.r)
}

/// Inverse of [`dyadic_to_sequential`].
pub fn sequential_to_dyadic(height: u32, i: usize) -> Result<PyramidCoord> {
    check_height(height)?;
    if i == 0 || i > node_count(height) {
        return Err(Error::range(
            "sequential index",
            format!("{i} not in 1..={}", node_count(height)),
        ));
    }
    let mut l = 1;
    while level_offset(height, l + 1) < i && l < height {
        l += 1;
    }
    Ok(PyramidCoord {
        r: i - level_offset(height, l),
        l,
    })
}

/// Number of nodes strictly below `level`: `2^N - 2^(N-l+1)`.
pub(crate) fn level_offset(height: u32, level: u32) -> usize {
    (1usize << height) - (1usize << (height + 1 - level))
}

/// A block-sparsity pattern `{I, k}` over `[rows] x [cols]` blocks of size `k`.
///
/// Coordinates are 1-based and kept sorted (row-major) so that iteration order,
/// and hence any flop accounting driven by it, is reproducible.
#[derive(Debug, Clone)]
pub struct BlockSparsityPattern {
    block_rows: usize,
    block_cols: usize,
    block_size: usize,
    entries: Vec<(usize, usize)>,
    lookup: HashSet<(usize, usize)>,
}

impl PartialEq for BlockSparsityPattern {
    fn eq(&self, other: &Self) -> bool {
        self.block_rows == other.block_rows
            && self.block_cols == other.block_cols
            && self.block_size == other.block_size
            && self.entries == other.entries
    }
}

impl Eq for BlockSparsityPattern {}

impl BlockSparsityPattern {
    pub fn new(
        block_rows: usize,
        block_cols: usize,
        block_size: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidParameter("block size must be positive".into()));
        }
        let mut entries: Vec<(usize, usize)> = entries.into_iter().collect();
        for &(i, j) in &entries {
            if i == 0 || i > block_rows || j == 0 || j > block_cols {
                return Err(Error::range(
                    "block coordinate",
                    format!("({i}, {j}) outside [{block_rows}] x [{block_cols}]"),
                ));
            }
        }
        entries.sort_unstable();
        entries.dedup();
        let lookup = entries.iter().copied().collect();
        Ok(Self {
            block_rows,
            block_cols,
            block_size,
            entries,
            lookup,
        })
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.lookup.contains(&(i, j))
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().copied()
    }

    pub fn is_subset_of(&self, other: &BlockSparsityPattern) -> bool {
        self.entries.iter().all(|&(i, j)| other.contains(i, j))
    }

    pub fn transpose(&self) -> Self {
        Self::new(
            self.block_cols,
            self.block_rows,
            self.block_size,
            self.entries.iter().map(|&(i, j)| (j, i)),
        )
        .expect("transposed coordinates stay in range")
    }

    /// Union of two patterns of identical shape.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if (self.block_rows, self.block_cols, self.block_size)
            != (other.block_rows, other.block_cols, other.block_size)
        {
            return Err(Error::DimensionMismatch(
                "pattern union requires identical shapes".into(),
            ));
        }
        Self::new(
            self.block_rows,
            self.block_cols,
            self.block_size,
            self.entries.iter().chain(other.entries.iter()).copied(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DyadicKind {
    Horizontal,
    Vertical,
    Symmetric,
}

impl DyadicKind {
    pub fn code(self) -> char {
        match self {
            DyadicKind::Horizontal => 'h',
            DyadicKind::Vertical => 'v',
            DyadicKind::Symmetric => 's',
        }
    }

    pub fn from_code(c: &str) -> Option<Self> {
        match c {
            "h" => Some(DyadicKind::Horizontal),
            "v" => Some(DyadicKind::Vertical),
            "s" => Some(DyadicKind::Symmetric),
            _ => None,
        }
    }
}

/// `HD(N,k)`, `VD(N,k)` or `SD(N,k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicPattern {
    height: u32,
    breadth: usize,
    kind: DyadicKind,
}

impl DyadicPattern {
    pub fn new(height: u32, breadth: usize, kind: DyadicKind) -> Result<Self> {
        check_height(height)?;
        if breadth == 0 {
            return Err(Error::InvalidParameter("breadth k must be positive".into()));
        }
        Ok(Self {
            height,
            breadth,
            kind,
        })
    }

    pub fn horizontal(height: u32, breadth: usize) -> Result<Self> {
        Self::new(height, breadth, DyadicKind::Horizontal)
    }

    pub fn vertical(height: u32, breadth: usize) -> Result<Self> {
        Self::new(height, breadth, DyadicKind::Vertical)
    }

    pub fn symmetric(height: u32, breadth: usize) -> Result<Self> {
        Self::new(height, breadth, DyadicKind::Symmetric)
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn breadth(&self) -> usize {
        self.breadth
    }

    pub fn kind(&self) -> DyadicKind {
        self.kind
    }

    pub fn with_kind(&self, kind: DyadicKind) -> Self {
        Self { kind, ..*self }
    }

    /// Number of block rows (and columns), `2^N - 1`.
    pub fn blocks(&self) -> usize {
        node_count(self.height)
    }

    /// Scalar dimension `d = k (2^N - 1)`.
    pub fn dim(&self) -> usize {
        self.breadth * self.blocks()
    }

    /// Whether block `(i, j)` (1-based) belongs to the pattern.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        let n = self.blocks();
        if i == 0 || j == 0 || i > n || j > n {
            return false;
        }
        let in_column = span_of(j).contains(&i); // I'_{r,l} x {b} with b = j
        let in_row = span_of(i).contains(&j);
        match self.kind {
            DyadicKind::Vertical => in_column,
            DyadicKind::Horizontal => in_row,
            DyadicKind::Symmetric => in_column || in_row,
        }
    }

    /// Closed-form block count of the pattern.
    pub fn block_count(&self) -> usize {
        let n = self.height as usize;
        let two_n = 1usize << self.height;
        match self.kind {
            DyadicKind::Horizontal | DyadicKind::Vertical => n * two_n - two_n + 1,
            DyadicKind::Symmetric => (2 * n + 1) * two_n + 3 - 4 * two_n,
        }
    }

    pub fn materialize(&self) -> BlockSparsityPattern {
        let n = self.blocks();
        let mut entries = Vec::with_capacity(self.block_count());
        for b in 1..=n {
            for c in span_of(b) {
                match self.kind {
                    DyadicKind::Horizontal => entries.push((b, c)),
                    DyadicKind::Vertical => entries.push((c, b)),
                    DyadicKind::Symmetric => {
                        entries.push((b, c));
                        entries.push((c, b));
                    }
                }
            }
        }
        BlockSparsityPattern::new(n, n, self.breadth, entries).expect("pyramid spans stay in range")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivedKind {
    /// `D(N,l)`: block diagonal of size `2^(N-l)`.
    Diagonal,
    /// `ED(N,l)`: column `j` holds the `2^l - 2` blocks of its span without the centre.
    Elongated,
    /// Band refinement of `ED(N,l)`: only the two blocks adjacent to the centre.
    RefinedElongated,
    /// Band refinement of the projected column: offsets `T(l)` around `s(j,l)`.
    RefinedElongatedPrime,
    IncompleteSymmetric,
    IncompleteVertical,
    IncompleteHorizontal,
}

/// A pattern derived from the pyramid at a given sweep level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DerivedPattern {
    kind: DerivedKind,
    height: u32,
    level: u32,
    breadth: usize,
}

impl DerivedPattern {
    pub fn new(kind: DerivedKind, height: u32, level: u32, breadth: usize) -> Result<Self> {
        check_level(height, level)?;
        if kind != DerivedKind::Diagonal && level < 2 {
            return Err(Error::range(
                "level",
                format!("{kind:?} requires 2 <= l <= N, got l = {level}"),
            ));
        }
        if breadth == 0 {
            return Err(Error::InvalidParameter("breadth k must be positive".into()));
        }
        Ok(Self {
            kind,
            height,
            level,
            breadth,
        })
    }

    pub fn kind(&self) -> DerivedKind {
        self.kind
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Shape in blocks `(rows, cols)`.
    pub fn block_shape(&self) -> (usize, usize) {
        let below = level_offset(self.height, self.level);
        let width = level_width(self.height, self.level);
        match self.kind {
            DerivedKind::Diagonal => (width, width),
            DerivedKind::Elongated
            | DerivedKind::RefinedElongated
            | DerivedKind::RefinedElongatedPrime => (below, width),
            DerivedKind::IncompleteSymmetric
            | DerivedKind::IncompleteVertical
            | DerivedKind::IncompleteHorizontal => (below, below),
        }
    }

    pub fn materialize(&self) -> BlockSparsityPattern {
        let (rows, cols) = self.block_shape();
        let (n, l) = (self.height, self.level);
        let width = level_width(n, l);
        let column_len = (1usize << l) - 2;
        let entries: Vec<(usize, usize)> = match self.kind {
            DerivedKind::Diagonal => (1..=width).map(|j| (j, j)).collect(),
            DerivedKind::Elongated => (1..=width)
                .flat_map(|j| ((j - 1) * column_len + 1..=j * column_len).map(move |i| (i, j)))
                .collect(),
            DerivedKind::RefinedElongated => (1..=width)
                .flat_map(|j| {
                    let s = band_anchor(j, l);
                    [(s, j), (s + 1, j)]
                })
                .collect(),
            DerivedKind::RefinedElongatedPrime => {
                let offsets = band_offsets(l);
                (1..=width)
                    .flat_map(|j| {
                        let s = band_anchor(j, l) as i64;
                        offsets.iter().map(move |&t| ((s + t) as usize, j))
                    })
                    .collect()
            }
            DerivedKind::IncompleteSymmetric
            | DerivedKind::IncompleteVertical
            | DerivedKind::IncompleteHorizontal => {
                // Block diagonal: 2^(N-l+1) copies of the height-(l-1) pattern.
                let sub_kind = match self.kind {
                    DerivedKind::IncompleteSymmetric => DyadicKind::Symmetric,
                    DerivedKind::IncompleteVertical => DyadicKind::Vertical,
                    _ => DyadicKind::Horizontal,
                };
                let copies = 1usize << (n - l + 1);
                let run = node_count(l - 1);
                let base = DyadicPattern::new(l - 1, self.breadth, sub_kind)
                    .expect("l >= 2")
                    .materialize();
                (0..copies)
                    .flat_map(|q| base.iter().map(move |(i, j)| (q * run + i, q * run + j)))
                    .collect()
            }
        };
        BlockSparsityPattern::new(rows, cols, self.breadth, entries)
            .expect("derived patterns stay in range")
    }
}

/// `s(j,l) = (2^(l-1) - 1)(2j - 1)`: the row of the block just left of the centre
/// of column `j` in elongated coordinates.
pub fn band_anchor(j: usize, level: u32) -> usize {
    ((1usize << (level - 1)) - 1) * (2 * j - 1)
}

/// `T(l) = {-2^(l-m) + 1 : m = 2..l} ∪ {2^(l-m) : m = 2..l}`, sorted ascending.
pub fn band_offsets(level: u32) -> Vec<i64> {
    let mut offsets: Vec<i64> = (2..=level)
        .flat_map(|m| {
            let p = 1i64 << (level - m);
            [1 - p, p]
        })
        .collect();
    offsets.sort_unstable();
    offsets
}

/// Supports of the band-refined elongated patterns at level `l`:
/// `(ẼD(N,l), ẼD'(N,l))`.
pub fn refined_ed_support(
    height: u32,
    level: u32,
    breadth: usize,
) -> Result<(BlockSparsityPattern, BlockSparsityPattern)> {
    let refined = DerivedPattern::new(DerivedKind::RefinedElongated, height, level, breadth)?;
    let prime = DerivedPattern::new(DerivedKind::RefinedElongatedPrime, height, level, breadth)?;
    Ok((refined.materialize(), prime.materialize()))
}

/// Natural indices with level below `level`, in increasing order. Position `q`
/// in this list is row `q + 1` of the elongated and incomplete patterns.
pub fn lower_level_indices(height: u32, level: u32) -> Vec<usize> {
    (1..=node_count(height))
        .filter(|&b| level_of(b) < level)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_positions_examples() {
        assert_eq!(level_positions(3, 1).unwrap(), vec![1, 3, 5, 7]);
        assert_eq!(level_positions(3, 3).unwrap(), vec![4]);
        assert_eq!(level_positions(1, 1).unwrap(), vec![1]);
        assert!(level_positions(3, 4).is_err());
        assert!(level_positions(3, 0).is_err());
    }

    #[test]
    fn levels_partition_the_index_range() {
        for n in 1..=12 {
            let mut seen = vec![false; node_count(n) + 1];
            for l in 1..=n {
                for b in level_positions(n, l).unwrap() {
                    assert!(!seen[b], "index {b} repeated at N={n}");
                    seen[b] = true;
                    assert_eq!(level_of(b), l);
                }
            }
            assert!(seen[1..].iter().all(|&s| s));
        }
    }

    #[test]
    fn span_examples() {
        let v = |r: RangeInclusive<usize>| r.collect::<Vec<_>>();
        assert_eq!(v(span(3, 1, 2).unwrap()), vec![1, 2, 3]);
        assert_eq!(v(span(3, 1, 3).unwrap()), (1..=7).collect::<Vec<_>>());
        assert_eq!(v(span(4, 2, 2).unwrap()), vec![5, 6, 7]);
        assert!(span(3, 3, 2).is_err());
    }

    fn recursive_span(r: usize, l: u32) -> Vec<usize> {
        let own = PyramidCoord { r, l }.position();
        if l == 1 {
            return vec![own];
        }
        let mut out = recursive_span(2 * r - 1, l - 1);
        out.push(own);
        out.extend(recursive_span(2 * r, l - 1));
        out.sort_unstable();
        out
    }

    #[test]
    fn span_matches_recursive_union() {
        for n in 1..=8 {
            for l in 1..=n {
                for r in 1..=level_width(n, l) {
                    let explicit: Vec<usize> = span(n, r, l).unwrap().collect();
                    assert_eq!(explicit, recursive_span(r, l));
                }
            }
        }
    }

    #[test]
    fn sequential_mapping() {
        assert_eq!(
            sequential_to_dyadic(4, 1).unwrap(),
            PyramidCoord { r: 1, l: 1 }
        );
        assert_eq!(
            sequential_to_dyadic(4, 15).unwrap(),
            PyramidCoord { r: 1, l: 4 }
        );
        assert_eq!(
            sequential_to_dyadic(4, 9).unwrap(),
            PyramidCoord { r: 1, l: 2 }
        );
        for n in 1..=8 {
            for i in 1..=node_count(n) {
                let c = sequential_to_dyadic(n, i).unwrap();
                assert_eq!(dyadic_to_sequential(n, c).unwrap(), i);
            }
        }
        assert!(sequential_to_dyadic(4, 16).is_err());
        assert!(sequential_to_dyadic(4, 0).is_err());
    }

    #[test]
    fn coord_round_trip() {
        for n in 1..=6 {
            for b in 1..=node_count(n) {
                assert_eq!(coord_of(n, b).unwrap().position(), b);
            }
        }
    }

    #[test]
    fn ancestors_contain_their_descendants() {
        let n = 6;
        for b in 1..=node_count(n) {
            for lev in level_of(b)..=n {
                let a = ancestor_at(b, lev);
                assert_eq!(level_of(a), lev);
                assert!(span_of(a).contains(&b));
            }
        }
    }

    #[test]
    fn symmetric_block_counts() {
        assert_eq!(DyadicPattern::symmetric(4, 1).unwrap().materialize().len(), 83);
        assert_eq!(DyadicPattern::symmetric(1, 3).unwrap().materialize().len(), 1);
        for n in 1..=10 {
            let p = DyadicPattern::symmetric(n, 1).unwrap();
            let expected = (2 * n as i64 - 3) * (1i64 << n) + 3;
            assert_eq!(p.materialize().len() as i64, expected);
            assert_eq!(p.block_count() as i64, expected);
            let v = DyadicPattern::vertical(n, 1).unwrap();
            assert_eq!(v.materialize().len(), v.block_count());
        }
    }

    #[test]
    fn symmetric_is_union_and_vertical_is_transpose() {
        for n in 1..=6 {
            let h = DyadicPattern::horizontal(n, 2).unwrap().materialize();
            let v = DyadicPattern::vertical(n, 2).unwrap().materialize();
            let s = DyadicPattern::symmetric(n, 2).unwrap().materialize();
            assert_eq!(h.union(&v).unwrap(), s);
            assert_eq!(h.transpose(), v);
        }
    }

    #[test]
    fn contains_agrees_with_materialize() {
        for kind in [DyadicKind::Horizontal, DyadicKind::Vertical, DyadicKind::Symmetric] {
            let p = DyadicPattern::new(4, 1, kind).unwrap();
            let m = p.materialize();
            for i in 1..=15 {
                for j in 1..=15 {
                    assert_eq!(p.contains(i, j), m.contains(i, j));
                }
            }
        }
    }

    #[test]
    fn removing_level_one_leaves_a_smaller_pyramid() {
        for n in 2..=8 {
            let big = DyadicPattern::symmetric(n, 1).unwrap().materialize();
            let small = DyadicPattern::symmetric(n - 1, 1).unwrap().materialize();
            // Even indices 2c map to c in the reduced pyramid.
            let induced: Vec<(usize, usize)> = big
                .iter()
                .filter(|&(i, j)| i % 2 == 0 && j % 2 == 0)
                .map(|(i, j)| (i / 2, j / 2))
                .collect();
            let induced = BlockSparsityPattern::new(small.block_rows(), small.block_cols(), 1, induced)
                .unwrap();
            assert_eq!(induced, small);
        }
    }

    #[test]
    fn elongated_example_n5_l4() {
        let ed = DerivedPattern::new(DerivedKind::Elongated, 5, 4, 1)
            .unwrap()
            .materialize();
        assert_eq!((ed.block_rows(), ed.block_cols()), (28, 2));
        let expected: Vec<(usize, usize)> = (1..=2usize)
            .flat_map(|j| (1..=14usize).map(move |t| ((j - 1) * 14 + t, j)))
            .collect();
        let expected = BlockSparsityPattern::new(28, 2, 1, expected).unwrap();
        assert_eq!(ed, expected);
    }

    #[test]
    fn refined_support_examples() {
        assert_eq!(band_anchor(1, 2), 1);
        assert_eq!(band_anchor(2, 2), 3);
        let (refined, _) = refined_ed_support(3, 2, 1).unwrap();
        assert_eq!(refined.entries(), &[(1, 1), (2, 1), (3, 2), (4, 2)]);
        // Substituting m = 2 into both families gives offsets 0 and 1.
        assert_eq!(band_offsets(2), vec![0, 1]);
        assert_eq!(band_offsets(3), vec![-1, 0, 1, 2]);
    }

    #[test]
    fn refined_supports_are_nested_in_elongated() {
        for n in 2..=6 {
            for l in 2..=n {
                let ed = DerivedPattern::new(DerivedKind::Elongated, n, l, 1)
                    .unwrap()
                    .materialize();
                let (r, rp) = refined_ed_support(n, l, 1).unwrap();
                assert!(r.is_subset_of(&ed));
                assert!(rp.is_subset_of(&ed));
                assert!(r.is_subset_of(&rp));
            }
        }
    }

    #[test]
    fn elongated_rows_are_spans_without_centres() {
        // Row q of the elongated pattern is the q-th lower-level index in natural order.
        for n in 2..=6 {
            for l in 2..=n {
                let lower = lower_level_indices(n, l);
                let ed = DerivedPattern::new(DerivedKind::Elongated, n, l, 1)
                    .unwrap()
                    .materialize();
                for (q, b) in level_positions(n, l).unwrap().into_iter().enumerate() {
                    let rows: Vec<usize> = ed
                        .iter()
                        .filter(|&(_, j)| j == q + 1)
                        .map(|(i, _)| lower[i - 1])
                        .collect();
                    let want: Vec<usize> = span_of(b).filter(|&a| a != b).collect();
                    assert_eq!(rows, want);
                }
            }
        }
    }

    #[test]
    fn incomplete_patterns_drop_upper_crosses() {
        for n in 2..=5 {
            for l in 2..=n {
                let lower = lower_level_indices(n, l);
                let full = DyadicPattern::symmetric(n, 1).unwrap().materialize();
                let expected: Vec<(usize, usize)> = full
                    .iter()
                    .filter(|&(i, j)| level_of(i) < l && level_of(j) < l)
                    .map(|(i, j)| {
                        (
                            lower.binary_search(&i).unwrap() + 1,
                            lower.binary_search(&j).unwrap() + 1,
                        )
                    })
                    .collect();
                let is = DerivedPattern::new(DerivedKind::IncompleteSymmetric, n, l, 1)
                    .unwrap()
                    .materialize();
                assert_eq!(
                    is,
                    BlockSparsityPattern::new(lower.len(), lower.len(), 1, expected).unwrap()
                );
                let iv = DerivedPattern::new(DerivedKind::IncompleteVertical, n, l, 1)
                    .unwrap()
                    .materialize();
                let ih = DerivedPattern::new(DerivedKind::IncompleteHorizontal, n, l, 1)
                    .unwrap()
                    .materialize();
                assert_eq!(iv.transpose(), ih);
            }
        }
    }

    #[test]
    fn derived_pattern_validation() {
        assert!(DerivedPattern::new(DerivedKind::Elongated, 3, 1, 1).is_err());
        assert!(DerivedPattern::new(DerivedKind::Diagonal, 3, 1, 1).is_ok());
        assert!(DerivedPattern::new(DerivedKind::Elongated, 3, 4, 1).is_err());
        assert!(DyadicPattern::symmetric(31, 1).is_err());
        assert!(DyadicPattern::symmetric(0, 1).is_err());
    }
}
