use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Neighbour sets `D_i = { j : Σ[i, j] != 0 }` of a symmetric 0-1 matrix.
/// Every set is sorted and contains `i` itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborGraph {
    sets: Vec<Vec<usize>>,
}

impl NeighborGraph {
    /// Builds the graph from a square matrix; any entry with `|x| > 0` is an edge.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                d,
                m.ncols()
            )));
        }
        let mut sets = Vec::with_capacity(d);
        for i in 0..d {
            let mut s = Vec::new();
            for j in 0..d {
                let a = m[(i, j)] != 0.0;
                if a != (m[(j, i)] != 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                if a || i == j {
                    s.push(j);
                }
            }
            sets.push(s);
        }
        Ok(Self { sets })
    }

    /// Builds the graph from undirected edges. Self loops are implied.
    pub fn from_edges(d: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut sets: Vec<Vec<usize>> = (0..d).map(|i| vec![i]).collect();
        for (i, j) in edges {
            if i >= d || j >= d {
                return Err(Error::range("edge endpoint", format!("({i}, {j}) with d = {d}")));
            }
            sets[i].push(j);
            sets[j].push(i);
        }
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        Ok(Self { sets })
    }

    pub(crate) fn from_sets_unchecked(sets: Vec<Vec<usize>>) -> Self {
        Self { sets }
    }

    pub fn dim(&self) -> usize {
        self.sets.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.sets[i].len()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.sets[i].binary_search(&j).is_ok()
    }

    /// Number of nonzeros of the matrix, diagonal included.
    pub fn nnz(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    /// Off-diagonal edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sets
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (i, s) in self.sets.iter().enumerate() {
            for &j in s {
                m[(i, j)] = 1.0;
            }
        }
        m
    }

    /// Connected components, each sorted, ordered by their smallest element.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let d = self.dim();
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for s in 0..d {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.sets[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.dim() <= 1 || self.components().len() == 1
    }

    /// Subgraph on `nodes`; node `nodes[p]` becomes `p`.
    pub fn induced(&self, nodes: &[usize]) -> NeighborGraph {
        let mut local = vec![usize::MAX; self.dim()];
        for (p, &u) in nodes.iter().enumerate() {
            local[u] = p;
        }
        let sets = nodes
            .iter()
            .map(|&u| {
                let mut s: Vec<usize> = self.sets[u]
                    .iter()
                    .filter_map(|&v| (local[v] != usize::MAX).then_some(local[v]))
                    .collect();
                s.sort_unstable();
                s
            })
            .collect();
        NeighborGraph { sets }
    }

    /// Relabels rows: row `i` becomes `pi.apply(i)`.
    pub fn permuted(&self, pi: &Permutation) -> NeighborGraph {
        let mut sets = vec![Vec::new(); self.dim()];
        for (i, s) in self.sets.iter().enumerate() {
            let mut t: Vec<usize> = s.iter().map(|&j| pi.apply(j)).collect();
            t.sort_unstable();
            sets[pi.apply(i)] = t;
        }
        NeighborGraph { sets }
    }
}

/// Outskirts `L_i(0), L_i(1), ...` of row `i` up to exhaustion. Each outskirt is sorted.
pub fn outskirts(graph: &NeighborGraph, i: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; graph.dim()];
    seen[i] = true;
    let mut layers = vec![vec![i]];
    loop {
        let mut next = Vec::new();
        for &u in layers.last().unwrap() {
            for &v in graph.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            return layers;
        }
        next.sort_unstable();
        layers.push(next);
    }
}

/// Graph of order-`t` neighbourhoods `D_i(t)`.
pub fn t_order(graph: &NeighborGraph, t: usize) -> NeighborGraph {
    use rayon::prelude::*;
    if t <= 1 {
        return graph.clone();
    }
    let d = graph.dim();
    let sets = (0..d)
        .into_par_iter()
        .map(|i| {
            let mut dist = std::collections::HashMap::from([(i, 0usize)]);
            let mut queue = VecDeque::from([i]);
            while let Some(u) = queue.pop_front() {
                let du = dist[&u];
                if du == t {
                    continue;
                }
                for &v in graph.neighbors(u) {
                    dist.entry(v).or_insert_with(|| {
                        queue.push_back(v);
                        du + 1
                    });
                }
            }
            let mut s: Vec<usize> = dist.into_keys().collect();
            s.sort_unstable();
            s
        })
        .collect();
    NeighborGraph::from_sets_unchecked(sets)
}

/// A bijection on `0..d`; `images[i]` is the position assigned to `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &p in &images {
            if p >= d || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter(format!(
                    "not a permutation of 0..{d}: image {p} repeated or out of range"
                )));
            }
        }
        Ok(Self { images })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            images: (0..d).collect(),
        }
    }

    /// The permutation that puts `order[p]` at position `p`.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let mut images = vec![usize::MAX; order.len()];
        for (p, &i) in order.iter().enumerate() {
            if i >= order.len() || images[i] != usize::MAX {
                return Err(Error::InvalidParameter(format!(
                    "order is not a permutation: entry {i}"
                )));
            }
            images[i] = p;
        }
        Ok(Self { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Rows listed by position.
    pub fn order(&self) -> Vec<usize> {
        self.inverse().images
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &p) in self.images.iter().enumerate() {
            inv[p] = i;
        }
        Self { images: inv }
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Permutation) -> Self {
        Self {
            images: other.images.iter().map(|&p| self.images[p]).collect(),
        }
    }

    /// `ρ ∘ self` with `ρ(p) = d - 1 - p`.
    pub fn reversed(&self) -> Self {
        let d = self.len();
        Self {
            images: self.images.iter().map(|&p| d - 1 - p).collect(),
        }
    }
}
