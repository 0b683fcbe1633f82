use super::graph::{NeighborGraph, Permutation};
use super::report::half_widths;
use super::{pack, PackOptions};
use crate::error::{Error, Result};

/// Nested dissection recovered from a packed matrix. Indices are rows of the
/// input graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeparatorTree {
    Leaf {
        indices: Vec<usize>,
    },
    Node {
        separator: Vec<usize>,
        left: Box<SeparatorTree>,
        right: Box<SeparatorTree>,
    },
}

impl SeparatorTree {
    /// Rows in output order: left subtree, separator, right subtree.
    pub fn order(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<usize>) {
        match self {
            SeparatorTree::Leaf { indices } => out.extend_from_slice(indices),
            SeparatorTree::Node { separator, left, right } => {
                left.collect(out);
                out.extend_from_slice(separator);
                right.collect(out);
            }
        }
    }

    /// Number of separator levels on the deepest path.
    pub fn depth(&self) -> usize {
        match self {
            SeparatorTree::Leaf { .. } => 0,
            SeparatorTree::Node { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Separators found at `level` (0 is the root), left to right.
    pub fn separators_at(&self, level: usize) -> Vec<&[usize]> {
        let mut out = Vec::new();
        self.walk(level, &mut out);
        out
    }

    fn walk<'a>(&'a self, level: usize, out: &mut Vec<&'a [usize]>) {
        if let SeparatorTree::Node { separator, left, right } = self {
            if level == 0 {
                out.push(separator);
            } else {
                left.walk(level - 1, out);
                right.walk(level - 1, out);
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RecursiveOptions {
    pub max_depth: usize,
    /// Neighbourhood order used by each packing.
    pub order: usize,
    pub seed: u64,
}

impl Default for RecursiveOptions {
    fn default() -> Self {
        Self {
            max_depth: 8,
            order: 2,
            seed: 0,
        }
    }
}

/// Packs the graph, splits it at the narrowest vertex separator near the
/// middle of the packed order and recurses into both halves.
///
/// A split at position `c` removes a minimum vertex cover of the edges that
/// cross `c`. It is accepted when both halves stay non-empty and the cover is
/// narrower than the packed half-bandwidth. Among admissible splits in the
/// middle third the smallest cover wins, then the most central `c`. Without
/// an admissible split the node is a leaf holding the packed order.
pub fn recursive_dyadic_pack(graph: &NeighborGraph, opts: RecursiveOptions) -> Result<(Permutation, SeparatorTree)> {
    let components = graph.components();
    if components.len() > 1 {
        return Err(Error::Disconnected { components });
    }
    let all: Vec<usize> = (0..graph.dim()).collect();
    let tree = split(graph, &all, 0, opts)?;
    let pi = Permutation::from_order(&tree.order())?;
    Ok((pi, tree))
}

fn split(graph: &NeighborGraph, nodes: &[usize], depth: usize, opts: RecursiveOptions) -> Result<SeparatorTree> {
    let sub = graph.induced(nodes);
    let local = pack_components(&sub, opts)?;
    let leaf = |local: &Permutation| SeparatorTree::Leaf {
        indices: local.order().iter().map(|&p| nodes[p]).collect(),
    };
    let n = nodes.len();
    if depth >= opts.max_depth || n < 3 {
        return Ok(leaf(&local));
    }
    let lambda = half_widths(&sub, &local).into_iter().max().unwrap_or(0);
    let order = local.order();

    let mut best: Option<(usize, Vec<usize>)> = None;
    for c in (n / 3).max(1)..=(2 * n).div_ceil(3).min(n - 1) {
        let edges: Vec<(usize, usize)> = sub
            .edges()
            .filter_map(|(u, v)| {
                let (pu, pv) = (local.apply(u), local.apply(v));
                match (pu < c, pv < c) {
                    (true, false) => Some((pu, pv - c)),
                    (false, true) => Some((pv, pu - c)),
                    _ => None,
                }
            })
            .collect();
        let (lc, rc) = min_vertex_cover(c, n - c, &edges);
        if lc.len() == c || rc.len() == n - c || lc.len() + rc.len() >= lambda {
            continue;
        }
        let size = lc.len() + rc.len();
        let better = match &best {
            None => true,
            Some((bc, cover)) => {
                size < cover.len() || (size == cover.len() && (2 * c).abs_diff(n) < (2 * bc).abs_diff(n))
            }
        };
        if better {
            let cover: Vec<usize> = lc.into_iter().chain(rc.into_iter().map(|p| p + c)).collect();
            best = Some((c, cover));
        }
    }
    let Some((c, cover)) = best else {
        return Ok(leaf(&local));
    };

    let mut in_cover = vec![false; n];
    for &p in &cover {
        in_cover[p] = true;
    }
    let pick = |range: std::ops::Range<usize>| -> Vec<usize> {
        range.filter(|&p| !in_cover[p]).map(|p| nodes[order[p]]).collect()
    };
    let left = pick(0..c);
    let right = pick(c..n);
    let separator = cover.iter().map(|&p| nodes[order[p]]).collect();
    Ok(SeparatorTree::Node {
        separator,
        left: Box::new(split(graph, &left, depth + 1, opts)?),
        right: Box::new(split(graph, &right, depth + 1, opts)?),
    })
}

/// Packs every component separately and concatenates them by smallest row.
fn pack_components(graph: &NeighborGraph, opts: RecursiveOptions) -> Result<Permutation> {
    let mut order = Vec::with_capacity(graph.dim());
    for comp in graph.components() {
        if comp.len() == 1 {
            order.push(comp[0]);
            continue;
        }
        let r = pack(
            &graph.induced(&comp),
            PackOptions {
                order: opts.order,
                seed: opts.seed,
                start: None,
            },
        )?;
        order.extend(r.permutation.order().into_iter().map(|p| comp[p]));
    }
    Permutation::from_order(&order)
}

/// Minimum vertex cover of a bipartite graph with `left` and `right` vertices.
/// Returns the covered vertices of each side, sorted.
pub fn min_vertex_cover(left: usize, right: usize, edges: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    let mut adj = vec![Vec::new(); left];
    for &(u, v) in edges {
        adj[u].push(v);
    }
    let mut match_r = vec![usize::MAX; right];
    let mut match_l = vec![usize::MAX; left];
    for u in 0..left {
        let mut seen = vec![false; right];
        augment(u, &adj, &mut seen, &mut match_l, &mut match_r);
    }

    // Alternating reachability from unmatched left vertices.
    let mut reach_l = vec![false; left];
    let mut reach_r = vec![false; right];
    let mut stack: Vec<usize> = (0..left).filter(|&u| match_l[u] == usize::MAX).collect();
    for &u in &stack {
        reach_l[u] = true;
    }
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !reach_r[v] {
                reach_r[v] = true;
                let w = match_r[v];
                if w != usize::MAX && !reach_l[w] {
                    reach_l[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    (
        (0..left).filter(|&u| !reach_l[u]).collect(),
        (0..right).filter(|&v| reach_r[v]).collect(),
    )
}

fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], match_l: &mut [usize], match_r: &mut [usize]) -> bool {
    for &v in &adj[u] {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        if match_r[v] == usize::MAX || augment(match_r[v], adj, seen, match_l, match_r) {
            match_r[v] = u;
            match_l[u] = v;
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cover_of_a_star() {
        let (l, r) = min_vertex_cover(1, 4, &[(0, 0), (0, 1), (0, 2), (0, 3)]);
        assert_eq!((l, r), (vec![0], vec![]));
    }

    #[test]
    fn cover_of_a_path() {
        // l0 - r0 - l1 - r1
        let (l, r) = min_vertex_cover(2, 2, &[(0, 0), (1, 0), (1, 1)]);
        assert_eq!(l.len() + r.len(), 2);
    }

    proptest! {
        #[test]
        fn cover_is_valid_and_minimum(edges in proptest::collection::vec((0usize..6, 0usize..6), 0..20)) {
            let (l, r) = min_vertex_cover(6, 6, &edges);
            for &(u, v) in &edges {
                prop_assert!(l.contains(&u) || r.contains(&v));
            }
            // Brute force over all subsets of the 12 vertices.
            let mut best = usize::MAX;
            for mask in 0u32..(1 << 12) {
                if edges.iter().all(|&(u, v)| mask & (1 << u) != 0 || mask & (1 << (6 + v)) != 0) {
                    best = best.min(mask.count_ones() as usize);
                }
            }
            prop_assert_eq!(l.len() + r.len(), best);
        }
    }

    fn band(d: usize, lambda: usize) -> NeighborGraph {
        NeighborGraph::from_edges(d, (0..d).flat_map(|i| (i + 1..d.min(i + lambda + 1)).map(move |j| (i, j)))).unwrap()
    }

    #[test]
    fn band_stays_flat() {
        let (_, tree) = recursive_dyadic_pack(&band(50, 4), RecursiveOptions { max_depth: 4, order: 1, seed: 0 }).unwrap();
        assert_eq!(tree.depth(), 0);
    }

    #[test]
    fn two_cliques_joined_by_a_hub() {
        // Cliques {0..5} and {6..11}, hub rows 12 and 13 adjacent to everything.
        let mut edges = Vec::new();
        for side in [0usize, 6] {
            for i in side..side + 6 {
                for j in i + 1..side + 6 {
                    edges.push((i, j));
                }
            }
        }
        for h in [12, 13] {
            for j in 0..12 {
                edges.push((h, j));
            }
        }
        edges.push((12, 13));
        let g = NeighborGraph::from_edges(14, edges).unwrap();
        let (pi, tree) = recursive_dyadic_pack(&g, RecursiveOptions { max_depth: 3, order: 1, seed: 5 }).unwrap();
        let mut sep = tree.separators_at(0)[0].to_vec();
        sep.sort_unstable();
        assert_eq!(sep, vec![12, 13]);
        assert_eq!(tree.depth(), 1);
        assert_eq!(pi.len(), 14);
    }
}
