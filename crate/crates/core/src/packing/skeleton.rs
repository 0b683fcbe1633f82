use rand::seq::IndexedRandom;
use rand::Rng;

use super::graph::{outskirts, NeighborGraph};
use crate::error::{Error, Result};

/// Rows whose neighbourhoods are aligned one after another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub members: Vec<usize>,
    /// Outskirt of the first member that each row belongs to.
    pub labels: Vec<usize>,
}

impl Skeleton {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// True if the member neighbourhoods cover every row.
    pub fn covers(&self, graph: &NeighborGraph) -> bool {
        let mut seen = vec![false; graph.dim()];
        for &i in &self.members {
            for &j in graph.neighbors(i) {
                seen[j] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Grows a skeleton outskirt by outskirt from `start` (or a random row). Each
/// new member is a row of the previous outskirt with the largest neighbourhood
/// among those adjacent to a still uncovered row.
pub fn skeleton_select<R: Rng + ?Sized>(
    graph: &NeighborGraph,
    rng: &mut R,
    start: Option<usize>,
) -> Result<Skeleton> {
    let d = graph.dim();
    if d == 0 {
        return Err(Error::InvalidParameter("empty graph".into()));
    }
    let first = match start {
        Some(s) if s >= d => return Err(Error::range("skeleton start", format!("{s} with d = {d}"))),
        Some(s) => s,
        None => rng.random_range(0..d),
    };
    let layers = outskirts(graph, first);
    let mut labels = vec![usize::MAX; d];
    for (t, layer) in layers.iter().enumerate() {
        for &j in layer {
            labels[j] = t;
        }
    }
    if labels.contains(&usize::MAX) {
        return Err(Error::Disconnected {
            components: graph.components(),
        });
    }

    let mut members = vec![first];
    let mut in_x = vec![false; d];
    for r in 2..layers.len() {
        let mut x: Vec<usize> = layers[r].clone();
        for &j in &x {
            in_x[j] = true;
        }
        while !x.is_empty() {
            let j = *x.choose(rng).unwrap();
            let w: Vec<usize> = graph
                .neighbors(j)
                .iter()
                .copied()
                .filter(|&a| labels[a] == r - 1)
                .collect();
            let best = w.iter().map(|&a| graph.degree(a)).max().unwrap();
            let ties: Vec<usize> = w.into_iter().filter(|&a| graph.degree(a) == best).collect();
            let chosen = *ties.choose(rng).unwrap();
            members.push(chosen);
            for &k in graph.neighbors(chosen) {
                in_x[k] = false;
            }
            x.retain(|&k| in_x[k]);
        }
    }
    Ok(Skeleton { members, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tridiagonal_from_the_middle() {
        let g = NeighborGraph::from_edges(5, (1..5).map(|i| (i - 1, i))).unwrap();
        let s = skeleton_select(&g, &mut ChaCha8Rng::seed_from_u64(0), Some(2)).unwrap();
        assert_eq!(s.members[0], 2);
        let mut rest = s.members[1..].to_vec();
        rest.sort_unstable();
        assert_eq!(rest, vec![1, 3]);
        assert_eq!(s.labels, vec![2, 1, 0, 1, 2]);
        assert!(s.covers(&g));
    }

    #[test]
    fn single_row() {
        let g = NeighborGraph::from_edges(1, []).unwrap();
        let s = skeleton_select(&g, &mut ChaCha8Rng::seed_from_u64(0), None).unwrap();
        assert_eq!(s.members, vec![0]);
    }

    #[test]
    fn disconnected_graph_rejected() {
        let g = NeighborGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let r = skeleton_select(&g, &mut ChaCha8Rng::seed_from_u64(0), Some(0));
        assert!(matches!(r, Err(Error::Disconnected { .. })));
    }

    #[test]
    fn random_band_is_covered() {
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 200;
            let mut edges: Vec<(usize, usize)> = (1..d).map(|i| (i - 1, i)).collect();
            for i in 0..d {
                for j in i + 2..d.min(i + 11) {
                    if rng.random_bool(0.5) {
                        edges.push((i, j));
                    }
                }
            }
            let g = NeighborGraph::from_edges(d, edges).unwrap();
            let s = skeleton_select(&g, &mut rng, None).unwrap();
            assert!(s.covers(&g), "seed {seed}");
        }
    }
}
