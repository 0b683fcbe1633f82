//! Recovery of a permutation that packs the nonzeros of a sparse symmetric
//! 0-1 matrix close to the diagonal.
//!
//! The pipeline approximates the distance matrix of the unknown ordering by
//! half symmetric differences of neighbourhoods, computes one-dimensional
//! classical scaling on small overlapping neighbourhoods along a skeleton of
//! rows, aligns those local configurations into a global one and ranks it.
//!
//! Indices in this module are 0-based. Files written by the CLI are 1-based.

mod align;
mod distance;
mod graph;
mod mds;
mod recursive;
mod report;
mod skeleton;

pub use align::{configuration_to_permutation, flesh_to_body};
pub use distance::{
    nearest_neighbor_summary, permutation_distance_matrix, reconstruct_from_distance,
    reconstruct_points, symm_diff_distance, symm_diff_size, NeighborSummary,
};
pub use graph::{outskirts, t_order, NeighborGraph, Permutation};
pub use mds::local_mds;
pub use recursive::{min_vertex_cover, recursive_dyadic_pack, RecursiveOptions, SeparatorTree};
pub use report::{
    block_tridiagonal_fraction, bounds_diagnostics, half_widths, pair_bound, report_stats,
    BoundsReport, PackingReport,
};
pub use skeleton::{skeleton_select, Skeleton};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct PackOptions {
    /// Neighbourhood order `s`: the pipeline runs on `Σ(s)`.
    pub order: usize,
    pub seed: u64,
    /// Forces the first skeleton row instead of drawing it.
    pub start: Option<usize>,
}

impl Default for PackOptions {
    fn default() -> Self {
        Self {
            order: 1,
            seed: 0,
            start: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PackResult {
    /// `permutation.apply(i)` is the packed position of row `i`.
    pub permutation: Permutation,
    /// Statistics of the input under `permutation`.
    pub report: PackingReport,
    pub skeleton: Skeleton,
}

/// Runs the full packing pipeline on a connected graph.
pub fn pack(graph: &NeighborGraph, opts: PackOptions) -> Result<PackResult> {
    if opts.order == 0 {
        return Err(Error::InvalidParameter("neighbourhood order must be >= 1".into()));
    }
    let components = graph.components();
    if components.len() > 1 {
        return Err(Error::Disconnected { components });
    }
    let powered = t_order(graph, opts.order);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let skeleton = skeleton_select(&powered, &mut rng, opts.start)?;
    let local = local_configurations(&powered, &skeleton)?;
    let x = flesh_to_body(&powered, &skeleton, &local)?;
    let permutation = configuration_to_permutation(&x)?;
    let report = report_stats(graph, &permutation, None, opts.order);
    Ok(PackResult {
        permutation,
        report,
        skeleton,
    })
}

/// Classical scaling of every skeleton neighbourhood. Entry `q` of the result
/// lists positions for `graph.neighbors(skeleton.members[q])` in order.
///
/// A neighbourhood whose rows all share the same neighbour set has no spread;
/// it is placed at a single point.
fn local_configurations(graph: &NeighborGraph, skeleton: &Skeleton) -> Result<Vec<Vec<f64>>> {
    skeleton
        .members
        .par_iter()
        .map(|&i| {
            let nodes = graph.neighbors(i);
            let m = nodes.len();
            let a = nalgebra::DMatrix::from_fn(m, m, |p, q| {
                symm_diff_size(graph.neighbors(nodes[p]), graph.neighbors(nodes[q])) as f64 / 2.0
            });
            match local_mds(&a) {
                Ok(x) => Ok(x),
                Err(Error::DegenerateConfiguration(_)) => Ok(vec![0.0; m]),
                Err(e) => Err(e),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band(d: usize, lambda: usize) -> NeighborGraph {
        NeighborGraph::from_edges(
            d,
            (0..d).flat_map(|i| (i..d.min(i + lambda + 1)).map(move |j| (i, j))),
        )
        .unwrap()
    }

    #[test]
    fn pack_single_row() {
        let g = NeighborGraph::from_edges(1, []).unwrap();
        let r = pack(&g, PackOptions::default()).unwrap();
        assert_eq!(r.permutation, Permutation::identity(1));
    }

    #[test]
    fn pack_refuses_disconnected() {
        let g = NeighborGraph::from_edges(3, []).unwrap();
        match pack(&g, PackOptions::default()) {
            Err(Error::Disconnected { components }) => assert_eq!(components.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pack_recovers_permuted_band() {
        use rand::seq::SliceRandom;
        let g = band(60, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut images: Vec<usize> = (0..60).collect();
        images.shuffle(&mut rng);
        let pi = Permutation::new(images).unwrap();
        let scrambled = g.permuted(&pi);
        let r = pack(&scrambled, PackOptions { order: 1, seed: 1, start: None }).unwrap();
        assert_eq!(r.report.half_bandwidth, 3);
        assert_eq!(r.report.half_width_l1, report_stats(&g, &Permutation::identity(60), None, 1).half_width_l1);
    }

    #[test]
    fn pack_is_deterministic() {
        let g = band(40, 2);
        let a = pack(&g, PackOptions { order: 2, seed: 9, start: None }).unwrap();
        let b = pack(&g, PackOptions { order: 2, seed: 9, start: None }).unwrap();
        assert_eq!(a.permutation, b.permutation);
    }
}
