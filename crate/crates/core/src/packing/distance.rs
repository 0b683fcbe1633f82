use nalgebra::DMatrix;

use super::graph::{NeighborGraph, Permutation};
use crate::error::{Error, Result};

/// `|A △ B|` for sorted slices.
pub fn symm_diff_size(a: &[usize], b: &[usize]) -> usize {
    let (mut p, mut q, mut common) = (0, 0, 0);
    while p < a.len() && q < b.len() {
        match a[p].cmp(&b[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                p += 1;
                q += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

/// `A[i, j] = |D_i △ D_j| / 2`.
pub fn symm_diff_distance(graph: &NeighborGraph) -> DMatrix<f64> {
    let d = graph.dim();
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let v = symm_diff_size(graph.neighbors(i), graph.neighbors(j)) as f64 / 2.0;
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// `G[i, j] = |π(i) - π(j)|`.
pub fn permutation_distance_matrix(pi: &Permutation) -> DMatrix<f64> {
    let d = pi.len();
    DMatrix::from_fn(d, d, |i, j| pi.apply(i).abs_diff(pi.apply(j)) as f64)
}

/// Recovers a permutation from its distance matrix. The result is either the
/// generating permutation or its reversal.
pub fn reconstruct_from_distance(g: &DMatrix<f64>) -> Result<Permutation> {
    let d = g.nrows();
    if g.ncols() != d {
        return Err(Error::DimensionMismatch(format!("{}x{} distance matrix", d, g.ncols())));
    }
    if d == 1 {
        return Ok(Permutation::identity(1));
    }
    let unit = |i: usize, j: usize| i != j && g[(i, j)] == 1.0;
    let start = (0..d)
        .find(|&i| (0..d).filter(|&j| unit(i, j)).count() == 1)
        .ok_or_else(|| Error::NotPermutationMetric("no row with a single unit neighbour".into()))?;
    let mut order = vec![start];
    let mut used = vec![false; d];
    used[start] = true;
    while order.len() < d {
        let prev = *order.last().unwrap();
        let mut next = (0..d).filter(|&j| !used[j] && unit(prev, j));
        let j = next.next().ok_or_else(|| {
            Error::NotPermutationMetric(format!("row {} has no unused unit neighbour", prev + 1))
        })?;
        if next.next().is_some() {
            return Err(Error::NotPermutationMetric(format!(
                "row {} has several unused unit neighbours",
                prev + 1
            )));
        }
        used[j] = true;
        order.push(j);
    }
    let gamma = Permutation::from_order(&order)?;
    for i in 0..d {
        for j in 0..d {
            if g[(i, j)] != gamma.apply(i).abs_diff(gamma.apply(j)) as f64 {
                return Err(Error::NotPermutationMetric(format!(
                    "entry ({}, {}) disagrees with the chained order",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(gamma)
}

/// For every point, the two closest points on either side, with distances.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSummary {
    /// Indices of the extreme points.
    pub endpoints: (usize, usize),
    pub endpoint_distance: f64,
    /// `None` for the two endpoints.
    pub pairs: Vec<Option<[(usize, f64); 2]>>,
}

/// Extracts the nearest-neighbour summary from the distance matrix of distinct
/// real points.
pub fn nearest_neighbor_summary(g: &DMatrix<f64>) -> Result<NeighborSummary> {
    let d = g.nrows();
    if g.ncols() != d || d == 0 {
        return Err(Error::DimensionMismatch(format!("{}x{} distance matrix", d, g.ncols())));
    }
    let mut endpoints = (0, 0);
    for i in 0..d {
        for j in i + 1..d {
            if g[(i, j)] > g[endpoints] {
                endpoints = (i, j);
            }
        }
    }
    let scale = g.max().max(1.0);
    let tol = 1e-12 * scale;
    let mut pairs = vec![None; d];
    for i in 0..d {
        if i == endpoints.0 || i == endpoints.1 {
            continue;
        }
        let mut best: Option<(usize, usize)> = None;
        for j1 in 0..d {
            if j1 == i {
                continue;
            }
            for j2 in j1 + 1..d {
                if j2 == i || (g[(j1, j2)] - g[(j1, i)] - g[(i, j2)]).abs() > tol {
                    continue;
                }
                if best.is_none_or(|(b1, b2)| g[(j1, j2)] < g[(b1, b2)] - tol) {
                    best = Some((j1, j2));
                }
            }
        }
        let (j1, j2) = best.ok_or_else(|| {
            Error::Reconstruction(format!("point {} lies between no pair", i + 1))
        })?;
        pairs[i] = Some([(j1, g[(j1, i)]), (j2, g[(j2, i)])]);
    }
    Ok(NeighborSummary {
        endpoints,
        endpoint_distance: g[endpoints],
        pairs,
    })
}

/// Rebuilds points whose distance matrix matches the one summarised. The
/// first endpoint is placed at zero.
pub fn reconstruct_points(info: &NeighborSummary) -> Result<Vec<f64>> {
    let d = info.pairs.len();
    let (e1, e2) = info.endpoints;
    let mut y = vec![0.0; d];
    if d == 1 {
        return Ok(y);
    }
    if d == 2 {
        y[e2] = info.endpoint_distance;
        return Ok(y);
    }
    let pair = |i: usize| {
        info.pairs[i]
            .ok_or_else(|| Error::Reconstruction(format!("point {} has no betweenness pair", i + 1)))
    };
    let mut used = vec![false; d];
    used[e1] = true;
    used[e2] = true;
    let mut prev = e1;
    for _ in 0..d - 2 {
        let mut found = None;
        for i in 0..d {
            if used[i] {
                continue;
            }
            if let Some(&(_, rho)) = pair(i)?.iter().find(|&&(j, _)| j == prev) {
                if found.is_some() {
                    return Err(Error::Reconstruction(format!(
                        "point {} is the neighbour of several points",
                        prev + 1
                    )));
                }
                found = Some((i, rho));
            }
        }
        let (i, rho) = found.ok_or_else(|| {
            Error::Reconstruction(format!("chain breaks after point {}", prev + 1))
        })?;
        y[i] = y[prev] + rho;
        used[i] = true;
        prev = i;
    }
    let &(_, rho) = pair(prev)?
        .iter()
        .find(|&&(j, _)| j == e2)
        .ok_or_else(|| Error::Reconstruction("chain does not reach the far endpoint".into()))?;
    y[e2] = y[prev] + rho;
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn points_matrix(x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(x.len(), x.len(), |i, j| (x[i] - x[j]).abs())
    }

    #[test]
    fn tridiagonal_distances() {
        let g = NeighborGraph::from_edges(8, (1..8).map(|i| (i - 1, i))).unwrap();
        let a = symm_diff_distance(&g);
        for i in 0..8 {
            assert_eq!(a[(i, i)], 0.0);
            for j in 0..8 {
                assert!(a[(i, j)] <= 3.0);
            }
        }
        assert_eq!(a[(3, 4)], 1.0);
    }

    #[test]
    fn small_permutation_recovered_up_to_reversal() {
        let pi = Permutation::new(vec![1, 0, 2]).unwrap();
        let gamma = reconstruct_from_distance(&permutation_distance_matrix(&pi)).unwrap();
        assert!(gamma == pi || gamma == pi.reversed());
    }

    #[test]
    fn non_metric_rejected() {
        let mut g = permutation_distance_matrix(&Permutation::identity(4));
        g[(0, 3)] = 2.0;
        g[(3, 0)] = 2.0;
        assert!(matches!(reconstruct_from_distance(&g), Err(Error::NotPermutationMetric(_))));
    }

    #[test]
    fn points_hand_example() {
        let info = nearest_neighbor_summary(&points_matrix(&[0.0, 5.0, 2.0])).unwrap();
        let y = reconstruct_points(&info).unwrap();
        let mut s = y.clone();
        s.sort_by(f64::total_cmp);
        assert_eq!([s[1] - s[0], s[2] - s[1]], [2.0, 3.0]);
    }

    #[test]
    fn two_points() {
        let info = nearest_neighbor_summary(&points_matrix(&[4.0, 1.5])).unwrap();
        assert_eq!(reconstruct_points(&info).unwrap(), vec![0.0, 2.5]);
    }

    #[test]
    fn missing_pair_is_an_error() {
        let mut info = nearest_neighbor_summary(&points_matrix(&[0.0, 1.0, 3.0, 4.0])).unwrap();
        info.pairs[1] = None;
        assert!(matches!(reconstruct_points(&info), Err(Error::Reconstruction(_))));
    }

    proptest! {
        #[test]
        fn permutations_round_trip(images in (1usize..50).prop_flat_map(|d| Just((0..d).collect::<Vec<_>>()).prop_shuffle())) {
            let pi = Permutation::new(images).unwrap();
            let gamma = reconstruct_from_distance(&permutation_distance_matrix(&pi)).unwrap();
            prop_assert!(gamma == pi || gamma == pi.reversed());
        }

        #[test]
        fn integer_points_rebuilt_exactly(x in proptest::collection::hash_set(-1000i32..1000, 1..40)) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let g = points_matrix(&x);
            let y = reconstruct_points(&nearest_neighbor_summary(&g).unwrap()).unwrap();
            prop_assert_eq!(points_matrix(&y), g);
        }

        #[test]
        fn real_points_rebuilt(x in proptest::collection::vec(-10.0f64..10.0, 1..40)) {
            let mut x = x;
            x.sort_by(f64::total_cmp);
            x.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            let g = points_matrix(&x);
            let y = reconstruct_points(&nearest_neighbor_summary(&g).unwrap()).unwrap();
            prop_assert!((points_matrix(&y) - g).amax() <= 1e-12);
        }
    }
}
