use super::graph::{NeighborGraph, Permutation};
use super::skeleton::Skeleton;
use crate::error::{Error, Result};

/// Aligns the local configurations of the skeleton members into one global
/// configuration.
///
/// `local[q]` gives positions for `graph.neighbors(skeleton.members[q])`.
/// Member `q` is mapped by `y -> a·y + b` with `a ∈ {-1, 1}` and `b` fitted in
/// least squares against every earlier member sharing a row with it; only
/// members within two outskirts can share rows. The global coordinate of a
/// row is the mean of its aligned values.
pub fn flesh_to_body(graph: &NeighborGraph, skeleton: &Skeleton, local: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = graph.dim();
    if local.len() != skeleton.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} local configurations for {} skeleton members",
            local.len(),
            skeleton.len()
        )));
    }
    // aligned[z] holds (member, aligned value) for every member containing z.
    let mut aligned: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
    for (q, (&i, y)) in skeleton.members.iter().zip(local).enumerate() {
        let rows = graph.neighbors(i);
        if y.len() != rows.len() {
            return Err(Error::DimensionMismatch(format!(
                "local configuration {} has {} entries for {} rows",
                q + 1,
                y.len(),
                rows.len()
            )));
        }
        let (a, b) = if q == 0 {
            (1.0, 0.0)
        } else {
            let here = skeleton.labels[i];
            let mut pairs = Vec::new();
            for (&z, &yz) in rows.iter().zip(y) {
                for &(m, prev) in &aligned[z] {
                    if skeleton.labels[skeleton.members[m]].abs_diff(here) <= 2 {
                        pairs.push((prev, yz));
                    }
                }
            }
            if pairs.is_empty() {
                return Err(Error::AlignmentImpossible { step: q + 1 });
            }
            estimate(&pairs)
        };
        for (&z, &yz) in rows.iter().zip(y) {
            aligned[z].push((q, a * yz + b));
        }
    }
    aligned
        .iter()
        .enumerate()
        .map(|(z, vals)| {
            if vals.is_empty() {
                Err(Error::IncompleteConfiguration(z))
            } else {
                Ok(vals.iter().map(|v| v.1).sum::<f64>() / vals.len() as f64)
            }
        })
        .collect()
}

/// Least-squares reflection and shift mapping the second coordinate of each
/// pair onto the first. A zero covariance keeps the orientation.
fn estimate(pairs: &[(f64, f64)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let mean_t = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pairs.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    let a = if cov < 0.0 { -1.0 } else { 1.0 };
    let b = pairs.iter().map(|p| p.0 - a * p.1).sum::<f64>() / n;
    (a, b)
}

/// Ranks of the configuration. Equal values are ranked by index; a NaN marks
/// an undefined coordinate.
pub fn configuration_to_permutation(x: &[f64]) -> Result<Permutation> {
    if let Some(i) = x.iter().position(|v| v.is_nan()) {
        return Err(Error::IncompleteConfiguration(i));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(i.cmp(&j)));
    Permutation::from_order(&order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiagonal(d: usize) -> NeighborGraph {
        NeighborGraph::from_edges(d, (1..d).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn ranks() {
        assert_eq!(configuration_to_permutation(&[3.2, -1.0, 0.0]).unwrap().images(), &[2, 0, 1]);
        assert_eq!(configuration_to_permutation(&[1.0, 2.0, 5.0]).unwrap(), Permutation::identity(3));
        assert_eq!(configuration_to_permutation(&[1.0, 0.0, -1.0]).unwrap().images(), &[2, 1, 0]);
        assert_eq!(configuration_to_permutation(&[0.0, 0.0]).unwrap(), Permutation::identity(2));
        assert!(matches!(
            configuration_to_permutation(&[0.0, f64::NAN]),
            Err(Error::IncompleteConfiguration(1))
        ));
    }

    #[test]
    fn single_member_is_copied() {
        let g = tridiagonal(3);
        let sk = Skeleton { members: vec![1], labels: vec![1, 0, 1] };
        let x = flesh_to_body(&g, &sk, &[vec![-1.0, 0.0, 1.0]]).unwrap();
        assert_eq!(x, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn reflected_member_is_flipped_back() {
        let g = tridiagonal(4);
        let sk = Skeleton { members: vec![1, 2], labels: vec![1, 0, 1, 2] };
        // Member 2 covers rows 1, 2, 3 and is supplied mirrored and shifted.
        let x = flesh_to_body(&g, &sk, &[vec![0.0, 1.0, 2.0], vec![7.0, 6.0, 5.0]]).unwrap();
        assert_eq!(x, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn tridiagonal_chain_gives_optimal_order() {
        let d = 9;
        let g = tridiagonal(d);
        let members: Vec<usize> = (1..d - 1).collect();
        let sk = Skeleton { members: members.clone(), labels: (0..d).map(|i| i.abs_diff(1)).collect() };
        let local: Vec<Vec<f64>> = members
            .iter()
            .enumerate()
            .map(|(q, _)| if q % 2 == 0 { vec![-1.0, 0.0, 1.0] } else { vec![1.0, 0.0, -1.0] })
            .collect();
        let x = flesh_to_body(&g, &sk, &local).unwrap();
        let pi = configuration_to_permutation(&x).unwrap();
        assert!(pi == Permutation::identity(d) || pi == Permutation::identity(d).reversed());
    }

    #[test]
    fn missing_overlap_is_reported() {
        let g = NeighborGraph::from_edges(4, [(0, 1), (2, 3), (1, 2)]).unwrap();
        let sk = Skeleton { members: vec![0, 3], labels: vec![0, 1, 2, 3] };
        let r = flesh_to_body(&g, &sk, &[vec![0.0, 1.0], vec![0.0, 1.0]]);
        assert!(matches!(r, Err(Error::AlignmentImpossible { step: 2 })));
    }

    #[test]
    fn uncovered_row_is_reported() {
        let g = tridiagonal(4);
        let sk = Skeleton { members: vec![1], labels: vec![1, 0, 1, 2] };
        let r = flesh_to_body(&g, &sk, &[vec![0.0, 1.0, 2.0]]);
        assert!(matches!(r, Err(Error::IncompleteConfiguration(3))));
    }
}
