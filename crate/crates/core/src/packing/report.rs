use super::distance::symm_diff_distance;
use super::graph::{t_order, NeighborGraph, Permutation};

/// Width statistics of a graph under a permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingReport {
    /// `l_i = max_{j ∈ D_i} |π(i) - π(j)|`.
    pub half_widths: Vec<usize>,
    pub half_width_l1: usize,
    pub half_bandwidth: usize,
    /// `η_i = |D_i| / (2 l_i + 1)`.
    pub densities: Vec<f64>,
    pub mean_density: f64,
    /// Fill of `Σ(s)` within the band of half-width `s·λ` around the diagonal.
    pub fill: f64,
    pub order: usize,
    /// `(m, δ_m)` when requested.
    pub delta: Option<(usize, f64)>,
}

pub fn half_widths(graph: &NeighborGraph, pi: &Permutation) -> Vec<usize> {
    (0..graph.dim())
        .map(|i| {
            graph
                .neighbors(i)
                .iter()
                .map(|&j| pi.apply(i).abs_diff(pi.apply(j)))
                .max()
                .unwrap_or(0)
        })
        .collect()
}

/// Statistics of `graph` under `pi`; `δ_m` is evaluated when `m` is given.
pub fn report_stats(graph: &NeighborGraph, pi: &Permutation, m: Option<usize>, s: usize) -> PackingReport {
    let d = graph.dim();
    let l = half_widths(graph, pi);
    let densities: Vec<f64> = (0..d)
        .map(|i| graph.degree(i) as f64 / (2 * l[i] + 1) as f64)
        .collect();
    let lambda = l.iter().copied().max().unwrap_or(0);
    let reach = s.max(1) * lambda;
    let band_cells: usize = (0..d).map(|p| p.min(reach) + (d - 1 - p).min(reach) + 1).sum();
    let powered_nnz = if s <= 1 { graph.nnz() } else { t_order(graph, s).nnz() };
    PackingReport {
        half_width_l1: l.iter().sum(),
        half_bandwidth: lambda,
        mean_density: if d == 0 { 0.0 } else { densities.iter().sum::<f64>() / d as f64 },
        densities,
        fill: if band_cells == 0 { 0.0 } else { powered_nnz as f64 / band_cells as f64 },
        order: s,
        delta: m.map(|m| (m, delta_m(graph, pi, m))),
        half_widths: l,
    }
}

/// `δ_m = (1/(d m)) Σ_{|π(i)-π(j)| ≤ m} |G[i, j] - A[i, j]|`.
fn delta_m(graph: &NeighborGraph, pi: &Permutation, m: usize) -> f64 {
    let d = graph.dim();
    if d == 0 || m == 0 {
        return 0.0;
    }
    let a = symm_diff_distance(graph);
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            let g = pi.apply(i).abs_diff(pi.apply(j));
            if g <= m {
                sum += (g as f64 - a[(i, j)]).abs();
            }
        }
    }
    sum / (d * m) as f64
}

/// Bound on `|G[i, j] - A[i, j]|` for a pair with
/// `|l_i - l_j| <= G[i, j] <= l_i + l_j`; `None` when that premise fails.
pub fn pair_bound(graph: &NeighborGraph, pi: &Permutation, l: &[usize], i: usize, j: usize) -> Option<f64> {
    let g = pi.apply(i).abs_diff(pi.apply(j));
    if i == j || g < l[i].abs_diff(l[j]) || g > l[i] + l[j] {
        return None;
    }
    let excess = |r: usize| (2 * l[r] + 1) as f64 - graph.degree(r) as f64;
    Some((excess(i) + excess(j)) / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    /// Upper bound on `δ_d` valid when every pair meets the premise.
    pub q: f64,
    pub delta_d: f64,
    pub m: usize,
    /// Upper bound on `δ_m` valid when pairs within distance `m` meet the premise.
    pub average_bound: f64,
    pub delta_m: f64,
    pub qualifying_pairs: usize,
    /// Qualifying pairs whose error exceeds the per-pair bound.
    pub violations: usize,
}

pub fn bounds_diagnostics(graph: &NeighborGraph, pi: &Permutation, m: usize) -> BoundsReport {
    let d = graph.dim();
    let df = d as f64;
    let l = half_widths(graph, pi);
    let l1: usize = l.iter().sum();
    let deg_sum: usize = graph.nnz();
    let q = if d == 0 {
        0.0
    } else {
        (2.0 * (df - 1.0) * l1 as f64 + df * (df - 1.0) - (df - 1.0) * deg_sum as f64) / (df * df)
    };

    let mf = m.max(1) as f64;
    let excess = |i: usize| (2 * l[i] + 1) as f64 - graph.degree(i) as f64;
    let mut edge = 0.0;
    for i in 0..d {
        let p = pi.apply(i) + 1;
        if p <= m {
            edge += (mf + 1.0 - p as f64) / mf * excess(i);
        }
        if p + m > d {
            edge += (mf - df + p as f64) / mf * excess(i);
        }
    }
    let average_bound = if d == 0 {
        0.0
    } else {
        4.0 * l1 as f64 / df + 2.0 * (df - deg_sum as f64) / df - edge / df
    };

    let a = symm_diff_distance(graph);
    let (mut sum_d, mut sum_m, mut qualifying, mut violations) = (0.0, 0.0, 0, 0);
    for i in 0..d {
        for j in 0..d {
            let g = pi.apply(i).abs_diff(pi.apply(j));
            let err = (g as f64 - a[(i, j)]).abs();
            sum_d += err;
            if g <= m {
                sum_m += err;
            }
            if let Some(b) = pair_bound(graph, pi, &l, i, j) {
                qualifying += 1;
                if err > b + 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    BoundsReport {
        q,
        delta_d: if d == 0 { 0.0 } else { sum_d / (df * df) },
        m,
        average_bound,
        delta_m: if d == 0 || m == 0 { 0.0 } else { sum_m / (df * mf) },
        qualifying_pairs: qualifying,
        violations,
    }
}

/// Fraction of nonzeros inside the block tridiagonal band of block size `k`
/// after packing.
pub fn block_tridiagonal_fraction(graph: &NeighborGraph, pi: &Permutation, k: usize) -> f64 {
    let k = k.max(1);
    let total = graph.nnz();
    if total == 0 {
        return 1.0;
    }
    let inside: usize = (0..graph.dim())
        .map(|i| {
            graph
                .neighbors(i)
                .iter()
                .filter(|&&j| (pi.apply(i) / k).abs_diff(pi.apply(j) / k) <= 1)
                .count()
        })
        .sum();
    inside as f64 / total as f64
}
