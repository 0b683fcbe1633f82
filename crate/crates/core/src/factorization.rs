//! Sequential orthogonalization of symmetrically dyadic positive-definite matrices.
//!
//! [`sequential_orthogonalize`] returns a vertically dyadic `P` with `PᵀΣP = I`.
//! It sweeps the pyramid level by level; within a level every node is handled
//! independently. For node `b` at level `l` the sweep forms
//!
//! * `Σ̌`, the blocks `Σ[a, b]` for `a` in the span of `b` without `b`,
//! * `Σ̌' = Pᵀ Σ̌` and `A = P Σ̌'` over the already finished lower levels,
//! * `Σ̃ = Σ[b, b] - Σ̌'ᵀ Σ̌'` and `G = G(Σ̃)`,
//!
//! and sets `P[b, b] = G`, `P[a, b] = -A[a] G`.
//!
//! When every block of `Σ` more than one step off the diagonal vanishes, `Σ̌`
//! only has the two blocks next to `b`, and the products touch ancestor chains
//! instead of whole spans.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dyadic_index::{
    level_of, level_positions, span_of, ancestor_at, BlockSparsityPattern, DyadicKind,
    DyadicPattern,
};
use crate::dyadic_matrix::{
    ed_times_diag, gram_ed, multiply_patterned, multiply_patterned_band, multiply_vd_vdt,
    DenseBlock, DiagonalMatrix, DyadicMatrix, ElongatedMatrix, FlopCounter, IncompleteOperand,
};
use crate::error::{Error, Result};

pub const TAU_ORTH: f64 = 1e-8;
pub const TAU_INV: f64 = 1e-6;
pub const TAU_SOLVE: f64 = 1e-8;

/// Largest dimension for which dense diagnostics are computed.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FastPath {
    /// Use the band path when `Σ` is block-tridiagonal.
    #[default]
    Auto,
    /// Require the band path; fails on matrices that are not block-tridiagonal.
    On,
    Off,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FactorOptions {
    pub fast_path: FastPath,
    /// Record the supports of the per-level intermediates.
    pub trace: bool,
}

/// Flops split by step of the sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseFlops {
    pub local_orthonormalize: FlopCounter,
    pub projection: FlopCounter,
    pub back_product: FlopCounter,
    pub schur: FlopCounter,
    pub update: FlopCounter,
}

impl PhaseFlops {
    pub fn total(&self) -> FlopCounter {
        self.local_orthonormalize + self.projection + self.back_product + self.schur + self.update
    }
}

/// Supports of the intermediates at one level, in elongated coordinates.
#[derive(Debug, Clone)]
pub struct LevelTrace {
    pub level: u32,
    pub sigma_check: BlockSparsityPattern,
    pub sigma_check_prime: BlockSparsityPattern,
    pub a: BlockSparsityPattern,
    pub sigma_tilde: BlockSparsityPattern,
}

#[derive(Debug, Clone)]
pub struct FactorResult {
    pub p: DyadicMatrix,
    pub flops: FlopCounter,
    pub phases: PhaseFlops,
    pub fast_path: bool,
    pub trace: Vec<LevelTrace>,
}

impl FactorResult {
    /// `‖PᵀΣP - I‖_max`, computed densely.
    pub fn residual(&self, sigma: &DyadicMatrix) -> Result<f64> {
        let d = sigma.dim();
        if d > DENSE_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "residual is only computed for d <= {DENSE_LIMIT}, got {d}"
            )));
        }
        let p = self.p.to_dense();
        let r = p.transpose() * sigma.to_dense() * p - DMatrix::identity(d, d);
        Ok(r.abs().max())
    }

    /// `x = P Pᵀ y`.
    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        let p = &self.p;
        let d = p.dim();
        if y.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, expected {d}",
                y.len()
            )));
        }
        let k = p.breadth();
        let nb = p.blocks_per_side();
        let seg = |v: &[f64], a: usize| v[(a - 1) * k..a * k].to_vec();
        let z: Vec<Vec<f64>> = (1..=nb)
            .into_par_iter()
            .map(|b| {
                let mut acc = vec![0.0; k];
                for a in span_of(b) {
                    p.block(a, b).expect("vertical").mat_t_vec_acc(&seg(y, a), &mut acc);
                }
                acc
            })
            .collect();
        let n = p.height();
        let x: Vec<Vec<f64>> = (1..=nb)
            .into_par_iter()
            .map(|a| {
                let mut acc = vec![0.0; k];
                for m in level_of(a)..=n {
                    let b = ancestor_at(a, m);
                    p.block(a, b).expect("vertical").mat_vec_acc(&z[b - 1], &mut acc);
                }
                acc
            })
            .collect();
        Ok(x.concat())
    }

    /// Dense `Σ⁻¹ = P Pᵀ`.
    pub fn inverse(&self, flops: &mut FlopCounter) -> Result<DMatrix<f64>> {
        multiply_vd_vdt(&self.p, &self.p, flops)
    }
}

/// `G = L⁻ᵀ` for the lower Cholesky factor `L` of `sigma`: upper triangular
/// with positive diagonal and `Gᵀ sigma G = I`. On failure returns the pivot.
fn cholesky_orthonormalizer(
    sigma: &DenseBlock,
    flops: &mut FlopCounter,
) -> std::result::Result<DenseBlock, f64> {
    let k = sigma.k();
    let mut l = DenseBlock::zeros(k);
    let mut ops = 0u64;
    for j in 0..k {
        let mut s = sigma.get(j, j);
        for p in 0..j {
            s -= l.get(j, p) * l.get(j, p);
        }
        ops += j as u64 + 1;
        if !(s > 0.0 && s.is_finite()) {
            flops.scalar_ops += ops;
            return Err(s);
        }
        let ljj = s.sqrt();
        l.set(j, j, ljj);
        for i in j + 1..k {
            let mut s = sigma.get(i, j);
            for p in 0..j {
                s -= l.get(i, p) * l.get(j, p);
            }
            l.set(i, j, s / ljj);
            ops += j as u64 + 1;
        }
    }
    // M = L⁻¹ by forward substitution, column by column.
    let mut m = DenseBlock::zeros(k);
    for j in 0..k {
        m.set(j, j, 1.0 / l.get(j, j));
        ops += 1;
        for i in j + 1..k {
            let mut s = 0.0;
            for p in j..i {
                s += l.get(i, p) * m.get(p, j);
            }
            m.set(i, j, -s / l.get(i, i));
            ops += (i - j) as u64 + 1;
        }
    }
    flops.scalar_ops += ops;
    Ok(m.transpose())
}

/// Orthonormalizer of a single `k x k` positive-definite gramian.
///
/// A failed pivot is reported as a definiteness error at node `(1, 1)`, the
/// only node of a one-block pyramid.
pub fn local_orthonormalize(sigma: &DenseBlock, flops: &mut FlopCounter) -> Result<DenseBlock> {
    cholesky_orthonormalizer(sigma, flops).map_err(|pivot| Error::Definiteness { r: 1, l: 1, pivot })
}

fn definiteness(b: usize, pivot: f64) -> Error {
    let l = level_of(b);
    Error::Definiteness {
        r: (b >> (l - 1)).div_ceil(2),
        l: l as usize,
        pivot,
    }
}

fn check_symmetric_input(sigma: &DyadicMatrix) -> Result<()> {
    if sigma.kind() != DyadicKind::Symmetric {
        return Err(Error::InvalidParameter(format!(
            "expected a symmetrically dyadic matrix, got {:?}",
            sigma.kind()
        )));
    }
    Ok(())
}

/// Computes `P` in `VD(N, k)` with `PᵀΣP = I`.
pub fn sequential_orthogonalize(sigma: &DyadicMatrix, opts: FactorOptions) -> Result<FactorResult> {
    check_symmetric_input(sigma)?;
    let n = sigma.height();
    let k = sigma.breadth();
    let tridiagonal = sigma.is_block_tridiagonal();
    let fast = match opts.fast_path {
        FastPath::Auto => tridiagonal,
        FastPath::Off => false,
        FastPath::On => {
            if !tridiagonal {
                return Err(Error::InvalidParameter(
                    "band path requested but the matrix is not block-tridiagonal".into(),
                ));
            }
            true
        }
    };
    let mut p = DyadicMatrix::zeros(DyadicPattern::vertical(n, k)?);
    let mut phases = PhaseFlops::default();
    let mut trace = Vec::new();

    let first = level_positions(n, 1)?;
    let gs = orthonormalize_all(
        first.iter().map(|&b| sigma.block(b, b).expect("diagonal").clone()).collect(),
        &first,
        &mut phases.local_orthonormalize,
    )?;
    for (b, g) in first.iter().zip(gs) {
        *p.block_mut(*b, *b).expect("diagonal") = g;
    }

    for l in 2..=n {
        let centres = level_positions(n, l)?;
        let mut check = ElongatedMatrix::empty(n, l, k)?;
        for (j, &b) in centres.iter().enumerate() {
            for a in span_of(b).filter(|&a| a != b) {
                if !fast || a.abs_diff(b) == 1 {
                    check.set(j + 1, a, Some(sigma.block(a, b).expect("column span").clone()))?;
                }
            }
        }
        let check_prime = if fast {
            multiply_patterned_band(
                IncompleteOperand::TransposedVertical(&p),
                &check,
                &mut phases.projection,
            )?
        } else {
            multiply_patterned(
                IncompleteOperand::TransposedVertical(&p),
                &check,
                &mut phases.projection,
            )?
        };
        let a = multiply_patterned(
            IncompleteOperand::Vertical(&p),
            &check_prime,
            &mut phases.back_product,
        )?;
        let gram = gram_ed(&check_prime, &mut phases.schur);
        let tilde: Vec<DenseBlock> = centres
            .iter()
            .zip(gram.blocks())
            .map(|(&b, g)| {
                let mut t = sigma.block(b, b).expect("diagonal").clone();
                t.sub_assign(g);
                t
            })
            .collect();
        phases.schur.block_adds += centres.len() as u64;
        if opts.trace {
            trace.push(LevelTrace {
                level: l,
                sigma_check: check.support(),
                sigma_check_prime: check_prime.support(),
                a: a.support(),
                sigma_tilde: BlockSparsityPattern::new(
                    centres.len(),
                    centres.len(),
                    k,
                    (1..=centres.len()).map(|j| (j, j)),
                )?,
            });
        }
        let gs = orthonormalize_all(tilde, &centres, &mut phases.local_orthonormalize)?;
        let neg_g = DiagonalMatrix::from_blocks(k, gs.iter().map(DenseBlock::neg).collect());
        phases.update.block_adds += centres.len() as u64;
        let update = ed_times_diag(&a, &neg_g, &mut phases.update)?;
        for (j, (&b, g)) in centres.iter().zip(gs).enumerate() {
            for (row, blk) in update.column_entries(j + 1) {
                *p.block_mut(row, b).expect("column span") = blk.clone();
            }
            *p.block_mut(b, b).expect("diagonal") = g;
        }
    }
    Ok(FactorResult {
        p,
        flops: phases.total(),
        phases,
        fast_path: fast,
        trace,
    })
}

fn orthonormalize_all(
    gramians: Vec<DenseBlock>,
    centres: &[usize],
    flops: &mut FlopCounter,
) -> Result<Vec<DenseBlock>> {
    let results: Vec<(std::result::Result<DenseBlock, f64>, FlopCounter)> = gramians
        .into_par_iter()
        .map(|g| {
            let mut f = FlopCounter::new();
            (cholesky_orthonormalizer(&g, &mut f), f)
        })
        .collect();
    let mut out = Vec::with_capacity(results.len());
    for ((res, f), &b) in results.into_iter().zip(centres) {
        flops.merge(&f);
        out.push(res.map_err(|pivot| definiteness(b, pivot))?);
    }
    Ok(out)
}

/// Dense inverse `Σ⁻¹ = P Pᵀ`.
pub fn invert(sigma: &DyadicMatrix, opts: FactorOptions) -> Result<(DMatrix<f64>, FactorResult)> {
    let mut fact = sequential_orthogonalize(sigma, opts)?;
    let mut f = FlopCounter::new();
    let inv = fact.inverse(&mut f)?;
    fact.flops.merge(&f);
    Ok((inv, fact))
}

/// Solves `Σ x = y`.
pub fn solve(sigma: &DyadicMatrix, y: &[f64], opts: FactorOptions) -> Result<Vec<f64>> {
    if y.len() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, expected {}",
            y.len(),
            sigma.dim()
        )));
    }
    sequential_orthogonalize(sigma, opts)?.solve(y)
}

/// `R = Pᵀ Σ`, the inverse of `P`, stored on the vertical pattern.
///
/// Blocks of `PᵀΣ` that fall outside the vertical pattern are computed and must
/// vanish relative to the size of `R`; otherwise `P` does not factor `Σ`.
pub fn factor_r(sigma: &DyadicMatrix, p: &DyadicMatrix) -> Result<DyadicMatrix> {
    check_symmetric_input(sigma)?;
    if p.kind() != DyadicKind::Vertical
        || p.height() != sigma.height()
        || p.breadth() != sigma.breadth()
    {
        return Err(Error::DimensionMismatch(
            "P must be vertically dyadic with the shape of Σ".into(),
        ));
    }
    let n = sigma.height();
    let k = sigma.breadth();
    // (PᵀΣ)[a, b] = Σ_{c ∈ span(a)} P[c, a]ᵀ Σ[c, b]
    let entry = |a: usize, b: usize, cs: &mut dyn Iterator<Item = usize>| {
        let mut acc = DenseBlock::zeros(k);
        let span = span_of(a);
        for c in cs.filter(|c| span.contains(c)) {
            if let Some(s) = sigma.block(c, b) {
                acc.mul_acc_tn(p.block(c, a).expect("vertical"), s);
            }
        }
        acc
    };
    let r = DyadicMatrix::from_block_fn(p.pattern(), |a, b| entry(a, b, &mut span_of(a)));
    let scale = r.max_abs().max(1.0);
    let worst = (1..=sigma.blocks_per_side())
        .into_par_iter()
        .map(|b| {
            let mut worst = 0.0f64;
            for m in level_of(b) + 1..=n {
                let a = ancestor_at(b, m);
                // Σ[c, b] can only be nonzero for c in span(b) or c an ancestor of b.
                let mut cs = span_of(b).chain((level_of(b) + 1..m).map(|q| ancestor_at(b, q))).chain([a]);
                worst = worst.max(entry(a, b, &mut cs).max_abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    if worst > TAU_ORTH * scale {
        return Err(Error::Consistency(format!(
            "PᵀΣ has a block of size {worst:e} outside the vertical pattern"
        )));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `Σ = RᵀR` for random well-conditioned vertical `R`.
    pub(crate) fn random_spd(n: u32, k: usize, rng: &mut ChaCha8Rng) -> DyadicMatrix {
        let pat = DyadicPattern::vertical(n, k).unwrap();
        let r = DyadicMatrix::from_block_fn(pat, |i, j| {
            DenseBlock::from_fn(k, |a, b| {
                let mut v: f64 = rng.random_range(-1.0..1.0);
                if i == j && a == b {
                    v += 2.0 * (k as f64).sqrt() + 2.0;
                }
                v
            })
        });
        let rd = r.to_dense();
        DyadicMatrix::from_dense(&(rd.transpose() * rd), DyadicPattern::symmetric(n, k).unwrap())
            .unwrap()
    }

    #[test]
    fn orthonormalizer_examples() {
        let g = local_orthonormalize(&DenseBlock::identity(3), &mut FlopCounter::new()).unwrap();
        assert_eq!(g, DenseBlock::identity(3));
        let g = local_orthonormalize(
            &DenseBlock::from_row_major(1, vec![4.0]),
            &mut FlopCounter::new(),
        )
        .unwrap();
        assert_eq!(g.get(0, 0), 0.5);
        let bad = DenseBlock::from_row_major(2, vec![1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            local_orthonormalize(&bad, &mut FlopCounter::new()),
            Err(Error::Definiteness { .. })
        ));
    }

    #[test]
    fn orthonormalizer_is_upper_triangular_and_whitens() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
        let s = f.transpose() * &f + DMatrix::identity(5, 5);
        let blk = DenseBlock::from_fn(5, |i, j| s[(i, j)]);
        let g = local_orthonormalize(&blk, &mut FlopCounter::new()).unwrap();
        let gd = DMatrix::from_fn(5, 5, |i, j| g.get(i, j));
        assert!((gd.transpose() * &s * &gd - DMatrix::identity(5, 5)).abs().max() <= 1e-12);
        for i in 0..5 {
            assert!(g.get(i, i) > 0.0);
            for j in 0..i {
                assert_eq!(g.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn identity_factors_to_identity() {
        let pat = DyadicPattern::symmetric(3, 2).unwrap();
        let f = sequential_orthogonalize(&DyadicMatrix::identity(pat), FactorOptions::default()).unwrap();
        assert_eq!(f.p.to_dense(), DMatrix::identity(14, 14));
    }

    #[test]
    fn random_instances_orthogonalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (n, k) in [(1, 3), (2, 1), (3, 2), (4, 3), (5, 1)] {
            let s = random_spd(n, k, &mut rng);
            let f = sequential_orthogonalize(&s, FactorOptions { fast_path: FastPath::Off, trace: false })
                .unwrap();
            assert!(f.residual(&s).unwrap() <= 1e-9, "N={n} k={k}");
            assert!(!f.fast_path);
        }
    }

    #[test]
    fn trace_supports_follow_the_patterns() {
        use crate::dyadic_index::{DerivedKind, DerivedPattern};
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random_spd(4, 2, &mut rng);
        let f = sequential_orthogonalize(&s, FactorOptions { fast_path: FastPath::Off, trace: true })
            .unwrap();
        assert_eq!(f.trace.len(), 3);
        for t in &f.trace {
            let ed = DerivedPattern::new(DerivedKind::Elongated, 4, t.level, 2).unwrap().materialize();
            let d = DerivedPattern::new(DerivedKind::Diagonal, 4, t.level, 2).unwrap().materialize();
            assert!(t.sigma_check.is_subset_of(&ed));
            assert!(t.sigma_check_prime.is_subset_of(&ed));
            assert!(t.a.is_subset_of(&ed));
            assert_eq!(t.sigma_tilde, d);
        }
    }

    #[test]
    fn definiteness_error_names_the_node() {
        let pat = DyadicPattern::symmetric(2, 1).unwrap();
        let mut s = DyadicMatrix::identity(pat);
        *s.block_mut(1, 2).unwrap() = DenseBlock::from_row_major(1, vec![1.0]);
        *s.block_mut(2, 1).unwrap() = DenseBlock::from_row_major(1, vec![1.0]);
        match sequential_orthogonalize(&s, FactorOptions::default()) {
            Err(Error::Definiteness { r, l, .. }) => assert_eq!((r, l), (1, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scalar_diagonal_inverse() {
        let pat = DyadicPattern::symmetric(3, 1).unwrap();
        let s = DyadicMatrix::from_dense(&(DMatrix::identity(7, 7) * 2.0), pat).unwrap();
        let (inv, _) = invert(&s, FactorOptions::default()).unwrap();
        assert!((inv - DMatrix::identity(7, 7) * 0.5).abs().max() <= 1e-15);
    }

    #[test]
    fn factor_r_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = random_spd(3, 2, &mut rng);
        let f = sequential_orthogonalize(&s, FactorOptions::default()).unwrap();
        let r = factor_r(&s, &f.p).unwrap();
        let rd = r.to_dense();
        assert!((rd.transpose() * &rd - s.to_dense()).abs().max() <= 1e-9);
        assert!((&rd * f.p.to_dense() - DMatrix::identity(14, 14)).abs().max() <= 1e-9);
        let wrong = DyadicMatrix::identity(DyadicPattern::vertical(3, 2).unwrap());
        assert!(matches!(factor_r(&s, &wrong), Err(Error::Consistency(_))));
    }

    #[test]
    fn solve_identity_and_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let id = DyadicMatrix::identity(DyadicPattern::symmetric(3, 1).unwrap());
        let y: Vec<f64> = (0..7).map(|i| i as f64).collect();
        assert_eq!(solve(&id, &y, FactorOptions::default()).unwrap(), y);
        let s = random_spd(4, 2, &mut rng);
        let y: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = solve(&s, &y, FactorOptions::default()).unwrap();
        let r = s.to_dense() * DMatrix::from_column_slice(30, 1, &x) - DMatrix::from_column_slice(30, 1, &y);
        assert!(r.abs().max() <= 1e-8);
        assert!(solve(&s, &y[..5], FactorOptions::default()).is_err());
    }

    #[test]
    fn fast_path_requires_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let s = random_spd(3, 1, &mut rng);
        let opts = FactorOptions { fast_path: FastPath::On, trace: false };
        assert!(matches!(sequential_orthogonalize(&s, opts), Err(Error::InvalidParameter(_))));
    }
}
