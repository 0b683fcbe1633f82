use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// One-dimensional classical scaling: `x = sqrt(λ₁)·v₁` for the leading
/// eigenpair of `B = -H K H / 2`, where `K` holds squared distances and `H`
/// is the centring projector.
pub fn local_mds(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let m = a.nrows();
    if a.ncols() != m {
        return Err(Error::DimensionMismatch(format!("{}x{} distance matrix", m, a.ncols())));
    }
    if m <= 1 {
        return Ok(vec![0.0; m]);
    }
    let k = a.map(|v| v * v);
    let row_means: Vec<f64> = (0..m).map(|i| k.row(i).sum() / m as f64).collect();
    let grand = row_means.iter().sum::<f64>() / m as f64;
    let b = DMatrix::from_fn(m, m, |i, j| -0.5 * (k[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let (top, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .unwrap();
    let scale = k.amax().max(f64::MIN_POSITIVE);
    if lambda <= 1e-12 * scale {
        return Err(Error::DegenerateConfiguration(lambda));
    }
    let v = eig.eigenvectors.column(top);
    let root = lambda.sqrt();
    Ok(v.iter().map(|&c| root * c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn points_matrix(x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(x.len(), x.len(), |i, j| (x[i] - x[j]).abs())
    }

    #[test]
    fn hand_example() {
        let x = local_mds(&points_matrix(&[0.0, 1.0, 2.0])).unwrap();
        let s = x[0].signum();
        for (got, want) in x.iter().zip([1.0, 0.0, -1.0]) {
            assert!((got - s * want).abs() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn single_point() {
        assert_eq!(local_mds(&DMatrix::zeros(1, 1)).unwrap(), vec![0.0]);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        assert!(matches!(
            local_mds(&DMatrix::zeros(3, 3)),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    proptest! {
        #[test]
        fn collinear_points_reproduced(x in proptest::collection::vec(-50.0f64..50.0, 2..20)) {
            prop_assume!(x.iter().any(|&v| (v - x[0]).abs() > 1e-3));
            let g = points_matrix(&x);
            let y = local_mds(&g).unwrap();
            prop_assert!((points_matrix(&y) - g).amax() <= 1e-8);
        }
    }
}
