//! Dimension-keeping semi-tensor product (DK-STP) of matrices.
//!
//! For `M ∈ ℳ_{m×n}` and `N ∈ ℳ_{p×q}` with `t = lcm(n, p)`,
//! `M ⋉ N = (n/t)(M ⊗ 1ᵀ_{t/n})(N ⊗ 1_{t/p}) ∈ ℳ_{m×q}`. The product is
//! defined for every pair of shapes and reduces to `MN` when `n = p`.

use nalgebra::DMatrix;
use num_integer::Integer;

use crate::error::Result;
use crate::linalg::{lambda_max_psd, ones, EigenConfig};

/// Dense real matrix; shapes are checked by the operations that need them.
pub type DimMatrix = DMatrix<f64>;

/// Whether the `n/t` weight is applied (the default) or dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    Weighted,
    /// Raw `(M ⊗ 1ᵀ)(N ⊗ 1)`; diagnostics only, it is not associative with
    /// the weighted product.
    Unweighted,
}

/// Bridge matrix `Ψ_{n×p} = (n/t)(I_n ⊗ 1ᵀ_{t/n})(I_p ⊗ 1_{t/p})`.
///
/// Built from explicit Kronecker factors; it coincides with the projector
/// `Π^p_n` entry for entry.
pub fn bridge(n: usize, p: usize) -> DimMatrix {
    assert!(n >= 1 && p >= 1, "bridge dimensions must be positive");
    let t = n.lcm(&p);
    let left = DMatrix::<f64>::identity(n, n).kronecker(&ones(t / n).transpose());
    let right = DMatrix::<f64>::identity(p, p).kronecker(&ones(t / p));
    let scale = n as f64 / t as f64;
    (left * right).map(|v| scale * v)
}

/// `M ⋉ N` (weighted DK-STP).
pub fn dk_product(m: &DimMatrix, n: &DimMatrix) -> DimMatrix {
    dk_product_with(m, n, Weighting::Weighted)
}

pub fn dk_product_with(m: &DimMatrix, n: &DimMatrix, weighting: Weighting) -> DimMatrix {
    let (cols, rows) = (m.ncols(), n.nrows());
    if cols == rows {
        return m * n;
    }
    let t = cols.lcm(&rows);
    let left = m.kronecker(&ones(t / cols).transpose());
    let right = n.kronecker(&ones(t / rows));
    let product = left * right;
    match weighting {
        Weighting::Weighted => product * (cols as f64 / t as f64),
        Weighting::Unweighted => product,
    }
}

/// `‖A‖_V = √((cols/rows)·λ_max(AᵀA))`, the operator norm of `x ↦ A ⋉ x` in
/// the V-norm.
pub fn op_vnorm(a: &DimMatrix) -> Result<f64> {
    op_vnorm_with(a, &EigenConfig::default())
}

pub fn op_vnorm_with(a: &DimMatrix, cfg: &EigenConfig) -> Result<f64> {
    let gram = a.transpose() * a;
    let lambda = lambda_max_psd(&gram, cfg)?;
    Ok((a.ncols() as f64 / a.nrows() as f64 * lambda).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdspace::projector;
    use crate::error::OmegaError;

    #[test]
    fn bridge_examples() {
        assert_eq!(bridge(2, 4), projector(4, 2).into_matrix());
        assert_eq!(bridge(5, 5), DMatrix::identity(5, 5));
        let expected = DMatrix::from_row_slice(2, 3, &[2. / 3., 1. / 3., 0., 0., 1. / 3., 2. / 3.]);
        assert!((bridge(2, 3) - expected).amax() < 1e-15);
    }

    #[test]
    fn dk_product_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[1., 2., 3., 4.]);
        let b = DMatrix::from_row_slice(2, 2, &[0., 1., -1., 2.]);
        assert_eq!(dk_product(&a, &b), &a * &b);

        let row = DMatrix::from_row_slice(1, 2, &[1., 2.]);
        let col = DMatrix::from_element(3, 1, 1.0);
        assert!((dk_product(&row, &col)[(0, 0)] - 3.0).abs() < 1e-14);

        let row = DMatrix::from_row_slice(1, 2, &[1., 1.]);
        assert!((dk_product(&row, &col)[(0, 0)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn unweighted_drops_the_factor() {
        let row = DMatrix::from_row_slice(1, 2, &[1., 2.]);
        let col = DMatrix::from_element(3, 1, 1.0);
        // (1,1,1,2,2,2)·1₆ = 9, weight 2/6
        let raw = dk_product_with(&row, &col, Weighting::Unweighted);
        assert_eq!(raw[(0, 0)], 9.0);
    }

    #[test]
    fn op_vnorm_examples() {
        assert!((op_vnorm(&DMatrix::identity(4, 4)).unwrap() - 1.0).abs() < 1e-12);
        assert!((op_vnorm(&DMatrix::from_element(1, 1, 2.0)).unwrap() - 2.0).abs() < 1e-12);
        let p = projector(4, 2).into_matrix();
        assert!((op_vnorm(&p).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn op_vnorm_failure_path() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.999_999_9]);
        let cfg = EigenConfig {
            tolerance: 1e-18,
            max_iterations: 2,
            jacobi_fallback: false,
        };
        assert!(matches!(
            op_vnorm_with(&a, &cfg),
            Err(OmegaError::NumericFailure { .. })
        ));
    }
}
