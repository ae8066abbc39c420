//! Restriction of fields to subspaces and pointwise span membership.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::cdspace::project_slice;
use crate::dynamics::VectorField;
use crate::error::{OmegaError, Result};
use crate::linalg::{numerical_rank, DEFAULT_RANK_TOL};

/// `x ↦ Π^n_m F(Π^m_n x)` for a field `F` on `ℝ^n`.
pub fn restrict_field(f: VectorField, n: usize, m: usize) -> VectorField {
    if n == m {
        return f;
    }
    Arc::new(move |x: &[f64]| project_slice(&f(&project_slice(x, n)), m))
}

/// Whether `v` lies in the span of `basis` up to `tol · max(1, ‖v‖)`.
pub fn in_span(v: &[f64], basis: &[Vec<f64>], tol: f64) -> Result<bool> {
    let n = v.len();
    if basis.iter().any(|b| b.len() != n) {
        return Err(OmegaError::invalid(
            "basis vectors must match the vector length",
        ));
    }
    let vn = DVector::from_column_slice(v);
    let scale = vn.norm().max(1.0);
    if basis.is_empty() {
        return Ok(vn.norm() <= tol * scale);
    }
    let m = DMatrix::from_fn(n, basis.len(), |i, j| basis[j][i]);
    if numerical_rank(&m, DEFAULT_RANK_TOL) < basis.len() {
        return Err(OmegaError::invalid(
            "basis is linearly dependent at this point",
        ));
    }
    let coeffs = m
        .clone()
        .svd(true, true)
        .solve(&vn, 0.0)
        .map_err(|e| OmegaError::numeric("span_membership", e))?;
    Ok((&m * coeffs - vn).norm() <= tol * scale)
}

/// A vector-valued evaluator borrowed for a single check.
pub type Evaluator<'a> = &'a dyn Fn(&[f64]) -> Vec<f64>;

/// [`in_span`] with the vector and basis given as evaluators at `x`.
pub fn span_membership(
    v: Evaluator<'_>,
    basis: &[Evaluator<'_>],
    x: &[f64],
    tol: f64,
) -> Result<bool> {
    let b: Vec<Vec<f64>> = basis.iter().map(|f| f(x)).collect();
    in_span(&v(x), &b, tol)
}
