//! The cross-dimensional Euclidean space Ω.
//!
//! A [`CdVector`] is any real vector; two vectors are equivalent when
//! Kronecker products with all-ones vectors make them equal. Inner product,
//! norm and distance are computed on the lcm-dimension lift and normalised by
//! that dimension, so they are constant on equivalence classes.

mod lattice;

pub use lattice::{build_lattice, LatticeClosure, SubspaceLattice};

use nalgebra::{DMatrix, DVector};
use num_integer::Integer;

use crate::error::{OmegaError, Result};

/// Relative tolerance used when reducing a vector to its canonical form.
pub const DEFAULT_REDUCTION_TOL: f64 = 1e-9;

/// Absolute floor for the block-constancy test.
pub const REDUCTION_ABS_FLOOR: f64 = 1e-12;

/// A representative of an element of Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct CdVector {
    entries: Vec<f64>,
}

impl CdVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(OmegaError::invalid(
                "a vector in Ω needs at least one entry",
            ));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(OmegaError::invalid(format!("entry {i} is not finite")));
        }
        Ok(CdVector { entries })
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        CdVector {
            entries: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.entries)
    }

    /// `self ⊗ 1_k`.
    pub fn kron_ones(&self, k: usize) -> CdVector {
        assert!(k >= 1, "multiplier must be positive");
        CdVector {
            entries: self
                .entries
                .iter()
                .flat_map(|&v| std::iter::repeat_n(v, k))
                .collect(),
        }
    }

    /// Lifts into `ℝ^t`; `t` must be a multiple of the current dimension.
    pub fn lift_to(&self, t: usize) -> Result<CdVector> {
        if t == 0 || !t.is_multiple_of(self.dim()) {
            return Err(OmegaError::invalid(format!(
                "cannot lift a {}-vector to dimension {t}",
                self.dim()
            )));
        }
        Ok(self.kron_ones(t / self.dim()))
    }

    /// Scalar multiple.
    pub fn scale(&self, c: f64) -> CdVector {
        CdVector {
            entries: self.entries.iter().map(|v| c * v).collect(),
        }
    }

    /// Canonical (minimal-dimension) representative, see [`canonicalize`].
    pub fn canonical(&self, tol: f64) -> CdVector {
        reduce(&self.entries, tol)
    }

    pub fn is_canonical(&self, tol: f64) -> bool {
        self.canonical(tol).dim() == self.dim()
    }
}

impl From<DVector<f64>> for CdVector {
    fn from(v: DVector<f64>) -> Self {
        assert!(!v.is_empty(), "a vector in Ω needs at least one entry");
        CdVector {
            entries: v.as_slice().to_vec(),
        }
    }
}

fn block_constant(v: &[f64], block: usize, threshold: f64) -> bool {
    v.chunks(block)
        .all(|c| c.iter().all(|&x| (x - c[0]).abs() <= threshold))
}

fn reduce(v: &[f64], tol: f64) -> CdVector {
    let n = v.len();
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let threshold = (tol * scale).max(REDUCTION_ABS_FLOOR);
    // ascending divisors: the first hit is the minimal representative
    for d in (1..n).filter(|d| n.is_multiple_of(*d)) {
        let block = n / d;
        if block_constant(v, block, threshold) {
            return CdVector {
                entries: v
                    .chunks(block)
                    .map(|c| c.iter().sum::<f64>() / block as f64)
                    .collect(),
            };
        }
    }
    CdVector {
        entries: v.to_vec(),
    }
}

/// Least-dimension `z` with `v = z ⊗ 1_{dim v / dim z}` (within `tol`).
pub fn canonicalize(v: &[f64], tol: f64) -> Result<CdVector> {
    let v = CdVector::from_slice(v)?;
    Ok(v.canonical(tol))
}

/// `x ↔ y` up to the reduction tolerance.
pub fn equivalent(x: &CdVector, y: &CdVector, tol: f64) -> bool {
    let cx = x.canonical(tol);
    let cy = y.canonical(tol);
    if cx.dim() != cy.dim() {
        return false;
    }
    let scale = cx
        .entries
        .iter()
        .chain(&cy.entries)
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let threshold = (tol * scale).max(REDUCTION_ABS_FLOOR);
    cx.entries
        .iter()
        .zip(&cy.entries)
        .all(|(a, b)| (a - b).abs() <= threshold)
}

/// Canonical forms of both operands when their dimensions differ; keeps the
/// lcm small for the mixed-dimension operations.
fn aligned<'a>(
    x: &'a CdVector,
    y: &'a CdVector,
) -> (
    std::borrow::Cow<'a, CdVector>,
    std::borrow::Cow<'a, CdVector>,
) {
    use std::borrow::Cow;
    if x.dim() == y.dim() {
        (Cow::Borrowed(x), Cow::Borrowed(y))
    } else {
        (
            Cow::Owned(x.canonical(DEFAULT_REDUCTION_TOL)),
            Cow::Owned(y.canonical(DEFAULT_REDUCTION_TOL)),
        )
    }
}

/// Iterates the pairs `(x⊗1)_i, (y⊗1)_i` over the lcm dimension.
fn lifted_pairs<'a>(x: &'a [f64], y: &'a [f64]) -> (usize, impl Iterator<Item = (f64, f64)> + 'a) {
    let t = x.len().lcm(&y.len());
    let (bx, by) = (t / x.len(), t / y.len());
    (t, (0..t).map(move |i| (x[i / bx], y[i / by])))
}

/// Semi-tensor sum: both operands lifted to `ℝ^{lcm}` and added.
pub fn stp_add(x: &CdVector, y: &CdVector) -> CdVector {
    let (_, pairs) = lifted_pairs(&x.entries, &y.entries);
    CdVector {
        entries: pairs.map(|(a, b)| a + b).collect(),
    }
}

/// Semi-tensor difference `x - y`.
pub fn stp_sub(x: &CdVector, y: &CdVector) -> CdVector {
    let (_, pairs) = lifted_pairs(&x.entries, &y.entries);
    CdVector {
        entries: pairs.map(|(a, b)| a - b).collect(),
    }
}

/// `⟨x, y⟩_V`.
pub fn v_inner(x: &CdVector, y: &CdVector) -> f64 {
    let (x, y) = aligned(x, y);
    let (t, pairs) = lifted_pairs(&x.entries, &y.entries);
    pairs.map(|(a, b)| a * b).sum::<f64>() / t as f64
}

/// `‖x‖_V = ‖x‖₂ / √dim`.
pub fn v_norm(x: &CdVector) -> f64 {
    let sq: f64 = x.entries.iter().map(|v| v * v).sum();
    (sq / x.dim() as f64).sqrt()
}

/// `d_V(x, y) = ‖x - y‖_V`.
pub fn v_dist(x: &CdVector, y: &CdVector) -> f64 {
    let (x, y) = aligned(x, y);
    let (t, pairs) = lifted_pairs(&x.entries, &y.entries);
    let sq: f64 = pairs.map(|(a, b)| (a - b) * (a - b)).sum();
    (sq / t as f64).sqrt()
}

/// Angle between two elements of Ω, in radians.
pub fn angle(x: &CdVector, y: &CdVector) -> Result<f64> {
    let (nx, ny) = (v_norm(x), v_norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(OmegaError::invalid(
            "angle with a zero-norm vector is undefined",
        ));
    }
    let cos = (v_inner(x, y) / (nx * ny)).clamp(-1.0, 1.0);
    Ok(cos.acos())
}

/// The least-squares map `Π^n_m : ℝ^n → ℝ^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    source_dim: usize,
    target_dim: usize,
    matrix: DMatrix<f64>,
}

impl Projector {
    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    /// The `m × n` matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn apply(&self, x: &CdVector) -> Result<CdVector> {
        if x.dim() != self.source_dim {
            return Err(OmegaError::invalid(format!(
                "projector expects dimension {}, got {}",
                self.source_dim,
                x.dim()
            )));
        }
        Ok((&self.matrix * x.to_dvector()).into())
    }
}

/// `Π^n_m = (m/t)(I_m ⊗ 1ᵀ_{t/m})(I_n ⊗ 1_{t/n})`, `t = lcm(m, n)`.
///
/// Row `i` averages the source coordinates whose lifted blocks overlap the
/// `i`-th lifted target block; entries are `(m/t)·overlap`.
pub fn projector(n: usize, m: usize) -> Projector {
    assert!(n >= 1 && m >= 1, "projector dimensions must be positive");
    let t = n.lcm(&m);
    let (bm, bn) = (t / m, t / n);
    let scale = m as f64 / t as f64;
    let matrix = DMatrix::from_fn(m, n, |i, j| {
        let lo = (i * bm).max(j * bn);
        let hi = ((i + 1) * bm).min((j + 1) * bn);
        if hi > lo {
            scale * (hi - lo) as f64
        } else {
            0.0
        }
    });
    Projector {
        source_dim: n,
        target_dim: m,
        matrix,
    }
}

/// `Π^n_m ξ`: the point of `ℝ^m` nearest to `ξ` in the V-distance.
pub fn project(xi: &CdVector, m: usize) -> CdVector {
    if xi.dim() == m {
        return xi.clone();
    }
    let p = projector(xi.dim(), m);
    (p.matrix() * xi.to_dvector()).into()
}

/// Projection of a plain slice; convenience for evaluator plumbing.
pub fn project_slice(xi: &[f64], m: usize) -> Vec<f64> {
    if xi.len() == m {
        return xi.to_vec();
    }
    let p = projector(xi.len(), m);
    (p.matrix() * DVector::from_column_slice(xi))
        .as_slice()
        .to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> CdVector {
        CdVector::from_slice(x).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let tol = DEFAULT_REDUCTION_TOL;
        assert_eq!(
            canonicalize(&[1., 1., 2., 2.], tol).unwrap().entries(),
            &[1., 2.]
        );
        assert_eq!(
            canonicalize(&[1., 2., 3.], tol).unwrap().entries(),
            &[1., 2., 3.]
        );
        assert_eq!(canonicalize(&[7.; 6], tol).unwrap().entries(), &[7.]);
        assert!(matches!(
            canonicalize(&[], tol),
            Err(OmegaError::InvalidArgument(_))
        ));
    }

    #[test]
    fn canonicalize_picks_minimal_divisor() {
        // (1,1,1,1,2,2,2,2) is constant on halves → dim 2 (not 4)
        let c = canonicalize(&[1., 1., 1., 1., 2., 2., 2., 2.], 1e-9).unwrap();
        assert_eq!(c.entries(), &[1., 2.]);
        // constant on pairs but not on halves → dim 4
        let c = canonicalize(&[1., 1., 2., 2., 3., 3., 4., 4.], 1e-9).unwrap();
        assert_eq!(c.entries(), &[1., 2., 3., 4.]);
    }

    #[test]
    fn canonicalize_absorbs_float_noise() {
        let c = canonicalize(&[0.1 + 0.2, 0.3, 5.0, 5.0], 1e-9).unwrap();
        assert_eq!(c.dim(), 2);
        assert!((c.entries()[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn equivalence_examples() {
        let x = v(&[1., -2.5, 4.]);
        assert!(equivalent(&x, &x.kron_ones(3), 1e-9));
        assert!(!equivalent(&v(&[1., 2.]), &v(&[1., 2., 3.]), 1e-9));
        assert!(equivalent(
            &v(&[1., 1., 2., 2.]),
            &v(&[1., 1., 1., 2., 2., 2.]),
            1e-9
        ));
    }

    #[test]
    fn stp_add_examples() {
        assert_eq!(
            stp_add(&v(&[1., 2.]), &v(&[1., 2., 3.])).entries(),
            &[2., 2., 3., 4., 5., 5.]
        );
        let x = v(&[3., -1.]);
        assert!(equivalent(&stp_add(&x, &CdVector::zeros(5)), &x, 1e-9));
        assert!(equivalent(&stp_add(&x, &x), &x.scale(2.0), 1e-9));
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(v_inner(&v(&[1., 1.]), &v(&[1., 1., 1.])), 1.0);
        assert_eq!(v_inner(&v(&[2., 1.]), &v(&[1., 2.])), 2.0);
        let x = v(&[1., 2., 2.]);
        assert!((v_inner(&x, &x) - 9.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn norm_examples() {
        assert!((v_norm(&v(&[5., 6.])) - (61.0_f64 / 2.0).sqrt()).abs() < 1e-15);
        assert!((v_norm(&v(&[5., 6.])) - 5.5227).abs() < 5e-5);
        assert!((v_norm(&v(&[-3.; 7])) - 3.0).abs() < 1e-15);
        assert_eq!(v_norm(&CdVector::zeros(4)), 0.0);
    }

    #[test]
    fn distance_examples() {
        let b = v(&[2., 0., -1., 3.]);
        let c = v(&[1., 2., -1., -2., 1.]);
        assert!((v_dist(&b, &c) - 1.7607).abs() < 5e-5);
        let x = v(&[0.5, 1.5, -2.]);
        assert_eq!(v_dist(&x, &x.kron_ones(2)), 0.0);
        assert!((v_dist(&v(&[1., 0.]), &v(&[0., 1.])) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn angle_examples() {
        let x = v(&[1., 2., -1.]);
        assert!(angle(&x, &x).unwrap().abs() < 1e-7);
        let right = angle(&v(&[1., 0.]), &v(&[0., 1.])).unwrap();
        assert!((right.to_degrees() - 90.0).abs() < 1e-12);
        assert!(matches!(
            angle(&CdVector::zeros(2), &x),
            Err(OmegaError::InvalidArgument(_))
        ));
    }

    #[test]
    fn projector_examples() {
        let p = projector(2, 4);
        let expected = DMatrix::from_row_slice(4, 2, &[1., 0., 1., 0., 0., 1., 0., 1.]);
        assert_eq!(p.matrix(), &expected);

        let p = projector(4, 2);
        let expected = DMatrix::from_row_slice(2, 4, &[0.5, 0.5, 0., 0., 0., 0., 0.5, 0.5]);
        assert_eq!(p.matrix(), &expected);

        assert_eq!(projector(3, 3).matrix(), &DMatrix::identity(3, 3));
    }

    #[test]
    fn projector_rows_sum_to_one() {
        for n in 1..=9 {
            for m in 1..=9 {
                let p = projector(n, m);
                for row in p.matrix().row_iter() {
                    assert!((row.sum() - 1.0).abs() < 1e-12, "Π^{n}_{m}");
                }
            }
        }
    }

    #[test]
    fn project_examples() {
        assert_eq!(project(&v(&[1., 2., 3., 4.]), 2).entries(), &[1.5, 3.5]);
        assert_eq!(project(&v(&[2., 1.]), 3).entries(), &[2., 1.5, 1.]);
        let xi = v(&[0.3, -1.2, 8.]);
        assert_eq!(project(&xi, 3), xi);
    }

    #[test]
    fn projector_rejects_wrong_input_dim() {
        assert!(projector(3, 2).apply(&v(&[1., 2.])).is_err());
    }

    #[test]
    fn lift_to_requires_multiple() {
        assert!(v(&[1., 2.]).lift_to(3).is_err());
        assert_eq!(
            v(&[1., 2.]).lift_to(4).unwrap().entries(),
            &[1., 1., 2., 2.]
        );
    }
}
