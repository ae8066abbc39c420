//! Dense linear-algebra helpers shared by the algebra and analysis modules.
//!
//! Matrices are `nalgebra::DMatrix<f64>`; everything here is small-dimension
//! work, so clarity wins over blocking or BLAS calls.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::error::{OmegaError, Result};

/// Settings for the largest-eigenvalue iteration on symmetric PSD matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenConfig {
    /// Relative change in the Rayleigh quotient below which iteration stops.
    pub tolerance: f64,
    /// Iteration cap for the power method.
    pub max_iterations: usize,
    /// Fall back to a full cyclic-Jacobi decomposition when the power method
    /// stalls (only for matrices up to [`JACOBI_MAX_DIM`]).
    pub jacobi_fallback: bool,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            tolerance: 1e-10,
            max_iterations: 10_000,
            jacobi_fallback: true,
        }
    }
}

/// Largest matrix dimension handled by the Jacobi fallback.
pub const JACOBI_MAX_DIM: usize = 64;

/// Default relative tolerance for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Column vector of ones.
pub fn ones(n: usize) -> DMatrix<f64> {
    DMatrix::from_element(n, 1, 1.0)
}

/// Deterministic, non-degenerate start vector for the power method.
fn start_vector(n: usize) -> DVector<f64> {
    // golden-ratio sequence: no structured zeros, no RNG
    const PHI: f64 = 0.618_033_988_749_894_8;
    DVector::from_fn(n, |i, _| 0.5 + ((i as f64 + 1.0) * PHI).fract())
}

/// Largest eigenvalue of a symmetric positive semi-definite matrix.
///
/// Power iteration is tried first; if it does not settle within the cap the
/// cyclic-Jacobi decomposition is used instead (when enabled and the matrix is
/// small enough). Otherwise a numeric failure carrying the iteration count is
/// returned.
pub fn lambda_max_psd(m: &DMatrix<f64>, cfg: &EigenConfig) -> Result<f64> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(OmegaError::invalid(format!(
            "lambda_max_psd expects a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(OmegaError::numeric(
            "eigen-iteration",
            "non-finite matrix entry",
        ));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let scale = m.amax();
    if scale == 0.0 {
        return Ok(0.0);
    }

    let mut v = start_vector(n);
    v.normalize_mut();
    let mut rayleigh = v.dot(&(m * &v));
    for _ in 0..cfg.max_iterations {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            // start vector in the kernel; only possible when m is singular
            break;
        }
        v = w / norm;
        let next = v.dot(&(m * &v));
        if (next - rayleigh).abs() <= cfg.tolerance * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(next.max(0.0));
        }
        rayleigh = next;
    }

    if cfg.jacobi_fallback && n <= JACOBI_MAX_DIM {
        let eig = jacobi_eigenvalues(m)?;
        return Ok(eig.into_iter().fold(0.0, f64::max));
    }
    Err(OmegaError::numeric(
        "eigen-iteration",
        format!(
            "power method did not converge after {} iterations",
            cfg.max_iterations
        ),
    ))
}

/// All eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let mut a = m.clone();
    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let diag: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            return Ok((0..n).map(|i| a[(i, i)]).collect());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(OmegaError::numeric(
        "jacobi-eigen",
        format!("off-diagonal mass did not vanish after {MAX_SWEEPS} sweeps"),
    ))
}

/// Largest singular value (spectral norm) of an arbitrary matrix.
pub fn spectral_norm(a: &DMatrix<f64>) -> Result<f64> {
    let gram = a.transpose() * a;
    Ok(lambda_max_psd(&gram, &EigenConfig::default())?.sqrt())
}

/// Numerical rank via column-pivoted QR: diagonal entries of R above
/// `rel_tol` times the largest one count.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let r = m.clone().col_piv_qr().r();
    let k = r.nrows().min(r.ncols());
    let pivots: Vec<f64> = (0..k).map(|i| r[(i, i)].abs()).collect();
    let largest = pivots.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    pivots.iter().filter(|&&p| p > rel_tol * largest).count()
}

/// Orthogonal projector onto the complement of the column span of `s`.
pub(crate) fn complement_projector(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    if s.ncols() == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    let gram = s.transpose() * s;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| OmegaError::invalid("subspace basis is linearly dependent"))?;
    Ok(DMatrix::identity(n, n) - s * inv * s.transpose())
}

/// Builds a matrix from row-major nested rows, checking the shape.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(OmegaError::invalid("matrix has no rows"));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(OmegaError::invalid("matrix rows are empty or ragged"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(OmegaError::invalid("matrix has a non-finite entry"));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Eigenvalues of a real square matrix from its real Schur form.
///
/// The QR sweep is capped; on a stall the matrix is rotated by a fixed
/// orthogonal similarity (same spectrum) and retried.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(OmegaError::invalid("eigenvalues need a square matrix"));
    }
    let cap = 1000 * n.max(1);
    let mut work = m.clone();
    for attempt in 0..4 {
        if let Some(s) = Schur::try_new(work.clone(), f64::EPSILON, cap) {
            return Ok(s.complex_eigenvalues().iter().copied().collect());
        }
        let seed = DMatrix::from_fn(n, n, |i, j| {
            ((i * n + j + 1) as f64 * (0.618_033_988_75 + attempt as f64)).fract() - 0.5
        });
        let q = seed.qr().q();
        work = q.transpose() * m * q;
    }
    Err(OmegaError::numeric(
        "eigenvalues",
        "Schur iteration did not converge",
    ))
}
