//! `e^{tA}` by scaling and squaring with a truncated Taylor series.

use nalgebra::DMatrix;

use crate::error::{OmegaError, Result};

/// Scaled matrices have 1-norm at most this before the series is summed.
const SCALED_NORM: f64 = 0.5;
const MAX_TERMS: usize = 40;

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^{tA}` for a square, finite `A`.
pub fn expm(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(OmegaError::invalid(format!(
            "expm needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !t.is_finite() || a.iter().any(|v| !v.is_finite()) {
        return Err(OmegaError::numeric("expm", "non-finite input"));
    }
    let m = a * t;
    let norm = norm1(&m);
    let squarings = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings);

    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=MAX_TERMS {
        term = &term * &scaled / k as f64;
        sum += &term;
        if norm1(&term) <= f64::EPSILON * 1e-2 * norm1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    if sum.iter().any(|v| !v.is_finite()) {
        return Err(OmegaError::numeric(
            "expm",
            format!("overflow after {squarings} squarings"),
        ));
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral_norm;
    use nalgebra::DVector;

    #[test]
    fn zero_time_is_identity() {
        let a = DMatrix::from_row_slice(2, 2, &[3., 2., -10., -6.]);
        assert_eq!(expm(&a, 0.0).unwrap(), DMatrix::identity(2, 2));
    }

    #[test]
    fn diagonal_matches_scalar_exp() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.3, 0.4, 2.0]));
        let e = expm(&a, 1.7).unwrap();
        for (i, l) in [-1.3_f64, 0.4, 2.0].iter().enumerate() {
            let exact = (1.7 * l).exp();
            assert!(((e[(i, i)] - exact) / exact).abs() < 1e-13);
        }
        assert!(e[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        // e^{tJ} with J = [[0,1],[-1,0]] is a rotation by -t
        let j = DMatrix::from_row_slice(2, 2, &[0., 1., -1., 0.]);
        let t = 2.3_f64;
        let e = expm(&j, t).unwrap();
        let exact = DMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
        assert!((e - exact).amax() < 1e-13);
    }

    #[test]
    fn stable_two_by_two_contraction_at_three_point_six() {
        let a1 = DMatrix::from_row_slice(2, 2, &[3., 2., -10., -6.]);
        let e = expm(&a1, 3.6).unwrap();
        let s = spectral_norm(&e).unwrap();
        assert!((s - 0.3201).abs() < 1e-3, "{s}");
    }

    #[test]
    fn overflow_reported() {
        let a = DMatrix::from_element(1, 1, 1.0);
        assert!(matches!(
            expm(&a, 1e6),
            Err(OmegaError::NumericFailure { .. })
        ));
        assert!(expm(&DMatrix::zeros(2, 3), 1.0).is_err());
    }
}
