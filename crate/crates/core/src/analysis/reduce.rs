//! Least-squares approximation of a linear system on another dimension.

use nalgebra::{DMatrix, DVector};

use crate::cdspace::{project_slice, projector};
use crate::dynamics::expm;
use crate::error::{OmegaError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub source_dim: usize,
    pub target_dim: usize,
    pub a: DMatrix<f64>,
    pub b: Option<DMatrix<f64>>,
    pub c: Option<DMatrix<f64>>,
}

fn inverse(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.try_inverse()
        .ok_or_else(|| OmegaError::numeric("reduce_model", "normal-equation matrix is singular"))
}

/// `A_π`, `Π^n_m B` and `C_π` for target dimension `m`.
pub fn reduce_model(
    a: &DMatrix<f64>,
    b: Option<&DMatrix<f64>>,
    c: Option<&DMatrix<f64>>,
    m: usize,
) -> Result<ReducedModel> {
    let n = a.nrows();
    if !a.is_square() || n == 0 {
        return Err(OmegaError::invalid("A must be square and non-empty"));
    }
    if m == 0 {
        return Err(OmegaError::invalid("target dimension must be positive"));
    }
    if b.is_some_and(|b| b.nrows() != n) || c.is_some_and(|c| c.ncols() != n) {
        return Err(OmegaError::invalid(
            "B or C does not match the state dimension",
        ));
    }
    if m == n {
        return Ok(ReducedModel {
            source_dim: n,
            target_dim: m,
            a: a.clone(),
            b: b.cloned(),
            c: c.cloned(),
        });
    }
    let pi = projector(n, m).into_matrix();
    let pt = pi.transpose();
    // right factor R with A_π = Π A R and C_π = C R
    let r = if n >= m {
        &pt * inverse(&pi * &pt)?
    } else {
        inverse(&pt * &pi)? * &pt
    };
    Ok(ReducedModel {
        source_dim: n,
        target_dim: m,
        a: &pi * a * &r,
        b: b.map(|b| &pi * b),
        c: c.map(|c| c * &r),
    })
}

/// Relative error samples; `None` where `‖x(t)‖_V = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub target_dim: usize,
    pub times: Vec<f64>,
    pub values: Vec<Option<f64>>,
}

impl ErrorSeries {
    /// Largest defined value.
    pub fn max(&self) -> Option<f64> {
        self.values.iter().flatten().copied().reduce(f64::max)
    }
}

fn relative(approx: &[f64], exact: &[f64]) -> Option<f64> {
    let den: f64 = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 {
        return None;
    }
    let num: f64 = approx
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Some(num / den)
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OmegaError::invalid(
            "times must be finite and strictly increasing",
        ));
    }
    Ok(())
}

/// `E(t) = ‖Π^m_n e^{A_π t} Π^n_m x0 − e^{At} x0‖_V / ‖e^{At} x0‖_V`.
pub fn approx_error(a: &DMatrix<f64>, x0: &[f64], m: usize, times: &[f64]) -> Result<ErrorSeries> {
    let n = a.nrows();
    if x0.len() != n {
        return Err(OmegaError::invalid(format!(
            "x0 has {} entries, A is {n}x{n}",
            x0.len()
        )));
    }
    check_times(times)?;
    let red = reduce_model(a, None, None, m)?;
    let x0v = DVector::from_column_slice(x0);
    let z0 = DVector::from_vec(project_slice(x0, m));
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let x = expm(a, t)? * &x0v;
        let z = expm(&red.a, t)? * &z0;
        let back = project_slice(z.as_slice(), n);
        values.push(relative(&back, x.as_slice()));
    }
    Ok(ErrorSeries {
        target_dim: m,
        times: times.to_vec(),
        values,
    })
}

/// Nominal and member runs of a two-level aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRun {
    pub times: Vec<f64>,
    /// Nominal states projected to the member dimension.
    pub nominal: Vec<Vec<f64>>,
    pub member: Vec<Vec<f64>>,
    pub error: ErrorSeries,
}

/// Runs the nominal model from `Π x0` and the member from `x0`, and compares
/// them on the member's dimension.
pub fn aggregate_run(
    nominal_a: &DMatrix<f64>,
    member_a: &DMatrix<f64>,
    x0: &[f64],
    times: &[f64],
) -> Result<AggregateRun> {
    if !nominal_a.is_square() || !member_a.is_square() {
        return Err(OmegaError::invalid("system matrices must be square"));
    }
    let (ni, nj) = (nominal_a.nrows(), member_a.nrows());
    if x0.len() != nj {
        return Err(OmegaError::invalid(format!(
            "member x0 has {} entries, member dimension is {nj}",
            x0.len()
        )));
    }
    check_times(times)?;
    let x0v = DVector::from_column_slice(x0);
    let z0 = DVector::from_vec(project_slice(x0, ni));
    let mut nominal = Vec::with_capacity(times.len());
    let mut member = Vec::with_capacity(times.len());
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let x = expm(member_a, t)? * &x0v;
        let z = expm(nominal_a, t)? * &z0;
        let back = project_slice(z.as_slice(), nj);
        values.push(relative(&back, x.as_slice()));
        nominal.push(back);
        member.push(x.as_slice().to_vec());
    }
    Ok(AggregateRun {
        times: times.to_vec(),
        nominal,
        member,
        error: ErrorSeries {
            target_dim: ni,
            times: times.to_vec(),
            values,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_decay(n: usize) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            (1..=n).map(|i| -0.001 * i as f64),
        ))
    }

    #[test]
    fn scalar_matrices_reduce_to_scalars() {
        let a = DMatrix::identity(5, 5) * 0.7;
        for m in [1, 2, 3, 4] {
            let r = reduce_model(&a, None, None, m).unwrap();
            assert!(
                (r.a - DMatrix::identity(m, m) * 0.7).amax() < 1e-12,
                "m={m}"
            );
        }
        // lifting: c times the orthogonal projector onto the range of Π
        for m in [6, 7, 10] {
            let r = reduce_model(&a, None, None, m).unwrap();
            let pi = projector(5, m).into_matrix();
            let proj = &pi * (pi.transpose() * &pi).try_inverse().unwrap() * pi.transpose();
            assert!((&r.a - proj * 0.7).amax() < 1e-12, "m={m}");
            assert!((&r.a * &pi - &pi * 0.7).amax() < 1e-12);
        }
    }

    #[test]
    fn same_dimension_is_identity() {
        let a = DMatrix::from_row_slice(2, 2, &[1., 2., 3., 4.]);
        let r = reduce_model(&a, None, None, 2).unwrap();
        assert_eq!(r.a, a);
    }

    #[test]
    fn nilpotent_to_one_dimension() {
        let a = DMatrix::from_row_slice(2, 2, &[0., 1., 0., 0.]);
        let r = reduce_model(&a, None, None, 1).unwrap();
        assert!((r.a[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn input_and_output_maps() {
        let a = DMatrix::from_row_slice(2, 2, &[0., 1., 0., 0.]);
        let b = DMatrix::from_column_slice(2, 1, &[1., 3.]);
        let c = DMatrix::from_row_slice(1, 2, &[1., 1.]);
        let r = reduce_model(&a, Some(&b), Some(&c), 4).unwrap();
        let pi = projector(2, 4).into_matrix();
        assert_eq!(r.b.unwrap(), &pi * &b);
        assert_eq!(r.c.as_ref().unwrap().shape(), (1, 4));
        // branch n < m: C_π Π = C on the lifted range
        assert!((r.c.unwrap() * &pi - c).amax() < 1e-12);
    }

    #[test]
    fn error_series_behaviour() {
        let n = 10;
        let x0 = vec![500.0; n];
        let times: Vec<f64> = (1..=100).map(f64::from).collect();
        let a1 = DMatrix::identity(n, n) * 0.001;
        for m in [n - 1, n + 1] {
            assert!(approx_error(&a1, &x0, m, &times).unwrap().max().unwrap() <= 1e-10);
        }
        let e = approx_error(&diag_decay(n), &x0, n, &times).unwrap();
        assert!(e.max().unwrap() <= 1e-12);
        let e = approx_error(&diag_decay(n), &x0, 7, &times).unwrap();
        assert!(e.max().unwrap() <= 0.05);
    }

    #[test]
    fn zero_state_is_undefined() {
        let e = approx_error(&DMatrix::identity(2, 2), &[0.0, 0.0], 1, &[1.0]).unwrap();
        assert_eq!(e.values, vec![None]);
    }

    #[test]
    fn aggregation_matches_approx_error() {
        let n = 6;
        let a = diag_decay(n);
        let x0: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 5.0).collect();
        let red = reduce_model(&a, None, None, 4).unwrap();
        let run = aggregate_run(&red.a, &a, &x0, &times).unwrap();
        let e = approx_error(&a, &x0, 4, &times).unwrap();
        for (u, v) in run.error.values.iter().zip(&e.values) {
            assert!((u.unwrap() - v.unwrap()).abs() <= 1e-9);
        }
        let same = aggregate_run(&a, &a, &x0, &times).unwrap();
        assert!(same.error.max().unwrap() <= 1e-9);
    }
}
