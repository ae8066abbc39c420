//! Kalman rank tests, intersection subspaces and controllability chains.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_integer::Integer;

use crate::dkstp::bridge;
use crate::dynamics::DvSystem;
use crate::error::{OmegaError, Result};
use crate::linalg::{complement_projector, numerical_rank, DEFAULT_RANK_TOL};

fn check_square(a: &DMatrix<f64>) -> Result<usize> {
    if !a.is_square() {
        return Err(OmegaError::invalid(format!(
            "state matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

/// `[B, AB, …, A^{n-1}B]`.
pub fn kalman_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = check_square(a)?;
    if b.nrows() != n {
        return Err(OmegaError::invalid(format!(
            "input matrix has {} rows, state dimension is {n}",
            b.nrows()
        )));
    }
    let k = b.ncols();
    let mut out = DMatrix::zeros(n, n * k);
    let mut block = b.clone();
    for i in 0..n {
        out.columns_mut(i * k, k).copy_from(&block);
        block = a * block;
    }
    Ok(out)
}

pub fn ctrb_rank(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<usize> {
    Ok(numerical_rank(&kalman_matrix(a, b)?, DEFAULT_RANK_TOL))
}

/// Rank of `[C; CA; …; CA^{n-1}]`.
pub fn obs_rank(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<usize> {
    let n = check_square(a)?;
    if c.ncols() != n {
        return Err(OmegaError::invalid(format!(
            "output matrix has {} columns, state dimension is {n}",
            c.ncols()
        )));
    }
    let k = kalman_matrix(&a.transpose(), &c.transpose())?;
    Ok(numerical_rank(&k, DEFAULT_RANK_TOL))
}

/// Output matrix of a mode of dimension `n` for `y = H ⋉ x`: `H Ψ_{q×n}`.
pub fn mode_output_matrix(h: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    h * bridge(h.ncols(), n)
}

/// Basis of `Ω^m ∩ Ω^n` inside `ℝ^m`: the columns of `I_g ⊗ 1_{m/g}`.
pub fn intersection_basis(m: usize, n: usize) -> Result<DMatrix<f64>> {
    if m == 0 || n == 0 {
        return Err(OmegaError::invalid("dimensions must be positive"));
    }
    let g = m.gcd(&n);
    let r = m / g;
    Ok(DMatrix::from_fn(
        m,
        g,
        |i, j| if i / r == j { 1.0 } else { 0.0 },
    ))
}

/// Whether `(A, B)` steers the component orthogonal to `span(S)` freely:
/// `rank(P [B, AB, …]) = n − dim S` with `P` the complement projector.
pub fn partial_ctrb(a: &DMatrix<f64>, b: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<bool> {
    let n = check_square(a)?;
    if s.nrows() != n {
        return Err(OmegaError::invalid(format!(
            "subspace basis has {} rows, state dimension is {n}",
            s.nrows()
        )));
    }
    if s.ncols() > 0 && numerical_rank(s, DEFAULT_RANK_TOL) < s.ncols() {
        return Err(OmegaError::invalid("subspace basis is linearly dependent"));
    }
    let p = complement_projector(s)?;
    let k = kalman_matrix(a, b)?;
    Ok(numerical_rank(&(p * k), DEFAULT_RANK_TOL) == n - s.ncols())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilityReport {
    pub label: String,
    pub dim: usize,
    pub kalman_rank: usize,
    pub fully_controllable: bool,
    /// Dimension of the subspace whose complement was tested, if any.
    pub subspace_dim: Option<usize>,
    pub partially_controllable: Option<bool>,
}

fn linear_pair(system: &DvSystem, i: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let mode = system
        .modes()
        .get(i)
        .ok_or_else(|| OmegaError::invalid(format!("mode index {i} out of range")))?;
    let a = mode
        .drift_matrix()
        .ok_or_else(|| OmegaError::invalid(format!("mode {} has nonlinear drift", mode.label())))?
        .clone();
    let b = match (mode.inputs(), mode.input_matrix()) {
        (None, _) => DMatrix::zeros(mode.dim(), 0),
        (Some(_), Some(b)) => b.clone(),
        (Some(_), None) => {
            return Err(OmegaError::invalid(format!(
                "mode {} has nonlinear inputs",
                mode.label()
            )))
        }
    };
    Ok((a, b))
}

/// Per-mode report; `subspace` selects a partial test as in [`partial_ctrb`].
pub fn ctrb_report(
    system: &DvSystem,
    i: usize,
    subspace: Option<&DMatrix<f64>>,
) -> Result<ControllabilityReport> {
    let (a, b) = linear_pair(system, i)?;
    let n = a.nrows();
    let rank = ctrb_rank(&a, &b)?;
    let partial = subspace.map(|s| partial_ctrb(&a, &b, s)).transpose()?;
    Ok(ControllabilityReport {
        label: system.modes()[i].label().to_string(),
        dim: n,
        kalman_rank: rank,
        fully_controllable: rank == n,
        subspace_dim: subspace.map(|s| s.ncols()),
        partially_controllable: partial,
    })
}

/// Shortest chain `start → … → target` in which every step `i → j` is
/// partly controllable on the complement of `Ω^{n_i} ∩ Ω^{n_j}` and the
/// target mode is completely controllable.
pub fn reachability_chain(
    system: &DvSystem,
    start: usize,
    target: usize,
) -> Result<Option<Vec<usize>>> {
    let k = system.modes().len();
    if start >= k || target >= k {
        return Err(OmegaError::invalid(format!(
            "mode index out of range (system has {k} modes)"
        )));
    }
    let pairs = (0..k)
        .map(|i| linear_pair(system, i))
        .collect::<Result<Vec<_>>>()?;
    let (at, bt) = &pairs[target];
    if ctrb_rank(at, bt)? < at.nrows() {
        return Ok(None);
    }
    let dims = system.dims();
    let mut prev: Vec<Option<usize>> = vec![None; k];
    let mut seen = vec![false; k];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(i) = queue.pop_front() {
        if i == target {
            let mut chain = vec![i];
            let mut cur = i;
            while let Some(p) = prev[cur] {
                chain.push(p);
                cur = p;
            }
            chain.reverse();
            return Ok(Some(chain));
        }
        let (a, b) = &pairs[i];
        for j in 0..k {
            if seen[j] || j == i {
                continue;
            }
            let s = intersection_basis(dims[i], dims[j])?;
            if partial_ctrb(a, b, &s)? {
                seen[j] = true;
                prev[j] = Some(i);
                queue.push_back(j);
            }
        }
    }
    Ok(None)
}
