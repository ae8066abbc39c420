//! Norm-based dwell-time bound for switched stable linear modes.

use nalgebra::DMatrix;

use super::expm::expm;
use super::simulate::DvSystem;
use crate::error::{OmegaError, Result};
use crate::linalg::{eigenvalues, spectral_norm};

/// Where the jump Lipschitz constant comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LipschitzSource {
    /// Largest `op_vnorm` over the system's transition maps.
    Transitions,
    /// A given bound.
    Fixed(f64),
}

/// Search grid: `res, 2·res, …, max`, then bisection down to `refine`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellGrid {
    pub max: f64,
    pub resolution: f64,
    pub refine: f64,
}

impl Default for DwellGrid {
    fn default() -> Self {
        DwellGrid {
            max: 100.0,
            resolution: 0.01,
            refine: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DwellReport {
    pub dwell: Option<f64>,
    pub lipschitz: f64,
    /// `L · max_i ‖e^{Δ A_i}‖` at the returned dwell.
    pub contraction: Option<f64>,
    pub diagnostic: Option<String>,
}

/// Strictly negative real parts.
pub fn is_hurwitz(a: &DMatrix<f64>) -> Result<bool> {
    Ok(eigenvalues(a)?.iter().all(|l| l.re < 0.0))
}

fn contraction(mats: &[DMatrix<f64>], l: f64, dwell: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in mats {
        worst = worst.max(spectral_norm(&expm(a, dwell)?)?);
    }
    Ok(l * worst)
}

/// Smallest dwell `Δ` with `L · max_i ‖e^{Δ A_i}‖ ≤ 1 − γ` holding at `Δ` and
/// at every grid point beyond it.
pub fn dwell_bound_matrices(
    mats: &[DMatrix<f64>],
    lipschitz: f64,
    gamma: f64,
    grid: &DwellGrid,
) -> Result<DwellReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(OmegaError::invalid(format!(
            "margin must lie in (0, 1), got {gamma}"
        )));
    }
    if !(lipschitz.is_finite() && lipschitz >= 0.0) {
        return Err(OmegaError::invalid(format!(
            "Lipschitz constant must be finite, got {lipschitz}"
        )));
    }
    if !(grid.resolution > 0.0 && grid.max >= grid.resolution && grid.refine > 0.0) {
        return Err(OmegaError::invalid(
            "dwell grid needs 0 < resolution <= max and refine > 0",
        ));
    }
    if mats.is_empty() {
        return Err(OmegaError::invalid("no modes"));
    }
    for (i, a) in mats.iter().enumerate() {
        if !a.is_square() {
            return Err(OmegaError::invalid(format!(
                "mode {i} matrix is not square"
            )));
        }
        if !is_hurwitz(a)? {
            return Ok(DwellReport {
                dwell: None,
                lipschitz,
                contraction: None,
                diagnostic: Some(format!("mode {i} is not Hurwitz")),
            });
        }
    }
    if mats.len() == 1 {
        return Ok(DwellReport {
            dwell: Some(grid.resolution),
            lipschitz,
            contraction: Some(contraction(mats, lipschitz, grid.resolution)?),
            diagnostic: Some("single mode: no switches to bound".into()),
        });
    }

    let target = 1.0 - gamma;
    let steps = (grid.max / grid.resolution).round() as usize;
    let mut last_fail: Option<usize> = None;
    for k in (1..=steps).rev() {
        if contraction(mats, lipschitz, k as f64 * grid.resolution)? > target {
            last_fail = Some(k);
            break;
        }
    }
    let (mut lo, mut hi) = match last_fail {
        None => {
            let d = grid.resolution;
            return Ok(DwellReport {
                dwell: Some(d),
                lipschitz,
                contraction: Some(contraction(mats, lipschitz, d)?),
                diagnostic: None,
            });
        }
        Some(k) if k == steps => {
            return Ok(DwellReport {
                dwell: None,
                lipschitz,
                contraction: None,
                diagnostic: Some(format!("no dwell up to {} reaches the margin", grid.max)),
            });
        }
        Some(k) => (k as f64 * grid.resolution, (k + 1) as f64 * grid.resolution),
    };
    while hi - lo > grid.refine {
        let mid = 0.5 * (lo + hi);
        if contraction(mats, lipschitz, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DwellReport {
        dwell: Some(hi),
        lipschitz,
        contraction: Some(contraction(mats, lipschitz, hi)?),
        diagnostic: None,
    })
}

/// [`dwell_bound_matrices`] on the closed-loop matrices of `system`.
pub fn dwell_bound(
    system: &DvSystem,
    source: LipschitzSource,
    gamma: f64,
    grid: &DwellGrid,
) -> Result<DwellReport> {
    let mats = system
        .modes()
        .iter()
        .map(|m| {
            m.closed_loop_matrix().ok_or_else(|| {
                OmegaError::invalid(format!(
                    "mode {} is not a homogeneous linear mode",
                    m.label()
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let l = match source {
        LipschitzSource::Fixed(l) => l,
        LipschitzSource::Transitions => {
            let k = mats.len();
            let mut l: f64 = 0.0;
            for p in 0..k {
                for q in (0..k).filter(|&q| q != p) {
                    if let Ok(w) = system.transition(p, q) {
                        l = l.max(w.lipschitz());
                    }
                }
            }
            l
        }
    };
    dwell_bound_matrices(&mats, l, gamma, grid)
}
