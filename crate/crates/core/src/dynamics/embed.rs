//! Merging all modes into one common space `ℝ^n`, `n = lcm(n_i)`.

use std::collections::BTreeMap;

use num_integer::Integer;

use super::lift::lift_field;
use super::simulate::{simulate, DvSystem, SimOptions, Trajectory, TransitionRule};
use crate::cdspace::{project, projector, v_dist, CdVector};
use crate::error::Result;
use crate::switching::{SwitchingSignal, TransitionMap};

/// Accuracy expected from the integrators on the runs compared here.
pub const INTEGRATOR_TOL: f64 = 1e-8;

/// The embedded system together with the common dimension.
#[derive(Debug, Clone)]
pub struct EmbeddedSystem {
    pub dim: usize,
    pub system: DvSystem,
}

/// Lifts every mode to `ℝ^n` and re-expresses each switch `p → q` as the
/// reset `Π^{n_q}_n W Π^n_{n_p}`.
pub fn embed_common(system: &DvSystem) -> Result<EmbeddedSystem> {
    let dims = system.dims();
    let n = dims.iter().fold(1usize, |acc, &d| acc.lcm(&d));
    let modes = system
        .modes()
        .iter()
        .map(|m| lift_field(m, n / m.dim()))
        .collect::<Result<Vec<_>>>()?;

    let mut table = BTreeMap::new();
    for p in 0..dims.len() {
        for q in 0..dims.len() {
            if p == q {
                continue;
            }
            let w = match system.transition(p, q) {
                Ok(w) => w,
                // pairs the original system cannot take stay absent
                Err(_) => continue,
            };
            let down = projector(n, dims[p]).into_matrix();
            let up = projector(dims[q], n).into_matrix();
            table.insert((p, q), TransitionMap::new(up * w.matrix() * down)?);
        }
    }
    let mut embedded = DvSystem::new(modes)?
        .with_transitions(TransitionRule::Explicit(table))?
        .with_impulse_scale(system.impulse_scale())?;
    if let Some(h) = system.output() {
        embedded = embedded.with_output(h.clone());
    }
    Ok(EmbeddedSystem {
        dim: n,
        system: embedded,
    })
}

/// Result of running a system and its embedding side by side.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub dim: usize,
    pub original: Trajectory,
    pub embedded: Trajectory,
    /// Largest `d_V` between paired samples.
    pub max_distance: f64,
    pub samples_compared: usize,
    pub tolerance: f64,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.max_distance <= self.tolerance
    }
}

/// Simulates `system` and its embedding from the same initial class and
/// compares them sample by sample.
pub fn check_embedding(
    system: &DvSystem,
    signal: &SwitchingSignal,
    x0: &CdVector,
    opts: &SimOptions,
) -> Result<EquivalenceReport> {
    let embedded = embed_common(system)?;
    let original = simulate(system, signal, x0, opts)?;
    let n0 = system.modes()[signal.initial_mode()].dim();
    let y0 = project(&project(x0, n0), embedded.dim);
    let lifted = simulate(&embedded.system, signal, &y0, opts)?;

    let mut max_distance: f64 = 0.0;
    for (a, b) in original.samples.iter().zip(&lifted.samples) {
        let xa = CdVector::from_slice(&a.state)?;
        let xb = CdVector::from_slice(&b.state)?;
        max_distance = max_distance.max(v_dist(&xa, &xb));
    }
    Ok(EquivalenceReport {
        dim: embedded.dim,
        samples_compared: original.samples.len().min(lifted.samples.len()),
        original,
        embedded: lifted,
        max_distance,
        tolerance: 10.0 * INTEGRATOR_TOL,
    })
}
