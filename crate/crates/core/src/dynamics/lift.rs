//! Extension of functions and vector fields from `ℝ^n` to the rest of Ω.

use std::sync::Arc;

use super::mode::{Drift, Feedback, InputMap, Mode, VectorField};
use crate::cdspace::{project_slice, projector, CdVector};
use crate::error::{OmegaError, Result};

/// `y ↦ Π^n_{kn} f(Π^{kn}_n y)` for a field `f` on `ℝ^n`.
fn lift_vector_field(f: &VectorField, n: usize, k: usize) -> VectorField {
    let f = Arc::clone(f);
    Arc::new(move |y: &[f64]| {
        let fx = f(&project_slice(y, n));
        fx.iter().flat_map(|&v| std::iter::repeat_n(v, k)).collect()
    })
}

/// Lifts a mode on `ℝ^n` to `ℝ^{kn}` so that integral curves commute with
/// `⊗ 1_k`: `F(x ⊗ 1_k) = f(x) ⊗ 1_k`.
///
/// Linear data stay linear: `A ↦ Π^n_{kn} A Π^{kn}_n`, `B ↦ Π^n_{kn} B`,
/// `K ↦ K Π^{kn}_n`.
pub fn lift_field(mode: &Mode, k: usize) -> Result<Mode> {
    if k == 0 {
        return Err(OmegaError::invalid("lift multiplier must be positive"));
    }
    if k == 1 {
        return Ok(mode.clone());
    }
    let n = mode.dim();
    let kn = k * n;
    let up = projector(n, kn).into_matrix();
    let down = projector(kn, n).into_matrix();
    let label = format!("{}^({kn})", mode.label());

    let mut lifted = match mode.drift() {
        Drift::Linear(a) => Mode::linear(label, &up * a * &down)?,
        Drift::Field(f) => Mode::field(label, kn, lift_vector_field(f, n, k))?,
    };
    if let Some(inputs) = mode.inputs() {
        let lifted_inputs = match inputs {
            InputMap::Linear(b) => InputMap::Linear(&up * b),
            InputMap::Fields(g) => {
                InputMap::Fields(g.iter().map(|gk| lift_vector_field(gk, n, k)).collect())
            }
        };
        lifted = lifted.with_inputs(lifted_inputs)?;
    }
    if let Some(fb) = mode.feedback() {
        let lifted_fb = match fb {
            Feedback::Linear { gain, offset } => Feedback::affine(gain * &down, offset.clone()),
            Feedback::Custom(law) => {
                let law = Arc::clone(law);
                Feedback::Custom(Arc::new(move |t, y: &[f64]| law(t, &project_slice(y, n))))
            }
        };
        lifted = lifted.with_feedback(lifted_fb)?;
    }
    Ok(lifted)
}

/// `H(y) = h(Π^{dim y}_q y)`: a function generated on `ℝ^q`, evaluated
/// anywhere in Ω. Equivalent arguments give equal values.
pub fn lift_function(h: &dyn Fn(&[f64]) -> Vec<f64>, q: usize, y: &CdVector) -> Vec<f64> {
    h(&project_slice(y.entries(), q))
}
