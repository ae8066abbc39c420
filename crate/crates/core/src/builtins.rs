//! Named evaluators, feedbacks and small systems used by the scenarios.
//!
//! The `ddp_*` objects form a two-mode disturbance-decoupling example on
//! `ℝ²`/`ℝ³` with generating space `ℝ⁶`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{DvSystem, Feedback, InputMap, Mode, VectorField};
use crate::error::{OmegaError, Result};

/// Names accepted by [`field`], with their dimension.
pub const FIELDS: &[(&str, usize)] = &[
    ("rotation", 2),
    ("van_der_pol", 2),
    ("ddp_f1", 2),
    ("ddp_g1", 2),
    ("ddp_f2", 3),
    ("ddp_g2", 3),
    ("ddp_xi", 6),
];

/// Names accepted by [`function`], with their input dimension.
pub const FUNCTIONS: &[(&str, usize)] = &[("ddp_h", 6)];

/// Names accepted by [`feedback`].
pub const FEEDBACKS: &[&str] = &["steer_line", "switched_s1", "switched_s2"];

pub fn field(name: &str) -> Option<(usize, VectorField)> {
    let f: VectorField = match name {
        "rotation" => Arc::new(|x: &[f64]| vec![x[1], -x[0]]),
        "van_der_pol" => Arc::new(|x: &[f64]| vec![x[1], (1.0 - x[0] * x[0]) * x[1] - x[0]]),
        "ddp_f1" => Arc::new(|x: &[f64]| vec![x[1], 2.0 * x[0] / 3.0]),
        "ddp_g1" => Arc::new(|x: &[f64]| vec![-1.0 - x[1], 1.0]),
        "ddp_f2" => Arc::new(|z: &[f64]| vec![z[1] - z[2], z[0], -z[0]]),
        "ddp_g2" => Arc::new(|z: &[f64]| vec![z[2] - z[1], 1.0, -1.0]),
        "ddp_xi" => Arc::new(|w: &[f64]| {
            vec![
                1.0 + w[4] * w[4],
                -1.0 - w[5] * w[5],
                0.0,
                -1.0 - w[1],
                1.0,
                w[0],
            ]
        }),
        _ => return None,
    };
    let dim = FIELDS.iter().find(|(n, _)| *n == name).map(|&(_, d)| d)?;
    Some((dim, f))
}

pub fn function(name: &str) -> Option<(usize, VectorField)> {
    match name {
        "ddp_h" => Some((
            6,
            Arc::new(|w: &[f64]| vec![w.iter().sum::<f64>() + w[0] * w[1]]),
        )),
        _ => None,
    }
}

/// `V₁(x)`: a single generator on `ℝ²`.
pub fn ddp_v1(x: &[f64]) -> Vec<Vec<f64>> {
    vec![vec![-1.0, 1.0 + 2.0 * x[0] / 3.0]]
}

/// `V₂(z)`: two generators on `ℝ³`.
pub fn ddp_v2(z: &[f64]) -> Vec<Vec<f64>> {
    vec![vec![-1.0, 1.0 + z[0], 0.0], vec![-1.0, 0.0, 1.0 + z[0]]]
}

pub fn feedback(name: &str) -> Option<Feedback> {
    let row = |v: &[f64]| DMatrix::from_row_slice(1, v.len(), v);
    match name {
        // u = -(y₁ + y₂) + v with y = Tx and v = -1
        "steer_line" => Some(Feedback::affine(
            row(&[-2.0, 0.0]),
            DVector::from_element(1, -1.0),
        )),
        "switched_s1" => Some(Feedback::gain(row(&[-1.0, -1.0]))),
        "switched_s2" => Some(Feedback::gain(row(&[-1.0, -1.0, -3.0]))),
        _ => None,
    }
}

fn unknown(kind: &str, name: &str) -> OmegaError {
    OmegaError::InvalidArgument(format!("unknown built-in {kind} `{name}`"))
}

pub fn field_mode(label: &str, name: &str) -> Result<Mode> {
    let (dim, f) = field(name).ok_or_else(|| unknown("field", name))?;
    Mode::field(label, dim, f)
}

/// Stable 2-mode pair on `ℝ²` and `ℝ⁴`.
pub fn dwell_pair() -> DvSystem {
    let a1 = DMatrix::from_row_slice(2, 2, &[3., 2., -10., -6.]);
    let a2 = DMatrix::from_row_slice(
        4,
        4,
        &[
            -5., 1., 0., 1., 1., -3., 0., 1., -1., 0., -2., 0., 0., 1., 0., -2.,
        ],
    );
    DvSystem::new(vec![
        Mode::linear("s1", a1).expect("square"),
        Mode::linear("s2", a2).expect("square"),
    ])
    .expect("non-empty")
}

/// Steering pair on `ℝ²` (with `steer_line` attached) and the `ℝ³` chain.
///
/// `s1` is `T⁻¹ J T` with `T = [[1, -1], [1, 1]]` and `J = [[1, 1], [0, 1]]`,
/// so that `y = Tx` obeys `ẏ = Jy + e₁u`.
pub fn steering_pair() -> DvSystem {
    let a1 = DMatrix::from_row_slice(2, 2, &[1.5, 0.5, -0.5, 0.5]);
    let b1 = DMatrix::from_column_slice(2, 1, &[0.5, -0.5]);
    let a2 = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 0., 0., 1., 0., 0., 0.]);
    let b2 = DMatrix::from_column_slice(3, 1, &[0., 0., 1.]);
    let s1 = Mode::linear("s1", a1)
        .and_then(|m| m.with_inputs(InputMap::Linear(b1)))
        .and_then(|m| m.with_feedback(feedback("steer_line").expect("built-in")))
        .expect("consistent shapes");
    let s2 = Mode::linear("s2", a2)
        .and_then(|m| m.with_inputs(InputMap::Linear(b2)))
        .expect("consistent shapes");
    DvSystem::new(vec![s1, s2]).expect("non-empty")
}

/// Individually unstabilizable pair on `ℝ²`/`ℝ³` with their feedbacks.
pub fn switched_pair() -> DvSystem {
    let a1 = DMatrix::from_row_slice(2, 2, &[0., 1., 0., 0.1]);
    let b1 = DMatrix::from_column_slice(2, 1, &[1., 0.]);
    let a2 = DMatrix::from_row_slice(3, 3, &[0.1, 0., 0., 0., 0., 1., 1., 0., 1.]);
    let b2 = DMatrix::from_column_slice(3, 1, &[0., 0., 1.]);
    let s1 = Mode::linear("s1", a1)
        .and_then(|m| m.with_inputs(InputMap::Linear(b1)))
        .and_then(|m| m.with_feedback(feedback("switched_s1").expect("built-in")))
        .expect("consistent shapes");
    let s2 = Mode::linear("s2", a2)
        .and_then(|m| m.with_inputs(InputMap::Linear(b2)))
        .and_then(|m| m.with_feedback(feedback("switched_s2").expect("built-in")))
        .expect("consistent shapes");
    DvSystem::new(vec![s1, s2]).expect("non-empty")
}

/// `scale · U`, with `U` an `n×n` matrix of uniform `[0, 1)` entries drawn
/// row by row from a ChaCha8 stream.
pub fn uniform_matrix(n: usize, scale: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = scale * rng.random::<f64>();
        }
    }
    m
}
