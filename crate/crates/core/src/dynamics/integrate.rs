use nalgebra::DVector;

use super::expm::expm;
use super::mode::{Disturbance, Feedback, Mode};
use crate::error::{OmegaError, Result};

/// Default fixed step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Steps closer than this fraction of `h` to the end are merged into it.
const LANDING_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Classical fixed-step Runge–Kutta of order four.
    #[default]
    Rk4,
    /// Exact propagation `x ← e^{hA} x`; linear autonomous modes only.
    Expm,
}

/// Knobs shared by [`integrate_mode`] and the simulator.
#[derive(Debug, Clone)]
pub struct IntegrationOptions {
    pub step: f64,
    pub method: Integrator,
    /// Overrides the mode's own feedback.
    pub control: Option<Feedback>,
    pub disturbance: Option<Disturbance>,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            step: DEFAULT_STEP,
            method: Integrator::Rk4,
            control: None,
            disturbance: None,
        }
    }
}

impl IntegrationOptions {
    pub fn with_step(step: f64) -> Self {
        IntegrationOptions {
            step,
            ..Default::default()
        }
    }
}

/// Sampled solution on one interval; the first and last entries are the
/// interval endpoints exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Segment {
    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("segment has at least one sample")
    }
}

/// `t0, t0 + h, …`, ending exactly on `t1` (last step shortened if needed).
pub(crate) fn time_grid(t0: f64, t1: f64, h: f64) -> Vec<f64> {
    let span = t1 - t0;
    let full = (span / h).floor() as usize;
    let mut times: Vec<f64> = (0..=full).map(|k| t0 + k as f64 * h).collect();
    let last = *times.last().unwrap();
    if times.len() > 1 && t1 - last <= LANDING_SLACK * h {
        *times.last_mut().unwrap() = t1;
    } else if t1 > last {
        times.push(t1);
    }
    times
}

fn check_finite(x: &[f64], t: f64) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(OmegaError::numeric("integrate_mode", "state became non-finite").at_time(t))
    }
}

/// Integrates one mode from `x0` over `[t0, t1]`.
pub fn integrate_mode(
    mode: &Mode,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: &IntegrationOptions,
) -> Result<Segment> {
    let n = mode.dim();
    if x0.len() != n {
        return Err(OmegaError::invalid(format!(
            "mode {} is {n}-dimensional, initial state has {} entries",
            mode.label(),
            x0.len()
        )));
    }
    if !(opts.step.is_finite() && opts.step > 0.0) {
        return Err(OmegaError::invalid(format!(
            "step must be positive, got {}",
            opts.step
        )));
    }
    if t1 < t0 || t0.is_nan() || t1.is_nan() {
        return Err(OmegaError::invalid(format!(
            "interval [{t0}, {t1}] is reversed"
        )));
    }
    check_finite(x0, t0)?;
    let times = time_grid(t0, t1, opts.step);
    match opts.method {
        Integrator::Rk4 => rk4(mode, x0, times, opts),
        Integrator::Expm => propagate_exact(mode, x0, times, opts),
    }
}

fn rk4(mode: &Mode, x0: &[f64], times: Vec<f64>, opts: &IntegrationOptions) -> Result<Segment> {
    let control = opts.control.as_ref();
    let shift_at = |t: f64| -> Result<Option<Vec<f64>>> {
        opts.disturbance
            .as_ref()
            .map(|d| d.projected(t, mode.dim()))
            .transpose()
    };
    let f = |t: f64, x: &[f64]| -> Result<Vec<f64>> {
        let shift = shift_at(t)?;
        mode.rhs(t, x, shift.as_deref(), control)
    };

    let mut states = Vec::with_capacity(times.len());
    states.push(x0.to_vec());
    for w in times.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let x = states.last().unwrap();
        let k1 = f(t, x)?;
        let x2: Vec<f64> = x.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
        let k2 = f(t + 0.5 * h, &x2)?;
        let x3: Vec<f64> = x.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
        let k3 = f(t + 0.5 * h, &x3)?;
        let x4: Vec<f64> = x.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
        let k4 = f(t + h, &x4)?;
        let next: Vec<f64> = (0..x.len())
            .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        check_finite(&next, w[1])?;
        states.push(next);
    }
    Ok(Segment { times, states })
}

fn propagate_exact(
    mode: &Mode,
    x0: &[f64],
    times: Vec<f64>,
    opts: &IntegrationOptions,
) -> Result<Segment> {
    let closed = match &opts.control {
        None => mode.closed_loop_matrix(),
        Some(k) => mode
            .clone()
            .with_feedback(k.clone())
            .ok()
            .and_then(|m| m.closed_loop_matrix()),
    };
    let a = match (closed, &opts.disturbance) {
        (Some(a), None) => a,
        _ => {
            return Err(OmegaError::invalid(format!(
            "mode {}: the exact propagator needs a linear, homogeneous, undisturbed closed loop",
            mode.label()
        )))
        }
    };
    let full_step = expm(&a, opts.step)?;
    let mut states = Vec::with_capacity(times.len());
    let mut x = DVector::from_column_slice(x0);
    states.push(x0.to_vec());
    for w in times.windows(2) {
        let h = w[1] - w[0];
        x = if h == opts.step {
            &full_step * &x
        } else {
            expm(&a, h)? * &x
        };
        check_finite(x.as_slice(), w[1])?;
        states.push(x.as_slice().to_vec());
    }
    Ok(Segment { times, states })
}
