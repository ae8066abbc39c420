use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::integrate::{integrate_mode, IntegrationOptions, Integrator, DEFAULT_STEP};
use super::mode::{Disturbance, Drift, Feedback, Mode, VectorField};
use crate::cdspace::{project, project_slice, v_norm, CdVector};
use crate::dkstp::dk_product;
use crate::error::{OmegaError, Result};
use crate::switching::{nearest_map, JumpEvent, SwitchingSignal, TransitionMap};

/// How states are carried across a switch.
#[derive(Debug, Clone, PartialEq)]
pub enum TransitionRule {
    /// `x(t⁺) = Π^{n_p}_{n_q} x(t⁻)`.
    Nearest,
    /// Explicit maps keyed by `(from, to)` mode indices.
    Explicit(BTreeMap<(usize, usize), TransitionMap>),
}

/// Constant-dimension output.
#[derive(Clone)]
pub enum OutputMap {
    /// `y = H ⋉ x` with `H ∈ ℳ_{p×q}`.
    Linear(DMatrix<f64>),
    /// `y = h(Π^{n}_q x)`.
    Function { q: usize, h: VectorField },
}

impl fmt::Debug for OutputMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputMap::Linear(h) => f.debug_tuple("Linear").field(h).finish(),
            OutputMap::Function { q, .. } => write!(f, "Function {{ q: {q}, .. }}"),
        }
    }
}

impl OutputMap {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            OutputMap::Linear(h) => {
                let col = DMatrix::from_column_slice(x.len(), 1, x);
                dk_product(h, &col).as_slice().to_vec()
            }
            OutputMap::Function { q, h } => h(&project_slice(x, *q)),
        }
    }
}

/// A dimension-varying system: modes, a transition rule, an optional output
/// and the impulse scale `μ`.
#[derive(Debug, Clone)]
pub struct DvSystem {
    modes: Vec<Mode>,
    transitions: TransitionRule,
    output: Option<OutputMap>,
    impulse_scale: f64,
}

impl DvSystem {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(OmegaError::invalid("a system needs at least one mode"));
        }
        Ok(DvSystem {
            modes,
            transitions: TransitionRule::Nearest,
            output: None,
            impulse_scale: 0.0,
        })
    }

    pub fn with_transitions(mut self, rule: TransitionRule) -> Result<Self> {
        if let TransitionRule::Explicit(maps) = &rule {
            for (&(p, q), w) in maps {
                let (np, nq) = (self.mode_dim(p)?, self.mode_dim(q)?);
                if w.source_dim() != np || w.target_dim() != nq {
                    return Err(OmegaError::invalid(format!(
                        "map {p}->{q} is {}x{}, modes need {nq}x{np}",
                        w.target_dim(),
                        w.source_dim()
                    )));
                }
            }
        }
        self.transitions = rule;
        Ok(self)
    }

    pub fn with_output(mut self, output: OutputMap) -> Self {
        self.output = Some(output);
        self
    }

    pub fn with_impulse_scale(mut self, mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(OmegaError::invalid(format!(
                "impulse scale must be >= 0, got {mu}"
            )));
        }
        self.impulse_scale = mu;
        Ok(self)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn transitions(&self) -> &TransitionRule {
        &self.transitions
    }

    pub fn output(&self) -> Option<&OutputMap> {
        self.output.as_ref()
    }

    pub fn impulse_scale(&self) -> f64 {
        self.impulse_scale
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modes.iter().map(Mode::dim).collect()
    }

    fn mode_dim(&self, i: usize) -> Result<usize> {
        self.modes.get(i).map(Mode::dim).ok_or_else(|| {
            OmegaError::invalid(format!(
                "mode index {i} out of range (system has {} modes)",
                self.modes.len()
            ))
        })
    }

    /// The map used for a switch `p → q`.
    pub fn transition(&self, p: usize, q: usize) -> Result<TransitionMap> {
        let (np, nq) = (self.mode_dim(p)?, self.mode_dim(q)?);
        match &self.transitions {
            TransitionRule::Nearest => nearest_map(np, nq),
            TransitionRule::Explicit(maps) => match maps.get(&(p, q)) {
                Some(w) => Ok(w.clone()),
                None if np == nq => Ok(TransitionMap::identity(np)),
                None => Err(OmegaError::invalid(format!(
                    "no transition map for switch {p} -> {q}"
                ))),
            },
        }
    }

    /// Checks that every switch of `signal` can be carried out.
    pub fn validate_signal(&self, signal: &SwitchingSignal) -> Result<()> {
        self.mode_dim(signal.max_mode())?;
        let mut prev = signal.initial_mode();
        for s in signal.schedule() {
            self.transition(prev, s.mode)?;
            prev = s.mode;
        }
        Ok(())
    }
}

/// Simulation settings.
#[derive(Debug, Clone)]
pub struct SimOptions {
    pub step: f64,
    pub integrator: Integrator,
    /// Keep every `sample_stride`-th step (interval endpoints always kept).
    pub sample_stride: usize,
    /// Per-mode feedback overrides.
    pub controls: BTreeMap<usize, Feedback>,
    pub disturbance: Option<Disturbance>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            step: DEFAULT_STEP,
            integrator: Integrator::Rk4,
            sample_stride: 1,
            controls: BTreeMap::new(),
            disturbance: None,
        }
    }
}

impl SimOptions {
    pub fn with_step(step: f64) -> Self {
        SimOptions {
            step,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub mode: usize,
    pub dim: usize,
    pub state: Vec<f64>,
    pub v_norm: f64,
    pub output: Option<Vec<f64>>,
}

/// Sampled run plus one event per switch.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<JumpEvent>,
}

impl Trajectory {
    /// First sample of every dwell interval (the initial sample included).
    pub fn switch_entries(&self) -> Vec<&Sample> {
        let mut out: Vec<&Sample> = Vec::new();
        for (i, s) in self.samples.iter().enumerate() {
            let new_interval = i == 0 || {
                let p = &self.samples[i - 1];
                p.t == s.t && (p.mode != s.mode || p.dim != s.dim || p.state != s.state)
                    || p.mode != s.mode
            };
            if new_interval {
                out.push(s);
            }
        }
        out
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn max_dim(&self) -> usize {
        self.samples.iter().map(|s| s.dim).max().unwrap_or(0)
    }
}

/// Reset increment `v·(A ⋉ φ)` for linear drift, `v·Π φ` otherwise.
fn impulse_increment(mode: &Mode, direction: &CdVector, amplitude: f64) -> CdVector {
    let n = mode.dim();
    let raw = match mode.drift() {
        Drift::Linear(a) => {
            let phi = DMatrix::from_column_slice(direction.dim(), 1, direction.entries());
            CdVector::from(DVector::from_column_slice(dk_product(a, &phi).as_slice()))
        }
        Drift::Field(_) => project(direction, n),
    };
    raw.scale(amplitude)
}

/// Runs `system` under `signal` from `x0`.
///
/// Each dwell interval is integrated on its own grid, so every switch time is
/// hit exactly. At a switch the transition map is applied and a
/// [`JumpEvent`] is logged; with `μ > 0` the impulse is applied as an
/// additional reset.
pub fn simulate(
    system: &DvSystem,
    signal: &SwitchingSignal,
    x0: &CdVector,
    opts: &SimOptions,
) -> Result<Trajectory> {
    system.validate_signal(signal)?;
    if opts.sample_stride == 0 {
        return Err(OmegaError::invalid("sample stride must be positive"));
    }
    for &m in opts.controls.keys() {
        system.mode_dim(m)?;
    }
    let mu = system.impulse_scale;
    let mut traj = Trajectory::default();

    let first = signal.initial_mode();
    let n0 = system.modes[first].dim();
    let mut x = if x0.dim() == n0 {
        x0.clone()
    } else {
        let post = project(x0, n0);
        traj.events.push(JumpEvent::new(
            0.0,
            None,
            first,
            x0.clone(),
            post.clone(),
            0.0,
        ));
        post
    };

    let mut prev_mode: Option<usize> = None;
    for (start, end, mode_idx) in signal.intervals() {
        let mode = &system.modes[mode_idx];
        if let Some(p) = prev_mode {
            let w = system.transition(p, mode_idx)?;
            let post = w.apply(&x)?;
            let mut event = JumpEvent::new(start, Some(p), mode_idx, x.clone(), post.clone(), mu);
            x = post;
            if let (true, Some(phi)) = (mu > 0.0, event.direction.as_ref()) {
                let inc = impulse_increment(mode, phi, event.impulse_amplitude);
                x = CdVector::new(
                    x.entries()
                        .iter()
                        .zip(inc.entries())
                        .map(|(a, b)| a + b)
                        .collect(),
                )
                .map_err(|_| {
                    OmegaError::numeric("simulate", "impulse produced a non-finite state")
                        .at_time(start)
                })?;
                event.impulse = Some(inc);
            }
            traj.events.push(event);
        }

        let seg_opts = IntegrationOptions {
            step: opts.step,
            method: opts.integrator,
            control: opts.controls.get(&mode_idx).cloned(),
            disturbance: opts.disturbance.clone(),
        };
        let seg = integrate_mode(mode, x.entries(), start, end, &seg_opts)
            .map_err(|e| e.at_time_if_missing(start))?;
        let last = seg.times.len() - 1;
        for (k, (t, state)) in seg.times.iter().zip(&seg.states).enumerate() {
            if k % opts.sample_stride != 0 && k != last {
                continue;
            }
            let norm = v_norm(&CdVector::from_slice(state)?);
            traj.samples.push(Sample {
                t: *t,
                mode: mode_idx,
                dim: mode.dim(),
                state: state.clone(),
                v_norm: norm,
                output: system.output.as_ref().map(|h| h.eval(state)),
            });
        }
        x = CdVector::from_slice(seg.last_state())?;
        prev_mode = Some(mode_idx);
    }
    Ok(traj)
}

impl OmegaError {
    fn at_time_if_missing(self, t: f64) -> Self {
        match &self {
            OmegaError::NumericFailure { time: None, .. } => self.at_time(t),
            _ => self,
        }
    }
}
