//! Turning a validated scenario into core objects.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use omega_core::builtins;
use omega_core::dynamics::{Disturbance, Feedback, InputMap, Integrator, Mode};
use omega_core::switching::{
    add_map, drop_map, make_signal, nearest_map, SignalSpec, Switch, SwitchingSignal, TransitionMap,
};
use omega_core::{CdVector, DvSystem, OutputMap, SimOptions, TransitionRule};

use crate::config::*;
use crate::CliError;

pub fn matrix(rows: &Rows) -> DMatrix<f64> {
    let c = rows.first().map_or(0, Vec::len);
    DMatrix::from_row_iterator(rows.len(), c, rows.iter().flatten().copied())
}

pub fn rows_of(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn require<'a, T>(v: &'a Option<T>, key: &str, command: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| {
        CliError::Config(ConfigError::single(key, format!("required by `{command}`")))
    })
}

fn mode(m: &ModeConfig) -> Result<Mode, CliError> {
    let mut mode = match (&m.a, &m.field) {
        (Some(a), _) => Mode::linear(m.label.clone(), matrix(a))?,
        (None, Some(f)) => builtins::field_mode(&m.label, f)?,
        (None, None) => unreachable!("validated"),
    };
    if let Some(b) = &m.b {
        mode = mode.with_inputs(InputMap::Linear(matrix(b)))?;
    }
    if let Some(g) = &m.input_fields {
        let fields = g
            .iter()
            .map(|name| builtins::field(name).map(|(_, f)| f).expect("validated"))
            .collect();
        mode = mode.with_inputs(InputMap::Fields(fields))?;
    }
    if let Some(name) = &m.feedback {
        mode = mode.with_feedback(builtins::feedback(name).expect("validated"))?;
    }
    if let Some(k) = &m.gain {
        let k = matrix(k);
        let v = m.offset.clone().unwrap_or_else(|| vec![0.0; k.nrows()]);
        mode = mode.with_feedback(Feedback::affine(k, DVector::from_vec(v)))?;
    }
    Ok(mode)
}

fn transition(m: &MapConfig, dims: &[usize]) -> Result<TransitionMap, CliError> {
    let (np, nq) = (dims[m.from], dims[m.to]);
    Ok(match m.kind {
        MapKind::Nearest => nearest_map(np, nq)?,
        MapKind::Drop => drop_map(np, nq, m.dropped.as_deref())?,
        MapKind::Add => add_map(np, nq)?,
        MapKind::Matrix => TransitionMap::new(matrix(m.matrix.as_ref().expect("validated")))?,
    })
}

/// Modes, transitions, output and impulse scale.
pub fn system(cfg: &ScenarioConfig, command: &str) -> Result<DvSystem, CliError> {
    if cfg.modes.is_empty() {
        return Err(CliError::Config(ConfigError::single(
            "modes",
            format!("required by `{command}`"),
        )));
    }
    let modes = cfg.modes.iter().map(mode).collect::<Result<Vec<_>, _>>()?;
    let mut sys = DvSystem::new(modes)?;
    if let Some(TransitionConfig::Explicit { maps }) = &cfg.transitions {
        let dims = sys.dims();
        let mut table = BTreeMap::new();
        for m in maps {
            table.insert((m.from, m.to), transition(m, &dims)?);
        }
        sys = sys.with_transitions(TransitionRule::Explicit(table))?;
    }
    match &cfg.output {
        Some(OutputConfig::Linear { h }) => sys = sys.with_output(OutputMap::Linear(matrix(h))),
        Some(OutputConfig::Function { name }) => {
            let (q, h) = builtins::function(name).expect("validated");
            sys = sys.with_output(OutputMap::Function { q, h });
        }
        None => {}
    }
    if let Some(d) = &cfg.disturbance {
        sys = sys.with_impulse_scale(d.mu)?;
    }
    Ok(sys)
}

pub fn signal(cfg: &ScenarioConfig, command: &str) -> Result<SwitchingSignal, CliError> {
    let horizon = *require(&cfg.horizon, "horizon", command)?;
    let spec = match require(&cfg.signal, "signal", command)? {
        SignalConfig::Fixed {
            initial_mode,
            switches,
        } => SignalSpec::Fixed {
            initial_mode: *initial_mode,
            switches: switches
                .iter()
                .map(|s| Switch {
                    time: s.time,
                    mode: s.mode,
                })
                .collect(),
        },
        SignalConfig::Periodic { modes, dwells } => SignalSpec::Periodic {
            modes: modes.clone(),
            dwells: dwells.clone(),
        },
        SignalConfig::Random {
            initial_mode,
            dwell_min,
            dwell_max,
            seed,
        } => SignalSpec::RandomDwell {
            initial_mode: *initial_mode,
            n_modes: cfg.modes.len(),
            dwell_min: *dwell_min,
            dwell_max: *dwell_max,
            seed: *seed,
        },
    };
    Ok(make_signal(&spec, horizon)?)
}

pub fn initial_state(cfg: &ScenarioConfig, command: &str) -> Result<CdVector, CliError> {
    Ok(CdVector::from_slice(require(&cfg.x0, "x0", command)?)?)
}

fn disturbance(d: &DisturbanceConfig) -> Option<Disturbance> {
    let eta = d.eta.as_deref()?;
    let dim = d.dim.expect("validated");
    let amp = d.amplitude.unwrap_or(1.0);
    Some(match eta {
        "zero" => Disturbance::zero(dim),
        "sine" => Disturbance::new(
            dim,
            Arc::new(move |t| (0..dim).map(|i| amp * (t + i as f64).sin()).collect()),
        )
        .expect("positive dimension"),
        _ => unreachable!("validated"),
    })
}

pub fn sim_options(cfg: &ScenarioConfig) -> SimOptions {
    SimOptions {
        step: cfg.step.unwrap_or(DEFAULT_STEP),
        integrator: match cfg.integrator {
            Some(IntegratorName::Expm) => Integrator::Expm,
            _ => Integrator::Rk4,
        },
        sample_stride: cfg.sample_stride.unwrap_or(1),
        controls: BTreeMap::new(),
        disturbance: cfg.disturbance.as_ref().and_then(disturbance),
    }
}

/// Reduction source matrix and initial state.
pub fn reduction_problem(r: &ReductionConfig) -> (DMatrix<f64>, Vec<f64>) {
    let a = match &r.matrix {
        MatrixSource::Explicit { rows } => matrix(rows),
        MatrixSource::ScaledIdentity { n, scale } => DMatrix::identity(*n, *n) * *scale,
        MatrixSource::DiagRamp { n, scale } => DMatrix::from_diagonal(&DVector::from_iterator(
            *n,
            (1..=*n).map(|i| scale * i as f64),
        )),
        MatrixSource::Uniform { n, scale, seed } => builtins::uniform_matrix(*n, *scale, *seed),
    };
    let x0 = match (&r.x0, r.x0_fill) {
        (Some(x), _) => x.clone(),
        (None, Some(v)) => vec![v; a.nrows()],
        (None, None) => unreachable!("validated"),
    };
    (a, x0)
}

/// `t_step, 2·t_step, …` up to `t_end` (inclusive within rounding).
pub fn sample_times(r: &ReductionConfig) -> Vec<f64> {
    let n = (r.t_end / r.t_step + 1e-9).floor() as usize;
    (1..=n).map(|k| k as f64 * r.t_step).collect()
}
