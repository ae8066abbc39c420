//! JSON scenario files: schema, defaults and validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use omega_core::builtins;

pub const DEFAULT_STEP: f64 = 1e-3;

/// Row-major matrix.
pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<ModeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<SignalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<TransitionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance: Option<DisturbanceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dwell: Option<DwellConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<VectorsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeConfig>,
}

/// One mode: either a drift matrix `a` or a built-in `field`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Rows>,
    /// Built-in input vector fields `g_k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_fields: Option<Vec<String>>,
    /// Built-in feedback name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<String>,
    /// `u = K x + v`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalConfig {
    Fixed {
        initial_mode: usize,
        switches: Vec<SwitchConfig>,
    },
    Periodic {
        modes: Vec<usize>,
        dwells: Vec<f64>,
    },
    Random {
        #[serde(default)]
        initial_mode: usize,
        dwell_min: f64,
        dwell_max: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchConfig {
    pub time: f64,
    pub mode: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransitionConfig {
    Nearest,
    Explicit { maps: Vec<MapConfig> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub from: usize,
    pub to: usize,
    pub kind: MapKind,
    /// For `matrix`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Rows>,
    /// For `drop`: 0-based coordinates removed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Nearest,
    Drop,
    Add,
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorName {
    Rk4,
    Expm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OutputConfig {
    /// `y = H ⋉ x`.
    Linear { h: Rows },
    /// Built-in `h` evaluated on the projection to its input dimension.
    Function { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceConfig {
    /// Impulse scale.
    #[serde(default)]
    pub mu: f64,
    /// `zero` or `sine`; absent means no additive disturbance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

pub const DISTURBANCES: &[&str] = &["zero", "sine"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DwellConfig {
    pub gamma: f64,
    /// Jump constant; taken from the transition maps when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub start: usize,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionConfig {
    pub matrix: MatrixSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Rows>,
    /// Initial state; `x0_fill` repeats one value instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_fill: Option<f64>,
    pub targets: Vec<usize>,
    /// Sample times `t_step, 2·t_step, …, t_end`.
    pub t_end: f64,
    pub t_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSource {
    Explicit {
        rows: Rows,
    },
    /// `scale · I_n`.
    ScaledIdentity {
        n: usize,
        scale: f64,
    },
    /// `scale · diag(1, …, n)`.
    DiagRamp {
        n: usize,
        scale: f64,
    },
    /// `scale · U`, `U` uniform on `[0, 1)`.
    Uniform {
        n: usize,
        scale: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorsConfig {
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub project_to: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub closure: ClosureName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureName {
    #[default]
    Full,
    Join,
}

/// A problem tied to a location in the scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub diagnostics: Vec<Diagnostic>,
}

impl ConfigError {
    pub fn single(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            diagnostics: vec![Diagnostic {
                path: path.into(),
                message: message.into(),
            }],
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ScenarioConfig {
    /// Parses JSON; syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| {
            ConfigError::single(
                format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::single(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config types serialize")
    }

    /// Fills the simulation defaults so that the returned value serializes
    /// with every knob explicit.
    pub fn normalized(&self) -> Self {
        let mut c = self.clone();
        if !c.modes.is_empty() {
            c.step.get_or_insert(DEFAULT_STEP);
            c.integrator.get_or_insert(IntegratorName::Rk4);
            c.sample_stride.get_or_insert(1);
            c.transitions.get_or_insert(TransitionConfig::Nearest);
        }
        c
    }

    /// Every problem found, or `Ok`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut v = Validator::default();
        v.check(self);
        if v.out.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { diagnostics: v.out })
        }
    }

    /// Dimension of each mode as declared (0 when undeterminable).
    pub fn mode_dims(&self) -> Vec<usize> {
        self.modes.iter().map(mode_dim).collect()
    }
}

fn mode_dim(m: &ModeConfig) -> usize {
    match (&m.a, &m.field) {
        (Some(a), _) => a.len(),
        (None, Some(f)) => builtins::field(f).map(|(d, _)| d).unwrap_or(0),
        _ => 0,
    }
}

#[derive(Default)]
struct Validator {
    out: Vec<Diagnostic>,
}

impl Validator {
    fn err(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.out.push(Diagnostic {
            path: path.into(),
            message: message.into(),
        });
    }

    fn finite(&mut self, path: &str, vals: &[f64]) {
        if vals.iter().any(|v| !v.is_finite()) {
            self.err(path, "entries must be finite");
        }
    }

    fn positive(&mut self, path: &str, v: f64) {
        if !(v.is_finite() && v > 0.0) {
            self.err(path, format!("must be a positive finite number, got {v}"));
        }
    }

    /// Rectangular, non-empty; returns `(rows, cols)`.
    fn rows(&mut self, path: &str, m: &Rows) -> Option<(usize, usize)> {
        let Some(first) = m.first() else {
            self.err(path, "matrix has no rows");
            return None;
        };
        let c = first.len();
        if c == 0 {
            self.err(path, "matrix has no columns");
            return None;
        }
        if let Some(i) = m.iter().position(|r| r.len() != c) {
            self.err(
                format!("{path}[{i}]"),
                format!("row has {} entries, expected {c}", m[i].len()),
            );
            return None;
        }
        self.finite(path, &m.concat());
        Some((m.len(), c))
    }

    fn check(&mut self, cfg: &ScenarioConfig) {
        let mut labels = BTreeSet::new();
        for (i, m) in cfg.modes.iter().enumerate() {
            if !labels.insert(m.label.as_str()) {
                self.err(
                    format!("modes[{i}].label"),
                    format!("duplicate label `{}`", m.label),
                );
            }
            self.mode(&format!("modes[{i}]"), m);
        }
        let k = cfg.modes.len();
        let dims = cfg.mode_dims();
        let mode_ref = |v: &mut Self, path: String, idx: usize| {
            if idx >= k {
                v.err(path, format!("mode index {idx} out of range ({k} modes)"));
            }
        };

        if let Some(s) = &cfg.signal {
            match s {
                SignalConfig::Fixed {
                    initial_mode,
                    switches,
                } => {
                    mode_ref(self, "signal.initial_mode".into(), *initial_mode);
                    let mut prev = 0.0;
                    for (i, sw) in switches.iter().enumerate() {
                        mode_ref(self, format!("signal.switches[{i}].mode"), sw.mode);
                        if !(sw.time.is_finite() && sw.time > prev) {
                            self.err(
                                format!("signal.switches[{i}].time"),
                                "switch times must be positive and strictly increasing",
                            );
                        }
                        prev = sw.time;
                    }
                }
                SignalConfig::Periodic { modes, dwells } => {
                    if modes.is_empty() {
                        self.err("signal.modes", "needs at least one mode");
                    }
                    for (i, &m) in modes.iter().enumerate() {
                        mode_ref(self, format!("signal.modes[{i}]"), m);
                    }
                    if dwells.is_empty() {
                        self.err("signal.dwells", "needs at least one dwell");
                    }
                    for (i, &d) in dwells.iter().enumerate() {
                        self.positive(&format!("signal.dwells[{i}]"), d);
                    }
                }
                SignalConfig::Random {
                    initial_mode,
                    dwell_min,
                    dwell_max,
                    ..
                } => {
                    mode_ref(self, "signal.initial_mode".into(), *initial_mode);
                    self.positive("signal.dwell_min", *dwell_min);
                    if !(dwell_max.is_finite() && dwell_max >= dwell_min) {
                        self.err("signal.dwell_max", "must be finite and at least dwell_min");
                    }
                    if k < 2 {
                        self.err("signal", "a random signal needs at least two modes");
                    }
                }
            }
        }

        if let Some(TransitionConfig::Explicit { maps }) = &cfg.transitions {
            let mut seen = BTreeSet::new();
            for (i, m) in maps.iter().enumerate() {
                let path = format!("transitions.maps[{i}]");
                mode_ref(self, format!("{path}.from"), m.from);
                mode_ref(self, format!("{path}.to"), m.to);
                if !seen.insert((m.from, m.to)) {
                    self.err(&path, format!("duplicate map {} -> {}", m.from, m.to));
                }
                if m.from >= k || m.to >= k {
                    continue;
                }
                let (np, nq) = (dims[m.from], dims[m.to]);
                match m.kind {
                    MapKind::Matrix => match &m.matrix {
                        None => self.err(format!("{path}.matrix"), "required for kind `matrix`"),
                        Some(w) => {
                            if let Some(shape) = self.rows(&format!("{path}.matrix"), w) {
                                if shape != (nq, np) {
                                    self.err(
                                        format!("{path}.matrix"),
                                        format!("shape {shape:?}, expected ({nq}, {np})"),
                                    );
                                }
                            }
                        }
                    },
                    MapKind::Drop => {
                        if nq >= np {
                            self.err(
                                format!("{path}.kind"),
                                format!("drop needs a smaller target ({np} -> {nq})"),
                            );
                        }
                        if let Some(d) = &m.dropped {
                            if d.len() + nq != np || d.iter().any(|&j| j >= np) {
                                self.err(
                                    format!("{path}.dropped"),
                                    format!(
                                        "must list {} distinct coordinates below {np}",
                                        np.saturating_sub(nq)
                                    ),
                                );
                            }
                        }
                    }
                    MapKind::Add => {
                        if nq <= np {
                            self.err(
                                format!("{path}.kind"),
                                format!("add needs a larger target ({np} -> {nq})"),
                            );
                        }
                    }
                    MapKind::Nearest => {}
                }
            }
        }

        if let Some(x0) = &cfg.x0 {
            if x0.is_empty() {
                self.err("x0", "must not be empty");
            }
            self.finite("x0", x0);
        }
        if let Some(h) = cfg.horizon {
            self.positive("horizon", h);
        }
        if let Some(h) = cfg.step {
            self.positive("step", h);
        }
        if cfg.sample_stride == Some(0) {
            self.err("sample_stride", "must be at least 1");
        }
        if cfg.integrator == Some(IntegratorName::Expm) {
            for (i, m) in cfg.modes.iter().enumerate() {
                if m.a.is_none() || m.b.is_some() || m.input_fields.is_some() {
                    self.err(
                        format!("modes[{i}]"),
                        "the expm integrator needs linear autonomous modes",
                    );
                }
            }
        }

        match &cfg.output {
            Some(OutputConfig::Linear { h }) => {
                self.rows("output.h", h);
            }
            Some(OutputConfig::Function { name }) if builtins::function(name).is_none() => {
                self.err("output.name", format!("unknown built-in function `{name}`"));
            }
            _ => {}
        }

        if let Some(d) = &cfg.disturbance {
            if !(d.mu.is_finite() && d.mu >= 0.0) {
                self.err("disturbance.mu", "must be finite and non-negative");
            }
            if let Some(eta) = &d.eta {
                if !DISTURBANCES.contains(&eta.as_str()) {
                    self.err(
                        "disturbance.eta",
                        format!(
                            "unknown disturbance `{eta}` (known: {})",
                            DISTURBANCES.join(", ")
                        ),
                    );
                }
                match d.dim {
                    Some(0) | None => {
                        self.err("disturbance.dim", "required and positive when eta is set")
                    }
                    _ => {}
                }
            }
            if let Some(a) = d.amplitude {
                self.finite("disturbance.amplitude", &[a]);
            }
        }

        if let Some(d) = &cfg.dwell {
            if !(d.gamma > 0.0 && d.gamma < 1.0) {
                self.err("dwell.gamma", "must lie in (0, 1)");
            }
            if let Some(l) = d.lipschitz {
                if !(l.is_finite() && l >= 0.0) {
                    self.err("dwell.lipschitz", "must be finite and non-negative");
                }
            }
        }
        if let Some(c) = &cfg.chain {
            mode_ref(self, "chain.start".into(), c.start);
            mode_ref(self, "chain.target".into(), c.target);
        }
        if let Some(r) = &cfg.reduction {
            self.reduction(r);
        }
        if let Some(v) = &cfg.vectors {
            if v.points.is_empty() {
                self.err("vectors.points", "needs at least one point");
            }
            for (i, p) in v.points.iter().enumerate() {
                if p.is_empty() {
                    self.err(format!("vectors.points[{i}]"), "must not be empty");
                }
                self.finite(&format!("vectors.points[{i}]"), p);
            }
            if v.project_to.contains(&0) {
                self.err("vectors.project_to", "dimensions must be positive");
            }
        }
        if let Some(l) = &cfg.lattice {
            if l.dims.is_empty() || l.dims.contains(&0) {
                self.err("lattice.dims", "needs positive dimensions");
            }
        }
    }

    fn mode(&mut self, path: &str, m: &ModeConfig) {
        let n = match (&m.a, &m.field) {
            (Some(_), Some(_)) | (None, None) => {
                self.err(path, "give exactly one of `a` and `field`");
                return;
            }
            (Some(a), None) => match self.rows(&format!("{path}.a"), a) {
                Some((r, c)) if r == c => r,
                Some((r, c)) => {
                    self.err(format!("{path}.a"), format!("must be square, got {r}x{c}"));
                    return;
                }
                None => return,
            },
            (None, Some(f)) => match builtins::field(f) {
                Some((d, _)) => d,
                None => {
                    self.err(
                        format!("{path}.field"),
                        format!("unknown built-in field `{f}`"),
                    );
                    return;
                }
            },
        };
        let inputs = match (&m.b, &m.input_fields) {
            (Some(_), Some(_)) => {
                self.err(path, "give at most one of `b` and `input_fields`");
                return;
            }
            (Some(b), None) => match self.rows(&format!("{path}.b"), b) {
                Some((r, c)) if r == n => c,
                Some((r, _)) => {
                    self.err(
                        format!("{path}.b"),
                        format!("has {r} rows, mode dimension is {n}"),
                    );
                    return;
                }
                None => return,
            },
            (None, Some(g)) => {
                for (i, name) in g.iter().enumerate() {
                    match builtins::field(name) {
                        Some((d, _)) if d == n => {}
                        Some((d, _)) => self.err(
                            format!("{path}.input_fields[{i}]"),
                            format!("`{name}` has dimension {d}, mode dimension is {n}"),
                        ),
                        None => self.err(
                            format!("{path}.input_fields[{i}]"),
                            format!("unknown built-in field `{name}`"),
                        ),
                    }
                }
                g.len()
            }
            (None, None) => 0,
        };
        match (&m.feedback, &m.gain) {
            (Some(_), Some(_)) => self.err(path, "give at most one of `feedback` and `gain`"),
            (Some(name), None) => {
                if builtins::feedback(name).is_none() {
                    self.err(
                        format!("{path}.feedback"),
                        format!("unknown built-in feedback `{name}`"),
                    );
                }
                if inputs == 0 {
                    self.err(format!("{path}.feedback"), "mode has no inputs");
                }
            }
            (None, Some(k)) => {
                if let Some(shape) = self.rows(&format!("{path}.gain"), k) {
                    if shape != (inputs, n) {
                        self.err(
                            format!("{path}.gain"),
                            format!("shape {shape:?}, expected ({inputs}, {n})"),
                        );
                    }
                }
            }
            (None, None) => {}
        }
        if let Some(v) = &m.offset {
            if m.gain.is_none() {
                self.err(
                    format!("{path}.offset"),
                    "only allowed together with `gain`",
                );
            } else if v.len() != inputs {
                self.err(
                    format!("{path}.offset"),
                    format!("has {} entries, mode has {inputs} inputs", v.len()),
                );
            }
            self.finite(&format!("{path}.offset"), v);
        }
    }

    fn reduction(&mut self, r: &ReductionConfig) {
        let n = match &r.matrix {
            MatrixSource::Explicit { rows } => match self.rows("reduction.matrix.rows", rows) {
                Some((a, b)) if a == b => a,
                Some(_) => {
                    self.err("reduction.matrix.rows", "must be square");
                    return;
                }
                None => return,
            },
            MatrixSource::ScaledIdentity { n, scale }
            | MatrixSource::DiagRamp { n, scale }
            | MatrixSource::Uniform { n, scale, .. } => {
                self.finite("reduction.matrix.scale", &[*scale]);
                if *n == 0 {
                    self.err("reduction.matrix.n", "must be positive");
                    return;
                }
                *n
            }
        };
        match (&r.x0, r.x0_fill) {
            (Some(x), None) => {
                if x.len() != n {
                    self.err(
                        "reduction.x0",
                        format!("has {} entries, system dimension is {n}", x.len()),
                    );
                }
                self.finite("reduction.x0", x);
            }
            (None, Some(v)) => self.finite("reduction.x0_fill", &[v]),
            _ => self.err("reduction", "give exactly one of `x0` and `x0_fill`"),
        }
        if let Some(b) = &r.b {
            if let Some((rows, _)) = self.rows("reduction.b", b) {
                if rows != n {
                    self.err("reduction.b", format!("has {rows} rows, expected {n}"));
                }
            }
        }
        if let Some(c) = &r.c {
            if let Some((_, cols)) = self.rows("reduction.c", c) {
                if cols != n {
                    self.err("reduction.c", format!("has {cols} columns, expected {n}"));
                }
            }
        }
        if r.targets.is_empty() || r.targets.contains(&0) {
            self.err("reduction.targets", "needs positive target dimensions");
        }
        self.positive("reduction.t_end", r.t_end);
        self.positive("reduction.t_step", r.t_step);
        if r.t_step > 0.0 && r.t_end / r.t_step > 1e6 {
            self.err("reduction.t_step", "more than 10^6 sample times");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "name": "demo",
        "modes": [
            {"label": "s1", "a": [[0, 1], [0, 0.1]], "b": [[1], [0]], "gain": [[-1, -1]]},
            {"label": "s2", "field": "rotation"}
        ],
        "signal": {"kind": "periodic", "modes": [0, 1], "dwells": [1, 2]},
        "x0": [5, 6],
        "horizon": 6,
        "output": {"kind": "linear", "h": [[1, 1]]},
        "disturbance": {"mu": 0.5, "eta": "sine", "dim": 2, "amplitude": 0.1},
        "dwell": {"gamma": 0.03},
        "lattice": {"dims": [2, 3]}
    }"#;

    #[test]
    fn round_trip_after_normalization() {
        let c = ScenarioConfig::from_json(SAMPLE).unwrap();
        c.validate().unwrap();
        let n = c.normalized();
        assert_eq!(n.step, Some(DEFAULT_STEP));
        let back = ScenarioConfig::from_json(&n.to_json()).unwrap();
        assert_eq!(back, n);
        assert_eq!(back.normalized(), n);
    }

    #[test]
    fn syntax_errors_report_line() {
        let e = ScenarioConfig::from_json("{\n  \"modes\": [,]\n}").unwrap_err();
        assert!(e.diagnostics[0].path.starts_with("line 2"), "{e}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ScenarioConfig::from_json(r#"{"hrizon": 3}"#).is_err());
    }

    #[test]
    fn field_paths_in_diagnostics() {
        let c = ScenarioConfig::from_json(
            r#"{
            "modes": [
                {"label": "a", "a": [[1, 2]]},
                {"label": "a", "field": "nope"}
            ],
            "signal": {"kind": "periodic", "modes": [0, 5], "dwells": [-1]},
            "step": 0
        }"#,
        )
        .unwrap();
        let e = c.validate().unwrap_err();
        let paths: Vec<&str> = e.diagnostics.iter().map(|d| d.path.as_str()).collect();
        for p in [
            "modes[0].a",
            "modes[1].label",
            "modes[1].field",
            "signal.modes[1]",
            "signal.dwells[0]",
            "step",
        ] {
            assert!(paths.contains(&p), "missing {p} in {paths:?}");
        }
    }

    #[test]
    fn explicit_map_shapes_checked() {
        let c = ScenarioConfig::from_json(
            r#"{
            "modes": [{"label": "a", "a": [[1, 0], [0, 1]]}, {"label": "b", "a": [[1]]}],
            "transitions": {"rule": "explicit", "maps": [
                {"from": 0, "to": 1, "kind": "matrix", "matrix": [[1, 0], [0, 1]]},
                {"from": 1, "to": 0, "kind": "drop"}
            ]}
        }"#,
        )
        .unwrap();
        let e = c.validate().unwrap_err();
        assert_eq!(e.diagnostics.len(), 2, "{e}");
    }
}
