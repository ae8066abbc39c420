use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::cdspace::project_slice;
use crate::error::{OmegaError, Result};

/// A vector field (or output function) evaluated on a plain slice.
pub type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A state-feedback law `u = k(t, x)`.
pub type ControlLaw = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// Autonomous part of a mode.
#[derive(Clone)]
pub enum Drift {
    Linear(DMatrix<f64>),
    Field(VectorField),
}

/// Input directions `b_k` (columns of `B`) or input vector fields `g_k`.
#[derive(Clone)]
pub enum InputMap {
    Linear(DMatrix<f64>),
    Fields(Vec<VectorField>),
}

/// State feedback attached to a mode.
#[derive(Clone)]
pub enum Feedback {
    /// `u = K x + v`.
    Linear {
        gain: DMatrix<f64>,
        offset: DVector<f64>,
    },
    Custom(ControlLaw),
}

impl Feedback {
    pub fn gain(gain: DMatrix<f64>) -> Self {
        let offset = DVector::zeros(gain.nrows());
        Feedback::Linear { gain, offset }
    }

    pub fn affine(gain: DMatrix<f64>, offset: DVector<f64>) -> Self {
        Feedback::Linear { gain, offset }
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        match self {
            Feedback::Linear { gain, offset } => (gain * DVector::from_column_slice(x) + offset)
                .as_slice()
                .to_vec(),
            Feedback::Custom(law) => law(t, x),
        }
    }
}

impl fmt::Debug for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Drift::Linear(a) => f.debug_tuple("Linear").field(a).finish(),
            Drift::Field(_) => f.write_str("Field(<fn>)"),
        }
    }
}

impl fmt::Debug for InputMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputMap::Linear(b) => f.debug_tuple("Linear").field(b).finish(),
            InputMap::Fields(g) => write!(f, "Fields(<{} fns>)", g.len()),
        }
    }
}

impl fmt::Debug for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feedback::Linear { gain, offset } => f
                .debug_struct("Linear")
                .field("gain", gain)
                .field("offset", offset)
                .finish(),
            Feedback::Custom(_) => f.write_str("Custom(<fn>)"),
        }
    }
}

/// One fixed-dimension subsystem `ẋ = f(x) + Σ g_k(x) u_k`.
#[derive(Debug, Clone)]
pub struct Mode {
    label: String,
    dim: usize,
    drift: Drift,
    inputs: Option<InputMap>,
    feedback: Option<Feedback>,
}

impl Mode {
    /// `ẋ = A x`.
    pub fn linear(label: impl Into<String>, a: DMatrix<f64>) -> Result<Self> {
        let label = label.into();
        if a.nrows() == 0 || a.nrows() != a.ncols() {
            return Err(OmegaError::invalid(format!(
                "mode {label}: drift matrix must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(OmegaError::invalid(format!(
                "mode {label}: drift matrix has a non-finite entry"
            )));
        }
        Ok(Mode {
            dim: a.nrows(),
            label,
            drift: Drift::Linear(a),
            inputs: None,
            feedback: None,
        })
    }

    /// `ẋ = f(x)` on `ℝ^dim`.
    pub fn field(label: impl Into<String>, dim: usize, f: VectorField) -> Result<Self> {
        let label = label.into();
        if dim == 0 {
            return Err(OmegaError::invalid(format!(
                "mode {label}: dimension must be positive"
            )));
        }
        Ok(Mode {
            label,
            dim,
            drift: Drift::Field(f),
            inputs: None,
            feedback: None,
        })
    }

    pub fn with_inputs(mut self, inputs: InputMap) -> Result<Self> {
        if let InputMap::Linear(b) = &inputs {
            if b.nrows() != self.dim || b.ncols() == 0 {
                return Err(OmegaError::invalid(format!(
                    "mode {}: input matrix must be {}xk, got {}x{}",
                    self.label,
                    self.dim,
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        self.inputs = Some(inputs);
        self.check_feedback_shape()?;
        Ok(self)
    }

    pub fn with_feedback(mut self, feedback: Feedback) -> Result<Self> {
        self.feedback = Some(feedback);
        self.check_feedback_shape()?;
        Ok(self)
    }

    fn check_feedback_shape(&self) -> Result<()> {
        if let Some(Feedback::Linear { gain, offset }) = &self.feedback {
            let k = self.n_inputs();
            if gain.ncols() != self.dim
                || (k > 0 && gain.nrows() != k)
                || offset.len() != gain.nrows()
            {
                return Err(OmegaError::invalid(format!(
                    "mode {}: feedback gain must be {}x{} with a matching offset, got {}x{} and {}",
                    self.label,
                    k,
                    self.dim,
                    gain.nrows(),
                    gain.ncols(),
                    offset.len()
                )));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift(&self) -> &Drift {
        &self.drift
    }

    pub fn inputs(&self) -> Option<&InputMap> {
        self.inputs.as_ref()
    }

    pub fn feedback(&self) -> Option<&Feedback> {
        self.feedback.as_ref()
    }

    pub fn n_inputs(&self) -> usize {
        match &self.inputs {
            None => 0,
            Some(InputMap::Linear(b)) => b.ncols(),
            Some(InputMap::Fields(g)) => g.len(),
        }
    }

    /// Linear drift matrix, when the drift is linear.
    pub fn drift_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.drift {
            Drift::Linear(a) => Some(a),
            Drift::Field(_) => None,
        }
    }

    /// Input matrix `B`, when the inputs are linear.
    pub fn input_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.inputs {
            Some(InputMap::Linear(b)) => Some(b),
            _ => None,
        }
    }

    /// `A + BK` when the closed loop is linear and homogeneous.
    pub fn closed_loop_matrix(&self) -> Option<DMatrix<f64>> {
        let a = self.drift_matrix()?;
        match (&self.inputs, &self.feedback) {
            (_, None) | (None, _) => Some(a.clone()),
            (Some(InputMap::Linear(b)), Some(Feedback::Linear { gain, offset }))
                if offset.iter().all(|v| *v == 0.0) =>
            {
                Some(a + b * gain)
            }
            _ => None,
        }
    }

    /// Right-hand side at `(t, x)`. `shift` is added to the drift argument
    /// (disturbance coupling); `control` overrides the attached feedback.
    pub fn rhs(
        &self,
        t: f64,
        x: &[f64],
        shift: Option<&[f64]>,
        control: Option<&Feedback>,
    ) -> Result<Vec<f64>> {
        let n = self.dim;
        let shifted;
        let arg = match shift {
            Some(s) => {
                shifted = x.iter().zip(s).map(|(a, b)| a + b).collect::<Vec<_>>();
                shifted.as_slice()
            }
            None => x,
        };
        let mut dx = match &self.drift {
            Drift::Linear(a) => (a * DVector::from_column_slice(arg)).as_slice().to_vec(),
            Drift::Field(f) => f(arg),
        };
        if dx.len() != n {
            return Err(OmegaError::invalid(format!(
                "mode {}: drift returned {} components, expected {n}",
                self.label,
                dx.len()
            )));
        }

        let law = control.or(self.feedback.as_ref());
        if let (Some(inputs), Some(law)) = (&self.inputs, law) {
            let u = law.eval(t, x);
            if u.len() != self.n_inputs() {
                return Err(OmegaError::invalid(format!(
                    "mode {}: control has {} components, expected {}",
                    self.label,
                    u.len(),
                    self.n_inputs()
                )));
            }
            match inputs {
                InputMap::Linear(b) => {
                    let bu = b * DVector::from_column_slice(&u);
                    dx.iter_mut().zip(bu.iter()).for_each(|(d, v)| *d += v);
                }
                InputMap::Fields(g) => {
                    for (gk, uk) in g.iter().zip(&u) {
                        let col = gk(x);
                        if col.len() != n {
                            return Err(OmegaError::invalid(format!(
                                "mode {}: input field returned {} components, expected {n}",
                                self.label,
                                col.len()
                            )));
                        }
                        dx.iter_mut().zip(&col).for_each(|(d, c)| *d += c * uk);
                    }
                }
            }
        }
        Ok(dx)
    }
}

/// An additive disturbance `η(t) ∈ ℝ^ℓ` entering the drift argument.
#[derive(Clone)]
pub struct Disturbance {
    dim: usize,
    eval: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
}

impl fmt::Debug for Disturbance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Disturbance")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl Disturbance {
    pub fn new(dim: usize, eval: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>) -> Result<Self> {
        if dim == 0 {
            return Err(OmegaError::invalid(
                "disturbance dimension must be positive",
            ));
        }
        Ok(Disturbance { dim, eval })
    }

    pub fn zero(dim: usize) -> Self {
        Disturbance {
            dim,
            eval: Arc::new(move |_| vec![0.0; dim]),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let v = (self.eval)(t);
        if v.len() != self.dim {
            return Err(OmegaError::invalid(format!(
                "disturbance returned {} components, expected {}",
                v.len(),
                self.dim
            )));
        }
        Ok(v)
    }

    /// `Π^ℓ_n η(t)`: the part of the disturbance seen by an `n`-dim mode.
    pub fn projected(&self, t: f64, n: usize) -> Result<Vec<f64>> {
        Ok(project_slice(&self.eval(t)?, n))
    }
}
