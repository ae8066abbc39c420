//! Modes, lifting, integration and the dimension-varying simulator.

pub mod dwell;
pub mod embed;
pub mod expm;
pub mod integrate;
pub mod lift;
pub mod mode;
pub mod simulate;

pub use dwell::{
    dwell_bound, dwell_bound_matrices, is_hurwitz, DwellGrid, DwellReport, LipschitzSource,
};
pub use embed::{check_embedding, embed_common, EmbeddedSystem, EquivalenceReport, INTEGRATOR_TOL};
pub use expm::expm;
pub use integrate::{integrate_mode, IntegrationOptions, Integrator, Segment, DEFAULT_STEP};
pub use lift::{lift_field, lift_function};
pub use mode::{ControlLaw, Disturbance, Drift, Feedback, InputMap, Mode, VectorField};
pub use simulate::{simulate, DvSystem, OutputMap, Sample, SimOptions, Trajectory, TransitionRule};
