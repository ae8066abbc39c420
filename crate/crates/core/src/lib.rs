//! Cross-dimensional Euclidean space Ω and dimension-varying systems.
//!
//! - [`cdspace`]: vectors of arbitrary dimension, their equivalence, the
//!   V-inner product/norm/distance, least-squares projections and the
//!   divisor lattice of subspaces.
//! - [`dkstp`]: the dimension-keeping semi-tensor product and operator norm.
//! - [`switching`]: transition maps, switching signals and jump records.
//! - [`dynamics`]: modes, lifting, integration, simulation, common-space
//!   embedding and dwell-time bounds.
//! - [`analysis`]: controllability/observability, least-squares model
//!   reduction and disturbance-decoupling checks.
//! - [`builtins`]: named evaluators and feedbacks for the shipped examples.

pub mod analysis;
pub mod builtins;
pub mod cdspace;
pub mod dkstp;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod switching;

pub use analysis::{
    approx_error, ctrb_rank, intersection_basis, obs_rank, partial_ctrb, reachability_chain,
    reduce_model, restrict_field, span_membership, ErrorSeries, ReducedModel,
};
pub use cdspace::{
    angle, build_lattice, canonicalize, equivalent, project, projector, stp_add, stp_sub, v_dist,
    v_inner, v_norm, CdVector, LatticeClosure, Projector, SubspaceLattice,
};
pub use dkstp::{bridge, dk_product, op_vnorm, DimMatrix};
pub use dynamics::{
    dwell_bound, embed_common, expm, integrate_mode, lift_field, lift_function, simulate, DvSystem,
    Feedback, Mode, OutputMap, SimOptions, Trajectory, TransitionRule,
};
pub use error::{OmegaError, Result};
pub use switching::{
    add_map, compose_maps, drop_map, jump_gap, lipschitz_of, make_signal, nearest_map, JumpEvent,
    SignalSpec, Switch, SwitchingSignal, TransitionMap,
};
