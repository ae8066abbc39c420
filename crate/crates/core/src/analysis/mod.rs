//! Controllability, observability, model reduction and DDP checks.

pub mod ctrb;
pub mod ddp;
pub mod reduce;

pub use ctrb::{
    ctrb_rank, ctrb_report, intersection_basis, kalman_matrix, mode_output_matrix, obs_rank,
    partial_ctrb, reachability_chain, ControllabilityReport,
};
pub use ddp::{in_span, restrict_field, span_membership, Evaluator};
pub use reduce::{
    aggregate_run, approx_error, reduce_model, AggregateRun, ErrorSeries, ReducedModel,
};
