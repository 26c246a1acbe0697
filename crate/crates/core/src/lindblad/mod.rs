//! Master-equation right-hand side and fixed-step propagation.

mod integrate;
mod system;

pub(crate) use integrate::sample_targets;
pub use integrate::{
    monitor_invariants, propagate, propagate_varying, step_rk4, uniform_samples, Integrator,
    IntegratorConfig, InvariantRecord, Propagation, Trajectory, MIN_EIG_ABORT, TRACE_ABORT,
};
pub use system::{lindblad_rhs, JumpOperator, LindbladSystem};
