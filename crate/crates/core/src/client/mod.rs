//! Client side: padding plan, result assembly, authentication and the
//! end-to-end protocol driver.

mod auth;
mod partition;
mod protocol;

pub use auth::{authenticate, error_scale, random_vector, threshold, AuthReport, Method, R_MAX, TAU0};
pub use partition::{assemble, det_from_diagonals, det_from_lu, plan_partition, PartitionPlan};
pub use protocol::{derive_bytes, run_protocol, ProtocolConfig, ProtocolMetrics, ProtocolOutcome};
