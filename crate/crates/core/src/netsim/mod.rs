//! In-process network for the server chain: message delivery, fault
//! injection, and the trace the topology checks run on.

mod fault;
mod sim;
mod trace;
mod validate;

pub use fault::{tamper, FaultInjector, FaultRecord, FaultSite, FaultSpec, Perturbation};
pub use sim::{run_simulation, ServerResult, SimMode, SimOutcome};
pub use trace::{PhaseRecord, Trace, TraceEvent};
pub use validate::{reference_schedule, validate_trace, Violation};
