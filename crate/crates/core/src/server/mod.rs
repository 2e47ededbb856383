//! Edge-server side of the parallel block LU: one state machine per block
//! row, talking only to its successor and to the client.

mod kernels;
mod message;
mod state;

pub use kernels::{compute_l_block, compute_u_block, factor_diag};
pub use message::{BlockKind, BlockLabel, MessageKind, Node, ServerMessage};
pub use state::{forward_schedule, result_labels, Phase, ServerState};
