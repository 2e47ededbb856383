//! Blinded, multi-server determinant computation.
//!
//! A client hides a square matrix behind a row-wise blinding vector and a
//! seed-selected quarter-turn rotation, pads it, and hands block rows to a
//! chain of edge servers. The servers run a block LU factorisation while
//! streaming `U` blocks one way down the chain. The client checks the
//! returned factors with a scalar test and unblinds the determinant.
//!
//! ```
//! use spdc::client::{run_protocol, Method, ProtocolConfig};
//! use spdc::matrix::{det_oracle, Matrix};
//! use spdc::obfuscation::Mode;
//!
//! let m = Matrix::from_rows(&[[4.0, 1.0, 0.5], [1.0, 3.0, -1.0], [0.0, 2.0, 5.0]]).unwrap();
//! let out = run_protocol(&m, 2, Mode::Ewd, Method::Q2, &ProtocolConfig::from_seed(1)).unwrap();
//! assert!(out.det_m.approx_eq(&det_oracle(&m).unwrap(), 1e-9));
//! ```

pub mod cli;
pub mod client;
pub mod error;
pub mod flops;
pub mod matrix;
pub mod netsim;
pub mod obfuscation;
pub mod server;

pub use error::{Result, SpdcError};
