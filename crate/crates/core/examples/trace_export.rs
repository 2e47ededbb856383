//! Dump the message trace of a 4-server run and validate it again after a
//! round trip through text.
//!
//!     cargo run --example trace_export

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spdc::client::{run_protocol, Method, ProtocolConfig};
use spdc::matrix::dominant_matrix;
use spdc::netsim::{validate_trace, Trace};
use spdc::obfuscation::Mode;

fn main() {
    let m = dominant_matrix(8, &mut ChaCha8Rng::seed_from_u64(4));
    let o = run_protocol(&m, 4, Mode::Ewm, Method::Q3, &ProtocolConfig::from_seed(2)).unwrap();
    let text = o.trace.to_text();
    print!("{text}");
    let back = Trace::parse(&text).unwrap();
    println!("# violations after reparse: {}", validate_trace(&back, 4).len());
}
