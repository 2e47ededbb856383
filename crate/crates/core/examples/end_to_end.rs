//! The whole pipeline: blind, pad, split, factor on N servers, check,
//! recover.
//!
//!     cargo run --example end_to_end

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spdc::client::{run_protocol, Method, ProtocolConfig};
use spdc::matrix::{det_oracle, dominant_matrix};
use spdc::obfuscation::Mode;

fn main() {
    let m = dominant_matrix(10, &mut ChaCha8Rng::seed_from_u64(99));
    let want = det_oracle(&m).unwrap();
    for servers in 2..=5 {
        let o = run_protocol(&m, servers, Mode::Ewd, Method::Q2, &ProtocolConfig::from_seed(7)).unwrap();
        println!(
            "N={servers} pad={} theta={:>3} det={} (oracle {want}) |Q|={:.2e} eps={:.2e} messages={}",
            o.plan.pad,
            o.theta.degrees(),
            o.det_m,
            o.auth.value,
            o.auth.epsilon,
            o.metrics.messages
        );
    }
}
