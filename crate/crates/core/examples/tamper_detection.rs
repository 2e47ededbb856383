//! One server adds noise to a block it returns; each check is run against
//! the same fault.
//!
//!     cargo run --example tamper_detection

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spdc::client::{run_protocol, Method, ProtocolConfig};
use spdc::matrix::dominant_matrix;
use spdc::netsim::{FaultSite, FaultSpec};
use spdc::obfuscation::Mode;
use spdc::server::BlockLabel;
use spdc::SpdcError;

fn main() {
    let m = dominant_matrix(9, &mut ChaCha8Rng::seed_from_u64(3));
    for rel in [1e-2, 1e-6, 1e-9] {
        for method in Method::ALL {
            let fault = FaultSpec::additive(2, BlockLabel::u(2, 2), rel).at(FaultSite::Result);
            let cfg = ProtocolConfig::from_seed(1).with_faults(vec![fault]);
            match run_protocol(&m, 3, Mode::Ewd, method, &cfg) {
                Err(SpdcError::Tampered(a)) => {
                    println!("rel={rel:e} {method}: caught |Q|={:.3e} > {:.3e}", a.value, a.epsilon)
                }
                Ok(o) => println!(
                    "rel={rel:e} {method}: missed |Q|={:.3e} <= {:.3e}",
                    o.auth.value, o.auth.epsilon
                ),
                Err(e) => println!("rel={rel:e} {method}: {e}"),
            }
        }
    }
}
