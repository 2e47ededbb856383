//! The three scalar checks on an honest factorisation: value, threshold,
//! and counted cost.
//!
//!     cargo run --example auth_methods

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spdc::client::{authenticate, Method};
use spdc::flops::OpCount;
use spdc::matrix::{lu_plain, random_matrix};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [4, 16, 64] {
        let x = random_matrix(n, &mut rng);
        let (l, u) = lu_plain(&x).unwrap();
        for method in Method::ALL {
            let mut ops = OpCount::new();
            let a = authenticate(&l, &u, &x, method, &mut rng, 3, &mut ops).unwrap();
            println!(
                "n={n:>3} {method}: |Q|={:.3e} eps={:.3e} ops={}",
                a.value,
                a.epsilon,
                ops.get()
            );
        }
    }
}
