//! Determinant of a rotated matrix, against the closed-form sign.
//!
//!     cargo run --example rotation_sign

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spdc::matrix::{det_oracle, random_matrix, rotate, rotation_sign, Rotation};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    println!(
        "{:>3} {:>6} {:>5} {:>14} {:>14}",
        "n", "theta", "sign", "det(M)", "det(rot M)"
    );
    for n in 1..=7 {
        let m = random_matrix(n, &mut rng);
        let d = det_oracle(&m).unwrap();
        for t in Rotation::ALL {
            let r = det_oracle(&rotate(&m, t).unwrap()).unwrap();
            println!(
                "{n:>3} {:>6} {:>5} {:>14.6e} {:>14.6e}",
                t.degrees(),
                rotation_sign(n, t),
                d.to_f64().unwrap(),
                r.to_f64().unwrap()
            );
        }
    }
}
