//! Blind a matrix on the client, take its determinant in the clear, and
//! undo the blinding. No servers involved.
//!
//!     cargo run --example obfuscate_and_recover

use spdc::flops::OpCount;
use spdc::matrix::{det_oracle, Matrix};
use spdc::obfuscation::{cipher, decipher, key_gen, seed_gen, KeyExport, Mode};

fn main() {
    let m = Matrix::from_rows(&[
        [2.0, -1.0, 0.5, 3.0],
        [1.0, 4.0, -2.0, 0.0],
        [0.0, 1.5, 3.0, -1.0],
        [-2.0, 0.0, 1.0, 5.0],
    ])
    .unwrap();

    for mode in [Mode::Ewd, Mode::Ewm] {
        let mut ops = OpCount::new();
        let seed = seed_gen(b"example-lambda-1", &m, &mut ops).unwrap();
        let key = key_gen(b"example-lambda-2", &seed, m.rows(), mode).unwrap();
        let env = cipher(&key, &seed, &m, &mut ops).unwrap();

        let det_x = det_oracle(&env.x).unwrap();
        let det_m = decipher(&seed, &env.meta, det_x, &mut ops);

        println!("{mode}: psi = {:.4}, theta = {}", seed.psi, env.meta.theta);
        println!("  det(X) = {det_x}");
        println!("  recovered {det_m}, direct {}", det_oracle(&m).unwrap());
        print!(
            "{}",
            KeyExport {
                lambda1: seed.lambda1.clone(),
                psi: seed.psi,
                mode,
                v: key.v.clone(),
                theta: env.meta.theta,
            }
            .to_text()
        );
    }
}
