//! How much bordering each (n, N) pair needs, and a check that it keeps
//! the determinant.
//!
//!     cargo run --example padding_plan

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spdc::client::plan_partition;
use spdc::matrix::{augment, det_oracle, dominant_matrix, BorderFill};

fn main() {
    print!("  n |");
    for s in 2..=6 {
        print!(" N={s}");
    }
    println!();
    for n in [2, 3, 4, 5, 7, 10, 13] {
        print!("{n:>3} |");
        for s in 2..=6 {
            print!(" {:>3}", plan_partition(n, s).pad);
        }
        println!();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = dominant_matrix(5, &mut rng);
    let plan = plan_partition(5, 4);
    let x = augment(&m, plan.pad, BorderFill::ZeroCol, &mut rng).unwrap();
    println!("\n5x5 on 4 servers -> {0}x{0}, block {1}", x.rows(), plan.block_size);
    println!("det before {}", det_oracle(&m).unwrap());
    println!("det after  {}", det_oracle(&x).unwrap());
}
