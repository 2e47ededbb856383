//! Factor a matrix on N simulated servers and compare with a dense LU.
//!
//!     cargo run --example parallel_block_lu -- 12 3

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spdc::client::{assemble, plan_partition};
use spdc::matrix::{augment, dominant_matrix, lu_plain, partition, BorderFill};
use spdc::netsim::{run_simulation, SimMode};

fn main() {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(12);
    let servers = args.next().unwrap_or(3);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let plan = plan_partition(n, servers);
    let x = augment(&dominant_matrix(n, &mut rng), plan.pad, BorderFill::ZeroCol, &mut rng).unwrap();
    let grid = partition(&x, servers).unwrap();

    let sim = run_simulation(&plan, &grid, SimMode::Concurrent, &[], 0).unwrap();
    let (l, u) = assemble(servers, plan.block_size, &sim.results).unwrap();
    let (l0, u0) = lu_plain(&x).unwrap();

    println!("n={n} N={servers} padded={} block={}", x.rows(), plan.block_size);
    println!("max rel diff L {:e}, U {:e}", l.max_rel_diff(&l0), u.max_rel_diff(&u0));
    for (s, f) in sim.trace.flops.iter().enumerate() {
        println!("S{} flops {f}", s + 1);
    }
    println!("critical path {}", sim.trace.critical_path_flops);
}
