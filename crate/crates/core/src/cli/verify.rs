//! Quick versions of the invariant suites, runnable from the binary.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::client::{plan_partition, run_protocol, Method, ProtocolConfig};
use crate::matrix::{det_oracle, dominant_matrix, lu_plain, random_matrix, rotate, rotation_sign, DetValue, Rotation};
use crate::netsim::{validate_trace, SimMode};
use crate::obfuscation::Mode;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, failures: Vec<String>, total: usize) -> CheckResult {
    CheckResult {
        name,
        passed: failures.is_empty(),
        detail: match failures.first() {
            None => format!("{total} cases"),
            Some(f) => format!("{} of {total} cases failed, first: {f}", failures.len()),
        },
    }
}

fn sign_law(rng: &mut ChaCha8Rng) -> CheckResult {
    let (mut fails, mut total) = (Vec::new(), 0);
    for n in 1..=8 {
        for _ in 0..10 {
            let m = random_matrix(n, rng);
            let Ok(d) = det_oracle(&m) else { continue };
            for t in Rotation::ALL {
                total += 1;
                let want = d * f64::from(rotation_sign(n, t));
                let got = rotate(&m, t).and_then(|r| det_oracle(&r));
                if !got.as_ref().is_ok_and(|g| g.approx_eq(&want, 1e-10)) {
                    fails.push(format!("n={n} theta={t}"));
                }
            }
        }
    }
    check("sign_law", fails, total)
}

fn padding() -> CheckResult {
    let (mut fails, mut total) = (Vec::new(), 0);
    for n in 1..=64 {
        for servers in 1..=8 {
            total += 1;
            let scan = (0..).find(|p| (n + p) % servers == 0 && (n + p) / servers > 1).unwrap();
            if plan_partition(n, servers).pad != scan {
                fails.push(format!("n={n} N={servers}"));
            }
        }
    }
    check("padding", fails, total)
}

fn round_trip(rng: &mut ChaCha8Rng, seed: u64) -> CheckResult {
    let (mut fails, mut total) = (Vec::new(), 0);
    for n in [3, 5, 8] {
        let m = dominant_matrix(n, rng);
        let want = det_oracle(&m).expect("dominant matrix");
        for servers in [2, 3] {
            for mode in [Mode::Ewd, Mode::Ewm] {
                for method in [Method::Q2, Method::Q3] {
                    total += 1;
                    let got =
                        run_protocol(&m, servers, mode, method, &ProtocolConfig::from_seed(seed)).map(|o| o.det_m);
                    if !got.as_ref().is_ok_and(|d| d.approx_eq(&want, 1e-6)) {
                        fails.push(format!("n={n} N={servers} {mode} {method}"));
                    }
                }
            }
        }
    }
    check("round_trip", fails, total)
}

fn block_lu(rng: &mut ChaCha8Rng, seed: u64) -> CheckResult {
    let (mut fails, mut total) = (Vec::new(), 0);
    for n in [5, 8, 12] {
        let m = dominant_matrix(n, rng);
        for servers in 2..=4 {
            total += 1;
            let ok = run_protocol(&m, servers, Mode::Ewd, Method::Q3, &ProtocolConfig::from_seed(seed))
                .ok()
                .and_then(|o| {
                    let (l, u) = lu_plain(&o.x_padded).ok()?;
                    Some(o.l.max_rel_diff(&l).max(o.u.max_rel_diff(&u)) <= 1e-9)
                });
            if ok != Some(true) {
                fails.push(format!("n={n} N={servers}"));
            }
        }
    }
    check("block_lu", fails, total)
}

fn topology(rng: &mut ChaCha8Rng, seed: u64) -> CheckResult {
    let (mut fails, mut total) = (Vec::new(), 0);
    for servers in 2..=6 {
        total += 1;
        let m = dominant_matrix(2 * servers + 1, rng);
        match run_protocol(&m, servers, Mode::Ewd, Method::Q2, &ProtocolConfig::from_seed(seed)) {
            Ok(o) => {
                let v = validate_trace(&o.trace, servers);
                if let Some(first) = v.first() {
                    fails.push(format!("N={servers}: {first}"));
                }
            }
            Err(e) => fails.push(format!("N={servers}: {e}")),
        }
    }
    check("topology", fails, total)
}

fn instrumentation(rng: &mut ChaCha8Rng, seed: u64) -> CheckResult {
    let (mut fails, mut total) = (Vec::new(), 0);
    for n in [8, 16] {
        total += 1;
        let m = dominant_matrix(n, rng);
        match run_protocol(&m, 2, Mode::Ewd, Method::Q3, &ProtocolConfig::from_seed(seed)) {
            Ok(o) => {
                let mt = o.metrics;
                let n64 = n as u64;
                if mt.cipher_flops != n64 * n64 || mt.decipher_flops > 2 * n64 || mt.auth_flops > 2 * n64 * (n64 + 1) {
                    fails.push(format!("n={n}: {mt:?}"));
                }
            }
            Err(e) => fails.push(format!("n={n}: {e}")),
        }
    }
    check("instrumentation", fails, total)
}

fn determinism(rng: &mut ChaCha8Rng, seed: u64) -> CheckResult {
    let m = dominant_matrix(9, rng);
    let run = |mode| {
        run_protocol(
            &m,
            3,
            Mode::Ewm,
            Method::Q2,
            &ProtocolConfig::from_seed(seed).with_sim_mode(mode),
        )
    };
    let mut fails = Vec::new();
    match (
        run(SimMode::Deterministic),
        run(SimMode::Deterministic),
        run(SimMode::Concurrent),
    ) {
        (Ok(a), Ok(b), Ok(c)) => {
            if a.trace.to_text() != b.trace.to_text() {
                fails.push("repeat run trace differs".to_string());
            }
            if a.trace.to_text() != c.trace.to_text() || a.l != c.l || a.u != c.u {
                fails.push("concurrent run differs".to_string());
            }
            if DetValue::log_magnitude(&a.det_m) != c.det_m.log_magnitude() {
                fails.push("determinant differs".to_string());
            }
        }
        _ => fails.push("run failed".to_string()),
    }
    check("determinism", fails, 3)
}

pub fn run_checks(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        sign_law(&mut rng),
        padding(),
        round_trip(&mut rng, seed),
        block_lu(&mut rng, seed),
        topology(&mut rng, seed),
        instrumentation(&mut rng, seed),
        determinism(&mut rng, seed),
    ]
}

/// `spdc verify`: prints one line per suite; exit 0 when all pass.
pub fn cmd_verify(seed: u64) -> i32 {
    let results = run_checks(seed);
    for r in &results {
        println!("{} {} ({})", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    if results.iter().all(|r| r.passed) {
        0
    } else {
        1
    }
}
