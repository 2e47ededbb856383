use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spdc::client::{assemble, authenticate, plan_partition, run_protocol, Method, ProtocolConfig};
use spdc::flops::OpCount;
use spdc::matrix::{
    augment, det_oracle, dominant_matrix, lu_plain, partition, rotate, rotation_sign, BorderFill, DetValue, Matrix,
    Rotation,
};
use spdc::netsim::{run_simulation, FaultSite, FaultSpec, SimMode};
use spdc::obfuscation::{key_gen, seed_gen, Mode};
use spdc::server::BlockLabel;

fn square(max: usize) -> impl Strategy<Value = Matrix> {
    (1..=max)
        .prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |d| Matrix::new(n, n, d).unwrap()))
}

fn dominant(min: usize, max: usize) -> impl Strategy<Value = Matrix> {
    (min..=max, any::<u64>()).prop_map(|(n, s)| dominant_matrix(n, &mut ChaCha8Rng::seed_from_u64(s)))
}

fn rotation() -> impl Strategy<Value = Rotation> {
    prop::sample::select(Rotation::ALL.to_vec())
}

fn mode() -> impl Strategy<Value = Mode> {
    prop::sample::select(vec![Mode::Ewd, Mode::Ewm])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn det_value_product_is_log_sum(a in -1e3f64..1e3, b in -1e3f64..1e3) {
        prop_assume!(a != 0.0 && b != 0.0);
        let p = DetValue::from_f64(a) * DetValue::from_f64(b);
        prop_assert_eq!(p.sign(), DetValue::from_f64(a * b).sign());
        prop_assert!((p.log_magnitude() - (a * b).abs().ln()).abs() < 1e-12);
    }

    #[test]
    fn det_value_survives_huge_products(k in 1usize..400) {
        // 1e300^k overflows f64 long before the end.
        let mut d = DetValue::from_f64(1.0);
        for _ in 0..k {
            d = d * DetValue::from_f64(-1e300);
        }
        prop_assert_eq!(d.sign(), if k % 2 == 0 { 1 } else { -1 });
        let want = k as f64 * 1e300f64.ln();
        prop_assert!((d.log_magnitude() - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn rotation_then_inverse_is_identity(m in square(9), t in rotation()) {
        prop_assert_eq!(rotate(&rotate(&m, t).unwrap(), t.inverse()).unwrap(), m);
    }

    #[test]
    fn rotation_sign_law(m in square(9), t in rotation()) {
        let n = m.rows();
        let (Ok(d), Ok(r)) = (det_oracle(&m), det_oracle(&rotate(&m, t).unwrap())) else {
            return Ok(());
        };
        prop_assert!(r.approx_eq(&(d * f64::from(rotation_sign(n, t))), 1e-10));
    }

    #[test]
    fn key_product_equals_psi(
        m in dominant(1, 40),
        l1 in prop::collection::vec(any::<u8>(), 16),
        l2 in prop::collection::vec(any::<u8>(), 16),
        md in mode(),
    ) {
        let seed = seed_gen(&l1, &m, &mut OpCount::new()).unwrap();
        let key = key_gen(&l2, &seed, m.rows(), md).unwrap();
        prop_assert_eq!(key.len(), m.rows());
        prop_assert!(key.v.iter().all(|v| v.is_finite() && *v > 0.0));
        let rel = (key.product() - seed.psi).abs() / seed.psi;
        prop_assert!(rel < 1e-12, "rel {}", rel);
    }

    #[test]
    fn zero_col_padding_keeps_det(m in dominant(1, 12), p in 0usize..6, s in any::<u64>()) {
        let x = augment(&m, p, BorderFill::ZeroCol, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
        prop_assert_eq!(x.rows(), m.rows() + p);
        prop_assert!(det_oracle(&x).unwrap().approx_eq(&det_oracle(&m).unwrap(), 1e-8));
    }

    #[test]
    fn padding_plan_is_minimal(n in 1usize..200, servers in 1usize..12) {
        let plan = plan_partition(n, servers);
        let side = plan.padded_side();
        prop_assert_eq!(side, n + plan.pad);
        prop_assert_eq!(side % servers, 0);
        prop_assert!(plan.block_size >= 2);
        // No smaller pad works.
        prop_assert!((0..plan.pad).all(|p| (n + p) % servers != 0 || (n + p) / servers < 2));
    }

    #[test]
    fn block_lu_matches_dense(m in dominant(2, 24), servers in 2usize..=5) {
        let plan = plan_partition(m.rows(), servers);
        let x = augment(&m, plan.pad, BorderFill::ZeroCol, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let grid = partition(&x, servers).unwrap();
        let sim = run_simulation(&plan, &grid, SimMode::Deterministic, &[], 0).unwrap();
        let (l, u) = assemble(servers, plan.block_size, &sim.results).unwrap();
        let (l0, u0) = lu_plain(&x).unwrap();
        prop_assert!(l.max_rel_diff(&l0) <= 1e-9);
        prop_assert!(u.max_rel_diff(&u0) <= 1e-9);
    }

    #[test]
    fn honest_factors_pass_every_method(m in dominant(1, 20), s in any::<u64>()) {
        let (l, u) = lu_plain(&m).unwrap();
        for method in Method::ALL {
            let rep = authenticate(&l, &u, &m, method, &mut ChaCha8Rng::seed_from_u64(s), 2, &mut OpCount::new()).unwrap();
            prop_assert!(rep.verdict, "{} {} > {}", method, rep.value, rep.epsilon);
        }
    }

    #[test]
    fn q3_is_trace_residual(m in dominant(1, 16)) {
        let (l, u) = lu_plain(&m).unwrap();
        let mut u2 = u.clone();
        u2[(0, 0)] += 0.5;
        let rep = authenticate(&l, &u2, &m, Method::Q3, &mut ChaCha8Rng::seed_from_u64(0), 2, &mut OpCount::new()).unwrap();
        let want = (l.matmul(&u2).unwrap().trace() - m.trace()).abs();
        prop_assert!((rep.value - want).abs() <= 1e-12 * want.max(1.0), "{} vs {}", rep.value, want);
    }

    #[test]
    fn protocol_recovers_det(m in dominant(1, 14), servers in 2usize..=4, md in mode(), s in any::<u64>()) {
        let want = det_oracle(&m).unwrap();
        let out = run_protocol(&m, servers, md, Method::Q2, &ProtocolConfig::from_seed(s)).unwrap();
        prop_assert_eq!(out.det_m.sign(), want.sign());
        prop_assert!(out.det_m.approx_eq(&want, 1e-6), "{} vs {}", out.det_m, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// A perturbed returned block must change what the client reassembles.
    #[test]
    fn fault_alters_result(m in dominant(4, 12), servers in 2usize..=4, s in any::<u64>()) {
        let plan = plan_partition(m.rows(), servers);
        let x = augment(&m, plan.pad, BorderFill::ZeroCol, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
        let grid = partition(&x, servers).unwrap();
        let target = 1 + (s as usize) % servers;
        let block = BlockLabel::u(target, servers);
        let fault = FaultSpec::additive(target, block, 1e-2).at(FaultSite::Result);
        let honest = run_simulation(&plan, &grid, SimMode::Deterministic, &[], s).unwrap();
        let bad = run_simulation(&plan, &grid, SimMode::Deterministic, &[fault], s).unwrap();
        prop_assert_eq!(bad.trace.faults.len(), 1);
        let find = |r: &[spdc::netsim::ServerResult]| r.iter().find(|r| r.server == target).unwrap().blocks.clone();
        prop_assert_ne!(find(&honest.results), find(&bad.results));
    }
}
