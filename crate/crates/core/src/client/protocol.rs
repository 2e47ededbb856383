use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::auth::{authenticate, AuthReport, Method};
use super::partition::{assemble, det_from_diagonals, plan_partition, PartitionPlan};
use crate::error::{Result, SpdcError};
use crate::flops::OpCount;
use crate::matrix::{augment, partition, BorderFill, DetValue, Matrix, Rotation};
use crate::netsim::{run_simulation, FaultSpec, SimMode, Trace};
use crate::obfuscation::{cipher, decipher, key_gen, seed_gen, Mode};

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub lambda1: Vec<u8>,
    pub lambda2: Vec<u8>,
    pub rng_seed: u64,
    pub max_retries: u32,
    pub sim_mode: SimMode,
    pub faults: Vec<FaultSpec>,
}

impl ProtocolConfig {
    /// Config whose secrets are derived from `rng_seed` alone.
    pub fn from_seed(rng_seed: u64) -> Self {
        ProtocolConfig {
            lambda1: derive_bytes(b"spdc/lambda1", rng_seed, 16),
            lambda2: derive_bytes(b"spdc/lambda2", rng_seed, 16),
            rng_seed,
            max_retries: 3,
            sim_mode: SimMode::Deterministic,
            faults: Vec::new(),
        }
    }

    pub fn with_faults(mut self, faults: Vec<FaultSpec>) -> Self {
        self.faults = faults;
        self
    }

    pub fn with_sim_mode(mut self, mode: SimMode) -> Self {
        self.sim_mode = mode;
        self
    }
}

pub fn derive_bytes(tag: &[u8], seed: u64, len: usize) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update(tag);
    h.update(seed.to_le_bytes());
    h.finalize()[..len.min(32)].to_vec()
}

/// Independent, reproducible stream for one purpose within one attempt.
fn stream(seed: u64, purpose: &str, attempt: u32) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"spdc/stream");
    h.update(seed.to_le_bytes());
    h.update(purpose.as_bytes());
    h.update(attempt.to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Secret for attempt `k`. The first attempt uses the configured bytes.
fn rekey(base: &[u8], attempt: u32) -> Vec<u8> {
    let mut out = base.to_vec();
    if attempt > 0 {
        out.extend_from_slice(b"/retry");
        out.extend_from_slice(&attempt.to_le_bytes());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProtocolMetrics {
    pub cipher_flops: u64,
    pub max_server_flops: u64,
    pub critical_path_flops: u64,
    pub auth_flops: u64,
    pub decipher_flops: u64,
    pub messages: usize,
    pub reals_sent: usize,
}

#[derive(Debug, Clone)]
pub struct ProtocolOutcome {
    pub det_m: DetValue,
    pub auth: AuthReport,
    pub trace: Trace,
    /// Failed attempts before the successful one.
    pub retries: u32,
    pub plan: PartitionPlan,
    pub theta: Rotation,
    pub psi: f64,
    pub mode: Mode,
    pub metrics: ProtocolMetrics,
    /// Assembled factors of the padded ciphertext.
    pub l: Matrix,
    pub u: Matrix,
    pub x_padded: Matrix,
}

/// Computes `det(m)` through the full blinded, multi-server pipeline.
///
/// A singular leading block on some server makes that attempt fail; the
/// client then re-derives both secrets and starts over, up to
/// `config.max_retries` times.
pub fn run_protocol(
    m: &Matrix,
    servers: usize,
    mode: Mode,
    method: Method,
    config: &ProtocolConfig,
) -> Result<ProtocolOutcome> {
    let n = m.side()?;
    if n == 0 {
        return Err(SpdcError::InvalidMatrix("empty matrix".into()));
    }
    if servers < 2 {
        return Err(SpdcError::InvalidMatrix(format!(
            "need at least 2 servers, got {servers}"
        )));
    }
    if !m.all_finite() {
        return Err(SpdcError::InvalidMatrix("matrix has non-finite entries".into()));
    }
    for attempt in 0..=config.max_retries {
        match attempt_once(m, servers, mode, method, config, attempt) {
            Err(SpdcError::ServerFailure { .. }) => continue,
            Ok(mut outcome) => {
                outcome.retries = attempt;
                return Ok(outcome);
            }
            Err(e) => return Err(e),
        }
    }
    Err(SpdcError::RetriesExhausted {
        attempts: config.max_retries as usize + 1,
    })
}

fn attempt_once(
    m: &Matrix,
    servers: usize,
    mode: Mode,
    method: Method,
    config: &ProtocolConfig,
    attempt: u32,
) -> Result<ProtocolOutcome> {
    let n = m.rows();
    let mut seed_ops = OpCount::new();
    let seed = seed_gen(&rekey(&config.lambda1, attempt), m, &mut seed_ops)?;
    let key = key_gen(&rekey(&config.lambda2, attempt), &seed, n, mode)?;

    let mut cipher_ops = OpCount::new();
    let mut env = cipher(&key, &seed, m, &mut cipher_ops)?;
    let plan = plan_partition(n, servers);
    env.meta.pad = plan.pad;
    let x = augment(
        &env.x,
        plan.pad,
        BorderFill::ZeroCol,
        &mut stream(config.rng_seed, "augment", attempt),
    )?;
    let grid = partition(&x, servers)?;

    let sim_seed = u64::from_le_bytes(
        derive_bytes(b"spdc/faults", config.rng_seed ^ u64::from(attempt), 8)
            .try_into()
            .expect("8 bytes"),
    );
    let sim = run_simulation(&plan, &grid, config.sim_mode, &config.faults, sim_seed)?;
    let (l, u) = assemble(servers, plan.block_size, &sim.results)?;

    let mut auth_ops = OpCount::new();
    let auth = authenticate(
        &l,
        &u,
        &x,
        method,
        &mut stream(config.rng_seed, "auth", attempt),
        servers,
        &mut auth_ops,
    )?;
    if !auth.verdict {
        return Err(SpdcError::Tampered(Box::new(auth)));
    }

    // Zero-column bordering leaves U's padded diagonal at exactly 1, so only
    // the leading n pairs carry information.
    let mut decipher_ops = OpCount::new();
    let det_x = det_from_diagonals(&l, &u, n, &mut decipher_ops)?;
    let det_m = decipher(&seed, &env.meta, det_x, &mut decipher_ops);

    let trace = sim.trace;
    let metrics = ProtocolMetrics {
        cipher_flops: cipher_ops.get(),
        max_server_flops: trace.max_server_flops(),
        critical_path_flops: trace.critical_path_flops,
        auth_flops: auth_ops.get(),
        decipher_flops: decipher_ops.get(),
        messages: trace.message_count(),
        reals_sent: trace.reals_sent(),
    };
    Ok(ProtocolOutcome {
        det_m,
        auth,
        trace,
        retries: attempt,
        plan,
        theta: env.meta.theta,
        psi: seed.psi,
        mode,
        metrics,
        l,
        u,
        x_padded: x,
    })
}
