//! Library side of the `spdc` binary: the four commands as functions that
//! take parsed options and return exit codes, so tests can drive them
//! without a subprocess.
//!
//! Exit codes of `run`: 0 verified, 1 usage or I/O error, 2 tampering
//! detected, 3 every retry hit a singular pivot.

mod report;
mod verify;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use report::{
    failed_metrics_row, metrics_row, psi_digest, render_failure_report, render_report, render_tamper_report,
    METRICS_HEADER,
};
pub use verify::{cmd_verify, run_checks, CheckResult};

use crate::client::{run_protocol, Method, ProtocolConfig, ProtocolOutcome};
use crate::error::{Result, SpdcError};
use crate::matrix::{dominant_matrix, read_matrix, Matrix};
use crate::netsim::{validate_trace, FaultSpec, SimMode, Trace};
use crate::obfuscation::Mode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_TAMPERED: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceFormat {
    #[default]
    Text,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub servers: usize,
    pub mode: Mode,
    pub method: Method,
    /// Hex; derived from `rng_seed` when absent.
    pub lambda1: Option<String>,
    pub lambda2: Option<String>,
    pub rng_seed: u64,
    pub max_retries: u32,
    pub fault: Option<FaultSpec>,
    pub concurrent: bool,
    pub out: Option<PathBuf>,
    pub trace_out: Option<PathBuf>,
    pub trace_format: TraceFormat,
    pub metrics_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            servers: 2,
            mode: Mode::Ewd,
            method: Method::Q2,
            lambda1: None,
            lambda2: None,
            rng_seed: 1,
            max_retries: 3,
            fault: None,
            concurrent: false,
            out: None,
            trace_out: None,
            trace_format: TraceFormat::Text,
            metrics_out: None,
        }
    }
}

fn decode_hex(field: &str, s: &str) -> Result<Vec<u8>> {
    let bytes = hex::decode(s.trim()).map_err(|e| SpdcError::InvalidMatrix(format!("{field}: {e}")))?;
    if bytes.is_empty() {
        return Err(SpdcError::InvalidMatrix(format!("{field} must not be empty")));
    }
    Ok(bytes)
}

impl RunConfig {
    pub fn protocol_config(&self) -> Result<ProtocolConfig> {
        if self.servers < 2 {
            return Err(SpdcError::InvalidMatrix(format!(
                "--servers must be at least 2, got {}",
                self.servers
            )));
        }
        let mut cfg = ProtocolConfig::from_seed(self.rng_seed);
        if let Some(h) = &self.lambda1 {
            cfg.lambda1 = decode_hex("lambda1", h)?;
        }
        if let Some(h) = &self.lambda2 {
            cfg.lambda2 = decode_hex("lambda2", h)?;
        }
        cfg.max_retries = self.max_retries;
        cfg.sim_mode = if self.concurrent {
            SimMode::Concurrent
        } else {
            SimMode::Deterministic
        };
        cfg.faults = self.fault.iter().cloned().collect();
        Ok(cfg)
    }
}

/// Everything `run` produces, before anything is written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub status: i32,
    pub report: String,
    pub outcome: Option<ProtocolOutcome>,
    pub metrics: String,
}

impl RunOutput {
    pub fn trace_text(&self, format: TraceFormat) -> Option<String> {
        self.outcome.as_ref().map(|o| match format {
            TraceFormat::Text => o.trace.to_text(),
            TraceFormat::Csv => o.trace.to_csv(),
        })
    }
}

/// Runs the protocol on `m` and renders the report. Errors are returned
/// only for bad configuration; protocol outcomes map to exit statuses.
pub fn execute_run(cfg: &RunConfig, m: &Matrix) -> Result<RunOutput> {
    let n = m.side()?;
    let pc = cfg.protocol_config()?;
    let header = format!("{METRICS_HEADER}\n");
    match run_protocol(m, cfg.servers, cfg.mode, cfg.method, &pc) {
        Ok(o) => Ok(RunOutput {
            status: EXIT_OK,
            report: render_report(n, cfg.servers, cfg.method, &o),
            metrics: format!("{header}{}\n", metrics_row(n, cfg.servers, cfg.method, &o)),
            outcome: Some(o),
        }),
        Err(SpdcError::Tampered(auth)) => Ok(RunOutput {
            status: EXIT_TAMPERED,
            report: render_tamper_report(n, cfg.servers, &auth),
            metrics: format!("{header}{}\n", failed_metrics_row(n, cfg.servers, cfg.method)),
            outcome: None,
        }),
        Err(e @ SpdcError::RetriesExhausted { .. }) => Ok(RunOutput {
            status: EXIT_SINGULAR,
            report: render_failure_report(n, cfg.servers, "singular", &e.to_string()),
            metrics: format!("{header}{}\n", failed_metrics_row(n, cfg.servers, cfg.method)),
            outcome: None,
        }),
        Err(e) => Err(e),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)?;
    Ok(())
}

/// `spdc run`: reads the matrix, runs, writes the report (to `--out` or
/// stdout), trace and metrics.
pub fn cmd_run(cfg: &RunConfig, matrix_path: &Path) -> i32 {
    let go = || -> Result<i32> {
        let text = fs::read_to_string(matrix_path)?;
        let m = read_matrix(&text)?;
        let out = execute_run(cfg, &m)?;
        match &cfg.out {
            Some(p) => write_file(p, &out.report)?,
            None => {
                let _ = std::io::stdout().write_all(out.report.as_bytes());
            }
        }
        if let (Some(p), Some(t)) = (&cfg.trace_out, out.trace_text(cfg.trace_format)) {
            write_file(p, &t)?;
        }
        if let Some(p) = &cfg.metrics_out {
            write_file(p, &out.metrics)?;
        }
        Ok(out.status)
    };
    match go() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}: {e}", matrix_path.display());
            EXIT_USAGE
        }
    }
}

/// Deterministic matrix for sweep entry `(n, servers)`.
pub fn bench_matrix(n: usize, rng_seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ (n as u64).wrapping_mul(0x2545_F491_4F6C_DD1D));
    dominant_matrix(n, &mut rng)
}

/// Metrics CSV for every `(n, N, method)` of the sweep.
pub fn bench_csv(cfg: &RunConfig, sizes: &[usize], servers: &[usize], methods: &[Method]) -> Result<String> {
    if sizes.is_empty() || servers.is_empty() || methods.is_empty() {
        return Err(SpdcError::InvalidMatrix("bench sweeps must be nonempty".into()));
    }
    let mut csv = format!("{METRICS_HEADER}\n");
    for &n in sizes {
        let m = bench_matrix(n, cfg.rng_seed);
        for &nn in servers {
            for &method in methods {
                let run = RunConfig {
                    servers: nn,
                    method,
                    ..cfg.clone()
                };
                let out = execute_run(&run, &m)?;
                csv.push_str(out.metrics.lines().nth(1).unwrap_or_default());
                csv.push('\n');
            }
        }
    }
    Ok(csv)
}

pub fn cmd_bench(cfg: &RunConfig, sizes: &[usize], servers: &[usize], methods: &[Method]) -> i32 {
    let go = || -> Result<()> {
        let csv = bench_csv(cfg, sizes, servers, methods)?;
        match &cfg.metrics_out {
            Some(p) => write_file(p, &csv),
            None => {
                let _ = std::io::stdout().write_all(csv.as_bytes());
                Ok(())
            }
        }
    };
    match go() {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// `spdc trace`: re-validates a stored trace. Exit 0 when clean, 2 when
/// violations were found, 1 on read or parse errors.
pub fn cmd_trace(path: &Path, servers: Option<usize>) -> i32 {
    let trace = match fs::read_to_string(path)
        .map_err(SpdcError::from)
        .and_then(|t| Trace::parse(&t))
    {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_USAGE;
        }
    };
    let n = servers.unwrap_or(trace.servers);
    let violations = validate_trace(&trace, n);
    println!(
        "{} events, {} servers, {} violations",
        trace.events.len(),
        n,
        violations.len()
    );
    for v in &violations {
        println!("violation: {v}");
    }
    if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_TAMPERED
    }
}
