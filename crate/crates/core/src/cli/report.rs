use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::client::{AuthReport, Method, ProtocolOutcome};
use crate::matrix::DetValue;

pub const METRICS_HEADER: &str =
    "n,N,method,cipher_flops,max_server_flops,critical_path_flops,auth_flops,decipher_flops,messages,reals_sent,verdict";

/// One metrics CSV row for a finished run.
pub fn metrics_row(n: usize, servers: usize, method: Method, outcome: &ProtocolOutcome) -> String {
    let m = &outcome.metrics;
    format!(
        "{n},{servers},{method},{},{},{},{},{},{},{},{}",
        m.cipher_flops,
        m.max_server_flops,
        m.critical_path_flops,
        m.auth_flops,
        m.decipher_flops,
        m.messages,
        m.reals_sent,
        u8::from(outcome.auth.verdict)
    )
}

/// Row for a run that ended without a determinant.
pub fn failed_metrics_row(n: usize, servers: usize, method: Method) -> String {
    format!("{n},{servers},{method},,,,,,,,0")
}

pub fn psi_digest(psi: f64) -> String {
    hex::encode(&Sha256::digest(psi.to_le_bytes())[..8])
}

fn push_auth(s: &mut String, a: &AuthReport) {
    let _ = writeln!(s, "auth_method {}", a.method);
    let _ = writeln!(s, "auth_value {:e}", a.value);
    let _ = writeln!(s, "auth_epsilon {:e}", a.epsilon);
    let _ = writeln!(s, "auth_verdict {}", u8::from(a.verdict));
    let _ = writeln!(
        s,
        "auth_r_digest {}",
        if a.r_digest.is_empty() { "-" } else { &a.r_digest }
    );
}

fn push_det(s: &mut String, d: &DetValue) {
    let _ = writeln!(s, "det_sign {}", d.sign());
    let _ = writeln!(s, "det_log_magnitude {:e}", d.log_magnitude());
    match d.to_f64() {
        Some(v) => {
            let _ = writeln!(s, "det_value {v:e}");
        }
        None => {
            let _ = writeln!(s, "det_value unrepresentable");
        }
    }
}

/// Plain `key value` report of a successful run.
pub fn render_report(n: usize, servers: usize, method: Method, o: &ProtocolOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "status ok");
    let _ = writeln!(s, "n {n}");
    let _ = writeln!(s, "servers {servers}");
    let _ = writeln!(s, "padding {}", o.plan.pad);
    let _ = writeln!(s, "block_size {}", o.plan.block_size);
    let _ = writeln!(s, "mode {}", o.mode);
    let _ = writeln!(s, "method {method}");
    let _ = writeln!(s, "theta {}", o.theta.degrees());
    let _ = writeln!(s, "psi_digest {}", psi_digest(o.psi));
    let _ = writeln!(s, "retries {}", o.retries);
    push_det(&mut s, &o.det_m);
    push_auth(&mut s, &o.auth);
    let m = &o.metrics;
    let _ = writeln!(s, "messages {}", m.messages);
    let _ = writeln!(s, "reals_sent {}", m.reals_sent);
    let _ = writeln!(s, "cipher_flops {}", m.cipher_flops);
    let _ = writeln!(s, "max_server_flops {}", m.max_server_flops);
    let _ = writeln!(s, "critical_path_flops {}", m.critical_path_flops);
    let _ = writeln!(s, "auth_flops {}", m.auth_flops);
    let _ = writeln!(s, "decipher_flops {}", m.decipher_flops);
    s
}

pub fn render_tamper_report(n: usize, servers: usize, auth: &AuthReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "status tampered");
    let _ = writeln!(s, "n {n}");
    let _ = writeln!(s, "servers {servers}");
    push_auth(&mut s, auth);
    s
}

pub fn render_failure_report(n: usize, servers: usize, status: &str, message: &str) -> String {
    format!("status {status}\nn {n}\nservers {servers}\nerror {message}\n")
}
