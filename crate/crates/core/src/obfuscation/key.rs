use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::SeedBundle;
use crate::error::{Result, SpdcError};

/// Element-wise obfuscation variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Row `i` divided by `v_i`.
    Ewd,
    /// Row `i` multiplied by `v_i`.
    Ewm,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ewd => "EWD",
            Mode::Ewm => "EWM",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "EWD" => Ok(Mode::Ewd),
            "EWM" => Ok(Mode::Ewm),
            _ => Err(format!("unknown mode {s:?} (expected EWD or EWM)")),
        }
    }
}

/// Half-width of the log-space draw: factors stay within `[1/8, 8]` of the
/// geometric centre before re-centring.
const LOG_SPREAD: f64 = 2.079_441_541_679_835_8; // ln 8
/// Draws with `|v - 1|` inside this window are redrawn.
const NEAR_ONE: f64 = 1e-3;
/// Hard invariant on every emitted factor.
const MIN_DISTANCE_FROM_ONE: f64 = 1e-6;
const MAX_ROUNDS: usize = 1000;

/// Secret blinding vector with `prod(v) = psi` and no `v_i` equal to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BlindingKey {
    pub v: Vec<f64>,
    pub mode: Mode,
    pub lambda2: Vec<u8>,
}

impl BlindingKey {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn product(&self) -> f64 {
        self.v.iter().product()
    }
}

fn keyed_rng(lambda2: &[u8], psi: f64) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(b"spdc/keygen/v1");
    h.update((lambda2.len() as u64).to_le_bytes());
    h.update(lambda2);
    h.update(psi.to_le_bytes());
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&h.finalize());
    ChaCha20Rng::from_seed(seed)
}

/// Generates the blinding vector for an `n x n` plaintext.
///
/// Log-factors `z_i` are drawn uniformly from `[-ln 8, ln 8]` by a ChaCha20
/// stream keyed on `(lambda2, psi)`, re-centred so they sum to zero, and
/// shifted by `ln(psi) / n`. The last factor is then fixed as
/// `psi / prod(v_1..v_{n-1})`. Any factor landing within `1e-3` of one has its
/// log-factor redrawn. Every factor ends up within `[1/64, 64]` of
/// `psi^(1/n)`.
pub fn key_gen(lambda2: &[u8], seed: &SeedBundle, n: usize, mode: Mode) -> Result<BlindingKey> {
    if n == 0 {
        return Err(SpdcError::KeyGen("key length must be at least 1".into()));
    }
    if !(seed.psi.is_finite() && seed.psi > 0.0 && seed.psi != 1.0) {
        return Err(SpdcError::KeyGen(format!("invalid seed psi = {}", seed.psi)));
    }
    if n == 1 {
        return Ok(BlindingKey {
            v: vec![seed.psi],
            mode,
            lambda2: lambda2.to_vec(),
        });
    }

    let mut rng = keyed_rng(lambda2, seed.psi);
    let centre = seed.psi.ln() / n as f64;
    let mut z: Vec<f64> = (0..n).map(|_| rng.random_range(-LOG_SPREAD..=LOG_SPREAD)).collect();

    for _ in 0..MAX_ROUNDS {
        let mean = z.iter().sum::<f64>() / n as f64;
        let mut v: Vec<f64> = z[..n - 1].iter().map(|zi| (centre + zi - mean).exp()).collect();
        let partial: f64 = v.iter().product();
        v.push(seed.psi / partial);

        let bad: Vec<usize> = v
            .iter()
            .enumerate()
            .filter(|(i, vi)| {
                let window = if *i + 1 == n { MIN_DISTANCE_FROM_ONE } else { NEAR_ONE };
                (**vi - 1.0).abs() <= window || !vi.is_finite()
            })
            .map(|(i, _)| i)
            .collect();
        if bad.is_empty() {
            return Ok(BlindingKey {
                v,
                mode,
                lambda2: lambda2.to_vec(),
            });
        }
        for i in bad {
            z[i] = rng.random_range(-LOG_SPREAD..=LOG_SPREAD);
        }
    }
    Err(SpdcError::KeyGen(format!(
        "no admissible blinding vector after {MAX_ROUNDS} rounds (n = {n}, psi = {})",
        seed.psi
    )))
}
