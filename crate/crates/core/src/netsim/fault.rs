//! Output tampering by a malicious server.
//!
//! A fault rewrites one named block whenever the target server emits it. The
//! tampered value is computed once and reused, so a server that forwards a
//! block downstream and also returns it lies consistently.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::Matrix;
use crate::server::{BlockKind, BlockLabel, MessageKind, Node, ServerMessage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// Add `±magnitude * max|block|` to one entry.
    Additive,
    /// Replace the block's structural entries with uniform noise of the
    /// block's own scale.
    ReplaceRandom,
}

/// Which emissions of the block are tampered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultSite {
    Anywhere,
    /// Only `U_BLOCKS` sent downstream.
    Transit,
    /// Only the `RESULT` returned to the client.
    Result,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultSpec {
    pub target: usize,
    pub block: BlockLabel,
    pub perturbation: Perturbation,
    pub magnitude: f64,
    pub site: FaultSite,
}

impl FaultSpec {
    pub fn additive(target: usize, block: BlockLabel, magnitude: f64) -> Self {
        FaultSpec {
            target,
            block,
            perturbation: Perturbation::Additive,
            magnitude,
            site: FaultSite::Anywhere,
        }
    }

    pub fn at(mut self, site: FaultSite) -> Self {
        self.site = site;
        self
    }
}

impl FromStr for FaultSpec {
    type Err = String;

    /// `server=2,block=U_22,rel=1e-2[,kind=add|replace][,site=any|transit|result]`
    fn from_str(s: &str) -> Result<Self, String> {
        let mut target = None;
        let mut block = None;
        let mut magnitude = None;
        let mut perturbation = Perturbation::Additive;
        let mut site = FaultSite::Anywhere;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| format!("fault field {part:?} is not key=value"))?;
            match k {
                "server" => {
                    target = Some(
                        v.parse::<usize>()
                            .ok()
                            .filter(|&i| i >= 1)
                            .ok_or_else(|| format!("invalid server {v:?}"))?,
                    )
                }
                "block" => block = Some(v.parse::<BlockLabel>()?),
                "rel" => {
                    magnitude = Some(
                        v.parse::<f64>()
                            .ok()
                            .filter(|m| m.is_finite() && *m >= 0.0)
                            .ok_or_else(|| format!("invalid magnitude {v:?}"))?,
                    )
                }
                "kind" => {
                    perturbation = match v {
                        "add" => Perturbation::Additive,
                        "replace" => Perturbation::ReplaceRandom,
                        _ => return Err(format!("invalid perturbation {v:?}")),
                    }
                }
                "site" => {
                    site = match v {
                        "any" => FaultSite::Anywhere,
                        "transit" => FaultSite::Transit,
                        "result" => FaultSite::Result,
                        _ => return Err(format!("invalid site {v:?}")),
                    }
                }
                _ => return Err(format!("unknown fault field {k:?}")),
            }
        }
        let block = block.ok_or("fault needs block=<label>")?;
        if block.kind == BlockKind::X {
            return Err("only L and U blocks can be tampered".into());
        }
        Ok(FaultSpec {
            target: target.ok_or("fault needs server=<index>")?,
            block,
            perturbation,
            magnitude: magnitude.unwrap_or(1e-3),
            site,
        })
    }
}

/// One applied tampering, as recorded in the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultRecord {
    pub server: usize,
    pub block: BlockLabel,
    pub step: u64,
    pub to: Node,
    pub detail: String,
}

impl FaultRecord {
    /// In-block coordinates of an additive perturbation.
    pub fn entry(&self) -> Option<(usize, usize)> {
        let rest = self.detail.split("entry=(").nth(1)?;
        let (r, rest) = rest.split_once(',')?;
        let (c, _) = rest.split_once(')')?;
        Some((r.parse().ok()?, c.parse().ok()?))
    }
}

impl fmt::Display for FaultRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "server=S{} block={} step={} to={} {}",
            self.server, self.block, self.step, self.to, self.detail
        )
    }
}

/// Entries of a block that carry information: the strictly lower part of a
/// diagonal `L` block, the upper part of a diagonal `U` block, everything
/// for off-diagonal blocks.
fn structural_support(label: BlockLabel, b: usize) -> Vec<(usize, usize)> {
    let diag = label.row == label.col;
    (0..b)
        .flat_map(|r| (0..b).map(move |c| (r, c)))
        .filter(|&(r, c)| match (label.kind, diag) {
            (BlockKind::L, true) => r > c,
            (BlockKind::U, true) => r <= c,
            _ => true,
        })
        .collect()
}

/// Applies `spec` to `block`, returning the tampered copy and a description.
pub fn tamper<R: Rng + ?Sized>(block: &Matrix, label: BlockLabel, spec: &FaultSpec, rng: &mut R) -> (Matrix, String) {
    let support = structural_support(label, block.rows());
    let scale = match block.max_abs() {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    let mut out = block.clone();
    match spec.perturbation {
        Perturbation::Additive => {
            let (r, c) = support[rng.random_range(0..support.len())];
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let delta = sign * spec.magnitude * scale;
            out[(r, c)] += delta;
            (out, format!("add entry=({r},{c}) delta={delta:e}"))
        }
        Perturbation::ReplaceRandom => {
            for &(r, c) in &support {
                out[(r, c)] = rng.random_range(-scale..=scale);
            }
            (out, format!("replace entries={}", support.len()))
        }
    }
}

/// Per-server fault applier. Owned by whichever worker drives the server.
#[derive(Debug)]
pub struct FaultInjector {
    server: usize,
    faults: Vec<(usize, FaultSpec)>,
    seed: u64,
    cache: HashMap<usize, (Matrix, String)>,
}

impl FaultInjector {
    pub fn new(server: usize, all: &[FaultSpec], seed: u64) -> Self {
        FaultInjector {
            server,
            faults: all
                .iter()
                .cloned()
                .enumerate()
                .filter(|(_, f)| f.target == server)
                .collect(),
            seed,
            cache: HashMap::new(),
        }
    }

    pub fn apply(&mut self, msg: &mut ServerMessage, log: &mut Vec<FaultRecord>) {
        if self.faults.is_empty() || msg.from != Node::Server(self.server) {
            return;
        }
        for (idx, spec) in &self.faults {
            let site_ok = match spec.site {
                FaultSite::Anywhere => true,
                FaultSite::Transit => msg.kind == MessageKind::UBlocks,
                FaultSite::Result => msg.kind == MessageKind::Result,
            };
            if !site_ok {
                continue;
            }
            for (label, block) in msg.blocks.iter_mut() {
                if *label != spec.block {
                    continue;
                }
                let seed = self.seed;
                let (tampered, detail) = self.cache.entry(*idx).or_insert_with(|| {
                    let mix = (*idx as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ mix);
                    tamper(block, *label, spec, &mut rng)
                });
                *block = tampered.clone();
                log.push(FaultRecord {
                    server: self.server,
                    block: *label,
                    step: msg.step,
                    to: msg.to,
                    detail: detail.clone(),
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cli_form() {
        let f: FaultSpec = "server=2,block=U_22,rel=1e-2".parse().unwrap();
        assert_eq!(f.target, 2);
        assert_eq!(f.block, BlockLabel::u(2, 2));
        assert_eq!(f.magnitude, 1e-2);
        assert_eq!(f.site, FaultSite::Anywhere);
        let g: FaultSpec = "server=1,block=L_11,rel=0.5,kind=replace,site=result".parse().unwrap();
        assert_eq!(g.perturbation, Perturbation::ReplaceRandom);
        assert_eq!(g.site, FaultSite::Result);
        assert!("server=0,block=U_11".parse::<FaultSpec>().is_err());
        assert!("server=1,block=X_11".parse::<FaultSpec>().is_err());
        assert!("block=U_11".parse::<FaultSpec>().is_err());
    }

    #[test]
    fn additive_hits_structural_entry() {
        let block = Matrix::from_rows(&[[2.0, 1.0], [0.0, 4.0]]).unwrap();
        let spec = FaultSpec::additive(1, BlockLabel::u(1, 1), 1e-3);
        for seed in 0..32 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (t, _) = tamper(&block, spec.block, &spec, &mut rng);
            let d = t.sub(&block).unwrap();
            assert_eq!(d[(1, 0)], 0.0);
            let nz: Vec<f64> = d.as_slice().iter().copied().filter(|v| *v != 0.0).collect();
            assert_eq!(nz.len(), 1);
            assert!((nz[0].abs() - 4e-3).abs() < 1e-15);
        }
        let rec = FaultRecord {
            server: 1,
            block: spec.block,
            step: 2,
            to: Node::Client,
            detail: "add entry=(3,12) delta=1e-3".into(),
        };
        assert_eq!(rec.entry(), Some((3, 12)));
    }
}
