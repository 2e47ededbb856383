//! Structural checks on a recorded trace.

use std::collections::BTreeSet;
use std::fmt;

use super::trace::Trace;
use crate::server::{BlockLabel, MessageKind, Node};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A message between servers that are not consecutive, or flowing
    /// upstream.
    NonAdjacent {
        from: Node,
        to: Node,
        step: u64,
    },
    /// A message kind that is not allowed on this edge.
    WrongEndpoint {
        from: Node,
        to: Node,
        kind: MessageKind,
        step: u64,
    },
    ResultCount {
        server: usize,
        count: usize,
    },
    SendAfterResult {
        server: usize,
        step: u64,
    },
    /// `S_{i+1}` became active no later than `S_i` first sent anything.
    EarlyActivation {
        server: usize,
        activation: u64,
        upstream_first_send: Option<u64>,
    },
    /// Per-channel message sequence disagrees with the reference schedule.
    Schedule {
        from: Node,
        to: Node,
        detail: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonAdjacent { from, to, step } => {
                write!(f, "step {step}: non-adjacent transfer {from} -> {to}")
            }
            Violation::WrongEndpoint { from, to, kind, step } => {
                write!(f, "step {step}: {kind} not allowed on {from} -> {to}")
            }
            Violation::ResultCount { server, count } => {
                write!(f, "S{server} sent {count} RESULT messages, expected 1")
            }
            Violation::SendAfterResult { server, step } => {
                write!(f, "S{server} sent at step {step} after its RESULT")
            }
            Violation::EarlyActivation {
                server,
                activation,
                upstream_first_send,
            } => match upstream_first_send {
                Some(s) => write!(
                    f,
                    "S{server} activated at step {activation}, not after S{}'s first send at step {s}",
                    server - 1
                ),
                None => write!(
                    f,
                    "S{server} activated at step {activation} but S{} never sent",
                    server - 1
                ),
            },
            Violation::Schedule { from, to, detail } => write!(f, "{from} -> {to}: {detail}"),
        }
    }
}

type Reference = Vec<(Node, Node, MessageKind, Vec<BlockLabel>)>;

fn u_set(pairs: &[(usize, usize)]) -> Vec<BlockLabel> {
    pairs.iter().map(|&(k, j)| BlockLabel::u(k, j)).collect()
}

fn result_of(i: usize, n: usize) -> Vec<BlockLabel> {
    crate::server::result_labels(i, n)
}

/// The published 3- and 4-server schedules, as `(from, to, kind, blocks)`
/// in listing order. Client assignments are not part of the listings.
pub fn reference_schedule(servers: usize) -> Option<Reference> {
    let s = Node::Server;
    let c = Node::Client;
    let ub = MessageKind::UBlocks;
    let res = MessageKind::Result;
    match servers {
        3 => Some(vec![
            (s(1), s(2), ub, u_set(&[(1, 1)])),
            (s(1), s(2), ub, u_set(&[(1, 2)])),
            (s(1), s(2), ub, u_set(&[(1, 3)])),
            (s(2), s(3), ub, u_set(&[(1, 1), (1, 2)])),
            (s(1), c, res, result_of(1, 3)),
            (s(2), s(3), ub, u_set(&[(1, 3), (2, 2)])),
            (s(2), s(3), ub, u_set(&[(2, 3)])),
            (s(2), c, res, result_of(2, 3)),
            (s(3), c, res, result_of(3, 3)),
        ]),
        4 => Some(vec![
            (s(1), s(2), ub, u_set(&[(1, 1)])),
            (s(1), s(2), ub, u_set(&[(1, 2)])),
            (s(1), s(2), ub, u_set(&[(1, 3)])),
            (s(2), s(3), ub, u_set(&[(1, 1), (1, 2)])),
            (s(1), s(2), ub, u_set(&[(1, 4)])),
            (s(2), s(3), ub, u_set(&[(1, 3), (2, 2)])),
            (s(1), c, res, result_of(1, 4)),
            (s(2), s(3), ub, u_set(&[(1, 4), (2, 3)])),
            (s(3), s(4), ub, u_set(&[(1, 1), (1, 2), (1, 3), (2, 2)])),
            (s(2), s(3), ub, u_set(&[(2, 4)])),
            (s(2), c, res, result_of(2, 4)),
            // The listing names only U_24 and U_33 here, although S4 later
            // uses U_14 and U_23 as well.
            (s(3), s(4), ub, u_set(&[(2, 4), (3, 3)])),
            (s(3), s(4), ub, u_set(&[(3, 4)])),
            (s(3), c, res, result_of(3, 4)),
            (s(4), c, res, result_of(4, 4)),
        ]),
        _ => None,
    }
}

/// Checks a trace of an `servers`-server run. An empty result means the
/// trace is a well-formed one-way chain.
pub fn validate_trace(trace: &Trace, servers: usize) -> Vec<Violation> {
    let mut out = Vec::new();

    for e in &trace.events {
        let ok_edge = match (e.from, e.to, e.kind) {
            (Node::Client, Node::Server(i), MessageKind::AssignRow) => (1..=servers).contains(&i),
            (Node::Server(i), Node::Server(j), MessageKind::UBlocks) => {
                if j != i + 1 || j > servers {
                    out.push(Violation::NonAdjacent {
                        from: e.from,
                        to: e.to,
                        step: e.step,
                    });
                    continue;
                }
                true
            }
            (Node::Server(i), Node::Client, MessageKind::Result | MessageKind::Failure) => i <= servers,
            _ => false,
        };
        if !ok_edge {
            out.push(Violation::WrongEndpoint {
                from: e.from,
                to: e.to,
                kind: e.kind,
                step: e.step,
            });
        }
    }

    let first_send = |i: usize| {
        trace
            .events
            .iter()
            .filter(|e| e.from == Node::Server(i))
            .map(|e| e.step)
            .min()
    };

    for i in 1..=servers {
        let me = Node::Server(i);
        let results: Vec<u64> = trace
            .events
            .iter()
            .filter(|e| e.from == me && e.to == Node::Client && e.kind == MessageKind::Result)
            .map(|e| e.step)
            .collect();
        if results.len() != 1 {
            out.push(Violation::ResultCount {
                server: i,
                count: results.len(),
            });
        }
        if let Some(&r) = results.first() {
            for e in trace.events.iter().filter(|e| e.from == me) {
                if e.step > r || (e.step == r && e.kind != MessageKind::Result) {
                    out.push(Violation::SendAfterResult {
                        server: i,
                        step: e.step,
                    });
                }
            }
        }

        if i > 1 {
            let activation = trace
                .phases
                .iter()
                .find(|p| p.server == i)
                .and_then(|p| p.activation)
                .or_else(|| first_send(i));
            if let Some(a) = activation {
                let up = first_send(i - 1);
                if up.is_none_or(|u| a <= u) {
                    out.push(Violation::EarlyActivation {
                        server: i,
                        activation: a,
                        upstream_first_send: up,
                    });
                }
            }
        }
    }

    if let Some(reference) = reference_schedule(servers) {
        let exact = servers == 3;
        let channels: BTreeSet<(Node, Node)> = reference.iter().map(|r| (r.0, r.1)).collect();
        for (from, to) in channels {
            let want: Vec<_> = reference.iter().filter(|r| r.0 == from && r.1 == to).collect();
            let got: Vec<_> = trace.channel(from, to).collect();
            let bad = |detail: String| Violation::Schedule { from, to, detail };
            if want.len() != got.len() {
                out.push(bad(format!("{} messages, reference has {}", got.len(), want.len())));
                continue;
            }
            for (n, (w, g)) in want.iter().zip(&got).enumerate() {
                if w.2 != g.kind {
                    out.push(bad(format!("message {} is {}, reference {}", n + 1, g.kind, w.2)));
                    continue;
                }
                // Text traces written without labels only get the kind check.
                if g.labels.is_empty() {
                    continue;
                }
                let got_set: BTreeSet<_> = g.labels.iter().collect();
                let want_set: BTreeSet<_> = w.3.iter().collect();
                let matches = if exact || w.2 == MessageKind::Result {
                    got_set == want_set
                } else {
                    want_set.is_subset(&got_set)
                };
                if !matches {
                    let show = |v: &[BlockLabel]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
                    out.push(bad(format!(
                        "message {} carries {{{}}}, reference {{{}}}",
                        n + 1,
                        show(&g.labels),
                        show(&w.3)
                    )));
                }
            }
        }
    }
    out
}
