//! Message log of one protocol run, with a line-oriented text form and a CSV
//! form for tooling.

use std::fmt::Write as _;

use super::fault::FaultRecord;
use crate::error::{Result, SpdcError};
use crate::server::{BlockLabel, MessageKind, Node};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub step: u64,
    pub from: Node,
    pub to: Node,
    pub kind: MessageKind,
    /// Reals carried.
    pub size: usize,
    pub labels: Vec<BlockLabel>,
    /// Sender's flop clock at emission.
    pub work: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseRecord {
    pub server: usize,
    pub activation: Option<u64>,
    pub result: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub servers: usize,
    /// Ordered by `(step, sender, sender-local sequence)`.
    pub events: Vec<TraceEvent>,
    /// Flops per server, index 0 is `S1`.
    pub flops: Vec<u64>,
    pub phases: Vec<PhaseRecord>,
    pub faults: Vec<FaultRecord>,
    pub critical_path_flops: u64,
}

fn opt(v: Option<u64>) -> String {
    v.map_or_else(|| "-".to_string(), |s| s.to_string())
}

fn parse_opt(s: &str) -> std::result::Result<Option<u64>, String> {
    if s == "-" {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|_| format!("invalid step {s:?}"))
    }
}

impl Trace {
    pub fn message_count(&self) -> usize {
        self.events.len()
    }

    /// Reals moved between nodes, excluding the client's row assignments.
    pub fn reals_sent(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind != MessageKind::AssignRow)
            .map(|e| e.size)
            .sum()
    }

    pub fn max_server_flops(&self) -> u64 {
        self.flops.iter().copied().max().unwrap_or(0)
    }

    pub fn channel(&self, from: Node, to: Node) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.from == from && e.to == to)
    }

    /// `step from to kind size` per message, followed by `#` summary lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# spdc trace servers={}", self.servers);
        for e in &self.events {
            let _ = write!(s, "{} {} {} {} {}", e.step, e.from, e.to, e.kind, e.size);
            if !e.labels.is_empty() {
                let names: Vec<String> = e.labels.iter().map(ToString::to_string).collect();
                let _ = write!(s, " {}", names.join(","));
            }
            let _ = writeln!(s, " work={}", e.work);
        }
        for p in &self.phases {
            let _ = writeln!(s, "# phase S{} {} {}", p.server, opt(p.activation), opt(p.result));
        }
        for (i, f) in self.flops.iter().enumerate() {
            let _ = writeln!(s, "# flops S{} {f}", i + 1);
        }
        for f in &self.faults {
            let _ = writeln!(s, "# fault {f}");
        }
        let _ = writeln!(s, "# critical_path_flops {}", self.critical_path_flops);
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,from,to,kind,size,work,blocks\n");
        for e in &self.events {
            let names: Vec<String> = e.labels.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                e.step,
                e.from,
                e.to,
                e.kind,
                e.size,
                e.work,
                names.join(";")
            );
        }
        s
    }

    /// Reads either form back. CSV input has no phase or flop records.
    pub fn parse(text: &str) -> Result<Trace> {
        let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        if first.starts_with("step,") {
            Self::parse_csv(text)
        } else {
            Self::parse_text(text)
        }
    }

    fn parse_text(text: &str) -> Result<Trace> {
        let mut t = Trace::default();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |message: String| SpdcError::Parse {
                line: ln + 1,
                column: 1,
                message,
            };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let f: Vec<&str> = rest.split_whitespace().collect();
                match f.as_slice() {
                    ["spdc", "trace", s] => {
                        t.servers = s
                            .strip_prefix("servers=")
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| err(format!("invalid header field {s:?}")))?;
                    }
                    ["phase", node, act, res] => {
                        let server = parse_server(node).map_err(err)?;
                        t.phases.push(PhaseRecord {
                            server,
                            activation: parse_opt(act).map_err(err)?,
                            result: parse_opt(res).map_err(err)?,
                        });
                    }
                    ["flops", node, n] => {
                        let server = parse_server(node).map_err(err)?;
                        let n = n.parse().map_err(|_| err(format!("invalid flop count {n:?}")))?;
                        if t.flops.len() < server {
                            t.flops.resize(server, 0);
                        }
                        t.flops[server - 1] = n;
                    }
                    ["critical_path_flops", n] => {
                        t.critical_path_flops = n.parse().map_err(|_| err(format!("invalid count {n:?}")))?;
                    }
                    ["fault", ..] => t.faults.push(parse_fault(rest.trim_start()[5..].trim()).map_err(err)?),
                    _ => {}
                }
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() < 5 {
                return Err(err(format!("expected `step from to kind size`, got {line:?}")));
            }
            let mut e = TraceEvent {
                step: f[0].parse().map_err(|_| err(format!("invalid step {:?}", f[0])))?,
                from: f[1].parse().map_err(err)?,
                to: f[2].parse().map_err(err)?,
                kind: f[3].parse().map_err(err)?,
                size: f[4].parse().map_err(|_| err(format!("invalid size {:?}", f[4])))?,
                labels: Vec::new(),
                work: 0,
            };
            for extra in &f[5..] {
                if let Some(w) = extra.strip_prefix("work=") {
                    e.work = w.parse().map_err(|_| err(format!("invalid work {w:?}")))?;
                } else {
                    e.labels = parse_labels(extra, ',').map_err(err)?;
                }
            }
            t.events.push(e);
        }
        t.infer_servers();
        Ok(t)
    }

    fn parse_csv(text: &str) -> Result<Trace> {
        let mut t = Trace::default();
        for (ln, raw) in text.lines().enumerate().skip(1) {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| SpdcError::Parse {
                line: ln + 1,
                column: 1,
                message,
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(err(format!("expected 7 fields, got {}", f.len())));
            }
            t.events.push(TraceEvent {
                step: f[0].parse().map_err(|_| err(format!("invalid step {:?}", f[0])))?,
                from: f[1].parse().map_err(err)?,
                to: f[2].parse().map_err(err)?,
                kind: f[3].parse().map_err(err)?,
                size: f[4].parse().map_err(|_| err(format!("invalid size {:?}", f[4])))?,
                work: f[5].parse().map_err(|_| err(format!("invalid work {:?}", f[5])))?,
                labels: parse_labels(f[6], ';').map_err(err)?,
            });
        }
        t.infer_servers();
        Ok(t)
    }

    fn infer_servers(&mut self) {
        let seen = self
            .events
            .iter()
            .flat_map(|e| [e.from, e.to])
            .filter_map(Node::server_index)
            .max()
            .unwrap_or(0);
        self.servers = self.servers.max(seen);
    }
}

fn parse_server(s: &str) -> std::result::Result<usize, String> {
    s.parse::<Node>()?
        .server_index()
        .ok_or_else(|| format!("expected a server, got {s:?}"))
}

fn parse_labels(s: &str, sep: char) -> std::result::Result<Vec<BlockLabel>, String> {
    s.split(sep).filter(|p| !p.is_empty()).map(str::parse).collect()
}

fn parse_fault(s: &str) -> std::result::Result<FaultRecord, String> {
    let mut server = None;
    let mut block = None;
    let mut step = None;
    let mut to = None;
    let mut detail = Vec::new();
    for tok in s.split_whitespace() {
        match tok.split_once('=') {
            Some(("server", v)) => server = Some(parse_server(v)?),
            Some(("block", v)) => block = Some(v.parse::<BlockLabel>()?),
            Some(("step", v)) => step = Some(v.parse::<u64>().map_err(|_| format!("invalid step {v:?}"))?),
            Some(("to", v)) => to = Some(v.parse::<Node>()?),
            _ => detail.push(tok),
        }
    }
    Ok(FaultRecord {
        server: server.ok_or("fault line without server")?,
        block: block.ok_or("fault line without block")?,
        step: step.ok_or("fault line without step")?,
        to: to.ok_or("fault line without destination")?,
        detail: detail.join(" "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trace {
        Trace {
            servers: 2,
            events: vec![
                TraceEvent {
                    step: 1,
                    from: Node::Client,
                    to: Node::Server(1),
                    kind: MessageKind::AssignRow,
                    size: 8,
                    labels: vec![BlockLabel::x(1, 1), BlockLabel::x(1, 2)],
                    work: 0,
                },
                TraceEvent {
                    step: 3,
                    from: Node::Server(1),
                    to: Node::Server(2),
                    kind: MessageKind::UBlocks,
                    size: 4,
                    labels: vec![BlockLabel::u(1, 1)],
                    work: 6,
                },
            ],
            flops: vec![30, 40],
            phases: vec![PhaseRecord {
                server: 1,
                activation: Some(2),
                result: None,
            }],
            faults: vec![FaultRecord {
                server: 1,
                block: BlockLabel::u(1, 1),
                step: 3,
                to: Node::Server(2),
                detail: "add entry=(0,1) delta=1e-3".into(),
            }],
            critical_path_flops: 70,
        }
    }

    #[test]
    fn text_round_trip() {
        let t = sample();
        let text = t.to_text();
        assert!(text.contains("\n3 S1 S2 U_BLOCKS 4 U_11 work=6\n"));
        assert_eq!(Trace::parse(&text).unwrap(), t);
    }

    #[test]
    fn csv_round_trip_keeps_events() {
        let t = sample();
        let back = Trace::parse(&t.to_csv()).unwrap();
        assert_eq!(back.events, t.events);
        assert_eq!(back.servers, 2);
    }

    #[test]
    fn bad_line_reports_position() {
        let err = Trace::parse("# spdc trace servers=2\n1 C S1 ASSIGN_ROW\n").unwrap_err();
        assert!(matches!(err, SpdcError::Parse { line: 2, .. }));
    }
}
