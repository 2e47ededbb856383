use std::collections::VecDeque;
use std::sync::mpsc;
use std::thread;

use super::fault::{FaultInjector, FaultRecord, FaultSpec};
use super::trace::{PhaseRecord, Trace, TraceEvent};
use crate::client::PartitionPlan;
use crate::error::{Result, SpdcError};
use crate::matrix::{BlockGrid, Matrix};
use crate::server::{BlockLabel, MessageKind, Node, ServerMessage, ServerState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimMode {
    /// Single thread, round-robin over per-server inboxes.
    #[default]
    Deterministic,
    /// One thread per server, bounded channels between neighbours.
    Concurrent,
}

impl std::str::FromStr for SimMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "deterministic" | "det" => Ok(SimMode::Deterministic),
            "concurrent" | "threads" => Ok(SimMode::Concurrent),
            _ => Err(format!("unknown simulation mode {s:?}")),
        }
    }
}

/// `res_i` as returned to the client.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerResult {
    pub server: usize,
    pub blocks: Vec<(BlockLabel, Matrix)>,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    /// Indexed by server, `results[0]` is `res_1`.
    pub results: Vec<ServerResult>,
    pub trace: Trace,
}

/// Everything one server contributed to the trace.
#[derive(Debug, Default)]
struct NodeLog {
    events: Vec<(u64, usize, TraceEvent)>,
    faults: Vec<FaultRecord>,
    flops: u64,
    activation: Option<u64>,
    result: Option<u64>,
}

fn event(msg: &ServerMessage) -> TraceEvent {
    TraceEvent {
        step: msg.step,
        from: msg.from,
        to: msg.to,
        kind: msg.kind,
        size: msg.size(),
        labels: msg.labels(),
        work: msg.work,
    }
}

fn assignments(grid: &BlockGrid) -> Vec<ServerMessage> {
    (1..=grid.servers())
        .map(|i| ServerMessage {
            from: Node::Client,
            to: Node::Server(i),
            kind: MessageKind::AssignRow,
            blocks: grid
                .block_row(i)
                .iter()
                .enumerate()
                .map(|(j, m)| (BlockLabel::x(i, j + 1), m.clone()))
                .collect(),
            step: i as u64,
            work: 0,
            note: None,
        })
        .collect()
}

/// Drives one server's output through its fault injector and records it.
fn record(out: &mut ServerMessage, injector: &mut FaultInjector, log: &mut NodeLog) {
    injector.apply(out, &mut log.faults);
    let seq = log.events.len();
    log.events.push((out.step, seq, event(out)));
}

fn failure(msg: &ServerMessage) -> SpdcError {
    SpdcError::ServerFailure {
        server: msg.from.server_index().unwrap_or(0),
        message: msg.note.clone().unwrap_or_else(|| "unspecified failure".into()),
    }
}

/// Runs the N-server factorisation of `grid` and collects `res_1..res_N`
/// plus the message trace. Both modes produce the same trace for the same
/// input, because events are ordered by logical clock rather than by
/// arrival.
pub fn run_simulation(
    plan: &PartitionPlan,
    grid: &BlockGrid,
    mode: SimMode,
    faults: &[FaultSpec],
    seed: u64,
) -> Result<SimOutcome> {
    let n = grid.servers();
    if plan.servers != n || plan.block_size != grid.block_size() {
        return Err(SpdcError::DimensionMismatch(format!(
            "plan is {} servers of block {}, grid is {} of block {}",
            plan.servers,
            plan.block_size,
            n,
            grid.block_size()
        )));
    }
    if let Some(f) = faults.iter().find(|f| f.target == 0 || f.target > n) {
        return Err(SpdcError::InvalidMatrix(format!(
            "fault targets S{} but only {n} servers exist",
            f.target
        )));
    }
    let assign = assignments(grid);
    let (results, logs) = match mode {
        SimMode::Deterministic => run_deterministic(grid, assign, faults, seed)?,
        SimMode::Concurrent => run_concurrent(grid, assign, faults, seed)?,
    };

    let mut trace = Trace {
        servers: n,
        ..Trace::default()
    };
    let mut keyed: Vec<(u64, Node, usize, TraceEvent)> = Vec::new();
    for (seq, m) in assignments_events(grid).into_iter().enumerate() {
        keyed.push((m.step, Node::Client, seq, m));
    }
    for (i, log) in logs.into_iter().enumerate() {
        for (step, seq, e) in log.events {
            keyed.push((step, Node::Server(i + 1), seq, e));
        }
        trace.flops.push(log.flops);
        trace.phases.push(PhaseRecord {
            server: i + 1,
            activation: log.activation,
            result: log.result,
        });
        trace.faults.extend(log.faults);
    }
    keyed.sort_by_key(|k| (k.0, k.1, k.2));
    trace.events = keyed.into_iter().map(|k| k.3).collect();
    trace.faults.sort_by_key(|f| (f.step, f.server));
    trace.critical_path_flops = trace
        .events
        .iter()
        .filter(|e| e.kind == MessageKind::Result)
        .map(|e| e.work)
        .max()
        .unwrap_or(0);
    Ok(SimOutcome { results, trace })
}

fn assignments_events(grid: &BlockGrid) -> Vec<TraceEvent> {
    assignments(grid).iter().map(event).collect()
}

fn finish(state: &ServerState, log: &mut NodeLog) {
    log.flops = state.flops();
    log.activation = state.activated_at();
    log.result = state.result_at();
}

fn collect_results(
    slots: Vec<Option<ServerResult>>,
    dump: impl FnOnce() -> String,
    deadlock: bool,
) -> Result<Vec<ServerResult>> {
    let missing: Vec<usize> = slots
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_none())
        .map(|(i, _)| i + 1)
        .collect();
    if missing.is_empty() {
        return Ok(slots.into_iter().flatten().collect());
    }
    if deadlock {
        Err(SpdcError::Deadlock { missing, dump: dump() })
    } else {
        Err(SpdcError::IncompleteResults { missing })
    }
}

type RunOutput = (Vec<ServerResult>, Vec<NodeLog>);

fn run_deterministic(
    grid: &BlockGrid,
    assign: Vec<ServerMessage>,
    faults: &[FaultSpec],
    seed: u64,
) -> Result<RunOutput> {
    let n = grid.servers();
    let mut states: Vec<ServerState> = (1..=n).map(|i| ServerState::new(i, n, grid.block_size())).collect();
    let mut injectors: Vec<FaultInjector> = (1..=n).map(|i| FaultInjector::new(i, faults, seed)).collect();
    let mut logs: Vec<NodeLog> = (0..n).map(|_| NodeLog::default()).collect();
    let mut inbox: Vec<VecDeque<ServerMessage>> = assign.into_iter().map(|m| VecDeque::from([m])).collect();
    let mut slots: Vec<Option<ServerResult>> = vec![None; n];

    loop {
        let mut progressed = false;
        for i in 0..n {
            let Some(msg) = inbox[i].pop_front() else {
                continue;
            };
            progressed = true;
            for mut out in states[i].handle(msg)? {
                record(&mut out, &mut injectors[i], &mut logs[i]);
                match (out.to, out.kind) {
                    (Node::Server(k), _) => inbox[k - 1].push_back(out),
                    (Node::Client, MessageKind::Result) => {
                        slots[i] = Some(ServerResult {
                            server: i + 1,
                            blocks: out.blocks,
                        })
                    }
                    (Node::Client, _) => return Err(failure(&out)),
                }
            }
        }
        if slots.iter().all(Option::is_some) || !progressed {
            break;
        }
    }
    for (s, log) in states.iter().zip(logs.iter_mut()) {
        finish(s, log);
    }
    let dump = || {
        states
            .iter()
            .map(|s| {
                let held: Vec<String> = s.held_blocks().iter().map(|(l, _)| l.to_string()).collect();
                format!(
                    "S{} {:?} clock={} holds [{}]",
                    s.index(),
                    s.phase(),
                    s.clock(),
                    held.join(",")
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let results = collect_results(slots, dump, true)?;
    Ok((results, logs))
}

enum Report {
    Message(ServerMessage),
    Error(SpdcError),
}

fn run_concurrent(grid: &BlockGrid, assign: Vec<ServerMessage>, faults: &[FaultSpec], seed: u64) -> Result<RunOutput> {
    let n = grid.servers();
    // One ASSIGN_ROW plus at most N upstream batches per inbox.
    let capacity = n + 2;
    let mut senders = Vec::with_capacity(n);
    let mut receivers = Vec::with_capacity(n);
    for msg in assign {
        let (tx, rx) = mpsc::sync_channel::<ServerMessage>(capacity);
        tx.send(msg).expect("receiver alive");
        senders.push(Some(tx));
        receivers.push(rx);
    }
    let (report_tx, report_rx) = mpsc::channel::<(usize, Report)>();

    thread::scope(|scope| {
        let mut handles = Vec::with_capacity(n);
        for (i, rx) in receivers.into_iter().enumerate() {
            // The client keeps no sender: an inbox closes when its upstream
            // server exits, which is how a stalled chain shuts down.
            senders[i] = None;
            let downstream = senders.get_mut(i + 1).and_then(Option::take);
            let report = report_tx.clone();
            let mut state = ServerState::new(i + 1, n, grid.block_size());
            let mut injector = FaultInjector::new(i + 1, faults, seed);
            handles.push(scope.spawn(move || {
                let mut log = NodeLog::default();
                'recv: while let Ok(msg) = rx.recv() {
                    let outs = match state.handle(msg) {
                        Ok(o) => o,
                        Err(e) => {
                            let _ = report.send((i, Report::Error(e)));
                            break;
                        }
                    };
                    for mut out in outs {
                        record(&mut out, &mut injector, &mut log);
                        let terminal = out.to == Node::Client;
                        match out.to {
                            Node::Server(_) => {
                                if let Some(tx) = &downstream {
                                    let _ = tx.send(out);
                                }
                            }
                            Node::Client => {
                                let _ = report.send((i, Report::Message(out)));
                            }
                        }
                        if terminal {
                            break 'recv;
                        }
                    }
                }
                finish(&state, &mut log);
                log
            }));
        }
        drop(report_tx);

        let mut slots: Vec<Option<ServerResult>> = vec![None; n];
        let mut first_error = None;
        for (i, r) in report_rx.iter() {
            match r {
                Report::Message(m) if m.kind == MessageKind::Result => {
                    slots[i] = Some(ServerResult {
                        server: i + 1,
                        blocks: m.blocks,
                    })
                }
                Report::Message(m) => {
                    first_error.get_or_insert(failure(&m));
                }
                Report::Error(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        let logs: Vec<NodeLog> = handles
            .into_iter()
            .map(|h| h.join().expect("server thread panicked"))
            .collect();
        if let Some(e) = first_error {
            return Err(e);
        }
        let dump = || {
            logs.iter()
                .enumerate()
                .map(|(i, l)| {
                    format!(
                        "S{} sent {} messages, last step {:?}",
                        i + 1,
                        l.events.len(),
                        l.events.last().map(|e| e.0)
                    )
                })
                .collect::<Vec<_>>()
                .join("\n")
        };
        let results = collect_results(slots, dump, false)?;
        Ok((results, logs))
    })
}
