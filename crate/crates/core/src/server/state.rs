use std::collections::BTreeMap;

use super::message::{BlockKind, BlockLabel, MessageKind, Node, ServerMessage};
use crate::error::{Result, SpdcError};
use crate::flops::OpCount;
use crate::matrix::{factor_counted, solve_unit_lower_left, solve_upper_right, sub_product_assign, Matrix};

/// Payload groups server `index` forwards downstream, in send order.
///
/// The first group carries the upstream blocks `U_kj` with `k + j <= index + 1`
/// (what the successor needs to start). After that, each newly computed
/// `U_{index,j}` closes a group together with every not-yet-forwarded
/// upstream block on an anti-diagonal `k + j' <= index + j`. For server 1 the
/// first group is empty and therefore skipped. The last server forwards
/// nothing.
pub fn forward_schedule(index: usize, servers: usize) -> Vec<Vec<BlockLabel>> {
    if index >= servers {
        return Vec::new();
    }
    let mut pending: Vec<BlockLabel> = (1..index)
        .flat_map(|k| (k..=servers).map(move |j| BlockLabel::u(k, j)))
        .collect();
    let take = |limit: usize, pending: &mut Vec<BlockLabel>| {
        let (now, later): (Vec<_>, Vec<_>) = pending.iter().partition(|l| l.row + l.col <= limit);
        *pending = later;
        now
    };
    let mut batches = Vec::new();
    let first = take(index + 1, &mut pending);
    if !first.is_empty() {
        batches.push(first);
    }
    for j in index..=servers {
        let mut batch = take(index + j, &mut pending);
        batch.push(BlockLabel::u(index, j));
        batch.sort();
        batches.push(batch);
    }
    debug_assert!(pending.is_empty());
    batches
}

/// Labels of `res_i`: `L_i1..L_ii` then `U_ii..U_iN`.
pub fn result_labels(index: usize, servers: usize) -> Vec<BlockLabel> {
    (1..=index)
        .map(|k| BlockLabel::l(index, k))
        .chain((index..=servers).map(|j| BlockLabel::u(index, j)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// No block row assigned yet.
    Idle,
    Computing,
    Done,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Task {
    /// `X_ij -= L_im * U_mj`
    Update { col: usize, term: usize },
    /// `L_ij = X_ij * U_jj^{-1}` (right solve)
    SolveL(usize),
    /// `X_ii = L_ii * U_ii`
    Factor,
    /// `U_ij = L_ii^{-1} * X_ij` (left solve)
    SolveU(usize),
}

/// State of one edge server: it owns block row `i` of the ciphertext and
/// computes `L_i1..L_ii` and `U_ii..U_iN` as upstream `U` blocks arrive.
#[derive(Debug, Clone)]
pub struct ServerState {
    index: usize,
    servers: usize,
    block_size: usize,
    /// Working copies of `X_i1..X_iN`, updated in place.
    x_row: Vec<Matrix>,
    /// Update terms already subtracted from each `X_ij`.
    applied: Vec<usize>,
    /// Upstream blocks `U_kj` (`k < i`), keyed `(k, j)`.
    u_store: BTreeMap<(usize, usize), Matrix>,
    l_row: Vec<Option<Matrix>>,
    /// Own `U_ij`, indexed by `j - i`.
    u_out: Vec<Option<Matrix>>,
    batches: Vec<Vec<BlockLabel>>,
    next_batch: usize,
    expected_upstream: Vec<BlockLabel>,
    received: usize,
    phase: Phase,
    clock: u64,
    work: u64,
    flops: OpCount,
    activated_at: Option<u64>,
    result_at: Option<u64>,
}

impl ServerState {
    pub fn new(index: usize, servers: usize, block_size: usize) -> Self {
        assert!(servers >= 1 && (1..=servers).contains(&index));
        ServerState {
            index,
            servers,
            block_size,
            x_row: Vec::new(),
            applied: vec![0; servers],
            u_store: BTreeMap::new(),
            l_row: vec![None; index],
            u_out: vec![None; servers - index + 1],
            batches: forward_schedule(index, servers),
            next_batch: 0,
            expected_upstream: forward_schedule(index - 1, servers).into_iter().flatten().collect(),
            received: 0,
            phase: Phase::Idle,
            clock: 0,
            work: 0,
            flops: OpCount::new(),
            activated_at: None,
            result_at: None,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn flops(&self) -> u64 {
        self.flops.get()
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    /// Logical step at which the server first computed anything.
    pub fn activated_at(&self) -> Option<u64> {
        self.activated_at
    }

    pub fn result_at(&self) -> Option<u64> {
        self.result_at
    }

    /// Every block currently held, with its label. Working copies of the
    /// assigned row are reported as `X_ij`.
    pub fn held_blocks(&self) -> Vec<(BlockLabel, &Matrix)> {
        let i = self.index;
        let mut out: Vec<(BlockLabel, &Matrix)> = self
            .x_row
            .iter()
            .enumerate()
            .map(|(j, m)| (BlockLabel::x(i, j + 1), m))
            .collect();
        out.extend(self.u_store.iter().map(|(&(k, j), m)| (BlockLabel::u(k, j), m)));
        out.extend(
            self.l_row
                .iter()
                .enumerate()
                .filter_map(|(k, m)| m.as_ref().map(|m| (BlockLabel::l(i, k + 1), m))),
        );
        out.extend(
            self.u_out
                .iter()
                .enumerate()
                .filter_map(|(d, m)| m.as_ref().map(|m| (BlockLabel::u(i, i + d), m))),
        );
        out
    }

    fn violation(&self, message: impl Into<String>) -> SpdcError {
        SpdcError::ProtocolViolation {
            server: self.index,
            message: message.into(),
        }
    }

    /// Consumes one message and returns everything the server emits in
    /// response. Out-of-order, duplicate or misaddressed input is a protocol
    /// violation; a singular pivot becomes a `FAILURE` message to the client.
    pub fn handle(&mut self, msg: ServerMessage) -> Result<Vec<ServerMessage>> {
        let me = Node::Server(self.index);
        if msg.to != me {
            return Err(self.violation(format!("message addressed to {}", msg.to)));
        }
        if matches!(self.phase, Phase::Done | Phase::Failed) {
            return Err(self.violation(format!("{} received after completion", msg.kind)));
        }
        self.clock = self.clock.max(msg.step) + 1;
        self.work = self.work.max(msg.work);

        match msg.kind {
            MessageKind::AssignRow => self.accept_assignment(msg)?,
            MessageKind::UBlocks => self.accept_upstream(msg)?,
            other => return Err(self.violation(format!("unexpected {other} from {}", msg.from))),
        }

        let mut out = Vec::new();
        self.progress(&mut out);
        Ok(out)
    }

    fn accept_assignment(&mut self, msg: ServerMessage) -> Result<()> {
        if msg.from != Node::Client {
            return Err(self.violation("ASSIGN_ROW must come from the client"));
        }
        if self.phase != Phase::Idle {
            return Err(self.violation("duplicate ASSIGN_ROW"));
        }
        if msg.blocks.len() != self.servers {
            return Err(self.violation(format!(
                "ASSIGN_ROW carries {} blocks, expected {}",
                msg.blocks.len(),
                self.servers
            )));
        }
        let mut row = Vec::with_capacity(self.servers);
        for (j, (label, block)) in msg.blocks.into_iter().enumerate() {
            if label != BlockLabel::x(self.index, j + 1) {
                return Err(self.violation(format!("unexpected block {label} in ASSIGN_ROW")));
            }
            self.check_block_shape(label, &block)?;
            row.push(block);
        }
        self.x_row = row;
        self.phase = Phase::Computing;
        Ok(())
    }

    fn accept_upstream(&mut self, msg: ServerMessage) -> Result<()> {
        if self.index == 1 || msg.from != Node::Server(self.index - 1) {
            return Err(self.violation(format!("U_BLOCKS from non-adjacent {}", msg.from)));
        }
        for (label, block) in msg.blocks {
            match self.expected_upstream.get(self.received) {
                Some(&want) if want == label => {}
                Some(&want) => {
                    let dup = self.u_store.contains_key(&(label.row, label.col));
                    return Err(self.violation(format!(
                        "{} block {label}, expected {want}",
                        if dup { "duplicate" } else { "out-of-order" }
                    )));
                }
                None => return Err(self.violation(format!("unexpected extra block {label}"))),
            }
            self.check_block_shape(label, &block)?;
            self.u_store.insert((label.row, label.col), block);
            self.received += 1;
        }
        Ok(())
    }

    fn check_block_shape(&self, label: BlockLabel, block: &Matrix) -> Result<()> {
        let b = self.block_size;
        if block.rows() != b || block.cols() != b {
            return Err(self.violation(format!(
                "block {label} is {}x{}, expected {b}x{b}",
                block.rows(),
                block.cols()
            )));
        }
        Ok(())
    }

    fn upstream_u(&self, k: usize, j: usize) -> Option<&Matrix> {
        self.u_store.get(&(k, j))
    }

    fn own_u(&self, j: usize) -> Option<&Matrix> {
        self.u_out.get(j - self.index).and_then(Option::as_ref)
    }

    fn u_block(&self, label: BlockLabel) -> Option<&Matrix> {
        if label.row == self.index {
            self.own_u(label.col)
        } else {
            self.upstream_u(label.row, label.col)
        }
    }

    /// First runnable task in canonical column order.
    fn next_task(&self) -> Option<Task> {
        let i = self.index;
        for j in 1..=self.servers {
            let needed = i.min(j) - 1;
            let done = self.applied[j - 1];
            if done < needed {
                let m = done + 1;
                if self.l_row[m - 1].is_some() && self.upstream_u(m, j).is_some() {
                    return Some(Task::Update { col: j, term: m });
                }
                continue;
            }
            match j.cmp(&i) {
                std::cmp::Ordering::Less => {
                    if self.l_row[j - 1].is_none() && self.upstream_u(j, j).is_some() {
                        return Some(Task::SolveL(j));
                    }
                }
                std::cmp::Ordering::Equal => {
                    if self.l_row[i - 1].is_none() {
                        return Some(Task::Factor);
                    }
                }
                std::cmp::Ordering::Greater => {
                    if self.own_u(j).is_none() && self.l_row[i - 1].is_some() {
                        return Some(Task::SolveU(j));
                    }
                }
            }
        }
        None
    }

    fn run(&mut self, task: Task) -> Result<()> {
        let i = self.index;
        let mut ops = OpCount::new();
        match task {
            Task::Update { col, term } => {
                let l = self.l_row[term - 1].as_ref().expect("scheduled without L");
                let u = self.u_store.get(&(term, col)).expect("scheduled without U");
                sub_product_assign(&mut self.x_row[col - 1], l, u, &mut ops)?;
                self.applied[col - 1] = term;
            }
            Task::SolveL(k) => {
                let u_kk = self.upstream_u(k, k).expect("scheduled without U_kk");
                let l = solve_upper_right(&self.x_row[k - 1], u_kk, &mut ops)?;
                self.l_row[k - 1] = Some(l);
            }
            Task::Factor => {
                let (l, u) = factor_counted(&self.x_row[i - 1], &mut ops)?;
                self.l_row[i - 1] = Some(l);
                self.u_out[0] = Some(u);
            }
            Task::SolveU(j) => {
                let l_ii = self.l_row[i - 1].as_ref().expect("scheduled without L_ii");
                let u = solve_unit_lower_left(l_ii, &self.x_row[j - 1], &mut ops)?;
                self.u_out[j - i] = Some(u);
            }
        }
        self.flops += ops;
        self.work += ops.get();
        Ok(())
    }

    fn emit(&mut self, to: Node, kind: MessageKind, blocks: Vec<(BlockLabel, Matrix)>) -> ServerMessage {
        self.clock += 1;
        ServerMessage {
            from: Node::Server(self.index),
            to,
            kind,
            blocks,
            step: self.clock,
            work: self.work,
            note: None,
        }
    }

    fn emit_ready_batches(&mut self, out: &mut Vec<ServerMessage>) {
        while let Some(batch) = self.batches.get(self.next_batch) {
            let Some(blocks) = batch
                .iter()
                .map(|&l| self.u_block(l).map(|m| (l, m.clone())))
                .collect::<Option<Vec<_>>>()
            else {
                return;
            };
            self.next_batch += 1;
            let msg = self.emit(Node::Server(self.index + 1), MessageKind::UBlocks, blocks);
            out.push(msg);
        }
    }

    fn row_complete(&self) -> bool {
        self.l_row.iter().all(Option::is_some) && self.u_out.iter().all(Option::is_some)
    }

    fn progress(&mut self, out: &mut Vec<ServerMessage>) {
        if self.phase != Phase::Computing {
            return;
        }
        while let Some(task) = self.next_task() {
            if self.activated_at.is_none() {
                self.activated_at = Some(self.clock);
            }
            if let Err(e) = self.run(task) {
                self.phase = Phase::Failed;
                let mut msg = self.emit(Node::Client, MessageKind::Failure, Vec::new());
                msg.note = Some(e.to_string());
                out.push(msg);
                return;
            }
            self.emit_ready_batches(out);
        }
        self.emit_ready_batches(out);

        if self.row_complete() && self.next_batch == self.batches.len() {
            let i = self.index;
            let blocks: Vec<(BlockLabel, Matrix)> = result_labels(i, self.servers)
                .into_iter()
                .map(|label| {
                    let m = match label.kind {
                        BlockKind::L => self.l_row[label.col - 1].clone(),
                        _ => self.u_out[label.col - i].clone(),
                    };
                    (label, m.expect("row complete"))
                })
                .collect();
            let msg = self.emit(Node::Client, MessageKind::Result, blocks);
            self.result_at = Some(msg.step);
            self.phase = Phase::Done;
            out.push(msg);
        }
    }
}
