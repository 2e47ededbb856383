use std::fmt;
use std::str::FromStr;

use crate::matrix::Matrix;

/// Message endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Client,
    /// 1-based server index.
    Server(usize),
}

impl Node {
    pub fn server_index(self) -> Option<usize> {
        match self {
            Node::Server(i) => Some(i),
            Node::Client => None,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Client => f.write_str("C"),
            Node::Server(i) => write!(f, "S{i}"),
        }
    }
}

impl FromStr for Node {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "C" {
            return Ok(Node::Client);
        }
        s.strip_prefix('S')
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .map(Node::Server)
            .ok_or_else(|| format!("invalid node {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    X,
    L,
    U,
}

/// Names a block such as `U_12` (1-based block coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockLabel {
    pub kind: BlockKind,
    pub row: usize,
    pub col: usize,
}

impl BlockLabel {
    pub const fn x(row: usize, col: usize) -> Self {
        BlockLabel {
            kind: BlockKind::X,
            row,
            col,
        }
    }

    pub const fn l(row: usize, col: usize) -> Self {
        BlockLabel {
            kind: BlockKind::L,
            row,
            col,
        }
    }

    pub const fn u(row: usize, col: usize) -> Self {
        BlockLabel {
            kind: BlockKind::U,
            row,
            col,
        }
    }
}

impl fmt::Display for BlockLabel {
    /// `U_12` for single-digit indices, `U_12_3` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            BlockKind::X => 'X',
            BlockKind::L => 'L',
            BlockKind::U => 'U',
        };
        if self.row < 10 && self.col < 10 {
            write!(f, "{k}_{}{}", self.row, self.col)
        } else {
            write!(f, "{k}_{}_{}", self.row, self.col)
        }
    }
}

impl FromStr for BlockLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("invalid block label {s:?} (expected e.g. U_12 or L_10_3)");
        let (k, rest) = s.split_once('_').ok_or_else(bad)?;
        let kind = match k {
            "X" | "x" => BlockKind::X,
            "L" | "l" => BlockKind::L,
            "U" | "u" => BlockKind::U,
            _ => return Err(bad()),
        };
        let (row, col) = match rest.split_once('_') {
            Some((r, c)) => (r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?),
            None if rest.len() == 2 && rest.bytes().all(|b| b.is_ascii_digit()) => {
                let b = rest.as_bytes();
                ((b[0] - b'0') as usize, (b[1] - b'0') as usize)
            }
            None => return Err(bad()),
        };
        if row == 0 || col == 0 {
            return Err(bad());
        }
        Ok(BlockLabel { kind, row, col })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    AssignRow,
    UBlocks,
    Result,
    Failure,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MessageKind::AssignRow => "ASSIGN_ROW",
            MessageKind::UBlocks => "U_BLOCKS",
            MessageKind::Result => "RESULT",
            MessageKind::Failure => "FAILURE",
        })
    }
}

impl FromStr for MessageKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ASSIGN_ROW" => Ok(MessageKind::AssignRow),
            "U_BLOCKS" => Ok(MessageKind::UBlocks),
            "RESULT" => Ok(MessageKind::Result),
            "FAILURE" => Ok(MessageKind::Failure),
            _ => Err(format!("invalid message kind {s:?}")),
        }
    }
}

/// A message between the client and the servers.
///
/// `step` is the sender's logical clock at emission and `work` its
/// accumulated-flop clock (the longest chain of dependent scalar work that
/// led to this message).
#[derive(Debug, Clone, PartialEq)]
pub struct ServerMessage {
    pub from: Node,
    pub to: Node,
    pub kind: MessageKind,
    pub blocks: Vec<(BlockLabel, Matrix)>,
    pub step: u64,
    pub work: u64,
    pub note: Option<String>,
}

impl ServerMessage {
    /// Number of reals carried.
    pub fn size(&self) -> usize {
        self.blocks.iter().map(|(_, m)| m.len()).sum()
    }

    pub fn labels(&self) -> Vec<BlockLabel> {
        self.blocks.iter().map(|(l, _)| *l).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_text_forms() {
        assert_eq!(BlockLabel::u(1, 2).to_string(), "U_12");
        assert_eq!(BlockLabel::l(10, 3).to_string(), "L_10_3");
        assert_eq!("U_22".parse::<BlockLabel>().unwrap(), BlockLabel::u(2, 2));
        assert_eq!("L_10_3".parse::<BlockLabel>().unwrap(), BlockLabel::l(10, 3));
        assert!("U_2".parse::<BlockLabel>().is_err());
        assert!("Q_12".parse::<BlockLabel>().is_err());
        assert!("U_01".parse::<BlockLabel>().is_err());
    }

    #[test]
    fn node_text_forms() {
        assert_eq!("C".parse::<Node>().unwrap(), Node::Client);
        assert_eq!("S12".parse::<Node>().unwrap(), Node::Server(12));
        assert_eq!(Node::Server(3).to_string(), "S3");
        assert!("S0".parse::<Node>().is_err());
    }
}
