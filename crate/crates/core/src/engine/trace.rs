use serde::Serialize;

use super::update::Outcome;

/// One trace line. Agent and item indices refer to the top-level instance;
/// bundle indices are 0-based positions in the current level's partition,
/// and `t` is the 1-based iteration number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub depth: usize,
    /// Sequence number of the recursive call that emitted the event.
    pub call: usize,
    #[serde(flatten)]
    pub event: TraceEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Preassign {
        agent: usize,
        item: usize,
    },
    Partition {
        divider: usize,
        bundles: Vec<Vec<usize>>,
    },
    Iteration {
        t: usize,
        c: usize,
        members: Vec<usize>,
    },
    Update {
        t: usize,
        case: u8,
        outcome: Outcome,
        outside_agent: usize,
        path: Vec<String>,
        moves: Vec<TraceMove>,
        released: Option<usize>,
        decomposition: Vec<TraceSubProblem>,
    },
    AssignDivider {
        t: usize,
        agent: usize,
        items: Vec<usize>,
    },
    Recurse {
        side: RecurseSide,
        agents: Vec<usize>,
        items: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceMove {
    pub agent: usize,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceSubProblem {
    pub bundles: Vec<usize>,
    pub agents: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurseSide {
    Left,
    Right,
}
