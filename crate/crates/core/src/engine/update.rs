use serde::Serialize;

use super::graph::{build_subproblem_graph, reachable_set, PathEdge, Vertex};
use super::LevelContext;
use crate::error::{Error, Result};
use crate::model::{Decomposition, SubProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// The decomposition gained S_t and one agent.
    Grew,
    /// An agent that does not prefer the left collection was swapped out; c dropped by one.
    Swapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateCase {
    /// A path from the outside agent to S_t exists; shift agents along it.
    ReachBundle,
    /// Shift agents towards a member that does not prefer the left collection and release it.
    Release,
    /// Merge everything reachable with the outside agent and S_t.
    Merge,
}

impl UpdateCase {
    pub fn number(self) -> u8 {
        match self {
            UpdateCase::ReachBundle => 1,
            UpdateCase::Release => 2,
            UpdateCase::Merge => 3,
        }
    }
}

/// An agent moving along one graph edge. `from == Alpha` means the agent
/// came from outside the decomposition, `to == Beta` means it now forms the
/// new sub-problem on S_t.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentMove {
    pub agent: usize,
    pub from: Vertex,
    pub to: Vertex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Update {
    pub decomposition: Decomposition,
    pub case: UpdateCase,
    pub outcome: Outcome,
    pub outside_agent: usize,
    /// Vertices of the shifting path starting at `w_alpha`; empty for a merge.
    pub path: Vec<Vertex>,
    pub moves: Vec<AgentMove>,
    /// The agent returned to N_R by a release.
    pub released: Option<usize>,
    /// Indices (into the previous decomposition) of the sub-problems reachable
    /// from `w_alpha`, ascending.
    pub reached: Vec<usize>,
}

/// One step of decomposition repair at iteration `t` (1-based).
///
/// Requires some agent outside the decomposition to strictly prefer the
/// first `t` bundles, and fewer than `t` agents in the decomposition.
pub fn update_decomposition(ctx: &LevelContext<'_>, decomposition: &Decomposition, t: usize) -> Result<Update> {
    if decomposition.num_agents() >= t {
        return Err(Error::Contract(format!(
            "decomposition already holds {} agents at t={t}",
            decomposition.num_agents()
        )));
    }
    let mut k = None;
    for agent in ctx.outside_agents(decomposition) {
        if ctx.prefers_left(agent, t)? {
            k = Some(agent);
            break;
        }
    }
    let k = k.ok_or_else(|| Error::Contract(format!("update called with c = 0 at t={t}")))?;

    let graph = build_subproblem_graph(ctx, decomposition, k, t)?;
    let reach = reachable_set(&graph);
    if reach.reached().is_empty() {
        return Err(Error::Contract(format!(
            "nothing reachable from outside agent {k} at t={t}"
        )));
    }
    let reached = reach.sub_problems();

    if let Some(path) = reach.path_to(Vertex::Beta) {
        let (subs, moves) = shift_along(decomposition, &path, t);
        return Ok(Update {
            decomposition: Decomposition::new(subs),
            case: UpdateCase::ReachBundle,
            outcome: Outcome::Grew,
            outside_agent: k,
            path: path_vertices(&path),
            moves,
            released: None,
            reached,
        });
    }

    let mut release = None;
    for &s in &reached {
        for &q in &decomposition.sub_problems[s].agents {
            if !ctx.prefers_left(q, t)? && release.is_none_or(|(best, _)| q < best) {
                release = Some((q, s));
            }
        }
    }
    if let Some((q, host)) = release {
        let path = reach
            .path_to(Vertex::Sub(host))
            .ok_or_else(|| Error::Contract(format!("no path to reached sub-problem {host}")))?;
        let (mut subs, moves) = shift_along(decomposition, &path, t);
        subs[host].agents.retain(|&a| a != q);
        return Ok(Update {
            decomposition: Decomposition::new(subs),
            case: UpdateCase::Release,
            outcome: Outcome::Swapped,
            outside_agent: k,
            path: path_vertices(&path),
            moves,
            released: Some(q),
            reached,
        });
    }

    let mut merged_bundles = vec![t - 1];
    let mut merged_agents = vec![k];
    let mut subs = Vec::with_capacity(decomposition.len() + 1 - reached.len());
    for (idx, sub) in decomposition.sub_problems.iter().enumerate() {
        if reached.binary_search(&idx).is_ok() {
            merged_bundles.extend_from_slice(&sub.bundles);
            merged_agents.extend_from_slice(&sub.agents);
        } else {
            subs.push(sub.clone());
        }
    }
    subs.push(SubProblem::new(merged_bundles, merged_agents));
    Ok(Update {
        decomposition: Decomposition::new(subs),
        case: UpdateCase::Merge,
        outcome: Outcome::Grew,
        outside_agent: k,
        path: Vec::new(),
        moves: Vec::new(),
        released: None,
        reached,
    })
}

fn path_vertices(path: &[PathEdge]) -> Vec<Vertex> {
    std::iter::once(Vertex::Alpha).chain(path.iter().map(|e| e.to)).collect()
}

/// Moves each edge's responsible agent from its tail to its head. The
/// returned list still uses the old sub-problem positions; an edge into
/// `Beta` appends the sub-problem ({S_t}, {agent}).
fn shift_along(decomposition: &Decomposition, path: &[PathEdge], t: usize) -> (Vec<SubProblem>, Vec<AgentMove>) {
    let mut subs = decomposition.sub_problems.clone();
    let mut moves = Vec::with_capacity(path.len());
    for edge in path {
        if let Vertex::Sub(u) = edge.from {
            subs[u].agents.retain(|&a| a != edge.agent);
        }
        match edge.to {
            Vertex::Sub(w) => {
                let agents = &mut subs[w].agents;
                let pos = agents.partition_point(|&a| a < edge.agent);
                agents.insert(pos, edge.agent);
            }
            Vertex::Beta => subs.push(SubProblem::new(vec![t - 1], vec![edge.agent])),
            Vertex::Alpha => {}
        }
        moves.push(AgentMove {
            agent: edge.agent,
            from: edge.from,
            to: edge.to,
        });
    }
    (subs, moves)
}
