use std::collections::VecDeque;
use std::fmt;

use super::LevelContext;
use crate::error::{Error, Result};
use crate::model::Decomposition;

/// A vertex of the sub-problem graph. Sub-problem vertices are indexed by
/// position in the decomposition. The derived order (sub-problems ascending,
/// then `Beta`) is the order in which neighbors are explored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Sub(usize),
    /// The incoming bundle S_t.
    Beta,
    /// The outside agent k.
    Alpha,
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Sub(i) => write!(f, "D{i}"),
            Vertex::Beta => f.write_str("w_beta"),
            Vertex::Alpha => f.write_str("w_alpha"),
        }
    }
}

/// A directed edge with the lowest-index agent responsible for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub to: Vertex,
    pub agent: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubProblemGraph {
    pub outside_agent: usize,
    pub t: usize,
    num_sub: usize,
    alpha_out: Vec<Edge>,
    sub_out: Vec<Vec<Edge>>,
}

impl SubProblemGraph {
    pub fn num_sub_problems(&self) -> usize {
        self.num_sub
    }

    /// Outgoing edges in exploration order. `Beta` has none.
    pub fn out_edges(&self, v: Vertex) -> &[Edge] {
        match v {
            Vertex::Alpha => &self.alpha_out,
            Vertex::Sub(i) => &self.sub_out[i],
            Vertex::Beta => &[],
        }
    }

    /// Responsible agent of the edge `from → to`, if present.
    pub fn edge(&self, from: Vertex, to: Vertex) -> Option<usize> {
        self.out_edges(from).iter().find(|e| e.to == to).map(|e| e.agent)
    }

    pub fn edge_count(&self) -> usize {
        self.alpha_out.len() + self.sub_out.iter().map(Vec::len).sum::<usize>()
    }

    fn index(&self, v: Vertex) -> usize {
        match v {
            Vertex::Sub(i) => i,
            Vertex::Alpha => self.num_sub,
            Vertex::Beta => self.num_sub + 1,
        }
    }
}

/// Builds the graph over `decomposition` for outside agent `k` and incoming
/// bundle S_t (`t` is 1-based).
///
/// `u → w` exists when some agent of u could replace a member of w and keep
/// w proportional; `w_alpha → w` tests k alone; `u → w_beta` exists when a
/// member of u values S_t at a 1/n share or more.
pub fn build_subproblem_graph(
    ctx: &LevelContext<'_>,
    decomposition: &Decomposition,
    k: usize,
    t: usize,
) -> Result<SubProblemGraph> {
    if t == 0 || t > ctx.partition().num_bundles() {
        return Err(Error::Contract(format!("iteration t={t} outside 1..=n")));
    }
    if !ctx.outside_agents(decomposition).contains(&k) {
        return Err(Error::Contract(format!("agent {k} is not outside the decomposition")));
    }
    if !ctx.prefers_left(k, t)? {
        return Err(Error::Contract(format!(
            "agent {k} does not prefer the left collection at t={t}"
        )));
    }
    let subs = &decomposition.sub_problems;
    let incoming = [t - 1];

    let mut alpha_out = Vec::new();
    for (w, sub) in subs.iter().enumerate() {
        if ctx.fits(k, &sub.bundles, sub.agents.len())? {
            alpha_out.push(Edge { to: Vertex::Sub(w), agent: k });
        }
    }
    if ctx.fits(k, &incoming, 1)? {
        alpha_out.push(Edge { to: Vertex::Beta, agent: k });
    }

    let mut sub_out = Vec::with_capacity(subs.len());
    for (u, from) in subs.iter().enumerate() {
        let mut edges = Vec::new();
        for (w, to) in subs.iter().enumerate() {
            if u == w {
                continue;
            }
            if let Some(agent) = first_fitting(ctx, &from.agents, &to.bundles, to.agents.len())? {
                edges.push(Edge { to: Vertex::Sub(w), agent });
            }
        }
        if let Some(agent) = first_fitting(ctx, &from.agents, &incoming, 1)? {
            edges.push(Edge { to: Vertex::Beta, agent });
        }
        sub_out.push(edges);
    }

    Ok(SubProblemGraph {
        outside_agent: k,
        t,
        num_sub: subs.len(),
        alpha_out,
        sub_out,
    })
}

fn first_fitting(ctx: &LevelContext<'_>, agents: &[usize], bundles: &[usize], count: usize) -> Result<Option<usize>> {
    for &q in agents {
        if ctx.fits(q, bundles, count)? {
            return Ok(Some(q));
        }
    }
    Ok(None)
}

/// One step of a BFS tree path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathEdge {
    pub from: Vertex,
    pub to: Vertex,
    pub agent: usize,
}

/// Breadth-first reachability from `w_alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reachability {
    order: Vec<Vertex>,
    parent: Vec<Option<PathEdge>>,
    num_sub: usize,
}

impl Reachability {
    /// R in BFS discovery order; never contains `w_alpha`.
    pub fn reached(&self) -> &[Vertex] {
        &self.order
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.order.contains(&v)
    }

    /// Reached sub-problem indices, ascending.
    pub fn sub_problems(&self) -> Vec<usize> {
        let mut subs: Vec<usize> = self
            .order
            .iter()
            .filter_map(|v| match v {
                Vertex::Sub(i) => Some(*i),
                _ => None,
            })
            .collect();
        subs.sort_unstable();
        subs
    }

    /// The BFS tree path from `w_alpha` to `target`.
    pub fn path_to(&self, target: Vertex) -> Option<Vec<PathEdge>> {
        let idx = |v: Vertex| match v {
            Vertex::Sub(i) => i,
            Vertex::Alpha => self.num_sub,
            Vertex::Beta => self.num_sub + 1,
        };
        let mut edges = Vec::new();
        let mut cur = target;
        while cur != Vertex::Alpha {
            let edge = (*self.parent.get(idx(cur))?)?;
            edges.push(edge);
            cur = edge.from;
        }
        edges.reverse();
        Some(edges)
    }
}

pub fn reachable_set(graph: &SubProblemGraph) -> Reachability {
    let size = graph.num_sub + 2;
    let mut seen = vec![false; size];
    let mut parent = vec![None; size];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    seen[graph.index(Vertex::Alpha)] = true;
    queue.push_back(Vertex::Alpha);
    while let Some(u) = queue.pop_front() {
        for edge in graph.out_edges(u) {
            let wi = graph.index(edge.to);
            if !seen[wi] {
                seen[wi] = true;
                parent[wi] = Some(PathEdge {
                    from: u,
                    to: edge.to,
                    agent: edge.agent,
                });
                order.push(edge.to);
                queue.push_back(edge.to);
            }
        }
    }
    Reachability {
        order,
        parent,
        num_sub: graph.num_sub,
    }
}
