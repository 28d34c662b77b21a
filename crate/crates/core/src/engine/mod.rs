//! The divide-and-conquer solver: large-item preprocessing, the iteration
//! over growing left collections, decomposition updates on the sub-problem
//! graph, and recursion into the resulting sub-problems.

mod graph;
mod preprocess;
mod solve;
mod trace;
mod update;

pub use graph::{build_subproblem_graph, reachable_set, Edge, PathEdge, Reachability, SubProblemGraph, Vertex};
pub use preprocess::{preprocess_large_items, Preprocessed};
pub use solve::{solve, SolveOptions, SolveStats, Solver};
pub use trace::{RecurseSide, TraceEvent, TraceMove, TraceRecord, TraceSubProblem};
pub use update::{update_decomposition, AgentMove, Outcome, Update, UpdateCase};

use crate::error::Result;
use crate::model::{avg_share_compare, Decomposition, Instance, Partition};

/// An instance together with its divider partition and every agent's
/// per-bundle values, computed once per recursion level.
#[derive(Debug, Clone)]
pub struct LevelContext<'a> {
    instance: &'a Instance,
    partition: &'a Partition,
    /// prefix[agent][t] = v_agent(S_1 ∪ … ∪ S_t)
    prefix: Vec<Vec<u64>>,
}

impl<'a> LevelContext<'a> {
    pub fn new(instance: &'a Instance, partition: &'a Partition) -> Self {
        let bundle_of = partition.bundle_of_items(instance.num_items());
        let prefix = (0..instance.num_agents())
            .map(|agent| {
                let mut per_bundle = vec![0u64; partition.num_bundles()];
                for (item, &v) in instance.row(agent).iter().enumerate() {
                    if let Some(b) = bundle_of[item] {
                        per_bundle[b] += v;
                    }
                }
                let mut prefix = Vec::with_capacity(per_bundle.len() + 1);
                prefix.push(0);
                let mut acc = 0;
                for v in per_bundle {
                    acc += v;
                    prefix.push(acc);
                }
                prefix
            })
            .collect();
        Self {
            instance,
            partition,
            prefix,
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn partition(&self) -> &'a Partition {
        self.partition
    }

    pub fn num_agents(&self) -> usize {
        self.instance.num_agents()
    }

    /// v_agent(S_{b+1}) for the 0-based bundle index `b`.
    pub fn bundle_value(&self, agent: usize, b: usize) -> u64 {
        self.prefix[agent][b + 1] - self.prefix[agent][b]
    }

    pub fn value_of(&self, agent: usize, bundles: &[usize]) -> u64 {
        bundles.iter().map(|&b| self.bundle_value(agent, b)).sum()
    }

    /// v_agent(S_1 ∪ … ∪ S_t)
    pub fn prefix_value(&self, agent: usize, t: usize) -> u64 {
        self.prefix[agent][t]
    }

    /// Whether the agent's average over the first `t` bundles strictly
    /// exceeds a 1/n share.
    pub fn prefers_left(&self, agent: usize, t: usize) -> Result<bool> {
        avg_share_compare(
            self.prefix_value(agent, t),
            t,
            self.instance.total(agent),
            self.num_agents(),
            true,
        )
    }

    /// Whether `agent` keeps a `count`-member sub-problem on `bundles` proportional.
    pub(crate) fn fits(&self, agent: usize, bundles: &[usize], count: usize) -> Result<bool> {
        avg_share_compare(
            self.value_of(agent, bundles),
            count,
            self.instance.total(agent),
            self.num_agents(),
            false,
        )
    }

    /// N_R: every agent other than the divider that is not in `decomposition`.
    pub fn outside_agents(&self, decomposition: &Decomposition) -> Vec<usize> {
        let inside = decomposition.agent_mask(self.num_agents());
        (0..self.num_agents())
            .filter(|&a| a != self.partition.divider && !inside[a])
            .collect()
    }
}

/// c and its members: agents of N_R whose average over the first `t`
/// bundles strictly exceeds a 1/n share, ascending.
pub fn count_left_preferrers(
    ctx: &LevelContext<'_>,
    decomposition: &Decomposition,
    t: usize,
) -> Result<(usize, Vec<usize>)> {
    let mut members = Vec::new();
    for agent in ctx.outside_agents(decomposition) {
        if ctx.prefers_left(agent, t)? {
            members.push(agent);
        }
    }
    Ok((members.len(), members))
}
