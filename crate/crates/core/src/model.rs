//! Domain types shared by every stage of the solver.
//!
//! Valuations are plain non-negative integers. No agent's total is ever
//! normalized to one; a "1/n share" test is always the cross-multiplied
//! comparison performed by [`avg_share_compare`].

use crate::error::{Error, Result};

/// Every valuation entry must be strictly below this bound.
pub const VALUE_LIMIT: u64 = 1 << 40;
/// Largest accepted number of items.
pub const MAX_ITEMS: usize = 1 << 16;
/// Largest accepted number of agents.
pub const MAX_AGENTS: usize = 1 << 12;

/// Agents × items valuation matrix with cached per-agent totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    num_items: usize,
    valuations: Vec<Vec<u64>>,
    totals: Vec<u64>,
}

impl Instance {
    pub fn new(num_agents: usize, num_items: usize, valuations: Vec<Vec<u64>>) -> Result<Self> {
        if num_agents == 0 {
            return Err(Error::InvalidInstance("agents: must be at least 1".into()));
        }
        if num_agents > MAX_AGENTS {
            return Err(Error::InvalidInstance(format!(
                "agents: {num_agents} exceeds the limit of {MAX_AGENTS}"
            )));
        }
        if num_items > MAX_ITEMS {
            return Err(Error::InvalidInstance(format!(
                "items: {num_items} exceeds the limit of {MAX_ITEMS}"
            )));
        }
        if valuations.len() != num_agents {
            return Err(Error::InvalidInstance(format!(
                "valuations: expected {num_agents} rows, found {}",
                valuations.len()
            )));
        }
        for (agent, row) in valuations.iter().enumerate() {
            if row.len() != num_items {
                return Err(Error::InvalidInstance(format!(
                    "valuations[{agent}]: expected {num_items} entries, found {}",
                    row.len()
                )));
            }
            if let Some(item) = row.iter().position(|&v| v >= VALUE_LIMIT) {
                return Err(Error::InvalidInstance(format!(
                    "valuations[{agent}][{item}]: value {} is not below 2^40",
                    row[item]
                )));
            }
        }
        Ok(Self::from_validated(num_items, valuations))
    }

    /// Builds an instance from rows, taking the item count from the first row.
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let num_items = rows.first().map_or(0, Vec::len);
        Self::new(rows.len(), num_items, rows)
    }

    fn from_validated(num_items: usize, valuations: Vec<Vec<u64>>) -> Self {
        let totals = valuations.iter().map(|row| row.iter().sum()).collect();
        Self {
            num_items,
            valuations,
            totals,
        }
    }

    pub fn num_agents(&self) -> usize {
        self.valuations.len()
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn valuations(&self) -> &[Vec<u64>] {
        &self.valuations
    }

    /// Valuation row of `agent`. Panics when out of range.
    pub fn row(&self, agent: usize) -> &[u64] {
        &self.valuations[agent]
    }

    pub fn value(&self, agent: usize, item: usize) -> u64 {
        self.valuations[agent][item]
    }

    /// v_i(M) for `agent`.
    pub fn total(&self, agent: usize) -> u64 {
        self.totals[agent]
    }

    pub fn totals(&self) -> &[u64] {
        &self.totals
    }

    pub fn check_agent(&self, agent: usize) -> Result<()> {
        if agent < self.num_agents() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(format!(
                "agent {agent} (instance has {} agents)",
                self.num_agents()
            )))
        }
    }

    pub fn check_item(&self, item: usize) -> Result<()> {
        if item < self.num_items {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(format!(
                "item {item} (instance has {} items)",
                self.num_items
            )))
        }
    }

    /// The sub-instance on the given agents and items, re-indexed in the
    /// order supplied. Totals are recomputed over the kept items only.
    pub fn restrict(&self, agents: &[usize], items: &[usize]) -> Result<Instance> {
        if agents.is_empty() {
            return Err(Error::InvalidInstance(
                "restriction must keep at least one agent".into(),
            ));
        }
        for &a in agents {
            self.check_agent(a)?;
        }
        for &j in items {
            self.check_item(j)?;
        }
        let valuations = agents
            .iter()
            .map(|&a| items.iter().map(|&j| self.valuations[a][j]).collect())
            .collect();
        Ok(Self::from_validated(items.len(), valuations))
    }
}

/// v_agent(items), the additive bundle value.
pub fn bundle_value(instance: &Instance, agent: usize, items: &[usize]) -> Result<u64> {
    instance.check_agent(agent)?;
    let row = instance.row(agent);
    items.iter().try_fold(0u64, |acc, &j| {
        instance.check_item(j)?;
        Ok(acc + row[j])
    })
}

/// Compares the average `value / count` against the share `total / n`
/// without dividing: `value·n > count·total` when `strict`, otherwise `≥`.
pub fn avg_share_compare(value: u64, count: usize, total: u64, n: usize, strict: bool) -> Result<bool> {
    if count == 0 || n == 0 {
        return Err(Error::Contract(format!(
            "share comparison needs positive count and n (count={count}, n={n})"
        )));
    }
    let lhs = u128::from(value)
        .checked_mul(n as u128)
        .ok_or(Error::Overflow)?;
    let rhs = (count as u128)
        .checked_mul(u128::from(total))
        .ok_or(Error::Overflow)?;
    Ok(if strict { lhs > rhs } else { lhs >= rhs })
}

/// The divider's ordered bundles S_1..S_n. Items inside a bundle keep the
/// divider's sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub divider: usize,
    pub bundles: Vec<Vec<usize>>,
}

impl Partition {
    pub fn num_bundles(&self) -> usize {
        self.bundles.len()
    }

    /// Items of the listed bundles, ascending by item index.
    pub fn items_of(&self, bundle_indices: &[usize]) -> Vec<usize> {
        let mut items: Vec<usize> = bundle_indices
            .iter()
            .flat_map(|&b| self.bundles[b].iter().copied())
            .collect();
        items.sort_unstable();
        items
    }

    /// Bundle index holding each item.
    pub fn bundle_of_items(&self, num_items: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; num_items];
        for (b, bundle) in self.bundles.iter().enumerate() {
            for &j in bundle {
                owner[j] = Some(b);
            }
        }
        owner
    }
}

/// A pairing of bundle indices with agents, the pair (A, N′).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubProblem {
    pub bundles: Vec<usize>,
    pub agents: Vec<usize>,
}

impl SubProblem {
    /// Sorts both index lists.
    pub fn new(mut bundles: Vec<usize>, mut agents: Vec<usize>) -> Self {
        bundles.sort_unstable();
        agents.sort_unstable();
        Self { bundles, agents }
    }

    fn first_bundle(&self) -> usize {
        self.bundles.first().copied().unwrap_or(usize::MAX)
    }
}

/// Bundle- and agent-disjoint sub-problems over a prefix of the bundles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Decomposition {
    pub sub_problems: Vec<SubProblem>,
}

impl Decomposition {
    pub fn new(mut sub_problems: Vec<SubProblem>) -> Self {
        sub_problems.sort_by_key(SubProblem::first_bundle);
        Self { sub_problems }
    }

    pub fn is_empty(&self) -> bool {
        self.sub_problems.is_empty()
    }

    pub fn len(&self) -> usize {
        self.sub_problems.len()
    }

    /// |D.agents|
    pub fn num_agents(&self) -> usize {
        self.sub_problems.iter().map(|s| s.agents.len()).sum()
    }

    pub fn agents(&self) -> impl Iterator<Item = usize> + '_ {
        self.sub_problems.iter().flat_map(|s| s.agents.iter().copied())
    }

    pub fn bundles(&self) -> impl Iterator<Item = usize> + '_ {
        self.sub_problems.iter().flat_map(|s| s.bundles.iter().copied())
    }

    /// Membership mask over `num_agents` agents.
    pub fn agent_mask(&self, num_agents: usize) -> Vec<bool> {
        let mut mask = vec![false; num_agents];
        for a in self.agents() {
            mask[a] = true;
        }
        mask
    }

    /// Checks agent and bundle disjointness and that every sub-problem is
    /// non-empty and balanced.
    pub fn check_structure(&self, num_agents: usize, num_bundles: usize) -> Result<()> {
        let mut seen_agent = vec![false; num_agents];
        let mut seen_bundle = vec![false; num_bundles];
        for (idx, sub) in self.sub_problems.iter().enumerate() {
            if sub.agents.is_empty() || sub.agents.len() != sub.bundles.len() {
                return Err(Error::MalformedDecomposition(format!(
                    "sub-problem {idx} has {} bundles and {} agents",
                    sub.bundles.len(),
                    sub.agents.len()
                )));
            }
            for &a in &sub.agents {
                match seen_agent.get_mut(a) {
                    None => {
                        return Err(Error::MalformedDecomposition(format!(
                            "agent {a} out of range"
                        )))
                    }
                    Some(true) => {
                        return Err(Error::MalformedDecomposition(format!(
                            "agent {a} appears in more than one sub-problem"
                        )))
                    }
                    Some(slot) => *slot = true,
                }
            }
            for &b in &sub.bundles {
                match seen_bundle.get_mut(b) {
                    None => {
                        return Err(Error::MalformedDecomposition(format!(
                            "bundle {b} out of range"
                        )))
                    }
                    Some(true) => {
                        return Err(Error::MalformedDecomposition(format!(
                            "bundle {b} appears in more than one sub-problem"
                        )))
                    }
                    Some(slot) => *slot = true,
                }
            }
        }
        Ok(())
    }
}

/// Per-agent item sets X_1..X_n. Each bundle is kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub bundles: Vec<Vec<usize>>,
}

impl Allocation {
    pub fn new(mut bundles: Vec<Vec<usize>>) -> Self {
        for bundle in &mut bundles {
            bundle.sort_unstable();
        }
        Self { bundles }
    }

    pub fn num_agents(&self) -> usize {
        self.bundles.len()
    }

    /// Owner of every item, after checking the bundles partition `0..num_items`.
    pub fn owners(&self, num_items: usize) -> Result<Vec<usize>> {
        let mut owner = vec![usize::MAX; num_items];
        for (agent, bundle) in self.bundles.iter().enumerate() {
            for &j in bundle {
                let Some(slot) = owner.get_mut(j) else {
                    return Err(Error::NotAPartition(format!(
                        "agent {agent} holds item {j}, but there are only {num_items} items"
                    )));
                };
                if *slot != usize::MAX {
                    return Err(Error::NotAPartition(format!(
                        "item {j} is held by both agent {} and agent {agent}",
                        *slot
                    )));
                }
                *slot = agent;
            }
        }
        if let Some(j) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::NotAPartition(format!("item {j} is not allocated")));
        }
        Ok(owner)
    }

    pub fn check_partition(&self, num_agents: usize, num_items: usize) -> Result<()> {
        if self.bundles.len() != num_agents {
            return Err(Error::NotAPartition(format!(
                "expected {num_agents} bundles, found {}",
                self.bundles.len()
            )));
        }
        self.owners(num_items).map(|_| ())
    }
}
