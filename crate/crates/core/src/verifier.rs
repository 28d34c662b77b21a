//! Independent checks of PROPm satisfaction, sub-problem proportionality and
//! the divider partition's guarantees.
//!
//! Everything here is recomputed from raw valuations. Nothing in this module
//! reads engine state, so it can serve as an oracle for the engine.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{avg_share_compare, Allocation, Decomposition, Instance, Partition, SubProblem};

/// PROPm outcome for a single agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentReport {
    pub agent: usize,
    /// v_i(X_i)
    pub own_value: u64,
    /// d_i(X), the value of the agent's maximin good.
    pub maximin: u64,
    /// n·(own_value + maximin)
    pub lhs: u128,
    /// v_i(M)
    pub rhs: u64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    /// True iff every agent is PROPm-satisfied.
    pub propm: bool,
    pub reports: Vec<AgentReport>,
}

impl Verdict {
    pub fn unsatisfied(&self) -> impl Iterator<Item = &AgentReport> {
        self.reports.iter().filter(|r| !r.satisfied)
    }
}

fn checked_owners(instance: &Instance, allocation: &Allocation) -> Result<Vec<usize>> {
    if allocation.num_agents() != instance.num_agents() {
        return Err(Error::NotAPartition(format!(
            "expected {} bundles, found {}",
            instance.num_agents(),
            allocation.num_agents()
        )));
    }
    allocation.owners(instance.num_items())
}

fn maximin_from_owners(instance: &Instance, owners: &[usize], agent: usize) -> u64 {
    let row = instance.row(agent);
    let mut min_per_owner: Vec<Option<u64>> = vec![None; instance.num_agents()];
    for (item, &owner) in owners.iter().enumerate() {
        let slot = &mut min_per_owner[owner];
        *slot = Some(slot.map_or(row[item], |m| m.min(row[item])));
    }
    min_per_owner
        .iter()
        .enumerate()
        .filter(|&(other, _)| other != agent)
        .filter_map(|(_, m)| *m)
        .max()
        .unwrap_or(0)
}

fn report_from_owners(
    instance: &Instance,
    allocation: &Allocation,
    owners: &[usize],
    agent: usize,
) -> Result<AgentReport> {
    let row = instance.row(agent);
    let own_value: u64 = allocation.bundles[agent].iter().map(|&j| row[j]).sum();
    let maximin = maximin_from_owners(instance, owners, agent);
    let n = instance.num_agents();
    let rhs = instance.total(agent);
    let satisfied = avg_share_compare(own_value + maximin, 1, rhs, n, false)?;
    Ok(AgentReport {
        agent,
        own_value,
        maximin,
        lhs: (n as u128) * u128::from(own_value + maximin),
        rhs,
        satisfied,
    })
}

/// d_agent(X): over the other agents' non-empty bundles, the largest of the
/// smallest item values. Zero when every other bundle is empty.
pub fn maximin_value(instance: &Instance, allocation: &Allocation, agent: usize) -> Result<u64> {
    instance.check_agent(agent)?;
    let owners = checked_owners(instance, allocation)?;
    Ok(maximin_from_owners(instance, &owners, agent))
}

pub fn is_propm_satisfied(
    instance: &Instance,
    allocation: &Allocation,
    agent: usize,
) -> Result<AgentReport> {
    instance.check_agent(agent)?;
    let owners = checked_owners(instance, allocation)?;
    report_from_owners(instance, allocation, &owners, agent)
}

/// Reports for every agent. Fails with [`Error::NotAPartition`] when the
/// allocation does not partition the items.
pub fn verify_allocation(instance: &Instance, allocation: &Allocation) -> Result<Verdict> {
    let owners = checked_owners(instance, allocation)?;
    let reports = (0..instance.num_agents())
        .map(|agent| report_from_owners(instance, allocation, &owners, agent))
        .collect::<Result<Vec<_>>>()?;
    Ok(Verdict {
        propm: reports.iter().all(|r| r.satisfied),
        reports,
    })
}

fn value_of_bundles(instance: &Instance, partition: &Partition, agent: usize, bundles: &[usize]) -> Result<u64> {
    let row = instance.row(agent);
    bundles.iter().try_fold(0u64, |acc, &b| {
        let bundle = partition.bundles.get(b).ok_or_else(|| {
            Error::IndexOutOfRange(format!("bundle {b} (partition has {})", partition.num_bundles()))
        })?;
        Ok(acc + bundle.iter().map(|&j| row[j]).sum::<u64>())
    })
}

/// Every member values the sub-problem's bundles at least |N′|/n of their total.
pub fn is_proportional_subproblem(instance: &Instance, partition: &Partition, sub: &SubProblem) -> Result<bool> {
    let n = instance.num_agents();
    for &q in &sub.agents {
        instance.check_agent(q)?;
        let value = value_of_bundles(instance, partition, q, &sub.bundles)?;
        if !avg_share_compare(value, sub.agents.len(), instance.total(q), n, false)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_proportional_decomposition(
    instance: &Instance,
    partition: &Partition,
    decomposition: &Decomposition,
) -> Result<bool> {
    decomposition.check_structure(instance.num_agents(), partition.num_bundles())?;
    for sub in &decomposition.sub_problems {
        if !is_proportional_subproblem(instance, partition, sub)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// With the divider holding bundle `allocated` (1-based), checks that no
/// agent's bundle mixes an item left of it with an item right of it.
pub fn check_divider_guarantee(
    instance: &Instance,
    partition: &Partition,
    allocated: usize,
    allocation: &Allocation,
) -> Result<bool> {
    if allocated == 0 || allocated > partition.num_bundles() {
        return Err(Error::IndexOutOfRange(format!(
            "bundle S_{allocated} (partition has {})",
            partition.num_bundles()
        )));
    }
    let bundle_of = partition.bundle_of_items(instance.num_items());
    let divider_bundle = allocated - 1;
    for items in &allocation.bundles {
        let mut left = false;
        let mut right = false;
        for &j in items {
            match bundle_of.get(j).copied().flatten() {
                Some(b) if b < divider_bundle => left = true,
                Some(b) if b > divider_bundle => right = true,
                _ => {}
            }
        }
        if left && right {
            return Ok(false);
        }
    }
    Ok(true)
}

/// n·v_i(M ∖ (S_1 ∪ … ∪ S_k)) ≥ (n−k)·v_i(M) for every k, i the divider.
pub fn suffix_bounds_hold(instance: &Instance, partition: &Partition) -> Result<bool> {
    let n = partition.num_bundles();
    let divider = partition.divider;
    let total = instance.total(divider);
    let mut suffix = total;
    for k in 1..=n {
        let Some(rest) = suffix.checked_sub(value_of_bundles(instance, partition, divider, &[k - 1])?) else {
            return Ok(false);
        };
        suffix = rest;
        if k < n && !avg_share_compare(suffix, n - k, total, n, false)? {
            return Ok(false);
        }
    }
    Ok(suffix == 0)
}

/// For k < n, S_k cannot absorb the next sorted item without exceeding its
/// threshold, unless no items remain.
pub fn prefix_maximality_holds(instance: &Instance, partition: &Partition) -> Result<bool> {
    let n = partition.num_bundles();
    let row = instance.row(partition.divider);
    let mut remaining = instance.total(partition.divider);
    for k in 1..n {
        let value = value_of_bundles(instance, partition, partition.divider, &[k - 1])?;
        let next = partition.bundles[k..].iter().find_map(|b| b.first());
        if let Some(&j) = next {
            if !avg_share_compare(value + row[j], 1, remaining, n - k + 1, true)? {
                return Ok(false);
            }
        }
        let Some(rest) = remaining.checked_sub(value) else {
            return Ok(false);
        };
        remaining = rest;
    }
    Ok(true)
}

/// For a merge step: every listed agent values the `outside` bundles strictly
/// below an |outside|/n share. Vacuously true when `outside` is empty.
pub fn merged_value_bound_holds(
    instance: &Instance,
    partition: &Partition,
    outside: &[usize],
    agents: &[usize],
) -> Result<bool> {
    if outside.is_empty() {
        return Ok(true);
    }
    let n = instance.num_agents();
    for &q in agents {
        let value = value_of_bundles(instance, partition, q, outside)?;
        if avg_share_compare(value, outside.len(), instance.total(q), n, false)? {
            return Ok(false);
        }
    }
    Ok(true)
}
