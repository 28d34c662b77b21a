//! The divider's prefix partition of the items into n bundles.

use crate::error::{Error, Result};
use crate::model::{avg_share_compare, Instance, Partition};

/// Items ordered by the agent's value, ties broken by item index.
pub fn sort_items_for(instance: &Instance, agent: usize) -> Result<Vec<usize>> {
    instance.check_agent(agent)?;
    let row = instance.row(agent);
    let mut order: Vec<usize> = (0..instance.num_items()).collect();
    order.sort_by_key(|&j| (row[j], j));
    Ok(order)
}

/// Splits the divider's sorted items into bundles S_1..S_n.
///
/// S_k is the longest prefix of the remaining items whose value is at most
/// a `1/(n-k+1)` share of what remains; S_n takes everything left. Fails if
/// the divider values some item above a 1/n share of their total.
pub fn build_divider_partition(instance: &Instance, divider: usize) -> Result<Partition> {
    instance.check_agent(divider)?;
    let n = instance.num_agents();
    let row = instance.row(divider);
    let total = instance.total(divider);
    for (item, &v) in row.iter().enumerate() {
        if avg_share_compare(v, 1, total, n, true)? {
            return Err(Error::OversizedItem {
                agent: divider,
                item,
            });
        }
    }

    let order = sort_items_for(instance, divider)?;
    let mut bundles = Vec::with_capacity(n);
    let mut remaining = total;
    let mut pos = 0;
    for k in 1..=n {
        let start = pos;
        if k == n {
            pos = order.len();
        } else {
            let parts = n - k + 1;
            let mut value = 0u64;
            // value·parts ≤ remaining
            while pos < order.len()
                && !avg_share_compare(value + row[order[pos]], 1, remaining, parts, true)?
            {
                value += row[order[pos]];
                pos += 1;
            }
            remaining -= value;
        }
        bundles.push(order[start..pos].to_vec());
    }
    Ok(Partition { divider, bundles })
}
