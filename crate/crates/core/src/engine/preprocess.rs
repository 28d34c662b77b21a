use crate::error::Result;
use crate::model::{avg_share_compare, Instance};

/// Result of peeling off items worth more than a 1/n share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preprocessed {
    /// (agent, item) pairs in the input's indices, in assignment order.
    pub assignments: Vec<(usize, usize)>,
    /// The remaining agents and items; every item is worth at most a 1/n
    /// share to every agent here.
    pub reduced: Instance,
    /// reduced agent index → input agent index
    pub agent_map: Vec<usize>,
    /// reduced item index → input item index
    pub item_map: Vec<usize>,
}

impl Preprocessed {
    pub fn is_identity(&self) -> bool {
        self.assignments.is_empty()
    }
}

/// Repeatedly gives the lowest (agent, item) pair with v·n > total (over
/// the agents and items still present) to that agent and removes both.
pub fn preprocess_large_items(instance: &Instance) -> Result<Preprocessed> {
    let n = instance.num_agents();
    let m = instance.num_items();
    let mut agent_alive = vec![true; n];
    let mut item_alive = vec![true; m];
    let mut totals = instance.totals().to_vec();
    let mut agents_left = n;
    let mut assignments = Vec::new();

    'scan: loop {
        for agent in (0..n).filter(|&a| agent_alive[a]) {
            let row = instance.row(agent);
            for item in (0..m).filter(|&j| item_alive[j]) {
                if avg_share_compare(row[item], 1, totals[agent], agents_left, true)? {
                    assignments.push((agent, item));
                    agent_alive[agent] = false;
                    item_alive[item] = false;
                    agents_left -= 1;
                    for other in (0..n).filter(|&a| agent_alive[a]) {
                        totals[other] -= instance.value(other, item);
                    }
                    continue 'scan;
                }
            }
        }
        break;
    }

    let agent_map: Vec<usize> = (0..n).filter(|&a| agent_alive[a]).collect();
    let item_map: Vec<usize> = (0..m).filter(|&j| item_alive[j]).collect();
    let reduced = if assignments.is_empty() {
        instance.clone()
    } else {
        instance.restrict(&agent_map, &item_map)?
    };
    Ok(Preprocessed {
        assignments,
        reduced,
        agent_map,
        item_map,
    })
}
