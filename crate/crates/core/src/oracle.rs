//! Brute-force ground truth and seeded instance generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Allocation, Instance, VALUE_LIMIT};
use crate::verifier::verify_allocation;

/// Default cap on the number of assignments `brute_force_propm` will enumerate.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

/// Number of item→agent assignments, n^m, or `None` past `u64`.
pub fn assignment_count(num_agents: usize, num_items: usize) -> Option<u64> {
    let exp = u32::try_from(num_items).ok()?;
    (num_agents as u64).checked_pow(exp)
}

/// Enumerates every assignment in lexicographic order of the item→agent
/// digit string (item 0 most significant) and returns the first PROPm one.
pub fn brute_force_propm(instance: &Instance, budget: u64) -> Result<Option<Allocation>> {
    let n = instance.num_agents();
    let m = instance.num_items();
    match assignment_count(n, m) {
        Some(count) if count <= budget => {}
        count => {
            return Err(Error::BudgetExceeded {
                needed: count.map_or_else(|| format!("{n}^{m}"), |c| c.to_string()),
                budget,
            })
        }
    }

    let mut digits = vec![0usize; m];
    loop {
        let mut bundles = vec![Vec::new(); n];
        for (item, &agent) in digits.iter().enumerate() {
            bundles[agent].push(item);
        }
        let allocation = Allocation::new(bundles);
        if verify_allocation(instance, &allocation)?.propm {
            return Ok(Some(allocation));
        }
        // Increment from the least significant digit (the last item).
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < n {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// A seeded instance with entries uniform in `0..=max_value`.
///
/// Entries are drawn row by row from ChaCha8 seeded with `seed` via
/// `seed_from_u64`, so a seed names the same matrix on every platform.
pub fn random_instance(seed: u64, num_agents: usize, num_items: usize, max_value: u64) -> Result<Instance> {
    if max_value >= VALUE_LIMIT {
        return Err(Error::InvalidInstance(format!(
            "max_value: {max_value} is not below 2^40"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..num_agents)
        .map(|_| (0..num_items).map(|_| rng.gen_range(0..=max_value)).collect())
        .collect();
    Instance::new(num_agents, num_items, rows)
}
