//! JSON file formats for instances, allocations, reports and traces.

use serde::{Deserialize, Serialize};

use propm::{Allocation, Instance};

/// `{"agents": n, "items": m, "valuations": [[...], ...]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub agents: usize,
    pub items: usize,
    pub valuations: Vec<Vec<u64>>,
}

/// `{"bundles": [[sorted item indices], ...]}`, one list per agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationFile {
    pub bundles: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("{0}")]
    Syntax(String),
    #[error("{0}")]
    Invalid(String),
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| FormatError::Syntax(e.to_string()))?;
    Instance::new(file.agents, file.items, file.valuations).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn emit_instance(instance: &Instance) -> String {
    let file = InstanceFile {
        agents: instance.num_agents(),
        items: instance.num_items(),
        valuations: instance.valuations().to_vec(),
    };
    let mut out = serde_json::to_string(&file).expect("instance serializes");
    out.push('\n');
    out
}

pub fn parse_allocation(text: &str) -> Result<Allocation, FormatError> {
    let file: AllocationFile = serde_json::from_str(text).map_err(|e| FormatError::Syntax(e.to_string()))?;
    Ok(Allocation::new(file.bundles))
}

pub fn emit_allocation(allocation: &Allocation) -> String {
    let file = AllocationFile {
        bundles: allocation.bundles.clone(),
    };
    let mut out = serde_json::to_string(&file).expect("allocation serializes");
    out.push('\n');
    out
}
