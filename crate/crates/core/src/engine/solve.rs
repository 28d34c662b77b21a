use super::preprocess::preprocess_large_items;
use super::trace::{RecurseSide, TraceEvent, TraceMove, TraceRecord, TraceSubProblem};
use super::update::{update_decomposition, Outcome, UpdateCase};
use super::{count_left_preferrers, LevelContext};
use crate::divider::build_divider_partition;
use crate::error::{Error, Result};
use crate::model::{Allocation, Decomposition, Instance, Partition};
use crate::verifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Run the verifier's invariant checks at every step and fail with
    /// [`Error::Contract`] on the first violation.
    pub check_invariants: bool,
    /// Peel off items worth more than a 1/n share before partitioning, at
    /// every recursion level. Turning this off runs the main loop directly;
    /// a divider holding such an item then fails with [`Error::OversizedItem`].
    pub preprocess: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            check_invariants: false,
            preprocess: true,
        }
    }
}

impl SolveOptions {
    pub fn checked() -> Self {
        Self {
            check_invariants: true,
            ..Self::default()
        }
    }
}

/// Counters collected over one or more solves.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Updates per case, indexed by case number − 1.
    pub cases: [usize; 3],
    pub grew: usize,
    pub swapped: usize,
    /// Largest number of update calls within a single iteration.
    pub max_updates_per_iteration: usize,
    pub recursive_calls: usize,
    pub max_depth: usize,
    pub preassigned: usize,
    pub partitions: usize,
    /// Invariant checks evaluated (only with `check_invariants`).
    pub checks: usize,
}

impl SolveStats {
    pub fn updates(&self) -> usize {
        self.cases.iter().sum()
    }

    pub fn merge(&mut self, other: &SolveStats) {
        for (a, b) in self.cases.iter_mut().zip(other.cases) {
            *a += b;
        }
        self.grew += other.grew;
        self.swapped += other.swapped;
        self.max_updates_per_iteration = self.max_updates_per_iteration.max(other.max_updates_per_iteration);
        self.recursive_calls += other.recursive_calls;
        self.max_depth = self.max_depth.max(other.max_depth);
        self.preassigned += other.preassigned;
        self.partitions += other.partitions;
        self.checks += other.checks;
    }
}

type Sink<'a> = dyn FnMut(&TraceRecord) + 'a;

/// Recursive divide-and-conquer solver.
pub struct Solver<'a> {
    options: SolveOptions,
    stats: SolveStats,
    sink: Option<Box<Sink<'a>>>,
    next_call: usize,
}

impl<'a> Solver<'a> {
    pub fn new(options: SolveOptions) -> Self {
        Self {
            options,
            stats: SolveStats::default(),
            sink: None,
            next_call: 0,
        }
    }

    /// Streams every trace record to `sink` as it is produced.
    pub fn with_trace(mut self, sink: impl FnMut(&TraceRecord) + 'a) -> Self {
        self.sink = Some(Box::new(sink));
        self
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn solve(&mut self, instance: &Instance) -> Result<Allocation> {
        let agents: Vec<usize> = (0..instance.num_agents()).collect();
        let items: Vec<usize> = (0..instance.num_items()).collect();
        let bundles = self.solve_level(instance, &agents, &items, 0)?;
        Ok(Allocation::new(bundles))
    }

    fn emit(&mut self, depth: usize, call: usize, event: impl FnOnce() -> TraceEvent) {
        if let Some(sink) = self.sink.as_mut() {
            sink(&TraceRecord {
                depth,
                call,
                event: event(),
            });
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) -> Result<()> {
        self.stats.checks += 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(what()))
        }
    }

    /// Solves `instance`, whose agents and items are `agent_ids`/`item_ids`
    /// at the top level. Returns bundles in `instance`'s own indices.
    fn solve_level(
        &mut self,
        instance: &Instance,
        agent_ids: &[usize],
        item_ids: &[usize],
        depth: usize,
    ) -> Result<Vec<Vec<usize>>> {
        let call = self.next_call;
        self.next_call += 1;
        self.stats.recursive_calls += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);

        let mut bundles = vec![Vec::new(); instance.num_agents()];
        if self.options.preprocess {
            let pre = preprocess_large_items(instance)?;
            if !pre.is_identity() {
                for &(agent, item) in &pre.assignments {
                    bundles[agent].push(item);
                    self.emit(depth, call, || TraceEvent::Preassign {
                        agent: agent_ids[agent],
                        item: item_ids[item],
                    });
                }
                self.stats.preassigned += pre.assignments.len();
                let sub_agents: Vec<usize> = pre.agent_map.iter().map(|&a| agent_ids[a]).collect();
                let sub_items: Vec<usize> = pre.item_map.iter().map(|&j| item_ids[j]).collect();
                let inner = self.main_loop(&pre.reduced, &sub_agents, &sub_items, depth, call)?;
                for (local, items) in inner.into_iter().enumerate() {
                    bundles[pre.agent_map[local]].extend(items.into_iter().map(|j| pre.item_map[j]));
                }
                self.check_level(instance, &bundles)?;
                return Ok(bundles);
            }
        }
        let bundles = self.main_loop(instance, agent_ids, item_ids, depth, call)?;
        self.check_level(instance, &bundles)?;
        Ok(bundles)
    }

    fn check_level(&mut self, instance: &Instance, bundles: &[Vec<usize>]) -> Result<()> {
        if !self.options.check_invariants {
            return Ok(());
        }
        let verdict = verifier::verify_allocation(instance, &Allocation::new(bundles.to_vec()))
            .map_err(|e| Error::Contract(format!("level allocation rejected: {e}")))?;
        self.check(verdict.propm, || {
            let agents: Vec<usize> = verdict.unsatisfied().map(|r| r.agent).collect();
            format!("agents {agents:?} not PROPm-satisfied within their sub-instance")
        })
    }

    fn main_loop(
        &mut self,
        instance: &Instance,
        agent_ids: &[usize],
        item_ids: &[usize],
        depth: usize,
        call: usize,
    ) -> Result<Vec<Vec<usize>>> {
        let n = instance.num_agents();
        let m = instance.num_items();
        if n == 1 {
            return Ok(vec![(0..m).collect()]);
        }
        if m == 0 {
            return Ok(vec![Vec::new(); n]);
        }

        let partition = build_divider_partition(instance, 0)?;
        self.stats.partitions += 1;
        if self.options.check_invariants {
            let suffix = verifier::suffix_bounds_hold(instance, &partition)?;
            self.check(suffix, || "divider suffix bound violated".into())?;
            let maximal = verifier::prefix_maximality_holds(instance, &partition)?;
            self.check(maximal, || "divider bundle is not a longest prefix".into())?;
        }
        self.emit(depth, call, || TraceEvent::Partition {
            divider: agent_ids[partition.divider],
            bundles: partition
                .bundles
                .iter()
                .map(|b| b.iter().map(|&j| item_ids[j]).collect())
                .collect(),
        });

        let ctx = LevelContext::new(instance, &partition);
        let mut decomposition = Decomposition::default();
        for t in 1..=n {
            let (mut c, members) = count_left_preferrers(&ctx, &decomposition, t)?;
            self.emit(depth, call, || TraceEvent::Iteration {
                t,
                c,
                members: members.iter().map(|&a| agent_ids[a]).collect(),
            });
            let mut rounds = 0;
            while c > 0 && decomposition.num_agents() < t {
                rounds += 1;
                self.check(rounds <= n, || format!("more than n={n} updates at t={t}"))?;
                let agents_before = decomposition.num_agents();
                let c_before = c;
                let update = update_decomposition(&ctx, &decomposition, t)?;

                if self.options.check_invariants && update.case == UpdateCase::Merge {
                    let outside: Vec<usize> = decomposition
                        .sub_problems
                        .iter()
                        .enumerate()
                        .filter(|(idx, _)| update.reached.binary_search(idx).is_err())
                        .flat_map(|(_, sub)| sub.bundles.iter().copied())
                        .collect();
                    let merged = update
                        .decomposition
                        .sub_problems
                        .iter()
                        .find(|s| s.bundles.contains(&(t - 1)))
                        .map(|s| s.agents.clone())
                        .unwrap_or_default();
                    let bound = verifier::merged_value_bound_holds(instance, &partition, &outside, &merged)?;
                    self.check(bound, || format!("merge value bound violated at t={t}"))?;
                }

                decomposition = update.decomposition.clone();
                if self.options.check_invariants {
                    let proportional = verifier::is_proportional_decomposition(instance, &partition, &decomposition)?;
                    self.check(proportional, || format!("decomposition lost proportionality at t={t}"))?;
                }
                c = count_left_preferrers(&ctx, &decomposition, t)?.0;

                let agents_after = decomposition.num_agents();
                let progressed = match update.outcome {
                    Outcome::Grew => agents_after == agents_before + 1,
                    Outcome::Swapped => agents_after == agents_before && c + 1 == c_before,
                };
                self.check(progressed, || {
                    format!(
                        "update at t={t} made no progress: {:?}, agents {agents_before}->{agents_after}, c {c_before}->{c}",
                        update.outcome
                    )
                })?;
                self.stats.cases[usize::from(update.case.number()) - 1] += 1;
                match update.outcome {
                    Outcome::Grew => self.stats.grew += 1,
                    Outcome::Swapped => self.stats.swapped += 1,
                }
                self.emit(depth, call, || update_event(t, &update, agent_ids));
            }
            self.stats.max_updates_per_iteration = self.stats.max_updates_per_iteration.max(rounds);

            if decomposition.num_agents() < t {
                return self.conquer(instance, &partition, &ctx, &decomposition, t, agent_ids, item_ids, depth, call);
            }
        }
        Err(Error::Contract(format!(
            "iteration t={n} ended with {} agents in the decomposition",
            decomposition.num_agents()
        )))
    }

    /// Gives S_t to the divider and recurses on every sub-problem of the
    /// decomposition and on the right-hand remainder.
    #[allow(clippy::too_many_arguments)]
    fn conquer(
        &mut self,
        instance: &Instance,
        partition: &Partition,
        ctx: &LevelContext<'_>,
        decomposition: &Decomposition,
        t: usize,
        agent_ids: &[usize],
        item_ids: &[usize],
        depth: usize,
        call: usize,
    ) -> Result<Vec<Vec<usize>>> {
        let n = instance.num_agents();
        let mut bundles = vec![Vec::new(); n];
        let divider = partition.divider;
        bundles[divider] = partition.items_of(&[t - 1]);
        self.emit(depth, call, || TraceEvent::AssignDivider {
            t,
            agent: agent_ids[divider],
            items: bundles[divider].iter().map(|&j| item_ids[j]).collect(),
        });

        let mut parts: Vec<(RecurseSide, Vec<usize>, Vec<usize>)> = decomposition
            .sub_problems
            .iter()
            .map(|sub| (RecurseSide::Left, sub.agents.clone(), partition.items_of(&sub.bundles)))
            .collect();
        let right_agents = ctx.outside_agents(decomposition);
        let right_bundles: Vec<usize> = (t..n).collect();
        if right_agents.is_empty() {
            let stranded = partition.items_of(&right_bundles);
            if !stranded.is_empty() {
                return Err(Error::Contract(format!("items {stranded:?} right of S_{t} have no agents")));
            }
        } else {
            parts.push((RecurseSide::Right, right_agents, partition.items_of(&right_bundles)));
        }

        for (side, agents, items) in parts {
            let sub_agent_ids: Vec<usize> = agents.iter().map(|&a| agent_ids[a]).collect();
            let sub_item_ids: Vec<usize> = items.iter().map(|&j| item_ids[j]).collect();
            self.emit(depth, call, || TraceEvent::Recurse {
                side,
                agents: sub_agent_ids.clone(),
                items: sub_item_ids.clone(),
            });
            let sub = instance.restrict(&agents, &items)?;
            let inner = self.solve_level(&sub, &sub_agent_ids, &sub_item_ids, depth + 1)?;
            for (local, got) in inner.into_iter().enumerate() {
                bundles[agents[local]].extend(got.into_iter().map(|j| items[j]));
            }
        }

        if self.options.check_invariants {
            let separated = verifier::check_divider_guarantee(instance, partition, t, &Allocation::new(bundles.clone()))?;
            self.check(separated, || format!("an agent mixes items from both sides of S_{t}"))?;
        }
        Ok(bundles)
    }
}

fn update_event(t: usize, update: &super::update::Update, agent_ids: &[usize]) -> TraceEvent {
    TraceEvent::Update {
        t,
        case: update.case.number(),
        outcome: update.outcome,
        outside_agent: agent_ids[update.outside_agent],
        path: update.path.iter().map(ToString::to_string).collect(),
        moves: update
            .moves
            .iter()
            .map(|mv| TraceMove {
                agent: agent_ids[mv.agent],
                from: mv.from.to_string(),
                to: mv.to.to_string(),
            })
            .collect(),
        released: update.released.map(|a| agent_ids[a]),
        decomposition: update
            .decomposition
            .sub_problems
            .iter()
            .map(|sub| TraceSubProblem {
                bundles: sub.bundles.clone(),
                agents: sub.agents.iter().map(|&a| agent_ids[a]).collect(),
            })
            .collect(),
    }
}

/// Computes a PROPm allocation with default options.
pub fn solve(instance: &Instance) -> Result<Allocation> {
    Solver::new(SolveOptions::default()).solve(instance)
}
