use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use propm::engine::{preprocess_large_items, Outcome, TraceEvent, TraceRecord};
use propm::model::avg_share_compare;
use propm::oracle::{brute_force_propm, random_instance, DEFAULT_BUDGET};
use propm::verifier::{is_proportional_decomposition, is_proportional_subproblem, verify_allocation};
use propm::{Decomposition, Instance, Partition, SolveOptions, SolveStats, Solver, SubProblem};

const SUITE_SIZE: u64 = 10_000;
const SUITE_LIMIT: Duration = Duration::from_secs(60);
const ORACLE_SIZE: u64 = 500;
const ORACLE_LIMIT: Duration = Duration::from_secs(120);
const MEDIUM_LIMIT: Duration = Duration::from_secs(5);
const LARGE_LIMIT: Duration = Duration::from_secs(30);
const MEMORY_LIMIT_KB: u64 = 1 << 20;
const PREPROCESS_SIZE: usize = 200;

struct Outcomes {
    failed: Vec<&'static str>,
}

impl Outcomes {
    fn report(&mut self, id: &'static str, name: &str, pass: bool, detail: String) {
        println!("[{}] {id} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

fn suite_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(n..=20);
    random_instance(seed, n, m, 100).unwrap()
}

fn suite() -> Vec<Instance> {
    (0..SUITE_SIZE).map(suite_instance).collect()
}

fn has_oversized_pair(inst: &Instance) -> bool {
    let n = inst.num_agents();
    (0..n).any(|a| (0..inst.num_items()).any(|j| avg_share_compare(inst.value(a, j), 1, inst.total(a), n, true).unwrap()))
}

fn universal_correctness(out: &mut Outcomes, instances: &[Instance]) {
    let start = Instant::now();
    let mut failures = 0;
    for inst in instances {
        let ok = propm::solve(inst)
            .and_then(|alloc| verify_allocation(inst, &alloc))
            .map(|v| v.propm)
            .unwrap_or(false);
        failures += usize::from(!ok);
    }
    let elapsed = start.elapsed();
    out.report(
        "AC1",
        "universal correctness",
        failures == 0 && elapsed < SUITE_LIMIT,
        format!("{} instances, {failures} failures, {elapsed:.2?} (limit {SUITE_LIMIT:?})", instances.len()),
    );
}

fn oracle_agreement(out: &mut Outcomes) {
    let start = Instant::now();
    let mut missing_witness = 0;
    let mut failures = 0;
    for seed in 0..ORACLE_SIZE {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0AC2);
        let m = rng.gen_range(0..=8);
        let inst = random_instance(seed ^ 0x0AC2, 3, m, 4).unwrap();
        match brute_force_propm(&inst, DEFAULT_BUDGET) {
            Ok(Some(w)) if verify_allocation(&inst, &w).unwrap().propm => {}
            _ => missing_witness += 1,
        }
        let ok = propm::solve(&inst)
            .and_then(|alloc| verify_allocation(&inst, &alloc))
            .map(|v| v.propm)
            .unwrap_or(false);
        failures += usize::from(!ok);
    }
    let elapsed = start.elapsed();
    out.report(
        "AC2",
        "oracle agreement",
        missing_witness == 0 && failures == 0 && elapsed < ORACLE_LIMIT,
        format!(
            "{ORACLE_SIZE} instances, {missing_witness} without witness, {failures} solver failures, {elapsed:.2?} (limit {ORACLE_LIMIT:?})"
        ),
    );
}

fn walkthroughs() -> [(Instance, Vec<Vec<usize>>); 3] {
    let ones = vec![1; 6];
    let inst = |a: [u64; 6], b: [u64; 6]| Instance::from_rows(vec![ones.clone(), a.to_vec(), b.to_vec()]).unwrap();
    [
        (inst([3, 3, 0, 0, 0, 0], [0, 0, 0, 0, 3, 3]), vec![vec![2, 3], vec![0, 1], vec![4, 5]]),
        (inst([3, 0, 1, 0, 1, 1], [3, 2, 1, 0, 0, 0]), vec![vec![2, 3], vec![4, 5], vec![0, 1]]),
        (inst([2, 2, 1, 0, 1, 0], [2, 2, 0, 1, 1, 0]), vec![vec![4, 5], vec![2, 3], vec![0, 1]]),
    ]
}

fn case_coverage(out: &mut Outcomes, instances: &[Instance]) {
    let mut stats = SolveStats::default();
    for inst in instances {
        let mut solver = Solver::new(SolveOptions::default());
        if solver.solve(inst).is_ok() {
            stats.merge(solver.stats());
        }
    }
    let covered = stats.cases.iter().all(|&c| c >= 1);

    let main_loop_only = SolveOptions {
        check_invariants: true,
        preprocess: false,
    };
    let mut reproduced = 0;
    let mut notes = Vec::new();
    for (idx, (inst, expected)) in walkthroughs().iter().enumerate() {
        let first = Solver::new(main_loop_only).solve(inst).map(|a| a.bundles);
        let second = Solver::new(main_loop_only).solve(inst).map(|a| a.bundles);
        if first.as_ref().ok() == Some(expected) && second.as_ref().ok() == Some(expected) {
            reproduced += 1;
        }
        let default = Solver::new(SolveOptions::checked()).solve(inst).unwrap();
        let default_ok = verify_allocation(inst, &default).unwrap().propm;
        notes.push(format!("case-{} default {:?} propm={default_ok}", idx + 1, default.bundles));
        if !default_ok {
            reproduced = 0;
        }
    }
    out.report(
        "AC3",
        "case coverage",
        covered && reproduced == 3,
        format!(
            "cases fired {:?}, walkthroughs reproduced {reproduced}/3 without preprocessing; {}",
            stats.cases,
            notes.join("; ")
        ),
    );
}

fn invariant_instrumentation(out: &mut Outcomes, instances: &[Instance]) {
    let mut stats = SolveStats::default();
    let mut violations = Vec::new();
    for (seed, inst) in instances.iter().enumerate() {
        let mut solver = Solver::new(SolveOptions::checked());
        match solver.solve(inst) {
            Ok(_) => stats.merge(solver.stats()),
            Err(e) => violations.push(format!("seed {seed}: {e}")),
        }
    }
    out.report(
        "AC4",
        "invariant instrumentation",
        violations.is_empty() && stats.checks > 0,
        format!(
            "{} checks over {} partitions and {} updates, max {} updates per iteration, {} violations{}",
            stats.checks,
            stats.partitions,
            stats.updates(),
            stats.max_updates_per_iteration,
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    );
}

/// Level state rebuilt from trace records alone.
#[derive(Default)]
struct Level {
    agents: BTreeSet<usize>,
    items: BTreeSet<usize>,
    divider: usize,
    bundles: Vec<Vec<usize>>,
    totals: HashMap<usize, u64>,
    members: BTreeSet<usize>,
    c: usize,
}

impl Level {
    fn left_preferrers(&self, inst: &Instance, t: usize) -> usize {
        let n = self.agents.len() as u128;
        let left: Vec<usize> = self.bundles[..t].concat();
        self.agents
            .iter()
            .filter(|&&a| a != self.divider && !self.members.contains(&a))
            .filter(|&&a| {
                let v: u64 = left.iter().map(|&j| inst.value(a, j)).sum();
                u128::from(v) * n > t as u128 * u128::from(self.totals[&a])
            })
            .count()
    }
}

#[derive(Default)]
struct ProgressTally {
    updates: usize,
    grew: usize,
    grew_also_lowered_c: usize,
    swapped: usize,
    iterations: usize,
    violations: Vec<String>,
}

fn replay(inst: &Instance, records: &[TraceRecord], tally: &mut ProgressTally) {
    let mut scopes = vec![((0..inst.num_agents()).collect(), (0..inst.num_items()).collect())];
    let mut levels: HashMap<usize, Level> = HashMap::new();
    for rec in records {
        let level = levels.entry(rec.call).or_insert_with(|| {
            let (agents, items): (BTreeSet<usize>, BTreeSet<usize>) = scopes[rec.call].clone();
            Level {
                agents,
                items,
                ..Level::default()
            }
        });
        match &rec.event {
            TraceEvent::Preassign { agent, item } => {
                level.agents.remove(agent);
                level.items.remove(item);
            }
            TraceEvent::Partition { divider, bundles } => {
                level.divider = *divider;
                level.bundles = bundles.clone();
                let covered: BTreeSet<usize> = bundles.concat().into_iter().collect();
                if covered != level.items {
                    tally.violations.push(format!("call {}: partition does not cover the level", rec.call));
                }
                level.totals = level
                    .agents
                    .iter()
                    .map(|&a| (a, level.items.iter().map(|&j| inst.value(a, j)).sum()))
                    .collect();
            }
            TraceEvent::Iteration { t, c, .. } => {
                tally.iterations += 1;
                let recount = level.left_preferrers(inst, *t);
                if recount != *c {
                    tally.violations.push(format!("call {} t={t}: reported c={c}, recount {recount}", rec.call));
                }
                level.c = recount;
            }
            TraceEvent::Update {
                t,
                outcome,
                decomposition,
                ..
            } => {
                tally.updates += 1;
                let before = level.members.len();
                let c_before = level.c;
                level.members = decomposition.iter().flat_map(|s| s.agents.iter().copied()).collect();
                level.c = level.left_preferrers(inst, *t);
                let added = level.members.len() == before + 1;
                let same = level.members.len() == before;
                let lowered = level.c + 1 == c_before;
                match outcome {
                    Outcome::Grew if added => {
                        tally.grew += 1;
                        tally.grew_also_lowered_c += usize::from(lowered);
                    }
                    Outcome::Swapped if same && lowered => tally.swapped += 1,
                    _ => tally.violations.push(format!(
                        "call {} t={t}: {outcome:?} moved agents {before}->{} and c {c_before}->{}",
                        rec.call,
                        level.members.len(),
                        level.c
                    )),
                }
            }
            TraceEvent::Recurse { agents, items, .. } => {
                scopes.push((agents.iter().copied().collect(), items.iter().copied().collect()));
            }
            TraceEvent::AssignDivider { .. } => {}
        }
    }
}

fn progress_contract(out: &mut Outcomes, instances: &[Instance]) {
    let mut tally = ProgressTally::default();
    for inst in instances {
        let mut records = Vec::new();
        let solved = Solver::new(SolveOptions::default())
            .with_trace(|r| records.push(r.clone()))
            .solve(inst);
        if let Err(e) = solved {
            tally.violations.push(format!("solve failed: {e}"));
            continue;
        }
        replay(inst, &records, &mut tally);
    }
    out.report(
        "AC5",
        "progress contract",
        tally.violations.is_empty() && tally.updates == tally.grew + tally.swapped,
        format!(
            "{} updates replayed from traces over {} iterations: {} grew D by one agent ({} of these also lowered c), \
             {} kept D's size and lowered c by one, {} violations{}",
            tally.updates,
            tally.iterations,
            tally.grew,
            tally.grew_also_lowered_c,
            tally.swapped,
            tally.violations.len(),
            tally.violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    );
}

fn peak_memory_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn timed_solve(seed: u64, n: usize, m: usize) -> (Duration, bool) {
    let inst = random_instance(seed, n, m, 1_000_000).unwrap();
    let start = Instant::now();
    let alloc = propm::solve(&inst);
    let elapsed = start.elapsed();
    let ok = alloc.map(|a| verify_allocation(&inst, &a).unwrap().propm).unwrap_or(false);
    (elapsed, ok)
}

fn polynomial_smoke(out: &mut Outcomes) {
    let (medium, medium_ok) = timed_solve(0x0AC6, 50, 1000);
    let (large, large_ok) = timed_solve(0x0AC6 + 1, 100, 2000);
    let peak = peak_memory_kb();
    let memory_ok = peak.is_some_and(|kb| kb < MEMORY_LIMIT_KB);
    out.report(
        "AC6",
        "polynomial-time smoke",
        medium_ok && large_ok && medium < MEDIUM_LIMIT && large < LARGE_LIMIT && memory_ok,
        format!(
            "n=50 m=1000 {medium:.2?} (limit {MEDIUM_LIMIT:?}, propm={medium_ok}); \
             n=100 m=2000 {large:.2?} (limit {LARGE_LIMIT:?}, propm={large_ok}); peak RSS {} KiB (limit {MEMORY_LIMIT_KB} KiB)",
            peak.map_or("unknown".to_string(), |kb| kb.to_string())
        ),
    );
}

fn five_bundle_example(out: &mut Outcomes) {
    let mut rows = vec![vec![60, 45, 45, 45, 45]; 3];
    rows.extend(std::iter::repeat_n(vec![40, 40, 40, 36, 84], 2));
    let inst = Instance::from_rows(rows).unwrap();
    let n = inst.num_agents() as u64;
    let partition = Partition {
        divider: 0,
        bundles: (0..5).map(|b| vec![b]).collect(),
    };
    let subs = [SubProblem::new(vec![0, 1, 2], vec![0, 1, 2]), SubProblem::new(vec![3, 4], vec![3, 4])];
    let expected = [(750, 720), (600, 480)];

    let mut ok = true;
    let mut comparisons = Vec::new();
    for (sub, &(lhs_expected, rhs_expected)) in subs.iter().zip(&expected) {
        ok &= is_proportional_subproblem(&inst, &partition, sub).unwrap();
        for &a in &sub.agents {
            let v: u64 = sub.bundles.iter().map(|&b| inst.value(a, b)).sum();
            let (lhs, rhs) = (v * n, sub.bundles.len() as u64 * inst.total(a));
            ok &= lhs == lhs_expected && rhs == rhs_expected && lhs >= rhs;
            comparisons.push(format!("agent {a}: {lhs} >= {rhs}"));
        }
    }
    ok &= is_proportional_decomposition(&inst, &partition, &Decomposition::new(subs.to_vec())).unwrap();
    out.report("AC7", "five-bundle example", ok, comparisons.join(", "));
}

fn preprocessing_correctness(out: &mut Outcomes) {
    let mut checked = 0;
    let mut seed = 0u64;
    let mut failures = Vec::new();
    let mut preassigned = 0;
    while checked < PREPROCESS_SIZE {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0AC8);
        let n = rng.gen_range(2..=8);
        let m = rng.gen_range(n..=20);
        let inst = random_instance(seed ^ 0x0AC8, n, m, 100).unwrap();
        seed += 1;
        if !has_oversized_pair(&inst) {
            continue;
        }
        checked += 1;
        let pre = preprocess_large_items(&inst).unwrap();
        preassigned += pre.assignments.len();
        if has_oversized_pair(&pre.reduced) {
            failures.push(format!("seed {}: reduced instance keeps an oversized pair", seed - 1));
        }
        let alloc = propm::solve(&inst).unwrap();
        let verdict = verify_allocation(&inst, &alloc).unwrap();
        if !verdict.propm {
            failures.push(format!("seed {}: allocation is not PROPm", seed - 1));
        }
        for &(agent, item) in &pre.assignments {
            if !verdict.reports[agent].satisfied || !alloc.bundles[agent].contains(&item) {
                failures.push(format!("seed {}: preassigned agent {agent} lost item {item}", seed - 1));
            }
        }
    }
    out.report(
        "AC8",
        "preprocessing correctness",
        failures.is_empty(),
        format!(
            "{checked} instances with an oversized pair ({seed} drawn), {preassigned} top-level preassignments, {} failures{}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    );
}

fn main() {
    let instances = suite();
    let mut out = Outcomes { failed: Vec::new() };
    universal_correctness(&mut out, &instances);
    oracle_agreement(&mut out);
    case_coverage(&mut out, &instances);
    invariant_instrumentation(&mut out, &instances);
    progress_contract(&mut out, &instances);
    polynomial_smoke(&mut out);
    five_bundle_example(&mut out);
    preprocessing_correctness(&mut out);
    if out.failed.is_empty() {
        println!("acceptance: all 8 criteria passed");
    } else {
        println!("acceptance: failed {}", out.failed.join(", "));
        std::process::exit(1);
    }
}
