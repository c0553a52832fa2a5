//! Checks shared by the unfolding property tests and the acceptance harness. Each
//! returns human-readable violations; empty means the property held.

use interfold::domains::{AbsElement, AnalysisInstance, IntervalInstance, Lattice};
use interfold::indep::{build_independence, validate_weak, IndepRelation, Mode};
use interfold::lang::{parse_program, Program};
use interfold::oracle::{configurations_with_run, enumerate_reach_abstract, enumerate_runs, representative_config};
use interfold::unfolder::{unfold, Collapser, UnfoldOptions, UnfoldResult};

pub const CONFIG_CAP: usize = 20_000;

/// A generated program with its plain unfolding under a weak relation
/// validated against the whole (finite) abstract reach.
pub struct Validated {
    pub seed: u64,
    pub program: Program<i64>,
    pub inst: IntervalInstance<i64>,
    pub r: IndepRelation,
    pub reach: Vec<AbsElement<i64>>,
    pub result: UnfoldResult<AbsElement<i64>>,
}

pub fn validated(seed: u64) -> Option<Validated> {
    let program: Program<i64> = parse_program(&super::random_program(seed)).ok()?;
    let inst = IntervalInstance::new(&program);
    let syntactic = build_independence(&program, Mode::Heap);
    let reach = {
        let cx = Collapser::new(&inst, &syntactic, false, 15);
        enumerate_reach_abstract(&cx, 64, 5000).ok()?
    };
    let r = validate_weak(&inst, &syntactic, &reach);
    let opts = UnfoldOptions { event_cap: 150, ..UnfoldOptions::plain() };
    let result = unfold(&inst, &r, &opts).ok()?;
    if !result.is_complete() || result.pes.configurations(CONFIG_CAP).is_err() {
        return None;
    }
    Some(Validated { seed, program, inst, r, reach, result })
}

/// The first `n` seeds whose programs fit the desk-scale budget.
pub fn validated_programs(n: usize) -> Vec<Validated> {
    (0u64..).filter_map(validated).filter(|v| v.result.pes.len() >= 4).take(n).collect()
}

fn run(inst: &IntervalInstance<i64>, seq: &[usize]) -> AbsElement<i64> {
    seq.iter().fold(inst.initial(), |d, &f| inst.apply(f, &d))
}

/// Every interleaving of every configuration with at most `max_size`
/// events reaches the same state; local configurations are feasible.
pub fn interleavings_agree(v: &Validated, max_size: usize) -> (usize, Vec<String>) {
    let pes = &v.result.pes;
    let mut bad = Vec::new();
    let mut checked = 0;
    for c in pes.configurations(CONFIG_CAP).unwrap() {
        if c.len() > max_size {
            continue;
        }
        checked += 1;
        let inter = pes.interleavings(&c, 10_000).unwrap();
        let mut states = inter.iter().map(|s| run(&v.inst, s));
        let first = states.next().unwrap();
        if states.any(|s| s != first) {
            bad.push(format!("seed {}: interleavings of {c} disagree", v.seed));
        }
    }
    for e in pes.events() {
        let s = run(&v.inst, &pes.interleavings(pes.local_config(e.id), 10_000).unwrap().into_iter().next().unwrap());
        if s.is_bottom() {
            bad.push(format!("seed {}: [e{}] is infeasible", v.seed, e.id));
        }
        if s != e.state {
            bad.push(format!("seed {}: cached state of e{} differs", v.seed, e.id));
        }
    }
    (checked, bad)
}

/// Every non-⊥ run up to `depth` has exactly one configuration with that
/// run among its interleavings, and the push-back construction finds it.
pub fn unique_representatives(v: &Validated, depth: usize) -> (usize, Vec<String>) {
    let cx = Collapser::new(&v.inst, &v.r, false, 15);
    let runs = enumerate_runs(&cx, depth, 200_000).unwrap();
    let mut bad = Vec::new();
    for run in &runs {
        let reps = configurations_with_run(&v.result.pes, run, CONFIG_CAP).unwrap();
        match representative_config(&v.result.pes, &v.r, run) {
            Ok(c) if reps == vec![c.clone()] => {}
            Ok(c) => bad.push(format!("seed {}: run {run:?} -> {c}, scan found {}", v.seed, reps.len())),
            Err(e) => bad.push(format!("seed {}: {e}", v.seed)),
        }
    }
    (runs.len(), bad)
}
