//! Brute-force ground truth at desk scale: concrete reachability, abstract
//! run enumeration, and executable checks of the unfolding's guarantees.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::{self, Write};

use thiserror::Error;

use crate::domains::{AbsElement, AnalysisInstance, IntervalInstance, Lattice, TransformerId};
use crate::indep::IndepRelation;
use crate::lang::{concrete_step, enabled, initial_state, is_enabled, AssertId, ConcreteState, EdgeId, Program, StepError};
use crate::pes::{Configuration, Pes, PesError};
use crate::unfolder::{mkevent, Collapser, StateMode, UnfoldResult};
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("more than {0} elements")]
    CapExceeded(usize),
    #[error(transparent)]
    Pes(#[from] PesError),
    #[error("no configuration represents the run {0:?}")]
    NoRepresentative(Vec<TransformerId>),
}

/// Exhaustive concrete reachability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachReport<T> {
    pub states: BTreeSet<ConcreteState<T>>,
    /// First violation found per assertion, with the edge sequence leading to it
    /// (the last edge is the failing assertion).
    pub violations: BTreeMap<AssertId, Vec<EdgeId>>,
    /// Set when the state cap was hit or arithmetic overflowed; `states` is then
    /// only a subset of the reachable states.
    pub truncated: bool,
    pub overflow: bool,
}

impl<T: Scalar> ReachReport<T> {
    pub fn is_exact(&self) -> bool {
        !self.truncated
    }
}

/// Breadth-first search of the interleaving semantics.
pub fn enumerate_reach_concrete<T: Scalar>(p: &Program<T>, max_states: usize) -> ReachReport<T> {
    let s0 = initial_state(p);
    let mut parent: HashMap<ConcreteState<T>, (ConcreteState<T>, EdgeId)> = HashMap::new();
    let mut states = BTreeSet::from([s0.clone()]);
    let mut queue = VecDeque::from([s0.clone()]);
    let mut violations = BTreeMap::new();
    let mut truncated = false;
    let mut overflow = false;
    let path_to = |parent: &HashMap<ConcreteState<T>, (ConcreteState<T>, EdgeId)>, s: &ConcreteState<T>| {
        let mut path = Vec::new();
        let mut cur = s.clone();
        while let Some((prev, e)) = parent.get(&cur) {
            path.push(*e);
            cur = prev.clone();
        }
        path.reverse();
        path
    };
    'bfs: while let Some(s) = queue.pop_front() {
        let en = match enabled(p, &s) {
            Ok(en) => en,
            Err(_) => {
                overflow = true;
                truncated = true;
                continue;
            }
        };
        for e in en {
            let step = match concrete_step(p, &s, e) {
                Ok(st) => st,
                Err(StepError::Overflow(_)) => {
                    overflow = true;
                    truncated = true;
                    continue;
                }
                Err(StepError::NotEnabled(_)) => unreachable!("edge came from enabled()"),
            };
            if let Some(a) = step.violated {
                violations.entry(a).or_insert_with(|| {
                    let mut w = path_to(&parent, &s);
                    w.push(e);
                    w
                });
            }
            for n in step.successors {
                if states.contains(&n) {
                    continue;
                }
                if states.len() >= max_states {
                    truncated = true;
                    break 'bfs;
                }
                states.insert(n.clone());
                parent.insert(n.clone(), (s.clone(), e));
                queue.push_back(n);
            }
        }
    }
    ReachReport {
        states,
        violations,
        truncated,
        overflow,
    }
}

/// Non-⊥ elements reachable by at most `depth` collapsed transformers, in
/// breadth-first order.
pub fn enumerate_reach_abstract<I: AnalysisInstance>(
    cx: &Collapser<'_, I>,
    depth: usize,
    cap: usize,
) -> Result<Vec<I::Elem>, OracleError> {
    let labels = cx.all_labels();
    let d0 = cx.instance().initial();
    let mut seen = HashSet::from([d0.clone()]);
    let mut out = vec![d0.clone()];
    let mut frontier = vec![d0];
    for _ in 0..depth {
        let mut next = Vec::new();
        for d in &frontier {
            for &f in &labels {
                let img = cx.collapsed_apply(f, d);
                if img.is_bottom() || seen.contains(&img) {
                    continue;
                }
                if out.len() >= cap {
                    return Err(OracleError::CapExceeded(cap));
                }
                seen.insert(img.clone());
                out.push(img.clone());
                next.push(img);
            }
        }
        frontier = next;
    }
    Ok(out)
}

/// Non-⊥ label sequences of length `1..=depth` (prefix-closed).
pub fn enumerate_runs<I: AnalysisInstance>(
    cx: &Collapser<'_, I>,
    depth: usize,
    cap: usize,
) -> Result<Vec<Vec<TransformerId>>, OracleError> {
    let labels = cx.all_labels();
    let mut out = Vec::new();
    let mut frontier = vec![(Vec::new(), cx.instance().initial())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (seq, d) in &frontier {
            for &f in &labels {
                let img = cx.collapsed_apply(f, d);
                if img.is_bottom() {
                    continue;
                }
                if out.len() >= cap {
                    return Err(OracleError::CapExceeded(cap));
                }
                let mut s = seq.clone();
                s.push(f);
                out.push(s.clone());
                next.push((s, img));
            }
        }
        frontier = next;
    }
    Ok(out)
}

/// States of every configuration of `pes`.
pub fn configuration_states<I: AnalysisInstance>(
    cx: &Collapser<'_, I>,
    pes: &Pes<I::Elem>,
    cap: usize,
) -> Result<Vec<(Configuration, I::Elem)>, OracleError> {
    let mut out = Vec::new();
    for c in pes.configurations(cap)? {
        let s = cx.state_of(pes, &c, StateMode::SingleSort, cap)?;
        out.push((c, s));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletenessReport<E> {
    pub checked: usize,
    pub configurations: usize,
    pub uncovered: Vec<E>,
}

impl<E> CompletenessReport<E> {
    pub fn is_complete(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// For each element, looks for a configuration whose state is above it.
pub fn check_d_complete<I: AnalysisInstance>(
    cx: &Collapser<'_, I>,
    result: &UnfoldResult<I::Elem>,
    elems: &[I::Elem],
    cap: usize,
) -> Result<CompletenessReport<I::Elem>, OracleError> {
    let states = configuration_states(cx, &result.pes, cap)?;
    let uncovered = elems
        .iter()
        .filter(|d| !states.iter().any(|(_, s)| d.leq(s)))
        .cloned()
        .collect();
    Ok(CompletenessReport {
        checked: elems.len(),
        configurations: states.len(),
        uncovered,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoundnessReport<T> {
    pub states_checked: usize,
    pub configurations: usize,
    pub uncovered: Vec<ConcreteState<T>>,
    /// Concretely violated assertions missing from the warnings.
    pub missed_warnings: BTreeSet<AssertId>,
}

impl<T> SoundnessReport<T> {
    pub fn is_sound(&self) -> bool {
        self.uncovered.is_empty() && self.missed_warnings.is_empty()
    }
}

/// Every concrete reachable state must lie in the thread-local closure of
/// some configuration state, and every violated assertion must be warned about.
pub fn check_sound_cover<T: Scalar>(
    cx: &Collapser<'_, IntervalInstance<T>>,
    result: &UnfoldResult<AbsElement<T>>,
    rr: &ReachReport<T>,
    cap: usize,
) -> Result<SoundnessReport<T>, OracleError> {
    let n = cx.instance().num_threads();
    let covers: Vec<AbsElement<T>> = configuration_states(cx, &result.pes, cap)?
        .into_iter()
        .map(|(_, s)| (0..n).fold(s, |acc, i| cx.tla(i, &acc).element.clone()))
        .collect();
    let uncovered = rr
        .states
        .iter()
        .filter(|s| !covers.iter().any(|c| c.contains(s)))
        .cloned()
        .collect();
    let missed_warnings = rr
        .violations
        .keys()
        .filter(|a| !result.warnings.contains(a))
        .copied()
        .collect();
    Ok(SoundnessReport {
        states_checked: rr.states.len(),
        configurations: covers.len(),
        uncovered,
        missed_warnings,
    })
}

/// The configuration obtained by pushing each transformer of `run` back
/// to its canonical history.
pub fn representative_config<E: Clone>(
    pes: &Pes<E>,
    r: &IndepRelation,
    run: &[TransformerId],
) -> Result<Configuration, OracleError> {
    let mut c = Configuration::empty();
    for &f in run {
        let h = mkevent(pes, r, f, &c);
        let e = pes
            .find(f, &h)
            .ok_or_else(|| OracleError::NoRepresentative(run.to_vec()))?;
        let next = c.with(e);
        if next.len() == c.len() || !pes.is_configuration(&next)? {
            return Err(OracleError::NoRepresentative(run.to_vec()));
        }
        c = next;
    }
    Ok(c)
}

/// Whether `run` is an interleaving of `c`. Two events of one configuration
/// with the same label are causally ordered, so a greedy match is exact.
pub fn is_interleaving_of<E: Clone>(pes: &Pes<E>, c: &Configuration, run: &[TransformerId]) -> bool {
    if c.len() != run.len() {
        return false;
    }
    let mut used = BTreeSet::new();
    for &f in run {
        let next = c.iter().find(|&e| {
            !used.contains(&e) && pes.event(e).label == f && pes.event(e).causes.iter().all(|x| used.contains(x))
        });
        match next {
            Some(e) => {
                used.insert(e);
            }
            None => return false,
        }
    }
    true
}

/// Configurations of `pes` having `run` among their interleavings.
pub fn configurations_with_run<E: Clone>(
    pes: &Pes<E>,
    run: &[TransformerId],
    cap: usize,
) -> Result<Vec<Configuration>, OracleError> {
    Ok(pes
        .configurations(cap)?
        .into_iter()
        .filter(|c| is_interleaving_of(pes, c, run))
        .collect())
}

/// A related pair of statements failing one of the two commutation clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatementViolation<T> {
    pub a: EdgeId,
    pub b: EdgeId,
    pub state: ConcreteState<T>,
    pub clause: CommutationClause,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommutationClause {
    /// Firing one changes whether the other is enabled.
    Enabledness,
    /// The two orders reach different state sets.
    Diamond,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutationReport<T> {
    pub pairs: usize,
    pub states: usize,
    pub violations: Vec<StatementViolation<T>>,
}

impl<T> CommutationReport<T> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn successors<T: Scalar>(p: &Program<T>, states: &[ConcreteState<T>], e: EdgeId) -> BTreeSet<ConcreteState<T>> {
    let mut out = BTreeSet::new();
    for s in states {
        if is_enabled(p, s, &p.edges[e]).unwrap_or(false) {
            if let Ok(st) = concrete_step(p, s, e) {
                out.extend(st.successors);
            }
        }
    }
    out
}

/// Checks both commutation clauses of every related pair at every state of `rr`.
pub fn check_statement_commutation<T: Scalar>(
    p: &Program<T>,
    r: &IndepRelation,
    rr: &ReachReport<T>,
) -> CommutationReport<T> {
    let mut violations = Vec::new();
    let pairs = r.pairs();
    for &(x, y) in &pairs {
        for s in &rr.states {
            let en = |st: &ConcreteState<T>, e: EdgeId| is_enabled(p, st, &p.edges[e]).unwrap_or(false);
            let mut bad = None;
            for (a, b) in [(x, y), (y, x)] {
                if !en(s, a) {
                    continue;
                }
                let b_here = en(s, b);
                let after_a: Vec<_> = successors(p, std::slice::from_ref(s), a).into_iter().collect();
                if after_a.iter().any(|s2| en(s2, b) != b_here) {
                    bad = Some(CommutationClause::Enabledness);
                    break;
                }
            }
            if bad.is_none() && en(s, x) && en(s, y) {
                let xy = successors(p, &successors(p, std::slice::from_ref(s), x).into_iter().collect::<Vec<_>>(), y);
                let yx = successors(p, &successors(p, std::slice::from_ref(s), y).into_iter().collect::<Vec<_>>(), x);
                if xy != yx {
                    bad = Some(CommutationClause::Diamond);
                }
            }
            if let Some(clause) = bad {
                violations.push(StatementViolation {
                    a: x,
                    b: y,
                    state: s.clone(),
                    clause,
                });
            }
        }
    }
    CommutationReport {
        pairs: pairs.len(),
        states: rr.states.len(),
        violations,
    }
}

/// Flat `key=value` lines, one record per line.
pub trait MachineReport {
    fn machine(&self) -> String;
}

impl<T: Scalar> MachineReport for ReachReport<T> {
    fn machine(&self) -> String {
        let mut out = format!(
            "reach.states={}\nreach.truncated={}\nreach.overflow={}\n",
            self.states.len(),
            self.truncated,
            self.overflow
        );
        for (a, w) in &self.violations {
            let _ = writeln!(out, "reach.violation={a} witness_len={}", w.len());
        }
        out
    }
}

impl<T: Scalar> MachineReport for SoundnessReport<T> {
    fn machine(&self) -> String {
        format!(
            "sound.states={}\nsound.configurations={}\nsound.uncovered={}\nsound.missed_warnings={}\n",
            self.states_checked,
            self.configurations,
            self.uncovered.len(),
            self.missed_warnings.len()
        )
    }
}

impl<E> MachineReport for CompletenessReport<E> {
    fn machine(&self) -> String {
        format!(
            "complete.elements={}\ncomplete.configurations={}\ncomplete.uncovered={}\n",
            self.checked,
            self.configurations,
            self.uncovered.len()
        )
    }
}

impl<T: Scalar> fmt::Display for ReachReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} reachable states{}",
            self.states.len(),
            if self.truncated { " (truncated)" } else { "" }
        )?;
        for (a, w) in &self.violations {
            write!(f, "\n  {a} violated after {} steps: {w:?}", w.len())?;
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Display for SoundnessReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} concrete states against {} configurations: {} uncovered, {} missed warnings",
            self.states_checked,
            self.configurations,
            self.uncovered.len(),
            self.missed_warnings.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indep::{build_independence, Mode};
    use crate::lang::parse_program;
    use crate::unfolder::{unfold, UnfoldOptions};

    #[test]
    fn straight_line_reach() {
        let p: Program<i64> = parse_program("global g = 0; thread { g = 1; g = 2; }").unwrap();
        let rr = enumerate_reach_concrete(&p, 100);
        assert_eq!(rr.states.len(), 3);
        assert!(rr.violations.is_empty() && rr.is_exact());
    }

    #[test]
    fn violation_with_witness() {
        let p: Program<i64> =
            parse_program("global g = 0; thread { g = g + 2; } thread { g = g + 1; assert(g <= 1); }").unwrap();
        let rr = enumerate_reach_concrete(&p, 100);
        let w = &rr.violations[&AssertId(0)];
        assert_eq!(w.len(), 3);
        assert_eq!(*w.last().unwrap(), 2);
    }

    #[test]
    fn truncation() {
        let p: Program<i64> = parse_program("global g = 0; thread { while (true) { g = g + 1; } }").unwrap();
        let rr = enumerate_reach_concrete(&p, 50);
        assert!(rr.truncated);
        assert_eq!(rr.states.len(), 50);
    }

    #[test]
    fn abstract_reach_depth_zero_is_initial() {
        let p: Program<i64> = parse_program("global g = 0; thread { g = 1; }").unwrap();
        let inst = IntervalInstance::new(&p);
        let r = build_independence(&p, Mode::Heap);
        let cx = Collapser::new(&inst, &r, false, 15);
        assert_eq!(enumerate_reach_abstract(&cx, 0, 10).unwrap(), vec![inst.initial()]);
        let one = enumerate_reach_abstract(&cx, 1, 10).unwrap();
        assert_eq!(one[1], inst.apply(0, &inst.initial()));
    }

    #[test]
    fn swapped_independent_runs_share_a_representative() {
        let p: Program<i64> = parse_program("global x = 0; global y = 0; thread { x = 1; } thread { y = 1; }").unwrap();
        let inst = IntervalInstance::new(&p);
        let r = build_independence(&p, Mode::Heap);
        let res = unfold(&inst, &r, &UnfoldOptions::plain()).unwrap();
        let a = representative_config(&res.pes, &r, &[0, 1]).unwrap();
        let b = representative_config(&res.pes, &r, &[1, 0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(representative_config(&res.pes, &r, &[0]).unwrap(), *res.pes.local_config(0));
        assert_eq!(configurations_with_run(&res.pes, &[1, 0], 100).unwrap(), vec![a]);
    }

    #[test]
    fn commutation_of_statements() {
        let p: Program<i64> = parse_program("global x = 0; global y = 0; thread { x = 1; } thread { y = 1; }").unwrap();
        let rr = enumerate_reach_concrete(&p, 100);
        let r = build_independence(&p, Mode::Heap);
        assert!(check_statement_commutation(&p, &r, &rr).holds());

        let p: Program<i64> = parse_program("global x = 0; thread { x = 1; } thread { x = 2; }").unwrap();
        let rr = enumerate_reach_concrete(&p, 100);
        let forced = IndepRelation::from_pairs(2, [(0, 1)]);
        let rep = check_statement_commutation(&p, &forced, &rr);
        assert!(rep.violations.iter().any(|v| v.clause == CommutationClause::Diamond));
    }

    #[test]
    fn disabling_write_fails_the_enabledness_clause() {
        let p: Program<i64> = parse_program("global x = 0; thread { x = 1; } thread { assume(x == 0); }").unwrap();
        let rr = enumerate_reach_concrete(&p, 100);
        let forced = IndepRelation::from_pairs(2, [(0, 1)]);
        let rep = check_statement_commutation(&p, &forced, &rr);
        assert!(rep.violations.iter().any(|v| v.clause == CommutationClause::Enabledness));
    }

    #[test]
    fn assumes_on_distinct_variables_commute_as_statements() {
        // The lifted set transformers disable each other, the statements do not.
        let p: Program<i64> =
            parse_program("global x = 0; global y = 1; thread { assume(x == 0); } thread { assume(y == 0); }").unwrap();
        let s0 = initial_state(&p);
        let mut s1 = s0.clone();
        s1.vals = vec![1, 0];
        let rr = ReachReport {
            states: BTreeSet::from([s0, s1]),
            violations: BTreeMap::new(),
            truncated: false,
            overflow: false,
        };
        let r = build_independence(&p, Mode::Heap);
        assert!(r.independent(0, 1));
        assert!(check_statement_commutation(&p, &r, &rr).holds());
    }
}
