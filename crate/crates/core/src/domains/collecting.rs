use std::collections::BTreeSet;

use super::lattice::{AnalysisInstance, Lattice, TransformerId};
use crate::lang::{concrete_step, initial_state, is_enabled, AssertId, ConcreteState, Program, Stmt, ThreadId};
use crate::Scalar;

/// Element of the collecting semantics: a finite set of concrete states.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateSet<T>(pub BTreeSet<ConcreteState<T>>);

impl<T> Default for StateSet<T> {
    fn default() -> Self {
        StateSet(BTreeSet::new())
    }
}

impl<T: Scalar> Lattice for StateSet<T> {
    fn is_bottom(&self) -> bool {
        self.0.is_empty()
    }

    fn leq(&self, o: &Self) -> bool {
        self.0.is_subset(&o.0)
    }

    fn join(&self, o: &Self) -> Self {
        StateSet(self.0.union(&o.0).cloned().collect())
    }

    fn meet(&self, o: &Self) -> Self {
        StateSet(self.0.intersection(&o.0).cloned().collect())
    }
}

/// Exact image of a state set under one edge.
///
/// Panics on scalar overflow; use `BigInt` for programs that can overflow.
pub fn collecting_apply<T: Scalar>(p: &Program<T>, edge: usize, d: &StateSet<T>) -> StateSet<T> {
    let e = &p.edges[edge];
    let mut out = BTreeSet::new();
    for s in &d.0 {
        if is_enabled(p, s, e).expect("scalar overflow in collecting semantics") {
            let st = concrete_step(p, s, edge).expect("enabled step");
            out.extend(st.successors);
        }
    }
    StateSet(out)
}

/// The collecting semantics as an analysis instance, one transformer per edge.
#[derive(Clone, Debug)]
pub struct CollectingInstance<T> {
    program: Program<T>,
    initial: StateSet<T>,
}

impl<T: Scalar> CollectingInstance<T> {
    /// Starts from the program's initial state.
    pub fn new(program: Program<T>) -> Self {
        let initial = StateSet(BTreeSet::from([initial_state(&program)]));
        Self::with_initial(program, initial)
    }

    pub fn with_initial(program: Program<T>, initial: StateSet<T>) -> Self {
        CollectingInstance { program, initial }
    }

    pub fn program(&self) -> &Program<T> {
        &self.program
    }
}

impl<T: Scalar> AnalysisInstance for CollectingInstance<T> {
    type Elem = StateSet<T>;

    fn initial(&self) -> StateSet<T> {
        self.initial.clone()
    }

    fn bottom(&self) -> StateSet<T> {
        StateSet::default()
    }

    fn num_threads(&self) -> usize {
        self.program.num_threads()
    }

    fn num_transformers(&self) -> usize {
        self.program.edges.len()
    }

    fn thread_of(&self, f: TransformerId) -> ThreadId {
        self.program.edges[f].thread
    }

    fn apply(&self, f: TransformerId, d: &StateSet<T>) -> StateSet<T> {
        collecting_apply(&self.program, f, d)
    }

    fn label(&self, f: TransformerId) -> String {
        self.program.stmt_text(&self.program.edges[f].stmt)
    }

    fn assert_of(&self, f: TransformerId) -> Option<AssertId> {
        match &self.program.edges[f].stmt {
            Stmt::Assert(_, a) => Some(*a),
            _ => None,
        }
    }

    fn may_fail(&self, f: TransformerId, d: &StateSet<T>) -> bool {
        let p = &self.program;
        d.0.iter().any(|s| {
            is_enabled(p, s, &p.edges[f]).unwrap_or(false)
                && concrete_step(p, s, f).map(|st| st.violated.is_some()).unwrap_or(false)
        })
    }
}
