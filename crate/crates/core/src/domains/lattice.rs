use std::collections::BTreeSet;
use std::fmt::Debug;
use std::hash::Hash;

use crate::lang::{AssertId, ThreadId};

/// Index of a transformer inside its analysis instance.
pub type TransformerId = usize;

/// Lattice operations shared by every element type. Bottom is provided by
/// the owning instance.
pub trait Lattice: Clone + Eq + Hash + Debug {
    fn is_bottom(&self) -> bool;
    fn leq(&self, other: &Self) -> bool;
    fn join(&self, other: &Self) -> Self;
    fn meet(&self, other: &Self) -> Self;
}

/// Result of a thread-local fixpoint run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TlaOutcome<E> {
    pub element: E,
    /// Assertions among the thread's local transformers that may fail inside the fixpoint.
    pub may_fail: BTreeSet<AssertId>,
    /// Transformer applications performed.
    pub steps: usize,
}

/// A lattice with one monotone, bottom-strict transformer per statement,
/// each owned by one thread, and an initial element.
pub trait AnalysisInstance {
    type Elem: Lattice;

    fn initial(&self) -> Self::Elem;
    fn bottom(&self) -> Self::Elem;
    fn num_threads(&self) -> usize;
    fn num_transformers(&self) -> usize;
    fn thread_of(&self, f: TransformerId) -> ThreadId;
    fn apply(&self, f: TransformerId, d: &Self::Elem) -> Self::Elem;
    fn label(&self, f: TransformerId) -> String;

    /// The assertion checked by `f`, if any.
    fn assert_of(&self, _f: TransformerId) -> Option<AssertId> {
        None
    }

    /// Whether assertion transformer `f` may fail on some state described by `d`.
    fn may_fail(&self, _f: TransformerId, _d: &Self::Elem) -> bool {
        false
    }

    /// Extrapolation used by the thread-local fixpoint; defaults to join,
    /// which only terminates on finite-height parts of the lattice.
    fn widen(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.join(b)
    }

    /// Sound post-fixpoint of the transformers `locals` (all owned by `thread`)
    /// starting from `d`: for every sequence of them, the image of `d` is
    /// below the result.
    fn local_fixpoint(
        &self,
        _thread: ThreadId,
        d: &Self::Elem,
        locals: &[TransformerId],
        widening_level: usize,
    ) -> TlaOutcome<Self::Elem> {
        let mut acc = d.clone();
        let mut may_fail = BTreeSet::new();
        let mut steps = 0;
        let mut rounds = 0;
        loop {
            let mut next = acc.clone();
            for &f in locals {
                steps += 1;
                if let Some(a) = self.assert_of(f) {
                    if self.may_fail(f, &acc) {
                        may_fail.insert(a);
                    }
                }
                let img = self.apply(f, &acc);
                if !img.is_bottom() {
                    next = next.join(&img);
                }
            }
            if next.leq(&acc) {
                return TlaOutcome {
                    element: acc,
                    may_fail,
                    steps,
                };
            }
            rounds += 1;
            acc = if rounds > widening_level {
                self.widen(&acc, &next)
            } else {
                next
            };
        }
    }
}
