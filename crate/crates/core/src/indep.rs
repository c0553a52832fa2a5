//! Independence between transformers: syntactic action sets, the local /
//! global partition, and empirical commutation checks.

use std::collections::BTreeSet;
use std::fmt;

use crate::domains::{AnalysisInstance, Lattice, TransformerId};
use crate::lang::{desugar_mutexes, Edge, Program, Scope, Stmt, ThreadId, VarId};
use crate::Scalar;

/// Shared variables an edge reads and writes. Locals never appear.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActionSet {
    pub reads: BTreeSet<VarId>,
    pub writes: BTreeSet<VarId>,
}

impl ActionSet {
    pub fn is_empty(&self) -> bool {
        self.reads.is_empty() && self.writes.is_empty()
    }

    /// Write/read or write/write overlap, restricted to variables `counts` accepts.
    pub fn conflicts_with(&self, o: &ActionSet, counts: impl Fn(VarId) -> bool) -> bool {
        let hits = |w: &BTreeSet<VarId>, other: &ActionSet| {
            w.iter()
                .any(|v| counts(*v) && (other.reads.contains(v) || other.writes.contains(v)))
        };
        hits(&self.writes, o) || hits(&o.writes, self)
    }
}

pub fn actions_of<T: Scalar>(p: &Program<T>, e: &Edge<T>) -> ActionSet {
    let mut reads = Vec::new();
    let mut writes = Vec::new();
    match &e.stmt {
        Stmt::Assign(v, x) => {
            x.vars(&mut reads);
            writes.push(*v);
        }
        Stmt::Havoc(v, ..) => writes.push(*v),
        Stmt::Assume(c) | Stmt::Assert(c, _) => c.vars(&mut reads),
        Stmt::Guarded { guard, var, value } => {
            guard.vars(&mut reads);
            value.vars(&mut reads);
            writes.push(*var);
        }
        Stmt::Lock(m) | Stmt::Unlock(m) => {
            let g = p.mutexes[*m].ghost;
            reads.push(g);
            writes.push(g);
        }
        Stmt::Skip => {}
    }
    let shared = |v: &VarId| p.vars[*v].is_shared();
    ActionSet {
        reads: reads.into_iter().filter(shared).collect(),
        writes: writes.into_iter().filter(shared).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Only mutex ghost variables count; data accesses are assumed race-free.
    Sync,
    /// Every shared variable counts.
    Heap,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sync => "sync",
            Mode::Heap => "heap",
        })
    }
}

/// What is known about commutation of the related transformers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weakness {
    Assumed,
    /// Checked on a sample and no violation found.
    Validated,
    /// A counterexample to commutation is known.
    Refuted,
}

/// Symmetric, irreflexive relation over the transformers of one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndepRelation {
    n: usize,
    bits: Vec<bool>,
    mode: Option<Mode>,
    weakness: Weakness,
}

impl IndepRelation {
    pub fn empty(n: usize) -> Self {
        IndepRelation {
            n,
            bits: vec![false; n * n],
            mode: None,
            weakness: Weakness::Assumed,
        }
    }

    /// Relation holding exactly the given pairs (and their mirrors).
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (TransformerId, TransformerId)>) -> Self {
        let mut r = Self::empty(n);
        for (a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    pub fn insert(&mut self, a: TransformerId, b: TransformerId) {
        assert_ne!(a, b, "independence is irreflexive");
        self.bits[a * self.n + b] = true;
        self.bits[b * self.n + a] = true;
    }

    pub fn remove(&mut self, a: TransformerId, b: TransformerId) {
        self.bits[a * self.n + b] = false;
        self.bits[b * self.n + a] = false;
    }

    pub fn independent(&self, a: TransformerId, b: TransformerId) -> bool {
        self.bits[a * self.n + b]
    }

    pub fn num_transformers(&self) -> usize {
        self.n
    }

    /// Related pairs with `a < b`.
    pub fn pairs(&self) -> Vec<(TransformerId, TransformerId)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.independent(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn mode(&self) -> Option<Mode> {
        self.mode
    }

    pub fn weakness(&self) -> Weakness {
        self.weakness
    }

    pub fn set_weakness(&mut self, w: Weakness) {
        self.weakness = w;
    }
}

/// Cross-thread pairs whose action sets do not conflict. In sync mode only
/// mutex ghost variables are considered.
pub fn build_independence<T: Scalar>(p: &Program<T>, mode: Mode) -> IndepRelation {
    let p = desugar_mutexes(p);
    let actions: Vec<ActionSet> = p.edges.iter().map(|e| actions_of(&p, e)).collect();
    let counts = |v: VarId| match mode {
        Mode::Heap => true,
        Mode::Sync => matches!(p.vars[v].scope, Scope::Ghost(_)),
    };
    let mut r = IndepRelation::empty(p.edges.len());
    r.mode = Some(mode);
    for a in 0..p.edges.len() {
        for b in a + 1..p.edges.len() {
            if p.edges[a].thread != p.edges[b].thread
                && !actions[a].conflicts_with(&actions[b], counts)
            {
                r.insert(a, b);
            }
        }
    }
    r
}

/// Per-thread split into local transformers (independent of every
/// transformer of every other thread) and global ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub local: Vec<Vec<TransformerId>>,
    pub global: Vec<Vec<TransformerId>>,
    pub is_local: Vec<bool>,
}

pub fn classify_transformers<I: AnalysisInstance>(inst: &I, r: &IndepRelation) -> Partition {
    let n = inst.num_threads();
    let mut part = Partition {
        local: vec![Vec::new(); n],
        global: vec![Vec::new(); n],
        is_local: Vec::with_capacity(inst.num_transformers()),
    };
    for f in 0..inst.num_transformers() {
        let t = inst.thread_of(f);
        let local = (0..inst.num_transformers())
            .filter(|&g| inst.thread_of(g) != t)
            .all(|g| r.independent(f, g));
        part.is_local.push(local);
        if local {
            part.local[t].push(f);
        } else {
            part.global[t].push(f);
        }
    }
    part
}

/// A related pair that does not commute at `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutationViolation<E> {
    pub f: TransformerId,
    pub g: TransformerId,
    pub d: E,
    /// `f(g(d))`
    pub lhs: E,
    /// `g(f(d))`
    pub rhs: E,
}

/// Checks `f(g(d)) = g(f(d))` for every related pair and every sample.
pub fn check_weak_independence<I: AnalysisInstance>(
    inst: &I,
    r: &IndepRelation,
    elements: &[I::Elem],
) -> Vec<CommutationViolation<I::Elem>> {
    let mut out = Vec::new();
    for (f, g) in r.pairs() {
        for d in elements {
            let lhs = inst.apply(f, &inst.apply(g, d));
            let rhs = inst.apply(g, &inst.apply(f, d));
            if lhs != rhs {
                out.push(CommutationViolation {
                    f,
                    g,
                    d: d.clone(),
                    lhs,
                    rhs,
                });
            }
        }
    }
    out
}

/// The extra clause of full independence: if `f(d) ≠ ⊥` then
/// `f(g(d)) ≠ ⊥` iff `g(d) ≠ ⊥` (checked in both directions of each pair).
/// Returns `(f, g, d)` triples where it fails.
pub fn check_enabledness_clause<I: AnalysisInstance>(
    inst: &I,
    r: &IndepRelation,
    elements: &[I::Elem],
) -> Vec<(TransformerId, TransformerId, I::Elem)> {
    let mut out = Vec::new();
    for (a, b) in r.pairs() {
        for (f, g) in [(a, b), (b, a)] {
            for d in elements {
                if inst.apply(f, d).is_bottom() {
                    continue;
                }
                let fg = !inst.apply(f, &inst.apply(g, d)).is_bottom();
                let g_en = !inst.apply(g, d).is_bottom();
                if fg != g_en {
                    out.push((f, g, d.clone()));
                }
            }
        }
    }
    out
}

/// Removes every pair with a commutation counterexample on `elements` and
/// marks the result validated on that sample.
pub fn validate_weak<I: AnalysisInstance>(inst: &I, r: &IndepRelation, elements: &[I::Elem]) -> IndepRelation {
    let mut out = r.clone();
    for v in check_weak_independence(inst, r, elements) {
        out.remove(v.f, v.g);
    }
    out.weakness = Weakness::Validated;
    out
}

/// Thread owning each transformer, for callers without an instance.
pub fn threads_of<T: Scalar>(p: &Program<T>) -> Vec<ThreadId> {
    p.edges.iter().map(|e| e.thread).collect()
}
