use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::element::{AbsElement, Env};
use super::lattice::{AnalysisInstance, Lattice, TlaOutcome, TransformerId};
use super::transfer::{apply_edge, edge_may_fail, stmt_post};
use crate::lang::{desugar_mutexes, AssertId, Loc, Program, Stmt, ThreadId};
use crate::Scalar;

/// Narrowing passes after the widened fixpoint; each pass can only replace
/// infinite bounds or drop entries, so few are ever needed.
const NARROWING_PASSES: usize = 32;

/// Interval analysis of a program, one transformer per CFG edge.
#[derive(Clone, Debug)]
pub struct IntervalInstance<T> {
    program: Program<T>,
    initial: AbsElement<T>,
}

impl<T: Scalar> IntervalInstance<T> {
    /// Desugars mutexes and starts from the program's initial state.
    pub fn new(program: &Program<T>) -> Self {
        let program = desugar_mutexes(program);
        let initial = AbsElement::initial(&program);
        IntervalInstance { program, initial }
    }

    pub fn with_initial(program: &Program<T>, initial: AbsElement<T>) -> Self {
        IntervalInstance {
            program: desugar_mutexes(program),
            initial,
        }
    }

    /// The desugared program the transformers act on.
    pub fn program(&self) -> &Program<T> {
        &self.program
    }

    fn step(&self, f: TransformerId, locs: &[Loc], env: &Env<T>) -> Option<(Vec<Loc>, Env<T>)> {
        let e = &self.program.edges[f];
        if locs[e.thread] != e.src {
            return None;
        }
        let post = stmt_post(&self.program, e.thread, &e.stmt, env)?;
        let mut l = locs.to_vec();
        l[e.thread] = e.dst;
        Some((l, post))
    }
}

impl<T: Scalar> AnalysisInstance for IntervalInstance<T> {
    type Elem = AbsElement<T>;

    fn initial(&self) -> AbsElement<T> {
        self.initial.clone()
    }

    fn bottom(&self) -> AbsElement<T> {
        AbsElement::bottom()
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

    fn apply(&self, f: TransformerId, d: &AbsElement<T>) -> AbsElement<T> {
        apply_edge(&self.program, &self.program.edges[f], d)
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

    fn may_fail(&self, f: TransformerId, d: &AbsElement<T>) -> bool {
        edge_may_fail(&self.program.edges[f], d)
    }

    fn widen(&self, a: &AbsElement<T>, b: &AbsElement<T>) -> AbsElement<T> {
        a.widen(b)
    }

    /// Worklist iteration per location vector. A location vector is widened
    /// once it has been updated more than `widening_level` times; a
    /// narrowing phase then recovers bounds lost to widening.
    fn local_fixpoint(
        &self,
        thread: ThreadId,
        d: &AbsElement<T>,
        locals: &[TransformerId],
        widening_level: usize,
    ) -> TlaOutcome<AbsElement<T>> {
        let mut by_src: HashMap<Loc, Vec<TransformerId>> = HashMap::new();
        for &f in locals {
            debug_assert_eq!(self.thread_of(f), thread);
            by_src.entry(self.program.edges[f].src).or_default().push(f);
        }
        let mut steps = 0usize;
        let mut acc = d.clone();
        let mut updates: HashMap<Vec<Loc>, usize> = HashMap::new();
        let mut queue: VecDeque<Vec<Loc>> = d.entries().keys().cloned().collect();
        let mut queued: BTreeSet<Vec<Loc>> = queue.iter().cloned().collect();

        while let Some(locs) = queue.pop_front() {
            queued.remove(&locs);
            let env = acc.get(&locs).expect("queued entry exists").clone();
            for &f in by_src.get(&locs[thread]).into_iter().flatten() {
                steps += 1;
                let Some((to, post)) = self.step(f, &locs, &env) else {
                    continue;
                };
                let new = match acc.get(&to) {
                    Some(old) if post.leq(old) => continue,
                    Some(old) => {
                        let joined = old.join(&post);
                        let n = updates.entry(to.clone()).or_insert(0);
                        *n += 1;
                        if *n > widening_level {
                            old.widen(&joined)
                        } else {
                            joined
                        }
                    }
                    None => post,
                };
                acc.insert(to.clone(), new);
                if queued.insert(to.clone()) {
                    queue.push_back(to);
                }
            }
        }

        // Narrowing: x := x Δ (d ⊔ F(x)), evaluated on all entries at once.
        for _ in 0..NARROWING_PASSES {
            let mut image: BTreeMap<Vec<Loc>, Env<T>> = d.entries().clone();
            for (locs, env) in acc.entries() {
                for &f in by_src.get(&locs[thread]).into_iter().flatten() {
                    steps += 1;
                    if let Some((to, post)) = self.step(f, locs, env) {
                        match image.get_mut(&to) {
                            Some(old) => *old = old.join(&post),
                            None => {
                                image.insert(to, post);
                            }
                        }
                    }
                }
            }
            let mut img = AbsElement::bottom();
            for (k, v) in image {
                img.insert(k, v);
            }
            let next = acc.narrow(&img);
            if next == acc {
                break;
            }
            acc = next;
        }

        let mut may_fail = BTreeSet::new();
        for &f in locals {
            if let Some(a) = self.assert_of(f) {
                if self.may_fail(f, &acc) {
                    may_fail.insert(a);
                }
            }
        }
        TlaOutcome {
            element: acc,
            may_fail,
            steps,
        }
    }
}

type BoxedFn<E> = Box<dyn Fn(&E) -> E + Send + Sync>;

/// An analysis instance given directly by closures; useful for small
/// hand-built systems.
pub struct FnInstance<E> {
    initial: E,
    bottom: E,
    threads: usize,
    transformers: Vec<(ThreadId, String, BoxedFn<E>)>,
}

impl<E: Lattice> FnInstance<E> {
    pub fn new(initial: E, bottom: E, threads: usize) -> Self {
        FnInstance {
            initial,
            bottom,
            threads,
            transformers: Vec::new(),
        }
    }

    /// Adds a transformer for `thread`; returns its id.
    pub fn add(
        &mut self,
        thread: ThreadId,
        label: impl Into<String>,
        f: impl Fn(&E) -> E + Send + Sync + 'static,
    ) -> TransformerId {
        assert!(thread < self.threads, "thread out of range");
        self.transformers.push((thread, label.into(), Box::new(f)));
        self.transformers.len() - 1
    }
}

impl<E: Lattice> AnalysisInstance for FnInstance<E> {
    type Elem = E;

    fn initial(&self) -> E {
        self.initial.clone()
    }

    fn bottom(&self) -> E {
        self.bottom.clone()
    }

    fn num_threads(&self) -> usize {
        self.threads
    }

    fn num_transformers(&self) -> usize {
        self.transformers.len()
    }

    fn thread_of(&self, f: TransformerId) -> ThreadId {
        self.transformers[f].0
    }

    fn apply(&self, f: TransformerId, d: &E) -> E {
        if d.is_bottom() {
            return self.bottom.clone();
        }
        (self.transformers[f].2)(d)
    }

    fn label(&self, f: TransformerId) -> String {
        self.transformers[f].1.clone()
    }
}
