use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::rc::Rc;

use crate::domains::{AnalysisInstance, Lattice, TlaOutcome, TransformerId};
use crate::indep::{classify_transformers, IndepRelation, Partition};
use crate::lang::ThreadId;
use crate::pes::{Configuration, Pes, PesError};

/// How the state of a configuration is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateMode {
    /// Fold along one topological order (sound when the relation is weak
    /// and tla respects independence).
    SingleSort,
    /// Meet over every interleaving.
    AllInterleavings,
}

/// Thread-local analysis and the collapsed transformers `f ∘ tla(thread(f))`.
///
/// tla results are memoized on `(thread, element)`.
pub struct Collapser<'a, I: AnalysisInstance> {
    inst: &'a I,
    part: Partition,
    use_tla: bool,
    widening_level: usize,
    labels: Vec<Vec<TransformerId>>,
    memo: RefCell<HashMap<(ThreadId, I::Elem), Rc<TlaOutcome<I::Elem>>>>,
    tla_calls: Cell<usize>,
    tla_steps: Cell<usize>,
}

impl<'a, I: AnalysisInstance> Collapser<'a, I> {
    pub fn new(inst: &'a I, r: &IndepRelation, use_tla: bool, widening_level: usize) -> Self {
        let part = classify_transformers(inst, r);
        let labels = if use_tla {
            part.global.clone()
        } else {
            let mut all = vec![Vec::new(); inst.num_threads()];
            for f in 0..inst.num_transformers() {
                all[inst.thread_of(f)].push(f);
            }
            all
        };
        Collapser {
            inst,
            part,
            use_tla,
            widening_level,
            labels,
            memo: RefCell::new(HashMap::new()),
            tla_calls: Cell::new(0),
            tla_steps: Cell::new(0),
        }
    }

    pub fn instance(&self) -> &'a I {
        self.inst
    }

    pub fn partition(&self) -> &Partition {
        &self.part
    }

    pub fn uses_tla(&self) -> bool {
        self.use_tla
    }

    /// Transformers that label events of thread `i`: its global ones with
    /// tla, all of them without.
    pub fn labels(&self, i: ThreadId) -> &[TransformerId] {
        &self.labels[i]
    }

    /// Every event label, in id order.
    pub fn all_labels(&self) -> Vec<TransformerId> {
        let mut v: Vec<TransformerId> = self.labels.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn tla_calls(&self) -> usize {
        self.tla_calls.get()
    }

    pub fn tla_steps(&self) -> usize {
        self.tla_steps.get()
    }

    /// Fixpoint of thread `i`'s local transformers from `d`; the identity
    /// when tla is disabled or `d` is ⊥.
    pub fn tla(&self, i: ThreadId, d: &I::Elem) -> Rc<TlaOutcome<I::Elem>> {
        if !self.use_tla || d.is_bottom() {
            return Rc::new(TlaOutcome {
                element: d.clone(),
                may_fail: Default::default(),
                steps: 0,
            });
        }
        let key = (i, d.clone());
        if let Some(hit) = self.memo.borrow().get(&key) {
            return hit.clone();
        }
        self.tla_calls.set(self.tla_calls.get() + 1);
        let out = Rc::new(self.inst.local_fixpoint(i, d, &self.part.local[i], self.widening_level));
        self.tla_steps.set(self.tla_steps.get() + out.steps);
        self.memo.borrow_mut().insert(key, out.clone());
        out
    }

    /// `f(tla(thread(f), d))`, or `f(d)` without tla.
    pub fn collapsed_apply(&self, f: TransformerId, d: &I::Elem) -> I::Elem {
        if d.is_bottom() {
            return self.inst.bottom();
        }
        if self.use_tla {
            let t = self.tla(self.inst.thread_of(f), d);
            self.inst.apply(f, &t.element)
        } else {
            self.inst.apply(f, d)
        }
    }

    /// Folds collapsed transformers along `seq` from the initial element.
    pub fn run(&self, seq: &[TransformerId]) -> I::Elem {
        self.run_from(&self.inst.initial(), seq)
    }

    pub fn run_from(&self, d: &I::Elem, seq: &[TransformerId]) -> I::Elem {
        seq.iter().fold(d.clone(), |acc, &f| self.collapsed_apply(f, &acc))
    }

    /// State of configuration `c` of `pes`.
    pub fn state_of<E: Clone>(
        &self,
        pes: &Pes<E>,
        c: &Configuration,
        mode: StateMode,
        cap: usize,
    ) -> Result<I::Elem, PesError> {
        match mode {
            StateMode::SingleSort => {
                let seq: Vec<TransformerId> = pes.one_linearization(c).iter().map(|&e| pes.event(e).label).collect();
                Ok(self.run(&seq))
            }
            StateMode::AllInterleavings => {
                let mut acc: Option<I::Elem> = None;
                for seq in pes.interleavings(c, cap)? {
                    let s = self.run(&seq);
                    acc = Some(match acc {
                        None => s,
                        Some(a) => a.meet(&s),
                    });
                }
                Ok(acc.unwrap_or_else(|| self.inst.initial()))
            }
        }
    }
}
