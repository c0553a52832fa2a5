//! Abstract unfolding: events are discovered by running the thread-local
//! analysis from the state of each configuration, histories are made
//! canonical by `mkevent`, and subsumed events become cutoffs.

mod collapse;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::time::{Duration, Instant};

use thiserror::Error;

pub use collapse::{Collapser, StateMode};

use crate::domains::{AnalysisInstance, Lattice, TransformerId};
use crate::indep::{IndepRelation, Weakness};
use crate::lang::AssertId;
use crate::pes::{Added, Configuration, EventId, Pes, PesError};

/// Depth comparison used by the cutoff test. `NonStrict` is unsound and only
/// exists so tests can show why the strict inequality matters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutoffDepth {
    Strict,
    NonStrict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnfoldOptions {
    pub use_tla: bool,
    pub use_cutoffs: bool,
    pub widening_level: usize,
    pub event_cap: usize,
    pub configuration_cap: usize,
    /// Ignore candidate events whose local configuration is larger.
    pub depth_bound: Option<usize>,
    pub cutoff_depth: CutoffDepth,
    pub state_mode: StateMode,
    /// Interleaving cap for `StateMode::AllInterleavings`.
    pub interleaving_cap: usize,
}

impl Default for UnfoldOptions {
    fn default() -> Self {
        UnfoldOptions {
            use_tla: true,
            use_cutoffs: true,
            widening_level: 15,
            event_cap: 10_000,
            configuration_cap: 200_000,
            depth_bound: None,
            cutoff_depth: CutoffDepth::Strict,
            state_mode: StateMode::SingleSort,
            interleaving_cap: 10_000,
        }
    }
}

impl UnfoldOptions {
    /// The plain unfolding: no thread-local analysis, no cutoffs.
    pub fn plain() -> Self {
        UnfoldOptions {
            use_tla: false,
            use_cutoffs: false,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Incomplete {
    EventCap,
    ConfigurationCap,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnfoldStats {
    pub events: usize,
    pub cutoffs: usize,
    pub configurations: usize,
    pub tla_calls: usize,
    pub tla_steps: usize,
    /// Candidates whose local-configuration state was ⊥.
    pub infeasible_candidates: usize,
    pub wall_time: Duration,
}

#[derive(Clone, Debug)]
pub struct UnfoldResult<E> {
    pub pes: Pes<E>,
    pub warnings: BTreeSet<AssertId>,
    pub stats: UnfoldStats,
    pub incomplete: Option<Incomplete>,
    /// Explored (cutoff-free) configurations with their states.
    pub explored: Vec<(Configuration, E)>,
}

impl<E> UnfoldResult<E> {
    pub fn is_complete(&self) -> bool {
        self.incomplete.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum UnfoldError {
    #[error("cutoffs need a weak independence relation, but this one is known not to commute")]
    NonWeakRelation,
    #[error(transparent)]
    Pes(#[from] PesError),
}

/// Canonical history of `f` after `c`: every event of `c` at or below one
/// whose label depends on `f`. Same set as repeatedly dropping <-maximal
/// events independent of `f` until none is left.
pub fn mkevent<E: Clone>(pes: &Pes<E>, r: &IndepRelation, f: TransformerId, c: &Configuration) -> Configuration {
    let mut keep = vec![false; c.ids().last().map_or(0, |&e| e + 1)];
    // Descending ids: an event already kept lies below a kept one, so its
    // local configuration is covered.
    for &e in c.ids().iter().rev() {
        if !keep[e] && !r.independent(f, pes.event(e).label) {
            for x in pes.local_config(e).iter() {
                keep[x] = true;
            }
        }
    }
    Configuration::from_ids(c.iter().filter(|&e| keep[e]))
}

/// Non-cutoff events seen so far, bucketed by transformer.
#[derive(Clone, Debug)]
pub struct CutoffTable<E> {
    buckets: HashMap<TransformerId, Vec<(E, usize)>>,
    depth: CutoffDepth,
}

impl<E: Lattice> CutoffTable<E> {
    pub fn new(depth: CutoffDepth) -> Self {
        CutoffTable {
            buckets: HashMap::new(),
            depth,
        }
    }

    /// True if some recorded event with the same transformer has a larger
    /// state and a smaller local configuration; otherwise records this one.
    pub fn is_cutoff(&mut self, f: TransformerId, state: &E, depth: usize) -> bool {
        let bucket = self.buckets.entry(f).or_default();
        let smaller = |k: usize| match self.depth {
            CutoffDepth::Strict => k < depth,
            CutoffDepth::NonStrict => k <= depth,
        };
        if bucket.iter().any(|(d, k)| smaller(*k) && state.leq(d)) {
            return true;
        }
        bucket.push((state.clone(), depth));
        false
    }
}

struct Candidate {
    label: TransformerId,
    history: Configuration,
}

/// Builds the unfolding of `inst` under `r`.
pub fn unfold<I: AnalysisInstance>(
    inst: &I,
    r: &IndepRelation,
    opts: &UnfoldOptions,
) -> Result<UnfoldResult<I::Elem>, UnfoldError> {
    let collapser = Collapser::new(inst, r, opts.use_tla, opts.widening_level);
    unfold_with(&collapser, r, opts)
}

/// [`unfold`] reusing an existing collapser (and its tla memo).
pub fn unfold_with<I: AnalysisInstance>(
    cx: &Collapser<'_, I>,
    r: &IndepRelation,
    opts: &UnfoldOptions,
) -> Result<UnfoldResult<I::Elem>, UnfoldError> {
    if opts.use_cutoffs && r.weakness() == Weakness::Refuted {
        return Err(UnfoldError::NonWeakRelation);
    }
    let start = Instant::now();
    let calls0 = cx.tla_calls();
    let steps0 = cx.tla_steps();
    let inst = cx.instance();
    let mut u = Run {
        cx,
        r,
        opts,
        pes: Pes::new(),
        warnings: BTreeSet::new(),
        explored: Vec::new(),
        seen: HashSet::new(),
        states: HashMap::new(),
        heap: BinaryHeap::new(),
        candidates: Vec::new(),
        queued: HashSet::new(),
        table: CutoffTable::new(opts.cutoff_depth),
        infeasible: 0,
        incomplete: None,
    };
    let d0 = inst.initial();
    u.states.insert(Configuration::empty(), d0.clone());
    u.explore(Configuration::empty(), d0);

    while let Some(Reverse((_, seq))) = u.heap.pop() {
        if u.incomplete.is_some() {
            break;
        }
        let Candidate { label, history } = std::mem::replace(
            &mut u.candidates[seq],
            Candidate {
                label: 0,
                history: Configuration::empty(),
            },
        );
        u.admit(label, history)?;
    }

    let stats = UnfoldStats {
        events: u.pes.len(),
        cutoffs: u.pes.num_cutoffs(),
        configurations: u.explored.len(),
        tla_calls: cx.tla_calls() - calls0,
        tla_steps: cx.tla_steps() - steps0,
        infeasible_candidates: u.infeasible,
        wall_time: start.elapsed(),
    };
    Ok(UnfoldResult {
        pes: u.pes,
        warnings: u.warnings,
        stats,
        incomplete: u.incomplete,
        explored: u.explored,
    })
}

struct Run<'c, 'a, I: AnalysisInstance> {
    cx: &'c Collapser<'a, I>,
    r: &'c IndepRelation,
    opts: &'c UnfoldOptions,
    pes: Pes<I::Elem>,
    warnings: BTreeSet<AssertId>,
    explored: Vec<(Configuration, I::Elem)>,
    seen: HashSet<Configuration>,
    states: HashMap<Configuration, I::Elem>,
    heap: BinaryHeap<Reverse<(usize, usize)>>,
    candidates: Vec<Candidate>,
    queued: HashSet<(TransformerId, Configuration)>,
    table: CutoffTable<I::Elem>,
    infeasible: usize,
    incomplete: Option<Incomplete>,
}

impl<I: AnalysisInstance> Run<'_, '_, I> {
    fn state(&mut self, c: &Configuration) -> Result<I::Elem, PesError> {
        if let Some(s) = self.states.get(c) {
            return Ok(s.clone());
        }
        let s = self.cx.state_of(&self.pes, c, self.opts.state_mode, self.opts.interleaving_cap)?;
        self.states.insert(c.clone(), s.clone());
        Ok(s)
    }

    /// Records `c` and queues every event enabled after it.
    fn explore(&mut self, c: Configuration, state: I::Elem) {
        if !self.seen.insert(c.clone()) {
            return;
        }
        if self.explored.len() >= self.opts.configuration_cap {
            self.incomplete = Some(Incomplete::ConfigurationCap);
            return;
        }
        self.explored.push((c.clone(), state.clone()));
        let inst = self.cx.instance();
        for i in 0..inst.num_threads() {
            let t = self.cx.tla(i, &state);
            self.warnings.extend(t.may_fail.iter().copied());
            for &f in self.cx.labels(i) {
                if inst.apply(f, &t.element).is_bottom() {
                    continue;
                }
                if let Some(a) = inst.assert_of(f) {
                    if inst.may_fail(f, &t.element) {
                        self.warnings.insert(a);
                    }
                }
                let h = mkevent(&self.pes, self.r, f, &c);
                let depth = h.len() + 1;
                if self.opts.depth_bound.is_some_and(|b| depth > b) {
                    continue;
                }
                if self.pes.find(f, &h).is_some() || !self.queued.insert((f, h.clone())) {
                    continue;
                }
                let seq = self.candidates.len();
                self.candidates.push(Candidate { label: f, history: h });
                self.heap.push(Reverse((depth, seq)));
            }
        }
    }

    fn admit(&mut self, f: TransformerId, h: Configuration) -> Result<(), UnfoldError> {
        if self.pes.find(f, &h).is_some() {
            return Ok(());
        }
        let pre = self.state(&h)?;
        let post = self.cx.collapsed_apply(f, &pre);
        if post.is_bottom() {
            self.infeasible += 1;
            return Ok(());
        }
        if self.pes.len() >= self.opts.event_cap {
            self.incomplete = Some(Incomplete::EventCap);
            return Ok(());
        }
        let depth = h.len() + 1;
        let cutoff = self.opts.use_cutoffs && self.table.is_cutoff(f, &post, depth);
        let thread = self.cx.instance().thread_of(f);
        let e = match self.pes.add_event(f, thread, &h, self.r, post.clone())? {
            Added::New(e) => e,
            Added::Duplicate(_) => return Ok(()),
        };
        self.states.insert(self.pes.event(e).local.clone(), post);
        if cutoff {
            self.pes.mark_cutoff(e);
            return Ok(());
        }
        // Extend every explored configuration that contains the history and
        // does not conflict with the new event. Explored configurations are
        // causally closed, so containing the direct causes is enough.
        let ev = self.pes.event(e);
        let targets: Vec<(Configuration, I::Elem)> = self
            .explored
            .iter()
            .filter(|(c, _)| ev.causes.iter().all(|&x| c.contains(x)) && !overlaps(&ev.conflicts, c))
            .cloned()
            .collect();
        for (c, before) in targets {
            let next = c.with(e);
            if self.seen.contains(&next) {
                continue;
            }
            // `e` has the largest id, so it comes last in the ascending order.
            let s = match self.opts.state_mode {
                StateMode::SingleSort => {
                    let s = self.cx.collapsed_apply(f, &before);
                    self.states.insert(next.clone(), s.clone());
                    s
                }
                StateMode::AllInterleavings => self.state(&next)?,
            };
            if s.is_bottom() {
                continue;
            }
            self.explore(next, s);
            if self.incomplete.is_some() {
                break;
            }
        }
        Ok(())
    }
}

/// Some event of the sorted list `events` lies in `c`.
fn overlaps(events: &[EventId], c: &Configuration) -> bool {
    if events.len() < c.len() {
        events.iter().any(|&x| c.contains(x))
    } else {
        c.iter().any(|x| events.binary_search(&x).is_ok())
    }
}

/// A pair of independent global transformers whose collapsed versions do
/// not commute at `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RespectViolation<E> {
    pub f: TransformerId,
    pub g: TransformerId,
    pub d: E,
    /// `ĥg(ĥf(d))`
    pub fg: E,
    /// `ĥf(ĥg(d))`
    pub gf: E,
}

/// Checks that collapsed transformers of independent pairs still commute
/// on the sampled elements.
pub fn check_respects_independence<I: AnalysisInstance>(
    cx: &Collapser<'_, I>,
    r: &IndepRelation,
    samples: &[I::Elem],
) -> Vec<RespectViolation<I::Elem>> {
    let labels = cx.all_labels();
    let mut out = Vec::new();
    for (ai, &f) in labels.iter().enumerate() {
        for &g in &labels[ai + 1..] {
            if !r.independent(f, g) {
                continue;
            }
            for d in samples {
                let fg = cx.collapsed_apply(g, &cx.collapsed_apply(f, d));
                let gf = cx.collapsed_apply(f, &cx.collapsed_apply(g, d));
                if fg != gf {
                    out.push(RespectViolation {
                        f,
                        g,
                        d: d.clone(),
                        fg,
                        gf,
                    });
                }
            }
        }
    }
    out
}
