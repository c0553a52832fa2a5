//! Labelled prime event structures: events `⟨f, H⟩`, causality, hereditary
//! conflict, configurations and the prefix order.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::domains::TransformerId;
use crate::indep::IndepRelation;
use crate::lang::ThreadId;

pub type EventId = usize;

/// Sorted, duplicate-free set of event ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration(Vec<EventId>);

impl Configuration {
    pub fn empty() -> Self {
        Configuration(Vec::new())
    }

    pub fn from_ids(ids: impl IntoIterator<Item = EventId>) -> Self {
        let mut v: Vec<EventId> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Configuration(v)
    }

    pub fn contains(&self, e: EventId) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> &[EventId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = EventId> + '_ {
        self.0.iter().copied()
    }

    pub fn with(&self, e: EventId) -> Self {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&e) {
            v.insert(pos, e);
        }
        Configuration(v)
    }

    pub fn without(&self, e: EventId) -> Self {
        Configuration(self.0.iter().copied().filter(|&x| x != e).collect())
    }

    pub fn is_subset(&self, o: &Self) -> bool {
        self.0.iter().all(|&e| o.contains(e))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.0.iter().enumerate() {
            write!(f, "{}e{e}", if i > 0 { "," } else { "" })?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event<E> {
    pub id: EventId,
    pub label: TransformerId,
    pub thread: ThreadId,
    /// The <-maximal events of the history.
    pub causes: Vec<EventId>,
    /// Direct conflicts, recorded symmetrically, in ascending id order.
    pub conflicts: Vec<EventId>,
    pub history: Configuration,
    /// `history ∪ {id}`.
    pub local: Configuration,
    /// State reached by the local configuration.
    pub state: E,
    pub cutoff: bool,
}

impl<E> Event<E> {
    /// `|[e]|`
    pub fn depth(&self) -> usize {
        self.local.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PesError {
    #[error("unknown event e{0}")]
    UnknownEvent(EventId),
    #[error("history {0} is not a configuration")]
    InvalidHistory(Configuration),
    #[error("more than {0} configurations or interleavings")]
    CapExceeded(usize),
}

/// Outcome of [`Pes::add_event`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Added {
    New(EventId),
    Duplicate(EventId),
}

impl Added {
    pub fn id(self) -> EventId {
        match self {
            Added::New(e) | Added::Duplicate(e) => e,
        }
    }
}

/// Event structure under construction. Conflicts are stored as direct
/// conflicts and closed hereditarily on query.
#[derive(Clone, Debug)]
pub struct Pes<E> {
    events: Vec<Event<E>>,
    index: HashMap<(TransformerId, Vec<EventId>), EventId>,
}

impl<E> Default for Pes<E> {
    fn default() -> Self {
        Pes {
            events: Vec::new(),
            index: HashMap::new(),
        }
    }
}

impl<E: Clone> Pes<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[Event<E>] {
        &self.events
    }

    pub fn event(&self, e: EventId) -> &Event<E> {
        &self.events[e]
    }

    pub(crate) fn mark_cutoff(&mut self, e: EventId) {
        self.events[e].cutoff = true;
    }

    pub fn num_cutoffs(&self) -> usize {
        self.events.iter().filter(|e| e.cutoff).count()
    }

    /// Event `⟨f, history⟩` if it exists.
    pub fn find(&self, label: TransformerId, history: &Configuration) -> Option<EventId> {
        self.index.get(&(label, self.maximal(history))).copied()
    }

    /// Adds `⟨f, history⟩`. Existing events outside the history whose label is
    /// dependent with `f` become in direct conflict with it.
    pub fn add_event(
        &mut self,
        label: TransformerId,
        thread: ThreadId,
        history: &Configuration,
        indep: &IndepRelation,
        state: E,
    ) -> Result<Added, PesError> {
        if !self.is_configuration(history)? {
            return Err(PesError::InvalidHistory(history.clone()));
        }
        let causes = self.maximal(history);
        if let Some(&e) = self.index.get(&(label, causes.clone())) {
            return Ok(Added::Duplicate(e));
        }
        let id = self.events.len();
        let conflicts: Vec<EventId> = self
            .events
            .iter()
            .filter(|x| !history.contains(x.id) && !indep.independent(label, x.label))
            .map(|x| x.id)
            .collect();
        for &c in &conflicts {
            self.events[c].conflicts.push(id);
        }
        self.index.insert((label, causes.clone()), id);
        self.events.push(Event {
            id,
            label,
            thread,
            causes,
            conflicts,
            history: history.clone(),
            local: history.with(id),
            state,
            cutoff: false,
        });
        debug_assert!(self.is_configuration(&self.events[id].local).unwrap_or(false));
        Ok(Added::New(id))
    }

    fn check(&self, e: EventId) -> Result<(), PesError> {
        if e < self.events.len() {
            Ok(())
        } else {
            Err(PesError::UnknownEvent(e))
        }
    }

    /// `a < b`
    pub fn causes(&self, a: EventId, b: EventId) -> bool {
        self.events[b].history.contains(a)
    }

    pub fn direct_conflict(&self, a: EventId, b: EventId) -> bool {
        self.events[a].conflicts.contains(&b)
    }

    /// Hereditary conflict: some cause-or-self of `a` directly conflicts
    /// with some cause-or-self of `b`.
    pub fn in_conflict(&self, a: EventId, b: EventId) -> bool {
        let lb = &self.events[b].local;
        self.events[a]
            .local
            .iter()
            .any(|x| self.events[x].conflicts.iter().any(|&y| lb.contains(y)))
    }

    /// Causally closed and conflict-free.
    pub fn is_configuration(&self, s: &Configuration) -> Result<bool, PesError> {
        for e in s.iter() {
            self.check(e)?;
        }
        for e in s.iter() {
            let ev = &self.events[e];
            if !ev.causes.iter().all(|&c| s.contains(c)) {
                return Ok(false);
            }
            if ev.conflicts.iter().any(|&c| s.contains(c)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The <-maximal events of `c`.
    pub fn maximal(&self, c: &Configuration) -> Vec<EventId> {
        let mut inner: Vec<EventId> = c.iter().flat_map(|e| self.events[e].causes.iter().copied()).collect();
        inner.sort_unstable();
        inner.dedup();
        c.iter().filter(|e| inner.binary_search(e).is_err()).collect()
    }

    /// `[e]`
    pub fn local_config(&self, e: EventId) -> &Configuration {
        &self.events[e].local
    }

    /// Events that can be added to `c` keeping it a configuration.
    pub fn extensions(&self, c: &Configuration) -> Vec<EventId> {
        self.events
            .iter()
            .filter(|e| {
                !c.contains(e.id)
                    && e.causes.iter().all(|&x| c.contains(x))
                    && !e.conflicts.iter().any(|&x| c.contains(x))
            })
            .map(|e| e.id)
            .collect()
    }

    /// All topological orders of `c`, as event sequences.
    pub fn linearizations(&self, c: &Configuration, cap: usize) -> Result<Vec<Vec<EventId>>, PesError> {
        let mut out = Vec::new();
        let mut prefix = Vec::with_capacity(c.len());
        let mut placed = BTreeSet::new();
        self.linearize(c, &mut prefix, &mut placed, &mut out, cap)?;
        Ok(out)
    }

    fn linearize(
        &self,
        c: &Configuration,
        prefix: &mut Vec<EventId>,
        placed: &mut BTreeSet<EventId>,
        out: &mut Vec<Vec<EventId>>,
        cap: usize,
    ) -> Result<(), PesError> {
        if prefix.len() == c.len() {
            if out.len() >= cap {
                return Err(PesError::CapExceeded(cap));
            }
            out.push(prefix.clone());
            return Ok(());
        }
        for e in c.iter() {
            if placed.contains(&e) || !self.events[e].causes.iter().all(|x| placed.contains(x)) {
                continue;
            }
            placed.insert(e);
            prefix.push(e);
            self.linearize(c, prefix, placed, out, cap)?;
            prefix.pop();
            placed.remove(&e);
        }
        Ok(())
    }

    /// Label sequences of all topological orders of `c` (deduplicated).
    pub fn interleavings(&self, c: &Configuration, cap: usize) -> Result<BTreeSet<Vec<TransformerId>>, PesError> {
        Ok(self
            .linearizations(c, cap)?
            .into_iter()
            .map(|seq| seq.into_iter().map(|e| self.events[e].label).collect())
            .collect())
    }

    /// Ascending ids: causes always have smaller ids, so this is one
    /// topological order.
    pub fn one_linearization(&self, c: &Configuration) -> Vec<EventId> {
        c.ids().to_vec()
    }

    /// Every configuration built from events accepted by `keep`
    /// (`keep` should be closed under causes for the result to be meaningful).
    pub fn configurations_where(
        &self,
        keep: impl Fn(&Event<E>) -> bool,
        cap: usize,
    ) -> Result<Vec<Configuration>, PesError> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.enumerate(0, &keep, &mut cur, &mut out, cap)?;
        Ok(out)
    }

    pub fn configurations(&self, cap: usize) -> Result<Vec<Configuration>, PesError> {
        self.configurations_where(|_| true, cap)
    }

    fn enumerate(
        &self,
        next: EventId,
        keep: &impl Fn(&Event<E>) -> bool,
        cur: &mut Vec<EventId>,
        out: &mut Vec<Configuration>,
        cap: usize,
    ) -> Result<(), PesError> {
        if next == self.events.len() {
            if out.len() >= cap {
                return Err(PesError::CapExceeded(cap));
            }
            out.push(Configuration(cur.clone()));
            return Ok(());
        }
        let e = &self.events[next];
        let can_add = keep(e)
            && e.causes.iter().all(|c| cur.binary_search(c).is_ok())
            && !e.conflicts.iter().any(|c| cur.binary_search(c).is_ok());
        if can_add {
            cur.push(next);
            self.enumerate(next + 1, keep, cur, out, cap)?;
            cur.pop();
        }
        self.enumerate(next + 1, keep, cur, out, cap)
    }

    /// ⊆-maximal configurations.
    pub fn maximal_configurations(&self, cap: usize) -> Result<Vec<Configuration>, PesError> {
        Ok(self
            .configurations(cap)?
            .into_iter()
            .filter(|c| self.extensions(c).is_empty())
            .collect())
    }

    /// Checks the event-structure axioms; returns a description of the first
    /// violation.
    pub fn check_axioms(&self) -> Result<(), String> {
        for e in &self.events {
            for &c in &e.causes {
                if c >= e.id {
                    return Err(format!("e{} has a cause e{c} created after it", e.id));
                }
            }
            if e.conflicts.contains(&e.id) {
                return Err(format!("e{} conflicts with itself", e.id));
            }
            for &c in &e.conflicts {
                if !self.events[c].conflicts.contains(&e.id) {
                    return Err(format!("conflict e{}#e{c} is not symmetric", e.id));
                }
            }
            if self.in_conflict(e.id, e.id) {
                return Err(format!("e{} inherits a conflict with itself", e.id));
            }
            if self.maximal(&e.history) != e.causes {
                return Err(format!("causes of e{} are not the maximal events of its history", e.id));
            }
            let closed = e.history.iter().all(|h| self.events[h].history.is_subset(&e.history));
            if !closed {
                return Err(format!("history of e{} is not causally closed", e.id));
            }
        }
        if self.index.len() != self.events.len() {
            return Err("two events share a label and immediate causes".into());
        }
        Ok(())
    }
}

/// Whether `small ⊴ big`: every event of `small` exists in `big` with the
/// same label and (mapped) causes, and conflict agrees on the image.
pub fn is_prefix<E: Clone, F: Clone>(small: &Pes<E>, big: &Pes<F>) -> bool {
    let mut map: Vec<EventId> = Vec::with_capacity(small.len());
    for e in small.events() {
        let hist = Configuration::from_ids(e.history.iter().map(|h| map[h]));
        match big.find(e.label, &hist) {
            Some(img) => map.push(img),
            None => return false,
        }
    }
    for a in 0..small.len() {
        for b in a + 1..small.len() {
            if small.in_conflict(a, b) != big.in_conflict(map[a], map[b]) {
                return false;
            }
        }
    }
    true
}
