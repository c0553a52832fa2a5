use std::collections::BTreeMap;
use std::fmt;

use super::interval::Interval;
use super::lattice::Lattice;
use crate::lang::{ConcreteState, Loc, Program};
use crate::Scalar;

/// One interval per declared variable, indexed by `VarId`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Env<T>(pub Vec<Interval<T>>);

impl<T: Scalar> Env<T> {
    pub fn initial(p: &Program<T>) -> Self {
        Env(p.vars.iter().map(|v| Interval::singleton(v.init.clone())).collect())
    }

    fn check_shape(&self, o: &Self) {
        assert_eq!(self.0.len(), o.0.len(), "environments over different programs");
    }

    pub fn leq(&self, o: &Self) -> bool {
        self.check_shape(o);
        self.0.iter().zip(&o.0).all(|(a, b)| a.leq(b))
    }

    pub fn join(&self, o: &Self) -> Self {
        self.check_shape(o);
        Env(self.0.iter().zip(&o.0).map(|(a, b)| a.join(b)).collect())
    }

    pub fn meet(&self, o: &Self) -> Option<Self> {
        self.check_shape(o);
        self.0.iter().zip(&o.0).map(|(a, b)| a.meet(b)).collect::<Option<Vec<_>>>().map(Env)
    }

    pub fn widen(&self, o: &Self) -> Self {
        self.check_shape(o);
        Env(self.0.iter().zip(&o.0).map(|(a, b)| a.widen(b)).collect())
    }

    pub fn narrow(&self, o: &Self) -> Self {
        self.check_shape(o);
        Env(self.0.iter().zip(&o.0).map(|(a, b)| a.narrow(b)).collect())
    }

    pub fn contains(&self, vals: &[T]) -> bool {
        self.0.len() == vals.len() && self.0.iter().zip(vals).all(|(i, v)| i.contains(v))
    }
}

/// ⊥ (no entries) or a map from location vectors to environments. Data is
/// merged per control point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbsElement<T> {
    entries: BTreeMap<Vec<Loc>, Env<T>>,
}

impl<T: Scalar> Default for AbsElement<T> {
    fn default() -> Self {
        Self::bottom()
    }
}

impl<T: Scalar> AbsElement<T> {
    pub fn bottom() -> Self {
        AbsElement {
            entries: BTreeMap::new(),
        }
    }

    pub fn single(locs: Vec<Loc>, env: Env<T>) -> Self {
        AbsElement {
            entries: BTreeMap::from([(locs, env)]),
        }
    }

    /// All threads at their entry, every variable at its initial value.
    pub fn initial(p: &Program<T>) -> Self {
        Self::single(vec![0; p.num_threads()], Env::initial(p))
    }

    pub fn entries(&self) -> &BTreeMap<Vec<Loc>, Env<T>> {
        &self.entries
    }

    pub fn get(&self, locs: &[Loc]) -> Option<&Env<T>> {
        self.entries.get(locs)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Joins `env` into the entry at `locs`.
    pub fn insert_join(&mut self, locs: Vec<Loc>, env: Env<T>) {
        match self.entries.get_mut(&locs) {
            Some(old) => *old = old.join(&env),
            None => {
                self.entries.insert(locs, env);
            }
        }
    }

    pub(crate) fn insert(&mut self, locs: Vec<Loc>, env: Env<T>) {
        self.entries.insert(locs, env);
    }

    pub fn contains(&self, s: &ConcreteState<T>) -> bool {
        self.entries.get(&s.locs).is_some_and(|e| e.contains(&s.vals))
    }

    /// Pointwise widening; entries new in `next` are taken as they are.
    pub fn widen(&self, next: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &next.entries {
            match out.entries.get_mut(k) {
                Some(old) => *old = old.widen(&old.join(v)),
                None => {
                    out.entries.insert(k.clone(), v.clone());
                }
            }
        }
        out
    }

    /// Pointwise narrowing; entries absent from `next` are dropped.
    pub fn narrow(&self, next: &Self) -> Self {
        let entries = next
            .entries
            .iter()
            .filter_map(|(k, v)| self.entries.get(k).map(|old| (k.clone(), old.narrow(v))))
            .collect();
        AbsElement { entries }
    }
}

impl<T: Scalar> Lattice for AbsElement<T> {
    fn is_bottom(&self) -> bool {
        self.entries.is_empty()
    }

    fn leq(&self, o: &Self) -> bool {
        self.entries
            .iter()
            .all(|(k, v)| o.entries.get(k).is_some_and(|w| v.leq(w)))
    }

    fn join(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &o.entries {
            out.insert_join(k.clone(), v.clone());
        }
        out
    }

    fn meet(&self, o: &Self) -> Self {
        let entries = self
            .entries
            .iter()
            .filter_map(|(k, v)| Some((k.clone(), v.meet(o.entries.get(k)?)?)))
            .collect();
        AbsElement { entries }
    }
}

impl<T: Scalar> fmt::Display for AbsElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "bot");
        }
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{k:?}:")?;
            for (j, iv) in v.0.iter().enumerate() {
                write!(f, "{}{iv}", if j > 0 { "," } else { "" })?;
            }
        }
        Ok(())
    }
}

impl<T: Scalar> AbsElement<T> {
    /// Renders entries with variable names, e.g. `[0, 3] g=[0,0] i=[0,100]`.
    pub fn pretty(&self, p: &Program<T>) -> String {
        if self.entries.is_empty() {
            return "bot".into();
        }
        let mut out = Vec::new();
        for (k, v) in &self.entries {
            let vars: Vec<String> = v
                .0
                .iter()
                .zip(&p.vars)
                .map(|(iv, var)| format!("{}={iv}", var.name))
                .collect();
            out.push(format!("{k:?} {}", vars.join(" ")));
        }
        out.join("; ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(entries: &[(&[Loc], &[(i64, i64)])]) -> AbsElement<i64> {
        let mut a = AbsElement::bottom();
        for (locs, ivs) in entries {
            a.insert(
                locs.to_vec(),
                Env(ivs.iter().map(|&(l, h)| Interval::range(l, h)).collect()),
            );
        }
        a
    }

    #[test]
    fn meet_of_env_fragments() {
        let a = el(&[(&[0], &[(2, 4), (6, 8)])]);
        let b = el(&[(&[0], &[(2, 4), (7, 9)])]);
        assert_eq!(a.meet(&b), el(&[(&[0], &[(2, 4), (7, 8)])]));
    }

    #[test]
    fn meet_of_disjoint_locations_is_bottom() {
        let a = el(&[(&[0], &[(0, 1)])]);
        let b = el(&[(&[1], &[(0, 1)])]);
        assert!(a.meet(&b).is_bottom());
    }

    #[test]
    fn meet_drops_empty_entries() {
        let a = el(&[(&[0], &[(0, 1)]), (&[1], &[(0, 1)])]);
        let b = el(&[(&[0], &[(5, 6)]), (&[1], &[(1, 3)])]);
        assert_eq!(a.meet(&b), el(&[(&[1], &[(1, 1)])]));
    }

    #[test]
    fn leq_requires_every_entry() {
        let a = el(&[(&[0], &[(0, 1)]), (&[1], &[(0, 0)])]);
        let b = el(&[(&[0], &[(0, 5)])]);
        assert!(!a.leq(&b));
        assert!(b.leq(&a.join(&b)));
        assert!(AbsElement::bottom().leq(&b));
    }

    #[test]
    fn contains_checks_location_and_bounds() {
        let a = el(&[(&[3, 0], &[(0, 0), (0, 100)])]);
        let s = ConcreteState {
            locs: vec![3, 0],
            vals: vec![0, 57],
        };
        assert!(a.contains(&s));
        let t = ConcreteState {
            locs: vec![3, 0],
            vals: vec![0, 101],
        };
        assert!(!a.contains(&t));
        assert!(!AbsElement::<i64>::bottom().contains(&s));
    }

    #[test]
    fn widen_is_idempotent_on_stable_input() {
        let a = el(&[(&[0], &[(0, 1)])]);
        assert_eq!(a.widen(&a), a);
        let w = a.widen(&el(&[(&[0], &[(0, 2)])]));
        assert!(a.leq(&w));
        assert_eq!(w.get(&[0]).unwrap().0[0].hi(), &super::super::Bound::PosInf);
    }
}
