//! Concrete interleaving semantics: states, enabledness, and successor
//! computation for one CFG edge.

use thiserror::Error;

use super::ast::*;
use crate::Scalar;

/// One location per thread plus a value for every declared variable
/// (globals, locals of all threads, mutex ghosts).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConcreteState<T> {
    pub locs: Vec<Loc>,
    pub vals: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("edge {0} is not enabled")]
    NotEnabled(EdgeId),
    #[error("arithmetic overflow evaluating edge {0}")]
    Overflow(EdgeId),
}

/// Successors of a state under one edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step<T> {
    pub successors: Vec<ConcreteState<T>>,
    /// Set when the edge is an assertion whose condition is false here.
    pub violated: Option<AssertId>,
}

pub fn initial_state<T: Scalar>(p: &Program<T>) -> ConcreteState<T> {
    ConcreteState {
        locs: vec![0; p.num_threads()],
        vals: p.vars.iter().map(|v| v.init.clone()).collect(),
    }
}

/// `None` on overflow of the scalar type.
pub fn eval_expr<T: Scalar>(e: &Expr<T>, vals: &[T]) -> Option<T> {
    match e {
        Expr::Const(c) => Some(c.clone()),
        Expr::Var(v) => Some(vals[*v].clone()),
        Expr::Neg(a) => T::zero().checked_sub(&eval_expr(a, vals)?),
        Expr::Add(a, b) => eval_expr(a, vals)?.checked_add(&eval_expr(b, vals)?),
        Expr::Sub(a, b) => eval_expr(a, vals)?.checked_sub(&eval_expr(b, vals)?),
        Expr::Mul(a, b) => eval_expr(a, vals)?.checked_mul(&eval_expr(b, vals)?),
    }
}

pub fn eval_cond<T: Scalar>(c: &Cond<T>, vals: &[T]) -> Option<bool> {
    Some(match c {
        Cond::True => true,
        Cond::False => false,
        Cond::Cmp(op, a, b) => op.holds(&eval_expr(a, vals)?, &eval_expr(b, vals)?),
        Cond::And(a, b) => eval_cond(a, vals)? && eval_cond(b, vals)?,
        Cond::Or(a, b) => eval_cond(a, vals)? || eval_cond(b, vals)?,
        Cond::Not(a) => !eval_cond(a, vals)?,
    })
}

fn lock_owner<T: Scalar>(thread: ThreadId) -> T {
    T::from_usize(thread + 1).expect("thread id fits the scalar")
}

/// Whether `e` can fire at `s`, ignoring its location.
fn guard_holds<T: Scalar>(p: &Program<T>, s: &ConcreteState<T>, e: &Edge<T>) -> Result<bool, StepError> {
    let ov = || StepError::Overflow(e.id);
    Ok(match &e.stmt {
        Stmt::Assume(c) => eval_cond(c, &s.vals).ok_or_else(ov)?,
        Stmt::Guarded { guard, .. } => eval_cond(guard, &s.vals).ok_or_else(ov)?,
        Stmt::Lock(m) => s.vals[p.mutexes[*m].ghost].is_zero(),
        Stmt::Unlock(m) => s.vals[p.mutexes[*m].ghost] == lock_owner(e.thread),
        Stmt::Assign(..) | Stmt::Havoc(..) | Stmt::Assert(..) | Stmt::Skip => true,
    })
}

pub fn is_enabled<T: Scalar>(p: &Program<T>, s: &ConcreteState<T>, e: &Edge<T>) -> Result<bool, StepError> {
    Ok(s.locs[e.thread] == e.src && guard_holds(p, s, e)?)
}

/// Edges enabled at `s`, in edge-id order. Assertions never block.
pub fn enabled<T: Scalar>(p: &Program<T>, s: &ConcreteState<T>) -> Result<Vec<EdgeId>, StepError> {
    let mut out = Vec::new();
    for t in 0..p.num_threads() {
        for e in p.outgoing(t, s.locs[t]) {
            if guard_holds(p, s, e)? {
                out.push(e.id);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

pub fn concrete_step<T: Scalar>(p: &Program<T>, s: &ConcreteState<T>, edge: EdgeId) -> Result<Step<T>, StepError> {
    let e = &p.edges[edge];
    if !is_enabled(p, s, e)? {
        return Err(StepError::NotEnabled(edge));
    }
    let ov = || StepError::Overflow(edge);
    let mut next = s.clone();
    next.locs[e.thread] = e.dst;
    let mut violated = None;
    let successors = match &e.stmt {
        Stmt::Assign(v, x) => {
            next.vals[*v] = eval_expr(x, &s.vals).ok_or_else(ov)?;
            vec![next]
        }
        Stmt::Guarded { var, value, .. } => {
            next.vals[*var] = eval_expr(value, &s.vals).ok_or_else(ov)?;
            vec![next]
        }
        Stmt::Havoc(v, lo, hi) => {
            let mut out = Vec::new();
            let mut x = lo.clone();
            while x <= *hi {
                let mut n = next.clone();
                n.vals[*v] = x.clone();
                out.push(n);
                x = x + T::one();
            }
            out
        }
        Stmt::Lock(m) => {
            next.vals[p.mutexes[*m].ghost] = lock_owner(e.thread);
            vec![next]
        }
        Stmt::Unlock(m) => {
            next.vals[p.mutexes[*m].ghost] = T::zero();
            vec![next]
        }
        Stmt::Assert(c, id) => {
            if !eval_cond(c, &s.vals).ok_or_else(ov)? {
                violated = Some(*id);
            }
            vec![next]
        }
        Stmt::Assume(_) | Stmt::Skip => vec![next],
    };
    Ok(Step { successors, violated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{desugar_mutexes, parse_program};

    const FIG1: &str = "global g = 0;
        thread { local i = 0; local c = 0; havoc(c, 0, 1);
                 while (c == 1 && i < 100) { i = i + 1; havoc(c, 0, 1); } g = g + i; }
        thread { local j = 0; local c = 0; havoc(c, 0, 1);
                 while (c == 1 && j < 150) { j = j + 1; havoc(c, 0, 1); } g = g + j; assert(g <= 250); }";

    #[test]
    fn fig1_initial_enables_both_first_edges() {
        let p: Program<i64> = parse_program(FIG1).unwrap();
        let s = initial_state(&p);
        let en = enabled(&p, &s).unwrap();
        let threads: Vec<_> = en.iter().map(|&e| p.edges[e].thread).collect();
        assert_eq!(threads, vec![0, 1]);
    }

    #[test]
    fn assign_and_havoc() {
        let p: Program<i64> = parse_program("global g = 0; thread { g = g + 1; havoc(g, 0, 2); }").unwrap();
        let s = initial_state(&p);
        let st = concrete_step(&p, &s, 0).unwrap();
        assert_eq!(st.successors.len(), 1);
        assert_eq!(st.successors[0].vals[0], 1);
        let st2 = concrete_step(&p, &st.successors[0], 1).unwrap();
        assert_eq!(st2.successors.len(), 3);
    }

    #[test]
    fn false_assume_is_disabled() {
        let p: Program<i64> = parse_program("global x = 1; thread { assume(x == 0); }").unwrap();
        let s = initial_state(&p);
        assert!(enabled(&p, &s).unwrap().is_empty());
        assert_eq!(concrete_step(&p, &s, 0), Err(StepError::NotEnabled(0)));
    }

    #[test]
    fn failing_assert_continues_and_records() {
        let p: Program<i64> = parse_program("global g = 300; thread { assert(g <= 250); skip; }").unwrap();
        let st = concrete_step(&p, &initial_state(&p), 0).unwrap();
        assert_eq!(st.violated, Some(AssertId(0)));
        assert_eq!(st.successors.len(), 1);
        assert_eq!(st.successors[0].locs, vec![1]);
    }

    #[test]
    fn finished_thread_has_no_edges() {
        let p: Program<i64> = parse_program("thread { skip; } thread { skip; }").unwrap();
        let mut s = initial_state(&p);
        s.locs[0] = 1;
        let en = enabled(&p, &s).unwrap();
        assert!(en.iter().all(|&e| p.edges[e].thread == 1));
    }

    #[test]
    fn desugared_locks_do_not_commute_from_free_state() {
        let p: Program<i64> =
            desugar_mutexes(&parse_program("mutex m; thread { lock(m); } thread { lock(m); }").unwrap());
        let s = initial_state(&p);
        assert_eq!(enabled(&p, &s).unwrap(), vec![0, 1]);
        let after0 = &concrete_step(&p, &s, 0).unwrap().successors[0];
        // Once thread 0 holds m, thread 1's lock is disabled: the pair fails
        // the enabledness clause and cannot be swapped.
        assert!(!is_enabled(&p, after0, &p.edges[1]).unwrap());
        let after1 = &concrete_step(&p, &s, 1).unwrap().successors[0];
        assert!(!is_enabled(&p, after1, &p.edges[0]).unwrap());
    }

    #[test]
    fn overflow_is_reported() {
        let p: Program<i64> =
            parse_program("global g = 9223372036854775807; thread { g = g + 1; }").unwrap();
        assert_eq!(concrete_step(&p, &initial_state(&p), 0), Err(StepError::Overflow(0)));
    }
}
