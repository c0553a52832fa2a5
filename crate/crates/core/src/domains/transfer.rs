//! Interval semantics of statements: expression evaluation, non-relational
//! condition refinement, and edge transformers over [`AbsElement`].

use super::element::{AbsElement, Env};
use super::interval::{Bound, Interval};
use crate::lang::{CmpOp, Cond, Edge, Expr, Program, Stmt};
use crate::Scalar;

/// Rounds of refinement for one conjunction before giving up on a fixpoint.
const AND_ROUNDS: usize = 16;

pub fn eval_interval<T: Scalar>(e: &Expr<T>, env: &Env<T>) -> Interval<T> {
    match e {
        Expr::Const(c) => Interval::singleton(c.clone()),
        Expr::Var(v) => env.0[*v].clone(),
        Expr::Neg(a) => eval_interval(a, env).neg(),
        Expr::Add(a, b) => eval_interval(a, env).add(&eval_interval(b, env)),
        Expr::Sub(a, b) => eval_interval(a, env).sub(&eval_interval(b, env)),
        Expr::Mul(a, b) => eval_interval(a, env).mul(&eval_interval(b, env)),
    }
}

/// Narrows `env` so that `e` evaluates inside `target`; `None` when impossible.
fn backward<T: Scalar>(e: &Expr<T>, target: &Interval<T>, env: &mut Env<T>) -> Option<()> {
    match e {
        Expr::Const(c) => target.contains(c).then_some(()),
        Expr::Var(v) => {
            env.0[*v] = env.0[*v].meet(target)?;
            Some(())
        }
        Expr::Neg(a) => backward(a, &target.neg(), env),
        Expr::Add(a, b) => {
            let (ia, ib) = (eval_interval(a, env), eval_interval(b, env));
            backward(a, &ia.meet(&target.sub(&ib))?, env)?;
            backward(b, &ib.meet(&target.sub(&ia))?, env)
        }
        Expr::Sub(a, b) => {
            let (ia, ib) = (eval_interval(a, env), eval_interval(b, env));
            backward(a, &ia.meet(&target.add(&ib))?, env)?;
            backward(b, &ib.meet(&ia.sub(target))?, env)
        }
        Expr::Mul(..) => eval_interval(e, env).meet(target).map(|_| ()),
    }
}

fn refine_cmp<T: Scalar>(op: CmpOp, a: &Expr<T>, b: &Expr<T>, env: &Env<T>) -> Option<Env<T>> {
    let (ia, ib) = (eval_interval(a, env), eval_interval(b, env));
    let (ta, tb) = match op {
        CmpOp::Eq => {
            let m = ia.meet(&ib)?;
            (m.clone(), m)
        }
        CmpOp::Ne => {
            let cut = |x: &Interval<T>, y: &Interval<T>| -> Option<Interval<T>> {
                match y.as_singleton() {
                    Some(c) if x.lo() == &Bound::Finite(c.clone()) => {
                        Interval::new(x.shift_lo_up()?, x.hi().clone())
                    }
                    Some(c) if x.hi() == &Bound::Finite(c.clone()) => {
                        Interval::new(x.lo().clone(), x.shift_hi_down()?)
                    }
                    _ => Some(x.clone()),
                }
            };
            (cut(&ia, &ib)?, cut(&ib, &ia)?)
        }
        CmpOp::Le => (
            ia.meet(&Interval::new(Bound::NegInf, ib.hi().clone())?)?,
            ib.meet(&Interval::new(ia.lo().clone(), Bound::PosInf)?)?,
        ),
        CmpOp::Lt => (
            ia.meet(&Interval::new(Bound::NegInf, ib.shift_hi_down()?)?)?,
            ib.meet(&Interval::new(ia.shift_lo_up()?, Bound::PosInf)?)?,
        ),
        CmpOp::Ge => return refine_cmp(CmpOp::Le, b, a, env),
        CmpOp::Gt => return refine_cmp(CmpOp::Lt, b, a, env),
    };
    let mut out = env.clone();
    backward(a, &ta, &mut out)?;
    backward(b, &tb, &mut out)?;
    Some(out)
}

fn refine_nnf<T: Scalar>(c: &Cond<T>, env: &Env<T>) -> Option<Env<T>> {
    match c {
        Cond::True => Some(env.clone()),
        Cond::False => None,
        Cond::Cmp(op, a, b) => refine_cmp(*op, a, b, env),
        Cond::And(a, b) => {
            let mut cur = env.clone();
            for _ in 0..AND_ROUNDS {
                let next = refine_nnf(b, &refine_nnf(a, &cur)?)?;
                if next == cur {
                    break;
                }
                cur = next;
            }
            Some(cur)
        }
        Cond::Or(a, b) => match (refine_nnf(a, env), refine_nnf(b, env)) {
            (Some(x), Some(y)) => Some(x.join(&y)),
            (x, y) => x.or(y),
        },
        Cond::Not(_) => unreachable!("condition is in negation normal form"),
    }
}

/// Over-approximates the environments satisfying `c`; `None` if none can.
pub fn refine<T: Scalar>(c: &Cond<T>, env: &Env<T>) -> Option<Env<T>> {
    refine_nnf(&c.nnf(), env)
}

fn assign<T: Scalar>(env: &Env<T>, var: usize, value: Interval<T>) -> Env<T> {
    let mut out = env.clone();
    out.0[var] = value;
    out
}

/// Post-environment of one statement. Assertions do not refine: the concrete
/// semantics keeps running after a failed assertion.
pub fn stmt_post<T: Scalar>(p: &Program<T>, thread: usize, s: &Stmt<T>, env: &Env<T>) -> Option<Env<T>> {
    let owner = || Interval::singleton(T::from_usize(thread + 1).expect("thread id fits"));
    match s {
        Stmt::Assign(v, e) => Some(assign(env, *v, eval_interval(e, env))),
        Stmt::Havoc(v, lo, hi) => Some(assign(env, *v, Interval::range(lo.clone(), hi.clone()))),
        Stmt::Assume(c) => refine(c, env),
        Stmt::Assert(..) | Stmt::Skip => Some(env.clone()),
        Stmt::Guarded { guard, var, value } => {
            let r = refine(guard, env)?;
            let v = eval_interval(value, &r);
            Some(assign(&r, *var, v))
        }
        Stmt::Lock(m) => {
            let g = p.mutexes[*m].ghost;
            env.0[g].meet(&Interval::singleton(T::zero()))?;
            Some(assign(env, g, owner()))
        }
        Stmt::Unlock(m) => {
            let g = p.mutexes[*m].ghost;
            env.0[g].meet(&owner())?;
            Some(assign(env, g, Interval::singleton(T::zero())))
        }
    }
}

/// Whether assertion `c` may fail on some state of `env`.
pub fn assert_may_fail<T: Scalar>(c: &Cond<T>, env: &Env<T>) -> bool {
    refine(&c.negated(), env).is_some()
}

/// The abstract transformer of `edge`: selects entries at the edge's source,
/// runs the statement, advances the thread, and joins colliding targets.
pub fn apply_edge<T: Scalar>(p: &Program<T>, edge: &Edge<T>, d: &AbsElement<T>) -> AbsElement<T> {
    let mut out = AbsElement::bottom();
    for (locs, env) in d.entries() {
        if locs[edge.thread] != edge.src {
            continue;
        }
        if let Some(post) = stmt_post(p, edge.thread, &edge.stmt, env) {
            let mut l = locs.clone();
            l[edge.thread] = edge.dst;
            out.insert_join(l, post);
        }
    }
    out
}

/// Whether the assertion on `edge` may fail at some entry of `d`.
pub fn edge_may_fail<T: Scalar>(edge: &Edge<T>, d: &AbsElement<T>) -> bool {
    let Stmt::Assert(c, _) = &edge.stmt else {
        return false;
    };
    d.entries()
        .iter()
        .any(|(locs, env)| locs[edge.thread] == edge.src && assert_may_fail(c, env))
}
