use super::ast::*;
use crate::Scalar;

fn lock_stmt<T: Scalar>(p: &Program<T>, thread: ThreadId, s: &Stmt<T>) -> Option<Stmt<T>> {
    let owner = || Expr::Const(T::from_usize(thread + 1).expect("thread id fits the scalar"));
    match s {
        Stmt::Lock(m) => {
            let g = p.mutexes[*m].ghost;
            Some(Stmt::Guarded {
                guard: Cond::Cmp(CmpOp::Eq, Expr::Var(g), Expr::Const(T::zero())),
                var: g,
                value: owner(),
            })
        }
        Stmt::Unlock(m) => {
            let g = p.mutexes[*m].ghost;
            Some(Stmt::Guarded {
                guard: Cond::Cmp(CmpOp::Eq, Expr::Var(g), owner()),
                var: g,
                value: Expr::Const(T::zero()),
            })
        }
        _ => None,
    }
}

fn desugar_body<T: Scalar>(p: &Program<T>, thread: ThreadId, body: &[SrcStmt<T>]) -> Vec<SrcStmt<T>> {
    body.iter()
        .map(|s| match s {
            SrcStmt::Simple(st, pos) => {
                SrcStmt::Simple(lock_stmt(p, thread, st).unwrap_or_else(|| st.clone()), *pos)
            }
            SrcStmt::If(c, a, b) => SrcStmt::If(
                c.clone(),
                desugar_body(p, thread, a),
                desugar_body(p, thread, b),
            ),
            SrcStmt::While(c, b) => SrcStmt::While(c.clone(), desugar_body(p, thread, b)),
        })
        .collect()
}

/// Replaces `lock(m)` in thread `i` by the atomic `assume(m == 0); m = i + 1`
/// and `unlock(m)` by `assume(m == i + 1); m = 0`, acting on the mutex's
/// ghost variable. Programs without mutex statements come back unchanged.
pub fn desugar_mutexes<T: Scalar>(p: &Program<T>) -> Program<T> {
    let mut out = p.clone();
    for e in &mut out.edges {
        if let Some(s) = lock_stmt(p, e.thread, &e.stmt) {
            e.stmt = s;
        }
    }
    for t in &mut out.threads {
        t.body = desugar_body(p, t.id, &t.body);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    #[test]
    fn identity_without_mutexes() {
        let p: Program<i64> = parse_program("global g = 0; thread { g = g + 1; }").unwrap();
        assert_eq!(desugar_mutexes(&p), p);
    }

    #[test]
    fn lock_becomes_guarded_assignment() {
        let p: Program<i64> =
            parse_program("mutex m; thread { lock(m); unlock(m); } thread { lock(m); }").unwrap();
        let d = desugar_mutexes(&p);
        assert!(!d.has_mutex_statements());
        assert_eq!(d.stmt_text(&d.edges[0].stmt), "<assume(m == 0); m = 1>");
        assert_eq!(d.stmt_text(&d.edges[1].stmt), "<assume(m == 1); m = 0>");
        assert_eq!(d.stmt_text(&d.edges[2].stmt), "<assume(m == 0); m = 2>");
    }
}
