//! Pretty-printer. Output of [`program_to_string`] parses back to a program
//! with the same variables, CFG edges and assertions.

use std::fmt::Write;

use super::ast::*;
use crate::Scalar;

fn expr_prec<T: Scalar>(p: &Program<T>, e: &Expr<T>, prec: u8, out: &mut String) {
    let (my, paren) = match e {
        Expr::Add(..) | Expr::Sub(..) => (1, prec > 1),
        Expr::Mul(..) => (2, prec > 2),
        _ => (3, false),
    };
    if paren {
        out.push('(');
    }
    match e {
        Expr::Const(c) => {
            let _ = write!(out, "{c}");
        }
        Expr::Var(v) => out.push_str(&p.vars[*v].name),
        Expr::Neg(a) => {
            out.push_str("-(");
            expr_prec(p, a, 0, out);
            out.push(')');
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            let op = match e {
                Expr::Add(..) => " + ",
                Expr::Sub(..) => " - ",
                _ => " * ",
            };
            expr_prec(p, a, my, out);
            out.push_str(op);
            expr_prec(p, b, my + 1, out);
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn expr_to_string<T: Scalar>(p: &Program<T>, e: &Expr<T>) -> String {
    let mut s = String::new();
    expr_prec(p, e, 0, &mut s);
    s
}

fn cond_prec<T: Scalar>(p: &Program<T>, c: &Cond<T>, prec: u8, out: &mut String) {
    let (my, paren) = match c {
        Cond::Or(..) => (1, prec > 1),
        Cond::And(..) => (2, prec > 2),
        _ => (3, false),
    };
    if paren {
        out.push('(');
    }
    match c {
        Cond::True => out.push_str("true"),
        Cond::False => out.push_str("false"),
        Cond::Cmp(op, a, b) => {
            expr_prec(p, a, 0, out);
            let _ = write!(out, " {} ", op.symbol());
            expr_prec(p, b, 0, out);
        }
        Cond::And(a, b) | Cond::Or(a, b) => {
            let op = if matches!(c, Cond::And(..)) {
                " && "
            } else {
                " || "
            };
            cond_prec(p, a, my, out);
            out.push_str(op);
            cond_prec(p, b, my + 1, out);
        }
        Cond::Not(a) => {
            out.push_str("!(");
            cond_prec(p, a, 0, out);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn cond_to_string<T: Scalar>(p: &Program<T>, c: &Cond<T>) -> String {
    let mut s = String::new();
    cond_prec(p, c, 0, &mut s);
    s
}

/// Single-line rendering of one atomic statement, without a trailing `;`.
pub fn stmt_to_string<T: Scalar>(p: &Program<T>, s: &Stmt<T>) -> String {
    match s {
        Stmt::Assign(v, e) => format!("{} = {}", p.vars[*v].name, expr_to_string(p, e)),
        Stmt::Havoc(v, lo, hi) => format!("havoc({}, {lo}, {hi})", p.vars[*v].name),
        Stmt::Assume(c) => format!("assume({})", cond_to_string(p, c)),
        Stmt::Assert(c, _) => format!("assert({})", cond_to_string(p, c)),
        Stmt::Lock(m) => format!("lock({})", p.mutexes[*m].name),
        Stmt::Unlock(m) => format!("unlock({})", p.mutexes[*m].name),
        Stmt::Skip => "skip".to_string(),
        Stmt::Guarded { guard, var, value } => format!(
            "<assume({}); {} = {}>",
            cond_to_string(p, guard),
            p.vars[*var].name,
            expr_to_string(p, value)
        ),
    }
}

fn block<T: Scalar>(p: &Program<T>, body: &[SrcStmt<T>], depth: usize, out: &mut String) {
    let pad = "    ".repeat(depth);
    for s in body {
        match s {
            SrcStmt::Simple(st, _) => {
                let _ = writeln!(out, "{pad}{};", stmt_to_string(p, st));
            }
            SrcStmt::If(c, a, b) => {
                let _ = writeln!(out, "{pad}if ({}) {{", cond_to_string(p, c));
                block(p, a, depth + 1, out);
                if b.is_empty() {
                    let _ = writeln!(out, "{pad}}}");
                } else {
                    let _ = writeln!(out, "{pad}}} else {{");
                    block(p, b, depth + 1, out);
                    let _ = writeln!(out, "{pad}}}");
                }
            }
            SrcStmt::While(c, b) => {
                let _ = writeln!(out, "{pad}while ({}) {{", cond_to_string(p, c));
                block(p, b, depth + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

pub fn program_to_string<T: Scalar>(p: &Program<T>) -> String {
    let mut out = String::new();
    for v in p.vars.iter().filter(|v| v.scope == Scope::Global) {
        let _ = writeln!(out, "global {} = {};", v.name, v.init);
    }
    for m in &p.mutexes {
        let _ = writeln!(out, "mutex {};", m.name);
    }
    for t in &p.threads {
        match &t.name {
            Some(n) => {
                let _ = writeln!(out, "\nthread {n} {{");
            }
            None => out.push_str("\nthread {\n"),
        }
        for &l in &t.locals {
            let v = &p.vars[l];
            let _ = writeln!(out, "    local {} = {};", v.name, v.init);
        }
        block(p, &t.body, 1, &mut out);
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn roundtrip(src: &str) {
        let a: Program<i64> = parse_program(src).unwrap();
        let text = program_to_string(&a);
        let b: Program<i64> = parse_program(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(a.vars, b.vars);
        assert_eq!(a.mutexes, b.mutexes);
        assert_eq!(a.edges, b.edges);
        assert_eq!(program_to_string(&b), text);
    }

    #[test]
    fn print_parse_roundtrip() {
        roundtrip(
            "global g = -2; mutex m;
             thread t1 { local i = 0; lock(m); g += i * (i - 1); unlock(m);
                         if (g < 3 || !(i == 0) && g != -1) { skip; } else { havoc(i, -1, 4); } }
             thread { local j = 5; while (j > 0) { j -= 1; } assert(g - (j - 1) <= 10); }",
        );
    }

    #[test]
    fn negative_literals_and_negation() {
        roundtrip("global g = 0; thread { g = -(g) - -3; g = -(g + 1) * 2; }");
    }

    #[test]
    fn statement_text() {
        let p: Program<i64> =
            parse_program("global g = 0; thread { local i = 0; g = g + i; }").unwrap();
        assert_eq!(p.stmt_text(&p.edges[0].stmt), "g = g + i");
    }
}
