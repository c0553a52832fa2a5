//! Lexer, parser, name resolution and CFG lowering for the mini-language.
//!
//! ```text
//! program := item*
//! item    := "global" ID "=" INT ";" | "mutex" ID ";" | "thread" ID? "{" local* stmt* "}"
//! local   := "local" ID "=" INT ";"
//! stmt    := ID ("=" | "+=" | "-=") expr ";" | "havoc" "(" ID "," INT "," INT ")" ";"
//!          | ("assume" | "assert") "(" cond ")" ";" | ("lock" | "unlock") "(" ID ")" ";"
//!          | "skip" ";" | "if" "(" cond ")" block ("else" block)? | "while" "(" cond ")" block
//! ```
//!
//! Structured control is lowered to CFG edges guarded by `assume(c)` and
//! `assume(!c)`.

use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use super::ast::*;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: {msg}")]
    Semantic { pos: Pos, msg: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::Semantic { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: Pos,
    start: usize,
    end: usize,
}

const SYMBOLS: [&str; 22] = [
    "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "{", "}", "(", ")", ";", ",", "=", "<", ">",
    "+", "-", "*", "!", "/",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if bytes[*i] == b'\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if src[i..].starts_with("/*") {
            let pos = Pos { line, col };
            match src[i + 2..].find("*/") {
                Some(off) => advance(&mut i, &mut line, &mut col, off + 4),
                None => {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: "unterminated comment".into(),
                    })
                }
            }
            continue;
        }
        let pos = Pos { line, col };
        let start = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut j = i;
            while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                j += 1;
            }
            let text = src[i..j].to_string();
            advance(&mut i, &mut line, &mut col, j - start);
            out.push(Token {
                tok: Tok::Ident(text),
                pos,
                start,
                end: i,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            let text = src[i..j].to_string();
            advance(&mut i, &mut line, &mut col, j - start);
            out.push(Token {
                tok: Tok::Int(text),
                pos,
                start,
                end: i,
            });
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(&"/") => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: "division is not part of the language".into(),
                })
            }
            Some(s) => {
                advance(&mut i, &mut line, &mut col, s.len());
                out.push(Token {
                    tok: Tok::Sym(s),
                    pos,
                    start,
                    end: i,
                });
            }
            None => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    pos,
                    msg: format!("unexpected character '{ch}'"),
                });
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

// Unresolved syntax tree.

#[derive(Clone, Debug)]
struct Name {
    text: String,
    pos: Pos,
}

#[derive(Clone, Debug)]
struct Lit {
    text: String,
    pos: Pos,
}

#[derive(Clone, Debug)]
enum RExpr {
    Int(Lit),
    Name(Name),
    Neg(Box<RExpr>),
    Add(Box<RExpr>, Box<RExpr>),
    Sub(Box<RExpr>, Box<RExpr>),
    Mul(Box<RExpr>, Box<RExpr>),
}

#[derive(Clone, Debug)]
enum RCond {
    True,
    False,
    Cmp(CmpOp, RExpr, RExpr),
    And(Box<RCond>, Box<RCond>),
    Or(Box<RCond>, Box<RCond>),
    Not(Box<RCond>),
}

#[derive(Clone, Debug)]
enum RStmt {
    Assign(Name, RExpr),
    Havoc(Name, Lit, Lit),
    Assume(RCond),
    Assert(RCond, String),
    Lock(Name),
    Unlock(Name),
    Skip,
    If(RCond, Vec<(RStmt, Pos)>, Vec<(RStmt, Pos)>),
    While(RCond, Vec<(RStmt, Pos)>),
}

struct RThread {
    name: Option<Name>,
    pos: Pos,
    locals: Vec<(Name, Lit)>,
    body: Vec<(RStmt, Pos)>,
}

#[derive(Default)]
struct RProgram {
    globals: Vec<(Name, Lit)>,
    mutexes: Vec<Name>,
    threads: Vec<RThread>,
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<Token>,
    at: usize,
}

impl<'s> Parser<'s> {
    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<X>(&self, msg: impl Into<String>) -> Result<X, ParseError> {
        let t = self.peek();
        let found = match &t.tok {
            Tok::Ident(s) | Tok::Int(s) => format!("'{s}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        };
        Err(ParseError::Syntax {
            pos: t.pos,
            msg: format!("expected {}, found {found}", msg.into()),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<Token, ParseError> {
        if self.is_sym(s) {
            Ok(self.bump())
        } else {
            self.err(format!("'{s}'"))
        }
    }


    fn ident(&mut self) -> Result<Name, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if !is_keyword(s) => {
                let text = s.clone();
                let pos = self.bump().pos;
                Ok(Name { text, pos })
            }
            _ => self.err("identifier"),
        }
    }

    fn signed_lit(&mut self) -> Result<Lit, ParseError> {
        let pos = self.peek().pos;
        let neg = self.eat_sym("-");
        match &self.peek().tok {
            Tok::Int(s) => {
                let text = if neg { format!("-{s}") } else { s.clone() };
                self.bump();
                Ok(Lit { text, pos })
            }
            _ => self.err("integer literal"),
        }
    }

    fn program(&mut self) -> Result<RProgram, ParseError> {
        let mut prog = RProgram::default();
        loop {
            if matches!(self.peek().tok, Tok::Eof) {
                break;
            }
            if self.is_kw("global") {
                self.bump();
                let name = self.ident()?;
                self.expect_sym("=")?;
                let lit = self.signed_lit()?;
                self.expect_sym(";")?;
                prog.globals.push((name, lit));
            } else if self.is_kw("mutex") {
                self.bump();
                let name = self.ident()?;
                self.expect_sym(";")?;
                prog.mutexes.push(name);
            } else if self.is_kw("thread") {
                let pos = self.bump().pos;
                let name = if self.is_sym("{") {
                    None
                } else {
                    Some(self.ident()?)
                };
                self.expect_sym("{")?;
                let mut locals = Vec::new();
                while self.is_kw("local") {
                    self.bump();
                    let n = self.ident()?;
                    self.expect_sym("=")?;
                    let lit = self.signed_lit()?;
                    self.expect_sym(";")?;
                    locals.push((n, lit));
                }
                let mut body = Vec::new();
                while !self.is_sym("}") {
                    if matches!(self.peek().tok, Tok::Eof) {
                        return self.err("'}'");
                    }
                    body.push(self.stmt()?);
                }
                self.expect_sym("}")?;
                prog.threads.push(RThread {
                    name,
                    pos,
                    locals,
                    body,
                });
            } else {
                return self.err("'global', 'mutex' or 'thread'");
            }
        }
        Ok(prog)
    }

    fn block(&mut self) -> Result<Vec<(RStmt, Pos)>, ParseError> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.is_sym("}") {
            if matches!(self.peek().tok, Tok::Eof) {
                return self.err("'}'");
            }
            out.push(self.stmt()?);
        }
        self.expect_sym("}")?;
        Ok(out)
    }

    fn paren_cond(&mut self) -> Result<(RCond, String), ParseError> {
        let open = self.expect_sym("(")?;
        let c = self.cond()?;
        let close = self.expect_sym(")")?;
        let text = self.src[open.end..close.start].trim().to_string();
        Ok((c, text))
    }

    fn stmt(&mut self) -> Result<(RStmt, Pos), ParseError> {
        let pos = self.peek().pos;
        let kw = match &self.peek().tok {
            Tok::Ident(s) => s.clone(),
            _ => return self.err("statement"),
        };
        let stmt = match kw.as_str() {
            "skip" => {
                self.bump();
                self.expect_sym(";")?;
                RStmt::Skip
            }
            "havoc" => {
                self.bump();
                self.expect_sym("(")?;
                let v = self.ident()?;
                self.expect_sym(",")?;
                let lo = self.signed_lit()?;
                self.expect_sym(",")?;
                let hi = self.signed_lit()?;
                self.expect_sym(")")?;
                self.expect_sym(";")?;
                RStmt::Havoc(v, lo, hi)
            }
            "assume" => {
                self.bump();
                let (c, _) = self.paren_cond()?;
                self.expect_sym(";")?;
                RStmt::Assume(c)
            }
            "assert" => {
                self.bump();
                let (c, text) = self.paren_cond()?;
                self.expect_sym(";")?;
                RStmt::Assert(c, text)
            }
            "lock" | "unlock" => {
                self.bump();
                self.expect_sym("(")?;
                let m = self.ident()?;
                self.expect_sym(")")?;
                self.expect_sym(";")?;
                if kw == "lock" {
                    RStmt::Lock(m)
                } else {
                    RStmt::Unlock(m)
                }
            }
            "if" => {
                self.bump();
                let (c, _) = self.paren_cond()?;
                let then = self.block()?;
                let els = if self.is_kw("else") {
                    self.bump();
                    if self.is_kw("if") {
                        vec![self.stmt()?]
                    } else {
                        self.block()?
                    }
                } else {
                    Vec::new()
                };
                RStmt::If(c, then, els)
            }
            "while" => {
                self.bump();
                let (c, _) = self.paren_cond()?;
                let body = self.block()?;
                RStmt::While(c, body)
            }
            _ => {
                let target = self.ident()?;
                let rhs = if self.eat_sym("=") {
                    self.expr()?
                } else if self.eat_sym("+=") {
                    let e = self.expr()?;
                    RExpr::Add(Box::new(RExpr::Name(target.clone())), Box::new(e))
                } else if self.eat_sym("-=") {
                    let e = self.expr()?;
                    RExpr::Sub(Box::new(RExpr::Name(target.clone())), Box::new(e))
                } else {
                    return self.err("'=', '+=' or '-='");
                };
                self.expect_sym(";")?;
                RStmt::Assign(target, rhs)
            }
        };
        Ok((stmt, pos))
    }

    fn cond(&mut self) -> Result<RCond, ParseError> {
        let mut lhs = self.cond_and()?;
        while self.eat_sym("||") {
            let rhs = self.cond_and()?;
            lhs = RCond::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cond_and(&mut self) -> Result<RCond, ParseError> {
        let mut lhs = self.cond_not()?;
        while self.eat_sym("&&") {
            let rhs = self.cond_not()?;
            lhs = RCond::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cond_not(&mut self) -> Result<RCond, ParseError> {
        if self.eat_sym("!") {
            return Ok(RCond::Not(Box::new(self.cond_not()?)));
        }
        if self.is_kw("true") {
            self.bump();
            return Ok(RCond::True);
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(RCond::False);
        }
        if self.is_sym("(") {
            // Either a parenthesised condition or a parenthesised expression
            // starting a comparison; try the condition first.
            let save = self.at;
            self.bump();
            if let Ok(c) = self.cond() {
                if self.eat_sym(")") && !self.at_cmp_op() {
                    return Ok(c);
                }
            }
            self.at = save;
        }
        let lhs = self.expr()?;
        let op = match &self.peek().tok {
            Tok::Sym("==") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return self.err("comparison operator"),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(RCond::Cmp(op, lhs, rhs))
    }

    fn at_cmp_op(&self) -> bool {
        ["==", "!=", "<", "<=", ">", ">=", "+", "-", "*"]
            .iter()
            .any(|s| self.is_sym(s))
    }

    fn expr(&mut self) -> Result<RExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_sym("+") {
                lhs = RExpr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_sym("-") {
                lhs = RExpr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<RExpr, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat_sym("*") {
            lhs = RExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<RExpr, ParseError> {
        // `-INT` is a single negative literal so printed constants re-parse unchanged.
        if self.is_sym("-") {
            if let Tok::Int(s) = &self.toks[self.at + 1].tok {
                let lit = Lit {
                    text: format!("-{s}"),
                    pos: self.peek().pos,
                };
                self.bump();
                self.bump();
                return Ok(RExpr::Int(lit));
            }
        }
        if self.eat_sym("-") {
            return Ok(RExpr::Neg(Box::new(self.unary()?)));
        }
        match &self.peek().tok {
            Tok::Int(s) => {
                let lit = Lit {
                    text: s.clone(),
                    pos: self.peek().pos,
                };
                self.bump();
                Ok(RExpr::Int(lit))
            }
            Tok::Ident(s) if !is_keyword(s) => Ok(RExpr::Name(self.ident()?)),
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => self.err("expression"),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "global"
            | "mutex"
            | "thread"
            | "local"
            | "havoc"
            | "assume"
            | "assert"
            | "lock"
            | "unlock"
            | "if"
            | "else"
            | "while"
            | "skip"
            | "true"
            | "false"
    )
}

fn semantic<X>(pos: Pos, msg: impl Into<String>) -> Result<X, ParseError> {
    Err(ParseError::Semantic {
        pos,
        msg: msg.into(),
    })
}

fn parse_lit<T: Scalar>(lit: &Lit) -> Result<T, ParseError> {
    lit.text.parse::<T>().or_else(|_| {
        semantic(
            lit.pos,
            format!("integer literal {} does not fit the scalar type", lit.text),
        )
    })
}

struct Resolver<'p, T> {
    vars: Vec<Var<T>>,
    mutexes: Vec<Mutex>,
    globals: HashMap<&'p str, VarId>,
    mutex_names: HashMap<&'p str, MutexId>,
    locals: HashMap<&'p str, VarId>,
    asserts: Vec<AssertInfo>,
    thread: ThreadId,
}

impl<'p, T: Scalar> Resolver<'p, T> {
    fn var(&self, n: &Name) -> Result<VarId, ParseError> {
        if let Some(&v) = self.locals.get(n.text.as_str()) {
            return Ok(v);
        }
        if let Some(&v) = self.globals.get(n.text.as_str()) {
            return Ok(v);
        }
        if self.mutex_names.contains_key(n.text.as_str()) {
            return semantic(
                n.pos,
                format!("mutex '{}' used as a variable; use lock/unlock", n.text),
            );
        }
        semantic(n.pos, format!("undeclared variable '{}'", n.text))
    }

    fn expr(&self, e: &RExpr) -> Result<Expr<T>, ParseError> {
        Ok(match e {
            RExpr::Int(l) => Expr::Const(parse_lit(l)?),
            RExpr::Name(n) => Expr::Var(self.var(n)?),
            RExpr::Neg(a) => Expr::Neg(Box::new(self.expr(a)?)),
            RExpr::Add(a, b) => Expr::Add(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
            RExpr::Sub(a, b) => Expr::Sub(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
            RExpr::Mul(a, b) => Expr::Mul(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
        })
    }

    fn cond(&self, c: &RCond) -> Result<Cond<T>, ParseError> {
        Ok(match c {
            RCond::True => Cond::True,
            RCond::False => Cond::False,
            RCond::Cmp(op, a, b) => Cond::Cmp(*op, self.expr(a)?, self.expr(b)?),
            RCond::And(a, b) => Cond::And(Box::new(self.cond(a)?), Box::new(self.cond(b)?)),
            RCond::Or(a, b) => Cond::Or(Box::new(self.cond(a)?), Box::new(self.cond(b)?)),
            RCond::Not(a) => Cond::Not(Box::new(self.cond(a)?)),
        })
    }

    fn mutex(&self, n: &Name) -> Result<MutexId, ParseError> {
        match self.mutex_names.get(n.text.as_str()) {
            Some(&m) => Ok(m),
            None => semantic(n.pos, format!("undeclared mutex '{}'", n.text)),
        }
    }

    fn block(&mut self, body: &[(RStmt, Pos)]) -> Result<Vec<SrcStmt<T>>, ParseError> {
        body.iter().map(|(s, pos)| self.stmt(s, *pos)).collect()
    }

    fn stmt(&mut self, s: &RStmt, pos: Pos) -> Result<SrcStmt<T>, ParseError> {
        let simple = |st| Ok(SrcStmt::Simple(st, pos));
        match s {
            RStmt::Assign(n, e) => simple(Stmt::Assign(self.var(n)?, self.expr(e)?)),
            RStmt::Havoc(n, lo, hi) => {
                let (lo_v, hi_v): (T, T) = (parse_lit(lo)?, parse_lit(hi)?);
                if lo_v > hi_v {
                    return semantic(lo.pos, format!("havoc bounds {lo_v} > {hi_v}"));
                }
                simple(Stmt::Havoc(self.var(n)?, lo_v, hi_v))
            }
            RStmt::Assume(c) => simple(Stmt::Assume(self.cond(c)?)),
            RStmt::Assert(c, text) => {
                let id = AssertId(self.asserts.len());
                let cond = self.cond(c)?;
                self.asserts.push(AssertInfo {
                    id,
                    thread: self.thread,
                    pos,
                    text: text.clone(),
                });
                simple(Stmt::Assert(cond, id))
            }
            RStmt::Lock(m) => simple(Stmt::Lock(self.mutex(m)?)),
            RStmt::Unlock(m) => simple(Stmt::Unlock(self.mutex(m)?)),
            RStmt::Skip => simple(Stmt::Skip),
            RStmt::If(c, a, b) => Ok(SrcStmt::If(self.cond(c)?, self.block(a)?, self.block(b)?)),
            RStmt::While(c, b) => Ok(SrcStmt::While(self.cond(c)?, self.block(b)?)),
        }
    }
}

/// Builds a thread CFG backwards from its exit so that empty branches need no
/// extra edges.
struct CfgBuilder<T> {
    next: u32,
    edges: Vec<(u32, Stmt<T>, u32)>,
}

impl<T: Scalar> CfgBuilder<T> {
    fn fresh(&mut self) -> u32 {
        self.next += 1;
        self.next - 1
    }

    fn seq(&mut self, body: &[SrcStmt<T>], exit: u32) -> u32 {
        body.iter().rev().fold(exit, |to, s| self.stmt(s, to))
    }

    fn stmt(&mut self, s: &SrcStmt<T>, exit: u32) -> u32 {
        match s {
            SrcStmt::Simple(st, _) => {
                let entry = self.fresh();
                self.edges.push((entry, st.clone(), exit));
                entry
            }
            SrcStmt::If(c, a, b) => {
                let then_entry = self.seq(a, exit);
                let else_entry = self.seq(b, exit);
                let entry = self.fresh();
                self.edges.push((entry, Stmt::Assume(c.clone()), then_entry));
                self.edges.push((entry, Stmt::Assume(c.negated()), else_entry));
                entry
            }
            SrcStmt::While(c, body) => {
                let head = self.fresh();
                let body_entry = self.seq(body, head);
                self.edges.push((head, Stmt::Assume(c.clone()), body_entry));
                self.edges.push((head, Stmt::Assume(c.negated()), exit));
                head
            }
        }
    }
}

/// Lowers a thread body; returns the number of locations and edges with
/// locations renumbered in breadth-first order from the entry (= 0).
fn lower<T: Scalar>(body: &[SrcStmt<T>]) -> (u32, Vec<(Loc, Stmt<T>, Loc)>) {
    let mut b = CfgBuilder {
        next: 0,
        edges: Vec::new(),
    };
    let exit = b.fresh();
    let entry = b.seq(body, exit);
    let mut succ: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, (src, _, _)) in b.edges.iter().enumerate() {
        succ.entry(*src).or_default().push(i);
    }
    // Edges are pushed after their targets are built, so outgoing edges of a
    // location appear in reverse source order; restore source order.
    for v in succ.values_mut() {
        v.sort();
    }
    let mut renum: HashMap<u32, Loc> = HashMap::new();
    let mut queue = VecDeque::from([entry]);
    renum.insert(entry, 0);
    while let Some(l) = queue.pop_front() {
        for &ei in succ.get(&l).into_iter().flatten() {
            let dst = b.edges[ei].2;
            if !renum.contains_key(&dst) {
                let n = renum.len() as Loc;
                renum.insert(dst, n);
                queue.push_back(dst);
            }
        }
    }
    let mut edges: Vec<(usize, Loc, Stmt<T>, Loc)> = b
        .edges
        .into_iter()
        .enumerate()
        .filter(|(_, (s, _, _))| renum.contains_key(s))
        .map(|(i, (s, st, d))| (i, renum[&s], st, renum[&d]))
        .collect();
    edges.sort_by_key(|(i, s, _, _)| (*s, *i));
    let n = renum.len() as u32;
    (n, edges.into_iter().map(|(_, s, st, d)| (s, st, d)).collect())
}

/// Parses a program. Deterministic: equal text gives an equal `Program`.
pub fn parse_program<T: Scalar>(text: &str) -> Result<Program<T>, ParseError> {
    let toks = lex(text)?;
    let raw = Parser {
        src: text,
        toks,
        at: 0,
    }
    .program()?;

    let mut r: Resolver<'_, T> = Resolver {
        vars: Vec::new(),
        mutexes: Vec::new(),
        globals: HashMap::new(),
        mutex_names: HashMap::new(),
        locals: HashMap::new(),
        asserts: Vec::new(),
        thread: 0,
    };
    for (name, lit) in &raw.globals {
        if r.globals.contains_key(name.text.as_str()) {
            return semantic(name.pos, format!("duplicate global '{}'", name.text));
        }
        let init = parse_lit(lit)?;
        r.globals.insert(name.text.as_str(), r.vars.len());
        r.vars.push(Var {
            name: name.text.clone(),
            scope: Scope::Global,
            init,
        });
    }
    for name in &raw.mutexes {
        if r.mutex_names.contains_key(name.text.as_str())
            || r.globals.contains_key(name.text.as_str())
        {
            return semantic(name.pos, format!("duplicate name '{}'", name.text));
        }
        let m = r.mutexes.len();
        r.mutex_names.insert(name.text.as_str(), m);
        r.mutexes.push(Mutex {
            name: name.text.clone(),
            ghost: r.vars.len(),
        });
        r.vars.push(Var {
            name: name.text.clone(),
            scope: Scope::Ghost(m),
            init: T::zero(),
        });
    }
    if raw.threads.is_empty() {
        return semantic(Pos { line: 1, col: 1 }, "program declares no thread");
    }

    let mut thread_names: HashMap<&str, ()> = HashMap::new();
    let mut threads = Vec::new();
    let mut edges = Vec::new();
    for (tid, rt) in raw.threads.iter().enumerate() {
        if let Some(n) = &rt.name {
            if thread_names.insert(n.text.as_str(), ()).is_some() {
                return semantic(n.pos, format!("duplicate thread '{}'", n.text));
            }
        }
        r.thread = tid;
        r.locals.clear();
        let mut locals = Vec::new();
        for (name, lit) in &rt.locals {
            if r.locals.contains_key(name.text.as_str()) {
                return semantic(name.pos, format!("duplicate local '{}'", name.text));
            }
            if r.globals.contains_key(name.text.as_str())
                || r.mutex_names.contains_key(name.text.as_str())
            {
                return semantic(
                    name.pos,
                    format!("local '{}' clashes with a global name", name.text),
                );
            }
            let init = parse_lit(lit)?;
            r.locals.insert(name.text.as_str(), r.vars.len());
            locals.push(r.vars.len());
            r.vars.push(Var {
                name: name.text.clone(),
                scope: Scope::Local(tid),
                init,
            });
        }
        let body = r.block(&rt.body)?;
        let (num_locs, cfg_edges) = lower(&body);
        let mut ids = Vec::new();
        for (src, stmt, dst) in cfg_edges {
            ids.push(edges.len());
            edges.push(Edge {
                id: edges.len(),
                thread: tid,
                src,
                stmt,
                dst,
            });
        }
        let _ = rt.pos;
        threads.push(ThreadCfg {
            id: tid,
            name: rt.name.as_ref().map(|n| n.text.clone()),
            locals,
            num_locs,
            edges: ids,
            body,
        });
    }

    Ok(Program {
        vars: r.vars,
        mutexes: r.mutexes,
        threads,
        edges,
        asserts: r.asserts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let p: Program<i64> = parse_program("global g=0; thread { skip; }").unwrap();
        assert_eq!(p.threads.len(), 1);
        assert_eq!(p.edges.len(), 1);
        assert_eq!(p.vars.iter().filter(|v| v.scope == Scope::Global).count(), 1);
        assert_eq!(p.edges[0].stmt, Stmt::Skip);
        assert_eq!((p.edges[0].src, p.edges[0].dst), (0, 1));
    }

    #[test]
    fn undeclared_variable_is_a_semantic_error() {
        let err = parse_program::<i64>("thread { x = 1; }").unwrap_err();
        assert!(matches!(err, ParseError::Semantic { .. }), "{err}");
        assert!(err.to_string().contains("undeclared variable 'x'"));
        assert_eq!(err.pos(), Pos { line: 1, col: 10 });
    }

    #[test]
    fn duplicate_thread_name() {
        let err = parse_program::<i64>("thread a { skip; } thread a { skip; }").unwrap_err();
        assert!(err.to_string().contains("duplicate thread 'a'"), "{err}");
    }

    #[test]
    fn syntax_error_reports_line_and_column() {
        let err = parse_program::<i64>("global g = 0;\nthread { g = ; }").unwrap_err();
        match err {
            ParseError::Syntax { pos, .. } => assert_eq!(pos, Pos { line: 2, col: 14 }),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn havoc_bounds_must_be_ordered() {
        let err = parse_program::<i64>("global g = 0; thread { havoc(g, 3, 1); }").unwrap_err();
        assert!(err.to_string().contains("havoc bounds"));
    }

    #[test]
    fn division_is_rejected() {
        assert!(parse_program::<i64>("global g = 0; thread { g = g / 2; }").is_err());
    }

    #[test]
    fn while_loop_lowers_to_guarded_edges() {
        let p: Program<i64> =
            parse_program("thread { local i = 0; while (i < 3) { i = i + 1; } skip; }").unwrap();
        // head -assume(i<3)-> body -i=i+1-> head ; head -assume(!(i<3))-> skip -> exit
        assert_eq!(p.edges.len(), 4);
        let head = &p.edges[0];
        assert_eq!(head.src, 0);
        assert!(matches!(head.stmt, Stmt::Assume(Cond::Cmp(CmpOp::Lt, _, _))));
        let back = p
            .edges
            .iter()
            .find(|e| matches!(e.stmt, Stmt::Assign(..)))
            .unwrap();
        assert_eq!(back.dst, 0);
    }

    #[test]
    fn parenthesised_conditions_and_expressions() {
        let p: Program<i64> = parse_program(
            "global x = 0; thread { assume((x + 1) * 2 > 3 && !(x == 2 || (x) < -1)); }",
        )
        .unwrap();
        assert_eq!(p.edges.len(), 1);
    }

    #[test]
    fn parsing_is_deterministic() {
        let src = "global g = 0; mutex m; thread { local i = 0; lock(m); g += i; unlock(m); }";
        let a: Program<i64> = parse_program(src).unwrap();
        let b: Program<i64> = parse_program(src).unwrap();
        assert_eq!(a, b);
    }
}
