use std::fmt;

use crate::Scalar;

pub type VarId = usize;
pub type ThreadId = usize;
pub type MutexId = usize;
pub type EdgeId = usize;
/// Control location inside one thread's CFG. Location 0 is the entry.
pub type Loc = u32;

/// Identifier of an `assert` statement, dense in source order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AssertId(pub usize);

impl fmt::Display for AssertId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", self.0)
    }
}

/// 1-based line/column in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr<T> {
    Const(T),
    Var(VarId),
    Neg(Box<Expr<T>>),
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
}

impl<T> Expr<T> {
    pub fn vars(&self, out: &mut Vec<VarId>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => out.push(*v),
            Expr::Neg(a) => a.vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds<T: Ord>(self, l: &T, r: &T) -> bool {
        match self {
            CmpOp::Eq => l == r,
            CmpOp::Ne => l != r,
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
            CmpOp::Gt => l > r,
            CmpOp::Ge => l >= r,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cond<T> {
    True,
    False,
    Cmp(CmpOp, Expr<T>, Expr<T>),
    And(Box<Cond<T>>, Box<Cond<T>>),
    Or(Box<Cond<T>>, Box<Cond<T>>),
    Not(Box<Cond<T>>),
}

impl<T: Clone> Cond<T> {
    pub fn vars(&self, out: &mut Vec<VarId>) {
        match self {
            Cond::True | Cond::False => {}
            Cond::Cmp(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Cond::And(a, b) | Cond::Or(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Cond::Not(a) => a.vars(out),
        }
    }

    pub fn negated(&self) -> Cond<T> {
        Cond::Not(Box::new(self.clone()))
    }

    /// Negation normal form: `Not` only ever disappears into comparisons.
    pub fn nnf(&self) -> Cond<T> {
        self.nnf_with(false)
    }

    fn nnf_with(&self, neg: bool) -> Cond<T> {
        match (self, neg) {
            (Cond::True, false) | (Cond::False, true) => Cond::True,
            (Cond::True, true) | (Cond::False, false) => Cond::False,
            (Cond::Cmp(op, a, b), _) => {
                let op = if neg { op.negate() } else { *op };
                Cond::Cmp(op, a.clone(), b.clone())
            }
            (Cond::And(a, b), false) => {
                Cond::And(Box::new(a.nnf_with(false)), Box::new(b.nnf_with(false)))
            }
            (Cond::And(a, b), true) => {
                Cond::Or(Box::new(a.nnf_with(true)), Box::new(b.nnf_with(true)))
            }
            (Cond::Or(a, b), false) => {
                Cond::Or(Box::new(a.nnf_with(false)), Box::new(b.nnf_with(false)))
            }
            (Cond::Or(a, b), true) => {
                Cond::And(Box::new(a.nnf_with(true)), Box::new(b.nnf_with(true)))
            }
            (Cond::Not(a), _) => a.nnf_with(!neg),
        }
    }
}

/// One atomic statement; every CFG edge carries exactly one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stmt<T> {
    Assign(VarId, Expr<T>),
    Havoc(VarId, T, T),
    Assume(Cond<T>),
    Assert(Cond<T>, AssertId),
    Lock(MutexId),
    Unlock(MutexId),
    Skip,
    /// `assume(guard); var = value;` executed as one step. Produced by
    /// [`desugar_mutexes`](crate::lang::desugar_mutexes).
    Guarded {
        guard: Cond<T>,
        var: VarId,
        value: Expr<T>,
    },
}

/// Structured source statement, kept next to the CFG so programs can be
/// printed back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SrcStmt<T> {
    Simple(Stmt<T>, Pos),
    If(Cond<T>, Vec<SrcStmt<T>>, Vec<SrcStmt<T>>),
    While(Cond<T>, Vec<SrcStmt<T>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scope {
    Global,
    Local(ThreadId),
    /// Lock-state variable of a mutex; 0 when free, `t + 1` when held by thread `t`.
    Ghost(MutexId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Var<T> {
    pub name: String,
    pub scope: Scope,
    pub init: T,
}

impl<T> Var<T> {
    /// Globals and mutex ghosts are shared between threads.
    pub fn is_shared(&self) -> bool {
        !matches!(self.scope, Scope::Local(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mutex {
    pub name: String,
    pub ghost: VarId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge<T> {
    pub id: EdgeId,
    pub thread: ThreadId,
    pub src: Loc,
    pub stmt: Stmt<T>,
    pub dst: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreadCfg<T> {
    pub id: ThreadId,
    pub name: Option<String>,
    pub locals: Vec<VarId>,
    pub num_locs: u32,
    /// Edge ids owned by this thread, ordered by source location.
    pub edges: Vec<EdgeId>,
    pub body: Vec<SrcStmt<T>>,
}

impl<T> ThreadCfg<T> {
    pub const ENTRY: Loc = 0;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssertInfo {
    pub id: AssertId,
    pub thread: ThreadId,
    pub pos: Pos,
    pub text: String,
}

/// A parsed concurrent program: shared variables, mutexes, and one CFG per thread.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program<T> {
    pub vars: Vec<Var<T>>,
    pub mutexes: Vec<Mutex>,
    pub threads: Vec<ThreadCfg<T>>,
    pub edges: Vec<Edge<T>>,
    pub asserts: Vec<AssertInfo>,
}

impl<T: Scalar> Program<T> {
    pub fn num_threads(&self) -> usize {
        self.threads.len()
    }

    pub fn var_named(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Thread-local variable lookup; `var_named` finds the first match only.
    pub fn local_named(&self, thread: ThreadId, name: &str) -> Option<VarId> {
        self.threads[thread]
            .locals
            .iter()
            .copied()
            .find(|&v| self.vars[v].name == name)
    }

    pub fn edges_of(&self, thread: ThreadId) -> impl Iterator<Item = &Edge<T>> {
        self.threads[thread].edges.iter().map(move |&e| &self.edges[e])
    }

    pub fn outgoing(&self, thread: ThreadId, loc: Loc) -> impl Iterator<Item = &Edge<T>> {
        self.edges_of(thread).filter(move |e| e.src == loc)
    }

    pub fn assert_info(&self, id: AssertId) -> &AssertInfo {
        &self.asserts[id.0]
    }

    pub fn has_mutex_statements(&self) -> bool {
        self.edges
            .iter()
            .any(|e| matches!(e.stmt, Stmt::Lock(_) | Stmt::Unlock(_)))
    }

    /// Renders a statement with source variable names.
    pub fn stmt_text(&self, stmt: &Stmt<T>) -> String {
        crate::lang::print::stmt_to_string(self, stmt)
    }
}
