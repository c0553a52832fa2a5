//! The concurrent mini-language: syntax, parser, CFGs and concrete semantics.

mod ast;
mod desugar;
mod parser;
pub mod print;
mod semantics;

pub use ast::*;
pub use desugar::desugar_mutexes;
pub use parser::{parse_program, ParseError};
pub use print::program_to_string;
pub use semantics::{
    concrete_step, enabled, eval_cond, eval_expr, initial_state, is_enabled, ConcreteState, Step,
    StepError,
};
