//! Lattices, analysis instances, the interval domain and the collecting
//! semantics.

mod collecting;
mod element;
mod instance;
mod interval;
mod lattice;
mod transfer;

pub use collecting::{collecting_apply, CollectingInstance, StateSet};
pub use element::{AbsElement, Env};
pub use instance::{FnInstance, IntervalInstance};
pub use interval::{Bound, Interval};
pub use lattice::{AnalysisInstance, Lattice, TlaOutcome, TransformerId};
pub use transfer::{apply_edge, assert_may_fail, edge_may_fail, eval_interval, refine, stmt_post};
