//! Static analysis of shared-memory concurrent programs by unfolding an
//! abstract domain into a prime event structure.
//!
//! The core is generic over the integer [`Scalar`]; the root aliases fix it
//! to `i64` (default) or `BigInt` (`Big*`).

pub mod domains;
pub mod dot;
pub mod indep;
pub mod lang;
pub mod oracle;
pub mod pes;
pub mod unfolder;
mod scalar;

pub use num_bigint::BigInt;
pub use scalar::Scalar;

pub type Program = lang::Program<i64>;
pub type BigProgram = lang::Program<BigInt>;
pub type Interval = domains::Interval<i64>;
pub type BigInterval = domains::Interval<BigInt>;
pub type AbsElement = domains::AbsElement<i64>;
pub type BigAbsElement = domains::AbsElement<BigInt>;
pub type IntervalInstance = domains::IntervalInstance<i64>;
pub type BigIntervalInstance = domains::IntervalInstance<BigInt>;
