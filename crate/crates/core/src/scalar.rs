use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, Signed, ToPrimitive};

/// Integer type the analyzer is generic over.
///
/// Both the concrete semantics and the interval domain use checked arithmetic:
/// the interval domain saturates an overflowing bound to the matching infinity,
/// the concrete semantics reports the overflow. With an arbitrary-precision
/// scalar (`BigInt`) neither ever happens.
pub trait Scalar:
    Signed
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Clone
    + Ord
    + Hash
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Signed
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromPrimitive
        + ToPrimitive
        + FromStr
        + Clone
        + Ord
        + Hash
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn takes_scalar<T: Scalar>(v: i64) -> T {
        T::from_i64(v).unwrap() + T::one()
    }

    #[test]
    fn machine_and_exact_integers_are_scalars() {
        assert_eq!(takes_scalar::<i64>(41), 42);
        assert_eq!(takes_scalar::<BigInt>(41), BigInt::from(42));
    }
}
