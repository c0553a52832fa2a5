use std::cmp::{max, min};
use std::fmt;

use crate::Scalar;

/// Interval endpoint. The derived order puts `NegInf` below every finite
/// value and `PosInf` above.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Scalar> Bound<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    fn neg(&self) -> Option<Bound<T>> {
        Some(match self {
            Bound::NegInf => Bound::PosInf,
            Bound::PosInf => Bound::NegInf,
            Bound::Finite(v) => Bound::Finite(T::zero().checked_sub(v)?),
        })
    }

    /// Sum of two bounds on the same side. `None` on finite overflow.
    fn add(&self, o: &Bound<T>) -> Option<Bound<T>> {
        Some(match (self, o) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a.checked_add(b)?),
            (Bound::NegInf, Bound::PosInf) | (Bound::PosInf, Bound::NegInf) => {
                unreachable!("interval invariants rule out opposite infinities")
            }
            (Bound::NegInf, _) | (_, Bound::NegInf) => Bound::NegInf,
            _ => Bound::PosInf,
        })
    }

    /// Product with `0 * inf = 0`. `None` on finite overflow.
    fn mul(&self, o: &Bound<T>) -> Option<Bound<T>> {
        let sign = |b: &Bound<T>| match b {
            Bound::NegInf => -1,
            Bound::PosInf => 1,
            Bound::Finite(v) if v.is_zero() => 0,
            Bound::Finite(v) if v.is_negative() => -1,
            Bound::Finite(_) => 1,
        };
        Some(match (self, o) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a.checked_mul(b)?),
            _ => match sign(self) * sign(o) {
                0 => Bound::Finite(T::zero()),
                s if s > 0 => Bound::PosInf,
                _ => Bound::NegInf,
            },
        })
    }
}

impl<T: fmt::Display> fmt::Display for Bound<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => write!(f, "-oo"),
            Bound::PosInf => write!(f, "+oo"),
            Bound::Finite(v) => write!(f, "{v}"),
        }
    }
}

/// Non-empty integer interval. Emptiness is expressed by `Option::None` from
/// the operations that can produce it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval<T> {
    lo: Bound<T>,
    hi: Bound<T>,
}

impl<T: Scalar> Interval<T> {
    /// `None` when `lo > hi` or a bound sits on the wrong infinity.
    pub fn new(lo: Bound<T>, hi: Bound<T>) -> Option<Self> {
        if lo == Bound::PosInf || hi == Bound::NegInf || lo > hi {
            None
        } else {
            Some(Interval { lo, hi })
        }
    }

    pub fn range(lo: T, hi: T) -> Self {
        Self::new(Bound::Finite(lo), Bound::Finite(hi)).expect("lo <= hi")
    }

    pub fn singleton(v: T) -> Self {
        Interval {
            lo: Bound::Finite(v.clone()),
            hi: Bound::Finite(v),
        }
    }

    pub fn top() -> Self {
        Interval {
            lo: Bound::NegInf,
            hi: Bound::PosInf,
        }
    }

    pub fn lo(&self) -> &Bound<T> {
        &self.lo
    }

    pub fn hi(&self) -> &Bound<T> {
        &self.hi
    }

    pub fn as_singleton(&self) -> Option<&T> {
        match (&self.lo, &self.hi) {
            (Bound::Finite(a), Bound::Finite(b)) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn contains(&self, v: &T) -> bool {
        let b = Bound::Finite(v.clone());
        self.lo <= b && b <= self.hi
    }

    pub fn leq(&self, o: &Self) -> bool {
        o.lo <= self.lo && self.hi <= o.hi
    }

    pub fn join(&self, o: &Self) -> Self {
        Interval {
            lo: min(&self.lo, &o.lo).clone(),
            hi: max(&self.hi, &o.hi).clone(),
        }
    }

    pub fn meet(&self, o: &Self) -> Option<Self> {
        Self::new(max(&self.lo, &o.lo).clone(), min(&self.hi, &o.hi).clone())
    }

    /// Standard widening: bounds that moved jump to the matching infinity.
    pub fn widen(&self, next: &Self) -> Self {
        Interval {
            lo: if next.lo < self.lo {
                Bound::NegInf
            } else {
                self.lo.clone()
            },
            hi: if next.hi > self.hi {
                Bound::PosInf
            } else {
                self.hi.clone()
            },
        }
    }

    /// Standard narrowing: only infinite bounds are replaced.
    pub fn narrow(&self, next: &Self) -> Self {
        let lo = if self.lo == Bound::NegInf {
            next.lo.clone()
        } else {
            self.lo.clone()
        };
        let hi = if self.hi == Bound::PosInf {
            next.hi.clone()
        } else {
            self.hi.clone()
        };
        Self::new(lo, hi).unwrap_or_else(|| self.clone())
    }

    pub fn neg(&self) -> Self {
        Interval {
            lo: self.hi.neg().unwrap_or(Bound::NegInf),
            hi: self.lo.neg().unwrap_or(Bound::PosInf),
        }
    }

    /// Overflowing bounds saturate outwards.
    pub fn add(&self, o: &Self) -> Self {
        Interval {
            lo: self.lo.add(&o.lo).unwrap_or(Bound::NegInf),
            hi: self.hi.add(&o.hi).unwrap_or(Bound::PosInf),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Any overflowing corner product gives top.
    pub fn mul(&self, o: &Self) -> Self {
        let mut corners = Vec::with_capacity(4);
        for a in [&self.lo, &self.hi] {
            for b in [&o.lo, &o.hi] {
                match a.mul(b) {
                    Some(c) => corners.push(c),
                    None => return Self::top(),
                }
            }
        }
        Interval {
            lo: corners.iter().min().cloned().expect("four corners"),
            hi: corners.into_iter().max().expect("four corners"),
        }
    }

    /// `[lo, hi]` shifted by a small constant; `None` if it leaves the scalar range.
    pub(crate) fn shift_hi_down(&self) -> Option<Bound<T>> {
        match &self.hi {
            Bound::Finite(v) => v.checked_sub(&T::one()).map(Bound::Finite),
            b => Some(b.clone()),
        }
    }

    pub(crate) fn shift_lo_up(&self) -> Option<Bound<T>> {
        match &self.lo {
            Bound::Finite(v) => v.checked_add(&T::one()).map(Bound::Finite),
            b => Some(b.clone()),
        }
    }
}

impl<T: fmt::Display> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: i64, hi: i64) -> Interval<i64> {
        Interval::range(lo, hi)
    }

    #[test]
    fn join_meet() {
        assert_eq!(iv(0, 100).join(&iv(0, 150)), iv(0, 150));
        assert_eq!(iv(6, 8).meet(&iv(7, 9)), Some(iv(7, 8)));
        assert_eq!(iv(0, 1).meet(&iv(2, 3)), None);
    }

    #[test]
    fn widening() {
        let w = iv(0, 1).widen(&iv(0, 2));
        assert_eq!(w, Interval::new(Bound::Finite(0), Bound::PosInf).unwrap());
        assert_eq!(iv(3, 5).widen(&iv(3, 5)), iv(3, 5));
        assert_eq!(iv(3, 5).widen(&iv(2, 5)).lo(), &Bound::NegInf);
    }

    #[test]
    fn narrowing_only_touches_infinite_bounds() {
        let a = Interval::new(Bound::Finite(0), Bound::PosInf).unwrap();
        assert_eq!(a.narrow(&iv(0, 100)), iv(0, 100));
        assert_eq!(iv(0, 200).narrow(&iv(0, 100)), iv(0, 200));
    }

    #[test]
    fn arithmetic() {
        assert_eq!(iv(0, 0).add(&iv(0, 100)), iv(0, 100));
        assert_eq!(iv(1, 2).sub(&iv(0, 5)), iv(-4, 2));
        assert_eq!(iv(-2, 3).mul(&iv(4, 5)), iv(-10, 15));
        assert_eq!(iv(2, 4).neg(), iv(-4, -2));
        let pos = Interval::new(Bound::Finite(0), Bound::PosInf).unwrap();
        assert_eq!(iv(0, 0).mul(&pos), iv(0, 0));
        assert_eq!(iv(-1, 1).mul(&pos), Interval::top());
    }

    #[test]
    fn overflow_saturates() {
        let big = iv(i64::MAX - 1, i64::MAX);
        let s = big.add(&iv(1, 1));
        assert_eq!(s.hi(), &Bound::PosInf);
        assert_eq!(s.lo(), &Bound::Finite(i64::MAX));
        assert_eq!(big.mul(&iv(2, 2)), Interval::top());
        assert_eq!(iv(i64::MIN, 0).neg().hi(), &Bound::PosInf);
    }
}
