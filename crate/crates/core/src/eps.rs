//! Costs of the form `a + b·ε` with `ε` a formal positive infinitesimal.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use num_traits::Zero;

use crate::costfn::CostValue;
use crate::rational::{self, Rational};

/// `a + b·ε`, compared lexicographically on `(a, b)`.
///
/// When `a` is unbounded the `ε` part is normalized to zero so that all
/// unbounded values compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EpsCost {
    a: CostValue,
    b: Rational,
}

impl EpsCost {
    pub fn new(a: CostValue, b: Rational) -> Self {
        if a.is_finite() {
            EpsCost { a, b }
        } else {
            EpsCost::unbounded()
        }
    }

    pub fn zero() -> Self {
        EpsCost::new(CostValue::zero(), rational::zero())
    }

    pub fn unbounded() -> Self {
        EpsCost {
            a: CostValue::Unbounded,
            b: rational::zero(),
        }
    }

    /// `a + b·ε` from integers; test and example shorthand.
    pub fn ints(a: i64, b: i64) -> Self {
        EpsCost::new(CostValue::int(a), rational::int(b))
    }

    pub fn finite_part(&self) -> &CostValue {
        &self.a
    }

    pub fn eps_part(&self) -> &Rational {
        &self.b
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite()
    }

    /// Marginal `self - earlier` for `earlier <= self` along a monotone cost
    /// curve. Any step that lands on an unbounded value is itself unbounded.
    pub fn marginal_over(&self, earlier: &EpsCost) -> EpsCost {
        match (&self.a, &earlier.a) {
            (CostValue::Finite(a), CostValue::Finite(a0)) => {
                EpsCost::new(CostValue::Finite(a - a0), &self.b - &earlier.b)
            }
            _ => EpsCost::unbounded(),
        }
    }

    pub fn max(self, other: EpsCost) -> EpsCost {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl From<CostValue> for EpsCost {
    fn from(a: CostValue) -> Self {
        EpsCost::new(a, rational::zero())
    }
}

impl PartialOrd for EpsCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EpsCost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.a.cmp(&other.a).then_with(|| self.b.cmp(&other.b))
    }
}

impl Add for &EpsCost {
    type Output = EpsCost;

    fn add(self, rhs: &EpsCost) -> EpsCost {
        EpsCost::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl Add for EpsCost {
    type Output = EpsCost;

    fn add(self, rhs: EpsCost) -> EpsCost {
        &self + &rhs
    }
}

impl Mul<&Rational> for &EpsCost {
    type Output = EpsCost;

    fn mul(self, factor: &Rational) -> EpsCost {
        EpsCost::new(self.a.scale(factor), &self.b * factor)
    }
}

impl std::iter::Sum for EpsCost {
    fn sum<I: Iterator<Item = EpsCost>>(iter: I) -> Self {
        iter.fold(EpsCost::zero(), |acc, x| &acc + &x)
    }
}

impl<'a> std::iter::Sum<&'a EpsCost> for EpsCost {
    fn sum<I: Iterator<Item = &'a EpsCost>>(iter: I) -> Self {
        iter.fold(EpsCost::zero(), |acc, x| &acc + x)
    }
}

impl fmt::Display for EpsCost {
    /// `a` alone when the ε part vanishes, otherwise `a + b·eps`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} + {}·eps", self.a, rational::format(&self.b))
        }
    }
}
