//! Per-load edge cost functions.
//!
//! A [`CostTable`] stores `c(0), c(1), ..., c(L)` exactly. Capacitated edges
//! are expressed with [`CostValue::Unbounded`] entries past their capacity.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::rational::{self, Rational};

/// A cost that is either an exact non-negative rational or unbounded.
///
/// `Finite` sorts before `Unbounded`, so the derived order is the one we want.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CostValue {
    Finite(Rational),
    Unbounded,
}

impl CostValue {
    pub fn zero() -> Self {
        CostValue::Finite(rational::zero())
    }

    pub fn int(value: i64) -> Self {
        CostValue::Finite(rational::int(value))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, CostValue::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            CostValue::Finite(r) => Some(r),
            CostValue::Unbounded => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, CostValue::Finite(r) if num_traits::Zero::is_zero(r))
    }

    /// Multiplies a finite value by `factor`; unbounded stays unbounded.
    pub fn scale(&self, factor: &Rational) -> Self {
        match self {
            CostValue::Finite(r) => CostValue::Finite(r * factor),
            CostValue::Unbounded => CostValue::Unbounded,
        }
    }

    /// Parses `"inf"` or a rational.
    pub fn parse(text: &str) -> Result<Self, rational::ParseRationalError> {
        let trimmed = text.trim();
        if trimmed.eq_ignore_ascii_case("inf") {
            Ok(CostValue::Unbounded)
        } else {
            rational::parse(trimmed).map(CostValue::Finite)
        }
    }
}

impl fmt::Display for CostValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostValue::Finite(r) => f.write_str(&rational::format(r)),
            CostValue::Unbounded => f.write_str("inf"),
        }
    }
}

impl From<Rational> for CostValue {
    fn from(value: Rational) -> Self {
        CostValue::Finite(value)
    }
}

impl std::ops::Add for &CostValue {
    type Output = CostValue;

    fn add(self, rhs: &CostValue) -> CostValue {
        match (self, rhs) {
            (CostValue::Finite(a), CostValue::Finite(b)) => CostValue::Finite(a + b),
            _ => CostValue::Unbounded,
        }
    }
}

impl std::iter::Sum for CostValue {
    fn sum<I: Iterator<Item = CostValue>>(iter: I) -> Self {
        iter.fold(CostValue::zero(), |acc, x| &acc + &x)
    }
}

impl<'a> std::iter::Sum<&'a CostValue> for CostValue {
    fn sum<I: Iterator<Item = &'a CostValue>>(iter: I) -> Self {
        iter.fold(CostValue::zero(), |acc, x| &acc + x)
    }
}

/// Why a candidate table is not a valid cost function.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("table is empty")]
    Empty,
    #[error("index 0: cost at zero load must be 0, found {0}")]
    NonZeroAtZero(CostValue),
    #[error("index {index}: negative cost {value}")]
    Negative { index: usize, value: CostValue },
    #[error("index {index}: cost decreases from {prev} to {value}")]
    Decreasing {
        index: usize,
        prev: CostValue,
        value: CostValue,
    },
}

impl Violation {
    /// Index of the first offending entry.
    pub fn index(&self) -> usize {
        match self {
            Violation::Empty | Violation::NonZeroAtZero(_) => 0,
            Violation::Negative { index, .. } | Violation::Decreasing { index, .. } => *index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error("load {load} exceeds the table horizon {horizon}")]
    OutOfRange { load: usize, horizon: usize },
}

/// Checks every [`CostTable`] invariant and reports the first violation.
pub fn validate(values: &[CostValue]) -> Result<(), Violation> {
    let first = values.first().ok_or(Violation::Empty)?;
    if !first.is_zero() {
        return Err(Violation::NonZeroAtZero(first.clone()));
    }
    for (index, value) in values.iter().enumerate().skip(1) {
        if let CostValue::Finite(r) = value {
            if rational::is_negative(r) {
                return Err(Violation::Negative {
                    index,
                    value: value.clone(),
                });
            }
        }
        let prev = &values[index - 1];
        if value.cmp(prev) == Ordering::Less {
            return Err(Violation::Decreasing {
                index,
                prev: prev.clone(),
                value: value.clone(),
            });
        }
    }
    Ok(())
}

/// A validated non-decreasing cost function on loads `0..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostTable {
    values: Vec<CostValue>,
}

impl CostTable {
    pub fn new(values: Vec<CostValue>) -> Result<Self, Violation> {
        validate(&values)?;
        Ok(CostTable { values })
    }

    /// Integer-valued table; convenient in tests and generators.
    pub fn from_ints(values: &[i64]) -> Result<Self, Violation> {
        Self::new(values.iter().map(|&v| CostValue::int(v)).collect())
    }

    /// Parses the serialized form: decimal rationals or `"inf"`.
    pub fn parse<S: AsRef<str>>(entries: &[S]) -> Result<Self, TableParseError> {
        let values = entries
            .iter()
            .enumerate()
            .map(|(index, s)| {
                CostValue::parse(s.as_ref()).map_err(|source| TableParseError::Entry { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(values)?)
    }

    /// Largest load the table is defined for.
    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[CostValue] {
        &self.values
    }

    pub fn eval(&self, load: usize) -> Result<&CostValue, CostError> {
        self.values.get(load).ok_or(CostError::OutOfRange {
            load,
            horizon: self.horizon(),
        })
    }

    /// Like [`eval`](Self::eval) but panics past the horizon. Callers that
    /// bound loads by the network horizon use this in inner loops.
    pub fn at(&self, load: usize) -> &CostValue {
        &self.values[load]
    }

    /// Multiplies every finite entry by a positive factor.
    pub fn scale(&self, factor: &Rational) -> CostTable {
        assert!(
            *factor > rational::zero(),
            "cost tables may only be scaled by a positive factor"
        );
        CostTable {
            values: self.values.iter().map(|v| v.scale(factor)).collect(),
        }
    }

    /// Serialized entries, inverse of [`parse`](Self::parse).
    pub fn to_strings(&self) -> Vec<String> {
        self.values.iter().map(|v| v.to_string()).collect()
    }

    /// Same table cut or padded (with its last value) to a new horizon.
    pub fn with_horizon(&self, horizon: usize) -> CostTable {
        let last = self.values.last().cloned().expect("non-empty");
        let mut values: Vec<CostValue> = self.values.iter().take(horizon + 1).cloned().collect();
        values.resize(horizon + 1, last);
        CostTable { values }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableParseError {
    #[error("entry {index}: {source}")]
    Entry {
        index: usize,
        source: rational::ParseRationalError,
    },
    #[error(transparent)]
    Invalid(#[from] Violation),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn table(entries: &[&str]) -> CostTable {
        CostTable::parse(entries).unwrap()
    }

    #[test]
    fn eval_looks_up_the_load() {
        let t = table(&["0", "1", "3", "3"]);
        assert_eq!(t.eval(2).unwrap(), &CostValue::int(3));
        assert_eq!(t.eval(0).unwrap(), &CostValue::int(0));
        assert_eq!(
            t.eval(4),
            Err(CostError::OutOfRange {
                load: 4,
                horizon: 3
            })
        );
    }

    #[test]
    fn capacitated_table_is_unbounded_past_capacity() {
        let t = table(&["0", "5", "inf"]);
        assert_eq!(t.eval(2).unwrap(), &CostValue::Unbounded);
    }

    #[test]
    fn validate_names_first_offending_index() {
        assert!(validate(&[CostValue::int(0), CostValue::int(1), CostValue::int(3), CostValue::int(3)]).is_ok());
        let decreasing = validate(&[CostValue::int(0), CostValue::int(2), CostValue::int(1)]).unwrap_err();
        assert!(matches!(decreasing, Violation::Decreasing { index: 2, .. }));
        assert_eq!(decreasing.index(), 2);
        let nonzero = validate(&[CostValue::int(1), CostValue::int(2), CostValue::int(3)]).unwrap_err();
        assert!(matches!(nonzero, Violation::NonZeroAtZero(_)));
        assert_eq!(nonzero.index(), 0);
    }

    #[test]
    fn finite_after_unbounded_is_rejected() {
        let err = CostTable::parse(&["0", "inf", "4"]).unwrap_err();
        assert_eq!(
            err,
            TableParseError::Invalid(Violation::Decreasing {
                index: 2,
                prev: CostValue::Unbounded,
                value: CostValue::int(4)
            })
        );
    }

    #[test]
    fn negative_entries_are_rejected() {
        let values = vec![CostValue::int(0), CostValue::Finite(ratio(-1, 2))];
        assert!(matches!(validate(&values), Err(Violation::Negative { index: 1, .. })));
    }

    #[test]
    fn scale_examples() {
        assert_eq!(table(&["0", "2", "4"]).scale(&ratio(1, 2)), table(&["0", "1", "2"]));
        assert_eq!(
            table(&["0", "3", "inf"]).scale(&ratio(1, 3)),
            table(&["0", "1", "inf"])
        );
        let t = table(&["0", "7/2", "9"]);
        assert_eq!(t.scale(&int(1)), t);
    }

    #[test]
    fn unbounded_dominates_every_finite_value() {
        assert!(CostValue::Unbounded > CostValue::int(1_000_000));
        assert_eq!(CostValue::Unbounded, CostValue::Unbounded);
    }

    #[test]
    fn serialized_form_round_trips() {
        let t = table(&["0", "7/2", "4", "inf"]);
        assert_eq!(t.to_strings(), vec!["0", "7/2", "4", "inf"]);
    }

    fn arb_table() -> impl Strategy<Value = Vec<CostValue>> {
        (prop::collection::vec((0i64..20, 1i64..5), 0..8), prop::option::of(1usize..8)).prop_map(
            |(steps, cap)| {
                let mut acc = rational::zero();
                let mut values = vec![CostValue::zero()];
                for (i, (num, den)) in steps.into_iter().enumerate() {
                    if cap.is_some_and(|c| i + 1 > c) {
                        values.push(CostValue::Unbounded);
                    } else {
                        acc += ratio(num, den);
                        values.push(CostValue::Finite(acc.clone()));
                    }
                }
                values
            },
        )
    }

    proptest! {
        #[test]
        fn eval_is_monotone(values in arb_table()) {
            let t = CostTable::new(values).unwrap();
            for a in 0..=t.horizon() {
                for b in a..=t.horizon() {
                    prop_assert!(t.eval(a).unwrap() <= t.eval(b).unwrap());
                }
            }
        }

        #[test]
        fn scale_round_trips_exactly(values in arb_table(), num in 1i64..50, den in 1i64..50) {
            let t = CostTable::new(values).unwrap();
            let x = ratio(num, den);
            let back = t.scale(&x).scale(&(rational::one() / &x));
            prop_assert_eq!(back, t);
        }
    }
}
