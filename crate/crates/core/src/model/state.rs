use std::fmt;

use serde::{Serialize, Serializer};
use smallvec::SmallVec;

/// A state as a fixed-arity vector of integer coordinates. Ordering is
/// lexicographic.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(SmallVec<[i64; 3]>);

impl StateId {
    pub fn new(coords: impl IntoIterator<Item = i64>) -> Self {
        StateId(coords.into_iter().collect())
    }

    pub fn scalar(x: i64) -> Self {
        StateId(SmallVec::from_slice(&[x]))
    }

    pub fn pair(a: i64, b: i64) -> Self {
        StateId(SmallVec::from_slice(&[a, b]))
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// First coordinate; the natural index for one-dimensional systems.
    pub fn head(&self) -> i64 {
        self.0[0]
    }
}

impl From<i64> for StateId {
    fn from(x: i64) -> Self {
        StateId::scalar(x)
    }
}

impl From<&[i64]> for StateId {
    fn from(c: &[i64]) -> Self {
        StateId(SmallVec::from_slice(c))
    }
}

impl fmt::Debug for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for StateId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}
