use std::cmp::Ordering;
use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque client identifier.
///
/// Ordering is "natural": identifiers that are both plain decimal numbers
/// compare numerically (so `"9" < "10"`), everything else compares as text.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClientId(String);

impl ClientId {
    pub fn new(id: impl Into<String>) -> Self {
        ClientId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<usize> for ClientId {
    fn from(id: usize) -> Self {
        ClientId(id.to_string())
    }
}

impl From<&str> for ClientId {
    fn from(id: &str) -> Self {
        ClientId(id.to_owned())
    }
}

impl fmt::Display for ClientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Ord for ClientId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0.parse::<u64>(), other.0.parse::<u64>()) {
            (Ok(a), Ok(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            _ => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for ClientId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Per-class sample counts of one client (or of a union of clients).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Histogram(Vec<u64>);

impl Histogram {
    pub fn new(counts: Vec<u64>) -> Self {
        Histogram(counts)
    }

    pub fn zeros(classes: usize) -> Self {
        Histogram(vec![0; classes])
    }

    pub fn classes(&self) -> usize {
        self.0.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Index of the most populated class; ties go to the lowest index.
    pub fn modal_class(&self) -> Option<usize> {
        let max = *self.0.iter().max()?;
        self.0.iter().position(|&c| c == max)
    }

    /// Element-wise accumulation.
    pub fn add_assign(&mut self, other: &Histogram) -> Result<()> {
        if other.classes() != self.classes() {
            return Err(Error::DimensionMismatch { expected: self.classes(), actual: other.classes() });
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
        Ok(())
    }

    pub fn scaled(&self, factor: u64) -> Histogram {
        Histogram(self.0.iter().map(|c| c * factor).collect())
    }
}

impl Index<usize> for Histogram {
    type Output = u64;

    fn index(&self, class: usize) -> &u64 {
        &self.0[class]
    }
}

impl From<Vec<u64>> for Histogram {
    fn from(counts: Vec<u64>) -> Self {
        Histogram(counts)
    }
}
