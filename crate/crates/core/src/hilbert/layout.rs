use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest composite dimension any dense object may have.
pub const DENSE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labeled factors of a composite Hilbert space.
///
/// The first-listed subsystem is the slowest-varying (most significant)
/// digit of a composite basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Subsystem>", into = "Vec<Subsystem>")]
pub struct SubsystemLayout {
    subsystems: Vec<Subsystem>,
    dim: usize,
}

impl SubsystemLayout {
    pub fn new<S: Into<String>>(parts: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let subsystems = parts
            .into_iter()
            .map(|(label, dim)| Subsystem { label: label.into(), dim })
            .collect::<Vec<_>>();
        Self::from_subsystems(subsystems)
    }

    pub fn from_subsystems(subsystems: Vec<Subsystem>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::InvalidParameter("layout has no subsystems".into()));
        }
        let mut dim: usize = 1;
        for (i, s) in subsystems.iter().enumerate() {
            if s.dim == 0 {
                return Err(Error::InvalidDimension { label: s.label.clone(), dim: 0 });
            }
            if subsystems[..i].iter().any(|p| p.label == s.label) {
                return Err(Error::DuplicateLabel(s.label.clone()));
            }
            dim = dim
                .checked_mul(s.dim)
                .filter(|d| *d <= DENSE_CAP)
                .ok_or(Error::DimensionCap { dim: dim.saturating_mul(s.dim), cap: DENSE_CAP })?;
        }
        Ok(Self { subsystems, dim })
    }

    /// Single subsystem of the given dimension.
    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label.into(), dim)])
    }

    /// `n` qubits labeled `{prefix}0 .. {prefix}{n-1}`.
    pub fn qubits(prefix: &str, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (format!("{prefix}{i}"), 2)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|s| s.label.as_str())
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.subsystems.iter().position(|s| s.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|p| self.subsystems[p].dim)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Concatenation `self ⊗ other`; labels must be disjoint.
    pub fn concat(&self, other: &SubsystemLayout) -> Result<Self> {
        if let Some(dup) = other.labels().find(|l| self.contains(l)) {
            return Err(Error::DuplicateLabel(dup.to_string()));
        }
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        Self::from_subsystems(subsystems)
    }

    /// Sub-layout made of `labels`, in layout order.
    pub fn restrict<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        for l in labels {
            if !self.contains(l.as_ref()) {
                return Err(Error::UnknownLabel(l.as_ref().to_string()));
            }
        }
        let kept = self
            .subsystems
            .iter()
            .filter(|s| labels.iter().any(|l| l.as_ref() == s.label))
            .cloned()
            .collect();
        Self::from_subsystems(kept)
    }

    pub(crate) fn ensure_same(&self, other: &SubsystemLayout) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::LayoutMismatch(format!("{self} vs {other}")))
        }
    }
}

impl TryFrom<Vec<Subsystem>> for SubsystemLayout {
    type Error = Error;
    fn try_from(v: Vec<Subsystem>) -> Result<Self> {
        Self::from_subsystems(v)
    }
}

impl From<SubsystemLayout> for Vec<Subsystem> {
    fn from(l: SubsystemLayout) -> Self {
        l.subsystems
    }
}

impl fmt::Display for SubsystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.subsystems.iter().enumerate() {
            if i > 0 {
                write!(f, " ⊗ ")?;
            }
            write!(f, "{}:{}", s.label, s.dim)?;
        }
        write!(f, "]")
    }
}
