use super::SubsystemLayout;
use crate::{Error, Result};

/// Decomposition of composite indices into a selected group of subsystems
/// and its complement.
///
/// Every composite index is `rest[a] + sub[b]` for exactly one pair `(a, b)`.
/// `b` follows the order in which the selected labels were given; `a`
/// follows layout order for the remaining subsystems.
#[derive(Debug, Clone)]
pub struct IndexSplit {
    pub sub: Vec<usize>,
    pub rest: Vec<usize>,
}

impl IndexSplit {
    pub fn new<S: AsRef<str>>(layout: &SubsystemLayout, labels: &[S]) -> Result<Self> {
        let subs = layout.subsystems();
        let mut strides = vec![1usize; subs.len()];
        for i in (0..subs.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * subs[i + 1].dim;
        }

        let mut picked = Vec::with_capacity(labels.len());
        for l in labels {
            let p = layout
                .position(l.as_ref())
                .ok_or_else(|| Error::UnknownLabel(l.as_ref().to_string()))?;
            if picked.contains(&p) {
                return Err(Error::DuplicateLabel(l.as_ref().to_string()));
            }
            picked.push(p);
        }
        let others: Vec<usize> = (0..subs.len()).filter(|p| !picked.contains(p)).collect();

        let strides = &strides;
        let offsets = |positions: &[usize]| -> Vec<usize> {
            let mut out = vec![0usize];
            for &p in positions {
                let d = subs[p].dim;
                out = out
                    .iter()
                    .flat_map(|&base| (0..d).map(move |k| base + k * strides[p]))
                    .collect();
            }
            out
        };

        Ok(Self { sub: offsets(&picked), rest: offsets(&others) })
    }
}
