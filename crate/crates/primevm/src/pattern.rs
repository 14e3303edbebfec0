//! Sparse activation patterns: sorted neuron index sets over a cluster.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    size: u32,
    active: Vec<u32>,
}

impl Pattern {
    /// Builds a pattern from strictly increasing indices below `size`.
    pub fn new(size: usize, active: Vec<u32>) -> Result<Self> {
        if size == 0 {
            return Err(Error::Pattern("cluster size is zero".into()));
        }
        for w in active.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Pattern(format!(
                    "indices not strictly increasing at {} >= {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = active.last() {
            if last as usize >= size {
                return Err(Error::Pattern(format!(
                    "index {last} out of range for size {size}"
                )));
            }
        }
        Ok(Pattern {
            size: size as u32,
            active,
        })
    }

    /// Sorts and deduplicates arbitrary indices first.
    pub fn from_unsorted(size: usize, mut active: Vec<u32>) -> Result<Self> {
        active.sort_unstable();
        active.dedup();
        Pattern::new(size, active)
    }

    pub fn empty(size: usize) -> Self {
        Pattern {
            size: size as u32,
            active: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.size as usize
    }

    pub fn active(&self) -> &[u32] {
        &self.active
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn coverage(&self) -> f64 {
        self.active.len() as f64 / self.size as f64
    }

    pub fn contains(&self, i: u32) -> bool {
        self.active.binary_search(&i).is_ok()
    }

    pub fn overlap(&self, other: &Pattern) -> usize {
        let (mut a, mut b, mut n) = (0, 0, 0);
        while a < self.active.len() && b < other.active.len() {
            match self.active[a].cmp(&other.active[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    a += 1;
                    b += 1;
                }
            }
        }
        n
    }

    pub fn jaccard(&self, other: &Pattern) -> f64 {
        let inter = self.overlap(other);
        let union = self.len() + other.len() - inter;
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    pub fn union(&self, other: &Pattern) -> Pattern {
        let mut v = self.active.clone();
        v.extend_from_slice(&other.active);
        v.sort_unstable();
        v.dedup();
        Pattern {
            size: self.size.max(other.size),
            active: v,
        }
    }

    /// Dense 0/1 indicator vector.
    pub fn to_dense(&self) -> Vec<f32> {
        let mut v = vec![0.0; self.size()];
        for &i in &self.active {
            v[i as usize] = 1.0;
        }
        v
    }

    pub fn to_mask(&self) -> Vec<bool> {
        let mut v = vec![false; self.size()];
        for &i in &self.active {
            v[i as usize] = true;
        }
        v
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern({}/{}: {:?})", self.len(), self.size, self.active)
    }
}
