//! Finite sets of integer frequency vectors.
//!
//! A [`FrequencySet`] is the support of a trigonometric polynomial. Indices are
//! kept duplicate-free in lexicographic order; that order fixes the row layout
//! of feature matrices and the coefficient layout everywhere else in the crate.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer frequency vector.
pub type Frequency = Vec<i32>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FrequencySetRepr", into = "FrequencySetRepr")]
pub struct FrequencySet {
    dim: usize,
    indices: Vec<Frequency>,
    symmetric: bool,
}

#[derive(Serialize, Deserialize)]
struct FrequencySetRepr {
    dim: usize,
    indices: Vec<Frequency>,
}

impl TryFrom<FrequencySetRepr> for FrequencySet {
    type Error = Error;

    fn try_from(repr: FrequencySetRepr) -> Result<Self> {
        if repr.indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "frequency indices must be duplicate-free and in lexicographic order",
            ));
        }
        FrequencySet::from_indices(repr.dim, repr.indices)
    }
}

impl From<FrequencySet> for FrequencySetRepr {
    fn from(set: FrequencySet) -> Self {
        FrequencySetRepr {
            dim: set.dim,
            indices: set.indices,
        }
    }
}

impl FrequencySet {
    /// Builds a set from arbitrary indices, sorting and deduplicating them.
    pub fn from_indices<I>(dim: usize, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = Frequency>,
    {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        let set: BTreeSet<Frequency> = indices.into_iter().collect();
        if let Some(bad) = set.iter().find(|k| k.len() != dim) {
            return Err(Error::invalid(format!(
                "index {bad:?} has length {} but dim is {dim}",
                bad.len()
            )));
        }
        if set.is_empty() {
            return Err(Error::invalid("frequency set must be nonempty"));
        }
        let symmetric = set.iter().all(|k| set.contains(&negate(k)));
        Ok(FrequencySet {
            dim,
            indices: set.into_iter().collect(),
            symmetric,
        })
    }

    /// The centered box `{k : |k_i| <= (extent_i - 1) / 2}`.
    pub fn rect(dim: usize, extents: &[usize]) -> Result<Self> {
        if extents.len() != dim {
            return Err(Error::invalid(format!(
                "expected {dim} extents, got {}",
                extents.len()
            )));
        }
        if let Some(e) = extents.iter().find(|&&e| e == 0 || e % 2 == 0) {
            return Err(Error::invalid(format!(
                "extents must be odd and positive, got {e}"
            )));
        }
        let radii: Vec<i32> = extents.iter().map(|&e| ((e - 1) / 2) as i32).collect();
        let mut indices = Vec::with_capacity(extents.iter().product());
        let mut current: Frequency = radii.iter().map(|r| -r).collect();
        loop {
            indices.push(current.clone());
            // odometer increment, last axis fastest, which is lexicographic order
            let mut axis = dim;
            loop {
                if axis == 0 {
                    return FrequencySet::from_indices(dim, indices);
                }
                axis -= 1;
                if current[axis] < radii[axis] {
                    current[axis] += 1;
                    break;
                }
                current[axis] = -radii[axis];
            }
        }
    }

    /// The singleton `{0}`.
    pub fn zero(dim: usize) -> Result<Self> {
        FrequencySet::from_indices(dim, [vec![0; dim]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn indices(&self) -> &[Frequency] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = &Frequency> {
        self.indices.iter()
    }

    /// Position of `k` in canonical order.
    pub fn position(&self, k: &[i32]) -> Option<usize> {
        self.indices
            .binary_search_by(|probe| probe.as_slice().cmp(k))
            .ok()
    }

    pub fn contains(&self, k: &[i32]) -> bool {
        self.position(k).is_some()
    }

    pub fn is_subset_of(&self, other: &FrequencySet) -> bool {
        self.dim == other.dim && self.indices.iter().all(|k| other.contains(k))
    }

    /// For each index, the position of its negation. `None` unless symmetric.
    pub fn negation_map(&self) -> Option<Vec<usize>> {
        if !self.symmetric {
            return None;
        }
        self.indices
            .iter()
            .map(|k| self.position(&negate(k)))
            .collect()
    }

    /// Per-axis `(min, max)` over all indices.
    pub fn axis_bounds(&self) -> Vec<(i32, i32)> {
        (0..self.dim)
            .map(|axis| {
                self.indices
                    .iter()
                    .fold((i32::MAX, i32::MIN), |(lo, hi), k| {
                        (lo.min(k[axis]), hi.max(k[axis]))
                    })
            })
            .collect()
    }

    /// Largest absolute frequency component over all indices and axes.
    pub fn max_abs_frequency(&self) -> i32 {
        self.indices
            .iter()
            .flat_map(|k| k.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    /// `{a + b : a in self, b in other}`, the support of a coefficient convolution.
    pub fn minkowski_sum(&self, other: &FrequencySet) -> Result<FrequencySet> {
        self.check_dim(other)?;
        let mut sums = BTreeSet::new();
        for a in &self.indices {
            for b in &other.indices {
                sums.insert(add(a, b));
            }
        }
        FrequencySet::from_indices(self.dim, sums)
    }

    /// All translates `t` with `lambda + t` contained in `self`.
    ///
    /// Requires `lambda` to be a subset of `self`, so the zero shift is always
    /// present and the result is never empty.
    pub fn shift_set(&self, lambda: &FrequencySet) -> Result<FrequencySet> {
        self.check_dim(lambda)?;
        if !lambda.is_subset_of(self) {
            return Err(Error::invalid("lambda is not contained in gamma"));
        }
        let first = &lambda.indices[0];
        let shifts = self
            .indices
            .iter()
            .map(|g| sub(g, first))
            .filter(|t| lambda.indices.iter().all(|l| self.contains(&add(l, t))));
        FrequencySet::from_indices(self.dim, shifts.collect::<Vec<_>>())
    }

    fn check_dim(&self, other: &FrequencySet) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }
}

fn negate(k: &[i32]) -> Frequency {
    k.iter().map(|c| -c).collect()
}

fn add(a: &[i32], b: &[i32]) -> Frequency {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[i32], b: &[i32]) -> Frequency {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
