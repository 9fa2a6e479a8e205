//! Canonical group-pair marks.
//!
//! Events are marked by the unordered pair of group labels of the two
//! endpoints, written `(i, j)` with 1-based labels and `i <= j`. With K groups
//! there are G = K(K+1)/2 distinct pairs. Pairs are laid out in a flat index
//! with the K within-group pairs `(i, i)` first, then the K(K-1)/2 cross-group
//! pairs `(i, j)`, `i < j`, in lexicographic order:
//!
//! ```text
//! K = 3:  (1,1) (2,2) (3,3) (1,2) (1,3) (2,3)
//! index:    0     1     2     3     4     5
//! ```
//!
//! Putting within pairs first makes aggregate within/cross quantities plain
//! prefix/suffix sums over flat-indexed vectors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from constructing a [`GroupPair`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PairError {
    /// Group labels are 1-based; zero is invalid.
    #[error("group labels are 1-based, got 0")]
    ZeroLabel,
    /// A label exceeded the number of groups.
    #[error("group label {label} exceeds group count {k_groups}")]
    LabelOutOfRange { label: u32, k_groups: usize },
    /// A flat index exceeded the pair count for the given number of groups.
    #[error("flat index {index} out of range for {k_groups} groups")]
    IndexOutOfRange { index: usize, k_groups: usize },
}

/// Unordered pair of 1-based group labels, stored canonically with `i <= j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupPair {
    i: u32,
    j: u32,
}

/// Number of distinct group pairs for `k_groups` groups: K(K+1)/2.
#[inline]
pub const fn pair_count(k_groups: usize) -> usize {
    k_groups * (k_groups + 1) / 2
}

impl GroupPair {
    /// Creates a canonical pair from two 1-based labels in either order.
    ///
    /// # Errors
    ///
    /// Returns [`PairError::ZeroLabel`] if either label is zero.
    pub fn new(a: u32, b: u32) -> Result<Self, PairError> {
        if a == 0 || b == 0 {
            return Err(PairError::ZeroLabel);
        }
        Ok(Self {
            i: a.min(b),
            j: a.max(b),
        })
    }

    /// Creates a canonical pair, additionally checking labels against a group
    /// count.
    ///
    /// # Errors
    ///
    /// Returns [`PairError::ZeroLabel`] or [`PairError::LabelOutOfRange`].
    pub fn new_checked(a: u32, b: u32, k_groups: usize) -> Result<Self, PairError> {
        let pair = Self::new(a, b)?;
        if pair.j as usize > k_groups {
            return Err(PairError::LabelOutOfRange {
                label: pair.j,
                k_groups,
            });
        }
        Ok(pair)
    }

    /// Smaller group label.
    #[inline]
    pub fn i(self) -> u32 {
        self.i
    }

    /// Larger group label.
    #[inline]
    pub fn j(self) -> u32 {
        self.j
    }

    /// True for a within-group pair `(i, i)`.
    #[inline]
    pub fn is_within(self) -> bool {
        self.i == self.j
    }

    /// Position of this pair in the within-first flat layout for `k_groups`
    /// groups.
    ///
    /// # Panics
    ///
    /// Panics if the pair's labels exceed `k_groups`; construct pairs with
    /// [`GroupPair::new_checked`] when the group count is external input.
    pub fn flat_index(self, k_groups: usize) -> usize {
        let k = k_groups;
        let (i, j) = (self.i as usize, self.j as usize);
        assert!(
            j <= k,
            "pair ({}, {}) out of range for {k} groups",
            self.i,
            self.j
        );
        if self.is_within() {
            i - 1
        } else {
            // Cross pairs (a, b), a < b, lexicographic: those with first
            // label < i occupy sum_{a<i} (K - a) slots.
            let before = (i - 1) * k - i * (i - 1) / 2;
            k + before + (j - i - 1)
        }
    }

    /// Inverse of [`GroupPair::flat_index`].
    ///
    /// # Errors
    ///
    /// Returns [`PairError::IndexOutOfRange`] when `index >= pair_count(k_groups)`.
    pub fn from_flat_index(index: usize, k_groups: usize) -> Result<Self, PairError> {
        let k = k_groups;
        if index >= pair_count(k) {
            return Err(PairError::IndexOutOfRange { index, k_groups });
        }
        if index < k {
            let label = (index + 1) as u32;
            return Ok(Self { i: label, j: label });
        }
        let mut rest = index - k;
        for i in 1..k {
            let row = k - i; // cross pairs with first label i
            if rest < row {
                return Ok(Self {
                    i: i as u32,
                    j: (i + 1 + rest) as u32,
                });
            }
            rest -= row;
        }
        unreachable!("index validated against pair_count")
    }

    /// All pairs for `k_groups` groups in flat order.
    pub fn all(k_groups: usize) -> Vec<Self> {
        (0..pair_count(k_groups))
            .map(|idx| Self::from_flat_index(idx, k_groups).expect("index in range"))
            .collect()
    }

    /// Human-readable `i-j` label used in CSV output.
    pub fn label(self) -> String {
        format!("{}-{}", self.i, self.j)
    }
}
