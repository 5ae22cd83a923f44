//! Multi-indices over `Z^d` with lexicographic order.
//!
//! Indices are 1-based at the public surface: a cell of a `d`-level grid
//! of extents `n` is any `i` with `1 <= i <= n` componentwise. Linear
//! positions place the block (unknown within a cell) innermost, so a
//! `d`-level block Toeplitz matrix has literal `p x p` blocks.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(entries: impl Into<Vec<i64>>) -> Self {
        let entries = entries.into();
        assert!(!entries.is_empty(), "multi-index needs at least one level");
        MultiIndex(entries)
    }

    /// The constant vector `(v, ..., v)` with `d` levels.
    pub fn splat(d: usize, v: i64) -> Self {
        MultiIndex::new(vec![v; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    /// Product of the entries. Only meaningful for extents (all positive).
    pub fn volume(&self) -> usize {
        self.0.iter().map(|&v| v.max(0) as usize).product()
    }

    pub fn abs(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|v| v.abs()).collect())
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Result<MultiIndex> {
        check_dims(self, other)?;
        Ok(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn neg(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|v| -v).collect())
    }

    /// Element-wise `i / n` as reals.
    pub fn ratio(&self, n: &MultiIndex) -> Result<Vec<f64>> {
        check_dims(self, n)?;
        Ok(self.0.iter().zip(&n.0).map(|(&a, &b)| a as f64 / b as f64).collect())
    }

    /// All indices `1 <= i <= n` in lexicographic order.
    pub fn range(n: &MultiIndex) -> LexRange {
        LexRange::new(MultiIndex::splat(n.dim(), 1), n.clone())
    }

    /// All indices `lo <= k <= hi` in lexicographic order.
    pub fn span(lo: &MultiIndex, hi: &MultiIndex) -> LexRange {
        LexRange::new(lo.clone(), hi.clone())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (r, v) in self.0.iter().enumerate() {
            if r > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex::new(v)
    }
}

impl<const D: usize> From<[i64; D]> for MultiIndex {
    fn from(v: [i64; D]) -> Self {
        MultiIndex::new(v.to_vec())
    }
}

fn check_dims(a: &MultiIndex, b: &MultiIndex) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(())
}

/// Lexicographic comparison: the first differing coordinate decides.
pub fn lex_compare(a: &MultiIndex, b: &MultiIndex) -> Result<Ordering> {
    check_dims(a, b)?;
    Ok(a.0.cmp(&b.0))
}

/// 1-based row index of unknown `block` (of `p`) in cell `i` of a grid with
/// extents `n`.
pub fn linearize(i: &MultiIndex, n: &MultiIndex, block: usize, p: usize) -> Result<usize> {
    check_dims(i, n)?;
    if block == 0 || block > p {
        return Err(Error::IndexOutOfRange { index: vec![block as i64], bound: vec![p as i64] });
    }
    let cell = cell_offset(i, n)?;
    Ok(cell * p + (block - 1) + 1)
}

/// Inverse of [`linearize`].
pub fn delinearize(row: usize, n: &MultiIndex, p: usize) -> Result<(MultiIndex, usize)> {
    let total = n.volume() * p;
    if row == 0 || row > total || p == 0 {
        return Err(Error::IndexOutOfRange { index: vec![row as i64], bound: vec![total as i64] });
    }
    let zero = row - 1;
    let block = zero % p + 1;
    let mut cell = zero / p;
    let mut entries = vec![0i64; n.dim()];
    for r in (0..n.dim()).rev() {
        let nr = n.0[r] as usize;
        entries[r] = (cell % nr) as i64 + 1;
        cell /= nr;
    }
    Ok((MultiIndex(entries), block))
}

/// 0-based position of cell `i` in lexicographic order over `1..=n`.
pub(crate) fn cell_offset(i: &MultiIndex, n: &MultiIndex) -> Result<usize> {
    let mut acc = 0usize;
    for (&ir, &nr) in i.0.iter().zip(&n.0) {
        if ir < 1 || ir > nr {
            return Err(Error::IndexOutOfRange { index: i.0.clone(), bound: n.0.clone() });
        }
        acc = acc * nr as usize + (ir - 1) as usize;
    }
    Ok(acc)
}

/// Lexicographic iterator over a box of multi-indices.
#[derive(Clone, Debug)]
pub struct LexRange {
    lo: MultiIndex,
    hi: MultiIndex,
    next: Option<MultiIndex>,
}

impl LexRange {
    fn new(lo: MultiIndex, hi: MultiIndex) -> Self {
        let empty = lo.0.iter().zip(&hi.0).any(|(a, b)| a > b);
        let next = (!empty).then(|| lo.clone());
        LexRange { lo, hi, next }
    }
}

impl Iterator for LexRange {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for r in (0..succ.dim()).rev() {
            if succ.0[r] < self.hi.0[r] {
                succ.0[r] += 1;
                self.next = Some(succ);
                return Some(current);
            }
            succ.0[r] = self.lo.0[r];
        }
        Some(current)
    }
}
