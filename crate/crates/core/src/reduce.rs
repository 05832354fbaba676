//! Deterministic pairwise (tree) summation.
//!
//! The reduction tree depends only on the number of terms, never on the
//! thread schedule, so sums are bit-stable across runs and machines with the
//! same floating-point semantics.

use std::ops::Add;

/// Leaf size below which terms are accumulated left to right.
const LEAF: usize = 8;

/// Sum `term(0) + ... + term(len - 1)` with a fixed binary tree.
pub fn pairwise_sum_by<T, F>(len: usize, term: &F) -> T
where
    T: Add<Output = T> + Copy + Default,
    F: Fn(usize) -> T,
{
    sum_range(0, len, term)
}

fn sum_range<T, F>(start: usize, end: usize, term: &F) -> T
where
    T: Add<Output = T> + Copy + Default,
    F: Fn(usize) -> T,
{
    let len = end - start;
    if len <= LEAF {
        let mut acc = T::default();
        for i in start..end {
            acc = acc + term(i);
        }
        acc
    } else {
        let mid = start + len / 2;
        sum_range(start, mid, term) + sum_range(mid, end, term)
    }
}

/// Pairwise sum of a slice.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Add<Output = T> + Copy + Default,
{
    pairwise_sum_by(values.len(), &|i| values[i])
}
