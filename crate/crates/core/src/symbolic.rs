//! Word-set combinatorics: the split index `m`, phase derivatives of
//! `φ_w = log|g_w'|`, threshold partitions `Z(τ)` and their statistics.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::dynamics::{Interval, Letter, SystemParams, Word, MAX_ORDER};
use crate::error::{Error, Result};
use crate::parallel::Execution;

/// Split index of two words.
///
/// `m` is the largest integer with `w_{<m} = v_{<m}`: one more than the
/// common prefix length, `1` when the first letters differ and `|v| + 1`
/// when `v` is a prefix of `w`. The words are unrelated (`w ≁ v`) when
/// `m <= min(|w|, |v|) - 1`; otherwise they are related (`w ∼ v`), and in
/// particular every word is related to itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitIndex {
    pub m: usize,
    pub related: bool,
}

pub fn split_index(w: &Word, v: &Word) -> SplitIndex {
    let m = w.common_prefix_len(v) + 1;
    let shortest = w.len().min(v.len());
    SplitIndex {
        m,
        related: m + 1 > shortest,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseData {
    pub word: Word,
    pub x: f64,
    /// `φ_w'(x)`.
    pub phi_prime: f64,
    /// `φ_w''(x)`.
    pub phi_second: f64,
}

/// `φ_w'` and `φ_w''` at real `x`.
///
/// With `x_i = g_{w_{<=i}}(x)` and `D_i = g_{w_{<=i}}'(x)`, the first
/// derivative is `Σ s_i` with `s_i = -D_i / x_i = -1 / (2^i x_1⋯x_{i-1} x_i²)`
/// and the second is `-Σ (g_{w_{<=i}}''(x) / x_i - D_i² / x_i²)`, where
/// `g_{w_{<=i}}'' = D_i · φ_{w_{<=i}}'`.
pub fn phase_derivatives(sys: &SystemParams, w: &Word, x: f64) -> PhaseData {
    let mut y = x;
    let mut d = 1.0;
    let mut partial = 0.0;
    let mut second = 0.0;
    for &letter in w.letters() {
        y = sys.branch_real(letter, y);
        d /= 2.0 * y;
        partial -= d / y;
        let g2 = d * partial;
        second -= g2 / y - d * d / (y * y);
    }
    PhaseData {
        word: w.clone(),
        x,
        phi_prime: partial,
        phi_second: second,
    }
}

fn unrelated_split(w: &Word, v: &Word) -> Result<usize> {
    let split = split_index(w, v);
    if split.related {
        return Err(Error::Relation {
            w: w.to_string(),
            v: v.to_string(),
        });
    }
    Ok(split.m)
}

/// `|φ_w'(x) - φ_v'(x)| / |g'_{w_{<=m+1}}(x)|` for unrelated `w ≁ v`.
pub fn separation_ratio(sys: &SystemParams, w: &Word, v: &Word, x: f64) -> Result<f64> {
    let m = unrelated_split(w, v)?;
    let pw = phase_derivatives(sys, w, x).phi_prime;
    let pv = phase_derivatives(sys, v, x).phi_prime;
    let scale = sys
        .derivative_real(&w.prefix(m + 1).expect("m + 1 <= |w|"), x)
        .abs();
    Ok((pw - pv).abs() / scale)
}

/// `|φ_w''(x) - φ_v''(x)| / |g'_{w_{<=m+1}}(x)|` for unrelated `w ≁ v`.
pub fn second_phase_ratio(sys: &SystemParams, w: &Word, v: &Word, x: f64) -> Result<f64> {
    let m = unrelated_split(w, v)?;
    let pw = phase_derivatives(sys, w, x).phi_second;
    let pv = phase_derivatives(sys, v, x).phi_second;
    let scale = sys
        .derivative_real(&w.prefix(m + 1).expect("m + 1 <= |w|"), x)
        .abs();
    Ok((pw - pv).abs() / scale)
}

/// `|I_w| = |g_w(ζ_c) - g_w(-ζ_c)|`.
pub fn interval_length(sys: &SystemParams, w: &Word) -> f64 {
    let hull = sys.hull();
    (sys.compose_real(w, hull.hi) - sys.compose_real(w, hull.lo)).abs()
}

/// Min and max of `|g_w'|` over the sample grid.
pub fn sampled_derivative_range(sys: &SystemParams, w: &Word, samples: &[f64]) -> (f64, f64) {
    samples
        .iter()
        .map(|&x| sys.derivative_real(w, x).abs())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        })
}

/// True when the `2 · 2^n` intervals `g_w(I_±)`, `|w| = n`, are pairwise
/// disjoint.
pub fn equal_length_images_disjoint(sys: &SystemParams, n: usize) -> bool {
    let mut images: Vec<Interval> = Word::all_of_length(n)
        .flat_map(|w| sys.image_intervals(&w))
        .collect();
    images.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    images.windows(2).all(|p| p[0].hi < p[1].lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionEntry {
    pub word: Word,
    pub interval_length: f64,
    pub derivative_min: f64,
    pub derivative_max: f64,
    /// `g_w(I_-)` and `g_w(I_+)`.
    pub images: [Interval; 2],
}

/// A threshold partition `Z(τ)`: the words `w` with `|I_w| < τ` whose
/// proper prefixes all have `|I_{w_{<=j}}| >= τ`. Entries are kept in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    tau: f64,
    entries: Vec<PartitionEntry>,
}

impl Partition {
    pub fn build(sys: &SystemParams, tau: f64) -> Result<Self> {
        Self::build_with(sys, tau, Execution::default())
    }

    /// Breadth-first splitting from the one-letter words.
    pub fn build_with(sys: &SystemParams, tau: f64, exec: Execution) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "partition threshold must be positive and finite, got {tau}"
            )));
        }
        let mut queue: VecDeque<Word> = [Letter::Minus, Letter::Plus]
            .into_iter()
            .map(Word::single)
            .collect();
        let mut leaves = Vec::new();
        while let Some(word) = queue.pop_front() {
            let length = interval_length(sys, &word);
            if length < tau {
                leaves.push((word, length));
            } else if word.len() == MAX_ORDER {
                return Err(Error::Capacity {
                    requested: MAX_ORDER + 1,
                    max: MAX_ORDER,
                });
            } else {
                queue.push_back(word.extended(Letter::Minus));
                queue.push_back(word.extended(Letter::Plus));
            }
        }
        leaves.sort_by(|a, b| a.0.cmp(&b.0));
        let samples = sys.sample_points();
        let entries = exec.map_slice(&leaves, |(word, length)| {
            let (derivative_min, derivative_max) = sampled_derivative_range(sys, word, &samples);
            PartitionEntry {
                images: sys.image_intervals(word),
                word: word.clone(),
                interval_length: *length,
                derivative_min,
                derivative_max,
            }
        });
        Ok(Partition { tau, entries })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn entries(&self) -> &[PartitionEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.entries.iter().map(|e| &e.word)
    }

    pub fn max_length(&self) -> usize {
        self.words().map(Word::len).max().unwrap_or(0)
    }

    pub fn length_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for w in self.words() {
            *hist.entry(w.len()).or_insert(0) += 1;
        }
        hist
    }

    /// No word is a proper prefix of another. In lexicographic order a word
    /// and its extensions are contiguous, so adjacent pairs suffice.
    pub fn is_prefix_free(&self) -> bool {
        self.entries
            .windows(2)
            .all(|p| !p[0].word.is_proper_prefix_of(&p[1].word))
    }

    /// Every word of length `max_length + 1` has exactly one prefix in the
    /// set (checked exhaustively).
    pub fn is_covering(&self) -> bool {
        let set: HashSet<&Word> = self.words().collect();
        let n = self.max_length() + 1;
        Word::all_of_length(n).all(|w| {
            (1..=n)
                .filter(|&m| set.contains(&w.prefix(m).expect("m <= n")))
                .count()
                == 1
        })
    }

    /// `|I_w| < τ` for members and `>= τ` for all their proper prefixes.
    pub fn satisfies_threshold(&self, sys: &SystemParams) -> bool {
        self.entries.iter().all(|e| {
            e.interval_length < self.tau
                && (1..e.word.len())
                    .all(|j| interval_length(sys, &e.word.prefix(j).expect("j < |w|")) >= self.tau)
        })
    }

    /// `(min, max)` of sampled `|g_w'| / τ` over all members.
    pub fn derivative_band(&self) -> (f64, f64) {
        self.entries
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), e| {
                (
                    lo.min(e.derivative_min / self.tau),
                    hi.max(e.derivative_max / self.tau),
                )
            })
    }

    /// Smallest `C` with every sampled `|g_w'| / τ` in `[1/C, C]`.
    pub fn band_constant(&self) -> f64 {
        let (lo, hi) = self.derivative_band();
        hi.max(1.0 / lo)
    }

    pub fn orthogonality_stats(&self, sys: &SystemParams) -> OrthogonalityStats {
        self.orthogonality_stats_with(sys, Execution::default())
    }

    /// `max_related`: max over `w` of `|{v : |v| >= |w|, w ∼ v}|` (each
    /// word counts itself). `max_point_multiplicity`: max over the sample
    /// grid of the number of members with `z ∈ g_w(I)`.
    pub fn orthogonality_stats_with(
        &self,
        sys: &SystemParams,
        exec: Execution,
    ) -> OrthogonalityStats {
        // For |v| >= |w|, w ∼ v iff v starts with w_{<|w|}.
        let related = exec.map_slice(&self.entries, |e| {
            let stem = &e.word.letters()[..e.word.len() - 1];
            let start = self.entries.partition_point(|o| o.word.letters() < stem);
            self.entries[start..]
                .iter()
                .take_while(|o| o.word.letters().starts_with(stem))
                .filter(|o| o.word.len() >= e.word.len())
                .count()
        });
        let samples = sys.sample_points();
        let multiplicity = exec.map_slice(&samples, |&z| {
            self.entries
                .iter()
                .filter(|e| e.images.iter().any(|iv| iv.contains(z)))
                .count()
        });
        OrthogonalityStats {
            max_related: related.into_iter().max().unwrap_or(0),
            max_point_multiplicity: multiplicity.into_iter().max().unwrap_or(0),
        }
    }

    pub fn summary(&self, sys: &SystemParams) -> PartitionStats {
        let (band_min, band_max) = self.derivative_band();
        let orth = self.orthogonality_stats(sys);
        PartitionStats {
            c: sys.c(),
            word_count: self.len(),
            max_length: self.max_length(),
            length_histogram: self.length_histogram(),
            band_min,
            band_max,
            band_constant: self.band_constant(),
            max_related: orth.max_related,
            max_point_multiplicity: orth.max_point_multiplicity,
            prefix_free: self.is_prefix_free(),
            covering: self.is_covering(),
            threshold_property: self.satisfies_threshold(sys),
        }
    }

    /// JSON dump `{ "schema_version", "tau", "words", "stats" }`.
    pub fn dump(&self, sys: &SystemParams) -> PartitionDump {
        PartitionDump {
            schema_version: 1,
            tau: self.tau,
            words: self.words().map(Word::to_string).collect(),
            stats: self.summary(sys),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthogonalityStats {
    pub max_related: usize,
    pub max_point_multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionStats {
    pub c: f64,
    pub word_count: usize,
    pub max_length: usize,
    pub length_histogram: BTreeMap<usize, usize>,
    pub band_min: f64,
    pub band_max: f64,
    pub band_constant: f64,
    pub max_related: usize,
    pub max_point_multiplicity: usize,
    pub prefix_free: bool,
    pub covering: bool,
    pub threshold_property: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionDump {
    pub schema_version: u32,
    pub tau: f64,
    pub words: Vec<String>,
    pub stats: PartitionStats,
}
