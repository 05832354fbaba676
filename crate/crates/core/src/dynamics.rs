//! The quadratic map `f(z) = z^2 + c`, its inverse branches, word
//! compositions and periodic orbits.
//!
//! Composition order: for a word `w = w_1 ... w_n` the map
//! `g_w = g_{w_n} ∘ ... ∘ g_{w_1}` applies the FIRST letter first. The
//! intermediate points `x_j = g_{w_1..w_j}(x)` therefore carry the sign of
//! the letter `w_j`; for `w = "+-"` and `c = -4`,
//! `x_1 = g_+(0) = 2` and `x_2 = g_-(2) = -√6`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::Execution;

/// Largest word length handled by orbit enumeration and partitions.
pub const MAX_ORDER: usize = 16;

/// Points per branch interval in every sampled sup/inf over `I`.
pub const SAMPLES_PER_INTERVAL: usize = 512;

const FIXED_POINT_TOL: f64 = 1e-14;
const FIXED_POINT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Letter {
    Minus,
    Plus,
}

impl Letter {
    pub fn sign(self) -> f64 {
        match self {
            Letter::Minus => -1.0,
            Letter::Plus => 1.0,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::Minus => '-',
            Letter::Plus => '+',
        }
    }

    pub fn flipped(self) -> Letter {
        match self {
            Letter::Minus => Letter::Plus,
            Letter::Plus => Letter::Minus,
        }
    }
}

/// A non-empty itinerary over `{+, -}`. Ordering is lexicographic with
/// `- < +`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument(
                "a word needs at least one letter".into(),
            ));
        }
        Ok(Word(letters))
    }

    pub fn single(letter: Letter) -> Self {
        Word(vec![letter])
    }

    /// The `index`-th word of length `n` in lexicographic order; bit
    /// `n - 1 - j` of `index` selects letter `j` (1 = `+`).
    pub fn from_index(n: usize, index: usize) -> Self {
        debug_assert!(n >= 1 && n < usize::BITS as usize);
        Word(
            (0..n)
                .map(|j| {
                    if (index >> (n - 1 - j)) & 1 == 1 {
                        Letter::Plus
                    } else {
                        Letter::Minus
                    }
                })
                .collect(),
        )
    }

    /// All `2^n` words of length `n`, lexicographically.
    pub fn all_of_length(n: usize) -> impl Iterator<Item = Word> {
        (0..1usize << n).map(move |i| Word::from_index(n, i))
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn first(&self) -> Letter {
        self.0[0]
    }

    pub fn last(&self) -> Letter {
        self.0[self.0.len() - 1]
    }

    /// `w_{<=m}`, defined for `1 <= m <= |w|`.
    pub fn prefix(&self, m: usize) -> Option<Word> {
        (1..=self.len())
            .contains(&m)
            .then(|| Word(self.0[..m].to_vec()))
    }

    pub fn is_proper_prefix_of(&self, other: &Word) -> bool {
        self.len() < other.len() && other.0.starts_with(&self.0)
    }

    pub fn extended(&self, letter: Letter) -> Word {
        let mut letters = self.0.clone();
        letters.push(letter);
        Word(letters)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Length of the longest common prefix.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .take_while(|(a, b)| a == b)
            .count()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|ch| match ch {
                '+' => Ok(Letter::Plus),
                '-' | '\u{2212}' => Ok(Letter::Minus),
                other => Err(Error::InvalidArgument(format!(
                    "invalid letter {other:?} in word {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Closed real interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Interval spanned by two points in either order.
    pub fn spanning(a: f64, b: f64) -> Self {
        Interval {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// `count` equispaced points including both endpoints.
    pub fn grid(&self, count: usize) -> impl Iterator<Item = f64> + '_ {
        let step = self.length() / (count.max(2) - 1) as f64;
        (0..count).map(move |k| {
            if k + 1 == count {
                self.hi
            } else {
                self.lo + k as f64 * step
            }
        })
    }
}

/// The dynamical system `z ↦ z^2 + c` for one parameter `c < -2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    c: f64,
    zeta_c: f64,
    radius: f64,
    i_plus: Interval,
    i_minus: Interval,
    theta0: f64,
    eta0: f64,
}

impl SystemParams {
    pub fn new(c: f64) -> Result<Self> {
        if !(c < -2.0) || !c.is_finite() {
            return Err(Error::Domain(format!(
                "c = {c} is not in the hyperbolic range c < -2"
            )));
        }
        let zeta_c = ((1.0 - 4.0 * c).sqrt() + 1.0) / 2.0;
        let inner = (-zeta_c - c).sqrt();
        Ok(SystemParams {
            c,
            zeta_c,
            radius: (zeta_c - c) / 2.0,
            i_plus: Interval {
                lo: inner,
                hi: zeta_c,
            },
            i_minus: Interval {
                lo: -zeta_c,
                hi: -inner,
            },
            theta0: zeta_c / (2.0 * (-zeta_c - c)),
            eta0: zeta_c / (2.0 * (zeta_c - c)),
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Largest fixed point `(√(1-4c) + 1) / 2`.
    pub fn zeta_c(&self) -> f64 {
        self.zeta_c
    }

    /// Working disc radius, the midpoint of `(ζ_c, -c)`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn i_plus(&self) -> Interval {
        self.i_plus
    }

    pub fn i_minus(&self) -> Interval {
        self.i_minus
    }

    pub fn branch_interval(&self, letter: Letter) -> Interval {
        match letter {
            Letter::Plus => self.i_plus,
            Letter::Minus => self.i_minus,
        }
    }

    /// `[-ζ_c, ζ_c]`, the convex hull of `I_+ ∪ I_-`.
    pub fn hull(&self) -> Interval {
        Interval {
            lo: -self.zeta_c,
            hi: self.zeta_c,
        }
    }

    /// `|I_+| + |I_-|`.
    pub fn total_length(&self) -> f64 {
        self.i_plus.length() + self.i_minus.length()
    }

    pub fn in_branch_intervals(&self, x: f64) -> bool {
        self.i_plus.contains(x) || self.i_minus.contains(x)
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    /// Sample grid over `I_- ∪ I_+` used for every sampled sup/inf.
    pub fn sample_points(&self) -> Vec<f64> {
        self.i_minus
            .grid(SAMPLES_PER_INTERVAL)
            .chain(self.i_plus.grid(SAMPLES_PER_INTERVAL))
            .collect()
    }

    pub fn apply_f(&self, z: Complex64) -> Complex64 {
        z * z + self.c
    }

    pub fn inverse_branch(&self, letter: Letter, z: Complex64) -> Result<Complex64> {
        let arg = z - self.c;
        if arg.im == 0.0 && arg.re <= 0.0 {
            return Err(Error::BranchCut(arg));
        }
        Ok(arg.sqrt() * letter.sign())
    }

    /// `g_w(z)`, first letter applied first.
    pub fn compose_inverse(&self, w: &Word, z: Complex64) -> Result<Complex64> {
        w.letters()
            .iter()
            .try_fold(z, |acc, &l| self.inverse_branch(l, acc))
    }

    /// `g_w'(z) = ∏ 1 / (2 x_j)` along the intermediate points.
    pub fn branch_derivative(&self, w: &Word, z: Complex64) -> Result<Complex64> {
        let mut x = z;
        let mut prod = Complex64::new(1.0, 0.0);
        for &l in w.letters() {
            x = self.inverse_branch(l, x)?;
            prod /= x * 2.0;
        }
        Ok(prod)
    }

    /// Real branch `±√(x - c)`; requires `x > c`, which holds on the hull.
    #[inline]
    pub fn branch_real(&self, letter: Letter, x: f64) -> f64 {
        letter.sign() * (x - self.c).sqrt()
    }

    pub fn compose_real(&self, w: &Word, x: f64) -> f64 {
        w.letters()
            .iter()
            .fold(x, |acc, &l| self.branch_real(l, acc))
    }

    pub fn derivative_real(&self, w: &Word, x: f64) -> f64 {
        let mut y = x;
        let mut prod = 1.0;
        for &l in w.letters() {
            y = self.branch_real(l, y);
            prod /= 2.0 * y;
        }
        prod
    }

    /// The intermediate points `x_1, ..., x_n` of `g_w` started at `x`.
    pub fn trajectory_real(&self, w: &Word, x: f64) -> Vec<f64> {
        let mut y = x;
        w.letters()
            .iter()
            .map(|&l| {
                y = self.branch_real(l, y);
                y
            })
            .collect()
    }

    /// `g_w(I_+ ∪ I_-)` as the two images of the branch intervals.
    pub fn image_intervals(&self, w: &Word) -> [Interval; 2] {
        let img = |iv: Interval| {
            Interval::spanning(self.compose_real(w, iv.lo), self.compose_real(w, iv.hi))
        };
        [img(self.i_minus), img(self.i_plus)]
    }

    /// The unique fixed point of `g_w`, found by iterating `g_w` from `ζ_c`.
    pub fn periodic_point(&self, w: &Word) -> Result<PeriodicOrbit> {
        let mut z = self.zeta_c;
        let mut converged = false;
        for _ in 0..FIXED_POINT_MAX_ITER {
            let next = self.compose_real(w, z);
            let step = (next - z).abs();
            z = next;
            if step < FIXED_POINT_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence {
                what: "periodic point iteration",
                iterations: FIXED_POINT_MAX_ITER,
            });
        }
        // Backward points are well conditioned; forward iteration of f would
        // amplify round-off by |Λ|.
        let backward = self.trajectory_real(w, z);
        let n = w.len();
        let orbit: Vec<f64> = (0..n)
            .map(|j| if j == 0 { z } else { backward[n - 1 - j] })
            .collect();
        let multiplier = orbit.iter().map(|x| 2.0 * x).product();
        Ok(PeriodicOrbit {
            word: w.clone(),
            point: z,
            orbit,
            multiplier,
        })
    }

    /// One orbit per word of length `n`, in lexicographic word order.
    pub fn enumerate_orbits(&self, n: usize) -> Result<Vec<PeriodicOrbit>> {
        self.enumerate_orbits_with(n, Execution::default())
    }

    pub fn enumerate_orbits_with(&self, n: usize, exec: Execution) -> Result<Vec<PeriodicOrbit>> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "orbit period must be at least 1".into(),
            ));
        }
        if n > MAX_ORDER {
            return Err(Error::Capacity {
                requested: n,
                max: MAX_ORDER,
            });
        }
        exec.map_range(1usize << n, |i| {
            self.periodic_point(&Word::from_index(n, i))
        })
        .into_iter()
        .collect()
    }
}

/// Sampled min and max of `|g_w'|` over `I` for every word of one length,
/// indexed in lexicographic word order.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelExtremes {
    pub n: usize,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl SystemParams {
    /// [`LevelExtremes`] for every length `1..=n_max`, over the standard
    /// sample grid. Words are grown one letter at a time per sample point,
    /// so the cost is `O(2^{n_max})` per point.
    pub fn derivative_extremes(&self, n_max: usize, exec: Execution) -> Result<Vec<LevelExtremes>> {
        if n_max == 0 || n_max > MAX_ORDER {
            return Err(Error::Capacity {
                requested: n_max,
                max: MAX_ORDER,
            });
        }
        const CHUNK: usize = 64;
        let samples = self.sample_points();
        let chunks: Vec<&[f64]> = samples.chunks(CHUNK).collect();
        let partial = exec.map_slice(&chunks, |chunk| self.extremes_over(chunk, n_max));
        let mut merged = partial
            .into_iter()
            .reduce(|mut acc, other| {
                for (a, b) in acc.iter_mut().zip(other) {
                    for (x, y) in a.min.iter_mut().zip(b.min) {
                        *x = x.min(y);
                    }
                    for (x, y) in a.max.iter_mut().zip(b.max) {
                        *x = x.max(y);
                    }
                }
                acc
            })
            .expect("sample grid is non-empty");
        merged.shrink_to_fit();
        Ok(merged)
    }

    fn extremes_over(&self, points: &[f64], n_max: usize) -> Vec<LevelExtremes> {
        let mut levels: Vec<LevelExtremes> = (1..=n_max)
            .map(|n| LevelExtremes {
                n,
                min: vec![f64::INFINITY; 1 << n],
                max: vec![0.0; 1 << n],
            })
            .collect();
        let mut pts = Vec::with_capacity(1 << n_max);
        let mut ders = Vec::with_capacity(1 << n_max);
        let mut next_pts = Vec::with_capacity(1 << n_max);
        let mut next_ders = Vec::with_capacity(1 << n_max);
        for &x in points {
            pts.clear();
            ders.clear();
            pts.push(x);
            ders.push(1.0);
            for level in levels.iter_mut() {
                next_pts.clear();
                next_ders.clear();
                for (&p, &d) in pts.iter().zip(&ders) {
                    let root = (p - self.c).sqrt();
                    for y in [-root, root] {
                        next_pts.push(y);
                        next_ders.push(d / (2.0 * y));
                    }
                }
                for (i, &d) in next_ders.iter().enumerate() {
                    let a = d.abs();
                    level.min[i] = level.min[i].min(a);
                    level.max[i] = level.max[i].max(a);
                }
                std::mem::swap(&mut pts, &mut next_pts);
                std::mem::swap(&mut ders, &mut next_ders);
            }
        }
        levels
    }
}

/// A period-`n` point of `f` together with its orbit and multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub word: Word,
    /// `z*` with `g_w(z*) = z*`.
    pub point: f64,
    /// `x_0 = z*, x_1 = f(x_0), ..., x_{n-1}`. The point `x_j` carries the
    /// sign of letter `w_{n-j}`, the branch that produced it.
    pub orbit: Vec<f64>,
    /// `Λ = (f^n)'(z*) = ∏ 2 x_j`.
    pub multiplier: f64,
}

impl PeriodicOrbit {
    pub fn period(&self) -> usize {
        self.orbit.len()
    }

    /// Letter of the branch that produced orbit point `x_j`.
    pub fn letter_of(&self, j: usize) -> Letter {
        let n = self.period();
        self.word.letters()[n - 1 - j]
    }
}
