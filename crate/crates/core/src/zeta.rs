//! Trace coefficients `a_n(s)` and the zeta approximant `Δ_N(s)`.
//!
//! With `Λ` the multiplier of a period-`n` point,
//!
//! ```text
//! a_n(s) = (1/n) Σ_{f^n z = z} |Λ|^{-s} Λ² / (Λ - 1)²
//! Δ_N(s) = 1 + Σ_{n=1..N} Σ_{n_1+...+n_m=n} ((-1)^m / m!) ∏ a_{n_l}(s)
//! ```
//!
//! `Δ_N` is the degree-`N` truncation of `exp(-Σ a_n)`; it is evaluated by
//! the power-series recursion `d_n = -(1/n) Σ_k k a_k d_{n-k}`. The ordered
//! composition sum is kept as [`ZetaApproximant::delta_by_compositions`] for
//! cross-checking.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::dynamics::{SystemParams, MAX_ORDER};
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::reduce::pairwise_sum_by;

/// Largest order accepted by the composition-sum cross-check.
pub const MAX_COMPOSITION_ORDER: usize = 10;

const WEIGHT_IDENTITY_TOL: f64 = 1e-12;

/// `Λ² / (Λ - 1)²`.
pub fn orbit_weight(multiplier: f64) -> f64 {
    let r = multiplier / (multiplier - 1.0);
    r * r
}

/// The weight as printed in the cycle-expansion formula,
/// `(1 + (1 - 2Λ) / |Λ|²)^{-1}`.
pub fn printed_weight(multiplier: f64) -> f64 {
    1.0 / (1.0 + (1.0 - 2.0 * multiplier) / (multiplier * multiplier))
}

/// All period-`n` points of one level: multipliers and cached logs/weights,
/// in lexicographic word order.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLevel {
    pub n: usize,
    pub multiplier: Vec<f64>,
    pub log_abs_multiplier: Vec<f64>,
    pub weight: Vec<f64>,
}

impl TraceLevel {
    pub fn len(&self) -> usize {
        self.multiplier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multiplier.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    c: f64,
    levels: Vec<TraceLevel>,
}

#[derive(Clone, Copy, Default)]
struct Pair(Complex64, Complex64);

impl Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}

#[derive(Clone, Copy, Default)]
struct RealPair(f64, f64);

impl Add for RealPair {
    type Output = RealPair;
    fn add(self, o: RealPair) -> RealPair {
        RealPair(self.0 + o.0, self.1 + o.1)
    }
}

impl TraceTable {
    pub fn build(sys: &SystemParams, order: usize) -> Result<Self> {
        Self::build_with(sys, order, Execution::default())
    }

    pub fn build_with(sys: &SystemParams, order: usize, exec: Execution) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "trace table order must be at least 1".into(),
            ));
        }
        if order > MAX_ORDER {
            return Err(Error::Capacity {
                requested: order,
                max: MAX_ORDER,
            });
        }
        let mut levels = Vec::with_capacity(order);
        for n in 1..=order {
            let orbits = sys.enumerate_orbits_with(n, exec)?;
            let multiplier: Vec<f64> = orbits.iter().map(|o| o.multiplier).collect();
            let mut weight = Vec::with_capacity(multiplier.len());
            for &lambda in &multiplier {
                let wt = orbit_weight(lambda);
                let printed = printed_weight(lambda);
                let relative_error = ((wt - printed) / wt).abs();
                if !(relative_error < WEIGHT_IDENTITY_TOL) {
                    return Err(Error::WeightIdentity {
                        multiplier: lambda,
                        relative_error,
                    });
                }
                weight.push(wt);
            }
            let log_abs_multiplier = multiplier.iter().map(|l| l.abs().ln()).collect();
            levels.push(TraceLevel {
                n,
                multiplier,
                log_abs_multiplier,
                weight,
            });
        }
        Ok(TraceTable { c: sys.c(), levels })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn order(&self) -> usize {
        self.levels.len()
    }

    /// Level `n`, for `1 <= n <= order`.
    pub fn level(&self, n: usize) -> &TraceLevel {
        &self.levels[n - 1]
    }

    pub fn levels(&self) -> &[TraceLevel] {
        &self.levels
    }

    /// `a_n(s)`.
    pub fn trace_coefficient(&self, n: usize, s: Complex64) -> Complex64 {
        self.trace_coefficient_with_derivative(n, s).0
    }

    /// `(a_n(s), a_n'(s))`, summed pairwise in lexicographic orbit order.
    pub fn trace_coefficient_with_derivative(
        &self,
        n: usize,
        s: Complex64,
    ) -> (Complex64, Complex64) {
        let level = self.level(n);
        let term = |i: usize| {
            let l = level.log_abs_multiplier[i];
            let t = (-s * l).exp() * level.weight[i];
            Pair(t, t * -l)
        };
        let Pair(a, da) = pairwise_sum_by(level.len(), &term);
        let inv = 1.0 / n as f64;
        (a * inv, da * inv)
    }

    /// Real-argument fast path of [`Self::trace_coefficient_with_derivative`].
    pub fn trace_coefficient_real(&self, n: usize, s: f64) -> (f64, f64) {
        let level = self.level(n);
        let term = |i: usize| {
            let l = level.log_abs_multiplier[i];
            let t = (-s * l).exp() * level.weight[i];
            RealPair(t, -t * l)
        };
        let RealPair(a, da) = pairwise_sum_by(level.len(), &term);
        let inv = 1.0 / n as f64;
        (a * inv, da * inv)
    }
}

/// Coefficients of `exp(-A(x))` and of its `s`-derivative, summed over
/// degrees `0..=N` at `x = 1`, given `a_k` and `a_k'` for `k = 1..=N`.
fn exp_series<T>(one: T, a: &[T], da: &[T]) -> (T, T)
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Mul<f64, Output = T>,
{
    let order = a.len();
    let mut d = Vec::with_capacity(order + 1);
    let mut dd = Vec::with_capacity(order + 1);
    d.push(one);
    dd.push(T::default());
    let mut total = one;
    let mut total_d = T::default();
    for n in 1..=order {
        let mut acc = T::default();
        let mut acc_d = T::default();
        for k in 1..=n {
            let kf = k as f64;
            acc = acc + a[k - 1] * d[n - k] * kf;
            acc_d = acc_d + (da[k - 1] * d[n - k] + a[k - 1] * dd[n - k]) * kf;
        }
        let scale = -1.0 / n as f64;
        let dn = acc * scale;
        let ddn = acc_d * scale;
        d.push(dn);
        dd.push(ddn);
        total = total + dn;
        total_d = total_d + ddn;
    }
    (total, total_d)
}

/// `Δ_N(s)` for one parameter `c`, backed by a shared trace table.
#[derive(Debug, Clone)]
pub struct ZetaApproximant {
    table: Arc<TraceTable>,
    order: usize,
}

impl ZetaApproximant {
    /// Approximant of the table's full order.
    pub fn new(table: TraceTable) -> Self {
        let order = table.order();
        ZetaApproximant {
            table: Arc::new(table),
            order,
        }
    }

    pub fn build(sys: &SystemParams, order: usize) -> Result<Self> {
        Ok(Self::new(TraceTable::build(sys, order)?))
    }

    /// The same table truncated at a lower order `N <= table.order()`.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        if order > self.table.order() {
            return Err(Error::Capacity {
                requested: order,
                max: self.table.order(),
            });
        }
        Ok(ZetaApproximant {
            table: Arc::clone(&self.table),
            order,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn table(&self) -> &TraceTable {
        &self.table
    }

    pub fn c(&self) -> f64 {
        self.table.c()
    }

    fn coefficients(&self, s: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
        (1..=self.order)
            .map(|n| self.table.trace_coefficient_with_derivative(n, s))
            .unzip()
    }

    pub fn delta(&self, s: Complex64) -> Complex64 {
        self.delta_and_derivative(s).0
    }

    pub fn delta_derivative(&self, s: Complex64) -> Complex64 {
        self.delta_and_derivative(s).1
    }

    /// `(Δ_N(s), Δ_N'(s))`.
    pub fn delta_and_derivative(&self, s: Complex64) -> (Complex64, Complex64) {
        let (a, da) = self.coefficients(s);
        exp_series(Complex64::new(1.0, 0.0), &a, &da)
    }

    /// `(Δ_N(x), Δ_N'(x))` for real `x`.
    pub fn delta_real(&self, x: f64) -> (f64, f64) {
        let (a, da): (Vec<f64>, Vec<f64>) = (1..=self.order)
            .map(|n| self.table.trace_coefficient_real(n, x))
            .unzip();
        exp_series(1.0, &a, &da)
    }

    /// `Δ_N(s)` by direct enumeration of ordered compositions of every
    /// `n <= N`. Exponential cost; restricted to `N <= 10`.
    pub fn delta_by_compositions(&self, s: Complex64) -> Result<Complex64> {
        if self.order > MAX_COMPOSITION_ORDER {
            return Err(Error::Capacity {
                requested: self.order,
                max: MAX_COMPOSITION_ORDER,
            });
        }
        let (a, _) = self.coefficients(s);
        let mut total = Complex64::new(1.0, 0.0);
        let mut parts = Vec::new();
        for n in 1..=self.order {
            total += composition_sum(&a, n, &mut parts);
        }
        Ok(total)
    }
}

/// `Σ_{n_1+...+n_m=n} ((-1)^m / m!) ∏ a_{n_l}`.
fn composition_sum(a: &[Complex64], n: usize, parts: &mut Vec<usize>) -> Complex64 {
    fn walk(a: &[Complex64], remaining: usize, parts: &mut Vec<usize>, acc: &mut Complex64) {
        if remaining == 0 {
            let m = parts.len();
            let factorial: f64 = (1..=m).map(|k| k as f64).product();
            let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
            let prod = parts
                .iter()
                .fold(Complex64::new(1.0, 0.0), |p, &k| p * a[k - 1]);
            *acc += prod * (sign / factorial);
            return;
        }
        for first in 1..=remaining {
            parts.push(first);
            walk(a, remaining - first, parts, acc);
            parts.pop();
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    parts.clear();
    walk(a, n, parts, &mut acc);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approximant(c: f64, order: usize) -> ZetaApproximant {
        ZetaApproximant::build(&SystemParams::new(c).unwrap(), order).unwrap()
    }

    #[test]
    fn first_level_at_minus_four() {
        let table = TraceTable::build(&SystemParams::new(-4.0).unwrap(), 1).unwrap();
        let level = table.level(1);
        assert_eq!(level.len(), 2);
        // lexicographic: "-" first
        assert!((level.log_abs_multiplier[0] - 1.1388278996).abs() < 1e-9);
        assert!((level.weight[0] - 0.5737522793).abs() < 1e-9);
        assert!((level.log_abs_multiplier[1] - 1.6337608227).abs() < 1e-9);
        assert!((level.weight[1] - 1.5438947795).abs() < 1e-9);
    }

    #[test]
    fn level_sizes_and_positivity() {
        let table = TraceTable::build(&SystemParams::new(-3.2).unwrap(), 8).unwrap();
        for (i, level) in table.levels().iter().enumerate() {
            assert_eq!(level.len(), 1 << (i + 1));
            assert!(level.weight.iter().all(|&w| w > 0.0));
            assert!(level.log_abs_multiplier.iter().all(|&l| l > 0.0));
        }
    }

    #[test]
    fn period_two_pair_has_exact_multiplier() {
        let table = TraceTable::build(&SystemParams::new(-4.0).unwrap(), 2).unwrap();
        let level = table.level(2);
        // order: --, -+, +-, ++
        assert!((level.multiplier[1] + 12.0).abs() < 1e-12);
        assert!((level.multiplier[2] + 12.0).abs() < 1e-12);
    }

    #[test]
    fn first_trace_coefficient_values() {
        let table = TraceTable::build(&SystemParams::new(-4.0).unwrap(), 1).unwrap();
        let a_half = table.trace_coefficient(1, Complex64::new(0.5, 0.0));
        assert!((a_half.re - 1.0067664244).abs() < 1e-9 && a_half.im == 0.0);
        let a_zero = table.trace_coefficient(1, Complex64::new(0.0, 0.0));
        assert!((a_zero.re - 36.0 / 17.0).abs() < 1e-12);
    }

    #[test]
    fn order_zero_is_identically_one() {
        let z = approximant(-4.0, 3).truncated(0).unwrap();
        for s in [Complex64::new(0.3, 4.0), Complex64::new(-1.0, 0.0)] {
            assert_eq!(z.delta(s), Complex64::new(1.0, 0.0));
            assert_eq!(z.delta_derivative(s), Complex64::new(0.0, 0.0));
        }
        assert!(z.truncated(4).is_err());
    }

    #[test]
    fn order_two_closed_form() {
        let z = approximant(-3.0, 2);
        let s = Complex64::new(0.4, 2.5);
        let a1 = z.table().trace_coefficient(1, s);
        let a2 = z.table().trace_coefficient(2, s);
        let expected = 1.0 - a1 - a2 + a1 * a1 / 2.0;
        assert!((z.delta(s) - expected).norm() < 1e-15);
    }

    #[test]
    fn real_path_matches_complex_path() {
        let z = approximant(-4.0, 10);
        for x in [0.1, 0.5345, 0.9] {
            let (d, dd) = z.delta_real(x);
            let (c, dc) = z.delta_and_derivative(Complex64::new(x, 0.0));
            assert!((d - c.re).abs() < 1e-13 && c.im == 0.0);
            assert!((dd - dc.re).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let z = approximant(-3.5, 8);
        for s in [Complex64::new(0.6, 3.0), Complex64::new(0.2, -11.0)] {
            let a = z.delta(s);
            let b = z.delta(s.conj());
            assert!((a.conj() - b).norm() <= 1e-14 * a.norm().max(1.0));
            let t = z.table().trace_coefficient(5, s);
            assert!((t.conj() - z.table().trace_coefficient(5, s.conj())).norm() < 1e-14);
        }
    }

    #[test]
    fn compositions_capped() {
        assert!(matches!(
            approximant(-4.0, 11).delta_by_compositions(Complex64::new(0.5, 0.0)),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn weight_identity_holds_on_examples() {
        for l in [5.1231056, -3.1231056, -12.0, 1.0e12, -7.5e9] {
            let rel = ((orbit_weight(l) - printed_weight(l)) / orbit_weight(l)).abs();
            assert!(rel < 1e-12, "{l}: {rel}");
        }
    }
}
