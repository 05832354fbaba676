//! Numeric checks of the closed-form inequalities behind phase separation,
//! plus empirical distortion and contraction constants.

use serde::{Deserialize, Serialize};

use crate::dynamics::SystemParams;
use crate::error::{Error, Result};
use crate::parallel::Execution;

/// Largest word length accepted by [`estimate_distortion`].
pub const MAX_DISTORTION_LENGTH: usize = 14;

/// Tolerance for flagging `θ₀ = 1` as the boundary case.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// `|x / (2(x - c))|`, the ratio `|s_{i+1} / s_i|` of consecutive phase
/// terms when `x_i = x`.
pub fn step_ratio(sys: &SystemParams, x: f64) -> f64 {
    (x / (2.0 * (x - sys.c()))).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionCheck {
    /// `ζ_c / (2(-ζ_c - c))`, the sup of [`step_ratio`] over `I_- ∪ I_+`,
    /// attained at `x = -ζ_c`.
    pub theta0: f64,
    pub holds: bool,
    pub boundary: bool,
}

pub fn check_contraction_ratio(sys: &SystemParams) -> ContractionCheck {
    let theta0 = sys.theta0();
    ContractionCheck {
        theta0,
        holds: theta0 < 1.0,
        boundary: (theta0 - 1.0).abs() < BOUNDARY_TOL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sqrt5Check {
    /// `θ₀ / (1 - η₀)`.
    pub ratio: f64,
    pub holds: bool,
}

/// `θ₀ / (1 - η₀) < 1`, equivalent to `c < -2 - √5` for `c < -2`.
pub fn check_sqrt5_threshold(sys: &SystemParams) -> Sqrt5Check {
    let ratio = sys.theta0() / (1.0 - sys.eta0());
    Sqrt5Check {
        ratio,
        holds: ratio < 1.0,
    }
}

/// Sub-expressions of the two-bracket inequality, kept for inspection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBracketCheck {
    /// `λ = -√(-ζ_c - c)`.
    pub lambda: f64,
    /// `g_+(g_-(-λ)) / (2(g_+(g_-(-λ)) - c))`.
    pub q: f64,
    /// `-g_-(λ) / (2(g_-(λ) - c))`.
    pub r: f64,
    /// `g_+(λ) / (2(g_+(λ) - c))`.
    pub p: f64,
    /// `(-λ / (2(λ - c))) / η₀`.
    pub prefactor: f64,
    pub first: f64,
    pub second: f64,
    pub lhs: f64,
    pub holds: bool,
}

fn real_branch(sys: &SystemParams, sign: f64, x: f64) -> Result<f64> {
    let arg = x - sys.c();
    if !(arg > 0.0) {
        return Err(Error::Domain(format!(
            "branch argument x - c = {arg} is on the cut"
        )));
    }
    Ok(sign * arg.sqrt())
}

/// ```text
/// (θ₀ (1 + q / (1 - η₀)) - 1) + prefactor · (r (1 + p / (1 - η₀)) - 1) < 0
/// ```
pub fn check_two_bracket(sys: &SystemParams) -> Result<TwoBracketCheck> {
    let c = sys.c();
    let theta0 = sys.theta0();
    let eta0 = sys.eta0();
    let lambda = -(-sys.zeta_c() - c).sqrt();

    let g_minus_of_neg_lambda = real_branch(sys, -1.0, -lambda)?;
    let big_g = real_branch(sys, 1.0, g_minus_of_neg_lambda)?;
    let q = big_g / (2.0 * (big_g - c));
    let first = theta0 * (1.0 + q / (1.0 - eta0)) - 1.0;

    let prefactor = (-lambda / (2.0 * (lambda - c))) / eta0;
    let g_minus_lambda = real_branch(sys, -1.0, lambda)?;
    let r = -g_minus_lambda / (2.0 * (g_minus_lambda - c));
    let g_plus_lambda = real_branch(sys, 1.0, lambda)?;
    let p = g_plus_lambda / (2.0 * (g_plus_lambda - c));
    let second = prefactor * (r * (1.0 + p / (1.0 - eta0)) - 1.0);

    let lhs = first + second;
    Ok(TwoBracketCheck {
        lambda,
        q,
        r,
        p,
        prefactor,
        first,
        second,
        lhs,
        holds: lhs < 0.0,
    })
}

/// Endpoint evaluation of the step ratio on both branch intervals.
///
/// The ratio decreases on `I_-` and increases on `I_+`, so the inf over
/// `I_-` sits at `-√(-ζ_c - c)` and the sup over `I_+` at `ζ_c` (where it
/// equals `η₀`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRatioCheck {
    pub inf_minus: f64,
    pub inf_minus_at: f64,
    pub sup_plus: f64,
    pub sup_plus_at: f64,
    /// `inf_minus > sup_plus`: every ratio on `I_-` beats every ratio on `I_+`.
    pub ordered: bool,
    /// `inf_minus > 1/2 > sup_plus`.
    pub half_separates: bool,
}

pub fn check_step_ratio_order(sys: &SystemParams) -> StepRatioCheck {
    let inf_minus_at = sys.i_minus().hi;
    let sup_plus_at = sys.i_plus().hi;
    let inf_minus = step_ratio(sys, inf_minus_at);
    let sup_plus = step_ratio(sys, sup_plus_at);
    StepRatioCheck {
        inf_minus,
        inf_minus_at,
        sup_plus,
        sup_plus_at,
        ordered: inf_minus > sup_plus,
        half_separates: inf_minus > 0.5 && 0.5 > sup_plus,
    }
}

/// True when the step ratio is monotone (either direction) on the sample
/// grid of each branch interval.
pub fn step_ratio_monotone(sys: &SystemParams) -> bool {
    [sys.i_minus(), sys.i_plus()].iter().all(|iv| {
        let vals: Vec<f64> = iv
            .grid(crate::dynamics::SAMPLES_PER_INTERVAL)
            .map(|x| step_ratio(sys, x))
            .collect();
        vals.windows(2).all(|p| p[0] <= p[1]) || vals.windows(2).all(|p| p[0] >= p[1])
    })
}

/// Empirical distortion constant: max over `|w| <= n_max` of the ratio of
/// max to min sampled `|g_w'|` over `I`.
pub fn estimate_distortion(sys: &SystemParams, n_max: usize) -> Result<f64> {
    Ok(*distortion_profile(sys, n_max)?.last().expect("n_max >= 1"))
}

/// `C(n)` for `n = 1..=n_max`, cumulative in `n`.
pub fn distortion_profile(sys: &SystemParams, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 || n_max > MAX_DISTORTION_LENGTH {
        return Err(Error::Capacity {
            requested: n_max,
            max: MAX_DISTORTION_LENGTH,
        });
    }
    let levels = sys.derivative_extremes(n_max, Execution::default())?;
    let mut running = 1.0f64;
    Ok(levels
        .iter()
        .map(|level| {
            let worst = level
                .min
                .iter()
                .zip(&level.max)
                .map(|(lo, hi)| hi / lo)
                .fold(1.0f64, f64::max);
            running = running.max(worst);
            running
        })
        .collect())
}

/// Max over `|w| = n` of sampled `sup |g_w'|`, with the first `n` at which
/// it drops below one and a geometric rate estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionProfile {
    pub sup_by_length: Vec<f64>,
    pub n0: Option<usize>,
    pub rate: f64,
}

pub fn contraction_profile(sys: &SystemParams, n_max: usize) -> Result<ContractionProfile> {
    let levels = sys.derivative_extremes(n_max, Execution::default())?;
    let sup_by_length: Vec<f64> = levels
        .iter()
        .map(|l| l.max.iter().cloned().fold(0.0, f64::max))
        .collect();
    let n0 = sup_by_length.iter().position(|&s| s < 1.0).map(|i| i + 1);
    let rate = if n_max > 1 {
        (sup_by_length[n_max - 1] / sup_by_length[0]).powf(1.0 / (n_max - 1) as f64)
    } else {
        sup_by_length[0]
    };
    Ok(ContractionProfile {
        sup_by_length,
        n0,
        rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub contraction_ratio_below_one: bool,
    pub theta0_at_boundary: bool,
    pub sqrt5_ratio_below_one: bool,
    pub two_bracket_negative: bool,
    pub step_ratio_ordered: bool,
    pub step_ratio_half_separates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub c: f64,
    pub zeta_c: f64,
    pub theta0: f64,
    pub eta0: f64,
    pub ratio_sqrt5: f64,
    pub lhs_two_bracket: f64,
    pub two_bracket_terms: TwoBracketCheck,
    /// `(inf over I_-, 1/2, sup over I_+)`.
    pub step_ratio_triple: (f64, f64, f64),
    pub verdicts: Verdicts,
}

impl VerificationReport {
    pub fn new(sys: &SystemParams) -> Result<Self> {
        let contraction = check_contraction_ratio(sys);
        let sqrt5 = check_sqrt5_threshold(sys);
        let two_bracket = check_two_bracket(sys)?;
        let order = check_step_ratio_order(sys);
        Ok(VerificationReport {
            schema_version: 1,
            c: sys.c(),
            zeta_c: sys.zeta_c(),
            theta0: contraction.theta0,
            eta0: sys.eta0(),
            ratio_sqrt5: sqrt5.ratio,
            lhs_two_bracket: two_bracket.lhs,
            two_bracket_terms: two_bracket,
            step_ratio_triple: (order.inf_minus, 0.5, order.sup_plus),
            verdicts: Verdicts {
                contraction_ratio_below_one: contraction.holds,
                theta0_at_boundary: contraction.boundary,
                sqrt5_ratio_below_one: sqrt5.holds,
                two_bracket_negative: two_bracket.holds,
                step_ratio_ordered: order.ordered,
                step_ratio_half_separates: order.half_separates,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    use crate::dynamics::Letter;

    fn sys(c: f64) -> SystemParams {
        SystemParams::new(c).unwrap()
    }

    #[test]
    fn contraction_ratio_examples() {
        let boundary = check_contraction_ratio(&sys(-3.75));
        assert_eq!(boundary.theta0, 1.0);
        assert!(!boundary.holds && boundary.boundary);
        let four = check_contraction_ratio(&sys(-4.0));
        assert!((four.theta0 - 0.8903882032).abs() < 1e-9 && four.holds);
        let three = check_contraction_ratio(&sys(-3.0));
        assert!((three.theta0 - 1.6513878189).abs() < 1e-9 && !three.holds);
    }

    #[test]
    fn theta0_is_the_sampled_sup() {
        for c in [-3.0, -4.0, -7.5] {
            let s = sys(c);
            let sup = s
                .sample_points()
                .iter()
                .map(|&x| step_ratio(&s, x))
                .fold(0.0, f64::max);
            assert!((sup - s.theta0()).abs() < 1e-14 * s.theta0());
            assert_eq!(step_ratio(&s, -s.zeta_c()), sup);
        }
    }

    #[test]
    fn sqrt5_examples() {
        let c = -2.0 - 5f64.sqrt();
        assert!((check_sqrt5_threshold(&sys(c)).ratio - 1.0).abs() < 1e-12);
        assert!(check_sqrt5_threshold(&sys(-5.0)).holds);
        let four = check_sqrt5_threshold(&sys(-4.0));
        assert!((four.ratio - 1.1063390626).abs() < 1e-9 && !four.holds);
    }

    /// Second transcription of the two-bracket inequality from the step
    /// ratios along the extremal itineraries, using complex branches.
    fn two_bracket_oracle(s: &SystemParams) -> f64 {
        let rho = |x: f64| step_ratio(s, x);
        let g = |l: Letter, x: f64| s.inverse_branch(l, Complex64::new(x, 0.0)).unwrap().re;
        let inner = s.i_plus().lo; // √(-ζ_c - c) = -λ
        let theta0 = rho(-s.zeta_c());
        let eta0 = rho(s.zeta_c());
        let tail = 1.0 / (1.0 - eta0);
        let first = theta0 * (1.0 + rho(g(Letter::Plus, g(Letter::Minus, inner))) * tail) - 1.0;
        let scale = rho(-inner) / eta0;
        let second = scale
            * (rho(g(Letter::Minus, -inner)) * (1.0 + rho(g(Letter::Plus, -inner)) * tail) - 1.0);
        first + second
    }

    #[test]
    fn two_bracket_matches_independent_transcription() {
        for c in [-2.1, -3.0, -3.5, -3.76, -4.0, -6.0, -10.0, -50.0] {
            let s = sys(c);
            let got = check_two_bracket(&s).unwrap().lhs;
            let oracle = two_bracket_oracle(&s);
            assert!((got - oracle).abs() < 1e-13, "c = {c}: {got} vs {oracle}");
        }
    }

    #[test]
    fn two_bracket_holds_on_examples() {
        for c in [-3.76, -4.0, -6.0, -10.0] {
            let check = check_two_bracket(&sys(c)).unwrap();
            assert!(check.holds, "c = {c}: lhs = {}", check.lhs);
        }
        // informational only
        assert!(check_two_bracket(&sys(-3.5)).unwrap().lhs.is_finite());
    }

    #[test]
    fn two_bracket_is_continuous() {
        let mut prev = check_two_bracket(&sys(-10.0)).unwrap().lhs;
        let mut c = -10.0;
        while c < -2.1 {
            c += 1e-3;
            let lhs = check_two_bracket(&sys(c)).unwrap().lhs;
            assert!(
                (lhs - prev).abs() < 0.05 * prev.abs().max(1.0),
                "jump at c = {c}"
            );
            prev = lhs;
        }
    }

    #[test]
    fn step_ratio_endpoints_and_monotonicity() {
        for c in [-4.0, -10.0] {
            let s = sys(c);
            let check = check_step_ratio_order(&s);
            assert!(check.ordered, "c = {c}");
            assert!(!check.half_separates, "c = {c}");
            assert!((check.sup_plus - s.eta0()).abs() < 1e-15);
            assert!(step_ratio_monotone(&s));
            let sampled_inf = s
                .i_minus()
                .grid(512)
                .map(|x| step_ratio(&s, x))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(sampled_inf, check.inf_minus);
        }
        let four = check_step_ratio_order(&sys(-4.0));
        assert!((four.inf_minus - 1.1993528 / (2.0 * (4.0 - 1.1993528))).abs() < 1e-7);
    }

    #[test]
    fn distortion_constants() {
        let s = sys(-4.0);
        let profile = distortion_profile(&s, 10).unwrap();
        assert!(profile.windows(2).all(|p| p[0] <= p[1]));
        assert!(profile[0] >= 1.0);
        // one letter: |g_±'(x)| = 1 / (2√(x - c)), extremal at the hull ends
        let expected = s.zeta_c() / s.i_plus().lo;
        assert!((profile[0] - expected).abs() < 1e-12 * expected);
        assert!(estimate_distortion(&s, 15).is_err());
    }

    #[test]
    fn contraction_profile_decays() {
        let profile = contraction_profile(&sys(-4.0), 10).unwrap();
        assert_eq!(profile.n0, Some(1));
        assert!(profile.rate < 1.0);
        assert!(profile.sup_by_length.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn report_serializes_with_schema_version() {
        let report = VerificationReport::new(&sys(-4.0)).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["schema_version"], 1);
        assert!(json["lhs_two_bracket"].as_f64().unwrap() < 0.0);
        assert_eq!(json["step_ratio_triple"][1], 0.5);
    }
}
