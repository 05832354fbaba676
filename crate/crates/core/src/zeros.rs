//! Zeros of `Δ_N`: the dimension as the largest real zero, Moran bounds,
//! Newton atlases over rectangles, and argument-principle counts.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::SystemParams;
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::quadrature::GaussLegendre;
use crate::reduce::pairwise_sum_by;
use crate::zeta::ZetaApproximant;

/// Default real bracket for the dimension search.
pub const DEFAULT_BRACKET: (f64, f64) = (0.01, 1.2);
/// Downward scan step used to locate the largest sign change.
pub const SCAN_STEP: f64 = 1e-3;
pub const BISECTION_WIDTH: f64 = 1e-6;
pub const REAL_RESIDUAL: f64 = 1e-12;
pub const ZERO_RESIDUAL: f64 = 1e-10;
pub const DEDUP_RADIUS: f64 = 1e-6;
pub const NEWTON_MAX_ITER: usize = 50;
/// Initial quadrature points per rectangle side (panels × rule size).
pub const QUADRATURE_POINTS: usize = 4096;
const QUADRATURE_RULE: usize = 16;
const QUADRATURE_DOUBLINGS: usize = 4;
pub const INTEGRALITY_TOL: f64 = 1e-3;
pub const CONTOUR_RETRIES: usize = 3;
/// When a rectangle starts on the real axis the contour's lower edge is
/// moved to `-REAL_AXIS_OFFSET` so that real zeros are enclosed.
pub const REAL_AXIS_OFFSET: f64 = 1e-3;
const PERTURBATION: f64 = 7.3e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub s: Complex64,
    /// `|Δ_N(s)|`.
    pub residual: f64,
    pub newton_iterations: usize,
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let finite = [re_min, re_max, im_min, im_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(re_min < re_max) || !(0.0 <= im_min && im_min < im_max) {
            return Err(Error::InvalidArgument(format!(
                "invalid rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Rectangle {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn contains(&self, s: Complex64) -> bool {
        self.re_min <= s.re && s.re <= self.re_max && self.im_min <= s.im && s.im <= self.im_max
    }

    fn expanded(&self, by: f64) -> Rectangle {
        Rectangle {
            re_min: self.re_min - by,
            re_max: self.re_max + by,
            im_min: if self.im_min == 0.0 {
                0.0
            } else {
                (self.im_min - by).max(0.0)
            },
            im_max: self.im_max + by,
        }
    }
}

/// Largest real zero of `Δ_N` in `[lo, hi]`: downward scan from `hi`,
/// bisection of the first sign change, then Newton polish.
pub fn largest_real_zero(zeta: &ZetaApproximant, lo: f64, hi: f64) -> Result<Zero> {
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "empty bracket [{lo}, {hi}]"
        )));
    }
    let value = |x: f64| zeta.delta_real(x).0;
    let steps = ((hi - lo) / SCAN_STEP).ceil() as usize;
    let mut upper = hi;
    let mut f_upper = value(upper);
    let mut bracket = None;
    for k in 1..=steps {
        let lower = (hi - k as f64 * SCAN_STEP).max(lo);
        let f_lower = value(lower);
        if f_upper == 0.0 {
            bracket = Some((upper, upper, f_upper));
            break;
        }
        if f_lower.signum() != f_upper.signum() || f_lower == 0.0 {
            bracket = Some((lower, upper, f_lower));
            break;
        }
        upper = lower;
        f_upper = f_lower;
    }
    let (mut a, mut b, mut fa) = bracket.ok_or(Error::Bracket { lo, hi })?;
    while b - a > BISECTION_WIDTH {
        let mid = 0.5 * (a + b);
        let fm = value(mid);
        if fm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let (left, right) = (a, b);
    let mut x = 0.5 * (a + b);
    for iter in 0..=NEWTON_MAX_ITER {
        let (v, dv) = zeta.delta_real(x);
        if v.abs() < REAL_RESIDUAL {
            // one more step for round-off level accuracy
            let polished = if dv != 0.0 { x - v / dv } else { x };
            let pv = value(polished).abs();
            let (x, residual) = if pv <= v.abs() {
                (polished, pv)
            } else {
                (x, v.abs())
            };
            return Ok(Zero {
                s: Complex64::new(x, 0.0),
                residual,
                newton_iterations: iter,
                order: zeta.order(),
            });
        }
        if dv == 0.0 || !dv.is_finite() {
            break;
        }
        x -= v / dv;
        if !(left - BISECTION_WIDTH..=right + BISECTION_WIDTH).contains(&x) {
            break;
        }
    }
    Err(Error::Convergence {
        what: "Newton polish of the largest real zero",
        iterations: NEWTON_MAX_ITER,
    })
}

/// Two-sided dimension bounds from a level-`n` cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoranBracket {
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
}

impl MoranBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Root of `Σ r_i^s = 1` for contraction ratios `0 < r_i < 1`.
fn similarity_dimension(ratios: &[f64]) -> Result<f64> {
    if ratios.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::Domain(
            "Moran cover needs every sampled derivative in (0, 1); increase n".into(),
        ));
    }
    let logs: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let excess = |s: f64| pairwise_sum_by(logs.len(), &|i| (s * logs[i]).exp()) - 1.0;
    let (mut a, mut b) = (0.0, 1.0);
    while excess(b) > 0.0 {
        a = b;
        b *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if excess(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// `lo` solves `Σ_{|w|=n} (min |g_w'|)^s = 1`, `hi` the same with the max,
/// both sampled over `I`.
pub fn moran_bracket(sys: &SystemParams, n: usize) -> Result<MoranBracket> {
    moran_bracket_with(sys, n, Execution::default())
}

pub fn moran_bracket_with(sys: &SystemParams, n: usize, exec: Execution) -> Result<MoranBracket> {
    let levels = sys.derivative_extremes(n, exec)?;
    let level = levels.last().expect("n >= 1");
    Ok(MoranBracket {
        n,
        lo: similarity_dimension(&level.min)?,
        hi: similarity_dimension(&level.max)?,
    })
}

/// Newton iteration from `start`; `None` unless it converges to a point
/// with `|Δ_N| < 1e-10`.
pub fn newton(zeta: &ZetaApproximant, start: Complex64) -> Option<Zero> {
    let mut s = start;
    for iter in 1..=NEWTON_MAX_ITER {
        let (v, dv) = zeta.delta_and_derivative(s);
        if !(v.is_finite() && dv.is_finite()) || dv.norm() == 0.0 {
            return None;
        }
        let step = v / dv;
        s -= step;
        if !s.is_finite() || s.norm() > 1e4 {
            return None;
        }
        if step.norm() < 1e-13 * (1.0 + s.norm()) {
            let residual = zeta.delta(s).norm();
            return (residual < ZERO_RESIDUAL).then_some(Zero {
                s,
                residual,
                newton_iterations: iter,
                order: zeta.order(),
            });
        }
    }
    None
}

/// Reflect into the upper half-plane; round-off imaginary parts of real
/// zeros are dropped.
fn canonical(mut z: Zero) -> Zero {
    if z.s.im < 0.0 {
        z.s = z.s.conj();
    }
    if z.s.im < 1e-10 {
        z.s.im = 0.0;
    }
    z
}

fn grid_axis(min: f64, max: f64, step: f64) -> Vec<f64> {
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|k| min + k as f64 * step).collect()
}

/// Newton launched from every node of a `grid_step` lattice over `rect`;
/// deduplicated and sorted by imaginary then real part.
pub fn find_zeros_rectangle(
    zeta: &ZetaApproximant,
    rect: &Rectangle,
    grid_step: f64,
) -> Result<Vec<Zero>> {
    find_zeros_rectangle_with(zeta, rect, grid_step, Execution::default())
}

pub fn find_zeros_rectangle_with(
    zeta: &ZetaApproximant,
    rect: &Rectangle,
    grid_step: f64,
    exec: Execution,
) -> Result<Vec<Zero>> {
    if !(grid_step > 0.0) || !grid_step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let res = grid_axis(rect.re_min, rect.re_max, grid_step);
    let ims = grid_axis(rect.im_min, rect.im_max, grid_step);
    let nodes: Vec<Complex64> = ims
        .iter()
        .flat_map(|&im| res.iter().map(move |&re| Complex64::new(re, im)))
        .collect();
    let found = exec.map_slice(&nodes, |&s0| newton(zeta, s0).map(canonical));
    Ok(merge_zeros(found.into_iter().flatten(), rect))
}

fn merge_zeros(candidates: impl Iterator<Item = Zero>, rect: &Rectangle) -> Vec<Zero> {
    let mut kept: Vec<Zero> = Vec::new();
    for z in candidates.filter(|z| rect.contains(z.s)) {
        if kept.iter().all(|k| (k.s - z.s).norm() > DEDUP_RADIUS) {
            kept.push(z);
        }
    }
    sort_zeros(&mut kept);
    kept
}

fn sort_zeros(zeros: &mut [Zero]) {
    zeros.sort_by(|a, b| a.s.im.total_cmp(&b.s.im).then(a.s.re.total_cmp(&b.s.re)));
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArgumentCount {
    pub count: i64,
    /// `(1/2πi) ∮ Δ'/Δ`.
    pub integral: Complex64,
    pub points_per_side: usize,
    /// Contour actually integrated (after perturbation and real-axis offset).
    pub contour: Rectangle,
    pub attempts: usize,
}

/// Number of zeros of `Δ_N` with `Im(s)` in `[im_min, im_max]` by the
/// argument principle.
pub fn count_zeros_argument(zeta: &ZetaApproximant, rect: &Rectangle) -> Result<ArgumentCount> {
    count_zeros_argument_with(zeta, rect, Execution::default())
}

pub fn count_zeros_argument_with(
    zeta: &ZetaApproximant,
    rect: &Rectangle,
    exec: Execution,
) -> Result<ArgumentCount> {
    let rule = GaussLegendre::new(QUADRATURE_RULE);
    let mut last = Complex64::new(f64::NAN, f64::NAN);
    for attempt in 0..=CONTOUR_RETRIES {
        let contour = rect.expanded(attempt as f64 * PERTURBATION);
        let mut points = QUADRATURE_POINTS;
        for _ in 0..=QUADRATURE_DOUBLINGS {
            let integral = contour_integral(zeta, &contour, points / QUADRATURE_RULE, &rule, exec);
            last = integral;
            let nearest = integral.re.round();
            if integral.is_finite()
                && (integral.re - nearest).abs() < INTEGRALITY_TOL
                && integral.im.abs() < INTEGRALITY_TOL
            {
                return Ok(ArgumentCount {
                    count: nearest as i64,
                    integral,
                    points_per_side: points,
                    contour: Rectangle {
                        im_min: lower_edge(&contour),
                        ..contour
                    },
                    attempts: attempt + 1,
                });
            }
            points *= 2;
        }
    }
    Err(Error::Contour {
        value: last,
        attempts: CONTOUR_RETRIES + 1,
    })
}

fn lower_edge(rect: &Rectangle) -> f64 {
    if rect.im_min == 0.0 {
        -REAL_AXIS_OFFSET
    } else {
        rect.im_min
    }
}

fn contour_integral(
    zeta: &ZetaApproximant,
    rect: &Rectangle,
    panels: usize,
    rule: &GaussLegendre,
    exec: Execution,
) -> Complex64 {
    let y0 = lower_edge(rect);
    let corners = [
        Complex64::new(rect.re_min, y0),
        Complex64::new(rect.re_max, y0),
        Complex64::new(rect.re_max, rect.im_max),
        Complex64::new(rect.re_min, rect.im_max),
    ];
    let m = rule.nodes.len();
    let per_side = panels * m;
    let total = 4 * per_side;
    let values = exec.map_range(total, |idx| {
        let side = idx / per_side;
        let panel = (idx % per_side) / m;
        let k = idx % m;
        let a = corners[side];
        let b = corners[(side + 1) % 4];
        let h = (b - a) / panels as f64;
        let mid = a + h * (panel as f64 + 0.5);
        let z = mid + h * (0.5 * rule.nodes[k]);
        let (v, dv) = zeta.delta_and_derivative(z);
        dv / v * h * (0.5 * rule.weights[k])
    });
    let sum = pairwise_sum_by(values.len(), &|i| values[i]);
    sum / Complex64::new(0.0, 2.0 * PI)
}

/// Zeros over a rectangle cross-checked against the argument principle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroAtlas {
    pub c: f64,
    pub order: usize,
    pub rect: Rectangle,
    pub grid_step: f64,
    pub zeros: Vec<Zero>,
    pub contour: ArgumentCount,
    pub agrees: bool,
}

impl ZeroAtlas {
    pub fn max_re_nonreal(&self) -> Option<f64> {
        self.zeros
            .iter()
            .filter(|z| z.s.im > 0.0)
            .map(|z| z.s.re)
            .max_by(f64::total_cmp)
    }
}

/// Grid refinements tried when the Newton count falls short of the
/// contour count.
pub const ATLAS_REFINEMENTS: usize = 2;

/// Newton atlas plus argument-principle count. On disagreement, the grid
/// is halved (up to [`ATLAS_REFINEMENTS`] times) and launches are merged.
pub fn zero_atlas(zeta: &ZetaApproximant, rect: &Rectangle, grid_step: f64) -> Result<ZeroAtlas> {
    zero_atlas_with(zeta, rect, grid_step, Execution::default())
}

pub fn zero_atlas_with(
    zeta: &ZetaApproximant,
    rect: &Rectangle,
    grid_step: f64,
    exec: Execution,
) -> Result<ZeroAtlas> {
    let contour = count_zeros_argument_with(zeta, rect, exec)?;
    let mut step = grid_step;
    let mut zeros = find_zeros_rectangle_with(zeta, rect, step, exec)?;
    for _ in 0..ATLAS_REFINEMENTS {
        if zeros.len() as i64 >= contour.count {
            break;
        }
        step /= 2.0;
        let more = find_zeros_rectangle_with(zeta, rect, step, exec)?;
        zeros = merge_zeros(zeros.into_iter().chain(more), rect);
    }
    Ok(ZeroAtlas {
        c: zeta.c(),
        order: zeta.order(),
        rect: *rect,
        grid_step: step,
        agrees: zeros.len() as i64 == contour.count,
        zeros,
        contour,
    })
}

/// One row of a dimension sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub c: f64,
    pub order: usize,
    pub result: Result<SweepPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta: f64,
    pub residual: f64,
    pub bracket: MoranBracket,
}

/// Dimension `δ_N(c)` and its Moran bracket on the grid
/// `c_min, c_min + step, ..., <= c_max`.
pub fn dimension_sweep(
    c_min: f64,
    c_max: f64,
    step: f64,
    order: usize,
    moran_order: usize,
) -> Result<Vec<SweepRow>> {
    dimension_sweep_with(c_min, c_max, step, order, moran_order, Execution::default())
}

pub fn dimension_sweep_with(
    c_min: f64,
    c_max: f64,
    step: f64,
    order: usize,
    moran_order: usize,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    if !(c_max < -2.0) {
        return Err(Error::Domain(format!(
            "sweep upper end c_max = {c_max} must be < -2"
        )));
    }
    if !(c_min < c_max) || !(step > 0.0) || !step.is_finite() || !c_min.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "empty sweep range [{c_min}, {c_max}] with step {step}"
        )));
    }
    let cs = grid_axis(c_min, c_max, step);
    Ok(exec.map_slice(&cs, |&c| SweepRow {
        c,
        order,
        result: dimension_point(c, order, moran_order),
    }))
}

/// `δ_N(c)` with its residual and Moran bracket.
pub fn dimension_point(c: f64, order: usize, moran_order: usize) -> Result<SweepPoint> {
    let sys = SystemParams::new(c)?;
    let zeta = ZetaApproximant::build(&sys, order)?;
    let zero = largest_real_zero(&zeta, DEFAULT_BRACKET.0, DEFAULT_BRACKET.1)?;
    let bracket = moran_bracket_with(&sys, moran_order, Execution::Sequential)?;
    Ok(SweepPoint {
        delta: zero.s.re,
        residual: zero.residual,
        bracket,
    })
}
