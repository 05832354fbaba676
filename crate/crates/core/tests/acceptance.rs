use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use quadzeta::symbolic::{equal_length_images_disjoint, separation_ratio, split_index};
use quadzeta::verify::{check_contraction_ratio, check_sqrt5_threshold, check_two_bracket};
use quadzeta::zeros::{self, Rectangle, DEFAULT_BRACKET};
use quadzeta::{Letter, Partition, SystemParams, Word, ZetaApproximant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn sys(c: f64) -> SystemParams {
    SystemParams::new(c).expect("c < -2")
}

fn delta_n(c: f64, order: usize) -> f64 {
    let zeta = ZetaApproximant::build(&sys(c), order).expect("table");
    zeros::largest_real_zero(&zeta, DEFAULT_BRACKET.0, DEFAULT_BRACKET.1)
        .expect("real zero")
        .s
        .re
}

fn dimension_threshold() -> Outcome {
    let hi = delta_n(-4.5, 12);
    let lo = delta_n(-4.7, 12);
    Outcome {
        pass: hi > 0.5 && lo < 0.5,
        detail: format!("delta(-4.5) = {hi:.10}, delta(-4.7) = {lo:.10}"),
    }
}

/// First `c` on an increasing grid where `pred` changes value.
fn locate_flip(lo: f64, hi: f64, step: f64, pred: impl Fn(f64) -> bool) -> Option<f64> {
    let steps = ((hi - lo) / step).round() as usize;
    let mut prev = pred(lo);
    for k in 1..=steps {
        let c = lo + k as f64 * step;
        let cur = pred(c);
        if cur != prev {
            return Some(c - 0.5 * step);
        }
        prev = cur;
    }
    None
}

fn algebraic_thresholds() -> Outcome {
    let theta = sys(-3.75).theta0();
    let c5 = -2.0 - 5f64.sqrt();
    let ratio = check_sqrt5_threshold(&sys(c5)).ratio;
    let flip_theta = locate_flip(-6.0, -2.1, 1e-3, |c| check_contraction_ratio(&sys(c)).holds);
    let flip_ratio = locate_flip(-6.0, -2.1, 1e-3, |c| check_sqrt5_threshold(&sys(c)).holds);
    let near = |f: Option<f64>, t: f64| f.is_some_and(|f| (f - t).abs() <= 1e-3);
    Outcome {
        pass: (theta - 1.0).abs() < 1e-12
            && (ratio - 1.0).abs() < 1e-10
            && near(flip_theta, -3.75)
            && near(flip_ratio, c5),
        detail: format!(
            "theta0(-3.75) - 1 = {:.2e}, ratio(-2-sqrt5) - 1 = {:.2e}, flips at {:?} and {:?}",
            theta - 1.0,
            ratio - 1.0,
            flip_theta,
            flip_ratio
        ),
    }
}

fn two_bracket_inequality() -> Outcome {
    let steps = ((10.0 - 3.751) / 1e-3_f64).round() as usize;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = f64::NAN;
    let mut errors = 0;
    for k in 0..=steps {
        let c = -10.0 + k as f64 * 1e-3;
        match check_two_bracket(&sys(c)) {
            Ok(check) if check.lhs > worst => {
                worst = check.lhs;
                worst_at = c;
            }
            Ok(_) => {}
            Err(_) => errors += 1,
        }
    }
    Outcome {
        pass: errors == 0 && worst < 0.0,
        detail: format!(
            "{} grid points, max lhs = {worst:.6} at c = {worst_at:.3}",
            steps + 1
        ),
    }
}

fn f_iterate_minus_identity(c: f64, n: usize, x: f64) -> f64 {
    let mut y = x;
    for _ in 0..n {
        y = y * y + c;
    }
    y - x
}

/// Real roots of `f^n(x) - x` on `[-ζ, ζ]` from sign changes on a uniform
/// grid, refined until `2^n` brackets appear, each closed by bisection.
fn scanned_periodic_points(c: f64, n: usize) -> Vec<f64> {
    let z = (1.0 + (1.0 - 4.0 * c).sqrt()) / 2.0;
    let (a, b) = (-z - 1e-9, z + 1e-9);
    let p = |x: f64| f_iterate_minus_identity(c, n, x);
    let mut cells = 1usize << (n + 6);
    loop {
        let h = (b - a) / cells as f64;
        let mut brackets = Vec::new();
        let mut x0 = a;
        let mut p0 = p(x0);
        for k in 1..=cells {
            let x1 = a + k as f64 * h;
            let p1 = p(x1);
            if p0 == 0.0 {
                brackets.push((x0, x0));
            } else if p0.signum() != p1.signum() && p1 != 0.0 {
                brackets.push((x0, x1));
            }
            x0 = x1;
            p0 = p1;
        }
        if brackets.len() >= 1 << n || h < 1e-9 {
            return brackets
                .into_iter()
                .map(|(mut lo, mut hi)| {
                    let plo = p(lo);
                    loop {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if p(mid).signum() == plo.signum() {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    0.5 * (lo + hi)
                })
                .collect();
        }
        cells *= 4;
    }
}

fn orbit_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut counts_ok = true;
    for c in [-3.0, -4.0, -6.0] {
        let s = sys(c);
        for n in 1..=8 {
            let mut symbolic: Vec<f64> = s
                .enumerate_orbits(n)
                .expect("orbits")
                .iter()
                .map(|o| o.point)
                .collect();
            symbolic.sort_by(f64::total_cmp);
            let scanned = scanned_periodic_points(c, n);
            if scanned.len() != 1 << n || symbolic.len() != 1 << n {
                counts_ok = false;
                continue;
            }
            for (x, y) in symbolic.iter().zip(&scanned) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    let mut lambda_err = 0.0f64;
    for c in [-2.5, -3.0, -4.0, -6.0, -10.0] {
        let orbit = sys(c)
            .periodic_point(&"+-".parse().unwrap())
            .expect("orbit");
        lambda_err = lambda_err.max((orbit.multiplier - 4.0 * (c + 1.0)).abs());
    }
    Outcome {
        pass: counts_ok && worst < 1e-9 && lambda_err < 1e-12,
        detail: format!(
            "counts exact: {counts_ok}, max deviation = {worst:.2e}, period-2 multiplier error = {lambda_err:.2e}"
        ),
    }
}

fn zeta_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let s4 = sys(-4.0);
    let full = ZetaApproximant::build(&s4, 10).expect("table");
    let mut worst_rel = 0.0f64;
    let mut worst_diff = 0.0f64;
    for _ in 0..100 {
        let s = Complex64::new(rng.gen_range(0.0..1.0), rng.gen_range(-20.0..20.0));
        for order in 1..=10 {
            let zeta = full.truncated(order).expect("order <= 10");
            let rec = zeta.delta(s);
            let comp = zeta.delta_by_compositions(s).expect("order <= 10");
            worst_rel = worst_rel.max((comp - rec).norm() / rec.norm());
        }
        let h = 1e-5;
        let fd = (full.delta(s + h) - full.delta(s - h)) / (2.0 * h);
        let exact = full.delta_derivative(s);
        worst_diff = worst_diff.max((fd - exact).norm() / exact.norm().max(1.0));
    }
    let a1 = full.table().trace_coefficient(1, Complex64::new(0.5, 0.0));
    let fixture = 1.0067683;
    let a1_err = (a1.re - fixture).abs().max(a1.im.abs());
    Outcome {
        pass: worst_rel < 1e-12 && a1_err < 1e-6 && worst_diff < 1e-6,
        detail: format!(
            "compositions vs recursion rel = {worst_rel:.2e}, a1(0.5) = {:.10} vs {fixture} (diff {a1_err:.2e}), derivative = {worst_diff:.2e}",
            a1.re
        ),
    }
}

fn dimension_containment() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for c in [-3.0, -4.0, -5.0] {
        let d = delta_n(c, 12);
        match zeros::moran_bracket(&sys(c), 12) {
            Ok(b) => {
                pass &= b.contains(d);
                parts.push(format!("c={c}: {:.6} <= {d:.8} <= {:.6}", b.lo, b.hi));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("c={c}: {e}"));
            }
        }
    }
    let gap = (delta_n(-5.0, 12) - delta_n(-5.0, 11)).abs();
    pass &= gap < 1e-6;
    parts.push(format!("|d12 - d11| at -5 = {gap:.2e}"));
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn conjugate_symmetric(zeta: &ZetaApproximant, s: Complex64) -> bool {
    let a = zeta.delta(s.conj());
    let b = zeta.delta(s).conj();
    (a - b).norm() <= 1e-12 * a.norm().max(1.0) && a.norm() < 1e-10
}

fn zero_atlas_validation() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for c in [-2.8, -4.0] {
        let zeta = ZetaApproximant::build(&sys(c), 12).expect("table");
        let d = zeros::largest_real_zero(&zeta, DEFAULT_BRACKET.0, DEFAULT_BRACKET.1)
            .expect("real zero")
            .s
            .re;
        let rect = Rectangle::new(0.3, d + 0.1, 0.0, 15.0).expect("rectangle");
        match zeros::zero_atlas(&zeta, &rect, 0.05) {
            Ok(atlas) => {
                let max_res = atlas.zeros.iter().map(|z| z.residual).fold(0.0, f64::max);
                let symmetric = atlas.zeros.iter().all(|z| conjugate_symmetric(&zeta, z.s));
                pass &= atlas.agrees && max_res < 1e-10 && symmetric;
                parts.push(format!(
                    "c={c}: newton {} / contour {}, max residual {max_res:.1e}, conjugate symmetry {symmetric}",
                    atlas.zeros.len(),
                    atlas.contour.count
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("c={c}: {e}"));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

/// Bounds for the partition statistics at `c = -4`, measured once over
/// `τ ∈ {1e-1, 1e-2, 1e-3}` and rounded up.
const BAND_BOUND: f64 = 40.0;
const RELATED_BOUND: usize = 2;
const MULTIPLICITY_BOUND: usize = 2;

fn random_word(rng: &mut impl Rng, max_len: usize) -> Word {
    let len = rng.gen_range(2..=max_len);
    let letters = (0..len)
        .map(|_| {
            if rng.gen() {
                Letter::Plus
            } else {
                Letter::Minus
            }
        })
        .collect();
    Word::new(letters).expect("non-empty")
}

fn symbolic_suite() -> Outcome {
    let s = sys(-4.0);
    let mut pass = true;
    let mut parts = Vec::new();
    for tau in [1e-1, 1e-2, 1e-3] {
        match Partition::build(&s, tau) {
            Ok(p) => {
                let stats = p.summary(&s);
                pass &= stats.prefix_free
                    && stats.covering
                    && stats.band_constant <= BAND_BOUND
                    && stats.max_related <= RELATED_BOUND
                    && stats.max_point_multiplicity <= MULTIPLICITY_BOUND;
                parts.push(format!(
                    "tau={tau:e}: {} words, prefix-free {}, covering {}, band {:.3}, related {}, multiplicity {}",
                    stats.word_count,
                    stats.prefix_free,
                    stats.covering,
                    stats.band_constant,
                    stats.max_related,
                    stats.max_point_multiplicity
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("tau={tau:e}: {e}"));
            }
        }
    }
    let disjoint = [-2.8, -4.0, -6.0]
        .iter()
        .all(|&c| (1..=8).all(|n| equal_length_images_disjoint(&sys(c), n)));
    pass &= disjoint;
    parts.push(format!("equal-length images disjoint: {disjoint}"));

    let mut rng = ChaCha8Rng::seed_from_u64(0xc0ffee);
    let mut min_ratio = f64::INFINITY;
    let mut sampled = 0;
    while sampled < 1000 {
        let w = random_word(&mut rng, 12);
        let v = random_word(&mut rng, 12);
        if split_index(&w, &v).related {
            continue;
        }
        let branch = s.branch_interval(if rng.gen() {
            Letter::Plus
        } else {
            Letter::Minus
        });
        let x = rng.gen_range(branch.lo..=branch.hi);
        let r = separation_ratio(&s, &w, &v, x).expect("unrelated");
        min_ratio = min_ratio.min(r);
        sampled += 1;
    }
    pass &= min_ratio > 0.0;
    parts.push(format!(
        "min separation ratio over 1000 pairs = {min_ratio:.3e}"
    ));
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "dimension threshold",
            Duration::from_secs(30),
            dimension_threshold,
        ),
        (
            "algebraic thresholds",
            Duration::from_secs(5),
            algebraic_thresholds,
        ),
        (
            "two-bracket inequality",
            Duration::from_secs(30),
            two_bracket_inequality,
        ),
        ("orbit oracle", Duration::from_secs(10), orbit_oracle),
        (
            "zeta consistency",
            Duration::from_secs(10),
            zeta_consistency,
        ),
        (
            "dimension containment",
            Duration::from_secs(60),
            dimension_containment,
        ),
        (
            "zero atlas",
            Duration::from_secs(300),
            zero_atlas_validation,
        ),
        ("symbolic dynamics", Duration::from_secs(60), symbolic_suite),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= *budget;
        if !pass {
            failures += 1;
        }
        println!(
            "{} {} {name}: {} [{:.2}s / {}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
