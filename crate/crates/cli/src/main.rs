#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quadzeta::verify::VerificationReport;
use quadzeta::zeros::{self, MoranBracket, Rectangle, DEFAULT_BRACKET};
use quadzeta::{Error, Partition, SystemParams, ZetaApproximant, MAX_ORDER};
use serde::Serialize;

const USAGE: u8 = 1;
const DOMAIN: u8 = 2;
const NUMERICAL: u8 = 3;

/// Dimension, zeta zeros and phase checks for z^2 + c, c < -2.
#[derive(Debug, Parser)]
#[command(name = "quadzeta", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Largest real zero of the approximant and its Moran bracket.
    Dimension(DimensionArgs),
    /// Dimension over a grid of parameters, written as CSV.
    Sweep(SweepArgs),
    /// Complex zeros in a rectangle, written as CSV.
    Zeros(ZerosArgs),
    /// Numeric checks of the contraction and phase inequalities.
    Verify(VerifyArgs),
    /// Threshold partition of the coding space.
    Partition(PartitionArgs),
}

#[derive(Debug, Args)]
struct Parameter {
    /// Parameter of the map z^2 + c; must be < -2.
    #[arg(long, allow_negative_numbers = true)]
    c: f64,
}

#[derive(Debug, Args)]
struct OrderArg {
    /// Truncation order N of the approximant.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=MAX_ORDER as i64))]
    order: u32,
}

#[derive(Debug, Args)]
struct DimensionArgs {
    #[command(flatten)]
    param: Parameter,
    #[command(flatten)]
    order: OrderArg,
    /// Word length for the Moran bracket.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=MAX_ORDER as i64))]
    moran_order: u32,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, allow_negative_numbers = true)]
    c_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    c_max: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[command(flatten)]
    order: OrderArg,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=MAX_ORDER as i64))]
    moran_order: u32,
    #[arg(long, default_value = "dimsweep.csv")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ZerosArgs {
    #[command(flatten)]
    param: Parameter,
    #[command(flatten)]
    order: OrderArg,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    re_min: f64,
    /// Defaults to delta + 0.1.
    #[arg(long, allow_negative_numbers = true)]
    re_max: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    im_min: f64,
    #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
    im_max: f64,
    /// Spacing of the Newton starting grid.
    #[arg(long, default_value_t = 0.05)]
    grid_step: f64,
    #[arg(long, default_value = "zeros.csv")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    param: Parameter,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PartitionArgs {
    #[command(flatten)]
    param: Parameter,
    /// Length threshold; members satisfy |I_w| < tau.
    #[arg(long)]
    tau: f64,
    /// Print band and cardinality statistics.
    #[arg(long)]
    stats: bool,
    /// Print the partition dump as JSON.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) => DOMAIN,
            Error::InvalidArgument(_) => USAGE,
            _ => NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn system(c: f64) -> Result<SystemParams, Failure> {
    if !(c < -2.0) {
        return Err(Failure {
            code: DOMAIN,
            message: format!(
                "c = {c} is not allowed: the Julia set is a real Cantor set only for c < -2"
            ),
        });
    }
    Ok(SystemParams::new(c)?)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure {
        code: NUMERICAL,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn emit_json<T: Serialize>(value: &T, print: bool, output: Option<&Path>) -> Outcome {
    let text = serde_json::to_string_pretty(value).expect("serializable report") + "\n";
    if print {
        print!("{text}");
    }
    if let Some(path) = output {
        write_file(path, &text)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DimensionReport {
    schema_version: u32,
    c: f64,
    order: usize,
    delta: f64,
    residual: f64,
    newton_iterations: usize,
    bracket: MoranBracket,
    bracket_contains: bool,
}

fn dimension(args: &DimensionArgs) -> Outcome {
    let sys = system(args.param.c)?;
    let order = args.order.order as usize;
    let zeta = ZetaApproximant::build(&sys, order)?;
    let zero = zeros::largest_real_zero(&zeta, DEFAULT_BRACKET.0, DEFAULT_BRACKET.1)?;
    let bracket = zeros::moran_bracket(&sys, args.moran_order as usize)?;
    let report = DimensionReport {
        schema_version: 1,
        c: sys.c(),
        order,
        delta: zero.s.re,
        residual: zero.residual,
        newton_iterations: zero.newton_iterations,
        bracket,
        bracket_contains: bracket.contains(zero.s.re),
    };
    if !args.json {
        println!("c        = {}", report.c);
        println!("N        = {order}");
        println!("delta    = {:.10}", report.delta);
        println!("residual = {:.3e}", report.residual);
        println!(
            "moran({}) = [{:.10}, {:.10}] {}",
            bracket.n,
            bracket.lo,
            bracket.hi,
            if report.bracket_contains {
                "contains delta"
            } else {
                "DOES NOT contain delta"
            }
        );
    }
    emit_json(&report, args.json, args.output.as_deref())
}

fn sweep(args: &SweepArgs) -> Outcome {
    if !(args.c_max < -2.0) {
        return Err(Failure {
            code: DOMAIN,
            message: format!("c_max = {} must be < -2", args.c_max),
        });
    }
    if !(args.c_min < args.c_max) || !(args.step > 0.0) || !args.step.is_finite() {
        return Err(Failure::usage(format!(
            "empty sweep: need c_min < c_max and step > 0 (got [{}, {}], step {})",
            args.c_min, args.c_max, args.step
        )));
    }
    let rows = zeros::dimension_sweep(
        args.c_min,
        args.c_max,
        args.step,
        args.order.order as usize,
        args.moran_order as usize,
    )?;
    let mut csv = String::from("c,N,delta,residual,bracket_lo,bracket_hi\n");
    let mut ok = 0;
    for row in &rows {
        match &row.result {
            Ok(p) => {
                ok += 1;
                writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    num(row.c),
                    row.order,
                    num(p.delta),
                    num(p.residual),
                    num(p.bracket.lo),
                    num(p.bracket.hi)
                )
                .unwrap();
            }
            Err(e) => eprintln!("c = {}: {e}", row.c),
        }
    }
    write_file(&args.output, &csv)?;
    eprintln!(
        "{ok} of {} rows written to {}",
        rows.len(),
        args.output.display()
    );
    if ok * 10 >= rows.len() * 9 {
        Ok(())
    } else {
        Err(Failure {
            code: NUMERICAL,
            message: format!("only {ok} of {} rows succeeded", rows.len()),
        })
    }
}

fn zeros_cmd(args: &ZerosArgs) -> Outcome {
    let sys = system(args.param.c)?;
    if !(args.grid_step > 0.0) || !args.grid_step.is_finite() {
        return Err(Failure::usage("grid step must be positive"));
    }
    let order = args.order.order as usize;
    let zeta = ZetaApproximant::build(&sys, order)?;
    let re_max = match args.re_max {
        Some(x) => x,
        None => {
            zeros::largest_real_zero(&zeta, DEFAULT_BRACKET.0, DEFAULT_BRACKET.1)?
                .s
                .re
                + 0.1
        }
    };
    let rect = Rectangle::new(args.re_min, re_max, args.im_min, args.im_max)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let atlas = zeros::zero_atlas(&zeta, &rect, args.grid_step)?;
    let mut csv = String::from("c,N,re_s,im_s,abs_delta,newton_iters\n");
    for z in &atlas.zeros {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            num(sys.c()),
            order,
            num(z.s.re),
            num(z.s.im),
            num(z.residual),
            z.newton_iterations
        )
        .unwrap();
    }
    write_file(&args.output, &csv)?;
    eprintln!(
        "newton zeros: {}, argument principle: {} ({} points per side, {} attempt(s)), {}",
        atlas.zeros.len(),
        atlas.contour.count,
        atlas.contour.points_per_side,
        atlas.contour.attempts,
        if atlas.agrees { "agree" } else { "MISMATCH" }
    );
    match atlas.max_re_nonreal() {
        Some(x) => eprintln!("max Re of non-real zeros: {x:.10}"),
        None => eprintln!("no non-real zeros in the rectangle"),
    }
    if atlas.agrees {
        Ok(())
    } else {
        Err(Failure {
            code: NUMERICAL,
            message: "Newton count differs from the argument-principle count".into(),
        })
    }
}

fn verify(args: &VerifyArgs) -> Outcome {
    let sys = system(args.param.c)?;
    let report = VerificationReport::new(&sys)?;
    if !args.json {
        let v = &report.verdicts;
        println!("c = {}, zeta_c = {:.10}", report.c, report.zeta_c);
        let flag = if v.theta0_at_boundary {
            "boundary"
        } else if v.contraction_ratio_below_one {
            "< 1"
        } else {
            ">= 1"
        };
        println!("theta0            = {:.10} ({flag})", report.theta0);
        println!("eta0              = {:.10}", report.eta0);
        println!(
            "theta0/(1 - eta0) = {:.10} ({})",
            report.ratio_sqrt5,
            if v.sqrt5_ratio_below_one {
                "< 1"
            } else {
                ">= 1"
            }
        );
        println!(
            "two-bracket lhs   = {:.10} ({})",
            report.lhs_two_bracket,
            if v.two_bracket_negative {
                "< 0"
            } else {
                ">= 0"
            }
        );
        let (inf_minus, half, sup_plus) = report.step_ratio_triple;
        println!(
            "step ratios       = inf {inf_minus:.10} / {half} / sup {sup_plus:.10} (ordered: {}, half separates: {})",
            v.step_ratio_ordered, v.step_ratio_half_separates
        );
    }
    emit_json(&report, args.json, args.output.as_deref())
}

fn partition(args: &PartitionArgs) -> Outcome {
    let sys = system(args.param.c)?;
    if !(args.tau > 0.0) || !args.tau.is_finite() {
        return Err(Failure::usage(format!(
            "tau = {} must be positive",
            args.tau
        )));
    }
    let p = Partition::build(&sys, args.tau)?;
    let dump = p.dump(&sys);
    if !args.json {
        let s = &dump.stats;
        let pass = |b: bool| if b { "PASS" } else { "FAIL" };
        println!(
            "tau = {:e}: {} words, max length {}",
            args.tau, s.word_count, s.max_length
        );
        let hist: Vec<String> = s
            .length_histogram
            .iter()
            .map(|(len, n)| format!("{len}:{n}"))
            .collect();
        println!("lengths: {}", hist.join(" "));
        println!("prefix-free: {}", pass(s.prefix_free));
        println!("covering:    {}", pass(s.covering));
        if args.stats {
            println!("threshold:   {}", pass(s.threshold_property));
            println!(
                "band: |g_w'|/tau in [{:.6}, {:.6}], constant {:.6}",
                s.band_min, s.band_max, s.band_constant
            );
            println!("max related words: {}", s.max_related);
            println!("max point multiplicity: {}", s.max_point_multiplicity);
        }
        if p.len() <= 16 {
            let words: Vec<&str> = dump.words.iter().map(String::as_str).collect();
            println!("words: {}", words.join(" "));
        }
    }
    emit_json(&dump, args.json, args.output.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Dimension(a) => dimension(a),
        Command::Sweep(a) => sweep(a),
        Command::Zeros(a) => zeros_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Partition(a) => partition(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
