use std::io::Write;
use std::path::Path;

use gvfa_core::faults::adversarial_paired_columns;
use gvfa_core::fixtures::{swap2x2_a, swap2x2_b, swap2x2_c};
use gvfa_core::tolerance::tolerance_scale;
use gvfa_core::verifiers::{gvfa_rowcol_verify, huang_abraham_verify};
use gvfa_core::{
    apply_fault, magnitude_sweep, run_experiment, subtract, theorem2_bound, verify, AccumulationMode, DenseMatrix,
    ExperimentConfig, FaultPlan, FaultSpec, MatrixSource, Method, SeededStream, Shape, SweepUnit, TolerancePolicy,
    Verdict, VerifyOptions,
};
use serde_json::json;

use crate::{BoundArgs, Command, Common, ExperimentArgs, Fixture, InjectArgs, Output, SweepUnitArg, VerifyArgs};

pub const EXIT_ACCEPT: u8 = 0;
pub const EXIT_REJECT: u8 = 1;
pub const EXIT_ERROR: u8 = 2;
pub const EXIT_NEUTRAL: u8 = 3;

const ADVERSARIAL: &str = "adversarial-paired-columns";

const CHECKSUM_NOTE: &str = "note: checksum verification cannot detect faults that preserve every row and \
column sum, such as swapping two columns; acceptance does not prove the product correct";

type CmdResult = Result<u8, String>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Verify(args) => cmd_verify(args),
        Command::Inject(args) => cmd_inject(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Bound(args) => cmd_bound(args),
    }
}

fn load(path: &Path) -> Result<DenseMatrix, String> {
    DenseMatrix::load(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn policy(common: &Common) -> Result<TolerancePolicy, String> {
    match common.tolerance.as_str() {
        "auto" => Ok(TolerancePolicy::componentwise()),
        literal => {
            let value: f64 =
                literal.parse().map_err(|_| format!("--tolerance expects `auto` or a number, got `{literal}`"))?;
            TolerancePolicy::absolute(value).map_err(|e| e.to_string())
        }
    }
}

fn mode(common: &Common) -> AccumulationMode {
    if common.fma {
        AccumulationMode::FusedMultiplyAdd
    } else {
        AccumulationMode::SeparateRounding
    }
}

/// Writes a line to stdout. A closed pipe (e.g. `| head`) is not an error.
macro_rules! outln {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

fn json_text<T: serde::Serialize + ?Sized>(value: &T) -> Result<String, String> {
    serde_json::to_string_pretty(value).map_err(|e| e.to_string())
}

/// Fault plans understood on the command line: the fault grammar plus the
/// named adversarial generator.
fn parse_fault(text: &str) -> Result<FaultPlan, String> {
    if let Some(rest) = text.strip_prefix(ADVERSARIAL) {
        let args = rest.strip_prefix(':').unwrap_or(rest);
        if args.is_empty() {
            return Ok(FaultPlan::AdversarialPairedColumns { first: 0, second: 1, magnitude: 1.0 });
        }
        let parts: Vec<&str> = args.split(',').collect();
        let bad = || format!("invalid fault `{text}`: expected `{ADVERSARIAL}[:first,second,magnitude]`");
        let [first, second, magnitude] = parts[..] else {
            return Err(bad());
        };
        let magnitude: f64 = magnitude.parse().map_err(|_| bad())?;
        if !(magnitude.is_finite() && magnitude != 0.0) {
            return Err(bad());
        }
        return Ok(FaultPlan::AdversarialPairedColumns {
            first: first.parse().map_err(|_| bad())?,
            second: second.parse().map_err(|_| bad())?,
            magnitude,
        });
    }
    text.parse::<FaultSpec>().map(|spec| FaultPlan::Fixed { spec }).map_err(|e| e.to_string())
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let (factors, c) = match (&args.fixture, &args.chain, &args.a, &args.b) {
        (Some(Fixture::Paper2x2), _, _, _) => {
            let c = match &args.c {
                Some(path) => load(path)?,
                None => swap2x2_c(),
            };
            (vec![swap2x2_a(), swap2x2_b()], c)
        }
        (None, Some(paths), _, _) => (paths.iter().map(|p| load(p)).collect::<Result<_, _>>()?, require_c(&args)?),
        (None, None, Some(a), Some(b)) => (vec![load(a)?, load(b)?], require_c(&args)?),
        _ => return Err("give --a and --b, --chain, or --fixture".into()),
    };
    let opts = VerifyOptions { k: args.k, policy: policy(&args.common)?, mode: mode(&args.common) };
    let stream = SeededStream::new(args.common.seed, 0);
    let pair = || match &factors[..] {
        [a, b] => Ok((a, b)),
        _ => Err(format!("method {} needs exactly two factors, got {}", args.method, factors.len())),
    };

    let mut extra = serde_json::Map::new();
    let mut text_lines = Vec::new();
    let verdict = match args.method {
        Method::GvfaRowcol => {
            let (a, b) = pair()?;
            let (verdict, loc) = gvfa_rowcol_verify(a, b, &c, stream, &opts).map_err(|e| e.to_string())?;
            if !verdict.accepted {
                text_lines.push(format!("mismatched rows: {:?}", loc.mismatched_rows));
                text_lines.push(format!("mismatched cols: {:?}", loc.mismatched_cols));
                text_lines.push(format!("implicated cells: {:?}", loc.implicated_cells));
            }
            extra.insert("localization".into(), json!(loc));
            verdict
        }
        Method::HuangAbraham => {
            let (a, b) = pair()?;
            let (verdict, report) = huang_abraham_verify(a, b, &c, &opts).map_err(|e| e.to_string())?;
            if verdict.accepted {
                text_lines.push(CHECKSUM_NOTE.to_string());
                extra.insert("note".into(), json!(CHECKSUM_NOTE));
            } else {
                text_lines.push(format!("implicated cells: {:?}", report.localization.implicated_cells));
            }
            extra.insert("checksums".into(), json!(report));
            verdict
        }
        method => verify(method, &factors, &c, stream, &opts).map_err(|e| e.to_string())?,
    };

    match args.common.output.unwrap_or(Output::Text) {
        Output::Text => {
            outln!("{}", describe(&verdict));
            for line in text_lines {
                outln!("{line}");
            }
        }
        Output::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("verdict".into(), json!(verdict));
            obj.extend(extra);
            outln!("{}", json_text(&obj)?);
        }
    }
    Ok(if verdict.accepted { EXIT_ACCEPT } else { EXIT_REJECT })
}

fn require_c(args: &VerifyArgs) -> Result<DenseMatrix, String> {
    args.c.as_deref().map(load).unwrap_or_else(|| Err("--c is required".into()))
}

fn describe(v: &Verdict) -> String {
    format!(
        "{} by {} after {} iteration{}: max residual {:e}, {} matrix-vector passes",
        if v.accepted { "accepted" } else { "rejected" },
        v.method,
        v.iterations_run,
        if v.iterations_run == 1 { "" } else { "s" },
        v.max_residual,
        v.ops.matvecs
    )
}

fn cmd_inject(args: InjectArgs) -> CmdResult {
    let c = load(&args.c)?;
    let spec = match parse_fault(&args.fault)? {
        FaultPlan::Fixed { spec } => spec,
        FaultPlan::AdversarialPairedColumns { first, second, magnitude } => {
            adversarial_paired_columns(c.rows(), first, second, magnitude)
        }
        other => return Err(format!("unsupported fault {other}")),
    };
    let injection = apply_fault(&c, &spec).map_err(|e| e.to_string())?;
    match &args.out {
        Some(path) => injection.matrix.save(path).map_err(|e| format!("{}: {e}", path.display()))?,
        None => {
            let _ = std::io::stdout().write_all(injection.matrix.to_text().as_bytes());
        }
    }
    let status = json!({ "fault": spec.to_string(), "neutral": injection.neutral });
    // Status goes to stderr when the matrix itself is on stdout.
    let report = match args.output.unwrap_or(Output::Text) {
        Output::Text => format!("fault {spec}: neutral={}", injection.neutral),
        Output::Json => status.to_string(),
    };
    if args.out.is_some() {
        outln!("{report}");
    } else {
        eprintln!("{report}");
    }
    Ok(if injection.neutral { EXIT_NEUTRAL } else { EXIT_ACCEPT })
}

fn cmd_experiment(args: ExperimentArgs) -> CmdResult {
    let fault = args.fault.as_deref().map(parse_fault).transpose()?.unwrap_or_default();
    let source = match (args.fixture, args.graded) {
        (Some(_), Some(_)) => return Err("--fixture and --graded are mutually exclusive".into()),
        (Some(Fixture::Paper2x2), None) => MatrixSource::Swap2x2,
        (None, Some(decades)) => MatrixSource::Graded { decades },
        (None, None) => MatrixSource::Uniform,
    };
    let shape = Shape { m: args.m.unwrap_or(args.n), p: args.p.unwrap_or(args.n), n: args.n };
    let config = ExperimentConfig {
        method: args.method,
        shape,
        chain_len: args.chain_len,
        fault,
        k: args.k,
        trials: args.trials,
        seed: args.common.seed,
        policy: policy(&args.common)?,
        mode: mode(&args.common),
        source,
    };
    let reports = match &args.sweep {
        Some(deltas) => {
            let unit = match args.sweep_unit {
                SweepUnitArg::Tau => SweepUnit::ToleranceScale,
                SweepUnitArg::Absolute => SweepUnit::Absolute,
            };
            magnitude_sweep(&config, deltas, unit).map_err(|e| e.to_string())?
        }
        None => vec![run_experiment(&config).map_err(|e| e.to_string())?],
    };
    match args.common.output.unwrap_or(Output::Json) {
        Output::Json if args.sweep.is_some() => outln!("{}", json_text(&reports)?),
        Output::Json => outln!("{}", json_text(&reports[0])?),
        Output::Text => {
            for r in &reports {
                let rate = r.empirical_fp_rate.map_or("n/a".to_string(), |p| format!("{p}"));
                outln!(
                    "{} {} n={} k={}: {} false positives, {} detections, {} neutral of {} trials; fp rate {rate}",
                    r.method,
                    r.fault_spec,
                    r.n,
                    r.k,
                    r.false_positives,
                    r.detections,
                    r.neutral_injections,
                    r.trials
                );
            }
        }
    }
    Ok(EXIT_ACCEPT)
}

fn cmd_bound(args: BoundArgs) -> CmdResult {
    let policy = policy(&args.common)?;
    let (delta, epsilon) = match (&args.delta, &args.a, &args.b, &args.c) {
        (Some(path), _, _, _) => {
            let epsilon = args.epsilon.ok_or("--epsilon is required with --delta")?;
            (load(path)?, epsilon)
        }
        (None, Some(a), Some(b), Some(c)) => {
            let (a, b, c) = (load(a)?, load(b)?, load(c)?);
            let product = gvfa_core::oracle_multiply(&a, &b, mode(&args.common)).map_err(|e| e.to_string())?;
            let delta = subtract(&product, &c).map_err(|e| e.to_string())?;
            let epsilon = match args.epsilon {
                Some(e) => e,
                None => tolerance_scale(&a, &b, &c, &policy).map_err(|e| e.to_string())?,
            };
            (delta, epsilon)
        }
        _ => return Err("give --delta, or --a, --b and --c".into()),
    };
    let report = theorem2_bound(&delta, epsilon, args.k).map_err(|e| e.to_string())?;
    match args.common.output.unwrap_or(Output::Json) {
        Output::Json => outln!("{}", json_text(&report)?),
        Output::Text => {
            let sigma = report.sigma_tilde;
            if report.degenerate {
                outln!("degenerate: delta is zero, bound = 1");
            } else {
                outln!(
                    "sigma_tilde {sigma:e}, epsilon {epsilon:e}: dependent {:e}, independent {:e}, approx {:e}, k={} iterated {:e}",
                    report.bound_dependent, report.bound_independent, report.bound_approx, report.k, report.bound_iterated
                );
            }
        }
    }
    Ok(EXIT_ACCEPT)
}
