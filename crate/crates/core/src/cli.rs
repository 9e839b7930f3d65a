//! The `ksupport` command line: argument parsing, command dispatch and the
//! exit-code contract (0 success, 2 input error, 3 non-convergence,
//! 4 verification failure).

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::faces::exposed_face_sp;
use crate::norms::{ksupport_norm, parse_exponent, top_norm, EvalReport, NormSpec};
use crate::oracles::MAX_HULL_DIM;
use crate::polytopes::{enumerate_proper_faces_top1k, ksup_inf_ball, point_strings, top1k_ball};
use crate::solver::{solve_penalized, ObjectiveFile, SolveOptions};
use crate::sparse::{level_index, Tolerance};
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ksupport", version, about = "Top-k and k-support norms, faces, polytopes and solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a top-(q,k) or k-support norm.
    Norm(NormArgs),
    /// Exposed face of the unit k-support ball in a dual direction.
    Face(FaceArgs),
    /// Exact facets, vertices or face lattice of the p = ∞ balls.
    Polytope(PolytopeArgs),
    /// Minimize f + γ‖·‖^sp for an objective given as JSON.
    Solve(SolveArgs),
    /// Run oracle-backed property suites.
    Verify(VerifyArgs),
    /// Emit boundary points of a unit ball as CSV.
    SampleBall(SampleArgs),
}

#[derive(Debug, Args)]
pub struct VectorInput {
    /// Inline comma-separated vector, e.g. 3,-1,2.
    #[arg(long = "vec", allow_hyphen_values = true)]
    pub vec: Option<String>,
    /// Single-column CSV file ("-" for stdin). Stdin is read when neither
    /// --vec nor --input is given.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    /// Source exponent p: 1, 2, inf, a decimal or a ratio a/b.
    #[arg(long, value_parser = parse_p)]
    pub p: f64,
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormKind {
    Top,
    Ksupport,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[arg(long, value_enum, default_value = "ksupport")]
    pub kind: NormKind,
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub input: VectorInput,
    /// Absolute and relative tolerance of the certified evaluation.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct FaceArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub input: VectorInput,
    /// Tie tolerance on |y_i|.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Top1k,
    Ksupinf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Facets,
    Vertices,
    Lattice,
}

#[derive(Debug, Args)]
pub struct PolytopeArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "top1k")]
    pub which: Which,
    #[arg(long, value_enum, default_value = "facets")]
    pub report: Report,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// JSON objective, inline or as a file path:
    /// {"kind":"quadratic","A":[[..]],"b":[..]} (A optional) or
    /// {"kind":"logistic","design":[[..]],"labels":[..]}.
    #[arg(long)]
    pub objective: String,
    #[arg(long)]
    pub gamma: f64,
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 50_000)]
    pub max_iterations: usize,
    /// Break ties among optimal supports at random with this seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// norms, duality, supports, faces, polytope, solver, lasso,
    /// commutation or all. Under "all" the polytope suite runs at
    /// dimension min(d, 4).
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BallKind {
    Ksupport,
    Top,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Dimension, 2 or 3.
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_enum, default_value = "ksupport")]
    pub which: BallKind,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_p(s: &str) -> Result<f64, String> {
    parse_exponent(s).map_err(|e| e.to_string())
}

/// A command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| input_error(format!("cannot parse {t:?} as a number")))
        })
        .collect()
}

/// One number per line; blank lines are skipped and a non-numeric first
/// line is taken as a header.
fn parse_column(text: &str) -> Result<Vec<f64>, Failure> {
    let mut out = Vec::new();
    for (n, line) in text.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate() {
        match line.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if n == 0 => {}
            Err(_) => return Err(input_error(format!("cannot parse {line:?} as a number"))),
        }
    }
    Ok(out)
}

fn read_vector(input: &VectorInput, stdin: &mut dyn Read) -> Result<Vec<f64>, Failure> {
    let v = match (&input.vec, &input.input) {
        (Some(s), _) => parse_list(s)?,
        (None, Some(path)) if path.as_os_str() != "-" => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
            parse_column(&text)?
        }
        _ => {
            let mut text = String::new();
            stdin
                .read_to_string(&mut text)
                .map_err(|e| input_error(format!("stdin: {e}")))?;
            parse_column(&text)?
        }
    };
    if v.is_empty() {
        return Err(Error::EmptyVector.into());
    }
    Ok(v)
}

fn spec_for(args: &SpecArgs, d: usize) -> Result<NormSpec, Failure> {
    let spec = NormSpec::new(args.p, args.k)?;
    spec.check_dim(d)?;
    Ok(spec)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report types serialize")
}

fn cmd_norm(args: &NormArgs, stdin: &mut dyn Read) -> Result<String, Failure> {
    let x = read_vector(&args.input, stdin)?;
    let spec = spec_for(&args.spec, x.len())?;
    let report = match args.kind {
        NormKind::Top => EvalReport::closed(top_norm(&x, &spec)?),
        NormKind::Ksupport => {
            let tol = Tolerance::new(args.tol, args.tol)?;
            ksupport_norm(&x, &spec, tol)?
        }
    };
    Ok(to_json(&report))
}

fn cmd_face(args: &FaceArgs, stdin: &mut dyn Read) -> Result<String, Failure> {
    let y = read_vector(&args.input, stdin)?;
    let spec = spec_for(&args.spec, y.len())?;
    let tol = Tolerance::new(args.tol, 0.0)?;
    let face = exposed_face_sp(&y, &spec, tol)?;
    let lev = level_index(&y, spec.k, tol)?;
    Ok(to_json(&json!({
        "vertices": face.vertices,
        "generating_supports": face.generating_supports,
        "L": lev.strict,
        "Lbar": lev.weak,
        "m_k": lev.m_k,
    })))
}

fn cmd_polytope(args: &PolytopeArgs) -> Result<String, Failure> {
    let ball = match args.which {
        Which::Top1k => top1k_ball(args.d, args.k)?,
        Which::Ksupinf => ksup_inf_ball(args.d, args.k)?,
    };
    let which = match args.which {
        Which::Top1k => "top1k",
        Which::Ksupinf => "ksupinf",
    };
    let (report, count, items): (&str, usize, Value) = match args.report {
        Report::Facets => ("facets", ball.facets.len(), json!(ball.facets)),
        Report::Vertices => {
            let v: Vec<Vec<String>> = ball.vertices.iter().map(|p| point_strings(p)).collect();
            ("vertices", v.len(), json!(v))
        }
        Report::Lattice => {
            if args.which != Which::Top1k {
                return Err(input_error("the lattice report is available for --which top1k"));
            }
            let faces = enumerate_proper_faces_top1k(args.d, args.k)?;
            let mut f_vector = vec![0usize; args.d];
            for f in &faces {
                f_vector[f.dim] += 1;
            }
            let out = json!({
                "d": args.d,
                "k": args.k,
                "which": which,
                "report": "lattice",
                "count": faces.len(),
                "f_vector": f_vector,
                "items": faces,
            });
            return Ok(to_json(&out));
        }
    };
    Ok(to_json(&json!({
        "d": args.d,
        "k": args.k,
        "which": which,
        "report": report,
        "count": count,
        "items": items,
    })))
}

/// Runs the solver; a report that missed the tolerance is still printed,
/// with exit code 3.
fn cmd_solve(args: &SolveArgs) -> Result<(String, i32), Failure> {
    let text = if args.objective.trim_start().starts_with('{') {
        args.objective.clone()
    } else {
        std::fs::read_to_string(&args.objective)
            .map_err(|e| input_error(format!("{}: {e}", args.objective)))?
    };
    let file: ObjectiveFile = serde_json::from_str(&text)
        .map_err(|e| input_error(format!("objective: {e}")))?;
    let obj = file.build()?;
    let spec = spec_for(&args.spec, obj.dim())?;
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(Error::InvalidTolerance.into());
    }
    let opts = SolveOptions {
        tol: args.tol,
        max_iterations: args.max_iterations,
        tie_seed: args.seed,
        ..SolveOptions::default()
    };
    let report = solve_penalized(obj.as_ref(), args.gamma, &spec, &opts)?;
    let code = if report.converged {
        EXIT_OK
    } else {
        EXIT_NONCONVERGENCE
    };
    Ok((to_json(&report), code))
}

fn cmd_verify(args: &VerifyArgs) -> Result<(String, i32), Failure> {
    let suites = Suite::parse(&args.suite)
        .ok_or_else(|| input_error(format!("unknown suite {:?}", args.suite)))?;
    let all = suites.len() > 1;
    let mut results = Vec::new();
    for s in suites {
        let d = if all && s == Suite::Polytope {
            args.d.min(MAX_HULL_DIM)
        } else {
            args.d
        };
        results.push(run_suite(s, d, args.trials, args.seed)?);
    }
    let passed = results.iter().all(|r| r.passed);
    let out = json!({ "passed": passed, "suites": results });
    Ok((to_json(&out), if passed { EXIT_OK } else { EXIT_VERIFY }))
}

fn cmd_sample_ball(args: &SampleArgs) -> Result<String, Failure> {
    if !(2..=3).contains(&args.d) {
        return Err(input_error("sample-ball supports d = 2 or d = 3"));
    }
    let spec = spec_for(&args.spec, args.d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut out = String::from(if args.d == 2 { "x,y\n" } else { "x,y,z\n" });
    let mut rows = 0;
    while rows < args.n {
        let u: Vec<f64> = (0..args.d).map(|_| rng.sample(StandardNormal)).collect();
        if u.iter().all(|c| *c == 0.0) {
            continue;
        }
        let r = match args.which {
            BallKind::Ksupport => ksupport_norm(&u, &spec, Tolerance::default())?.value,
            BallKind::Top => top_norm(&u, &spec)?,
        };
        let row: Vec<String> = u.iter().map(|c| format!("{}", c / r)).collect();
        writeln!(out, "{}", row.join(",")).expect("writing to a String");
        rows += 1;
    }
    Ok(out)
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result: Result<(String, i32), Failure> = match &cli.command {
        Command::Norm(a) => cmd_norm(a, stdin).map(|s| (s, EXIT_OK)),
        Command::Face(a) => cmd_face(a, stdin).map(|s| (s, EXIT_OK)),
        Command::Polytope(a) => cmd_polytope(a).map(|s| (s, EXIT_OK)),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::SampleBall(a) => cmd_sample_ball(a).map(|s| (s, EXIT_OK)),
    };
    match result {
        Ok((text, code)) => {
            let _ = writeln!(out, "{}", text.trim_end());
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("ksupport").chain(args.iter().copied());
        let code = run(argv, &mut std::io::empty(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn column_parsing() {
        assert_eq!(parse_column("x\n1\n\n-2.5\n").unwrap(), vec![1.0, -2.5]);
        assert!(parse_column("1\nfoo\n").is_err());
        assert_eq!(parse_list("3,-1, 2").unwrap(), vec![3.0, -1.0, 2.0]);
    }

    #[test]
    fn norm_command() {
        let (code, out, _) = call(&["norm", "--kind", "top", "--p", "inf", "--k", "2", "--vec", "3,-1,2"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["value"], 5.0);
    }

    #[test]
    fn zero_face_is_an_input_error() {
        let (code, _, err) = call(&["face", "--p", "2", "--k", "1", "--vec", "0,0"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("dual vector must be nonzero"));
    }

    #[test]
    fn bad_arguments_exit_two() {
        assert_eq!(call(&["norm", "--p", "0.5", "--k", "1", "--vec", "1"]).0, EXIT_INPUT);
        assert_eq!(call(&["frobnicate"]).0, EXIT_INPUT);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }
}
