//! Command-line front end.
//!
//! Exit codes: 0 success or check passed, 1 check ran and failed, 2 usage
//! or input error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::certify::{
    certify_k_contraction, convergence_pipeline, nob_pipeline, Certificate, DEFAULT_ETA_MIN,
};
use crate::compound::{add_compound, mult_compound};
use crate::decompose::{
    check_reducibility, lti_invariant_pair, pair_from_first_integral, serial_reduce, validate_pair,
    SubspacePair,
};
use crate::error::{Error, Result};
use crate::matrix::{read_matrix, read_vector, MatrixJson, Vector};
use crate::measures::{measure, measure_of_second_compound, Norm};
use crate::models::{self, parse_params, Activation, BuiltModel, ModelOptions, WeightedDigraph};
use crate::sampling::SampleSpec;
use crate::simulate::{classify, integrate, DetectionSettings, SolverSettings, Verdict};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "kcontract",
    version,
    about = "Compound matrices, matrix measures, and sampled k-contraction certificates"
)]
pub struct Cli {
    /// Seed for every random sample drawn by the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multiplicative or additive compound of a matrix.
    Compound(CompoundArgs),
    /// Matrix measure of a matrix or of its second additive compound.
    Measure(MeasureArgs),
    /// Sampled k-contraction certificate for a catalog model.
    Certify(CertifyArgs),
    /// Validate or construct a subspace pair and reduce the model to a cascade.
    Decompose(DecomposeArgs),
    /// Integrate a catalog model and classify its long-run behaviour.
    Simulate(SimulateArgs),
    /// Pair validation, reducibility, and restricted 2-contraction.
    NobCheck(PipelineArgs),
    /// Pair validation, reducibility, and restricted 2- and 1-contraction.
    ConvergeCheck(PipelineArgs),
    /// Model catalog.
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
    /// Reproduce the worked examples as data.
    Demo {
        #[command(subcommand)]
        which: DemoKind,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CompoundKind {
    Additive,
    Multiplicative,
}

#[derive(Debug, Args)]
pub struct CompoundArgs {
    /// Input matrix (JSON or CSV).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "additive")]
    pub kind: CompoundKind,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// 1, 2, or inf.
    #[arg(long, default_value = "2")]
    pub norm: Norm,
    /// Use the closed form for the measure of the second additive compound.
    #[arg(long)]
    pub of_second_compound: bool,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub model: String,
    /// Parameter overrides, `name=value` (repeatable or comma separated).
    #[arg(long = "param")]
    pub params: Vec<String>,
    /// Edge-list CSV (from,to,weight; 1-based) for the consensus models.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// linear or tanh, for the consensus models.
    #[arg(long, default_value = "linear")]
    pub activation: Activation,
    /// System matrix for the `lti` model.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    /// Grid points per axis.
    #[arg(long, default_value_t = 9)]
    pub per_axis: usize,
    /// Uniform random samples added after the grid.
    #[arg(long, default_value_t = 1000)]
    pub random: usize,
    /// Required margin: pass iff the bound is at most `-eta_min`.
    #[arg(long, default_value_t = DEFAULT_ETA_MIN)]
    pub eta_min: f64,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value = "2")]
    pub norm: Norm,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(id = "pair_source", multiple = false)]
pub struct PairSource {
    /// Linear first integral `c` (the pair is `U = c/|c|` and its complement).
    #[arg(long)]
    pub first_integral: Option<PathBuf>,
    /// Build the pair from an invariant eigenspace of this matrix.
    #[arg(long)]
    pub lti: Option<PathBuf>,
    /// Explicit pair `{"u": …, "v": …}`.
    #[arg(long)]
    pub pair: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub source: PairSource,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Explicit pair; defaults to the catalog pair (or an eigenspace pair for `lti`).
    #[arg(long)]
    pub pair: Option<PathBuf>,
    #[arg(long, default_value = "2")]
    pub norm: Norm,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Initial state, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub atol: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub rtol: f64,
    /// Detection tolerance on |f|, state drift, and periodic mismatch.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Trajectory CSV (t,x1..xn).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Asymptotics report JSON; stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ModelsAction {
    /// List models with parameters and defaults.
    List {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum DemoKind {
    /// Forced Duffing trajectory from the origin as CSV (t,x1,x2).
    DuffingFigure {
        #[arg(long, default_value_t = 500.0)]
        t_end: f64,
        /// Uniform output samples.
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Periodic solution of the sin-clock system from the origin.
    SinClockPeriod {
        #[arg(long, default_value_t = 20.0 * std::f64::consts::PI)]
        t_end: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
    };
    match run(&cli, stdout) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Runs a parsed command; `Ok(false)` means the check ran and failed.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::Compound(a) => compound_cmd(a, stdout),
        Command::Measure(a) => measure_cmd(a, stdout),
        Command::Certify(a) => certify_cmd(a, cli.seed, stdout),
        Command::Decompose(a) => decompose_cmd(a, cli.seed, stdout),
        Command::Simulate(a) => simulate_cmd(a, stdout),
        Command::NobCheck(a) => pipeline_cmd(a, cli.seed, true, stdout),
        Command::ConvergeCheck(a) => pipeline_cmd(a, cli.seed, false, stdout),
        Command::Models {
            action: ModelsAction::List { json },
        } => models_cmd(*json, stdout),
        Command::Demo { which } => demo_cmd(which, stdout),
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => writeln!(stdout, "{text}")?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T, stdout: &mut dyn Write) -> Result<()> {
    emit(out, &serde_json::to_string_pretty(value)?, stdout)
}

fn compound_cmd(a: &CompoundArgs, stdout: &mut dyn Write) -> Result<bool> {
    let m = read_matrix(&a.input)?;
    let c = match a.kind {
        CompoundKind::Additive => add_compound(&m, a.k)?,
        CompoundKind::Multiplicative => mult_compound(&m, a.k)?,
    };
    emit_json(a.out.as_deref(), &MatrixJson::from(&c), stdout)?;
    Ok(true)
}

fn measure_cmd(a: &MeasureArgs, stdout: &mut dyn Write) -> Result<bool> {
    let m = read_matrix(&a.input)?;
    let value = if a.of_second_compound {
        measure_of_second_compound(&m, a.norm)?
    } else {
        measure(&m, a.norm)?
    };
    writeln!(stdout, "{value}")?;
    Ok(true)
}

fn load_model(a: &ModelArgs) -> Result<BuiltModel> {
    let mut opts = ModelOptions {
        activation: a.activation,
        ..ModelOptions::default()
    };
    for p in &a.params {
        opts.params.extend(parse_params(p)?);
    }
    if let Some(path) = &a.graph {
        opts.graph = Some(WeightedDigraph::read(path)?);
    }
    if let Some(path) = &a.matrix {
        opts.matrix = Some(read_matrix(path)?);
    }
    models::build(&a.model, &opts)
}

fn sample_spec(s: &SamplingArgs, seed: u64) -> SampleSpec {
    SampleSpec::default()
        .with_counts(s.per_axis, s.random)
        .with_seed(seed)
}

fn certify_cmd(a: &CertifyArgs, seed: u64, stdout: &mut dyn Write) -> Result<bool> {
    let built = load_model(&a.model)?;
    let cert = certify_k_contraction(
        &built.model,
        a.k,
        a.norm,
        &sample_spec(&a.sampling, seed),
        a.sampling.eta_min,
    )?;
    emit_json(a.out.as_deref(), &cert, stdout)?;
    Ok(cert.passed)
}

/// The catalog pair, or for `lti` a pair from an invariant eigenspace.
fn default_pair(built: &BuiltModel) -> Result<SubspacePair> {
    if let Some(p) = &built.known_pair {
        return Ok(p.clone());
    }
    if let Some(a) = &built.lti_matrix {
        return lti_invariant_pair(a);
    }
    Err(Error::Precondition(format!(
        "model {} has no known subspace pair; pass one with --pair",
        built.model.id()
    )))
}

fn decompose_cmd(a: &DecomposeArgs, seed: u64, stdout: &mut dyn Write) -> Result<bool> {
    let built = load_model(&a.model)?;
    let pair = if let Some(path) = &a.source.first_integral {
        pair_from_first_integral(&read_vector(path)?)?
    } else if let Some(path) = &a.source.lti {
        lti_invariant_pair(&read_matrix(path)?)?
    } else if let Some(path) = &a.source.pair {
        SubspacePair::read(path)?
    } else {
        default_pair(&built)?
    };
    let validation = validate_pair(&pair);
    let mut doc = json!({
        "model": built.model.id(),
        "pair": pair.to_json(),
        "pair_validation": validation,
    });
    if !validation.passed {
        emit_json(a.out.as_deref(), &doc, stdout)?;
        return Ok(false);
    }
    let red = check_reducibility(&built.model, &pair, &sample_spec(&a.sampling, seed))?;
    doc["reducibility"] = serde_json::to_value(&red)?;
    if red.passed {
        let cascade = serial_reduce(&built.model, &pair, &red)?;
        doc["reduced"] = json!({
            "transform": MatrixJson::from(&pair.transform()),
            "upstream": {
                "dim": cascade.upstream.dim(),
                "equation": "y1' = V^T f(t, V y1)",
                "time_varying": cascade.upstream.is_time_varying(),
            },
            "downstream": {
                "dim": cascade.downstream.dim(),
                "input_dim": cascade.downstream.input_arity(),
                "equation": "y2' = U^T f(t, U y2 + V y1)",
            },
            "coupling": "V y1",
        });
    }
    emit_json(a.out.as_deref(), &doc, stdout)?;
    Ok(red.passed)
}

fn pipeline_cmd(a: &PipelineArgs, seed: u64, nob: bool, stdout: &mut dyn Write) -> Result<bool> {
    let built = load_model(&a.model)?;
    let pair = match &a.pair {
        Some(path) => SubspacePair::read(path)?,
        None => default_pair(&built)?,
    };
    let spec = sample_spec(&a.sampling, seed);
    let report = if nob {
        nob_pipeline(&built.model, &pair, a.norm, &spec, a.sampling.eta_min)?
    } else {
        convergence_pipeline(&built.model, &pair, a.norm, &spec, a.sampling.eta_min)?
    };
    emit_json(a.out.as_deref(), &report, stdout)?;
    Ok(report.passed)
}

fn parse_state(s: &str) -> Result<Vector> {
    let values = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad state component {v:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Vector::from_vec(values))
}

fn simulate_cmd(a: &SimulateArgs, stdout: &mut dyn Write) -> Result<bool> {
    let built = load_model(&a.model)?;
    let x0 = parse_state(&a.x0)?;
    let settings = SolverSettings::default().with_tolerances(a.atol, a.rtol);
    let traj = integrate(&built.model, &x0, a.t0, a.t_end, &settings)?;
    if let Some(path) = &a.out {
        traj.write_csv(std::fs::File::create(path)?)?;
    }
    let detection = DetectionSettings {
        tol: a.tol,
        ..DetectionSettings::default()
    };
    let report = classify(&traj, &built.model, &detection)?;
    let doc = json!({
        "model": built.model.id(),
        "x0": traj.x0,
        "t_end": traj.t_end(),
        "steps": traj.len() - 1,
        "final_state": traj.final_state().as_slice(),
        "events": traj.events,
        "asymptotics": report,
    });
    emit_json(a.report.as_deref(), &doc, stdout)?;
    Ok(true)
}

fn models_cmd(as_json: bool, stdout: &mut dyn Write) -> Result<bool> {
    if as_json {
        writeln!(
            stdout,
            "{}",
            serde_json::to_string_pretty(models::catalog())?
        )?;
        return Ok(true);
    }
    for e in models::catalog() {
        writeln!(stdout, "{}: {}", e.name, e.summary)?;
        writeln!(stdout, "    {}", e.equations)?;
        for p in e.params {
            writeln!(stdout, "    {} = {} ({})", p.name, p.default, p.constraint)?;
        }
        if !e.options.is_empty() {
            writeln!(stdout, "    options: {}", e.options)?;
        }
    }
    Ok(true)
}

fn demo_cmd(which: &DemoKind, stdout: &mut dyn Write) -> Result<bool> {
    match which {
        DemoKind::DuffingFigure {
            t_end,
            samples,
            out,
        } => {
            let m = models::build_default("duffing")?.model;
            let traj = integrate(
                &m,
                &Vector::zeros(2),
                0.0,
                *t_end,
                &SolverSettings::default(),
            )?;
            let (times, states) = traj.resample((*samples).max(2));
            let mut buf = Vec::new();
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(["t", "x1", "x2"])?;
                for (t, x) in times.iter().zip(&states) {
                    w.write_record([t.to_string(), x[0].to_string(), x[1].to_string()])?;
                }
                w.flush()?;
            }
            let text = String::from_utf8(buf).expect("csv output is utf-8");
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => stdout.write_all(text.as_bytes())?,
            }
            Ok(true)
        }
        DemoKind::SinClockPeriod { t_end, out } => {
            let (doc, periodic) = sin_clock_period_report(*t_end)?;
            emit_json(out.as_deref(), &doc, stdout)?;
            Ok(periodic)
        }
    }
}

/// 2-contraction certificate and detected period of the sin-clock system
/// started at the origin.
pub fn sin_clock_period_report(t_end: f64) -> Result<(serde_json::Value, bool)> {
    let m = models::build_default("sin-clock")?.model;
    let cert: Certificate = certify_k_contraction(
        &m,
        2,
        Norm::L2,
        &SampleSpec::default().with_counts(5, 100),
        DEFAULT_ETA_MIN,
    )?;
    let traj = integrate(
        &m,
        &Vector::zeros(2),
        0.0,
        t_end,
        &SolverSettings::precise(),
    )?;
    let report = classify(&traj, &m, &DetectionSettings::default())?;
    let periodic = report.verdict == Verdict::Periodic;
    let doc = json!({
        "model": m.id(),
        "two_contraction": cert,
        "trajectory_end": traj.final_state().as_slice(),
        "asymptotics": report,
    });
    Ok((doc, periodic))
}
