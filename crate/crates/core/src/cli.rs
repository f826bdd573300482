//! The `entmono` command line: measure, check, sweep and sample.
//!
//! Exit codes: 0 on success (including reports whose premises fail), 1 on I/O
//! failures, 2 on invalid input or domain errors.

use std::f64::consts::SQRT_2;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::catalog::{self, FamilySpec};
use crate::concentration::{run_lemma6, run_theorem10, ConcentrationSpec, DEFAULT_INNER_ITERS};
use crate::error::{Error, Result};
use crate::measures::{evaluate_cut, MeasureKind, MeasureValue};
use crate::monogamy::{self, Gamma, MonogamyReport, Parties};
use crate::numfmt;
use crate::qstate::{Bipartition, QuantumState};

pub const DEFAULT_SEED: u64 = 20_190_101;

#[derive(Debug, Parser)]
#[command(name = "entmono", version, about = "Entanglement measures and monogamy checks for small quantum states")]
pub struct Cli {
    /// Worker threads for sweeps and sampling (0 = all cores).
    #[arg(long, global = true, env = "ENTMONO_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate entanglement measures of one state across one or more cuts.
    Measure(MeasureArgs),
    /// Evaluate a monogamy inequality and print its report.
    Check(CheckArgs),
    /// Regenerate a figure's residual grid.
    Sweep(SweepArgs),
    /// Run a concentration experiment on random states.
    #[command(subcommand)]
    Sample(SampleCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Named family, e.g. dicke:4,2, dfs:a,b, acin:theta,phi, bell, ghz:n, w:n, product:n.
    #[arg(long, conflicts_with = "state", required_unless_present = "state")]
    pub family: Option<String>,
    /// JSON state file `{dims, kind, data}`.
    #[arg(long)]
    pub state: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasureSelection {
    /// Measure name: concurrence, negativity, eof, tsallis, renyi, unified.
    /// Parameters may be inline (tsallis:0.7, unified:1.4,0.6) or given by --q/--s.
    #[arg(long = "measure", short = 'm')]
    pub measures: Vec<String>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Cut `i,j,...|rest` or `i,j|k,l` with 0-based indices; repeatable.
    #[arg(long = "cut")]
    pub cuts: Vec<String>,
    #[command(flatten)]
    pub measure: MeasureSelection,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Base,
    Thm1,
    Thm2,
    Thm3,
    Thm4,
    Thm5,
    Thm6,
    Thm7,
    Thm8,
    Thm9,
}

impl FromStr for KindArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <KindArg as ValueEnum>::from_str(s, true).map_err(|_| Error::domain(format!("unknown relation '{s}'")))
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// `focus|parts` for base and thm1-3, `A|B` partition otherwise. Default `0|rest`.
    #[arg(long)]
    pub cut: Option<String>,
    #[command(flatten)]
    pub measure: MeasureSelection,
    /// Exponent; defaults to the measure's critical exponent (2 for thm8, 1 for thm9).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// `auto` or a number >= 1.
    #[arg(long, default_value = "auto")]
    pub gamma: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Figure: 1 (three-qubit normal form), 2 (decoherence-free), 3 (Dicke).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub fig: u8,
    /// Grid points per axis for figure 1.
    #[arg(long, default_value_t = 50)]
    pub res: usize,
    /// Exponent: a value, a list `a,b,c`, or a range `lo:hi:step`.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Figure 2 only: `auto` or a number >= 1.
    #[arg(long, default_value = "auto")]
    pub gamma: String,
    #[command(flatten)]
    pub measure: MeasureSelection,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum SampleCommand {
    /// Haar pure states on C^n (x) C^s: statistics of M on the C^n marginal.
    Lemma6(Lemma6Args),
    /// Induced states on C^d (x) C^d: tangle upper bounds.
    Thm10(Thm10Args),
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    #[arg(long, env = "ENTMONO_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write per-sample values as CSV to this path.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Lemma6Args {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub s: usize,
    #[arg(long = "N", alias = "samples", default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.1)]
    pub t: f64,
    #[command(flatten)]
    pub seed: SeedArgs,
}

#[derive(Debug, Args)]
pub struct Thm10Args {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    #[arg(long = "N", alias = "samples", default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = DEFAULT_INNER_ITERS)]
    pub iters: usize,
    #[command(flatten)]
    pub seed: SeedArgs,
}

/// Parses a measure with inline parameters (`tsallis:0.7`, `unified:1.4,0.6`) or
/// fallback `q`/`s` values.
pub fn parse_measure(text: &str, q: Option<f64>, s: Option<f64>) -> Result<MeasureKind> {
    let (name, inline) = match text.split_once(':') {
        Some((n, rest)) => (n.trim(), Some(rest)),
        None => (text.trim(), None),
    };
    let nums: Vec<f64> = match inline {
        Some(rest) => rest
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| Error::domain(format!("bad measure parameter in '{text}'"))))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let need = |i: usize, fallback: Option<f64>, what: &str| -> Result<f64> {
        nums.get(i).copied().or(fallback).ok_or_else(|| Error::domain(format!("measure '{name}' needs {what}")))
    };
    let kind = match name.to_ascii_lowercase().as_str() {
        "concurrence" => MeasureKind::Concurrence,
        "negativity" => MeasureKind::Negativity,
        "eof" => MeasureKind::Eof,
        "tsallis" => MeasureKind::Tsallis { q: need(0, q, "q")? },
        "renyi" => MeasureKind::Renyi { q: need(0, q, "q")? },
        "unified" => MeasureKind::Unified { q: need(0, q, "q")?, s: need(1, s, "s")? },
        other => return Err(Error::domain(format!("unknown measure '{other}'"))),
    };
    kind.validate()?;
    Ok(kind)
}

impl MeasureSelection {
    fn kinds(&self, default: &[MeasureKind]) -> Result<Vec<MeasureKind>> {
        if self.measures.is_empty() {
            return Ok(default.to_vec());
        }
        self.measures.iter().map(|m| parse_measure(m, self.q, self.s)).collect()
    }
}

/// Parses `a,b|rest` or `a,b|c,d` into the two sides.
pub fn parse_cut(text: &str, n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let (a, b) = text
        .split_once('|')
        .ok_or_else(|| Error::InvalidIndex(format!("cut '{text}' must look like 'i,j|rest'")))?;
    let list = |s: &str| -> Result<Vec<usize>> {
        s.split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|_| Error::InvalidIndex(format!("bad index in cut '{text}'"))))
            .collect()
    };
    let side_a = list(a)?;
    let side_b = if b.trim().eq_ignore_ascii_case("rest") {
        (0..n).filter(|i| !side_a.contains(i)).collect()
    } else {
        list(b)?
    };
    let mut all: Vec<usize> = side_a.iter().chain(&side_b).copied().collect();
    all.sort_unstable();
    if side_a.is_empty() || side_b.is_empty() || all.windows(2).any(|w| w[0] == w[1]) || all.iter().any(|&i| i >= n) {
        return Err(Error::InvalidIndex(format!("cut '{text}' is not valid for {n} subsystems")));
    }
    Ok((side_a, side_b))
}

/// Parses a single exponent, a comma list, or `lo:hi:step`.
pub fn parse_alphas(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::domain(format!("cannot parse exponent grid '{text}'"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    if text.contains(':') {
        let parts: Vec<f64> = text.split(':').map(num).collect::<Result<_>>()?;
        let [lo, hi, step] = parts[..] else { return Err(bad()) };
        if !(step > 0.0) || hi < lo {
            return Err(bad());
        }
        let steps = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        return Ok((0..steps).map(|i| lo + step * i as f64).map(numfmt::round).collect());
    }
    text.split(',').map(num).collect()
}

pub fn parse_gamma(text: &str) -> Result<Gamma> {
    if text.trim().eq_ignore_ascii_case("auto") {
        return Ok(Gamma::Auto);
    }
    let g: f64 = text.trim().parse().map_err(|_| Error::domain(format!("gamma must be 'auto' or a number (got '{text}')")))?;
    if !(g >= 1.0) || !g.is_finite() {
        return Err(Error::domain(format!("gamma must be >= 1 (got {g})")));
    }
    Ok(Gamma::Fixed(g))
}

struct LoadedState {
    label: String,
    state: QuantumState,
}

fn load_state(args: &StateArgs) -> Result<LoadedState> {
    if let Some(family) = &args.family {
        let spec = FamilySpec::from_str(family)?;
        return Ok(LoadedState { label: spec.to_string(), state: QuantumState::Pure(spec.build()?) });
    }
    let path = args.state.as_ref().ok_or_else(|| Error::domain("either --family or --state is required"))?;
    let text = std::fs::read_to_string(path)?;
    Ok(LoadedState { label: path.display().to_string(), state: QuantumState::from_json(&text)? })
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn cut_label(a: &[usize], b: &[usize]) -> String {
    let j = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
    format!("{}|{}", j(a), j(b))
}

#[derive(Debug, Serialize)]
struct MeasureRecord {
    state: String,
    cut: String,
    #[serde(flatten)]
    value: MeasureValue,
}

fn cmd_measure(args: &MeasureArgs) -> Result<Vec<u8>> {
    let loaded = load_state(&args.state)?;
    let n = loaded.state.register().len();
    let kinds = args.measure.kinds(&[MeasureKind::Concurrence])?;
    let cuts = if args.cuts.is_empty() { vec!["0|rest".to_string()] } else { args.cuts.clone() };
    let mut records = Vec::new();
    for cut in &cuts {
        let (a, b) = parse_cut(cut, n)?;
        for &kind in &kinds {
            let mut value = evaluate_cut(kind, &loaded.state, &a, &b)?;
            value.value = numfmt::round(value.value);
            records.push(MeasureRecord { state: loaded.label.clone(), cut: cut_label(&a, &b), value });
        }
    }
    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json_bytes(&records),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["state", "cut", "measure", "params", "value", "method"])?;
            for r in &records {
                w.write_record([
                    r.state.clone(),
                    r.cut.clone(),
                    r.value.kind.name().to_string(),
                    params_text(&r.value.kind),
                    numfmt::sig(r.value.value),
                    serde_json::to_value(r.value.method)?.as_str().unwrap_or_default().to_string(),
                ])?;
            }
            csv_bytes(w)
        }
    }
}

fn params_text(kind: &MeasureKind) -> String {
    kind.params().iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn csv_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Builds one inequality report for `state` across `cut` (`focus|parts` for base
/// and thm1-3, a partition `A|B` otherwise). `alpha` defaults per relation.
pub fn check_report(
    state: &QuantumState,
    kind_arg: KindArg,
    kind: MeasureKind,
    cut: &str,
    alpha: Option<f64>,
    gamma: Gamma,
) -> Result<MonogamyReport> {
    let n = state.register().len();
    let (a, b) = parse_cut(cut, n)?;
    let focus_parties = || -> Result<Parties> {
        match a[..] {
            [focus] => Parties::new(focus, b.clone()),
            _ => Err(Error::InvalidIndex(format!("{kind_arg:?} needs a single focus subsystem, got cut '{cut}'"))),
        }
    };
    let partition = || Bipartition::from_sides(n, &a, &b);
    let pure = || state.as_pure().ok_or_else(|| Error::domain("upper-bound relations accept only pure states"));
    let alpha_c = kind.alpha_c();
    match kind_arg {
        KindArg::Base => {
            if alpha.is_some_and(|x| (x - alpha_c).abs() > 1e-12) {
                return Err(Error::domain("the base relation is evaluated at the critical exponent"));
            }
            monogamy::check_base(state, kind, &focus_parties()?)
        }
        KindArg::Thm1 => monogamy::check_thm1(state, kind, &focus_parties()?, alpha.unwrap_or(alpha_c), gamma),
        KindArg::Thm2 => monogamy::check_thm2(state, kind, &focus_parties()?, alpha.unwrap_or(alpha_c), gamma),
        KindArg::Thm3 => monogamy::check_thm3(state, kind, &focus_parties()?, alpha.unwrap_or(alpha_c), gamma),
        KindArg::Thm4 => {
            let alpha = alpha.unwrap_or(alpha_c);
            if (alpha - alpha_c).abs() > 1e-12 {
                return Err(Error::domain(format!("thm4 is stated at alpha = {alpha_c}; use thm5 for other exponents")));
            }
            monogamy::check_thm4_5(state, kind, alpha, &partition()?)
        }
        KindArg::Thm5 => monogamy::check_thm4_5(state, kind, alpha.unwrap_or(alpha_c), &partition()?),
        KindArg::Thm6 => monogamy::check_thm6(state, kind, alpha.unwrap_or(alpha_c), &partition()?),
        KindArg::Thm7 => {
            if kind != MeasureKind::Concurrence {
                return Err(Error::domain("thm7 is a concurrence relation"));
            }
            monogamy::check_thm7_upper(pure()?, &partition()?)
        }
        KindArg::Thm8 => {
            if kind != MeasureKind::Concurrence {
                return Err(Error::domain("thm8 is a concurrence relation"));
            }
            monogamy::check_thm8_upper(pure()?, &partition()?, alpha.unwrap_or(2.0))
        }
        KindArg::Thm9 => match kind {
            MeasureKind::Unified { q, s } => monogamy::check_thm9_upper(pure()?, &partition()?, alpha.unwrap_or(1.0), q, s),
            _ => Err(Error::domain("thm9 is a unified-entropy relation; pass --measure unified:q,s")),
        },
    }
}

fn cmd_check(args: &CheckArgs) -> Result<Vec<u8>> {
    let loaded = load_state(&args.state)?;
    let kinds = args.measure.kinds(&[MeasureKind::Concurrence])?;
    let cut = args.cut.clone().unwrap_or_else(|| "0|rest".into());
    let gamma = parse_gamma(&args.gamma)?;
    let reports = kinds
        .iter()
        .map(|&k| check_report(&loaded.state, args.kind, k, &cut, args.alpha, gamma).map(|r| r.rounded()))
        .collect::<Result<Vec<_>>>()?;
    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                state: &'a str,
                cut: &'a str,
                reports: &'a [MonogamyReport],
            }
            json_bytes(&Out { state: &loaded.label, cut: &cut, reports: &reports })
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(MonogamyReport::CSV_HEADER)?;
            for r in &reports {
                w.write_record(r.csv_record())?;
            }
            csv_bytes(w)
        }
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<Vec<u8>> {
    let alphas = args.alpha.as_deref().map(parse_alphas).transpose()?;
    let grid = match args.fig {
        1 => {
            let alpha = match alphas.as_deref() {
                None => 2.0,
                Some([a]) => *a,
                Some(_) => return Err(Error::domain("figure 1 takes a single exponent")),
            };
            catalog::sweep_fig1(args.res, &args.measure.kinds(&catalog::fig1_measures())?, alpha)?
        }
        2 => {
            let alphas = alphas.unwrap_or_else(|| catalog::linspace(SQRT_2, 5.0, 37));
            catalog::sweep_fig2(
                &catalog::fig2_cases(),
                &args.measure.kinds(&catalog::fig2_measures())?,
                &alphas,
                parse_gamma(&args.gamma)?,
            )?
        }
        _ => {
            let alphas = match alphas {
                Some(a) => a,
                None => parse_alphas("0:5:0.05")?,
            };
            catalog::sweep_fig3(&catalog::fig3_families(), &args.measure.kinds(&catalog::fig3_measures())?, &alphas)?
        }
    };
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            grid.write_csv(&mut buf)?;
            Ok(buf)
        }
        Format::Json => {
            let mut rounded = grid.clone();
            for row in &mut rounded.rows {
                row.coords.iter_mut().for_each(|x| *x = numfmt::round(*x));
                row.residuals.iter_mut().flatten().for_each(|x| *x = numfmt::round(*x));
            }
            json_bytes(&rounded)
        }
    }
}

fn cmd_sample(cmd: &SampleCommand) -> Result<(Vec<u8>, Option<PathBuf>)> {
    let (stats, seed) = match cmd {
        SampleCommand::Lemma6(a) => {
            let spec = ConcentrationSpec { n: a.n, s: a.s, samples: a.samples, t: a.t, seed: a.seed.seed };
            (run_lemma6(&spec)?, &a.seed)
        }
        SampleCommand::Thm10(a) => {
            (run_theorem10(a.d, a.s, a.samples, a.t, a.restarts, a.iters, a.seed.seed)?, &a.seed)
        }
    };
    if let Some(path) = &seed.dump {
        let mut buf = Vec::new();
        stats.write_samples_csv(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    Ok((json_bytes(&stats.rounded())?, seed.out.clone()))
}

fn configure_threads(threads: usize) {
    if threads > 0 {
        // A second configuration attempt in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

/// Runs a parsed command line, writing results to the requested destination.
pub fn run(cli: &Cli) -> Result<()> {
    configure_threads(cli.threads);
    match &cli.command {
        Command::Measure(a) => emit(a.output.out.as_deref(), &cmd_measure(a)?),
        Command::Check(a) => emit(a.output.out.as_deref(), &cmd_check(a)?),
        Command::Sweep(a) => emit(a.output.out.as_deref(), &cmd_sweep(a)?),
        Command::Sample(cmd) => {
            let (bytes, out) = cmd_sample(cmd)?;
            emit(out.as_deref(), &bytes)
        }
    }
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        1
    } else {
        2
    }
}

/// Parses arguments, runs, and returns the exit code. Argument errors and help
/// output are handled by the parser (exit code 2 and 0).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
