//! The `pmc` command line.

pub mod json;
pub mod render;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use pmc_core::density::{
    self, evidence_density, DensityChannel, DensityError, DensityState, QuadratureSpec,
};
use pmc_core::diagram::{evaluate, parse, parse_term, Model, ParseErrors, Term, TypeError};
use pmc_core::exactnf::{nf_denote, nf_from_term, NfError, NormalForm};
use pmc_core::inference::{
    bayes_invert, conditional, jeffrey_update, normalize, pearl_update, validity, Conditioning,
    Convention,
};
use pmc_core::laws::{all_laws, model_laws, LawConfig, LawReport};
use pmc_core::{Error as KernelError, SubKernel, Tolerances};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MODEL: i32 = 2;
pub const EXIT_LAWS: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "pmc",
    version,
    about = "Exact conditioning and Bayesian updates on finite substochastic kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    /// Row used where a conditional or normalisation divides by zero.
    #[arg(long, value_enum, default_value_t = ConventionArg::UniformFill, global = true)]
    convention: ConventionArg,
    /// Masses at or below this count as zero.
    #[arg(long, global = true)]
    zero_mass_tol: Option<f64>,
    /// Entrywise tolerance for law checks.
    #[arg(long, global = true)]
    law_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    UniformFill,
    ZeroFill,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a kernel, state, diagram or term.
    Eval {
        model: PathBuf,
        #[arg(long)]
        term: String,
    },
    /// Normalise each row by its success probability.
    Normalize {
        model: PathBuf,
        #[arg(long)]
        term: String,
    },
    /// Conditional on the first SPLIT output factors.
    Condition {
        model: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        split: usize,
    },
    /// Bayesian inversion of a kernel with respect to a prior.
    Invert {
        model: PathBuf,
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        prior: String,
    },
    /// Pearl's update of a prior on a predicate seen through a channel.
    Pearl {
        model: PathBuf,
        #[arg(long)]
        prior: String,
        #[arg(long)]
        channel: String,
        #[arg(long)]
        predicate: String,
        #[arg(long)]
        renorm: bool,
    },
    /// Jeffrey's update of a prior on an evidence state.
    Jeffrey {
        model: PathBuf,
        #[arg(long)]
        prior: String,
        #[arg(long)]
        channel: String,
        #[arg(long)]
        evidence: String,
    },
    /// Normal form of a term: evidence channel, observed point, result channel.
    Nf {
        model: PathBuf,
        #[arg(long)]
        term: String,
    },
    /// Posterior densities of a 1-D prior after exact observations, as CSV.
    Posterior {
        /// `uniform:A,B` or `normal:MU,SIGMA`.
        #[arg(long)]
        prior: String,
        /// `normal:SIGMA`.
        #[arg(long)]
        channel: String,
        #[arg(long = "observe", allow_negative_numbers = true)]
        observe: Vec<f64>,
        #[arg(long, default_value_t = 2001)]
        grid: usize,
        #[arg(long, default_value_t = 1e-8)]
        quad_tol: f64,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the randomized law suites and the laws instantiated on a model.
    CheckLaws {
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        /// Random instances per law.
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

#[derive(Debug)]
struct CliError {
    code: i32,
    kind: &'static str,
    message: String,
    details: Vec<Value>,
}

impl CliError {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            kind,
            message: message.into(),
            details: Vec::new(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        CliError::new(EXIT_USAGE, "usage", message)
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        CliError::new(EXIT_MODEL, "type", e.to_string())
    }
}

impl From<TypeError> for CliError {
    fn from(e: TypeError) -> Self {
        CliError::new(EXIT_MODEL, "type", e.to_string())
    }
}

impl From<NfError> for CliError {
    fn from(e: NfError) -> Self {
        CliError::new(EXIT_MODEL, "normal-form", e.to_string())
    }
}

impl From<DensityError> for CliError {
    fn from(e: DensityError) -> Self {
        match e {
            DensityError::Invalid(m) => CliError::usage(m),
            DensityError::Io { .. } => CliError::new(EXIT_USAGE, "io", e.to_string()),
            other => CliError::new(EXIT_NUMERIC, "numeric", other.to_string()),
        }
    }
}

fn syntax_error(e: ParseErrors, source: &str) -> CliError {
    let details =
        e.0.iter()
            .map(|s| json!({"line": s.line, "column": s.col, "message": s.message}))
            .collect();
    CliError {
        code: EXIT_MODEL,
        kind: "model",
        message: e
            .0
            .iter()
            .map(|s| format!("{source}:{s}"))
            .collect::<Vec<_>>()
            .join("; "),
        details,
    }
}

struct Ctx {
    format: Format,
    cond: Conditioning,
    tol: Tolerances,
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else if wants_json(&args) {
                let first = text
                    .lines()
                    .take_while(|l| !l.starts_with("Usage:"))
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .collect::<Vec<_>>()
                    .join(" ");
                let first = first.trim_start_matches("error: ");
                let _ = writeln!(
                    err,
                    "{}",
                    json!({"error": {"kind": "usage", "message": first, "exit_code": code}})
                );
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let format = cli.format;
    match execute(cli) {
        Ok(text) => {
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = if format == Format::Json {
                let mut body = json!({"kind": e.kind, "message": e.message, "exit_code": e.code});
                if !e.details.is_empty() {
                    body["details"] = Value::Array(e.details.clone());
                }
                writeln!(err, "{}", json!({ "error": body }))
            } else {
                writeln!(err, "error: {}", e.message)
            };
            e.code
        }
    }
}

fn wants_json(args: &[OsString]) -> bool {
    args.windows(2)
        .any(|w| w[0] == "--format" && w[1] == "json")
        || args.iter().any(|a| a == "--format=json")
}

fn execute(cli: Cli) -> Result<String, CliError> {
    let mut tol = Tolerances::default();
    if let Some(t) = cli.zero_mass_tol {
        tol.zero_mass_tol = t;
    }
    if let Some(t) = cli.law_tol {
        tol.law_tol = t;
    }
    if let Command::CheckLaws { tol: Some(t), .. } = &cli.command {
        tol.law_tol = *t;
    }
    tol.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let ctx = Ctx {
        format: cli.format,
        cond: Conditioning {
            convention: match cli.convention {
                ConventionArg::UniformFill => Convention::UniformFill,
                ConventionArg::ZeroFill => Convention::ZeroFill,
            },
            zero_mass_tol: tol.zero_mass_tol,
        },
        tol,
    };
    match cli.command {
        Command::Eval { model, term } => {
            let m = load(&model)?;
            Ok(ctx.kernel(&resolve(&m, &term)?))
        }
        Command::Normalize { model, term } => {
            let m = load(&model)?;
            Ok(ctx.kernel(&normalize(&resolve(&m, &term)?, &ctx.cond)))
        }
        Command::Condition { model, term, split } => {
            let m = load(&model)?;
            Ok(ctx.kernel(&conditional(&resolve(&m, &term)?, split, &ctx.cond)?))
        }
        Command::Invert {
            model,
            kernel,
            prior,
        } => {
            let m = load(&model)?;
            let (f, p) = (resolve(&m, &kernel)?, resolve(&m, &prior)?);
            Ok(ctx.kernel(&bayes_invert(&f, &p, &ctx.cond)?))
        }
        Command::Pearl {
            model,
            prior,
            channel,
            predicate,
            renorm,
        } => {
            let m = load(&model)?;
            let (p, f, q) = (
                resolve(&m, &prior)?,
                resolve(&m, &channel)?,
                resolve(&m, &predicate)?,
            );
            if renorm {
                let v = validity(&p, &f, &q)?;
                if v <= ctx.cond.zero_mass_tol {
                    return Err(CliError::new(
                        EXIT_NUMERIC,
                        "numeric",
                        format!("the predicate has probability {v:e}; cannot renormalise"),
                    ));
                }
            }
            Ok(ctx.kernel(&pearl_update(&p, &f, &q, renorm, &ctx.cond)?))
        }
        Command::Jeffrey {
            model,
            prior,
            channel,
            evidence,
        } => {
            let m = load(&model)?;
            let (p, f, t) = (
                resolve(&m, &prior)?,
                resolve(&m, &channel)?,
                resolve(&m, &evidence)?,
            );
            Ok(ctx.kernel(&jeffrey_update(&p, &f, &t, &ctx.cond)?))
        }
        Command::Nf { model, term } => {
            let m = load(&model)?;
            let t = resolve_term(&m, &term)?;
            let nf = nf_from_term(&t, &m)?;
            Ok(ctx.normal_form(&nf))
        }
        Command::Posterior {
            prior,
            channel,
            observe,
            grid,
            quad_tol,
            out,
        } => {
            let prior = parse_prior(&prior)?;
            let channel = parse_channel(&channel)?;
            let q = QuadratureSpec { n: grid, quad_tol };
            q.validate()?;
            for &v in &observe {
                let e = evidence_density(&prior, &channel, v, &q)?;
                if e.is_nan() || e <= q.quad_tol {
                    return Err(DensityError::ZeroEvidence { v, evidence: e }.into());
                }
            }
            match out {
                Some(path) => {
                    density::emit_posterior_csv(&prior, &channel, &observe, &q, &path)?;
                    Ok(String::new())
                }
                None => {
                    let mut buf = Vec::new();
                    density::write_posterior_csv(&mut buf, &prior, &channel, &observe, &q)?;
                    Ok(String::from_utf8(buf).expect("ascii output"))
                }
            }
        }
        Command::CheckLaws {
            model, seed, cases, ..
        } => {
            let m = load(&model)?;
            let cfg = LawConfig {
                seed,
                cases,
                tol: ctx.tol.law_tol,
                zero_mass_tol: ctx.tol.zero_mass_tol,
                ..LawConfig::default()
            };
            let mut reports = model_laws(&m, &cfg);
            reports.extend(all_laws(&cfg));
            let text = ctx.laws(&reports);
            if reports.iter().all(LawReport::passed) {
                Ok(text)
            } else {
                Err(CliError {
                    code: EXIT_LAWS,
                    kind: "laws",
                    message: format!(
                        "{} of {} laws failed\n{}",
                        reports.iter().filter(|r| !r.passed()).count(),
                        reports.len(),
                        text.trim_end()
                    ),
                    details: Vec::new(),
                })
            }
        }
    }
}

fn load(path: &Path) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_MODEL, "io", format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| syntax_error(e, &path.display().to_string()))
}

/// A declared name, or else a term over the model's names.
fn resolve_term(m: &Model, text: &str) -> Result<Term, CliError> {
    if m.boundary(text).is_some() {
        return Ok(Term::gen(text));
    }
    parse_term(text, m).map_err(|e| syntax_error(e, "term"))
}

fn resolve(m: &Model, text: &str) -> Result<SubKernel, CliError> {
    if let Some(k) = m.kernel_of(text) {
        return Ok(k);
    }
    Ok(evaluate(&resolve_term(m, text)?, m)?)
}

fn numbers(arg: &str, what: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let parts = arg
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::usage(format!("{what}: expected numbers, got `{arg}`")))?;
    if parts.len() != n {
        return Err(CliError::usage(format!(
            "{what}: expected {n} numbers, got `{arg}`"
        )));
    }
    Ok(parts)
}

fn parse_prior(arg: &str) -> Result<DensityState, CliError> {
    let state = match arg.split_once(':') {
        Some(("uniform", rest)) => {
            let v = numbers(rest, "uniform prior", 2)?;
            DensityState::Uniform { a: v[0], b: v[1] }
        }
        Some(("normal", rest)) => {
            let v = numbers(rest, "normal prior", 2)?;
            DensityState::Normal {
                mu: v[0],
                sigma: v[1],
            }
        }
        _ => {
            return Err(CliError::usage(format!(
                "prior must be `uniform:A,B` or `normal:MU,SIGMA`, got `{arg}`"
            )))
        }
    };
    state.validate()?;
    Ok(state)
}

fn parse_channel(arg: &str) -> Result<DensityChannel, CliError> {
    match arg.split_once(':') {
        Some(("normal", rest)) => {
            let c = DensityChannel::NormalMean {
                sigma: numbers(rest, "normal channel", 1)?[0],
            };
            c.validate()?;
            Ok(c)
        }
        _ => Err(CliError::usage(format!(
            "channel must be `normal:SIGMA`, got `{arg}`"
        ))),
    }
}

impl Ctx {
    fn kernel(&self, k: &SubKernel) -> String {
        match self.format {
            Format::Json => pretty(&json::kernel_to_json(k)),
            Format::Csv => render::kernel_csv(k),
            Format::Table => render::kernel_table(k),
        }
    }

    fn normal_form(&self, nf: &NormalForm) -> String {
        let dom = nf.dom();
        let z = nf.evidence().render_label(nf.z());
        match self.format {
            Format::Json => {
                let success: Map<String, Value> = (0..dom.size())
                    .map(|x| (dom.render_label(x), json!(nf.success(x))))
                    .collect();
                pretty(&json!({
                    "dom": json::object_to_json(dom),
                    "cod": json::object_to_json(nf.cod()),
                    "evidence": json::object_to_json(nf.evidence()),
                    "z": z,
                    "h": json::kernel_to_json(nf.h().kernel()),
                    "g": json::kernel_to_json(nf.g().kernel()),
                    "success": success,
                    "denotation": json::kernel_to_json(&nf_denote(nf)),
                }))
            }
            Format::Csv => {
                let g = nf.g().kernel();
                let mut rows = vec![{
                    let mut h = vec!["in".to_string(), "success".to_string()];
                    h.extend((0..g.cols()).map(|y| g.cod().render_label(y)));
                    h
                }];
                for x in 0..dom.size() {
                    let mut line = vec![dom.render_label(x), nf.success(x).to_string()];
                    line.extend(g.row(x).iter().map(|w| w.to_string()));
                    rows.push(line);
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in rows {
                    w.write_record(&r).expect("writing to memory");
                }
                String::from_utf8(w.into_inner().expect("flushing memory")).expect("utf-8")
            }
            Format::Table => {
                let success: Vec<Vec<String>> =
                    std::iter::once(vec![dom.to_string(), "success".to_string()])
                        .chain(
                            (0..dom.size())
                                .map(|x| vec![dom.render_label(x), nf.success(x).to_string()]),
                        )
                        .collect();
                format!(
                    "observed point: {z} of {}\n\nsuccess\n{}\nevidence channel h\n{}\nresult channel g\n{}",
                    nf.evidence(),
                    render::align(&success),
                    render::kernel_table(nf.h().kernel()),
                    render::kernel_table(nf.g().kernel()),
                )
            }
        }
    }

    fn laws(&self, reports: &[LawReport]) -> String {
        let passed = reports.iter().all(LawReport::passed);
        match self.format {
            Format::Json => {
                let laws: Vec<Value> = reports
                    .iter()
                    .map(|r| {
                        json!({
                            "group": r.group,
                            "law": r.law,
                            "cases": r.cases,
                            "failures": r.failures,
                            "max_error": r.max_error,
                            "passed": r.passed(),
                            "first_failure": r.first_failure,
                        })
                    })
                    .collect();
                pretty(&json!({"passed": passed, "laws": laws}))
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["group", "law", "cases", "failures", "max_error", "status"])
                    .expect("writing to memory");
                for r in reports {
                    w.write_record([
                        r.group.to_string(),
                        r.law.clone(),
                        r.cases.to_string(),
                        r.failures.to_string(),
                        format!("{:e}", r.max_error),
                        if r.passed() { "pass" } else { "fail" }.to_string(),
                    ])
                    .expect("writing to memory");
                }
                String::from_utf8(w.into_inner().expect("flushing memory")).expect("utf-8")
            }
            Format::Table => {
                let mut s: String = reports.iter().map(|r| format!("{r}\n")).collect();
                let failed = reports.iter().filter(|r| !r.passed()).count();
                s.push_str(&format!("{} laws, {failed} failed\n", reports.len()));
                s
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}
