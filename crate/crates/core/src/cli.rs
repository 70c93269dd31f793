//! Command-line front end: single-point evaluation, table regeneration and path export.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cnum::ComplexVal;
use crate::direct::{a_direct, a_direct_at, SeriesPoint, MAX_DIRECT_N};
use crate::error::Error;
use crate::saddles::{contributory_range, heuristic_m, RangeMethod};
use crate::sdexp::{assemble, assemble_traced, omega, EvaluationReport, MAX_J};
use crate::tables::{saddle_table, value_table, SaddleCell, ValueRow};
use crate::tracer::{classify, Classification};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "zeta-saddle",
    version,
    about = "Saddle-point asymptotics of the A(n, s) terms of a globally convergent zeta series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate A(n, s) at one point.
    Eval(EvalArgs),
    /// Regenerate one of the reference tables.
    Table(TableArgs),
    /// Export descent paths, saddle magnitudes or decay exponents as CSV.
    Trace(TraceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Direct,
    Asymptotic,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum What {
    Paths,
    Ihat,
    Omega,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Index of the series term.
    #[arg(long)]
    pub n: u32,
    /// Scale of the imaginary part, t = a·n.
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Real part of s.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub sigma: f64,
    /// Highest expansion order j.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    pub mode: Mode,
    /// Take the contributory range and root branches from traced descent paths.
    #[arg(long)]
    pub trace_classify: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Real part of s for direct mode, overriding sigma.
    #[arg(long, allow_negative_numbers = true)]
    pub s_real: Option<f64>,
    /// Imaginary part of s for direct mode, overriding a·n.
    #[arg(long, allow_negative_numbers = true)]
    pub s_imag: Option<f64>,
    /// Decimal digits for the multiprecision direct sum.
    #[arg(long)]
    pub precision: Option<u32>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
    pub id: u8,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Index of the series term.
    #[arg(long)]
    pub n: u32,
    /// Scale of the imaginary part, t = a·n.
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Real part of s.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub sigma: f64,
    #[arg(long, value_enum)]
    pub what: What,
}

/// Failure of a command, carrying its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numerical(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(msg) => CliError::Usage(msg),
            other => CliError::Numerical(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Numerical(Error::Tracer(format!("csv output: {e}")))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numerical(Error::Tracer(format!("json output: {e}")))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs a parsed command and returns what goes to stdout.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Eval(args) => cmd_eval(&args),
        Command::Table(args) => cmd_table(args.id, args.format),
        Command::Trace(args) => cmd_trace(&args),
    }
}

/// Result of a direct-only evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectReport {
    pub n: u32,
    pub s: ComplexVal,
    pub precision_digits: Option<u32>,
    pub direct: ComplexVal,
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult<String> {
    if args.order > MAX_J {
        return Err(CliError::Usage(format!("--order must be at most {MAX_J}")));
    }
    let overridden = args.s_real.is_some() || args.s_imag.is_some();
    if args.mode == Mode::Direct {
        let s = if overridden {
            ComplexVal::new(args.s_real.unwrap_or(args.sigma), args.s_imag.unwrap_or(0.0))
        } else {
            let p = point(args.n, args.a, args.sigma)?;
            p.s()
        };
        let direct = a_direct_at(args.n, s, args.precision)?;
        let report = DirectReport {
            n: args.n,
            s,
            precision_digits: args.precision,
            direct,
        };
        return render_direct(&report, args.format);
    }
    if overridden {
        return Err(CliError::Usage("--s-real/--s-imag apply to --mode direct only".into()));
    }
    let p = point(args.n, args.a, args.sigma)?;
    let mut report = if args.trace_classify {
        let c = classify_point(&p)?;
        assemble_traced(&p, &c, args.order)?
    } else {
        let range = contributory_range(&p, RangeMethod::Heuristic)?;
        assemble(&p, &range, args.order)?
    };
    match args.mode {
        Mode::Asymptotic => report = report.without_direct(),
        _ => {
            if let Some(digits) = args.precision {
                let d = a_direct(&p, Some(digits))?;
                let e = (report.asymptotic - d).norm();
                report.direct = Some(d);
                report.abs_err = Some(e);
                report.rel_err = Some(e / d.norm());
            } else if report.direct.is_none() {
                report
                    .flags
                    .push(format!("direct_skipped: n exceeds {MAX_DIRECT_N}; pass --precision"));
            }
        }
    }
    render_report(&report, args.format)
}

fn point(n: u32, a: Option<f64>, sigma: f64) -> CliResult<SeriesPoint> {
    if n == 0 {
        return Err(CliError::Usage(
            "n = 0 makes t = a·n vanish; use --mode direct with --s-real/--s-imag".into(),
        ));
    }
    let a = a.ok_or_else(|| CliError::Usage("--a is required unless s is given explicitly".into()))?;
    Ok(SeriesPoint::new(n, a, sigma)?)
}

fn classify_point(p: &SeriesPoint) -> CliResult<Classification> {
    Ok(classify(p, heuristic_m(p) + 4)?)
}

fn fmt_c(z: ComplexVal) -> String {
    format!("{:+.10e}{:+.10e}i", z.re, z.im)
}

fn csv_string<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Numerical(Error::Tracer(e.to_string())))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn render_direct(r: &DirectReport, format: Format) -> CliResult<String> {
    #[derive(Serialize)]
    struct Row {
        n: u32,
        s_re: f64,
        s_im: f64,
        precision_digits: Option<u32>,
        direct_re: f64,
        direct_im: f64,
    }
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(r)? + "\n",
        Format::Csv => csv_string(&[Row {
            n: r.n,
            s_re: r.s.re,
            s_im: r.s.im,
            precision_digits: r.precision_digits,
            direct_re: r.direct.re,
            direct_im: r.direct.im,
        }])?,
        Format::Text => format!("n = {}, s = {}\nA(n, s) = {}\n", r.n, fmt_c(r.s), fmt_c(r.direct)),
    })
}

fn render_report(r: &EvaluationReport, format: Format) -> CliResult<String> {
    #[derive(Serialize)]
    struct Row {
        n: u32,
        a: f64,
        sigma: f64,
        j_max: usize,
        k_star: usize,
        m: usize,
        method: RangeMethod,
        direct_re: Option<f64>,
        direct_im: Option<f64>,
        asymptotic_re: f64,
        asymptotic_im: f64,
        abs_err: Option<f64>,
        rel_err: Option<f64>,
        flags: String,
    }
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(r)? + "\n",
        Format::Csv => csv_string(&[Row {
            n: r.inputs.n,
            a: r.inputs.a,
            sigma: r.inputs.sigma,
            j_max: r.inputs.j_max,
            k_star: r.k_star,
            m: r.m,
            method: r.method,
            direct_re: r.direct.map(|d| d.re),
            direct_im: r.direct.map(|d| d.im),
            asymptotic_re: r.asymptotic.re,
            asymptotic_im: r.asymptotic.im,
            abs_err: r.abs_err,
            rel_err: r.rel_err,
            flags: r.flags.join(";"),
        }])?,
        Format::Text => {
            let mut out = String::new();
            let i = &r.inputs;
            let _ = writeln!(out, "n = {}, a = {}, sigma = {}, j <= {}", i.n, i.a, i.sigma, i.j_max);
            let _ = writeln!(out, "saddles k = {}..={} ({:?})", r.k_star, r.m, r.method);
            let _ = writeln!(out, "asymptotic = {}", fmt_c(r.asymptotic));
            if let (Some(d), Some(rel)) = (r.direct, r.rel_err) {
                let _ = writeln!(out, "direct     = {}", fmt_c(d));
                let _ = writeln!(out, "rel_err    = {rel:.3e}");
            }
            for t in &r.per_saddle {
                let _ = writeln!(out, "  k = {:3}  i_hat = {:.6e}  omega = {:.6}", t.k, t.i_hat, t.omega);
            }
            for f in &r.flags {
                let _ = writeln!(out, "flag: {f}");
            }
            out
        }
    })
}

/// Serialized saddle table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleTableOutput {
    pub table: u8,
    pub notes: Vec<String>,
    pub cells: Vec<SaddleCell>,
}

/// Serialized value table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTableOutput {
    pub table: u8,
    pub rows: Vec<ValueRow>,
}

pub fn cmd_table(id: u8, format: Format) -> CliResult<String> {
    if id == 1 {
        let (cells, notes) = saddle_table()?;
        return render_saddle_table(SaddleTableOutput { table: 1, notes, cells }, format);
    }
    let rows = value_table(id)?;
    render_value_table(ValueTableOutput { table: id, rows }, format)
}

fn render_saddle_table(t: SaddleTableOutput, format: Format) -> CliResult<String> {
    #[derive(Serialize)]
    struct Row<'a> {
        n: u32,
        a: f64,
        k: usize,
        re: f64,
        im: f64,
        residual: f64,
        printed: &'a str,
        matches: bool,
        annotation: &'a str,
    }
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&t)? + "\n",
        Format::Csv => csv_string(
            &t.cells
                .iter()
                .map(|c| Row {
                    n: c.n,
                    a: c.a,
                    k: c.k,
                    re: c.re,
                    im: c.im,
                    residual: c.residual,
                    printed: &c.printed,
                    matches: c.matches,
                    annotation: c.annotation.as_deref().unwrap_or(""),
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Text => {
            let mut out = String::new();
            let cols: Vec<(u32, f64)> = {
                let mut v: Vec<(u32, f64)> = Vec::new();
                for c in &t.cells {
                    if !v.iter().any(|&(n, a)| n == c.n && a == c.a) {
                        v.push((c.n, c.a));
                    }
                }
                v
            };
            let _ = write!(out, "{:>3}", "k");
            for (n, a) in &cols {
                let _ = write!(out, "  {:>24}", format!("n = {n}, a = {a}"));
            }
            out.push('\n');
            let k_max = t.cells.iter().map(|c| c.k).max().unwrap_or(0);
            for k in 1..=k_max {
                let _ = write!(out, "{k:>3}");
                for &(n, a) in &cols {
                    if let Some(c) = t.cells.iter().find(|c| c.n == n && c.a == a && c.k == k) {
                        let _ = write!(out, "  {:>24}", format!("{:+.6}{:+.6}i", c.re, c.im));
                    }
                }
                out.push('\n');
            }
            for note in &t.notes {
                let _ = writeln!(out, "note: {note}");
            }
            for c in t.cells.iter().filter(|c| c.annotation.is_some()) {
                let _ = writeln!(
                    out,
                    "n = {}, a = {}, k = {}: {}",
                    c.n,
                    c.a,
                    c.k,
                    c.annotation.as_deref().unwrap_or("")
                );
            }
            out
        }
    })
}

fn render_value_table(t: ValueTableOutput, format: Format) -> CliResult<String> {
    #[derive(Serialize)]
    struct Row<'a> {
        param: f64,
        n: u32,
        a: f64,
        k_star: usize,
        m: usize,
        direct_re: f64,
        direct_im: f64,
        asymptotic_re: f64,
        asymptotic_im: f64,
        rel_err: f64,
        printed_direct: &'a str,
        printed_asymptotic: &'a str,
        direct_matches: bool,
        asymptotic_matches: bool,
        annotations: String,
    }
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&t)? + "\n",
        Format::Csv => csv_string(
            &t.rows
                .iter()
                .map(|r| Row {
                    param: r.param,
                    n: r.n,
                    a: r.a,
                    k_star: r.k_star,
                    m: r.m,
                    direct_re: r.direct.re,
                    direct_im: r.direct.im,
                    asymptotic_re: r.asymptotic.re,
                    asymptotic_im: r.asymptotic.im,
                    rel_err: r.rel_err,
                    printed_direct: &r.printed_direct,
                    printed_asymptotic: &r.printed_asymptotic,
                    direct_matches: r.direct_matches,
                    asymptotic_matches: r.asymptotic_matches,
                    annotations: r.annotations.join(";"),
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Text => {
            let mut out = String::new();
            let head = if t.table == 4 { "N" } else { "a" };
            let _ = writeln!(
                out,
                "{head:>5} {:>3}  {:>32}  {:>32}  {:>9}",
                "m", "A(n,s)", "asymptotic", "rel_err"
            );
            for r in &t.rows {
                let _ = writeln!(
                    out,
                    "{:>5.2} {:>3}  {:>32}  {:>32}  {:>9.2e}",
                    r.param,
                    r.m,
                    format!("{:+.10}{:+.10}i", r.direct.re, r.direct.im),
                    format!("{:+.10}{:+.10}i", r.asymptotic.re, r.asymptotic.im),
                    r.rel_err
                );
            }
            for r in &t.rows {
                for note in r.annotations.iter().chain(r.flags.iter()) {
                    let _ = writeln!(out, "{head} = {}: {note}", r.param);
                }
            }
            out
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub k: usize,
    pub path: usize,
    pub endpoint: String,
    pub tau: f64,
    pub re_w: f64,
    pub im_w: f64,
    pub re_psi: f64,
    pub im_psi_continued: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IhatRow {
    pub k: usize,
    pub log10_i_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaRow {
    pub k: usize,
    pub omega: f64,
}

pub fn cmd_trace(args: &TraceArgs) -> CliResult<String> {
    let p = point(args.n, Some(args.a), args.sigma)?;
    let c = classify_point(&p)?;
    match args.what {
        What::Paths => {
            let mut rows = Vec::new();
            for k in c.range.indices() {
                for (i, path) in c.paths[&k].iter().enumerate() {
                    let endpoint = match serde_json::to_value(path.endpoint)? {
                        serde_json::Value::Object(o) => {
                            let kind = o.get("kind").and_then(|v| v.as_str()).unwrap_or("").to_string();
                            match o.get("index") {
                                Some(idx) => format!("{kind}({idx})"),
                                None => kind,
                            }
                        }
                        other => other.to_string(),
                    };
                    rows.extend(path.points.iter().map(|q| PathRow {
                        k,
                        path: i,
                        endpoint: endpoint.clone(),
                        tau: q.tau,
                        re_w: q.w.re,
                        im_w: q.w.im,
                        re_psi: q.re_psi,
                        im_psi_continued: q.im_psi,
                    }));
                }
            }
            csv_string(&rows)
        }
        What::Ihat => {
            let report = assemble_traced(&p, &c, MAX_J)?;
            let rows: Vec<IhatRow> = report
                .per_saddle
                .iter()
                .map(|t| IhatRow {
                    k: t.k,
                    log10_i_hat: t.i_hat.log10(),
                })
                .collect();
            csv_string(&rows)
        }
        What::Omega => {
            let rows = c
                .saddles
                .iter()
                .filter(|s| c.range.indices().contains(&s.k))
                .map(|s| {
                    Ok(OmegaRow {
                        k: s.k,
                        omega: omega(s, &p, true)?,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            csv_string(&rows)
        }
    }
}
