//! The `hzeta` command line. Every command writes one JSON document.

use std::ffi::OsString;
use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::geodesic::{classify, Spectrum};
use crate::io::{parse_complex, parse_matrix, parse_spectrum, to_json, Format, IoError, JsonComplex};
use crate::lie::{cartan_split, iwasawa_split, LieElement, Mat4};
use crate::multiset::RealMultiset;
use crate::recovery::{recover_from_zero_lines, recover_spectrum, smo_check, RecoveryReport, Status};
use crate::zeros::{zero_multiset, ZeroWindow};
use crate::zeta::{log_derivative, log_zeta_tau, TauIndex, Truncation};
use crate::Error;

#[derive(Parser, Debug)]
#[command(name = "hzeta", version, about = "Zeta products and spectral recovery for SO(3,1)° length-holonomy spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cartan and Iwasawa parts of an so(3,1) matrix.
    Decompose { matrix: String },
    /// Length and holonomy of a loxodromic SO(3,1)° matrix.
    Classify { matrix: String },
    /// Truncated Z_τ(s).
    Zeta {
        spectrum: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Logarithmic derivative of Z_τ at s.
    Psi {
        spectrum: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Windowed zero multiset.
    Zeros {
        spectrum: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Recover lengths and ratios from a spectrum or from zero-line data.
    Recover {
        input: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Compare two spectra through their zero data.
    Compare {
        first: String,
        second: String,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Highest weight m of τ.
    #[arg(long, default_value_t = 0)]
    tau: u32,
    /// Product truncation (bound on m₁ and m₂; on m₁ + m₂ for zeros).
    #[arg(long, default_value_t = 30)]
    maxm: u32,
    /// Bound on |Im s| for zero windows [default: 20π / min length].
    #[arg(long)]
    imbound: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Spectrum file format [default: from the file extension].
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Json,
}

/// Resolved numeric settings for one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub tau_m: u32,
    pub max_m: u32,
    pub im_bound: f64,
    pub tol: f64,
    pub s: Complex64,
}

impl RunConfig {
    fn window(&self) -> Result<ZeroWindow, Error> {
        Ok(ZeroWindow::new(self.max_m, self.im_bound)?)
    }
}

/// Default window: `20π / min length`, or `20π` for an empty input.
pub fn default_im_bound(min_length: Option<f64>) -> f64 {
    20.0 * PI / min_length.unwrap_or(1.0)
}

/// What a CLI invocation produced.
#[derive(Clone, Debug, PartialEq)]
pub struct CliOutput {
    pub exit_code: i32,
    pub stdout: String,
    /// Diagnostics for standard error.
    pub stderr: Vec<String>,
}

struct Session<'a> {
    stdin: Option<&'a str>,
    warnings: Vec<String>,
}

impl Session<'_> {
    fn read(&mut self, source: &str) -> Result<String, Error> {
        if source == "-" {
            return match self.stdin {
                Some(text) => Ok(text.to_owned()),
                None => {
                    let mut text = String::new();
                    std::io::stdin().read_to_string(&mut text).map_err(IoError::from)?;
                    Ok(text)
                }
            };
        }
        std::fs::read_to_string(source).map_err(|e| Error::Io(IoError::Io(format!("{source}: {e}"))))
    }

    fn spectrum(&mut self, source: &str, format: Option<FormatArg>) -> Result<Spectrum, Error> {
        let text = self.read(source)?;
        let format = match format {
            Some(FormatArg::Csv) => Format::Csv,
            Some(FormatArg::Json) => Format::Json,
            None => Format::from_path(Path::new(source)),
        };
        let parsed = parse_spectrum(&text, format)?;
        self.warnings.extend(parsed.warnings.into_iter().map(|w| format!("{source}: {w}")));
        Ok(parsed.spectrum)
    }

    fn matrix(&mut self, source: &str) -> Result<Mat4, Error> {
        Ok(parse_matrix(&self.read(source)?)?)
    }
}

fn config(opts: &Opts, s: Option<&str>, min_length: Option<f64>) -> Result<RunConfig, Error> {
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::Usage(format!("--tol must be positive, got {}", opts.tol)));
    }
    let im_bound = opts.imbound.unwrap_or_else(|| default_im_bound(min_length));
    if !(im_bound.is_finite() && im_bound > 0.0) {
        return Err(Error::Usage(format!("--imbound must be positive, got {im_bound}")));
    }
    let s = match s {
        Some(text) => parse_complex(text).map_err(|_| Error::Usage(format!("invalid value for --s: `{text}`")))?,
        None => Complex64::new(0.0, 0.0),
    };
    Ok(RunConfig { tau_m: opts.tau, max_m: opts.maxm, im_bound, tol: opts.tol, s })
}

fn rows(m: &Mat4) -> [[f64; 4]; 4] {
    m.rows()
}

#[derive(Serialize)]
struct ZeroEntry {
    re: f64,
    im: f64,
    multiplicity: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZeroData {
    zero_line_m0: RealMultiset,
    #[serde(default)]
    zero_line_m1: RealMultiset,
}

fn report_json(cfg: &RunConfig, report: &RecoveryReport) -> serde_json::Value {
    json!({ "im_bound": cfg.im_bound, "tol": cfg.tol, "report": report })
}

fn execute(cli: Cli, session: &mut Session) -> Result<serde_json::Value, Error> {
    match cli.command {
        Command::Decompose { matrix } => {
            let x = LieElement::new(session.matrix(&matrix)?)?;
            let (k, p) = cartan_split(&x);
            let iw = iwasawa_split(&x);
            Ok(json!({
                "cartan": { "k": rows(k.matrix()), "p": rows(p.matrix()) },
                "iwasawa": {
                    "k": rows(iw.k.matrix()),
                    "a": rows(iw.a_p.matrix()),
                    "n": rows(iw.n.matrix()),
                    "alpha": iw.alpha,
                    "n_params": [iw.n_params.0, iw.n_params.1],
                },
            }))
        }
        Command::Classify { matrix } => {
            let (length, holonomy) = classify(&session.matrix(&matrix)?)?;
            Ok(json!({ "length": length, "holonomy": holonomy }))
        }
        Command::Zeta { spectrum, s, opts } => {
            let spec = session.spectrum(&spectrum, opts.format)?;
            let cfg = config(&opts, Some(&s), spec.min_length())?;
            let log = log_zeta_tau(&spec, TauIndex::new(cfg.tau_m), cfg.s, Truncation::new(cfg.max_m))?;
            Ok(json!({
                "s": JsonComplex::from(cfg.s),
                "tau": cfg.tau_m,
                "max_m": cfg.max_m,
                "value": JsonComplex::from(log.value.exp()),
                "log_value": JsonComplex::from(log.value),
                "convergent": log.convergent,
            }))
        }
        Command::Psi { spectrum, s, opts } => {
            let spec = session.spectrum(&spectrum, opts.format)?;
            let cfg = config(&opts, Some(&s), spec.min_length())?;
            let d = log_derivative(&spec, TauIndex::new(cfg.tau_m), cfg.s, Truncation::new(cfg.max_m))?;
            Ok(json!({
                "s": JsonComplex::from(cfg.s),
                "tau": cfg.tau_m,
                "max_m": cfg.max_m,
                "value": JsonComplex::from(d.value),
                "convergent": d.convergent,
            }))
        }
        Command::Zeros { spectrum, opts } => {
            let spec = session.spectrum(&spectrum, opts.format)?;
            let cfg = config(&opts, None, spec.min_length())?;
            let zeros = zero_multiset(&spec, TauIndex::new(cfg.tau_m), cfg.window()?);
            let entries: Vec<ZeroEntry> = zeros
                .entries()
                .iter()
                .map(|&(z, multiplicity)| ZeroEntry { re: z.re, im: z.im, multiplicity })
                .collect();
            Ok(json!({
                "tau": cfg.tau_m,
                "max_m": cfg.max_m,
                "im_bound": cfg.im_bound,
                "total": zeros.total(),
                "zeros": entries,
            }))
        }
        Command::Recover { input, opts } => {
            let text = session.read(&input)?;
            if text.trim_start().starts_with('{') {
                let data: ZeroData = serde_json::from_str(&text)
                    .map_err(|e| IoError::Parse { line: e.line() as u64, message: e.to_string() })?;
                if opts.imbound.is_none() {
                    return Err(Error::Usage("--imbound is required for zero-line input".into()));
                }
                let cfg = config(&opts, None, None)?;
                let (lengths, ratios) =
                    recover_from_zero_lines(&data.zero_line_m0, &data.zero_line_m1, cfg.window()?, cfg.tol)?;
                let report = RecoveryReport {
                    status: Status::Exact,
                    residual: 0.0,
                    recovered_lengths: lengths,
                    recovered_ratios: ratios,
                    counterpart_lengths: None,
                    counterpart_ratios: None,
                    witness: None,
                    diagnostics: Vec::new(),
                };
                Ok(report_json(&cfg, &report))
            } else {
                let spec = session.spectrum(&input, opts.format)?;
                let cfg = config(&opts, None, spec.min_length())?;
                Ok(report_json(&cfg, &recover_spectrum(&spec, cfg.window()?, cfg.tol)))
            }
        }
        Command::Compare { first, second, opts } => {
            let a = session.spectrum(&first, opts.format)?;
            let b = session.spectrum(&second, opts.format)?;
            let min_length = a.min_length().into_iter().chain(b.min_length()).min_by(f64::total_cmp);
            let cfg = config(&opts, None, min_length)?;
            let report = smo_check(&a, &b, TauIndex::new(cfg.tau_m), cfg.window()?, cfg.tol);
            Ok(report_json(&cfg, &report))
        }
    }
}

fn error_json(e: &Error) -> String {
    to_json(&json!({ "error": { "code": e.code(), "message": e.to_string() } }))
}

/// Runs the CLI with `stdin` standing in for standard input.
pub fn run_cli_with_stdin<I, T>(argv: I, stdin: Option<&str>) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return CliOutput { exit_code: 0, stdout: e.to_string(), stderr: Vec::new() };
            }
            let err = Error::Usage(e.kind().to_string());
            return CliOutput { exit_code: err.exit_code(), stdout: error_json(&err), stderr: vec![e.to_string()] };
        }
    };
    let mut session = Session { stdin, warnings: Vec::new() };
    match execute(cli, &mut session) {
        Ok(value) => CliOutput { exit_code: 0, stdout: to_json(&value), stderr: session.warnings },
        Err(e) => CliOutput { exit_code: e.exit_code(), stdout: error_json(&e), stderr: session.warnings },
    }
}

/// Runs the CLI, reading `-` inputs from standard input.
pub fn run_cli<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_cli_with_stdin(argv, None)
}
