//! `qcoherence` command-line front end.
//!
//! Exit codes: 0 success, 1 validation or usage error, 2 I/O error,
//! 3 numerical contract violation.

pub mod config;
pub mod csv;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    detect_revivals_values, fit_envelope_values, fit_semilog_values, sign_class, uniform_grid, DecayFit, Field,
    FitMethod, RevivalEvent, SignClass,
};
use crate::coherence::{tuple_direct, tuple_probe};
use crate::reservoir::{apply_channels, h_closed, h_oracle, HForm};
use crate::states::density_of;
use crate::{Error, Result};

use config::{ConfigDraft, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::NumericalContract(_) | Error::StepUnderflow { .. } => EXIT_NUMERICAL,
        Error::Validation(_) | Error::IndexOutOfRange { .. } | Error::Fit(_) | Error::Parse(_) => EXIT_VALIDATION,
    }
}

#[derive(Debug, Parser)]
#[command(name = "qcoherence", version, about = "Coherence dynamics of qubit registers in Lorentzian reservoirs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config file (`key = value` lines).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in figure preset, e.g. fig2_nonmarkov.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Named state (w, wbar, ghz, wwbar) or amplitude file.
    #[arg(long)]
    state: Option<String>,
    /// Register size for named states.
    #[arg(long)]
    qubits: Option<usize>,
    /// Reservoir width, in units of the coupling.
    #[arg(long)]
    lambda: Option<f64>,
    /// Detuning, in units of the coupling.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Coupled qubits, e.g. 1,3.
    #[arg(long)]
    mask: Option<String>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// standard | paper-verbatim
    #[arg(long)]
    form: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

impl Common {
    fn draft(&self) -> Result<ConfigDraft> {
        let mut d = match (&self.config, &self.preset) {
            (Some(path), _) => ConfigDraft::load(path)?,
            (None, Some(name)) => ConfigDraft::from_preset(name)?,
            (None, None) => ConfigDraft::default(),
        };
        if let Some(s) = &self.state {
            d.set_state(s);
        }
        if let Some(q) = self.qubits {
            d.qubits = Some(q);
        }
        if let Some(l) = self.lambda {
            d.lambda = Some(l);
        }
        if let Some(x) = self.delta {
            d.delta = Some(x);
        }
        if let Some(m) = &self.mask {
            d.mask = Some(m.parse()?);
        }
        if let Some(t) = self.t_max {
            d.t_max = Some(t);
        }
        if let Some(n) = self.points {
            d.n_points = Some(n);
        }
        if let Some(f) = &self.form {
            d.h_form = Some(f.parse()?);
        }
        Ok(d)
    }

    fn resolve(&self) -> Result<ExperimentConfig> {
        self.draft()?.resolve()
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the configured experiment and write the CSV time series.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Fit an exponential decay rate to one column.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "C_total")]
        field: String,
        /// semilog | envelope
        #[arg(long, default_value = "semilog")]
        method: String,
        /// Time window as `start,end`; the whole series when omitted.
        #[arg(long)]
        window: Option<String>,
        /// Fit a previously written CSV instead of running a sweep.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// List coherence deaths and revivals.
    Revivals {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "C_total")]
        field: String,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
    },
    /// Seven-tuple of the (evolved) three-qubit state.
    Tuple {
        #[command(flatten)]
        common: Common,
        /// direct | probe
        #[arg(long, default_value = "direct")]
        mode: String,
        /// Evolution time before evaluation.
        #[arg(long, default_value_t = 0.0)]
        time: f64,
    },
    /// Sign behaviour of the monogamy of coherence over the sweep.
    Monogamy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Compare both closed forms of h(t) with the integrated memory-kernel equation.
    OracleCheck {
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut io::stdout().lock(), &mut io::stderr().lock())
}

pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    match out {
        Some(path) => {
            let mut f = create(path)?;
            writeln!(f, "{text}")?;
            f.flush()?;
        }
        None => writeln!(stdout, "{text}")?,
    }
    Ok(())
}

fn parse_window(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::Validation(format!("window must be `start,end`, got {text:?}"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

#[derive(Serialize)]
struct FitReport {
    field: String,
    #[serde(flatten)]
    fit: DecayFit,
}

#[derive(Serialize)]
struct RevivalReport {
    field: String,
    eps: f64,
    events: Vec<RevivalEvent>,
}

#[derive(Serialize)]
struct TupleReport {
    mode: &'static str,
    t: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    c12: f64,
    c13: f64,
    c23: f64,
    c123: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
}

#[derive(Serialize)]
struct MonogamyReport {
    sign: SignClass,
    initial: f64,
    min: f64,
    max: f64,
    tol: f64,
    n_samples: usize,
}

#[derive(Serialize)]
struct OracleReport {
    lambda: f64,
    delta: f64,
    t_max: f64,
    n_points: usize,
    max_abs_err_standard: f64,
    max_abs_err_verbatim: f64,
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate { common } => {
            let cfg = common.resolve()?;
            let series = cfg.sweep()?;
            let targets: Vec<PathBuf> = match &common.out {
                Some(p) => vec![p.clone()],
                None => cfg.outputs.clone(),
            };
            if targets.is_empty() {
                csv::write_csv(&series, &mut *stdout)?;
            }
            for path in &targets {
                csv::write_csv(&series, create(path)?)
                    .map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))?;
            }
            Ok(())
        }
        Command::Fit { common, field, method, window, input } => {
            let field: Field = field.parse()?;
            let method: FitMethod = method.parse()?;
            let (times, values) = match &input {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
                    let table = csv::Table::parse(&text)?;
                    (table.column("t")?, table.column(field.column())?)
                }
                None => {
                    let series = common.resolve()?.sweep()?;
                    (series.times(), series.values(field)?)
                }
            };
            let window = match window {
                Some(w) => parse_window(&w)?,
                None => (times.first().copied().unwrap_or(0.0), times.last().copied().unwrap_or(0.0)),
            };
            let fit = match method {
                FitMethod::Semilog => fit_semilog_values(&times, &values, window)?,
                FitMethod::Envelope => {
                    let (ts, vs): (Vec<f64>, Vec<f64>) =
                        times.iter().zip(&values).filter(|(&t, _)| t >= window.0 && t <= window.1).unzip();
                    fit_envelope_values(&ts, &vs)?
                }
            };
            emit_json(&FitReport { field: field.column().into(), fit }, common.out.as_deref(), stdout)
        }
        Command::Revivals { common, field, eps } => {
            let field: Field = field.parse()?;
            if !(eps > 0.0) {
                return Err(Error::Validation(format!("eps must be positive, got {eps}")));
            }
            let series = common.resolve()?.sweep()?;
            let events = detect_revivals_values(&series.times(), &series.values(field)?, eps);
            emit_json(&RevivalReport { field: field.column().into(), eps, events }, common.out.as_deref(), stdout)
        }
        Command::Tuple { common, mode, time } => {
            let cfg = common.resolve()?;
            if cfg.n_qubits() != 3 {
                return Err(Error::Validation(format!("the seven-tuple needs 3 qubits, state has {}", cfg.n_qubits())));
            }
            if !(time >= 0.0 && time.is_finite()) {
                return Err(Error::Validation(format!("time must be non-negative, got {time}")));
            }
            let h = h_closed(time, &cfg.params, cfg.h_form);
            let rho = apply_channels(&density_of(&cfg.initial), &cfg.mask, h)?;
            let (mode, tuple, residual) = match mode.trim().to_ascii_lowercase().as_str() {
                "direct" => ("direct", tuple_direct(&rho)?, None),
                "probe" => {
                    let t = tuple_probe(&rho)?;
                    ("probe", t, Some(t.residual))
                }
                other => return Err(Error::Validation(format!("unknown mode {other:?} (expected direct|probe)"))),
            };
            let report = TupleReport {
                mode,
                t: time,
                c1: tuple.c1,
                c2: tuple.c2,
                c3: tuple.c3,
                c12: tuple.c12,
                c13: tuple.c13,
                c23: tuple.c23,
                c123: tuple.c123,
                residual,
            };
            emit_json(&report, common.out.as_deref(), stdout)
        }
        Command::Monogamy { common, tol } => {
            let series = common.resolve()?.sweep()?;
            let m = series.values(Field::Monogamy)?;
            let report = MonogamyReport {
                sign: sign_class(&m, tol),
                initial: m[0],
                min: m.iter().copied().fold(f64::INFINITY, f64::min),
                max: m.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                tol,
                n_samples: m.len(),
            };
            emit_json(&report, common.out.as_deref(), stdout)
        }
        Command::OracleCheck { common } => {
            let cfg = common.resolve()?;
            let grid = uniform_grid(cfg.t_max, cfg.n_points)?;
            let reference = h_oracle(&cfg.params, &grid)?;
            let err = |form: HForm| {
                grid.iter()
                    .zip(&reference)
                    .map(|(&t, r)| (h_closed(t, &cfg.params, form) - r).norm())
                    .fold(0.0, f64::max)
            };
            let report = OracleReport {
                lambda: cfg.params.lambda(),
                delta: cfg.params.delta(),
                t_max: cfg.t_max,
                n_points: cfg.n_points,
                max_abs_err_standard: err(HForm::Standard),
                max_abs_err_verbatim: err(HForm::PaperVerbatim),
            };
            emit_json(&report, common.out.as_deref(), stdout)
        }
    }
}
