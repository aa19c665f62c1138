//! Batch driver behind the `nkgeo` binary.
//!
//! Each command produces one report, JSON by default or CSV with
//! `--format csv`, and an exit code from [`Exit`]. Reports carry no
//! timestamps or paths, so a fixed `--seed` gives identical bytes.

mod args;
mod commands;
pub mod potentials;

use std::ffi::OsString;
use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

pub use args::{
    CaseArg, Cli, Command, Common, ExamplesArgs, FamilyArg, Format, IsoArgs, PainleveArgs,
    VerifyArgs,
};
pub use commands::{cmd_examples, cmd_isomonodromy, cmd_painleve, cmd_verify};

use crate::expr::EvalError;
use crate::geometry::GeometryError;
use crate::isomonodromy::IsoError;
use crate::nullkahler::NkError;
use crate::ode::OdeError;
use crate::painleve::PainleveError;
use crate::pde::PdeError;
use crate::report::ResidualReport;
use crate::sl2::Sl2Error;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(i32)]
pub enum Exit {
    Pass = 0,
    CheckFailed = 1,
    Usage = 2,
    Sampling = 3,
    BlowUp = 4,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Sampling(String),
    #[error("{message}")]
    BlowUp { t: f64, message: String },
    /// A check could not be carried out.
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Usage(_) | CliError::Io(_) => Exit::Usage,
            CliError::Sampling(_) => Exit::Sampling,
            CliError::BlowUp { .. } => Exit::BlowUp,
            CliError::Failed(_) => Exit::CheckFailed,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Sampling(_) => "sampling",
            CliError::BlowUp { .. } => "blow_up",
            CliError::Failed(_) => "failed",
            CliError::Io(_) => "io",
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::Sampling(_)
            | GeometryError::DegenerateAt { .. }
            | GeometryError::Eval(EvalError::Singular { .. }) => CliError::Sampling(e.to_string()),
            GeometryError::Eval(EvalError::Unbound(_)) => CliError::Usage(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<crate::expr::ZeroTestError> for CliError {
    fn from(e: crate::expr::ZeroTestError) -> Self {
        GeometryError::from(e).into()
    }
}

impl From<OdeError> for CliError {
    fn from(e: OdeError) -> Self {
        CliError::BlowUp { t: e.time(), message: e.to_string() }
    }
}

impl From<NkError> for CliError {
    fn from(e: NkError) -> Self {
        match e {
            NkError::Geometry(g) => g.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        match e {
            PdeError::Nk(n) => n.into(),
            PdeError::Geometry(g) => g.into(),
            PdeError::NotIntegrable(_) => CliError::Failed(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<Sl2Error> for CliError {
    fn from(e: Sl2Error) -> Self {
        match e {
            Sl2Error::Geometry(g) => g.into(),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<IsoError> for CliError {
    fn from(e: IsoError) -> Self {
        match e {
            IsoError::Ode(o) => o.into(),
            IsoError::Geometry(g) => g.into(),
            IsoError::Borderline(_) => CliError::Failed(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<PainleveError> for CliError {
    fn from(e: PainleveError) -> Self {
        match e {
            PainleveError::SingularLocus(_) => CliError::Sampling(e.to_string()),
            PainleveError::Sl2(s) => s.into(),
            PainleveError::Iso(i) => i.into(),
            PainleveError::Geometry(g) => g.into(),
        }
    }
}

/// Rows for `--format csv`.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write_csv(&self, w: impl Write) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        let fail = |e: csv::Error| CliError::Failed(e.to_string());
        out.write_record(&self.header).map_err(fail)?;
        for r in &self.rows {
            out.write_record(r).map_err(fail)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn csv_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

/// Report envelope shared by all commands; see `report.schema.json`.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub pass: bool,
    pub seed: u64,
    pub config: Value,
    pub checks: Vec<ResidualReport>,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub details: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl Report {
    pub fn new(command: &'static str, seed: u64, config: &impl Serialize) -> Report {
        Report {
            command,
            pass: true,
            seed,
            config: serde_json::to_value(config).unwrap_or(Value::Null),
            checks: Vec::new(),
            details: Map::new(),
            error: None,
            table: None,
        }
    }

    pub fn push(&mut self, check: ResidualReport) {
        self.pass &= check.pass;
        self.checks.push(check.compact());
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn exit(&self) -> Exit {
        if self.pass {
            Exit::Pass
        } else {
            Exit::CheckFailed
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    fn checks_table(&self) -> Table {
        Table {
            header: ["system", "pass", "symbolic_zero", "max_residual", "tolerance", "points"]
                .map(String::from)
                .to_vec(),
            rows: self
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        c.pass.to_string(),
                        c.symbolic_zero.to_string(),
                        csv_num(c.max_residual),
                        csv_num(c.tolerance),
                        c.points.to_string(),
                    ]
                })
                .collect(),
        }
    }

    pub fn write(&self, format: Format, mut w: impl Write) -> Result<(), CliError> {
        match format {
            Format::Json => w.write_all(self.to_json().as_bytes())?,
            Format::Csv => match &self.table {
                Some(t) => t.write_csv(w)?,
                None => self.checks_table().write_csv(w)?,
            },
        }
        Ok(())
    }
}

fn name_and_common(cmd: &Command) -> (&'static str, &Common) {
    match cmd {
        Command::Verify(a) => ("verify", &a.common),
        Command::Painleve(a) => ("painleve", &a.common),
        Command::Isomonodromy(a) => ("isomonodromy", &a.common),
        Command::Examples(a) => ("examples", &a.common),
    }
}

fn config_of(cmd: &Command) -> Value {
    match cmd {
        Command::Verify(a) => serde_json::to_value(a),
        Command::Painleve(a) => serde_json::to_value(a),
        Command::Isomonodromy(a) => serde_json::to_value(a),
        Command::Examples(a) => serde_json::to_value(a),
    }
    .unwrap_or(Value::Null)
}

/// Run an already parsed command, returning the report (also on failure).
pub fn execute(cmd: &Command) -> (Report, Exit) {
    let result = match cmd {
        Command::Verify(a) => cmd_verify(a),
        Command::Painleve(a) => cmd_painleve(a),
        Command::Isomonodromy(a) => cmd_isomonodromy(a),
        Command::Examples(a) => cmd_examples(a),
    };
    match result {
        Ok(r) => {
            let code = r.exit();
            (r, code)
        }
        Err(e) => {
            let (name, common) = name_and_common(cmd);
            let mut r = Report::new(name, common.seed, &Value::Null);
            r.config = config_of(cmd);
            r.pass = false;
            let t = match &e {
                CliError::BlowUp { t, .. } => Some(*t),
                _ => None,
            };
            r.error = Some(ErrorInfo { kind: e.kind(), message: e.to_string(), t });
            (r, e.exit())
        }
    }
}

/// Parse `args` (including the program name), run, and write the report to
/// `--out` or `stdout`. Diagnostics go to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    Exit::Pass.code()
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    Exit::Usage.code()
                }
            };
        }
    };
    let (report, code) = execute(&cli.command);
    if let Some(err) = &report.error {
        let _ = writeln!(stderr, "nkgeo: {}: {}", err.kind, err.message);
    }
    let (_, common) = name_and_common(&cli.command);
    let written = match &common.out {
        Some(path) => std::fs::File::create(path)
            .map_err(CliError::from)
            .and_then(|f| report.write(common.format, std::io::BufWriter::new(f))),
        None => report.write(common.format, &mut *stdout),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "nkgeo: cannot write report: {e}");
        return Exit::Usage.code();
    }
    code.code()
}
