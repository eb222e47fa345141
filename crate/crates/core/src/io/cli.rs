//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 validation failure,
//! 3 inconclusive verdict or refused trace.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::certify::{subrep_flex_decision, Verdict};
use crate::error::Error;
use crate::io::builtin::builtin_example;
use crate::io::document::FrameworkDocument;
use crate::io::report;
use crate::trace::{path_validate, trace_flex_from, FlexPath, Monitor, TraceOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "symflex",
    version,
    about = "Symmetry-adapted rigidity analysis and flex tracing"
)]
pub struct Cli {
    /// Emit a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a framework document and check the symmetry equations.
    Validate { file: PathBuf },
    /// Ranks, block sizes and symmetry-extended counts.
    Analyze { file: PathBuf },
    /// Decide whether a symmetry-preserving finite flex exists.
    FlexDetect {
        file: PathBuf,
        /// 1-based irrep index; 1 is the fully symmetric one.
        #[arg(long, default_value_t = 1)]
        irrep: usize,
    },
    /// Trace the fully symmetric flex and write frames (.json or .csv).
    Trace {
        file: PathBuf,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 0.02)]
        step_size: f64,
        #[arg(long)]
        out: PathBuf,
        /// Trace without a finite-flex certificate.
        #[arg(long)]
        force: bool,
        /// Follow the path in the opposite direction.
        #[arg(long)]
        reverse: bool,
        /// Locate frames where four joints (1-based, comma separated) become
        /// coplanar; may be repeated.
        #[arg(long, value_name = "A,B,C,D")]
        coplanar: Vec<String>,
    },
    /// Write a built-in example document.
    Example {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Polygon half-size for double-suspension.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Invalid(_) => EXIT_USAGE,
            Error::NotCertified(_) => EXIT_INCONCLUSIVE,
            _ => EXIT_INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Parse `argv` (including the program name) and execute.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let json = cli.json;
    match execute(cli.command) {
        Ok(Outcome::Raw(text)) => {
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Ok(Outcome::Report(value, code)) => {
            let text = if json {
                serde_json::to_string_pretty(&value).expect("reports serialize") + "\n"
            } else {
                report::render_text(&value)
            };
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(f) => {
            if json {
                let v = json!({"error": f.message, "exit_code": f.code});
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&v).expect("serializes")
                );
            }
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path) -> Result<FrameworkDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(FrameworkDocument::parse(&text)?)
}

enum Outcome {
    Report(Value, i32),
    /// Text written verbatim (a document on standard output).
    Raw(String),
}

fn execute(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Validate { file } => {
            let doc = load(&file)?;
            let (v, validation) = report::validation_report(&doc)?;
            Ok(Outcome::Report(
                v,
                if validation.valid {
                    EXIT_OK
                } else {
                    EXIT_INVALID
                },
            ))
        }
        Command::Analyze { file } => {
            let sf = load(&file)?.symmetric_framework()?;
            Ok(Outcome::Report(report::analysis_report(&sf)?, EXIT_OK))
        }
        Command::FlexDetect { file, irrep } => {
            let doc = load(&file)?;
            let sf = doc.symmetric_framework()?;
            if irrep == 0 || irrep > sf.table().len() {
                return Err(Failure::usage(format!(
                    "--irrep must be in 1..={} for group {}",
                    sf.table().len(),
                    doc.group.kind().name()
                )));
            }
            let cert = subrep_flex_decision(&sf, irrep - 1, &doc.certify_policy())?;
            let code = if cert.verdict == Verdict::Inconclusive {
                EXIT_INCONCLUSIVE
            } else {
                EXIT_OK
            };
            Ok(Outcome::Report(report::certificate_report(&cert), code))
        }
        Command::Trace {
            file,
            steps,
            step_size,
            out,
            force,
            reverse,
            coplanar,
        } => {
            let format = frame_format(&out)?;
            let doc = load(&file)?;
            let sf = doc.symmetric_framework()?;
            let n = doc.graph.vertex_count();
            let monitors = coplanar
                .iter()
                .map(|s| parse_quad(s, n).map(|vertices| Monitor::Coplanarity { vertices }))
                .collect::<Result<Vec<_>, _>>()?;
            let opts = TraceOptions {
                steps,
                step_size,
                allow_uncertified: force,
                reverse,
                monitors,
                ..Default::default()
            };
            let path = trace_flex_from(&sf, &opts, &doc.certify_policy(), None).map_err(|e| match e {
                Error::NotCertified(v) => Failure {
                    code: EXIT_INCONCLUSIVE,
                    message: format!(
                        "refusing to trace: verdict is {v}, not a finite symmetry-preserving flex (use --force to override)"
                    ),
                },
                other => other.into(),
            })?;
            let rep = path_validate(&path.frames, &sf)?;
            write_frames(&out, format, &path)?;
            Ok(Outcome::Report(
                report::trace_report(&path, &rep, &out.display().to_string()),
                EXIT_OK,
            ))
        }
        Command::Example { name, seed, n, out } => {
            let doc = builtin_example(&name, seed, n)?;
            let text = doc.to_canonical_string();
            match out {
                Some(path) => {
                    std::fs::write(&path, &text).map_err(|e| {
                        Failure::usage(format!("cannot write {}: {e}", path.display()))
                    })?;
                    let v = json!({
                        "command": "example",
                        "name": name,
                        "seed": seed,
                        "output": path.display().to_string(),
                        "vertices": doc.graph.vertex_count(),
                        "edges": doc.graph.edge_count(),
                    });
                    Ok(Outcome::Report(v, EXIT_OK))
                }
                None => Ok(Outcome::Raw(text)),
            }
        }
    }
}

#[derive(Clone, Copy)]
enum FrameFormat {
    Json,
    Csv,
}

fn frame_format(path: &Path) -> Result<FrameFormat, Failure> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Ok(FrameFormat::Json),
        Some("csv") => Ok(FrameFormat::Csv),
        _ => Err(Failure::usage(format!(
            "frame output {} must end in .json or .csv",
            path.display()
        ))),
    }
}

fn parse_quad(text: &str, n: usize) -> Result<[usize; 4], Failure> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| {
            Failure::usage(format!(
                "--coplanar expects four vertex numbers, got `{text}`"
            ))
        })?;
    match parts.as_slice() {
        &[a, b, c, d] if [a, b, c, d].iter().all(|&v| v >= 1 && v <= n) => {
            Ok([a - 1, b - 1, c - 1, d - 1])
        }
        _ => Err(Failure::usage(format!(
            "--coplanar expects four vertices in 1..={n}, got `{text}`"
        ))),
    }
}

fn write_frames(path: &Path, format: FrameFormat, fp: &FlexPath) -> Result<(), Failure> {
    let io_err =
        |e: &dyn std::fmt::Display| Failure::usage(format!("cannot write {}: {e}", path.display()));
    match format {
        FrameFormat::Json => {
            let frames: Vec<Vec<f64>> = fp
                .frames
                .iter()
                .map(|f| f.flat().iter().copied().collect())
                .collect();
            let v = json!({
                "dimension": fp.frames[0].dim(),
                "vertices": fp.frames[0].point_count(),
                "step_size": fp.step_size,
                "frames": frames,
            });
            let text = serde_json::to_string_pretty(&v).expect("frames serialize") + "\n";
            std::fs::write(path, text).map_err(|e| io_err(&e))
        }
        FrameFormat::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(|e| io_err(&e))?;
            let d = fp.frames[0].dim();
            let axes = ["x", "y", "z"];
            let mut header = vec!["frame".to_string()];
            for v in 0..fp.frames[0].point_count() {
                for a in axes.iter().take(d) {
                    header.push(format!("{a}{}", v + 1));
                }
            }
            w.write_record(&header).map_err(|e| io_err(&e))?;
            for (i, f) in fp.frames.iter().enumerate() {
                let mut row = vec![i.to_string()];
                row.extend(f.flat().iter().map(|x| format!("{x:.16e}")));
                w.write_record(&row).map_err(|e| io_err(&e))?;
            }
            w.flush().map_err(|e| io_err(&e))
        }
    }
}
