//! Command-line front end. Exit codes: 0 success, 1 validation or content
//! error, 2 IO or format error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytics::{analyze, AnalysisConfig, FactorScore};
use crate::dsl::{parse_document, Diagnostic};
use crate::emit::{export_dot, export_matrix_csv, export_report_csv, parse_sums_csv, render_scatter_svg, PlotLayout, Ranks};
use crate::matrix::{build_matrix, sums, RelationshipMatrix};
use crate::model::ChainSet;
use crate::rapex::{import_rapex, parse_alert_records, FieldMap};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONTENT: u8 = 1;
pub const EXIT_IO: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "keyfactors", version, about = "Failure-chain aggregation and key-factor identification")]
pub struct Cli {
    /// Treat warnings as errors.
    #[arg(long, global = true)]
    pub strict: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check chain documents and print diagnostics.
    Validate {
        files: Vec<PathBuf>,
    },
    /// Write the relationship matrix as CSV.
    Matrix {
        files: Vec<PathBuf>,
        /// Output file; stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the per-factor report (sums, normalized values, ranks, regions, key flags) as CSV.
    Analyze {
        #[command(flatten)]
        input: SourceArgs,
        /// Output file; stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Write the active/passive diagram as SVG.
    Plot {
        #[command(flatten)]
        input: SourceArgs,
        /// Output file; stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 800)]
        width: u32,
        #[arg(long, default_value_t = 800)]
        height: u32,
    },
    /// Write the failure network as a Graphviz digraph.
    Dot {
        files: Vec<PathBuf>,
        /// Output file; stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate `.chains` skeletons from a JSON array of alert records.
    ImportRapex {
        /// JSON file holding an array of alert records.
        alerts: PathBuf,
        /// Directory for the skeleton files; created if missing.
        #[arg(short = 'o', long = "out-dir")]
        out_dir: PathBuf,
        #[arg(long, default_value = "alertNumber")]
        field_alert: String,
        #[arg(long, default_value = "product")]
        field_product: String,
        #[arg(long, default_value = "risk")]
        field_risk: String,
        #[arg(long, default_value = "description")]
        field_description: String,
    },
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Chain documents.
    #[arg(conflicts_with = "from_sums")]
    pub files: Vec<PathBuf>,
    /// Sums CSV with columns id, category, name, active_sum, passive_sum.
    #[arg(long, value_name = "CSV")]
    pub from_sums: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Ratio active/passive at or above which a factor is dominant [default: 2.0].
    #[arg(long)]
    pub dominant_ratio: Option<f64>,
    /// Ratio at or below which a factor is reactive [default: 0.5].
    #[arg(long)]
    pub reactive_ratio: Option<f64>,
    /// Minimum active_norm + passive_norm for a key factor [default: 75].
    #[arg(long)]
    pub key_threshold: Option<f64>,
    /// Decimals for normalized values in the report [default: 1].
    #[arg(long)]
    pub decimals: Option<u32>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<AnalysisConfig, Failure> {
        let mut cfg = AnalysisConfig::default();
        if let Some(v) = self.dominant_ratio {
            cfg.dominant_ratio = v;
        }
        if let Some(v) = self.reactive_ratio {
            cfg.reactive_ratio = v;
        }
        if let Some(v) = self.key_threshold {
            cfg.key_threshold = v;
        }
        if let Some(v) = self.decimals {
            cfg.display_decimals = v;
        }
        cfg.validate().map_err(|e| Failure::Content(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug)]
enum Failure {
    /// Already reported; just exit 1.
    Reported,
    Content(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Reported | Failure::Content(_) => EXIT_CONTENT,
            Failure::Io(_) => EXIT_IO,
        }
    }
}

struct Context<'a> {
    strict: bool,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

/// Runs the CLI with the given arguments (program name first) and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_CONTENT
                }
            };
        }
    };
    let mut ctx = Context {
        strict: cli.strict,
        stdout,
        stderr,
    };
    let result = match &cli.command {
        Command::Validate { files } => return cmd_validate(&mut ctx, files),
        Command::Matrix { files, output } => cmd_matrix(&mut ctx, files, output.as_deref()),
        Command::Analyze { input, output, config } => cmd_analyze(&mut ctx, input, output.as_deref(), config),
        Command::Plot { input, output, config, width, height } => {
            cmd_plot(&mut ctx, input, output.as_deref(), config, *width, *height)
        }
        Command::Dot { files, output } => cmd_dot(&mut ctx, files, output.as_deref()),
        Command::ImportRapex {
            alerts,
            out_dir,
            field_alert,
            field_product,
            field_risk,
            field_description,
        } => {
            let fields = FieldMap {
                alert_number: field_alert.clone(),
                product: field_product.clone(),
                risk: field_risk.clone(),
                description: field_description.clone(),
            };
            cmd_import_rapex(&mut ctx, alerts, out_dir, &fields)
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            match &failure {
                Failure::Reported => {}
                Failure::Content(msg) | Failure::Io(msg) => {
                    let _ = writeln!(ctx.stderr, "error: {msg}");
                }
            }
            failure.code()
        }
    }
}

fn print_diagnostics(out: &mut dyn Write, path: &Path, diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        let _ = writeln!(out, "{}:{}", path.display(), d);
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn require_inputs(files: &[PathBuf]) -> Result<(), Failure> {
    if files.is_empty() {
        return Err(Failure::Content(
            "no input files given\n\nusage: keyfactors <COMMAND> [OPTIONS] <FILES>...".to_string(),
        ));
    }
    Ok(())
}

/// Reads and parses every file, in argument order. Diagnostics go to stderr.
fn load_chains(ctx: &mut Context<'_>, files: &[PathBuf]) -> Result<ChainSet, Failure> {
    require_inputs(files)?;
    let mut chains = ChainSet::default();
    let mut failed = false;
    for path in files {
        let text = read_text(path)?;
        let parsed = parse_document(&text);
        print_diagnostics(ctx.stderr, path, &parsed.diagnostics);
        failed |= parsed.has_errors() || (ctx.strict && parsed.has_warnings());
        chains = chains.concat(parsed.chains);
    }
    if failed {
        return Err(Failure::Reported);
    }
    Ok(chains)
}

fn load_matrix(ctx: &mut Context<'_>, files: &[PathBuf]) -> Result<RelationshipMatrix, Failure> {
    let chains = load_chains(ctx, files)?;
    build_matrix(&chains).map_err(|e| Failure::Content(e.to_string()))
}

/// Writes to `path` through a temporary file in the same directory and a
/// rename, or to stdout when no path is given.
fn write_output(ctx: &mut Context<'_>, path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        None => ctx
            .stdout
            .write_all(content.as_bytes())
            .map_err(|e| Failure::Io(format!("stdout: {e}"))),
        Some(path) => write_atomic(path, content).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
    }
}

fn write_atomic(path: &Path, content: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn cmd_validate(ctx: &mut Context<'_>, files: &[PathBuf]) -> u8 {
    if let Err(f) = require_inputs(files) {
        if let Failure::Content(msg) = &f {
            let _ = writeln!(ctx.stderr, "error: {msg}");
        }
        return f.code();
    }
    let mut code = EXIT_OK;
    for path in files {
        let text = match read_text(path) {
            Ok(t) => t,
            Err(Failure::Io(msg)) => {
                let _ = writeln!(ctx.stderr, "error: {msg}");
                code = EXIT_IO;
                continue;
            }
            Err(_) => unreachable!("read_text only fails with IO errors"),
        };
        let parsed = parse_document(&text);
        print_diagnostics(ctx.stdout, path, &parsed.diagnostics);
        if (parsed.has_errors() || (ctx.strict && parsed.has_warnings())) && code == EXIT_OK {
            code = EXIT_CONTENT;
        }
    }
    code
}

fn cmd_matrix(ctx: &mut Context<'_>, files: &[PathBuf], output: Option<&Path>) -> Result<(), Failure> {
    let m = load_matrix(ctx, files)?;
    let s = sums(&m);
    let text = export_matrix_csv(&m, &s, &Ranks::from_sums(&s));
    write_output(ctx, output, &text)
}

fn scores(ctx: &mut Context<'_>, input: &SourceArgs, cfg: &AnalysisConfig) -> Result<Vec<FactorScore>, Failure> {
    let result = match &input.from_sums {
        Some(path) => {
            let text = read_text(path)?;
            let table = parse_sums_csv(&text).map_err(|e| {
                let msg = format!("{}: {e}", path.display());
                if e.is_content_error() {
                    Failure::Content(msg)
                } else {
                    Failure::Io(msg)
                }
            })?;
            analyze(&table, cfg)
        }
        None => {
            let chains = load_chains(ctx, &input.files)?;
            analyze(&chains, cfg)
        }
    };
    result.map_err(|e| Failure::Content(e.to_string()))
}

fn cmd_analyze(ctx: &mut Context<'_>, input: &SourceArgs, output: Option<&Path>, config: &ConfigArgs) -> Result<(), Failure> {
    let cfg = config.resolve()?;
    let scores = scores(ctx, input, &cfg)?;
    let text = export_report_csv(&scores, cfg.display_decimals);
    write_output(ctx, output, &text)
}

fn cmd_plot(
    ctx: &mut Context<'_>,
    input: &SourceArgs,
    output: Option<&Path>,
    config: &ConfigArgs,
    width: u32,
    height: u32,
) -> Result<(), Failure> {
    let cfg = config.resolve()?;
    let scores = scores(ctx, input, &cfg)?;
    let layout = PlotLayout {
        width,
        height,
        ..PlotLayout::default()
    };
    let text = render_scatter_svg(&scores, &cfg, &layout);
    write_output(ctx, output, &text)
}

fn cmd_dot(ctx: &mut Context<'_>, files: &[PathBuf], output: Option<&Path>) -> Result<(), Failure> {
    let m = load_matrix(ctx, files)?;
    write_output(ctx, output, &export_dot(&m))
}

fn cmd_import_rapex(ctx: &mut Context<'_>, alerts: &Path, out_dir: &Path, fields: &FieldMap) -> Result<(), Failure> {
    let text = read_text(alerts)?;
    let records = parse_alert_records(&text, fields).map_err(|e| {
        let msg = format!("{}: {e}", alerts.display());
        if e.is_content_error() {
            Failure::Content(msg)
        } else {
            Failure::Io(msg)
        }
    })?;
    let out = import_rapex(&records);
    for w in &out.warnings {
        let _ = writeln!(ctx.stderr, "warning: {w}");
    }
    if ctx.strict && !out.warnings.is_empty() {
        return Err(Failure::Reported);
    }
    if out.documents.is_empty() {
        return Ok(());
    }
    fs::create_dir_all(out_dir).map_err(|e| Failure::Io(format!("{}: {e}", out_dir.display())))?;
    for doc in &out.documents {
        let path = out_dir.join(&doc.file_name);
        write_atomic(&path, &doc.document).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
