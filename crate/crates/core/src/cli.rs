//! `evalstat` command line: validate, report, list-teachers, synth.
//!
//! Exit status is 0 on success, 1 for domain failures (rejected rows, no
//! records for the teacher) and 2 for environment failures (I/O, malformed
//! schema or header, bad arguments).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};

use crate::records::{read_records, RecordFormat, RecordSet, ValidationReport};
use crate::render::{self, ChartKind, OutputFormat, RenderOptions};
use crate::schema::{default_schema, load_schema, QuestionnaireSchema};
use crate::stats::{build_teacher_report, StatsError, DEFAULT_INTERVAL_WIDTH};
use crate::synth::{generate, MarkDistribution, SynthParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_ENVIRONMENT: i32 = 2;

/// Pins the report's `generated_at` (RFC 3339) when set.
pub const FIXED_TIMESTAMP_VAR: &str = "EVALSTAT_FIXED_TIMESTAMP";

#[derive(Debug, Parser)]
#[command(
    name = "evalstat",
    version,
    about = "Statistics for student evaluations of teaching staff"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a record store and list every rejected row.
    Validate(InputArgs),
    /// Compute and render the statistics of one teacher.
    Report(ReportArgs),
    /// List teachers with their record counts.
    ListTeachers(InputArgs),
    /// Write a seeded synthetic record store.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Record store (CSV, or JSON lines for .jsonl/.ndjson)
    #[arg(long)]
    pub input: PathBuf,
    /// Schema document; the built-in 58-item questionnaire when omitted
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Override the format detected from the file extension
    #[arg(long, value_name = "csv|json-lines")]
    pub input_format: Option<RecordFormat>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub teacher: String,
    #[arg(long, default_value = "text", value_name = "text|csv|json|svg")]
    pub format: OutputFormat,
    /// Chart drawn when --format svg
    #[arg(
        long,
        default_value = "marks-by-category",
        value_name = "marks-by-category|mean-intervals"
    )]
    pub chart: ChartKind,
    /// Output file; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_INTERVAL_WIDTH)]
    pub interval_width: f64,
    #[arg(long, default_value_t = 2)]
    pub mean_decimals: usize,
    #[arg(long, default_value_t = 5)]
    pub std_decimals: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub teachers: u64,
    /// Records per teacher
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub records: u64,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long, default_value = "uniform", value_name = "uniform|skewed")]
    pub distribution: MarkDistribution,
    /// Output file; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure carrying the exit status it maps to.
#[derive(Debug)]
struct Failure {
    status: i32,
    message: String,
}

impl Failure {
    fn environment(message: impl Into<String>) -> Self {
        Self {
            status: EXIT_ENVIRONMENT,
            message: message.into(),
        }
    }

    fn domain(message: impl Into<String>) -> Self {
        Self {
            status: EXIT_DOMAIN,
            message: message.into(),
        }
    }
}

/// Runs one parsed invocation and returns its exit status.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Validate(args) => cmd_validate(&args, stdout),
        Command::Report(args) => cmd_report(&args, stdout, stderr),
        Command::ListTeachers(args) => cmd_list_teachers(&args, stdout),
        Command::Synth(args) => cmd_synth(&args, stdout),
    };
    match result {
        Ok(status) => status,
        Err(failure) => {
            let _ = writeln!(stderr, "evalstat: {}", failure.message);
            failure.status
        }
    }
}

fn load_schema_arg(path: Option<&Path>) -> Result<Arc<QuestionnaireSchema>, Failure> {
    let Some(path) = path else {
        return Ok(Arc::new(default_schema()));
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::environment(format!("cannot read schema {}: {e}", path.display())))?;
    load_schema(&text)
        .map(Arc::new)
        .map_err(|e| Failure::environment(format!("schema {}: {e}", path.display())))
}

fn load_input(args: &InputArgs) -> Result<(RecordSet, ValidationReport), Failure> {
    let schema = load_schema_arg(args.schema.as_deref())?;
    let format = args
        .input_format
        .unwrap_or_else(|| RecordFormat::from_path(&args.input));
    read_records(&args.input, format, schema)
        .map_err(|e| Failure::environment(format!("{}: {e}", args.input.display())))
}

fn io_failure(e: io::Error) -> Failure {
    Failure::environment(format!("write failed: {e}"))
}

fn cmd_validate(args: &InputArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let (_, report) = load_input(args)?;
    writeln!(
        stdout,
        "{} accepted, {} rejected",
        report.accepted_count,
        report.rejections.len()
    )
    .map_err(io_failure)?;
    for rejection in &report.rejections {
        writeln!(stdout, "{rejection}").map_err(io_failure)?;
    }
    Ok(if report.is_clean() {
        EXIT_OK
    } else {
        EXIT_DOMAIN
    })
}

fn cmd_list_teachers(args: &InputArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let (set, _) = load_input(args)?;
    for (teacher, count) in set.list_teachers() {
        writeln!(stdout, "{teacher}  {count}").map_err(io_failure)?;
    }
    Ok(EXIT_OK)
}

/// `generated_at` for reports: the pinned value if set, otherwise now.
pub fn report_timestamp() -> Result<DateTime<Utc>, String> {
    match std::env::var(FIXED_TIMESTAMP_VAR) {
        Ok(value) => DateTime::parse_from_rfc3339(value.trim())
            .map(|ts| ts.with_timezone(&Utc))
            .map_err(|e| format!("{FIXED_TIMESTAMP_VAR}={value:?} is not RFC 3339: {e}")),
        Err(_) => Ok(Utc::now()),
    }
}

fn write_output(out: Option<&Path>, contents: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, contents)
            .map_err(|e| Failure::environment(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(contents.as_bytes()).map_err(io_failure),
    }
}

fn cmd_report(
    args: &ReportArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let generated_at = report_timestamp().map_err(Failure::environment)?;
    let (set, validation) = load_input(&args.input)?;
    if !validation.is_clean() {
        let _ = writeln!(
            stderr,
            "evalstat: warning: {} row(s) rejected and excluded; run `evalstat validate` for details",
            validation.rejections.len()
        );
    }
    let report = match build_teacher_report(&set, &args.teacher, generated_at, args.interval_width)
    {
        Ok(report) => report,
        Err(StatsError::NoRecords) => {
            return Err(Failure::domain(format!(
                "no records for teacher {}",
                args.teacher
            )))
        }
        Err(e) => return Err(Failure::environment(e.to_string())),
    };
    let options = RenderOptions {
        format: args.format,
        chart: args.chart,
        mean_decimals: args.mean_decimals,
        std_decimals: args.std_decimals,
    };
    let rendered = match options.format {
        OutputFormat::Text => render::render_text(&report, &options),
        OutputFormat::Csv => render::render_csv(&report, &options),
        OutputFormat::Json => render::render_json(&report),
        OutputFormat::Svg => render::render_chart(&report, options.chart),
    };
    write_output(args.out.as_deref(), &rendered, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_synth(args: &SynthArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let schema = load_schema_arg(args.schema.as_deref())?;
    let params = SynthParams {
        seed: args.seed,
        teachers: args.teachers as usize,
        records_per_teacher: args.records as usize,
        distribution: args.distribution,
    };
    let set = generate(schema, &params);
    let mut bytes = Vec::new();
    set.write_csv(&mut bytes)
        .map_err(|e| Failure::environment(e.to_string()))?;
    let text = String::from_utf8(bytes).expect("CSV output is UTF-8");
    write_output(args.out.as_deref(), &text, stdout)?;
    Ok(EXIT_OK)
}
