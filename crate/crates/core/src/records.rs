//! Evaluation records: parsing with row-level validation, serialization,
//! filtering and append-only persistence to a CSV store.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::schema::{Mark, QuestionnaireSchema};

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("cannot read records: {0}")]
    Io(#[from] io::Error),
    #[error("malformed CSV header: {0}")]
    MalformedHeader(String),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("record {record_id}: {reason}")]
    InvalidRecord { record_id: u64, reason: String },
    #[error("duplicate record id {0}")]
    DuplicateId(u64),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("store {path}: {source}")]
    Read { path: PathBuf, source: RecordError },
    #[error("store {path} holds {count} invalid row(s); refusing to append")]
    CorruptStore { path: PathBuf, count: usize },
    #[error("record id {0} already present in the store")]
    DuplicateId(u64),
}

/// One student's complete answer sheet for one teacher.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationRecord {
    pub record_id: u64,
    pub submitted_at: DateTime<Utc>,
    pub teacher_id: String,
    pub answers: Vec<Mark>,
}

impl EvaluationRecord {
    /// Answer for a 1-based item index.
    pub fn answer(&self, item: usize) -> Option<Mark> {
        item.checked_sub(1)
            .and_then(|i| self.answers.get(i))
            .copied()
    }

    fn check(&self, schema: &QuestionnaireSchema) -> Result<(), Rejection> {
        let reject = |reason, message| Rejection {
            line: 0,
            record_id: Some(self.record_id),
            reason,
            message,
        };
        if self.teacher_id.is_empty() {
            return Err(reject(
                RejectReason::EmptyTeacher,
                "teacher id is empty".into(),
            ));
        }
        check_answer_count(self.answers.len(), schema.item_count())
            .map_err(|(reason, message)| reject(reason, message))?;
        for (i, &mark) in self.answers.iter().enumerate() {
            if !schema.scale().contains(mark.into()) {
                return Err(reject(
                    RejectReason::OutOfRange,
                    out_of_range_message(i + 1, &mark.to_string(), schema),
                ));
            }
        }
        Ok(())
    }
}

/// Records that all satisfy one schema, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordSet {
    schema: Arc<QuestionnaireSchema>,
    records: Vec<EvaluationRecord>,
}

impl RecordSet {
    pub fn empty(schema: Arc<QuestionnaireSchema>) -> Self {
        Self {
            schema,
            records: Vec::new(),
        }
    }

    /// Builds a set, rejecting any record that breaks completeness, range,
    /// teacher or id-uniqueness rules.
    pub fn new(
        schema: Arc<QuestionnaireSchema>,
        records: Vec<EvaluationRecord>,
    ) -> Result<Self, RecordError> {
        let mut ids = HashSet::with_capacity(records.len());
        for record in &records {
            record
                .check(&schema)
                .map_err(|r| RecordError::InvalidRecord {
                    record_id: record.record_id,
                    reason: r.message,
                })?;
            if !ids.insert(record.record_id) {
                return Err(RecordError::DuplicateId(record.record_id));
            }
        }
        Ok(Self { schema, records })
    }

    pub fn schema(&self) -> &QuestionnaireSchema {
        &self.schema
    }

    pub fn shared_schema(&self) -> Arc<QuestionnaireSchema> {
        Arc::clone(&self.schema)
    }

    pub fn records(&self) -> &[EvaluationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records whose teacher id equals `teacher_id` exactly.
    pub fn filter_by_teacher(&self, teacher_id: &str) -> RecordSet {
        RecordSet {
            schema: Arc::clone(&self.schema),
            records: self
                .records
                .iter()
                .filter(|r| r.teacher_id == teacher_id)
                .cloned()
                .collect(),
        }
    }

    /// Distinct teachers in first-appearance order with their record counts.
    pub fn list_teachers(&self) -> Vec<(String, usize)> {
        let mut order: Vec<(String, usize)> = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        for record in &self.records {
            match index.get(record.teacher_id.as_str()) {
                Some(&i) => order[i].1 += 1,
                None => {
                    index.insert(&record.teacher_id, order.len());
                    order.push((record.teacher_id.clone(), 1));
                }
            }
        }
        order
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), RecordError> {
        let mut writer = csv_writer(out);
        writer.write_record(csv_header(self.schema.item_count()))?;
        for record in &self.records {
            writer.write_record(csv_row(record))?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn write_json_lines<W: Write>(&self, mut out: W) -> Result<(), RecordError> {
        for record in &self.records {
            let line = JsonRecord {
                id: record.record_id,
                timestamp: format_timestamp(&record.submitted_at),
                teacher: record.teacher_id.clone(),
                answers: record.answers.iter().map(|&m| i64::from(m)).collect(),
            };
            serde_json::to_writer(&mut out, &line).map_err(io::Error::from)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write<W: Write>(&self, out: W, format: RecordFormat) -> Result<(), RecordError> {
        match format {
            RecordFormat::Csv => self.write_csv(out),
            RecordFormat::JsonLines => self.write_json_lines(out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Csv,
    JsonLines,
}

impl RecordFormat {
    /// `.jsonl` / `.ndjson` map to JSON lines, anything else to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => RecordFormat::JsonLines,
            _ => RecordFormat::Csv,
        }
    }
}

impl FromStr for RecordFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(RecordFormat::Csv),
            "json-lines" | "jsonl" => Ok(RecordFormat::JsonLines),
            other => Err(format!("unknown record format {other:?}")),
        }
    }
}

/// Why a row was kept out of the record set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    Incomplete,
    ExcessAnswers,
    OutOfRange,
    NonInteger,
    EmptyTeacher,
    DuplicateId,
    InvalidId,
    InvalidTimestamp,
    Malformed,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::Incomplete => "incomplete",
            RejectReason::ExcessAnswers => "excess-answers",
            RejectReason::OutOfRange => "out-of-range",
            RejectReason::NonInteger => "non-integer",
            RejectReason::EmptyTeacher => "empty-teacher",
            RejectReason::DuplicateId => "duplicate-id",
            RejectReason::InvalidId => "invalid-id",
            RejectReason::InvalidTimestamp => "invalid-timestamp",
            RejectReason::Malformed => "malformed",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    /// 1-based line in the source file (the CSV header is line 1).
    pub line: usize,
    pub record_id: Option<u64>,
    pub reason: RejectReason,
    pub message: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}", self.line)?;
        if let Some(id) = self.record_id {
            write!(f, " (record {id})")?;
        }
        write!(f, ": [{}] {}", self.reason, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub accepted_count: usize,
    pub rejections: Vec<Rejection>,
}

impl ValidationReport {
    pub fn input_rows(&self) -> usize {
        self.accepted_count + self.rejections.len()
    }

    pub fn is_clean(&self) -> bool {
        self.rejections.is_empty()
    }
}

/// Reads every row of `source`, keeping the valid ones and reporting the rest.
///
/// Only I/O failures and a malformed CSV header abort the parse; every
/// per-row problem becomes a [`Rejection`].
pub fn parse_records<R: Read>(
    mut source: R,
    format: RecordFormat,
    schema: Arc<QuestionnaireSchema>,
) -> Result<(RecordSet, ValidationReport), RecordError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let mut parser = RowValidator::new(&schema);
    match format {
        RecordFormat::Csv => parse_csv(&bytes, &mut parser)?,
        RecordFormat::JsonLines => parse_json_lines(&bytes, &mut parser)?,
    }
    let RowValidator {
        accepted,
        rejections,
        ..
    } = parser;
    let report = ValidationReport {
        accepted_count: accepted.len(),
        rejections,
    };
    Ok((
        RecordSet {
            schema,
            records: accepted,
        },
        report,
    ))
}

/// Convenience wrapper over [`parse_records`] for files on disk.
pub fn read_records(
    path: &Path,
    format: RecordFormat,
    schema: Arc<QuestionnaireSchema>,
) -> Result<(RecordSet, ValidationReport), RecordError> {
    parse_records(fs::File::open(path)?, format, schema)
}

struct RowValidator<'a> {
    schema: &'a QuestionnaireSchema,
    ids: HashSet<u64>,
    accepted: Vec<EvaluationRecord>,
    rejections: Vec<Rejection>,
}

/// Raw fields of one row before validation.
struct RawRow<'f> {
    id: &'f str,
    timestamp: &'f str,
    teacher: &'f str,
    answers: Vec<RawMark<'f>>,
}

enum RawMark<'f> {
    Text(&'f str),
    Json(&'f serde_json::Value),
}

impl<'a> RowValidator<'a> {
    fn new(schema: &'a QuestionnaireSchema) -> Self {
        Self {
            schema,
            ids: HashSet::new(),
            accepted: Vec::new(),
            rejections: Vec::new(),
        }
    }

    fn reject(
        &mut self,
        line: usize,
        record_id: Option<u64>,
        reason: RejectReason,
        message: String,
    ) {
        self.rejections.push(Rejection {
            line,
            record_id,
            reason,
            message,
        });
    }

    fn accept_row(&mut self, line: usize, row: RawRow<'_>) {
        let record_id = match row.id.trim().parse::<u64>() {
            Ok(id) if id > 0 => id,
            _ => {
                let message = format!("record id {:?} is not a positive integer", row.id);
                return self.reject(line, None, RejectReason::InvalidId, message);
            }
        };
        let id = Some(record_id);
        let submitted_at = match DateTime::parse_from_rfc3339(row.timestamp.trim()) {
            Ok(ts) => ts.with_timezone(&Utc),
            Err(e) => {
                let message = format!("timestamp {:?} is not RFC 3339: {e}", row.timestamp);
                return self.reject(line, id, RejectReason::InvalidTimestamp, message);
            }
        };
        if row.teacher.is_empty() {
            return self.reject(
                line,
                id,
                RejectReason::EmptyTeacher,
                "teacher id is empty".into(),
            );
        }
        if let Err((reason, message)) =
            check_answer_count(row.answers.len(), self.schema.item_count())
        {
            return self.reject(line, id, reason, message);
        }
        let mut answers = Vec::with_capacity(row.answers.len());
        for (i, raw) in row.answers.iter().enumerate() {
            let (parsed, shown) = match raw {
                RawMark::Text(s) => (s.trim().parse::<i64>().ok(), s.to_string()),
                RawMark::Json(v) => (v.as_i64(), v.to_string()),
            };
            let Some(mark) = parsed else {
                let message = format!("item {}: mark {shown:?} is not an integer", i + 1);
                return self.reject(line, id, RejectReason::NonInteger, message);
            };
            if !self.schema.scale().contains(mark) {
                let message = out_of_range_message(i + 1, &shown, self.schema);
                return self.reject(line, id, RejectReason::OutOfRange, message);
            }
            answers.push(mark as Mark);
        }
        if !self.ids.insert(record_id) {
            let message = format!("duplicate record id {record_id}");
            return self.reject(line, id, RejectReason::DuplicateId, message);
        }
        self.accepted.push(EvaluationRecord {
            record_id,
            submitted_at,
            teacher_id: row.teacher.to_string(),
            answers,
        });
    }
}

fn check_answer_count(found: usize, expected: usize) -> Result<(), (RejectReason, String)> {
    use std::cmp::Ordering;
    match found.cmp(&expected) {
        Ordering::Equal => Ok(()),
        Ordering::Less => Err((
            RejectReason::Incomplete,
            format!("incomplete: expected {expected} answers, found {found}"),
        )),
        Ordering::Greater => Err((
            RejectReason::ExcessAnswers,
            format!("too many answers: expected {expected} answers, found {found}"),
        )),
    }
}

fn out_of_range_message(item: usize, shown: &str, schema: &QuestionnaireSchema) -> String {
    format!(
        "item {item}: mark {shown} out of range {}..{}",
        schema.scale().min_mark(),
        schema.scale().max_mark()
    )
}

fn parse_csv(bytes: &[u8], validator: &mut RowValidator<'_>) -> Result<(), RecordError> {
    if bytes.is_empty() {
        return Ok(());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let expected = csv_header(validator.schema.item_count());
    let headers = reader.headers()?.clone();
    if headers.iter().ne(expected.iter().map(String::as_str)) {
        let found: Vec<&str> = headers.iter().collect();
        return Err(RecordError::MalformedHeader(format!(
            "expected `id,timestamp,teacher,q01,...,q{:02}` ({} columns), found {} columns starting {:?}",
            validator.schema.item_count(),
            expected.len(),
            found.len(),
            found.iter().take(4).collect::<Vec<_>>()
        )));
    }
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line() as usize);
                if record.len() < 3 {
                    validator.reject(
                        line,
                        None,
                        RejectReason::Malformed,
                        format!(
                            "row has {} field(s), expected id,timestamp,teacher and answers",
                            record.len()
                        ),
                    );
                    continue;
                }
                let row = RawRow {
                    id: &record[0],
                    timestamp: &record[1],
                    teacher: &record[2],
                    answers: record.iter().skip(3).map(RawMark::Text).collect(),
                };
                validator.accept_row(line, row);
            }
            Err(e) => match e.kind() {
                csv::ErrorKind::Io(_) => return Err(e.into()),
                _ => {
                    let line = e.position().map_or(0, |p| p.line() as usize);
                    validator.reject(line, None, RejectReason::Malformed, e.to_string());
                }
            },
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonRecord {
    id: u64,
    timestamp: String,
    teacher: String,
    answers: Vec<i64>,
}

fn parse_json_lines(bytes: &[u8], validator: &mut RowValidator<'_>) -> Result<(), RecordError> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        if raw_line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = match serde_json::from_str(raw_line) {
            Ok(v) => v,
            Err(e) => {
                validator.reject(
                    line,
                    None,
                    RejectReason::Malformed,
                    format!("invalid JSON: {e}"),
                );
                continue;
            }
        };
        let Some(object) = value.as_object() else {
            validator.reject(
                line,
                None,
                RejectReason::Malformed,
                "line is not a JSON object".into(),
            );
            continue;
        };
        let id_text;
        let id = match object.get("id") {
            Some(serde_json::Value::Number(n)) => {
                id_text = n.to_string();
                id_text.as_str()
            }
            _ => "",
        };
        let fields = (
            object.get("timestamp").and_then(|v| v.as_str()),
            object.get("teacher").and_then(|v| v.as_str()),
            object.get("answers").and_then(|v| v.as_array()),
        );
        let (Some(timestamp), Some(teacher), Some(answers)) = fields else {
            validator.reject(
                line,
                None,
                RejectReason::Malformed,
                "object needs string `timestamp`, string `teacher` and array `answers`".into(),
            );
            continue;
        };
        let row = RawRow {
            id,
            timestamp,
            teacher,
            answers: answers.iter().map(RawMark::Json).collect(),
        };
        validator.accept_row(line, row);
    }
    Ok(())
}

/// `id,timestamp,teacher,q01,...` for `items` answer columns.
pub fn csv_header(items: usize) -> Vec<String> {
    ["id", "timestamp", "teacher"]
        .into_iter()
        .map(String::from)
        .chain((1..=items).map(|i| format!("q{i:02}")))
        .collect()
}

fn csv_row(record: &EvaluationRecord) -> Vec<String> {
    [
        record.record_id.to_string(),
        format_timestamp(&record.submitted_at),
        record.teacher_id.clone(),
    ]
    .into_iter()
    .chain(record.answers.iter().map(|m| m.to_string()))
    .collect()
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Appends `new` to the CSV store at `store_path`, creating it if absent.
///
/// The store is rewritten through a temporary file in the same directory
/// and renamed into place, so readers see either the old or the new file.
pub fn append_records(store_path: &Path, new: &RecordSet) -> Result<usize, StoreError> {
    if new.is_empty() {
        return Ok(0);
    }
    let io_err = |source| StoreError::Io {
        path: store_path.to_path_buf(),
        source,
    };
    let existing = match fs::read(store_path) {
        Ok(bytes) => Some(bytes),
        Err(e) if e.kind() == io::ErrorKind::NotFound => None,
        Err(e) => return Err(io_err(e)),
    };

    let mut contents = Vec::new();
    match existing.as_deref() {
        Some(bytes) if !bytes.is_empty() => {
            let (stored, report) = parse_records(bytes, RecordFormat::Csv, new.shared_schema())
                .map_err(|source| StoreError::Read {
                    path: store_path.to_path_buf(),
                    source,
                })?;
            if !report.is_clean() {
                return Err(StoreError::CorruptStore {
                    path: store_path.to_path_buf(),
                    count: report.rejections.len(),
                });
            }
            let mut ids: HashSet<u64> = stored.records.iter().map(|r| r.record_id).collect();
            for record in &new.records {
                if !ids.insert(record.record_id) {
                    return Err(StoreError::DuplicateId(record.record_id));
                }
            }
            contents.extend_from_slice(bytes);
            if !bytes.ends_with(b"\n") {
                contents.push(b'\n');
            }
            let mut writer = csv_writer(&mut contents);
            for record in &new.records {
                writer
                    .write_record(csv_row(record))
                    .map_err(|e| io_err(e.into()))?;
            }
            writer.flush().map_err(io_err)?;
        }
        _ => {
            new.write_csv(&mut contents)
                .map_err(|source| StoreError::Read {
                    path: store_path.to_path_buf(),
                    source,
                })?;
        }
    }

    let dir = match store_path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let file_name = store_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "store".into());
    let tmp = dir.join(format!(".{file_name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(&contents)?;
        file.sync_all()?;
        fs::rename(&tmp, store_path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(e));
    }
    Ok(new.len())
}
