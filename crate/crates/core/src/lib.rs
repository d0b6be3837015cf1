//! Statistical processing of student evaluations of teaching staff.
//!
//! Records are read from CSV or JSON-lines stores, validated against a
//! questionnaire schema, and summarized per teacher into item, category and
//! total statistics that can be rendered as text, CSV, JSON or SVG charts.

pub mod cli;
pub mod records;
pub mod render;
pub mod schema;
pub mod stats;
pub mod synth;

pub use records::{
    append_records, parse_records, EvaluationRecord, RecordFormat, RecordSet, RejectReason,
    Rejection, ValidationReport,
};
pub use render::{ChartKind, OutputFormat, RenderOptions};
pub use schema::{default_schema, load_schema, Category, MarkScale, QuestionnaireSchema};
pub use stats::{
    build_teacher_report, compute_category_stats, compute_item_stats, compute_total_stats,
    CategoryStatistics, ItemStatistics, Scope, TeacherReport,
};

/// Evaluations for Teacher-1 from the reference data set (20 records).
pub const TEACHER1_FIXTURE_CSV: &str = include_str!("../data/teacher1.csv");
