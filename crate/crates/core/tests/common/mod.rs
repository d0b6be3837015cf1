#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use evalstat::records::{parse_records, RecordFormat, RecordSet};
use evalstat::schema::{default_schema, Category, Mark, MarkScale, QuestionnaireSchema};
use evalstat::TEACHER1_FIXTURE_CSV;

pub const PINNED_TIMESTAMP: &str = "2009-06-01T12:00:00Z";

/// Reference per-item values for Teacher-1: (item, mean, std) at display precision.
pub const ITEM_REFERENCE: [(usize, &str, &str); 58] = [
    (1, "3.70", "0.73270"),
    (2, "4.60", "0.50262"),
    (3, "4.05", "0.68633"),
    (4, "4.05", "0.75915"),
    (5, "4.50", "0.51299"),
    (6, "4.20", "0.76777"),
    (7, "4.15", "0.48936"),
    (8, "4.00", "0.64889"),
    (9, "4.00", "0.72548"),
    (10, "4.15", "0.67082"),
    (11, "4.00", "0.64889"),
    (12, "4.70", "0.47016"),
    (13, "4.65", "0.58714"),
    (14, "4.05", "0.60481"),
    (15, "4.05", "0.51042"),
    (16, "4.15", "0.74516"),
    (17, "4.50", "0.60698"),
    (18, "4.20", "0.52315"),
    (19, "4.30", "0.47016"),
    (20, "4.30", "0.73270"),
    (21, "4.20", "0.76777"),
    (22, "4.40", "0.68056"),
    (23, "4.35", "0.48936"),
    (24, "4.65", "0.67082"),
    (25, "3.90", "0.71818"),
    (26, "4.30", "0.65695"),
    (27, "4.25", "0.55012"),
    (28, "4.00", "0.79472"),
    (29, "4.15", "0.67082"),
    (30, "4.40", "0.50262"),
    (31, "4.10", "0.64072"),
    (32, "4.15", "0.48936"),
    (33, "3.95", "0.68633"),
    (34, "4.45", "0.60481"),
    (35, "4.35", "0.67082"),
    (36, "4.35", "0.67082"),
    (37, "4.25", "0.63867"),
    (38, "4.25", "0.55012"),
    (39, "4.25", "0.63867"),
    (40, "4.35", "0.58714"),
    (41, "4.35", "0.58714"),
    (42, "3.70", "0.80131"),
    (43, "4.50", "0.60698"),
    (44, "4.65", "0.48936"),
    (45, "4.30", "0.57124"),
    (46, "4.75", "0.44426"),
    (47, "4.50", "0.60698"),
    (48, "4.80", "0.41039"),
    (49, "4.55", "0.51042"),
    (50, "4.70", "0.47016"),
    (51, "4.70", "0.47016"),
    (52, "4.70", "0.47016"),
    (53, "4.55", "0.51042"),
    (54, "4.85", "0.36635"),
    (55, "4.55", "0.51042"),
    (56, "4.75", "0.44426"),
    (57, "4.70", "0.47016"),
    (58, "4.65", "0.48936"),
];

/// Reference aggregate rows: (label, pooled n, mean, std, counts of marks 3/4/5).
pub const AGGREGATE_REFERENCE: [(&str, u64, &str, &str, [u64; 3]); 5] = [
    ("1", 240, "4.14", "0.70995", [46, 115, 79]),
    ("2", 400, "4.42", "0.60821", [25, 181, 194]),
    ("3", 260, "4.35", "0.62399", [21, 128, 111]),
    ("4", 260, "4.38", "0.63835", [22, 116, 122]),
    ("TOTAL", 1160, "4.34", "0.64857", [114, 540, 506]),
];

pub fn pinned_timestamp() -> DateTime<Utc> {
    DateTime::parse_from_rfc3339(PINNED_TIMESTAMP)
        .unwrap()
        .with_timezone(&Utc)
}

pub fn fixture() -> RecordSet {
    let (set, report) = parse_records(
        TEACHER1_FIXTURE_CSV.as_bytes(),
        RecordFormat::Csv,
        Arc::new(default_schema()),
    )
    .unwrap();
    assert!(report.is_clean());
    set
}

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/teacher1.csv")
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

/// Compares against a committed golden file; `UPDATE_GOLDEN=1` rewrites it.
pub fn assert_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("golden file {} unreadable: {e}", path.display()));
    if expected != actual {
        let line = expected
            .lines()
            .zip(actual.lines())
            .position(|(a, b)| a != b)
            .map_or(expected.lines().count().min(actual.lines().count()), |i| i);
        panic!(
            "golden mismatch in {name} at line {}\nexpected: {:?}\nactual:   {:?}",
            line + 1,
            expected.lines().nth(line),
            actual.lines().nth(line)
        );
    }
}

/// Exact summary of an integer sample: sums kept as integers, the variance
/// formed as a single rational `(n*S2 - S1^2) / (n*(n-1))` before the root.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    pub n: u64,
    pub min: Mark,
    pub max: Mark,
    pub mean: f64,
    pub std: Option<f64>,
    pub counts: Vec<(Mark, u64)>,
}

pub fn oracle(marks: &[Mark], scale: &MarkScale) -> OracleSummary {
    let n = marks.len() as u128;
    let s1: u128 = marks.iter().map(|&m| m as u128).sum();
    let s2: u128 = marks.iter().map(|&m| (m as u128) * (m as u128)).sum();
    let std = (n >= 2).then(|| {
        let num = n * s2 - s1 * s1;
        let den = n * (n - 1);
        (num as f64 / den as f64).sqrt()
    });
    let counts = (scale.min_mark()..=scale.max_mark())
        .map(|k| (k, marks.iter().filter(|&&m| m == k).count() as u64))
        .collect();
    OracleSummary {
        n: n as u64,
        min: *marks.iter().min().unwrap(),
        max: *marks.iter().max().unwrap(),
        mean: s1 as f64 / n as f64,
        std,
        counts,
    }
}

/// Marks of `items` (1-based), gathered item by item across all records.
pub fn raw_marks(set: &RecordSet, items: &[usize]) -> Vec<Mark> {
    items
        .iter()
        .flat_map(|&item| set.records().iter().map(move |r| r.answers[item - 1]))
        .collect()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

pub fn five_point_scale() -> MarkScale {
    default_schema().scale().clone()
}

/// Schema on the 1..5 scale with the given item -> category map.
pub fn schema_from(item_category: Vec<u32>, categories: u32) -> Arc<QuestionnaireSchema> {
    let categories = (1..=categories)
        .map(|id| Category {
            id,
            name: format!("category {id}"),
        })
        .collect();
    Arc::new(
        QuestionnaireSchema::new("generated", five_point_scale(), categories, item_category)
            .unwrap(),
    )
}
