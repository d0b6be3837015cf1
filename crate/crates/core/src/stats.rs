//! Per-item, per-category and total statistics over a record set.
//!
//! Categories and the total pool every raw answer of their items into one
//! sample; dispersion is the sample standard deviation (n - 1 denominator).
//! Accumulation always runs records ascending, then items ascending, so
//! results are bit-reproducible for a given input order.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::records::RecordSet;
use crate::schema::{Mark, MarkScale, QuestionnaireSchema};

pub const DEFAULT_INTERVAL_WIDTH: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no matching records")]
    NoRecords,
    #[error("item {item} out of range 1..={items}")]
    ItemOutOfRange { item: usize, items: usize },
    #[error("unknown category {0}")]
    UnknownCategory(u32),
    #[error("interval width must be positive and finite, got {0}")]
    InvalidIntervalWidth(f64),
}

/// Mark value -> count, with every scale mark present (zero counts included).
pub type Frequencies = BTreeMap<Mark, u64>;

/// Mean and sample standard deviation of a non-empty sample.
///
/// The deviation is `None` for a single observation.
pub fn mean_and_sample_std(marks: &[Mark]) -> Result<(f64, Option<f64>), StatsError> {
    if marks.is_empty() {
        return Err(StatsError::NoRecords);
    }
    let n = marks.len() as f64;
    let sum: u64 = marks.iter().map(|&m| u64::from(m)).sum();
    let mean = sum as f64 / n;
    if marks.len() == 1 {
        return Ok((mean, None));
    }
    let squares: f64 = marks
        .iter()
        .map(|&m| {
            let d = f64::from(m) - mean;
            d * d
        })
        .sum();
    Ok((mean, Some((squares / (n - 1.0)).sqrt())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemStatistics {
    #[serde(rename = "item")]
    pub item_index: usize,
    #[serde(rename = "category")]
    pub category_id: u32,
    pub n: u64,
    #[serde(rename = "min")]
    pub min_mark: Mark,
    #[serde(rename = "max")]
    pub max_mark: Mark,
    pub mean: f64,
    #[serde(rename = "std")]
    pub sample_std_dev: Option<f64>,
    pub freq: Frequencies,
}

/// Which slice of the questionnaire a pooled statistic covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scope {
    Category(u32),
    Total,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Category(id) => write!(f, "{id}"),
            Scope::Total => f.write_str("TOTAL"),
        }
    }
}

impl Serialize for Scope {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scope::Category(id) => serializer.serialize_u32(*id),
            Scope::Total => serializer.serialize_str("TOTAL"),
        }
    }
}

impl<'de> Deserialize<'de> for Scope {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ScopeVisitor;

        impl Visitor<'_> for ScopeVisitor {
            type Value = Scope;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a category id or \"TOTAL\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scope, E> {
                u32::try_from(v)
                    .map(Scope::Category)
                    .map_err(|_| E::custom("category id too large"))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scope, E> {
                u64::try_from(v)
                    .map_err(|_| E::custom("negative category id"))
                    .and_then(|v| self.visit_u64(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Scope, E> {
                if v == "TOTAL" {
                    Ok(Scope::Total)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(ScopeVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryStatistics {
    #[serde(rename = "category")]
    pub scope: Scope,
    #[serde(rename = "n")]
    pub pooled_n: u64,
    #[serde(rename = "min")]
    pub min_mark: Mark,
    #[serde(rename = "max")]
    pub max_mark: Mark,
    pub mean: f64,
    #[serde(rename = "std")]
    pub sample_std_dev: Option<f64>,
    pub freq: Frequencies,
}

/// One mark interval of the mean-interval chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalBucket {
    pub from: f64,
    pub to: f64,
    /// Only the last bucket of a scale includes its upper edge.
    pub closed: bool,
    pub count: u64,
}

impl IntervalBucket {
    pub fn label(&self) -> String {
        format!(
            "[{}, {}{}",
            trim_float(self.from),
            trim_float(self.to),
            if self.closed { "]" } else { ")" }
        )
    }
}

fn trim_float(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0');
    s.strip_suffix('.')
        .map_or_else(|| s.to_string(), |t| format!("{t}.0"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherReport {
    #[serde(rename = "teacher")]
    pub teacher_id: String,
    pub record_count: u64,
    #[serde(with = "rfc3339")]
    pub generated_at: DateTime<Utc>,
    #[serde(rename = "items")]
    pub item_stats: Vec<ItemStatistics>,
    #[serde(rename = "categories")]
    pub category_stats: Vec<CategoryStatistics>,
    pub total: CategoryStatistics,
    #[serde(rename = "intervals")]
    pub interval_buckets: BTreeMap<u32, Vec<IntervalBucket>>,
}

mod rfc3339 {
    use chrono::{DateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::records::format_timestamp(ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let text = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&text)
            .map(|ts| ts.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

fn empty_frequencies(scale: &MarkScale) -> Frequencies {
    scale.marks().map(|m| (m, 0)).collect()
}

/// Pooled summary of a sample gathered in a fixed order.
fn summarize(marks: &[Mark], scale: &MarkScale) -> Result<PooledSummary, StatsError> {
    let (mean, std) = mean_and_sample_std(marks)?;
    let mut freq = empty_frequencies(scale);
    for &m in marks {
        *freq.entry(m).or_insert(0) += 1;
    }
    Ok(PooledSummary {
        n: marks.len() as u64,
        min: *marks.iter().min().expect("non-empty"),
        max: *marks.iter().max().expect("non-empty"),
        mean,
        std,
        freq,
    })
}

struct PooledSummary {
    n: u64,
    min: Mark,
    max: Mark,
    mean: f64,
    std: Option<f64>,
    freq: Frequencies,
}

/// Answers of the given items, records ascending then items ascending.
fn pooled_marks(set: &RecordSet, items: &[usize]) -> Vec<Mark> {
    let mut marks = Vec::with_capacity(set.len() * items.len());
    for record in set.records() {
        marks.extend(items.iter().map(|&i| record.answers[i - 1]));
    }
    marks
}

pub fn compute_item_stats(
    set: &RecordSet,
    item_index: usize,
) -> Result<ItemStatistics, StatsError> {
    let schema = set.schema();
    let category_id = schema
        .category_of(item_index)
        .ok_or(StatsError::ItemOutOfRange {
            item: item_index,
            items: schema.item_count(),
        })?;
    if set.is_empty() {
        return Err(StatsError::NoRecords);
    }
    let s = summarize(&pooled_marks(set, &[item_index]), schema.scale())?;
    Ok(ItemStatistics {
        item_index,
        category_id,
        n: s.n,
        min_mark: s.min,
        max_mark: s.max,
        mean: s.mean,
        sample_std_dev: s.std,
        freq: s.freq,
    })
}

fn pooled_stats(
    set: &RecordSet,
    scope: Scope,
    items: &[usize],
) -> Result<CategoryStatistics, StatsError> {
    if set.is_empty() {
        return Err(StatsError::NoRecords);
    }
    let s = summarize(&pooled_marks(set, items), set.schema().scale())?;
    Ok(CategoryStatistics {
        scope,
        pooled_n: s.n,
        min_mark: s.min,
        max_mark: s.max,
        mean: s.mean,
        sample_std_dev: s.std,
        freq: s.freq,
    })
}

pub fn compute_category_stats(
    set: &RecordSet,
    category_id: u32,
) -> Result<CategoryStatistics, StatsError> {
    if set.schema().category(category_id).is_none() {
        return Err(StatsError::UnknownCategory(category_id));
    }
    let items = set.schema().items_in_category(category_id);
    pooled_stats(set, Scope::Category(category_id), &items)
}

pub fn compute_total_stats(set: &RecordSet) -> Result<CategoryStatistics, StatsError> {
    let items: Vec<usize> = (1..=set.schema().item_count()).collect();
    pooled_stats(set, Scope::Total, &items)
}

/// Bucket edges covering the scale: multiples of `width` from
/// `floor(min / width) * width` up to the scale maximum.
pub fn interval_edges(scale: &MarkScale, width: f64) -> Result<Vec<(f64, f64)>, StatsError> {
    if !(width.is_finite() && width > 0.0) {
        return Err(StatsError::InvalidIntervalWidth(width));
    }
    let (lo, hi) = (f64::from(scale.min_mark()), f64::from(scale.max_mark()));
    let first = (lo / width).floor() as i64;
    let last = ((hi / width).ceil() as i64 - 1).max(first);
    Ok((first..=last)
        .map(|k| (k as f64 * width, (k + 1) as f64 * width))
        .collect())
}

/// Counts item means per category into fixed-width mark intervals.
///
/// Intervals are half-open `[from, to)` except the last, which is closed.
pub fn bucket_item_means(
    items: &[ItemStatistics],
    schema: &QuestionnaireSchema,
    width: f64,
) -> Result<BTreeMap<u32, Vec<IntervalBucket>>, StatsError> {
    let edges = interval_edges(schema.scale(), width)?;
    let first = (f64::from(schema.scale().min_mark()) / width).floor() as i64;
    let last_index = edges.len() - 1;
    let blank: Vec<IntervalBucket> = edges
        .iter()
        .enumerate()
        .map(|(i, &(from, to))| IntervalBucket {
            from,
            to,
            closed: i == last_index,
            count: 0,
        })
        .collect();
    let mut out: BTreeMap<u32, Vec<IntervalBucket>> = schema
        .categories()
        .iter()
        .map(|c| (c.id, blank.clone()))
        .collect();
    for item in items {
        let k = (item.mean / width).floor() as i64 - first;
        let index = k.clamp(0, last_index as i64) as usize;
        let buckets = out
            .get_mut(&item.category_id)
            .ok_or(StatsError::UnknownCategory(item.category_id))?;
        buckets[index].count += 1;
    }
    Ok(out)
}

/// Filters `set` to one teacher and assembles every statistic for them.
pub fn build_teacher_report(
    set: &RecordSet,
    teacher_id: &str,
    generated_at: DateTime<Utc>,
    interval_width: f64,
) -> Result<TeacherReport, StatsError> {
    let subset = set.filter_by_teacher(teacher_id);
    if subset.is_empty() {
        return Err(StatsError::NoRecords);
    }
    let schema = subset.schema();
    let item_stats = schema
        .items_by_category()
        .into_iter()
        .map(|item| compute_item_stats(&subset, item))
        .collect::<Result<Vec<_>, _>>()?;
    let category_stats = schema
        .categories()
        .iter()
        .map(|c| compute_category_stats(&subset, c.id))
        .collect::<Result<Vec<_>, _>>()?;
    let total = compute_total_stats(&subset)?;
    let interval_buckets = bucket_item_means(&item_stats, schema, interval_width)?;
    Ok(TeacherReport {
        teacher_id: teacher_id.to_string(),
        record_count: subset.len() as u64,
        generated_at,
        item_stats,
        category_stats,
        total,
        interval_buckets,
    })
}
