//! Text, CSV, JSON and SVG renderings of a [`TeacherReport`].
//!
//! Renderers only format values already held by the report; rounding is
//! half away from zero on the exact binary value.

mod delimited;
mod json;
mod svg;
mod text;

use std::fmt;
use std::str::FromStr;

pub use delimited::render_csv;
pub use json::{parse_report_json, render_json};
pub use svg::render_chart;
pub use text::render_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(format!(
                "unknown format {other:?} (expected text, csv, json or svg)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    MarksByCategory,
    MeanIntervals,
}

impl ChartKind {
    pub fn name(self) -> &'static str {
        match self {
            ChartKind::MarksByCategory => "marks-by-category",
            ChartKind::MeanIntervals => "mean-intervals",
        }
    }
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown chart kind {0:?} (expected marks-by-category or mean-intervals)")]
pub struct UnknownChart(pub String);

impl FromStr for ChartKind {
    type Err = UnknownChart;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "marks-by-category" => Ok(ChartKind::MarksByCategory),
            "mean-intervals" => Ok(ChartKind::MeanIntervals),
            other => Err(UnknownChart(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderOptions {
    pub format: OutputFormat,
    pub chart: ChartKind,
    pub mean_decimals: usize,
    pub std_decimals: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            format: OutputFormat::Text,
            chart: ChartKind::MarksByCategory,
            mean_decimals: 2,
            std_decimals: 5,
        }
    }
}

/// Fixed-point rendering with ties rounded away from zero.
///
/// Works on the exact decimal expansion of `value`, so only the digit after
/// the cut decides the direction.
pub fn fixed(value: f64, decimals: usize) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    // f64 values have at most 1074 fractional digits; the extra precision
    // keeps the digit after the cut exact for every value this crate prints.
    let exact = format!("{:.*}", decimals + 64, value.abs());
    let (int_part, frac_part) = exact.split_once('.').expect("fractional digits present");
    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes().take(decimals))
        .map(|b| b - b'0')
        .collect();
    if frac_part.as_bytes()[decimals] >= b'5' {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - decimals;
    let mut out = String::with_capacity(digits.len() + 2);
    if value.is_sign_negative() && digits.iter().any(|&d| d != 0) {
        out.push('-');
    }
    out.extend(digits[..split].iter().map(|d| char::from(b'0' + d)));
    if decimals > 0 {
        out.push('.');
        out.extend(digits[split..].iter().map(|d| char::from(b'0' + d)));
    }
    out
}

/// `fixed` for an optional deviation, `-` when absent.
pub(crate) fn fixed_or_dash(value: Option<f64>, decimals: usize) -> String {
    value.map_or_else(|| "-".to_string(), |v| fixed(v, decimals))
}
