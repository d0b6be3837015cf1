use std::fmt::Write;

use super::{fixed, fixed_or_dash, RenderOptions};
use crate::records::format_timestamp;
use crate::stats::{Frequencies, TeacherReport};

fn counts(freq: &Frequencies) -> String {
    freq.values()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn count_headers(freq: &Frequencies) -> String {
    freq.keys()
        .map(|m| format!("No.{m}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Plain-text tables: header, per-item statistics, per-category and total.
pub fn render_text(report: &TeacherReport, options: &RenderOptions) -> String {
    let mut out = String::new();
    let (md, sd) = (options.mean_decimals, options.std_decimals);
    let marks = count_headers(&report.total.freq);

    writeln!(out, "Statistic results for: {}", report.teacher_id).unwrap();
    writeln!(out, "Records: {}", report.record_count).unwrap();
    writeln!(out, "Generated: {}", format_timestamp(&report.generated_at)).unwrap();
    out.push('\n');

    writeln!(out, "Item statistics").unwrap();
    writeln!(
        out,
        "Item | Category | Min | Max | Medium | Std.dev. | {marks}"
    )
    .unwrap();
    for item in &report.item_stats {
        writeln!(
            out,
            "{} | {} | {} | {} | {} | {} | {}",
            item.item_index,
            item.category_id,
            item.min_mark,
            item.max_mark,
            fixed(item.mean, md),
            fixed_or_dash(item.sample_std_dev, sd),
            counts(&item.freq)
        )
        .unwrap();
    }
    out.push('\n');

    writeln!(out, "Aggregated statistics").unwrap();
    writeln!(out, "Category | Min | Max | Medium | Std.dev. | {marks}").unwrap();
    for row in report
        .category_stats
        .iter()
        .chain(std::iter::once(&report.total))
    {
        writeln!(
            out,
            "{} | {} | {} | {} | {} | {}",
            row.scope,
            row.min_mark,
            row.max_mark,
            fixed(row.mean, md),
            fixed_or_dash(row.sample_std_dev, sd),
            counts(&row.freq)
        )
        .unwrap();
    }
    out
}
