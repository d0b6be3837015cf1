use std::fmt::Write;

use super::{fixed, ChartKind};
use crate::stats::TeacherReport;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const PLOT_LEFT: f64 = 70.0;
const PLOT_RIGHT: f64 = 780.0;
const PLOT_TOP: f64 = 60.0;
const PLOT_BOTTOM: f64 = 380.0;
const GROUP_FILL: f64 = 0.8;
const Y_TICKS: u32 = 4;

const PALETTE: [&str; 10] = [
    "#b2182b", "#ef8a62", "#fddbc7", "#67a9cf", "#2166ac", "#1b7837", "#7fbf7b", "#762a83",
    "#af8dc3", "#525252",
];

struct Series {
    key: String,
    label: String,
}

struct Group {
    key: String,
    label: String,
    values: Vec<u64>,
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn px(v: f64) -> String {
    fixed(v, 2)
}

fn chart_data(report: &TeacherReport, chart: ChartKind) -> (String, Vec<Series>, Vec<Group>) {
    match chart {
        ChartKind::MarksByCategory => {
            let series = report
                .total
                .freq
                .keys()
                .map(|m| Series {
                    key: m.to_string(),
                    label: format!("Mark {m}"),
                })
                .collect();
            let groups = report
                .category_stats
                .iter()
                .map(|c| Group {
                    key: c.scope.to_string(),
                    label: format!("Category {}", c.scope),
                    values: c.freq.values().copied().collect(),
                })
                .collect();
            ("Number of marks by category".to_string(), series, groups)
        }
        ChartKind::MeanIntervals => {
            let series = report
                .interval_buckets
                .values()
                .next()
                .map(|buckets| {
                    buckets
                        .iter()
                        .map(|b| Series {
                            key: b.label(),
                            label: b.label(),
                        })
                        .collect()
                })
                .unwrap_or_default();
            let groups = report
                .interval_buckets
                .iter()
                .map(|(id, buckets)| Group {
                    key: id.to_string(),
                    label: format!("Category {id}"),
                    values: buckets.iter().map(|b| b.count).collect(),
                })
                .collect();
            (
                "Item mean intervals by category".to_string(),
                series,
                groups,
            )
        }
    }
}

/// Grouped bar chart, one group per category and one bar per series.
///
/// Bar heights are proportional to their values, scaled so the largest value
/// spans the plot height. Each bar carries `data-category`, `data-series` and
/// `data-value` attributes.
pub fn render_chart(report: &TeacherReport, chart: ChartKind) -> String {
    let (title, series, groups) = chart_data(report, chart);
    let max_value = groups
        .iter()
        .flat_map(|g| g.values.iter().copied())
        .max()
        .unwrap_or(0);
    let plot_h = PLOT_BOTTOM - PLOT_TOP;
    let scale = |v: u64| {
        if max_value == 0 {
            0.0
        } else {
            v as f64 / max_value as f64 * plot_h
        }
    };

    let mut svg = String::new();
    writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" data-chart="{kind}" data-max="{max_value}">"#,
        w = WIDTH,
        h = HEIGHT,
        kind = chart.name(),
    )
    .unwrap();
    writeln!(
        svg,
        r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="28" text-anchor="middle" font-family="sans-serif" font-size="16">{} - {}</text>"#,
        px(WIDTH / 2.0),
        escape(&title),
        escape(&report.teacher_id)
    )
    .unwrap();

    // y axis with evenly spaced ticks
    writeln!(
        svg,
        r#"<g class="y-axis" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    for tick in 0..=Y_TICKS {
        let fraction = f64::from(tick) / f64::from(Y_TICKS);
        let y = PLOT_BOTTOM - fraction * plot_h;
        writeln!(
            svg,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#dddddd"/>"##,
            px(PLOT_LEFT),
            px(y),
            px(PLOT_RIGHT),
            px(y)
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            px(PLOT_LEFT - 6.0),
            px(y + 4.0),
            fixed(max_value as f64 * fraction, 1)
        )
        .unwrap();
    }
    writeln!(
        svg,
        r##"<line x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="#000000"/>"##,
        l = px(PLOT_LEFT),
        t = px(PLOT_TOP),
        b = px(PLOT_BOTTOM)
    )
    .unwrap();
    writeln!(
        svg,
        r##"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="#000000"/>"##,
        l = px(PLOT_LEFT),
        r = px(PLOT_RIGHT),
        b = px(PLOT_BOTTOM)
    )
    .unwrap();
    writeln!(svg, "</g>").unwrap();

    let group_w = if groups.is_empty() {
        0.0
    } else {
        (PLOT_RIGHT - PLOT_LEFT) / groups.len() as f64
    };
    let bar_w = if series.is_empty() {
        0.0
    } else {
        group_w * GROUP_FILL / series.len() as f64
    };
    let value_font = if series.len() > 6 { 8 } else { 11 };

    writeln!(
        svg,
        r#"<g class="bars" font-family="sans-serif" font-size="{value_font}">"#
    )
    .unwrap();
    for (gi, group) in groups.iter().enumerate() {
        let group_x = PLOT_LEFT + gi as f64 * group_w + group_w * (1.0 - GROUP_FILL) / 2.0;
        writeln!(
            svg,
            r#"<g class="group" data-category="{}">"#,
            escape(&group.key)
        )
        .unwrap();
        for (si, (s, &value)) in series.iter().zip(&group.values).enumerate() {
            let h = scale(value);
            let x = group_x + si as f64 * bar_w;
            let y = PLOT_BOTTOM - h;
            writeln!(
                svg,
                r#"<rect class="bar" x="{}" y="{}" width="{}" height="{}" fill="{}" data-category="{}" data-series="{}" data-value="{}"/>"#,
                px(x),
                px(y),
                px(bar_w),
                px(h),
                PALETTE[si % PALETTE.len()],
                escape(&group.key),
                escape(&s.key),
                value
            )
            .unwrap();
            writeln!(
                svg,
                r#"<text class="value" x="{}" y="{}" text-anchor="middle">{}</text>"#,
                px(x + bar_w / 2.0),
                px(y - 3.0),
                value
            )
            .unwrap();
        }
        writeln!(
            svg,
            r#"<text class="group-label" x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
            px(PLOT_LEFT + (gi as f64 + 0.5) * group_w),
            px(PLOT_BOTTOM + 18.0),
            escape(&group.label)
        )
        .unwrap();
        writeln!(svg, "</g>").unwrap();
    }
    writeln!(svg, "</g>").unwrap();

    writeln!(
        svg,
        r#"<g class="legend" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    let slot = if series.is_empty() {
        0.0
    } else {
        (PLOT_RIGHT - PLOT_LEFT) / series.len() as f64
    };
    for (si, s) in series.iter().enumerate() {
        let x = PLOT_LEFT + si as f64 * slot;
        writeln!(
            svg,
            r#"<rect x="{}" y="420" width="12" height="12" fill="{}"/>"#,
            px(x),
            PALETTE[si % PALETTE.len()]
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="430">{}</text>"#,
            px(x + 16.0),
            escape(&s.label)
        )
        .unwrap();
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, "</svg>").unwrap();
    svg
}
