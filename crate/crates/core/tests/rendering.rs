mod common;

use std::collections::BTreeMap;

use common::*;
use evalstat::records::RecordSet;
use evalstat::render::*;
use evalstat::stats::{build_teacher_report, TeacherReport};

fn report() -> TeacherReport {
    build_teacher_report(&fixture(), "Teacher-1", pinned_timestamp(), 0.5).unwrap()
}

fn single_record_report() -> TeacherReport {
    let set = fixture();
    let one = RecordSet::new(set.shared_schema(), vec![set.records()[0].clone()]).unwrap();
    build_teacher_report(&one, "Teacher-1", pinned_timestamp(), 0.5).unwrap()
}

#[test]
fn text_rows() {
    let text = render_text(&report(), &RenderOptions::default());
    assert!(text.starts_with("Statistic results for: Teacher-1\n"));
    assert!(text.contains("\n1 | 1 | 3 | 5 | 3.70 | 0.73270 | 0 0 9 8 3\n"));
    assert!(text.contains("\nTOTAL | 3 | 5 | 4.34 | 0.64857 | 0 0 114 540 506\n"));
}

#[test]
fn text_marks_absent_deviation() {
    let text = render_text(&single_record_report(), &RenderOptions::default());
    let item_rows: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with("Item |"))
        .skip(1)
        .take_while(|l| !l.is_empty())
        .collect();
    assert_eq!(item_rows.len(), 58);
    assert!(item_rows
        .iter()
        .all(|row| row.split(" | ").nth(5) == Some("-")));
}

#[test]
fn csv_blocks() {
    let csv = render_csv(&report(), &RenderOptions::default());
    let (items, categories) = csv.split_once("\n\n").unwrap();
    assert_eq!(items.lines().count(), 59);
    let last = categories.lines().last().unwrap();
    assert!(last.starts_with("TOTAL,1160,3,5,4.34,0.64857,"));
    assert_eq!(categories.lines().count(), 6);
}

#[test]
fn decimals_follow_options() {
    let options = RenderOptions {
        mean_decimals: 3,
        std_decimals: 2,
        ..RenderOptions::default()
    };
    let text = render_text(&report(), &options);
    assert!(text.contains("\n1 | 1 | 3 | 5 | 3.700 | 0.73 | 0 0 9 8 3\n"));
}

#[test]
fn json_shape_and_round_trip() {
    let report = report();
    let json = render_json(&report);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    let keys: Vec<&str> = value
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    let mut expected = vec![
        "teacher",
        "record_count",
        "generated_at",
        "items",
        "categories",
        "total",
        "intervals",
    ];
    expected.sort();
    let mut got = keys.clone();
    got.sort();
    assert_eq!(got, expected);
    assert_eq!(value["items"].as_array().unwrap().len(), 58);
    assert_eq!(value["categories"].as_array().unwrap().len(), 4);
    assert_eq!(value["total"]["category"], "TOTAL");
    assert_eq!(value["total"]["freq"]["5"], 506);
    let item_keys: Vec<&str> = value["items"][0]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    assert_eq!(item_keys.len(), 8);
    assert!(json.find("\"teacher\"").unwrap() < json.find("\"intervals\"").unwrap());
    assert_eq!(parse_report_json(&json).unwrap(), report);

    let single = single_record_report();
    let json = render_json(&single);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(value["items"][0]["std"].is_null());
    assert_eq!(parse_report_json(&json).unwrap(), single);
}

fn bars(svg: &str) -> Vec<(String, String, u64, f64)> {
    let doc = roxmltree::Document::parse(svg).expect("well-formed SVG");
    doc.descendants()
        .filter(|n| n.attribute("class") == Some("bar"))
        .map(|n| {
            (
                n.attribute("data-category").unwrap().to_string(),
                n.attribute("data-series").unwrap().to_string(),
                n.attribute("data-value").unwrap().parse().unwrap(),
                n.attribute("height").unwrap().parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn marks_chart_carries_pooled_counts() {
    let report = report();
    let svg = render_chart(&report, ChartKind::MarksByCategory);
    assert!(!svg.contains("href"));
    let bars = bars(&svg);
    assert_eq!(bars.len(), 4 * 5);
    let category1: Vec<u64> = bars.iter().filter(|b| b.0 == "1").map(|b| b.2).collect();
    assert_eq!(category1, vec![0, 0, 46, 115, 79]);
    for cat in &report.category_stats {
        for (mark, count) in &cat.freq {
            let bar = bars
                .iter()
                .find(|b| b.0 == cat.scope.to_string() && b.1 == mark.to_string())
                .unwrap();
            assert_eq!(bar.2, *count);
        }
    }
    // heights are proportional to values
    let (max_value, max_height) = bars
        .iter()
        .max_by_key(|b| b.2)
        .map(|b| (b.2 as f64, b.3))
        .unwrap();
    for bar in &bars {
        let expected = bar.2 as f64 / max_value * max_height;
        assert!((bar.3 - expected).abs() <= 0.011, "{bar:?}");
    }
}

#[test]
fn interval_chart_carries_buckets() {
    let report = report();
    let svg = render_chart(&report, ChartKind::MeanIntervals);
    let bars = bars(&svg);
    let mut from_svg: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for bar in &bars {
        from_svg.entry(bar.0.clone()).or_default().push(bar.2);
    }
    let from_report: BTreeMap<String, Vec<u64>> = report
        .interval_buckets
        .iter()
        .map(|(id, b)| (id.to_string(), b.iter().map(|x| x.count).collect()))
        .collect();
    assert_eq!(from_svg, from_report);
}

#[test]
fn single_observed_mark_spans_plot() {
    let set = fixture();
    let schema = schema_from(vec![1], 1);
    let mut record = set.records()[0].clone();
    record.answers = vec![4];
    let one = RecordSet::new(schema, vec![record]).unwrap();
    let report = build_teacher_report(&one, "Teacher-1", pinned_timestamp(), 0.5).unwrap();
    let svg = render_chart(&report, ChartKind::MarksByCategory);
    let bars = bars(&svg);
    let tall: Vec<_> = bars.iter().filter(|b| b.3 > 0.0).collect();
    assert_eq!(tall.len(), 1);
    assert_eq!((tall[0].1.as_str(), tall[0].2, tall[0].3), ("4", 1, 320.0));
}

#[test]
fn chart_escapes_teacher_id() {
    let set = fixture();
    let records = set
        .records()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.teacher_id = "A&B <x>".into();
            r
        })
        .collect();
    let renamed = RecordSet::new(set.shared_schema(), records).unwrap();
    let report = build_teacher_report(&renamed, "A&B <x>", pinned_timestamp(), 0.5).unwrap();
    let svg = render_chart(&report, ChartKind::MarksByCategory);
    roxmltree::Document::parse(&svg).unwrap();
    assert!(svg.contains("A&amp;B &lt;x&gt;"));
}

#[test]
fn outputs_are_deterministic_and_golden() {
    let options = RenderOptions::default();
    let outputs = |r: &TeacherReport| {
        [
            ("teacher1.txt", render_text(r, &options)),
            ("teacher1.csv", render_csv(r, &options)),
            ("teacher1.json", render_json(r)),
            (
                "teacher1-marks.svg",
                render_chart(r, ChartKind::MarksByCategory),
            ),
            (
                "teacher1-intervals.svg",
                render_chart(r, ChartKind::MeanIntervals),
            ),
        ]
    };
    let first = outputs(&report());
    let second = outputs(&report());
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        assert_eq!(a, b, "{name} differs between runs");
        assert_golden(name, a);
    }
}
