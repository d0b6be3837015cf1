use crate::stats::TeacherReport;

/// Lossless JSON document; keys follow the report's field order.
pub fn render_json(report: &TeacherReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

pub fn parse_report_json(source: &str) -> Result<TeacherReport, serde_json::Error> {
    serde_json::from_str(source)
}
