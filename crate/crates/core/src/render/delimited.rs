use super::{fixed, RenderOptions};
use crate::stats::{Frequencies, TeacherReport};

fn count_columns(freq: &Frequencies) -> impl Iterator<Item = String> + '_ {
    freq.keys().map(|m| format!("no_{m}"))
}

fn std_field(value: Option<f64>, decimals: usize) -> String {
    value.map_or_else(String::new, |v| fixed(v, decimals))
}

/// Two CSV blocks separated by a blank line: items, then categories and TOTAL.
/// An absent deviation is an empty field.
pub fn render_csv(report: &TeacherReport, options: &RenderOptions) -> String {
    let (md, sd) = (options.mean_decimals, options.std_decimals);
    let mut writer = block_writer();

    let header = ["item", "category", "n", "min", "max", "medium", "std_dev"]
        .map(String::from)
        .into_iter()
        .chain(count_columns(&report.total.freq));
    writer.write_record(header).unwrap();
    for item in &report.item_stats {
        let row = [
            item.item_index.to_string(),
            item.category_id.to_string(),
            item.n.to_string(),
            item.min_mark.to_string(),
            item.max_mark.to_string(),
            fixed(item.mean, md),
            std_field(item.sample_std_dev, sd),
        ]
        .into_iter()
        .chain(item.freq.values().map(u64::to_string));
        writer.write_record(row).unwrap();
    }
    let mut out = finish(writer);
    out.push('\n');

    let mut writer = block_writer();

    let header = ["category", "n", "min", "max", "medium", "std_dev"]
        .map(String::from)
        .into_iter()
        .chain(count_columns(&report.total.freq));
    writer.write_record(header).unwrap();
    for row in report
        .category_stats
        .iter()
        .chain(std::iter::once(&report.total))
    {
        let fields = [
            row.scope.to_string(),
            row.pooled_n.to_string(),
            row.min_mark.to_string(),
            row.max_mark.to_string(),
            fixed(row.mean, md),
            std_field(row.sample_std_dev, sd),
        ]
        .into_iter()
        .chain(row.freq.values().map(u64::to_string));
        writer.write_record(fields).unwrap();
    }
    out.push_str(&finish(writer));
    out
}

fn block_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(writer.into_inner().expect("in-memory CSV flush"))
        .expect("CSV output is UTF-8")
}
