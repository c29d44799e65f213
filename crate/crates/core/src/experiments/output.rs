use std::fs;
use std::path::Path;

use super::{ExperimentError, Report};

/// CSV text: a `# config: …` line followed by the header and rows.
pub(crate) fn csv_text(
    snapshot: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<String, ExperimentError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).map_err(csv_err)?;
    for row in rows {
        writer.write_record(row).map_err(csv_err)?;
    }
    let body = writer.into_inner().map_err(|e| csv_err(e.into_error().into()))?;
    let body = String::from_utf8(body).expect("utf-8 records");
    Ok(format!("# config: {snapshot}\n{body}"))
}

fn csv_err(e: csv::Error) -> ExperimentError {
    ExperimentError::Io {
        path: "<csv buffer>".into(),
        source: std::io::Error::other(e),
    }
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| ExperimentError::io(&path, e))
}

pub(crate) fn write_report(
    dir: &Path,
    name: &str,
    snapshot: &str,
    report: &Report,
) -> Result<(), ExperimentError> {
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                fmt_f64(c.statistic),
                fmt_f64(c.threshold),
                c.pass.to_string(),
            ]
        })
        .collect();
    let text = csv_text(snapshot, &["name", "statistic", "threshold", "pass"], &rows)?;
    write_file(dir, name, &text)
}

/// Shortest round-trip representation.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_then_rows() {
        let text = csv_text(
            "{\"a\":1}",
            &["x", "y"],
            &[vec!["1".into(), "2.5".into()], vec!["".into(), "a,b".into()]],
        )
        .unwrap();
        assert_eq!(text, "# config: {\"a\":1}\nx,y\n1,2.5\n,\"a,b\"\n");
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -2.0, 1e-300, f64::NAN] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert!(back == x || x.is_nan() && back.is_nan());
        }
    }
}
