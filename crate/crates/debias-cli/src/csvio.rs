//! CSV input (samples and covariate-response pairs) and flat CSV exports.

use crate::CliError;
use debias_core::{PairedSample, Sample};
use std::path::Path;

/// Expected input layout, selected by the command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    /// Header `x` (one dimension) or `x1,x2` (two dimensions).
    Points,
    /// Header `x,y`.
    Pairs,
}

pub enum InputData {
    Points(Sample),
    Pairs(PairedSample),
}

pub fn read_csv(path: &Path, kind: InputKind) -> Result<InputData, CliError> {
    if !path.exists() {
        return Err(CliError::MissingFile(format!(
            "input file not found: {}",
            path.display()
        )));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::MissingFile(format!("cannot open {}: {e}", path.display())))?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Malformed(format!("cannot read header: {e}")))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();

    let layout = match (kind, headers.as_slice()) {
        (InputKind::Points, [x]) if x == "x" => 1usize,
        (InputKind::Points, [x1, x2]) if x1 == "x1" && x2 == "x2" => 2,
        (InputKind::Pairs, [x, y]) if x == "x" && y == "y" => 0,
        _ => {
            let want = match kind {
                InputKind::Points => "`x` or `x1,x2`",
                InputKind::Pairs => "`x,y`",
            };
            return Err(CliError::Malformed(format!(
                "unexpected header {:?}; expected {want}",
                headers.join(",")
            )));
        }
    };

    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    let mut bad_lines: Vec<String> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                push_bad(&mut bad_lines, line, &format!("unreadable row: {e}"));
                continue;
            }
        };
        if record.len() != headers.len() {
            push_bad(
                &mut bad_lines,
                line,
                &format!("{} fields, expected {}", record.len(), headers.len()),
            );
            continue;
        }
        let mut row = Vec::with_capacity(headers.len());
        let mut ok = true;
        for field in record.iter() {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    push_bad(&mut bad_lines, line, &format!("non-numeric field {field:?}"));
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            for (col, v) in cols.iter_mut().zip(row) {
                col.push(v);
            }
        }
    }
    if !bad_lines.is_empty() {
        return Err(CliError::Malformed(format!(
            "{} malformed row(s):\n  {}",
            bad_lines.len(),
            bad_lines.join("\n  ")
        )));
    }

    let built = match layout {
        1 => Sample::from_1d(cols.swap_remove(0)).map(InputData::Points),
        2 => {
            let x2 = cols.pop().unwrap();
            let x1 = cols.pop().unwrap();
            let pts = x1.into_iter().zip(x2).map(|(a, b)| [a, b]).collect();
            Sample::from_2d(pts).map(InputData::Points)
        }
        _ => {
            let y = cols.pop().unwrap();
            let x = cols.pop().unwrap();
            PairedSample::new(x, y).map(InputData::Pairs)
        }
    };
    built.map_err(|e| CliError::Malformed(format!("invalid data: {e}")))
}

fn push_bad(bad: &mut Vec<String>, line: usize, why: &str) {
    if bad.len() < 10 {
        bad.push(format!("line {line}: {why}"));
    } else if bad.len() == 10 {
        bad.push("... (additional malformed rows suppressed)".into());
    }
}

/// Writes the flat CSV export next to the JSON document.
pub fn write_csv_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    writer
        .write_record(header)
        .map_err(|e| CliError::Io(format!("csv write failed: {e}")))?;
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writer
            .write_record(&fields)
            .map_err(|e| CliError::Io(format!("csv write failed: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Io(format!("csv write failed: {e}")))?;
    Ok(())
}
