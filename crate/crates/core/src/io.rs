//! Matrix input, atomic file output and the tabular formats.
//!
//! Floats are written in their shortest round-trip form.

use std::io::Write;
use std::path::Path;

use crate::asymptotics::AsymptoticsTable;
use crate::dynamics::ReturnRecord;
use crate::error::{Error, Result};
use crate::symplectic::Mat4;

/// 16 whitespace-separated reals, row-major in `(φ, s, ρ, u)` order.
pub fn parse_matrix(text: &str) -> Result<Mat4> {
    let entries = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("`{t}` is not a real number")))
        })
        .collect::<Result<Vec<_>>>()?;
    Mat4::from_row_major(&entries)
}

pub fn read_matrix_file(path: &Path) -> Result<Mat4> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

/// Writes through a temporary file in the target directory, then renames it
/// over `path`, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| Error::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub const ASYMPTOTICS_HEADER: [&str; 8] = [
    "n",
    "x1",
    "x2",
    "x1_model",
    "x2_model",
    "ratio1",
    "ratio2",
    "classification",
];

/// The table as CSV plus a trailing `#` summary line.
pub fn asymptotics_csv(table: &AsymptoticsTable) -> Result<Vec<u8>> {
    let rows = table.rows.iter().map(|r| {
        vec![
            r.n.to_string(),
            fmt_f64(r.x1),
            fmt_f64(r.x2),
            fmt_f64(r.x1_model),
            fmt_f64(r.x2_model),
            fmt_f64(r.ratio1),
            fmt_f64(r.ratio2),
            r.classification.to_string(),
        ]
    });
    let mut out = csv_bytes(&ASYMPTOTICS_HEADER, rows)?;
    out.extend_from_slice(asymptotics_summary(table).as_bytes());
    out.push(b'\n');
    Ok(out)
}

pub fn asymptotics_summary(table: &AsymptoticsTable) -> String {
    match table.last() {
        Some(r) => format!(
            "# ratio2 at n={}: {}; ratio1 at n={}: {}; sign of x1 against n*nu*Delta/d22: {}",
            r.n,
            fmt_f64(r.ratio2),
            r.n,
            fmt_f64(r.ratio1),
            match table.x1_sign {
                1 => "+",
                -1 => "-",
                _ => "mixed",
            }
        ),
        None => "# empty table".to_string(),
    }
}

/// One JSON object per line.
pub fn itinerary_jsonl(records: &[ReturnRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

/// `step,phi,s,rho,u,n` with one row per entry point and a final row for the last exit point.
pub fn orbit_csv(records: &[ReturnRecord]) -> Result<Vec<u8>> {
    let row = |step: usize, z: crate::symplectic::Vec4, n: u32| {
        let mut v = vec![step.to_string()];
        v.extend(z.to_array().map(fmt_f64));
        v.push(n.to_string());
        v
    };
    let mut rows: Vec<Vec<String>> = records
        .iter()
        .enumerate()
        .map(|(k, r)| row(k, r.entry_point, r.n))
        .collect();
    if let Some(last) = records.last() {
        rows.push(row(records.len(), last.exit_point, 0));
    }
    csv_bytes(&["step", "phi", "s", "rho", "u", "n"], rows)
}
