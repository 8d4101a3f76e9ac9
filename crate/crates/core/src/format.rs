//! Deterministic numeric text output shared by every CSV writer.

use std::io::Write;

/// Formats a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Writes a header and numeric rows as CSV.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(header)?;
    for row in rows {
        wtr.write_record(row.iter().map(|&v| fmt_f64(v)))?;
    }
    wtr.flush()
}

/// Renders rows to an in-memory CSV string.
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output is ASCII")
}

/// Renders preformatted text records to an in-memory CSV string.
pub fn csv_records(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header).expect("writing to a Vec cannot fail");
    for row in rows {
        wtr.write_record(row).expect("writing to a Vec cannot fail");
    }
    String::from_utf8(wtr.into_inner().expect("flush to a Vec")).expect("csv output is UTF-8")
}
