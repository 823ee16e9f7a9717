//! Fixed-precision CSV output.

use std::io::{self, Write};

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_rows<W: Write + ?Sized>(w: &mut W, header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> io::Result<()> {
    writeln!(w, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.into_iter().map(num).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
