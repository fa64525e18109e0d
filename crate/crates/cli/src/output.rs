//! Tabular output: '#'-prefixed metadata block, one header line,
//! tab-separated rows, 17 significant digits, written atomically
//! (temp file + rename) so partial files never appear.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// 17 significant digits: exact round-trip at double precision. Non-finite
/// values serialize as the stable token `nan`.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".to_string()
    }
}

pub fn atomic_write(path: &Path, content: &str) -> Result<(), CliError> {
    let io_err = |source: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let tmp: PathBuf = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp).map_err(io_err)?;
        file.write_all(content.as_bytes()).map_err(io_err)?;
        file.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

/// Render a table: metadata lines (already '#'-prefixed), a header, rows of
/// pre-formatted cells.
pub fn render_table(metadata: &[String], header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for line in metadata {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&header.join("\t"));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

pub fn write_table(
    path: &Path,
    metadata: &[String],
    header: &[String],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    atomic_write(path, &render_table(metadata, header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for &x in &[0.0, 1.0, std::f64::consts::PI, 1.0 / 3.0, -2.5e-17] {
            let parsed: f64 = fmt_float(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits());
        }
        assert_eq!(fmt_float(f64::NAN), "nan");
    }

    #[test]
    fn table_layout() {
        let text = render_table(
            &["# meta".to_string()],
            &["t".to_string(), "P".to_string()],
            &[vec!["0".to_string(), "1".to_string()]],
        );
        assert_eq!(text, "# meta\nt\tP\n0\t1\n");
    }
}
