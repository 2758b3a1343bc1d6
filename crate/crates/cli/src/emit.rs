//! JSON and CSV rendering, and writes that never leave a partial file.

use std::io::{self, Write};
use std::path::Path;

use onecopy_core::{ScanRow, ScanSeries};
use serde::{Deserialize, Serialize};

use crate::args::Destination;

pub const TOOL_VERSION: &str = concat!("onecopy ", env!("CARGO_PKG_VERSION"));
pub const CSV_HEADER: &str = "L,e1_cont_bits,E1_bits,entropy_bits,ln_absdet_T,rms_term_bits";

/// A report with the version of the tool that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Emitted<T> {
    pub tool_version: String,
    #[serde(flatten)]
    pub report: T,
}

impl<T> Emitted<T> {
    pub fn new(report: T) -> Self {
        Emitted {
            tool_version: TOOL_VERSION.to_string(),
            report,
        }
    }
}

/// Compact JSON with every float written to 17 significant digits.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(report: &T) -> serde_json::Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    Emitted::new(report).serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

fn csv_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v < 0.0 { "-inf" } else { "inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn csv_row(r: &ScanRow) -> String {
    format!(
        "{},{},{},{},{},{}",
        r.block_len,
        csv_float(r.e1_cont_bits),
        csv_float(r.e1_bits),
        csv_float(r.entropy_bits),
        csv_float(r.ln_absdet_t),
        csv_float(r.rms_term_bits)
    )
}

pub fn to_csv(series: &ScanSeries) -> Vec<u8> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &series.rows {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out.into_bytes()
}

/// Writes `bytes` to stdout, or to a sibling temporary file renamed over `path`.
pub fn write_output(bytes: &[u8], destination: &Destination, stdout: &mut dyn Write) -> io::Result<()> {
    match destination {
        Destination::Stdout => {
            stdout.write_all(bytes)?;
            stdout.flush()
        }
        Destination::File(path) => write_atomic(path, bytes),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
