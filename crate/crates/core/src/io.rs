//! Spectrum files, complex literals, matrix input and JSON output with
//! round-trip precision for reals.

use std::f64::consts::TAU;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::geodesic::{wrap_angle, PrimitiveClass, Spectrum};
use crate::lie::Mat4;

pub const CSV_HEADER: [&str; 3] = ["length", "holonomy", "multiplicity"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("domain error at {location}: {message}")]
    Domain { location: String, message: String },
    #[error("{0}")]
    Io(String),
}

impl From<io::Error> for IoError {
    fn from(e: io::Error) -> Self {
        IoError::Io(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` files are JSON; everything else is CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// A parsed spectrum plus warnings about reduced holonomies.
#[derive(Clone, Debug, PartialEq)]
pub struct Parsed {
    pub spectrum: Spectrum,
    pub warnings: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    length: f64,
    holonomy: f64,
    multiplicity: i64,
}

fn to_class(rec: Record, location: String, warnings: &mut Vec<String>) -> Result<PrimitiveClass, IoError> {
    let domain = |message: String| IoError::Domain { location: location.clone(), message };
    if !(rec.length.is_finite() && rec.length > 0.0) {
        return Err(domain(format!("length must be positive, got {}", rec.length)));
    }
    if !rec.holonomy.is_finite() {
        return Err(domain(format!("holonomy must be finite, got {}", rec.holonomy)));
    }
    if rec.multiplicity < 1 || rec.multiplicity > i64::from(u32::MAX) {
        return Err(domain(format!("multiplicity must be a positive 32-bit integer, got {}", rec.multiplicity)));
    }
    let mut holonomy = rec.holonomy;
    if !(0.0..TAU).contains(&holonomy) {
        holonomy = wrap_angle(holonomy);
        warnings.push(format!("{location}: holonomy {} reduced mod 2π to {}", rec.holonomy, format_real(holonomy)));
    }
    PrimitiveClass::new(rec.length, holonomy, rec.multiplicity as u32).map_err(|e| domain(e.to_string()))
}

fn parse_csv(text: &str) -> Result<Parsed, IoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| IoError::Parse { line: 1, message: e.to_string() })?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(IoError::Parse { line: 1, message: format!("header must be `{}`", CSV_HEADER.join(",")) });
    }
    let mut warnings = Vec::new();
    let mut classes = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| IoError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let rec: Record = row.deserialize(None).map_err(|e| IoError::Parse { line, message: e.to_string() })?;
        classes.push(to_class(rec, format!("line {line}"), &mut warnings)?);
    }
    Ok(Parsed { spectrum: Spectrum::from_classes(classes), warnings })
}

fn parse_json(text: &str) -> Result<Parsed, IoError> {
    let records: Vec<Record> =
        serde_json::from_str(text).map_err(|e| IoError::Parse { line: e.line() as u64, message: e.to_string() })?;
    let mut warnings = Vec::new();
    let classes = records
        .into_iter()
        .enumerate()
        .map(|(i, rec)| to_class(rec, format!("record {}", i + 1), &mut warnings))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Parsed { spectrum: Spectrum::from_classes(classes), warnings })
}

/// Parses a spectrum file; duplicates within tolerance are merged.
pub fn parse_spectrum(text: &str, format: Format) -> Result<Parsed, IoError> {
    match format {
        Format::Csv => parse_csv(text),
        Format::Json => parse_json(text),
    }
}

/// A real with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn serialize_spectrum(spec: &Spectrum, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = CSV_HEADER.join(",");
            out.push('\n');
            for c in spec.iter() {
                out.push_str(&format!(
                    "{},{},{}\n",
                    format_real(c.length()),
                    format_real(c.holonomy()),
                    c.multiplicity()
                ));
            }
            out
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                length: f64,
                holonomy: f64,
                multiplicity: u32,
            }
            let rows: Vec<Out> = spec
                .iter()
                .map(|c| Out { length: c.length(), holonomy: c.holonomy(), multiplicity: c.multiplicity() })
                .collect();
            to_json(&rows)
        }
    }
}

/// Parses `RE+IMi`, `RE-IMi`, a bare real or a bare imaginary `IMi`.
pub fn parse_complex(text: &str) -> Result<Complex64, IoError> {
    let err = || IoError::Parse { line: 1, message: format!("invalid complex literal `{text}`") };
    let t = text.trim();
    let real = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
    let Some(body) = t.strip_suffix('i') else {
        return real(t).map(|re| Complex64::new(re, 0.0)).ok_or_else(err);
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (real(&body[..i]).ok_or_else(err)?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "+" | "" => 1.0,
        "-" => -1.0,
        s => real(s.strip_prefix('+').unwrap_or(s)).ok_or_else(err)?,
    };
    Ok(Complex64::new(re, im))
}

/// Reads a 4×4 matrix given as a JSON nested array or as 16 numbers
/// separated by whitespace or commas.
pub fn parse_matrix(text: &str) -> Result<Mat4, IoError> {
    let parse_err = |message: String| IoError::Parse { line: 1, message };
    let rows: [[f64; 4]; 4] = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| IoError::Parse { line: e.line() as u64, message: e.to_string() })?
    } else {
        let values = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| parse_err(format!("invalid number `{s}`"))))
            .collect::<Result<Vec<f64>, _>>()?;
        if values.len() != 16 {
            return Err(parse_err(format!("expected 16 entries, found {}", values.len())));
        }
        std::array::from_fn(|i| std::array::from_fn(|j| values[4 * i + j]))
    };
    Mat4::from_rows(rows).map_err(|e| IoError::Domain { location: "matrix".into(), message: e.to_string() })
}

/// A complex number as `{"re": …, "im": …}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for JsonComplex {
    fn from(z: Complex64) -> Self {
        JsonComplex { re: z.re, im: z.im }
    }
}

pub fn serialize_complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    JsonComplex::from(*z).serialize(s)
}

/// Compact JSON formatter writing every float with 17 significant digits.
struct RoundTrip;

impl serde_json::ser::Formatter for RoundTrip {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_real(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes to a single-line JSON document. Non-finite floats become null.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, RoundTrip);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
