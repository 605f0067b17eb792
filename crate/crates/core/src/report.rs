//! JSON emission shared by the state file and the reports.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which round-trips
//! every finite `f64` exactly.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

pub const SCHEMA_VERSION: &str = "bineg-report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Compact formatter that prints floats with 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
pub struct Sig17Formatter;

impl Formatter for Sig17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` to a JSON string using [`Sig17Formatter`].
pub fn to_json_string<S: Serialize + ?Sized>(value: &S) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// A complex matrix as separate real and imaginary row arrays.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix<T: Real>(m: &ComplexMatrix<T>) -> Self {
        let rows = 0..m.rows();
        let re = rows.clone().map(|i| (0..m.cols()).map(|j| m[(i, j)].re.as_f64()).collect()).collect();
        let im = rows.map(|i| (0..m.cols()).map(|j| m[(i, j)].im.as_f64()).collect()).collect();
        Self { re, im }
    }
}

/// A complex vector as separate real and imaginary arrays.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct VectorJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl VectorJson {
    pub fn from_slice<T: Real>(v: &[crate::scalar::C<T>]) -> Self {
        Self { re: v.iter().map(|z| z.re.as_f64()).collect(), im: v.iter().map(|z| z.im.as_f64()).collect() }
    }
}
