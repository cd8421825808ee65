//! Canonical text output: JSON with sorted keys and every float written
//! with 17 significant digits, and the matching CSV cell format.
//!
//! Re-reading canonical JSON and writing it again gives the same bytes.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

/// `d.dddddddddddddddde±x`; enough digits to round-trip any `f64`.
pub fn float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

struct Canonical<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for Canonical<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(float(v).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Canonical JSON for an already parsed document, newline-terminated.
pub fn value_to_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let fmt = Canonical {
        inner: PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    v.serialize(&mut ser).expect("writing JSON to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Canonical JSON. Object keys come out sorted because documents pass
/// through [`Value`].
pub fn to_string<T: Serialize + ?Sized>(v: &T) -> serde_json::Result<String> {
    Ok(value_to_string(&serde_json::to_value(v)?))
}

/// Parses any JSON text and writes it back canonically.
pub fn recanonicalize(text: &str) -> serde_json::Result<String> {
    Ok(value_to_string(&serde_json::from_str(text)?))
}

/// Minimal CSV writer for numeric tables; no quoting is ever needed.
#[derive(Debug, Default)]
pub struct Csv {
    out: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Csv::default();
        c.out.push_str(&header.join(","));
        c.out.push('\n');
        c
    }

    pub fn row(&mut self, cells: &[String]) {
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for v in [0.0, 1.0, -2.5, 1.0 / 3.0, 6.02e23, 1e-300, f64::MIN_POSITIVE, f64::MAX] {
            let s = float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn reemission_is_byte_identical() {
        let doc = serde_json::json!({"b": [1.0, 0.1, -3e-7], "a": {"n": 3, "x": null, "s": "ok"}});
        let once = to_string(&doc).unwrap();
        assert_eq!(recanonicalize(&once).unwrap(), once);
        assert!(once.find("\"a\"").unwrap() < once.find("\"b\"").unwrap());
    }

    #[test]
    fn non_finite_becomes_null() {
        let s = to_string(&vec![f64::NAN, f64::INFINITY, 1.0]).unwrap();
        assert_eq!(s.matches("null").count(), 2);
    }
}
