//! Canonical JSON: object keys sorted, two-space indentation, every float
//! written with 17 significant digits in exponent form.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Result;

struct Canonical<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident),*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.$name(w)
        })*
    };
}

impl Formatter for Canonical<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value == 0.0 {
            // Normalize negative zero.
            return w.write_all(b"0.0000000000000000e0");
        }
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }

    delegate!(begin_array, end_array, begin_object, end_object);
}

/// Serialize `value` canonically. Going through `serde_json::Value` sorts
/// the keys of every object, including maps and struct fields.
pub fn to_canonical_string<T: Serialize>(value: &T) -> Result<String> {
    let value = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Canonical(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[derive(Serialize)]
    struct Sample {
        zeta: f64,
        alpha: Vec<f64>,
        count: u32,
        map: HashMap<String, f64>,
    }

    #[test]
    fn sorted_keys_and_fixed_floats() {
        let mut map = HashMap::new();
        map.insert("b".to_string(), 1.0 / 3.0);
        map.insert("a".to_string(), -0.0);
        let s = to_canonical_string(&Sample { zeta: 0.1, alpha: vec![1.0, 1e-20, -2.5e7], count: 3, map }).unwrap();
        let expected = r#"{
  "alpha": [
    1.0000000000000000e0,
    9.9999999999999995e-21,
    -2.5000000000000000e7
  ],
  "count": 3,
  "map": {
    "a": 0.0000000000000000e0,
    "b": 3.3333333333333331e-1
  },
  "zeta": 1.0000000000000001e-1
}
"#;
        assert_eq!(s, expected);
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["map"]["b"].as_f64().unwrap(), 1.0 / 3.0);
    }
}
