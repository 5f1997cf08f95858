//! Textual encodings of complex numbers: `re+imj` in CSV, `{"re":…,"im":…}` in JSON.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 17 significant digits, enough for an exact binary64 round trip.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{}{:.16e}j", z.re, sign, z.im.abs())
}

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let body = s
        .strip_suffix('j')
        .ok_or_else(|| Error::Parse(format!("complex value {s:?} must end in 'j'")))?;
    // the separator is the last sign that is neither leading nor part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(|| Error::Parse(format!("complex value {s:?} has no imaginary part")))?;
    let re: f64 = body[..split]
        .parse()
        .map_err(|_| Error::Parse(format!("bad real part in {s:?}")))?;
    let im: f64 = body[split..]
        .parse()
        .map_err(|_| Error::Parse(format!("bad imaginary part in {s:?}")))?;
    Ok(Complex64::new(re, im))
}

/// JSON form of a complex number. Plain numbers are accepted on input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonComplex {
    Parts { re: f64, im: f64 },
    Real(f64),
}

impl From<Complex64> for JsonComplex {
    fn from(z: Complex64) -> Self {
        JsonComplex::Parts { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for Complex64 {
    fn from(z: JsonComplex) -> Self {
        match z {
            JsonComplex::Parts { re, im } => Complex64::new(re, im),
            JsonComplex::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

pub fn to_json_vec(v: &[Complex64]) -> Vec<JsonComplex> {
    v.iter().copied().map(JsonComplex::from).collect()
}

pub fn from_json_vec(v: &[JsonComplex]) -> Vec<Complex64> {
    v.iter().copied().map(Complex64::from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        assert_eq!(
            format_complex(Complex64::new(1.0, -0.5)),
            "1.0000000000000000e0-5.0000000000000000e-1j"
        );
        assert_eq!(parse_complex("1e-3+2E+4j").unwrap(), Complex64::new(1e-3, 2e4));
        assert_eq!(parse_complex("-1.5-2j").unwrap(), Complex64::new(-1.5, -2.0));
        assert!(parse_complex("1.0").is_err());
        assert!(parse_complex("3j").is_err());
    }

    #[test]
    fn json_forms() {
        let z: JsonComplex = serde_json::from_str("2.5").unwrap();
        assert_eq!(Complex64::from(z), Complex64::new(2.5, 0.0));
        let z: JsonComplex = serde_json::from_str(r#"{"re":1,"im":-1}"#).unwrap();
        assert_eq!(Complex64::from(z), Complex64::new(1.0, -1.0));
        let s = serde_json::to_string(&JsonComplex::from(Complex64::new(0.5, 2.0))).unwrap();
        assert_eq!(s, r#"{"re":0.5,"im":2.0}"#);
    }

    proptest! {
        #[test]
        fn csv_complex_round_trip(re in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
                                  im in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let z = Complex64::new(re, im);
            let back = parse_complex(&format_complex(z)).unwrap();
            prop_assert_eq!(back.re.to_bits(), re.to_bits());
            prop_assert_eq!(back.im.to_bits(), im.to_bits());
        }
    }
}
