//! JSON encoding of exact matrices:
//! `{"rows": r, "cols": c, "data": [[...], ...]}` with integers as decimal
//! strings and rationals as `"p/q"` strings. Plain JSON integers are also
//! accepted on input.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use super::matrix::{IntMatrix, Matrix, RatMatrix, Ring};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Wire {
    rows: usize,
    cols: usize,
    data: Vec<Vec<Value>>,
}

pub trait ExactScalar: Ring {
    fn encode(&self) -> String;
    fn decode(v: &Value) -> Result<Self>;
}

fn scalar_text(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.trim().to_string()),
        Value::Number(n) if n.is_i64() || n.is_u64() => Ok(n.to_string()),
        other => Err(Error::Parse(format!("expected an exact number, got {other}"))),
    }
}

impl ExactScalar for BigInt {
    fn encode(&self) -> String {
        self.to_string()
    }

    fn decode(v: &Value) -> Result<Self> {
        let s = scalar_text(v)?;
        BigInt::from_str(&s).map_err(|e| Error::Parse(format!("integer {s:?}: {e}")))
    }
}

impl ExactScalar for BigRational {
    fn encode(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn decode(v: &Value) -> Result<Self> {
        let s = scalar_text(v)?;
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.as_str(), "1"),
        };
        let n = BigInt::from_str(n).map_err(|e| Error::Parse(format!("rational {s:?}: {e}")))?;
        let d = BigInt::from_str(d).map_err(|e| Error::Parse(format!("rational {s:?}: {e}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("rational {s:?} has zero denominator")));
        }
        Ok(BigRational::new(n, d))
    }
}

impl<T: ExactScalar> Matrix<T> {
    pub fn to_json(&self) -> Value {
        let data = (0..self.rows())
            .map(|i| self.row(i).iter().map(|x| Value::String(x.encode())).collect())
            .collect();
        serde_json::to_value(Wire { rows: self.rows(), cols: self.cols(), data })
            .expect("matrix wire format serializes")
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let wire: Wire = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        if wire.data.len() != wire.rows || wire.data.iter().any(|r| r.len() != wire.cols) {
            return Err(Error::Parse(format!(
                "data shape does not match declared {}x{}",
                wire.rows, wire.cols
            )));
        }
        let entries = wire.data.iter().flatten().map(T::decode).collect::<Result<Vec<_>>>()?;
        Matrix::new(wire.rows, wire.cols, entries)
    }
}

impl<T: ExactScalar> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de, T: ExactScalar> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        Self::from_json(&v).map_err(D::Error::custom)
    }
}

/// Parses an integer matrix; rational inputs with unit denominators are accepted.
pub fn int_matrix_from_json(v: &Value) -> Result<IntMatrix> {
    let m = RatMatrix::from_json(v)?;
    m.to_integral().ok_or_else(|| Error::Parse("expected an integral matrix".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn integer_encoding_uses_strings() {
        let m = IntMatrix::from_rows(&[&[1, -2], &[3, 4]]);
        let v = m.to_json();
        assert_eq!(v, json!({"rows": 2, "cols": 2, "data": [["1", "-2"], ["3", "4"]]}));
        assert_eq!(IntMatrix::from_json(&v).unwrap(), m);
    }

    #[test]
    fn rationals_and_plain_numbers() {
        let v = json!({"rows": 1, "cols": 3, "data": [["1/2", 3, "-4/8"]]});
        let m = RatMatrix::from_json(&v).unwrap();
        assert_eq!(m.to_json(), json!({"rows": 1, "cols": 3, "data": [["1/2", "3", "-1/2"]]}));
        assert!(RatMatrix::from_json(&json!({"rows": 1, "cols": 1, "data": [["1/0"]]})).is_err());
        assert!(IntMatrix::from_json(&json!({"rows": 2, "cols": 1, "data": [["1"]]})).is_err());
    }

    #[test]
    fn huge_integers_survive() {
        let big = "123456789012345678901234567890";
        let v = json!({"rows": 1, "cols": 1, "data": [[big]]});
        let m = IntMatrix::from_json(&v).unwrap();
        assert_eq!(m[(0, 0)].to_string(), big);
    }
}
