//! Numeric text formatting shared by all artifacts.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

/// Scientific notation with 17 significant digits; non-finite values are
/// written as `NaN`, `inf` or `-inf`.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// An `f64` that serializes to JSON with 17 significant digits (`null` when
/// not finite).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Sig17 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Option::<f64>::deserialize(deserializer).map(|v| Sig17(v.unwrap_or(f64::NAN)))
    }
}

pub(crate) fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    Sig17(*x).serialize(s)
}

pub(crate) fn ser_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    x.map(Sig17).serialize(s)
}

pub(crate) fn ser_vec_f64<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|&v| Sig17(v)))
}

pub(crate) fn ser_matrix_f64<S: Serializer>(x: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|row| row.iter().map(|&v| Sig17(v)).collect::<Vec<_>>()))
}
