//! JSON wire format. Integers travel as decimal strings so values beyond
//! 2^53 survive; matrices are `{"rows", "cols", "data"}` in row-major order;
//! reals are written with six decimals. Integer inputs may also be given as
//! JSON numbers, real inputs as numbers or strings.

use std::fmt;

use num_bigint::BigInt;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::intalg::{IntMatrix, IntVector};
use crate::lattice::RealMatrix;

pub const REAL_PRECISION: usize = 6;

pub fn format_real(x: f64) -> String {
    format!("{x:.REAL_PRECISION$}")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar {
    Str(String),
    Int(i64),
    UInt(u64),
    Float(f64),
}

impl Scalar {
    fn to_bigint<E: de::Error>(&self) -> Result<BigInt, E> {
        match self {
            Scalar::Str(s) => s
                .trim()
                .parse()
                .map_err(|_| E::custom(format!("not an integer: {s:?}"))),
            Scalar::Int(i) => Ok(BigInt::from(*i)),
            Scalar::UInt(u) => Ok(BigInt::from(*u)),
            Scalar::Float(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => Ok(BigInt::from(*f as i64)),
            Scalar::Float(f) => Err(E::custom(format!("not an integer: {f}"))),
        }
    }

    fn to_f64<E: de::Error>(&self) -> Result<f64, E> {
        let x = match self {
            Scalar::Str(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| E::custom(format!("not a number: {s:?}")))?,
            Scalar::Int(i) => *i as f64,
            Scalar::UInt(u) => *u as f64,
            Scalar::Float(f) => *f,
        };
        if x.is_nan() {
            Err(E::custom("NaN is not accepted"))
        } else {
            Ok(x)
        }
    }
}

#[derive(Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("IntMatrix", 3)?;
        st.serialize_field("rows", &self.rows())?;
        st.serialize_field("cols", &self.cols())?;
        let data: Vec<String> = self.entries().iter().map(|x| x.to_string()).collect();
        st.serialize_field("data", &data)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = MatrixWire::deserialize(d)?;
        let data = w
            .data
            .iter()
            .map(Scalar::to_bigint)
            .collect::<Result<Vec<_>, _>>()?;
        IntMatrix::new(w.rows, w.cols, data).map_err(de::Error::custom)
    }
}

impl Serialize for IntVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(|x| x.to_string()))
    }
}

impl<'de> Deserialize<'de> for IntVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<Scalar>::deserialize(d)?;
        Ok(IntVector::new(
            v.iter().map(Scalar::to_bigint).collect::<Result<_, _>>()?,
        ))
    }
}

impl Serialize for RealMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RealMatrix", 4)?;
        st.serialize_field("rows", &self.rows())?;
        st.serialize_field("cols", &self.cols())?;
        st.serialize_field("precision", &REAL_PRECISION)?;
        let data: Vec<String> = self.entries().iter().map(|&x| format_real(x)).collect();
        st.serialize_field("data", &data)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for RealMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = MatrixWire::deserialize(d)?;
        let data = w
            .data
            .iter()
            .map(Scalar::to_f64)
            .collect::<Result<Vec<_>, _>>()?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(de::Error::custom("real matrix entries must be finite"));
        }
        RealMatrix::new(w.rows, w.cols, data).map_err(de::Error::custom)
    }
}

/// A real number on the wire.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_real(self.0))
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Real(Scalar::deserialize(d)?.to_f64()?))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_real(self.0))
    }
}

pub fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().map(|&x| Real(x)).collect()
}

pub fn unreal(v: &[Real]) -> Vec<f64> {
    v.iter().map(|x| x.0).collect()
}
