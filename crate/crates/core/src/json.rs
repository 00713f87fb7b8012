//! Complex numbers as `{re, im}` objects in serialized output.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::gates::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Cplx {
    fn from(z: C64) -> Self {
        Cplx { re: z.re, im: z.im }
    }
}

impl From<Cplx> for C64 {
    fn from(z: Cplx) -> Self {
        C64::new(z.re, z.im)
    }
}

/// `#[serde(with = "crate::json::complex")]` for a `C64` field.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        Cplx::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Cplx::deserialize(d).map(C64::from)
    }
}

/// `#[serde(with = "crate::json::matrix2")]` for a `[[C64; 2]; 2]` field.
pub mod matrix2 {
    use super::*;

    pub fn serialize<S: Serializer>(m: &[[C64; 2]; 2], s: S) -> Result<S::Ok, S::Error> {
        m.map(|row| row.map(Cplx::from)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[[C64; 2]; 2], D::Error> {
        <[[Cplx; 2]; 2]>::deserialize(d).map(|m| m.map(|row| row.map(C64::from)))
    }
}
