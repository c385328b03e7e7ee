//! JSON map specifications.

use super::{blaschke, qb, QbPoint, RationalMap};
use crate::error::{Error, Result};
use crate::poly::C64;
use serde::{Deserialize, Serialize};

/// A complex number as `[re, im]` or a bare real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexRepr> for C64 {
    fn from(c: ComplexRepr) -> Self {
        match c {
            ComplexRepr::Real(x) => C64::new(x, 0.0),
            ComplexRepr::Pair([x, y]) => C64::new(x, y),
        }
    }
}

impl From<C64> for ComplexRepr {
    fn from(z: C64) -> Self {
        ComplexRepr::Pair([z.re, z.im])
    }
}

pub(crate) mod complex_vec {
    use super::ComplexRepr;
    use crate::poly::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let r: Vec<ComplexRepr> = v.iter().map(|&z| z.into()).collect();
        r.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let r: Vec<ComplexRepr> = Vec::deserialize(d)?;
        Ok(r.into_iter().map(Into::into).collect())
    }
}

/// `{"type":"poly","coeffs":[…]}`, `{"type":"blaschke","a":[…]}` or `{"type":"qb","a":[…],"b":[…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MapSpec {
    Poly {
        #[serde(with = "complex_vec")]
        coeffs: Vec<C64>,
    },
    Blaschke {
        #[serde(with = "complex_vec")]
        a: Vec<C64>,
    },
    Qb {
        #[serde(with = "complex_vec")]
        a: Vec<C64>,
        #[serde(with = "complex_vec")]
        b: Vec<C64>,
    },
}

impl MapSpec {
    pub fn build(&self) -> Result<RationalMap> {
        match self {
            MapSpec::Poly { coeffs } => RationalMap::polynomial(coeffs.clone()),
            MapSpec::Blaschke { a } => blaschke(a),
            MapSpec::Qb { a, b } => qb(&QbPoint::new(a.clone(), b.clone())?),
        }
    }

    pub fn qb_point(&self) -> Result<QbPoint> {
        match self {
            MapSpec::Qb { a, b } => QbPoint::new(a.clone(), b.clone()),
            _ => Err(Error::InvalidInput("expected a qb map spec".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_variants() {
        let p: MapSpec = serde_json::from_str(r#"{"type":"poly","coeffs":[0,0,1]}"#).unwrap();
        let f = p.build().unwrap();
        assert_eq!(f.degree(), 2);
        let b: MapSpec = serde_json::from_str(r#"{"type":"blaschke","a":[[0.5,0]]}"#).unwrap();
        assert!((b.build().unwrap().eval(C64::new(1.0, 0.0)) - 1.0).norm() < 1e-15);
        let q: MapSpec =
            serde_json::from_str(r#"{"type":"qb","a":[[0.3,0.1]],"b":[0.2]}"#).unwrap();
        assert_eq!(q.qb_point().unwrap().b, vec![C64::new(0.2, 0.0)]);
        assert!(serde_json::from_str::<MapSpec>(r#"{"type":"qb","a":[[1,0]],"b":[0]}"#)
            .unwrap()
            .build()
            .is_err());
    }

    #[test]
    fn roundtrip() {
        let q = MapSpec::Qb {
            a: vec![C64::new(0.3, 0.1)],
            b: vec![C64::new(0.2, 0.0)],
        };
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, r#"{"type":"qb","a":[[0.3,0.1]],"b":[[0.2,0.0]]}"#);
        assert_eq!(serde_json::from_str::<MapSpec>(&s).unwrap(), q);
    }
}
