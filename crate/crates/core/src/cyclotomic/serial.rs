use super::CycloElement;
use crate::arith::{fmt_rat, parse_rat, Rational};
use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct CycloJson {
    conductor: u64,
    coeffs: Vec<String>,
}

impl Serialize for CycloElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let x = self.minimal();
        CycloJson { conductor: x.conductor(), coeffs: x.coeffs().iter().map(fmt_rat).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycloElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CycloJson::deserialize(d)?;
        let coeffs: Option<Vec<Rational>> = j.coeffs.iter().map(|c| parse_rat(c)).collect();
        let coeffs = coeffs.ok_or_else(|| serde::de::Error::custom("bad rational coefficient"))?;
        build(j.conductor, coeffs).map_err(serde::de::Error::custom)
    }
}

fn build(n: u64, coeffs: Vec<Rational>) -> Result<CycloElement> {
    if n == 0 {
        return Err(Error::Parse("conductor must be positive".into()));
    }
    let phi = crate::arith::euler_phi(n) as usize;
    if coeffs.len() != phi {
        return Err(Error::Parse(format!("conductor {n} needs {phi} coefficients, got {}", coeffs.len())));
    }
    Ok(CycloElement::from_coeffs(n, &coeffs))
}

impl std::str::FromStr for CycloElement {
    type Err = Error;

    /// Parses `cyclo(N; c0, c1, ...)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected cyclo(N; c0, ...), got {s:?}"));
        let body = s.trim().strip_prefix("cyclo(").and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let (n, rest) = body.split_once(';').ok_or_else(bad)?;
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let coeffs: Option<Vec<Rational>> = rest.split(',').map(parse_rat).collect();
        build(n, coeffs.ok_or_else(bad)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json_round_trip() {
        let x = CycloElement::zeta(12).lift(24).add(&CycloElement::from_rational(&crate::arith::rat(1, 3)));
        let t = x.to_string();
        assert!(t.starts_with("cyclo(12; 1/3, 1,"));
        let back: CycloElement = t.parse().unwrap();
        assert_eq!(back, x);
        let j = serde_json::to_string(&x).unwrap();
        let y: CycloElement = serde_json::from_str(&j).unwrap();
        assert_eq!(y, x);
        assert_eq!(serde_json::to_value(CycloElement::from_int(-1)).unwrap()["coeffs"][0], "-1");
    }
}
