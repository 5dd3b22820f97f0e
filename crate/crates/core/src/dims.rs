//! Dimension formulas for spaces of theta-series modular forms, evaluated exactly.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DimFormula {
    /// `dim [Γ_g[4,8], 2]`
    #[serde(rename = "4-8")]
    Level48,
    /// `C(2^g+3, 4)`
    #[serde(rename = "2-4")]
    Level24,
    /// `(2^g+1)(2^{g−1}+1)/3`
    #[serde(rename = "2")]
    Level2,
}

impl std::str::FromStr for DimFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4-8" => Ok(Self::Level48),
            "2-4" => Ok(Self::Level24),
            "2" => Ok(Self::Level2),
            other => Err(Error::Parse(format!("unknown formula {other:?}, expected 4-8, 2-4 or 2"))),
        }
    }
}

mod decimal {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

mod rationals {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?.iter().map(|x| x.parse().map_err(D::Error::custom)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimReport {
    pub genus: u32,
    pub formula: DimFormula,
    #[serde(with = "decimal")]
    pub value: BigInt,
    /// the same value along an independent evaluation path
    #[serde(with = "decimal")]
    pub cross_check: BigInt,
    #[serde(with = "rationals")]
    pub mu: Vec<BigRational>,
    #[serde(with = "rationals")]
    pub nu: Vec<BigRational>,
    #[serde(with = "rationals")]
    pub pi: Vec<BigRational>,
    /// `g ∈ {3,…,7}` for the first formula
    pub outside_validity: bool,
}

impl DimReport {
    pub fn paths_agree(&self) -> bool {
        self.value == self.cross_check
    }
}

fn check_genus(g: u32) -> Result<()> {
    if g == 0 {
        return Err(Error::Precondition("genus must be at least 1".into()));
    }
    if g > 64 {
        return Err(Error::ScaleGuard("genus above 64".into()));
    }
    Ok(())
}

/// `2^e` for a possibly negative exponent.
fn pow2(e: i64) -> BigRational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

fn factorial(k: u32) -> BigInt {
    (2..=k).map(BigInt::from).product()
}

/// `C(n, k)` as the falling factorial `n!/(n−k)!` divided by `k!` once at the end.
fn binomial_factorial(n: &BigInt, k: u32) -> BigInt {
    if n < &BigInt::from(k) || n.is_negative() {
        return BigInt::zero();
    }
    let falling: BigInt = (0..k).map(|i| n - BigInt::from(i)).product();
    falling / factorial(k)
}

/// `C(n, k)` as `∏ (n−k+i)/i`, exact at every step.
fn binomial_multiplicative(n: &BigInt, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 1..=k {
        acc = acc * (n - BigInt::from(k) + BigInt::from(i)) / BigInt::from(i);
    }
    acc
}

fn mu(g: u32, i: u32) -> BigRational {
    (1..=i).fold(BigRational::one(), |acc, nu| {
        let num = pow2(2 * (g as i64 - nu as i64 + 1)) - BigRational::one();
        let den = pow2(i as i64 - nu as i64 + 1) - BigRational::one();
        acc * num / den
    })
}

fn nu(g: u32, i: u32) -> BigRational {
    let e = g as i64 - i as i64;
    pow2(e - 1) * (pow2(e) + BigRational::one())
}

fn pi(g: u32, i: u32) -> BigRational {
    let e = g as i64 - i as i64;
    (pow2(e) + BigRational::one()) * (pow2(e - 1) + BigRational::one()) / BigRational::from_integer(BigInt::from(3))
}

fn to_integer(x: &BigRational) -> Result<BigInt> {
    if x.is_integer() {
        Ok(x.to_integer())
    } else {
        Err(Error::Integrality(format!("dimension evaluates to the non-integer {x}")))
    }
}

/// `C(2^{g−1}(2^g+1)+3, 4) − Σ_{i=0}^{2} μᵢ(νᵢ−πᵢ)` with rational intermediates.
pub fn dim_4_8(g: u32) -> Result<DimReport> {
    check_genus(g)?;
    let n = (BigInt::one() << (g - 1)) * ((BigInt::one() << g) + 1) + 3;
    let mus: Vec<BigRational> = (0..=2).map(|i| mu(g, i)).collect();
    let nus: Vec<BigRational> = (0..=2).map(|i| nu(g, i)).collect();
    let pis: Vec<BigRational> = (0..=2).map(|i| pi(g, i)).collect();
    let correction = (0..3).fold(BigRational::zero(), |acc, i| acc + &mus[i] * (&nus[i] - &pis[i]));
    let value = to_integer(&(BigRational::from_integer(binomial_multiplicative(&n, 4)) - &correction))?;
    let cross_check = to_integer(&(BigRational::from_integer(binomial_factorial(&n, 4)) - &correction))?;
    Ok(DimReport {
        genus: g,
        formula: DimFormula::Level48,
        value,
        cross_check,
        mu: mus,
        nu: nus,
        pi: pis,
        outside_validity: (3..=7).contains(&g),
    })
}

/// `C(2^g+3, 4)`.
pub fn dim_2_4(g: u32) -> Result<DimReport> {
    check_genus(g)?;
    let n = (BigInt::one() << g) + 3;
    Ok(DimReport {
        genus: g,
        formula: DimFormula::Level24,
        value: binomial_multiplicative(&n, 4),
        cross_check: binomial_factorial(&n, 4),
        mu: vec![],
        nu: vec![],
        pi: vec![],
        outside_validity: false,
    })
}

/// `(2^g+1)(2^{g−1}+1)/3`.
pub fn dim_2(g: u32) -> Result<DimReport> {
    check_genus(g)?;
    let product: BigInt = ((BigInt::one() << g) + 1) * ((BigInt::one() << (g - 1)) + 1);
    let (value, rem) = product.div_rem(&BigInt::from(3));
    if !rem.is_zero() {
        return Err(Error::Integrality(format!("(2^g+1)(2^(g-1)+1) is not divisible by 3 at g = {g}")));
    }
    // π₀ of the first formula is the same number
    let cross_check = to_integer(&pi(g, 0))?;
    Ok(DimReport { genus: g, formula: DimFormula::Level2, value, cross_check, mu: vec![], nu: vec![], pi: vec![], outside_validity: false })
}

pub fn dim(formula: DimFormula, g: u32) -> Result<DimReport> {
    match formula {
        DimFormula::Level48 => dim_4_8(g),
        DimFormula::Level24 => dim_2_4(g),
        DimFormula::Level2 => dim_2(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_genus_values() {
        assert_eq!(dim_4_8(1).unwrap().value, BigInt::from(14));
        assert_eq!(dim_4_8(2).unwrap().value, BigInt::from(695));
        assert_eq!(dim_2_4(1).unwrap().value, BigInt::from(5));
        assert_eq!(dim_2_4(2).unwrap().value, BigInt::from(35));
        let d2: Vec<BigInt> = (1..=3).map(|g| dim_2(g).unwrap().value).collect();
        assert_eq!(d2, [2, 5, 15].map(BigInt::from));
    }

    #[test]
    fn genus_one_intermediates_are_fractional() {
        let r = dim_4_8(1).unwrap();
        assert_eq!(r.nu[2], BigRational::new(3.into(), 8.into()));
        assert_eq!(r.pi[2], BigRational::new(5.into(), 8.into()));
        assert!(r.mu[2].is_zero());
    }

    #[test]
    fn excluded_genera_are_flagged() {
        assert!(!dim_4_8(2).unwrap().outside_validity);
        assert!(dim_4_8(3).unwrap().outside_validity);
        assert!(dim_4_8(7).unwrap().outside_validity);
        assert!(!dim_4_8(8).unwrap().outside_validity);
    }

    #[test]
    fn genus_eight_paths_agree() {
        let r = dim_4_8(8).unwrap();
        assert!(r.paths_agree());
        assert!(r.value.is_positive());
    }

    #[test]
    fn genus_zero_is_rejected() {
        assert!(dim_2_4(0).is_err());
        assert!(dim_4_8(0).is_err());
        assert!(dim_2(0).is_err());
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = dim_4_8(2).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"value\":\"695\""));
        assert_eq!(serde_json::from_str::<DimReport>(&text).unwrap(), r);
    }
}
