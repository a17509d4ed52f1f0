//! Exact rational helpers shared by every module.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `n/d` as a rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or an integer string. Decimal points are rejected.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational: {text:?}"));
    let (num, den) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Parses a decimal literal such as `0.05` or `-1.25e1` exactly.
pub fn parse_decimal(text: &str) -> Result<Rational> {
    let t = text.trim();
    if t.contains('/') {
        return parse_rational(t);
    }
    let bad = || Error::Parse(format!("not a decimal: {text:?}"));
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(k) => (&t[..k], t[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{ip}{fp}").parse().map_err(|_| bad())?;
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(digits);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// Canonical string form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Natural log of a positive rational without overflow for huge numerators.
pub fn ln_rational(r: &Rational) -> f64 {
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

pub fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap_or(f64::NAN).abs().ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `r^e` for any integer exponent; `r` must be nonzero when `e < 0`.
pub fn pow_i(r: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(r.clone(), e as usize)
    } else {
        num_traits::pow(r.recip(), (-e) as usize)
    }
}

/// Exact `k`-th root of a nonnegative integer, if it exists.
pub fn exact_root_int(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let r = n.nth_root(k);
    (num_traits::pow(r.clone(), k as usize) == *n).then_some(r)
}

/// Exact `k`-th root of a nonnegative rational, if it is rational.
pub fn exact_root(r: &Rational, k: u32) -> Option<Rational> {
    if k == 0 {
        return None;
    }
    Some(Rational::new(exact_root_int(r.numer(), k)?, exact_root_int(r.denom(), k)?))
}

pub fn exact_sqrt(r: &Rational) -> Option<Rational> {
    exact_root(r, 2)
}

/// Least common multiple of the denominators.
pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Divides an integer vector by the gcd of its entries and fixes the sign
/// of the first nonzero entry to be positive.
pub fn primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return;
    }
    let flip = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    for x in v.iter_mut() {
        *x = &*x / &g;
        if flip {
            *x = -&*x;
        }
    }
}

/// Serde adapter writing rationals as canonical strings.
pub mod serde_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let t = String::deserialize(d)?;
        parse_rational(&t).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::super::{format_rational, Rational};
        use serde::ser::SerializeSeq;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&format_rational(r))?;
            }
            seq.end()
        }
    }

    pub mod opt {
        use super::super::{format_rational, Rational};
        use serde::Serializer;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_str(&format_rational(r)),
                None => s.serialize_none(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for t in ["4", "14/3", "-2/7", "0"] {
            assert_eq!(format_rational(&parse_rational(t).unwrap()), t);
        }
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("0.05").unwrap(), rat(1, 20));
        assert_eq!(parse_decimal("4").unwrap(), int(4));
        assert_eq!(parse_decimal("-1.25e1").unwrap(), rat(-25, 2));
        assert!(parse_decimal("abc").is_err());
    }

    #[test]
    fn roots() {
        assert_eq!(exact_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(exact_sqrt(&int(3)), None);
        assert_eq!(exact_root(&rat(8, 27), 3), Some(rat(2, 3)));
    }

    #[test]
    fn big_logs() {
        let big = Rational::from_integer(num_traits::pow(BigInt::from(4), 2000));
        let want = 2000.0 * 4f64.ln();
        assert!((ln_rational(&big) - want).abs() < 1e-9 * want);
    }
}
