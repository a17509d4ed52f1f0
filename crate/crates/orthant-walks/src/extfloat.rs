//! Extended-range floating point: an `f64` mantissa in `[1, 2)` with an
//! `i64` binary exponent. Enough for counts like `4^3000` without overflow.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::rational::Rational;

const EXP_MASK: u64 = 0x7ff << 52;

/// `m * 2^e` with `|m|` in `[1, 2)`, or zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtFloat {
    m: f64,
    e: i64,
}

/// `2^k` for `k` in the normal exponent range.
#[inline]
fn pow2(k: i64) -> f64 {
    if k < -1022 {
        0.0
    } else {
        f64::from_bits(((k + 1023) as u64) << 52)
    }
}

#[allow(clippy::should_implement_trait)]
impl ExtFloat {
    pub const ZERO: ExtFloat = ExtFloat { m: 0.0, e: 0 };
    pub const ONE: ExtFloat = ExtFloat { m: 1.0, e: 0 };

    /// Normalizes `m * 2^e` for any finite `m`.
    #[inline]
    pub fn new(m: f64, e: i64) -> Self {
        if m == 0.0 || !m.is_finite() {
            return if m == 0.0 { Self::ZERO } else { Self { m, e } };
        }
        let bits = m.to_bits();
        let raw = ((bits & EXP_MASK) >> 52) as i64;
        if raw == 0 {
            // subnormal mantissa: rescale first
            return Self::new(m * pow2(60), e - 60);
        }
        let mant = f64::from_bits((bits & !EXP_MASK) | (1023u64 << 52));
        Self { m: mant, e: e + raw - 1023 }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::new(x, 0)
    }

    pub fn from_bigint(n: &BigInt) -> Self {
        let bits = n.bits();
        if bits <= 1000 {
            return Self::from_f64(n.to_f64().unwrap_or(f64::NAN));
        }
        let shift = bits - 64;
        let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
        Self::new(top, shift as i64)
    }

    pub fn from_rational(r: &Rational) -> Self {
        Self::from_bigint(r.numer()).div(Self::from_bigint(r.denom()))
    }

    /// `exp(x)` for any finite `x`.
    pub fn from_ln(x: f64) -> Self {
        let k = (x / std::f64::consts::LN_2).floor();
        let rest = x - k * std::f64::consts::LN_2;
        Self::new(rest.exp(), k as i64)
    }

    pub fn mantissa(self) -> f64 {
        self.m
    }

    pub fn exponent(self) -> i64 {
        self.e
    }

    pub fn is_zero(self) -> bool {
        self.m == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.m.is_finite()
    }

    pub fn ln(self) -> f64 {
        self.m.ln() + self.e as f64 * std::f64::consts::LN_2
    }

    pub fn log10(self) -> f64 {
        self.ln() / std::f64::consts::LN_10
    }

    /// Nearest `f64`; overflows to infinity and underflows to zero.
    pub fn to_f64(self) -> f64 {
        if self.e > 1023 {
            return self.m.signum() * f64::INFINITY;
        }
        if self.e < -1074 {
            return 0.0;
        }
        if self.e < -1022 {
            return self.m * pow2(self.e + 60) * pow2(-60);
        }
        self.m * pow2(self.e)
    }

    #[inline]
    pub fn mul(self, o: Self) -> Self {
        Self::new(self.m * o.m, self.e + o.e)
    }

    pub fn div(self, o: Self) -> Self {
        Self::new(self.m / o.m, self.e - o.e)
    }

    #[inline]
    pub fn add(self, o: Self) -> Self {
        if self.m == 0.0 {
            return o;
        }
        if o.m == 0.0 {
            return self;
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let d = lo.e - hi.e;
        if d < -60 {
            return hi;
        }
        Self::new(hi.m + lo.m * pow2(d), hi.e)
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(Self { m: -o.m, e: o.e })
    }

    pub fn powi(self, n: u64) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            k >>= 1;
        }
        acc
    }

    /// Ratio as an `f64`, exact in range even when both sides overflow `f64`.
    pub fn ratio(self, o: Self) -> f64 {
        self.div(o).to_f64()
    }

    /// Decimal scientific notation with `digits` significant digits.
    pub fn to_decimal(self, digits: usize) -> String {
        if self.m == 0.0 {
            return "0".into();
        }
        if !self.m.is_finite() {
            return format!("{}", self.m);
        }
        let digits = digits.max(1);
        // exact dyadic value M * 2^k with integer M
        let m_int = (self.m.abs() * pow2(52)) as u64;
        let k = self.e - 52;
        let (dstr, mut dexp) = if k >= 0 {
            ((BigInt::from(m_int) << (k as usize)).to_string(), 0i64)
        } else {
            let five = num_traits::pow(BigInt::from(5), (-k) as usize);
            ((BigInt::from(m_int) * five).to_string(), k)
        };
        let bytes: Vec<u8> = dstr.bytes().map(|b| b - b'0').collect();
        dexp += bytes.len() as i64 - 1;
        let mut kept: Vec<u8> = bytes.iter().take(digits).copied().collect();
        kept.resize(digits, 0);
        if bytes.len() > digits && bytes[digits] >= 5 {
            let mut i = digits;
            loop {
                if i == 0 {
                    kept.insert(0, 1);
                    kept.pop();
                    dexp += 1;
                    break;
                }
                i -= 1;
                if kept[i] == 9 {
                    kept[i] = 0;
                } else {
                    kept[i] += 1;
                    break;
                }
            }
        }
        while kept.len() > 1 && *kept.last().unwrap() == 0 {
            kept.pop();
        }
        let mut s = String::new();
        if self.m < 0.0 {
            s.push('-');
        }
        s.push((b'0' + kept[0]) as char);
        if kept.len() > 1 {
            s.push('.');
            s.extend(kept[1..].iter().map(|d| (b'0' + d) as char));
        }
        if dexp != 0 {
            s.push_str(&format!("e{dexp}"));
        }
        s
    }
}

impl PartialOrd for ExtFloat {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        let d = self.sub(*o);
        d.m.partial_cmp(&0.0)
    }
}

impl fmt::Display for ExtFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(15))
    }
}

impl Serialize for ExtFloat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal(15))
    }
}

/// Exact conversion check helper for tests and diagnostics.
pub fn relative_error(approx: ExtFloat, exact: &Rational) -> f64 {
    if exact.is_zero() {
        return if approx.is_zero() { 0.0 } else { f64::INFINITY };
    }
    let e = ExtFloat::from_rational(exact);
    approx.sub(e).div(e).to_f64().abs()
}

impl From<f64> for ExtFloat {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl ExtFloat {
    pub fn is_negative(self) -> bool {
        self.m < 0.0
    }

    pub fn abs(self) -> Self {
        Self { m: self.m.abs(), e: self.e }
    }
}
