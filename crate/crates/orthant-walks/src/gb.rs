//! Closed-form asymptotics of the weighted Gouyou-Beauchamps family
//! `(1,0) -> a, (-1,0) -> 1/a, (-1,1) -> b/a, (1,-1) -> a/b`.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::ops::Neg;

use num_traits::{FromPrimitive, Num, One, Signed};
use serde::Serialize;

use crate::classify::UniversalityClass;
use crate::error::{Error, Result};
use crate::extfloat::ExtFloat;
use crate::rational::{exact_sqrt, format_rational, int, ln_rational, rat, to_f64, Rational};

/// Parameters of the family and a start point `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GbParams {
    pub a: Rational,
    pub b: Rational,
    pub i: u32,
    pub j: u32,
}

impl GbParams {
    pub fn new(a: Rational, b: Rational, i: u32, j: u32) -> Result<Self> {
        if !a.is_positive() || !b.is_positive() {
            return Err(Error::InvalidArgument("a and b must be positive".into()));
        }
        Ok(Self { a, b, i, j })
    }

    pub fn origin(a: Rational, b: Rational) -> Result<Self> {
        Self::new(a, b, 0, 0)
    }
}

/// The nine closed-form cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GbClass {
    Balanced,
    Free,
    Reluctant,
    Directed1,
    Directed2,
    Axial1,
    Axial2,
    Transitional1,
    Transitional2,
}

impl Serialize for GbClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl GbClass {
    pub const ALL: [GbClass; 9] = [
        GbClass::Balanced,
        GbClass::Free,
        GbClass::Reluctant,
        GbClass::Directed1,
        GbClass::Directed2,
        GbClass::Axial1,
        GbClass::Axial2,
        GbClass::Transitional1,
        GbClass::Transitional2,
    ];

    /// Coarse label shared with the general classifier.
    pub fn family(self) -> UniversalityClass {
        match self {
            GbClass::Balanced => UniversalityClass::Balanced,
            GbClass::Free => UniversalityClass::Free,
            GbClass::Reluctant => UniversalityClass::Reluctant,
            GbClass::Directed1 | GbClass::Directed2 => UniversalityClass::Directed,
            GbClass::Axial1 | GbClass::Axial2 => UniversalityClass::Axial,
            GbClass::Transitional1 | GbClass::Transitional2 => UniversalityClass::Transitional,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GbClass::Balanced => "balanced",
            GbClass::Free => "free",
            GbClass::Reluctant => "reluctant",
            GbClass::Directed1 => "directed-1",
            GbClass::Directed2 => "directed-2",
            GbClass::Axial1 => "axial-1",
            GbClass::Axial2 => "axial-2",
            GbClass::Transitional1 => "transitional-1",
            GbClass::Transitional2 => "transitional-2",
        }
    }

    pub fn alpha(self) -> Rational {
        match self {
            GbClass::Balanced => int(2),
            GbClass::Free => int(0),
            GbClass::Reluctant => int(5),
            GbClass::Directed1 | GbClass::Directed2 => rat(3, 2),
            GbClass::Axial1 | GbClass::Axial2 => rat(1, 2),
            GbClass::Transitional1 | GbClass::Transitional2 => int(3),
        }
    }

    /// Whether `rho` or `V` involve `sqrt(b)`.
    pub fn uses_sqrt_b(self) -> bool {
        matches!(self, GbClass::Directed1 | GbClass::Axial2)
    }

    /// Whether the harmonic function depends on the parity of `n + i`.
    pub fn has_parity(self) -> bool {
        matches!(self, GbClass::Reluctant | GbClass::Directed1 | GbClass::Transitional2)
    }
}

impl fmt::Display for GbClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Class, growth and exponent of a parameter pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GbClassification {
    pub class: GbClass,
    pub rho: f64,
    #[serde(with = "crate::rational::serde_str::opt")]
    pub rho_exact: Option<Rational>,
    #[serde(with = "crate::rational::serde_str")]
    pub alpha: Rational,
}

fn require_positive(a: &Rational, b: &Rational) -> Result<()> {
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::InvalidArgument("a and b must be positive".into()));
    }
    Ok(())
}

/// Region test following the closed-form conditions, checked in a fixed order.
pub fn gb_class(a: &Rational, b: &Rational) -> Result<GbClass> {
    require_positive(a, b)?;
    let one = Rational::one();
    let a2 = a * a;
    let class = if a.is_one() && b.is_one() {
        GbClass::Balanced
    } else if a == b && *a > one {
        GbClass::Axial1
    } else if *b == a2 && *b > one {
        GbClass::Axial2
    } else if *b < a2 && a < b {
        GbClass::Free
    } else if *b > one && *b > a2 {
        GbClass::Directed1
    } else if *a > one && a > b {
        GbClass::Directed2
    } else if a.is_one() && *b < one {
        GbClass::Transitional1
    } else if b.is_one() && *a < one {
        GbClass::Transitional2
    } else if *a < one && *b < one {
        GbClass::Reluctant
    } else {
        unreachable!("the regions cover the open quadrant")
    };
    Ok(class)
}

pub fn gb_classify(a: &Rational, b: &Rational) -> Result<GbClassification> {
    let class = gb_class(a, b)?;
    let rho_exact = rho_exact(class, a, b);
    let rho = match &rho_exact {
        Some(r) => to_f64(r),
        None => rho_float(class, to_f64(a), to_f64(b)),
    };
    Ok(GbClassification { class, rho, rho_exact, alpha: class.alpha() })
}

fn rho_generic<F: Field>(class: GbClass, a: &F, b: &F, c: &F) -> F {
    let one = F::one();
    let two = F::from_i64(2).expect("small");
    match class {
        GbClass::Balanced | GbClass::Reluctant | GbClass::Transitional1 | GbClass::Transitional2 => {
            F::from_i64(4).expect("small")
        }
        GbClass::Free => (one.clone() + b.clone()) * (a.clone() * a.clone() + b.clone()) / (a.clone() * b.clone()),
        GbClass::Directed2 | GbClass::Axial1 => {
            (one.clone() + a.clone()) * (one + a.clone()) / a.clone()
        }
        GbClass::Directed1 | GbClass::Axial2 => two * (b.clone() + one) / c.clone(),
    }
}

fn rho_exact(class: GbClass, a: &Rational, b: &Rational) -> Option<Rational> {
    let c = if class.uses_sqrt_b() { exact_sqrt(b)? } else { Rational::one() };
    Some(rho_generic(class, a, b, &c))
}

fn rho_float(class: GbClass, a: f64, b: f64) -> f64 {
    rho_generic(class, &a, &b, &b.sqrt())
}

/// Arithmetic shared by the exact and floating evaluations.
pub trait Field: Clone + Num + Neg<Output = Self> + FromPrimitive + PartialEq {}

impl<T: Clone + Num + Neg<Output = T> + FromPrimitive + PartialEq> Field for T {}

fn powz<F: Field>(x: &F, e: i64) -> F {
    let p = num_traits::pow(x.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        F::one() / p
    } else {
        p
    }
}

fn k<F: Field>(n: i64) -> F {
    F::from_i64(n).expect("small integer")
}

/// Harmonic function `V^{[n]}(i, j)` of a class, zero off the quadrant.
/// `c` must be `sqrt(b)`; `n_odd` selects the parity of `n`.
pub fn harmonic<F: Field>(class: GbClass, a: &F, b: &F, c: &F, i: i64, j: i64, n_odd: bool) -> F {
    if i < 0 || j < 0 {
        return F::zero();
    }
    let one = F::one();
    let sign: F = if (i % 2 == 1) ^ n_odd { -one.clone() } else { one.clone() };
    let (fi, fj) = (k::<F>(i), k::<F>(j));
    let poly = (fj.clone() + one.clone())
        * (fi.clone() + one.clone())
        * (fi.clone() + k(3) + k::<F>(2) * fj.clone())
        * (fi.clone() + fj.clone() + k(2));
    match class {
        GbClass::Balanced => poly / k(6),
        GbClass::Free => {
            let aj1 = powz(a, 1 + j);
            let bj1 = powz(b, 1 + j);
            let aij2 = powz(a, 2 + i + j);
            let bij2 = powz(b, 2 + i + j);
            let first = (aj1.clone() - one.clone())
                * (aj1.clone() + one.clone())
                * (aij2.clone() - bij2.clone())
                * (aij2.clone() + bij2)
                * powz(b, -i - 1);
            let second = (aij2.clone() - one.clone()) * (aij2 + one) * (aj1.clone() - bj1.clone()) * (aj1 + bj1);
            powz(a, -(4 + 2 * i + 2 * j)) * powz(b, -(2 + 2 * j)) * (first - second)
        }
        GbClass::Reluctant => {
            let ab = a.clone() * b.clone();
            let a2b2 = ab.clone() * ab.clone();
            let a2b = a.clone() * a.clone() * b.clone();
            let even = (a2b2.clone() + a2b.clone() - k::<F>(4) * ab.clone() + b.clone() + one.clone())
                / powz(&(a.clone() - one.clone()), 4);
            let odd = (a2b2 + a2b + k::<F>(4) * ab + b.clone() + one.clone()) / powz(&(a.clone() + one), 4);
            poly / (powz(a, i) * powz(b, j)) * (even + sign * odd)
        }
        GbClass::Directed1 => {
            let num = powz(b, 3 + i + 2 * j) * (fi.clone() + one.clone())
                + (powz(b, 1 + j) - powz(b, 2 + i + j)) * (fi.clone() + k(3) + k::<F>(2) * fj)
                - fi
                - one.clone();
            let den = powz(a, i) * powz(c, i) * powz(b, 2 * j);
            let dm = c.clone() - a.clone();
            let dp = c.clone() + a.clone();
            num / den * (one.clone() / (dm.clone() * dm) + sign / (dp.clone() * dp))
        }
        GbClass::Directed2 => {
            (fi.clone() + fj.clone() + k(2)) * (powz(a, -2 - j) - powz(a, j)) * powz(b, -j) * powz(a, -1 - i)
                + (fj + one.clone()) * (one - powz(a, -4 - 2 * i - 2 * j)) * powz(b, -j) * powz(a, j)
        }
        GbClass::Axial1 => {
            (fj.clone() + one.clone()) * (one.clone() - powz(b, -2 * (2 + i + j)))
                + powz(b, -i - 1) * (fi + k(2) + fj) * (powz(b, -2 * (1 + j)) - one)
        }
        GbClass::Axial2 => {
            (powz(a, 6) - powz(a, -2 * i - 4 * j)) * (fi.clone() + one)
                + (powz(a, 2 - 2 * i - 2 * j) - powz(a, 4 - 2 * j)) * (fi + k(3) + k::<F>(2) * fj)
        }
        GbClass::Transitional1 => poly * powz(b, -j),
        GbClass::Transitional2 => {
            let dm = one.clone() - a.clone();
            let dp = one.clone() + a.clone();
            powz(a, -i) * poly * (one / (dm.clone() * dm) + sign / (dp.clone() * dp))
        }
    }
}

/// Constant in front of the harmonic function.
pub fn kappa(class: GbClass, a: f64, b: f64) -> f64 {
    let sp = PI.sqrt();
    match class {
        GbClass::Balanced => 8.0 / PI,
        GbClass::Free => 1.0,
        GbClass::Reluctant => 64.0 / (PI * (b - 1.0).powi(4)),
        GbClass::Directed1 => 2f64.sqrt() / (sp * b * b),
        GbClass::Directed2 => (a + 1.0).powi(3) * a.sqrt() / (2.0 * sp * (a - b).powi(2)),
        GbClass::Axial1 => (b + 1.0) / (b * PI).sqrt(),
        GbClass::Axial2 => 2f64.sqrt() / (a.powi(6) * sp),
        GbClass::Transitional1 => 16.0 / (3.0 * PI * (1.0 - b).powi(2)),
        GbClass::Transitional2 => 8.0 / (3.0 * PI),
    }
}

/// `kappa` and the two parity values of `V` at the start point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaV {
    pub class: GbClass,
    pub kappa: f64,
    /// Value for even `n`.
    pub v_even: f64,
    /// Value for odd `n`.
    pub v_odd: f64,
    #[serde(with = "crate::rational::serde_str::opt")]
    pub v_even_exact: Option<Rational>,
    #[serde(with = "crate::rational::serde_str::opt")]
    pub v_odd_exact: Option<Rational>,
}

pub fn gb_kappa_v(p: &GbParams) -> Result<KappaV> {
    let class = gb_class(&p.a, &p.b)?;
    let (i, j) = (p.i as i64, p.j as i64);
    let (af, bf) = (to_f64(&p.a), to_f64(&p.b));
    let root = if class.uses_sqrt_b() { exact_sqrt(&p.b) } else { Some(Rational::one()) };
    let exact = root.map(|c| {
        (
            harmonic(class, &p.a, &p.b, &c, i, j, false),
            harmonic(class, &p.a, &p.b, &c, i, j, true),
        )
    });
    let (v_even, v_odd) = match &exact {
        Some((e, o)) => (to_f64(e), to_f64(o)),
        None => {
            let c = bf.sqrt();
            (harmonic(class, &af, &bf, &c, i, j, false), harmonic(class, &af, &bf, &c, i, j, true))
        }
    };
    let (v_even_exact, v_odd_exact) = match exact {
        Some((e, o)) => (Some(e), Some(o)),
        None => (None, None),
    };
    Ok(KappaV { class, kappa: kappa(class, af, bf), v_even, v_odd, v_even_exact, v_odd_exact })
}

/// Everything needed to evaluate `kappa V^{[n]} rho^n n^{-alpha}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticEstimate {
    pub class: GbClass,
    pub kappa: f64,
    pub v_even: f64,
    pub v_odd: f64,
    pub rho: f64,
    #[serde(with = "crate::rational::serde_str::opt")]
    pub rho_exact: Option<Rational>,
    #[serde(with = "crate::rational::serde_str")]
    pub alpha: Rational,
    #[serde(skip)]
    ln_rho: f64,
}

impl AsymptoticEstimate {
    pub fn new(p: &GbParams) -> Result<Self> {
        let kv = gb_kappa_v(p)?;
        let c = gb_classify(&p.a, &p.b)?;
        let ln_rho = c.rho_exact.as_ref().map(ln_rational).unwrap_or_else(|| c.rho.ln());
        Ok(Self {
            class: c.class,
            kappa: kv.kappa,
            v_even: kv.v_even,
            v_odd: kv.v_odd,
            rho: c.rho,
            rho_exact: c.rho_exact,
            alpha: c.alpha,
            ln_rho,
        })
    }

    pub fn v(&self, n: u64) -> f64 {
        if n.is_multiple_of(2) {
            self.v_even
        } else {
            self.v_odd
        }
    }

    /// Leading term at length `n`, in log space to avoid overflow.
    pub fn at(&self, n: u64) -> Result<ExtFloat> {
        if n < 1 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let scale = n as f64 * self.ln_rho - to_f64(&self.alpha) * (n as f64).ln();
        Ok(ExtFloat::from_f64(self.kappa * self.v(n)).mul(ExtFloat::from_ln(scale)))
    }
}

pub fn gb_estimate(p: &GbParams, n: u64) -> Result<ExtFloat> {
    AsymptoticEstimate::new(p)?.at(n)
}

/// Leading term of excursions from `(i, j)` back to the origin.
pub fn gb_excursion_estimate(p: &GbParams, n: u64) -> Result<ExtFloat> {
    require_positive(&p.a, &p.b)?;
    if n < 1 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if (n + p.i as u64) % 2 == 1 {
        return Ok(ExtFloat::ZERO);
    }
    let (i, j) = (p.i as f64, p.j as f64);
    let c = 128.0 * (j + 1.0) * (1.0 + i) * (3.0 + i + 2.0 * j) * (2.0 + i + j) / PI;
    let weight = -(p.i as f64) * ln_rational(&p.a) - (p.j as f64) * ln_rational(&p.b);
    let scale = n as f64 * 4f64.ln() - 5.0 * (n as f64).ln() + weight;
    Ok(ExtFloat::from_f64(c).mul(ExtFloat::from_ln(scale)))
}

/// Outcome of the harmonicity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicityReport {
    pub class: GbClass,
    pub exact: bool,
    pub checked: usize,
    pub failures: usize,
    pub max_relative_residual: f64,
}

#[allow(clippy::too_many_arguments)]
fn harmonicity_terms<F: Field>(class: GbClass, a: &F, b: &F, c: &F, rho: &F, i: i64, j: i64, n_odd: bool) -> (F, F) {
    let v = |x: i64, y: i64| harmonic(class, a, b, c, x, y, n_odd);
    let lhs = rho.clone() * harmonic(class, a, b, c, i, j, !n_odd);
    let rhs = F::one() / a.clone() * v(i - 1, j)
        + b.clone() / a.clone() * v(i - 1, j + 1)
        + a.clone() * v(i + 1, j)
        + a.clone() / b.clone() * v(i + 1, j - 1);
    (lhs, rhs)
}

/// Checks `rho V^{[n+1]}(i,j) = sum over steps of weighted V^{[n]}` for
/// `0 <= i, j <= grid` and both parities of `n`.
pub fn harmonicity_report(a: &Rational, b: &Rational, grid: u32) -> Result<HarmonicityReport> {
    let class = gb_class(a, b)?;
    let g = grid as i64;
    let mut checked = 0;
    let mut failures = 0;
    let mut worst = 0f64;
    // only the classes whose V involves sqrt(b) need it to be rational
    let exact_root = if class.uses_sqrt_b() { exact_sqrt(b) } else { Some(Rational::one()) };
    for i in 0..=g {
        for j in 0..=g {
            for n_odd in [false, true] {
                checked += 1;
                let ok = match &exact_root {
                    Some(c) => {
                        let rho = rho_generic(class, a, b, c);
                        let (l, r) = harmonicity_terms(class, a, b, c, &rho, i, j, n_odd);
                        l == r
                    }
                    None => {
                        let (af, bf) = (to_f64(a), to_f64(b));
                        let c = bf.sqrt();
                        let rho = rho_generic(class, &af, &bf, &c);
                        let (l, r) = harmonicity_terms(class, &af, &bf, &c, &rho, i, j, n_odd);
                        let rel = (l - r).abs() / l.abs().max(f64::MIN_POSITIVE);
                        worst = worst.max(rel);
                        rel <= 1e-10
                    }
                };
                if !ok {
                    failures += 1;
                }
            }
        }
    }
    Ok(HarmonicityReport { class, exact: exact_root.is_some(), checked, failures, max_relative_residual: worst })
}

pub fn check_harmonicity(a: &Rational, b: &Rational, grid: u32) -> Result<bool> {
    Ok(harmonicity_report(a, b, grid)?.failures == 0)
}

/// Strata of the singular variety carrying critical points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CriticalLabel {
    #[serde(rename = "c1+")]
    C1Plus,
    #[serde(rename = "c1-")]
    C1Minus,
    #[serde(rename = "c12")]
    C12,
    #[serde(rename = "c13+")]
    C13Plus,
    #[serde(rename = "c13-")]
    C13Minus,
    #[serde(rename = "c123")]
    C123,
}

impl fmt::Display for CriticalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CriticalLabel::C1Plus => "c1+",
            CriticalLabel::C1Minus => "c1-",
            CriticalLabel::C12 => "c12",
            CriticalLabel::C13Plus => "c13+",
            CriticalLabel::C13Minus => "c13-",
            CriticalLabel::C123 => "c123",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub label: CriticalLabel,
    pub x: f64,
    pub y: f64,
    pub growth: f64,
    #[serde(with = "crate::rational::serde_str::opt")]
    pub growth_exact: Option<Rational>,
}

pub fn gb_critical_points(a: &Rational, b: &Rational) -> Result<Vec<CriticalPoint>> {
    require_positive(a, b)?;
    let (af, bf) = (to_f64(a), to_f64(b));
    let root = exact_sqrt(b);
    let one = Rational::one();
    let e1 = int(4);
    let e12 = (&one + a) * (&one + a) / a;
    let e13 = root.as_ref().map(|c| int(2) * (b + &one) / c);
    let e123 = (b + &one) * (a * a + b) / (a * b);
    let e13f = 2.0 * (bf + 1.0) / bf.sqrt();
    let pt = |label, x, y, e: Option<Rational>, ef: f64| CriticalPoint {
        label,
        x,
        y,
        growth: e.as_ref().map(to_f64).unwrap_or(ef),
        growth_exact: e,
    };
    Ok(vec![
        pt(CriticalLabel::C1Plus, af, bf, Some(e1.clone()), 4.0),
        pt(CriticalLabel::C1Minus, -af, bf, Some(e1), 4.0),
        pt(CriticalLabel::C12, 1.0, bf / af, Some(e12), 0.0),
        pt(CriticalLabel::C13Plus, af / bf.sqrt(), 1.0, e13.clone(), e13f),
        pt(CriticalLabel::C13Minus, -af / bf.sqrt(), 1.0, e13, e13f),
        pt(CriticalLabel::C123, 1.0, 1.0, Some(e123), 0.0),
    ])
}

/// Labels of the contributing critical points.
pub fn gb_contributing(a: &Rational, b: &Rational) -> Result<BTreeSet<CriticalLabel>> {
    require_positive(a, b)?;
    let one = Rational::one();
    let a2 = a * a;
    let mut out = BTreeSet::new();
    if *a <= one && *b <= one {
        out.insert(CriticalLabel::C1Plus);
        out.insert(CriticalLabel::C1Minus);
    }
    if *a > one && a >= b {
        out.insert(CriticalLabel::C12);
    }
    if *b > one && *b >= a2 {
        out.insert(CriticalLabel::C13Plus);
        out.insert(CriticalLabel::C13Minus);
    }
    // b > a > sqrt(b) > 1
    if b > a && a2 > *b && *b > one {
        out.insert(CriticalLabel::C123);
    }
    Ok(out)
}

impl fmt::Display for GbClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rho = self.rho_exact.as_ref().map(format_rational).unwrap_or_else(|| self.rho.to_string());
        write!(f, "{} rho={} alpha={}", self.class, rho, format_rational(&self.alpha))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(a: Rational, b: Rational) -> GbClassification {
        gb_classify(&a, &b).unwrap()
    }

    #[test]
    fn classification_examples() {
        let c = classify(int(1), int(1));
        assert_eq!((c.class, c.rho_exact, c.alpha), (GbClass::Balanced, Some(int(4)), int(2)));
        let c = classify(int(2), int(3));
        assert_eq!((c.class, c.rho_exact, c.alpha), (GbClass::Free, Some(rat(14, 3)), int(0)));
        let c = classify(rat(1, 2), rat(1, 2));
        assert_eq!((c.class, c.rho_exact, c.alpha), (GbClass::Reluctant, Some(int(4)), int(5)));
        assert!(gb_classify(&int(0), &int(1)).is_err());
    }

    #[test]
    fn representatives_land_in_their_classes() {
        let reps = [
            (int(1), int(1), GbClass::Balanced),
            (int(2), int(3), GbClass::Free),
            (rat(1, 2), rat(1, 2), GbClass::Reluctant),
            (int(1), int(4), GbClass::Directed1),
            (int(3), int(2), GbClass::Directed2),
            (int(2), int(2), GbClass::Axial1),
            (int(2), int(4), GbClass::Axial2),
            (int(1), rat(1, 2), GbClass::Transitional1),
            (rat(1, 2), int(1), GbClass::Transitional2),
        ];
        for (a, b, want) in reps {
            assert_eq!(gb_class(&a, &b).unwrap(), want, "({a},{b})");
        }
    }

    #[test]
    fn harmonic_values_at_origin() {
        let kv = gb_kappa_v(&GbParams::origin(int(1), int(1)).unwrap()).unwrap();
        assert_eq!(kv.v_even_exact, Some(int(1)));
        assert!((kv.kappa - 8.0 / PI).abs() < 1e-15);
        let kv = gb_kappa_v(&GbParams::new(int(1), int(1), 1, 0).unwrap()).unwrap();
        assert_eq!(kv.v_even_exact, Some(int(4)));
        let kv = gb_kappa_v(&GbParams::origin(rat(1, 2), int(1)).unwrap()).unwrap();
        assert_eq!(kv.class, GbClass::Transitional2);
        assert_eq!(kv.v_even_exact, Some(rat(80, 3)));
        assert_eq!(kv.v_odd_exact, Some(rat(64, 3)));
        assert!((kv.kappa - 8.0 / (3.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn parity_free_classes_have_equal_values() {
        for (a, b) in [(int(1), int(1)), (int(2), int(3)), (int(3), int(2)), (int(2), int(2)), (int(2), int(4)), (int(1), rat(1, 2))] {
            for (i, j) in [(0, 0), (1, 0), (2, 3)] {
                let kv = gb_kappa_v(&GbParams::new(a.clone(), b.clone(), i, j).unwrap()).unwrap();
                assert!(!kv.class.has_parity());
                assert_eq!(kv.v_even_exact, kv.v_odd_exact);
            }
        }
    }

    #[test]
    fn harmonicity_small_cases() {
        assert!(check_harmonicity(&int(1), &int(1), 4).unwrap());
        assert!(check_harmonicity(&rat(1, 2), &rat(1, 2), 4).unwrap());
        // irrational sqrt(b): floating path
        let r = harmonicity_report(&int(1), &int(3), 6).unwrap();
        assert!(!r.exact);
        assert_eq!(r.checked, 98);
        assert!(harmonicity_report(&rat(1, 2), &rat(1, 2), 3).unwrap().exact);
        assert_eq!(r.failures, 0);
    }

    #[test]
    fn excursion_constants() {
        let p = GbParams::origin(int(1), int(1)).unwrap();
        let n = 100u64;
        let want = 768.0 / PI * 4f64.powi(100) / (n as f64).powi(5);
        assert!((gb_excursion_estimate(&p, n).unwrap().to_f64() / want - 1.0).abs() < 1e-12);
        assert!(gb_excursion_estimate(&p, 101).unwrap().is_zero());
        let q = GbParams::new(int(2), int(3), 1, 1).unwrap();
        // odd n + i is required from (1, 1)
        assert!(gb_excursion_estimate(&q, n).unwrap().is_zero());
        let want = 2048.0 / PI * 4f64.powi(101) / 101f64.powi(5);
        let got = gb_excursion_estimate(&q, 101).unwrap().to_f64();
        assert!((got / want - 1.0).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn estimate_is_positive_at_one() {
        for class_rep in [(int(1), int(1)), (int(2), int(3)), (rat(1, 2), rat(1, 2)), (int(1), int(4))] {
            let p = GbParams::origin(class_rep.0, class_rep.1).unwrap();
            let e = gb_estimate(&p, 1).unwrap();
            assert!(e.to_f64() > 0.0 && e.is_finite());
        }
        assert!(gb_estimate(&GbParams::origin(int(1), int(1)).unwrap(), 0).is_err());
    }

    #[test]
    fn critical_points_and_contributions() {
        let pts = gb_critical_points(&int(1), &int(1)).unwrap();
        assert!(pts.iter().all(|p| p.growth_exact == Some(int(4))));
        let pts = gb_critical_points(&int(2), &int(3)).unwrap();
        assert_eq!(pts[5].growth_exact, Some(rat(14, 3)));
        use CriticalLabel::*;
        assert_eq!(gb_contributing(&rat(1, 2), &rat(1, 2)).unwrap(), [C1Plus, C1Minus].into());
        assert_eq!(gb_contributing(&int(3), &int(2)).unwrap(), [C12].into());
        assert_eq!(gb_contributing(&int(2), &int(3)).unwrap(), [C123].into());
    }

    fn exact_v(class: GbClass, a: &Rational, b: &Rational, i: i64, j: i64) -> Rational {
        let c = if class.uses_sqrt_b() { exact_sqrt(b).unwrap() } else { Rational::one() };
        harmonic(class, a, b, &c, i, j, false)
    }

    /// Points at distance about `d` from `(1, 1)` inside each class region.
    fn near_one(class: GbClass, d: &Rational) -> (Rational, Rational) {
        let one = Rational::one();
        let up = &one + d;
        let down = &one - d;
        match class {
            GbClass::Balanced => (one.clone(), one),
            GbClass::Free => (up.clone(), &one + d * rat(3, 2)),
            GbClass::Reluctant => (down.clone(), down),
            GbClass::Directed1 => (one, &up * &up),
            GbClass::Directed2 => (up, one),
            GbClass::Axial1 => (up.clone(), up),
            GbClass::Axial2 => (up.clone(), &up * &up),
            GbClass::Transitional1 => (one, down),
            GbClass::Transitional2 => (down, one),
        }
    }

    fn universal_deviation(class: GbClass, d: &Rational) -> f64 {
        let (a, b) = near_one(class, d);
        assert_eq!(gb_class(&a, &b).unwrap(), class);
        let v00 = exact_v(class, &a, &b, 0, 0);
        let mut worst = 0f64;
        for i in 0..=4 {
            for j in 0..=4 {
                let ratio = exact_v(class, &a, &b, i, j) / &v00;
                let limit = exact_v(GbClass::Balanced, &int(1), &int(1), i, j);
                worst = worst.max(to_f64(&(ratio / limit - int(1))).abs());
            }
        }
        worst
    }

    #[test]
    fn harmonic_functions_share_the_balanced_limit() {
        for class in GbClass::ALL.into_iter().filter(|c| *c != GbClass::Balanced) {
            let far = universal_deviation(class, &rat(1, 10_000));
            let mid = universal_deviation(class, &rat(1, 1_000_000));
            let near = universal_deviation(class, &rat(1, 100_000_000));
            assert!(near <= 1e-6, "{class}: {near}");
            // first-order convergence in the distance
            assert!(far / mid > 50.0 && far / mid < 200.0, "{class}: {far} {mid}");
        }
    }

    #[test]
    fn growth_matches_contributing_points() {
        let grid: Vec<Rational> = [rat(1, 4), rat(1, 2), int(1), rat(3, 2), int(2), int(3), int(4), int(9), rat(9, 4)].into();
        for a in &grid {
            for b in &grid {
                let c = gb_classify(a, b).unwrap();
                let pts = gb_critical_points(a, b).unwrap();
                let labels = gb_contributing(a, b).unwrap();
                assert!(!labels.is_empty(), "({a},{b})");
                for p in pts.iter().filter(|p| labels.contains(&p.label)) {
                    assert!((p.growth / c.rho - 1.0).abs() < 1e-14, "({a},{b}) {}", p.label);
                }
                let g = |l| pts.iter().find(|p| p.label == l).unwrap().growth;
                use CriticalLabel::*;
                let tol = 1e-12;
                assert!(g(C1Plus) <= g(C12) + tol && g(C12) <= g(C123) + tol);
                assert!(g(C1Plus) <= g(C13Plus) + tol && g(C13Plus) <= g(C123) + tol);
            }
        }
    }
}
