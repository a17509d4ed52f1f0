//! Universality classification of non-singular two-dimensional models.
//!
//! Everything runs on the log-substituted inventory `L(u, v) = S(e^u, e^v)`,
//! which is strictly convex for non-singular models. The cone `Q = {x, y >= 1}`
//! becomes the quadrant `u, v >= 0`.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{drift, is_singular, StepSet};
use crate::rational::{parse_decimal, to_f64, Rational};

const MAX_ITER: usize = 200;
/// Quantities at or below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-8;
/// Quantities in `(ZERO_TOL, AMBIGUOUS_TOL]` cannot be decided.
pub const AMBIGUOUS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UniversalityClass {
    Balanced,
    Axial,
    Free,
    Transitional,
    Directed,
    Reluctant,
}

impl UniversalityClass {
    pub fn name(self) -> &'static str {
        match self {
            UniversalityClass::Balanced => "balanced",
            UniversalityClass::Axial => "axial",
            UniversalityClass::Free => "free",
            UniversalityClass::Transitional => "transitional",
            UniversalityClass::Directed => "directed",
            UniversalityClass::Reluctant => "reluctant",
        }
    }
}

impl fmt::Display for UniversalityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Weighted exponential sum `L(u, v) = sum_s w_s exp(s1 u + s2 v)`.
#[derive(Debug, Clone)]
struct LogInventory {
    terms: Vec<(f64, f64, f64)>,
}

/// Value, gradient and Hessian of `L`.
struct Jet {
    f: f64,
    g: [f64; 2],
    h: [[f64; 2]; 2],
}

impl LogInventory {
    fn new(s: &StepSet) -> Result<Self> {
        if s.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: s.dim() });
        }
        if is_singular(s) {
            return Err(Error::Singular);
        }
        let terms = s
            .steps()
            .iter()
            .zip(s.weights())
            .map(|(st, w)| (to_f64(w), st[0] as f64, st[1] as f64))
            .collect();
        Ok(Self { terms })
    }

    fn value(&self, p: [f64; 2]) -> f64 {
        self.terms.iter().map(|&(w, a, b)| w * (a * p[0] + b * p[1]).exp()).sum()
    }

    fn jet(&self, p: [f64; 2]) -> Jet {
        let mut j = Jet { f: 0.0, g: [0.0; 2], h: [[0.0; 2]; 2] };
        for &(w, a, b) in &self.terms {
            let e = w * (a * p[0] + b * p[1]).exp();
            j.f += e;
            j.g[0] += a * e;
            j.g[1] += b * e;
            j.h[0][0] += a * a * e;
            j.h[0][1] += a * b * e;
            j.h[1][1] += b * b * e;
        }
        j.h[1][0] = j.h[0][1];
        j
    }
}

/// Damped Newton on `L`, restricted to the coordinates in `free`
/// (the others stay at their starting value).
fn newton(l: &LogInventory, start: [f64; 2], free: [bool; 2]) -> Result<[f64; 2]> {
    let mut p = start;
    for _ in 0..MAX_ITER {
        let j = l.jet(p);
        let g = [if free[0] { j.g[0] } else { 0.0 }, if free[1] { j.g[1] } else { 0.0 }];
        if g[0].hypot(g[1]) <= 1e-14 * j.f {
            return Ok(p);
        }
        let d = match free {
            [true, true] => {
                let det = j.h[0][0] * j.h[1][1] - j.h[0][1] * j.h[1][0];
                if det > 0.0 {
                    [
                        -(j.h[1][1] * g[0] - j.h[0][1] * g[1]) / det,
                        -(-j.h[1][0] * g[0] + j.h[0][0] * g[1]) / det,
                    ]
                } else {
                    [-g[0] / j.f, -g[1] / j.f]
                }
            }
            [true, false] => [-g[0] / j.h[0][0], 0.0],
            [false, true] => [0.0, -g[1] / j.h[1][1]],
            [false, false] => return Ok(p),
        };
        if !(d[0].is_finite() && d[1].is_finite()) {
            return Err(Error::NoConvergence(MAX_ITER));
        }
        let slope = g[0] * d[0] + g[1] * d[1];
        let stationary = g[0].hypot(g[1]) <= 1e-12 * j.f;
        // Newton decrement below working precision
        if stationary && -slope <= 1e-24 * j.f {
            return Ok(p);
        }
        let mut t = 1.0;
        let mut next = [p[0] + d[0], p[1] + d[1]];
        // slack for rounding in f near the optimum
        while l.value(next) > j.f + 1e-4 * t * slope + 1e-15 * j.f {
            t *= 0.5;
            if t < 1e-12 {
                return if stationary { Ok(p) } else { Err(Error::NoConvergence(MAX_ITER)) };
            }
            next = [p[0] + t * d[0], p[1] + t * d[1]];
        }
        if next == p {
            return if stationary { Ok(p) } else { Err(Error::NoConvergence(MAX_ITER)) };
        }
        p = next;
    }
    let j = l.jet(p);
    let g = [if free[0] { j.g[0] } else { 0.0 }, if free[1] { j.g[1] } else { 0.0 }];
    if g[0].hypot(g[1]) <= 1e-12 * j.f {
        Ok(p)
    } else {
        Err(Error::NoConvergence(MAX_ITER))
    }
}

/// The unique positive critical point `(x_s, y_s)` of the inventory.
pub fn interior_critical_point(s: &StepSet) -> Result<(f64, f64)> {
    let l = LogInventory::new(s)?;
    let p = newton(&l, [0.0, 0.0], [true, true])?;
    Ok((p[0].exp(), p[1].exp()))
}

/// Second derivatives of `S` in the original coordinates.
fn hessian_xy(s: &StepSet, x: f64, y: f64) -> [f64; 3] {
    let mut h = [0.0; 3];
    for (st, w) in s.steps().iter().zip(s.weights()) {
        let (a, b) = (st[0] as f64, st[1] as f64);
        let m = to_f64(w) * x.powf(a) * y.powf(b);
        h[0] += a * (a - 1.0) * m / (x * x);
        h[1] += a * b * m / (x * y);
        h[2] += b * (b - 1.0) * m / (y * y);
    }
    h
}

/// `c = S_xy / sqrt(S_xx S_yy)` at the interior critical point.
pub fn covariance_factor(s: &StepSet) -> Result<f64> {
    let (x, y) = interior_critical_point(s)?;
    let [sxx, sxy, syy] = hessian_xy(s, x, y);
    Ok(sxy / (sxx * syy).sqrt())
}

/// `p1 = pi / arccos(-c)`.
pub fn p1_from_c(c: f64) -> f64 {
    PI / (-c).acos()
}

/// Minimizer of `S` on `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QMinimum {
    pub x: f64,
    pub y: f64,
    pub s_min: f64,
    /// Projected gradient of `ln S` in log coordinates.
    pub kkt_residual: f64,
}

fn q_minimizer(l: &LogInventory) -> Result<[f64; 2]> {
    let crit = newton(l, [0.0, 0.0], [true, true])?;
    if crit[0] >= 0.0 && crit[1] >= 0.0 {
        return Ok(crit);
    }
    // strictly convex: the minimum sits on one of the two boundary rays
    let on_u = newton(l, [0.0, 0.0], [false, true])?;
    let on_v = newton(l, [0.0, 0.0], [true, false])?;
    let a = [0.0, on_u[1].max(0.0)];
    let b = [on_v[0].max(0.0), 0.0];
    Ok(if l.value(a) <= l.value(b) { a } else { b })
}

fn kkt_residual(l: &LogInventory, p: [f64; 2]) -> f64 {
    let j = l.jet(p);
    (0..2)
        .map(|k| {
            let g = j.g[k] / j.f;
            if p[k] <= 0.0 {
                (-g).max(0.0)
            } else {
                g.abs()
            }
        })
        .fold(0.0, f64::max)
}

pub fn minimize_on_q(s: &StepSet) -> Result<QMinimum> {
    let l = LogInventory::new(s)?;
    let p = q_minimizer(&l)?;
    let kkt = kkt_residual(&l, p);
    if kkt > 1e-10 {
        return Err(Error::NoConvergence(MAX_ITER));
    }
    Ok(QMinimum { x: p[0].exp(), y: p[1].exp(), s_min: l.value(p), kkt_residual: kkt })
}

/// `x1` minimizing `S(x, 1)` and `y1` minimizing `S(1, y)`.
pub fn boundary_minimizers(s: &StepSet) -> Result<(f64, f64)> {
    let l = LogInventory::new(s)?;
    let u = newton(&l, [0.0, 0.0], [true, false])?;
    let v = newton(&l, [0.0, 0.0], [false, true])?;
    Ok((u[0].exp(), v[1].exp()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class: UniversalityClass,
    pub rho: f64,
    pub alpha: f64,
    /// The axial exponent is taken as written, independent of `p1`.
    pub exponent_conjectural: bool,
    pub critical_point: (f64, f64),
    pub minimizer: (f64, f64),
    pub boundary_minimizers: (f64, f64),
    pub covariance: f64,
    pub p1: f64,
    pub kkt_residual: f64,
}

/// `true` if `x` counts as zero, error inside the ambiguity band.
fn is_zero(x: f64, what: &str) -> Result<bool> {
    let a = x.abs();
    if a <= ZERO_TOL {
        Ok(true)
    } else if a <= AMBIGUOUS_TOL {
        Err(Error::Ambiguous(format!("{what} = {x:e} is within the tolerance band")))
    } else {
        Ok(false)
    }
}

pub fn classify(s: &StepSet) -> Result<Classification> {
    let l = LogInventory::new(s)?;
    let crit = newton(&l, [0.0, 0.0], [true, true])?;
    let p = q_minimizer(&l)?;
    let kkt = kkt_residual(&l, p);
    let (x1, y1) = boundary_minimizers(s)?;
    let [sxx, sxy, syy] = hessian_xy(s, crit[0].exp(), crit[1].exp());
    let c = sxy / (sxx * syy).sqrt();
    let p1 = p1_from_c(c);

    let on_u = is_zero(p[0], "u*")?;
    let on_v = is_zero(p[1], "v*")?;
    let j = l.jet(p);
    let gu = is_zero(j.g[0] / j.f, "S_x(x*,y*)")?;
    let gv = is_zero(j.g[1] / j.f, "S_y(x*,y*)")?;
    let s_crit = l.value(crit);
    let s_min = j.f;
    let s_corner = l.value([0.0, 0.0]);

    use UniversalityClass::*;
    let (class, rho, alpha) = match ((on_u, on_v), (gu, gv)) {
        ((true, true), (true, true)) => (Balanced, s_corner, p1 / 2.0),
        ((true, true), (true, false)) | ((true, true), (false, true)) => (Axial, s_corner, 0.5),
        ((true, true), (false, false)) => (Free, s_corner, 0.0),
        ((true, false), (true, true)) | ((false, true), (true, true)) => (Transitional, s_crit, p1 / 2.0 + 1.0),
        ((true, false), _) | ((false, true), _) => (Directed, s_min, 1.5),
        ((false, false), (true, true)) => (Reluctant, s_crit, p1 + 1.0),
        _ => {
            return Err(Error::Ambiguous(format!(
                "minimizer ({}, {}) with gradient ({}, {}) falls in no cell",
                p[0].exp(),
                p[1].exp(),
                j.g[0],
                j.g[1]
            )))
        }
    };
    Ok(Classification {
        class,
        rho,
        alpha,
        exponent_conjectural: class == Axial,
        critical_point: (crit[0].exp(), crit[1].exp()),
        minimizer: (p[0].exp(), p[1].exp()),
        boundary_minimizers: (x1, y1),
        covariance: c,
        p1,
        kkt_residual: kkt,
    })
}

/// Inclusive exact grid `start:stop:step`, e.g. `0.1:4:0.05`.
pub fn parse_range(text: &str) -> Result<Vec<Rational>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, h] = parts.as_slice() else {
        return Err(Error::Parse(format!("range must be start:stop:step, got {text:?}")));
    };
    let (start, stop, step) = (parse_decimal(a)?, parse_decimal(b)?, parse_decimal(h)?);
    if step <= Rational::from_integer(0.into()) || stop < start {
        return Err(Error::InvalidArgument(format!("empty or reversed range {text:?}")));
    }
    let mut out = Vec::new();
    let mut x = start;
    while x <= stop {
        out.push(x.clone());
        x += &step;
    }
    Ok(out)
}

/// One cell of a drift diagram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramRow {
    #[serde(with = "crate::rational::serde_str")]
    pub a: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub b: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub dx: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub dy: Rational,
    /// `None` when the cell could not be decided.
    pub class: Option<UniversalityClass>,
}

/// Classifies a built-in family over the grid `a_values x b_values`, rows ordered by `(a, b)`.
pub fn diagram(model: &str, a_values: &[Rational], b_values: &[Rational]) -> Result<Vec<DiagramRow>> {
    let cells: Vec<(Rational, Rational)> = a_values
        .iter()
        .flat_map(|a| b_values.iter().map(move |b| (a.clone(), b.clone())))
        .collect();
    cells
        .into_par_iter()
        .map(|(a, b)| {
            let s = StepSet::builtin(model, &a, &b)?;
            let d = drift(&s).0;
            let class = match classify(&s) {
                Ok(c) => Some(c.class),
                Err(Error::Ambiguous(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(DiagramRow { a, b, dx: d[0].clone(), dy: d[1].clone(), class })
        })
        .collect()
}

/// CSV rendering of a diagram with decimal coordinates for plotting tools.
pub fn diagram_csv(rows: &[DiagramRow]) -> String {
    let mut out = String::from("a,b,d_x,d_y,class\n");
    for r in rows {
        let class = r.class.map(|c| c.name()).unwrap_or("ambiguous");
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt15(to_f64(&r.a)),
            fmt15(to_f64(&r.b)),
            fmt15(to_f64(&r.dx)),
            fmt15(to_f64(&r.dy)),
            class
        ));
    }
    out
}

/// Shortest decimal with at most 15 significant digits.
pub fn fmt15(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let rounded: f64 = format!("{x:.14e}").parse().unwrap_or(x);
    rounded.to_string()
}
