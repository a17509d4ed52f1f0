//! Step sets, points, drift and inventory.

use std::cmp::Ordering;
use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, pow_i, Rational};

/// Lattice point in Z^d.
pub type Point = Vec<i64>;

/// A finite ordered list of distinct steps with positive rational weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepSet {
    dim: usize,
    steps: Vec<Vec<i64>>,
    weights: Vec<Rational>,
}

/// Weighted vector sum of the steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DriftVector(#[serde(with = "crate::rational::serde_str::vec")] pub Vec<Rational>);

#[derive(Serialize, Deserialize)]
struct StepJson {
    v: Vec<i64>,
    w: String,
}

#[derive(Serialize, Deserialize)]
struct StepSetJson {
    dimension: usize,
    steps: Vec<StepJson>,
}

/// Names accepted by [`StepSet::builtin`].
pub const BUILTIN_MODELS: [&str; 4] = ["gb", "tandem", "gessel", "simple"];

impl StepSet {
    pub fn new(dim: usize, steps: Vec<Vec<i64>>, weights: Vec<Rational>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if steps.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} steps but {} weights",
                steps.len(),
                weights.len()
            )));
        }
        let mut seen = HashSet::new();
        for s in &steps {
            if s.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.len() });
            }
            if !seen.insert(s.clone()) {
                return Err(Error::DuplicateStep(s.clone()));
            }
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::NonPositiveWeight(format_rational(w)));
        }
        Ok(Self { dim, steps, weights })
    }

    /// All weights equal to one.
    pub fn unweighted(dim: usize, steps: Vec<Vec<i64>>) -> Result<Self> {
        let w = vec![Rational::one(); steps.len()];
        Self::new(dim, steps, w)
    }

    /// Weights `beta * prod_k alpha_k^{s_k}`.
    pub fn central(dim: usize, steps: Vec<Vec<i64>>, alpha: &[Rational], beta: &Rational) -> Result<Self> {
        if alpha.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: alpha.len() });
        }
        if alpha.iter().chain(std::iter::once(beta)).any(|x| !x.is_positive()) {
            return Err(Error::InvalidArgument("alpha and beta must be positive".into()));
        }
        let weights = steps
            .iter()
            .map(|s| {
                s.iter()
                    .zip(alpha)
                    .fold(beta.clone(), |acc, (&e, a)| acc * pow_i(a, e))
            })
            .collect();
        Self::new(dim, steps, weights)
    }

    /// Built-in two-dimensional families, each weighted by `a^{s1} b^{s2}`.
    pub fn builtin(name: &str, a: &Rational, b: &Rational) -> Result<Self> {
        let steps: Vec<Vec<i64>> = match name {
            "gb" => vec![vec![1, 0], vec![-1, 0], vec![-1, 1], vec![1, -1]],
            "tandem" => vec![vec![1, 0], vec![-1, 1], vec![0, -1]],
            "gessel" => vec![vec![1, 0], vec![-1, 0], vec![1, 1], vec![-1, -1]],
            "simple" => vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]],
            other => return Err(Error::Parse(format!("unknown model {other:?}"))),
        };
        Self::central(2, steps, &[a.clone(), b.clone()], &Rational::one())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: StepSetJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("malformed JSON: {e}")))?;
        let mut steps = Vec::with_capacity(raw.steps.len());
        let mut weights = Vec::with_capacity(raw.steps.len());
        for s in raw.steps {
            steps.push(s.v);
            weights.push(parse_rational(&s.w)?);
        }
        Self::new(raw.dimension, steps, weights)
    }

    pub fn to_json(&self) -> String {
        let raw = StepSetJson {
            dimension: self.dim,
            steps: self
                .steps
                .iter()
                .zip(&self.weights)
                .map(|(v, w)| StepJson { v: v.clone(), w: format_rational(w) })
                .collect(),
        };
        serde_json::to_string(&raw).expect("plain data serializes")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Vec<i64>] {
        &self.steps
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn index_of(&self, step: &[i64]) -> Option<usize> {
        self.steps.iter().position(|s| s == step)
    }

    /// Same steps with new weights.
    pub fn with_weights(&self, weights: Vec<Rational>) -> Result<Self> {
        Self::new(self.dim, self.steps.clone(), weights)
    }

    /// Same steps, all weights one.
    pub fn uniform(&self) -> Self {
        Self { dim: self.dim, steps: self.steps.clone(), weights: vec![Rational::one(); self.len()] }
    }

    /// Reorders steps: new position `k` holds old step `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let steps = perm.iter().map(|&k| self.steps[k].clone()).collect();
        let weights = perm.iter().map(|&k| self.weights[k].clone()).collect();
        Self::new(self.dim, steps, weights)
    }

    /// Largest positive coordinate along each axis over all steps (0 if none).
    pub fn max_up(&self) -> Vec<i64> {
        (0..self.dim)
            .map(|k| self.steps.iter().map(|s| s[k]).max().unwrap_or(0).max(0))
            .collect()
    }

    /// Ratio weighting `a_s / a'_s`.
    pub fn ratio(&self, other: &StepSet) -> Result<Self> {
        if self.dim != other.dim || self.steps != other.steps {
            return Err(Error::StepListsDiffer);
        }
        let w = self.weights.iter().zip(&other.weights).map(|(a, b)| a / b).collect();
        Self::new(self.dim, self.steps.clone(), w)
    }
}

/// Parses either step-set JSON or a built-in spec such as `gb --a 2 --b 3`.
pub fn parse_stepset(text: &str) -> Result<StepSet> {
    let t = text.trim();
    if t.starts_with('{') {
        return StepSet::from_json(t);
    }
    let mut words = t.split_whitespace();
    let name = words.next().ok_or_else(|| Error::Parse("empty model description".into()))?;
    let mut a = Rational::one();
    let mut b = Rational::one();
    while let Some(flag) = words.next() {
        let value = words
            .next()
            .ok_or_else(|| Error::Parse(format!("missing value for {flag}")))?;
        match flag {
            "--a" => a = parse_rational(value)?,
            "--b" => b = parse_rational(value)?,
            _ => return Err(Error::Parse(format!("unknown parameter {flag}"))),
        }
    }
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::NonPositiveWeight(format!("a={a}, b={b}")));
    }
    StepSet::builtin(name, &a, &b)
}

/// True when every step lies in some closed half-space through the origin.
pub fn is_singular(s: &StepSet) -> bool {
    match s.dim {
        1 => {
            let pos = s.steps.iter().any(|v| v[0] > 0);
            let neg = s.steps.iter().any(|v| v[0] < 0);
            !(pos && neg)
        }
        2 => singular_by_angles(s.steps()),
        _ => singular_by_facets(s.dim, s.steps()),
    }
}

fn half(v: &[i64]) -> u8 {
    if v[1] > 0 || (v[1] == 0 && v[0] > 0) {
        0
    } else {
        1
    }
}

fn cross(a: &[i64], b: &[i64]) -> i128 {
    a[0] as i128 * b[1] as i128 - a[1] as i128 * b[0] as i128
}

/// Planar test: sort directions by angle and look for a gap of at least pi.
pub(crate) fn singular_by_angles(steps: &[Vec<i64>]) -> bool {
    let mut dirs: Vec<[i64; 2]> = steps
        .iter()
        .filter(|v| v[0] != 0 || v[1] != 0)
        .map(|v| {
            let g = num_integer::gcd(v[0], v[1]);
            [v[0] / g, v[1] / g]
        })
        .collect();
    dirs.sort_by(|a, b| {
        half(a)
            .cmp(&half(b))
            .then_with(|| 0i128.cmp(&cross(a, b)))
    });
    dirs.dedup();
    if dirs.len() <= 2 {
        return true;
    }
    (0..dirs.len()).any(|k| cross(&dirs[k], &dirs[(k + 1) % dirs.len()]) <= 0)
}

/// General test: rank deficiency, or a supporting hyperplane spanned by d-1 steps.
pub(crate) fn singular_by_facets(dim: usize, steps: &[Vec<i64>]) -> bool {
    let rows: Vec<Vec<BigInt>> = steps
        .iter()
        .map(|s| s.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    if crate::linalg::rank(&rows, dim) < dim {
        return true;
    }
    let mut chosen = Vec::with_capacity(dim - 1);
    any_subset(steps.len(), dim - 1, 0, &mut chosen, &mut |idx| {
        let sub: Vec<&Vec<BigInt>> = idx.iter().map(|&k| &rows[k]).collect();
        let normal = cofactor_normal(dim, &sub);
        if normal.iter().all(|x| x.is_zero()) {
            return false;
        }
        let signs: Vec<Ordering> = rows
            .iter()
            .map(|r| dot(&normal, r).cmp(&BigInt::zero()))
            .collect();
        signs.iter().all(|o| *o != Ordering::Less) || signs.iter().all(|o| *o != Ordering::Greater)
    })
}

fn any_subset(
    n: usize,
    k: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if chosen.len() == k {
        return f(chosen);
    }
    for i in from..n {
        chosen.push(i);
        if any_subset(n, k, i + 1, chosen, f) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Generalized cross product of d-1 vectors in Z^d.
fn cofactor_normal(dim: usize, vs: &[&Vec<BigInt>]) -> Vec<BigInt> {
    (0..dim)
        .map(|col| {
            let minor: Vec<Vec<BigInt>> = vs
                .iter()
                .map(|v| (0..dim).filter(|&c| c != col).map(|c| v[c].clone()).collect())
                .collect();
            let d = crate::linalg::determinant(&minor);
            if col % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect()
}

/// Weighted vector sum of the steps.
pub fn drift(s: &StepSet) -> DriftVector {
    let mut acc = vec![Rational::zero(); s.dim];
    for (v, w) in s.steps.iter().zip(&s.weights) {
        for (a, &x) in acc.iter_mut().zip(v) {
            *a += w * Rational::from_integer(BigInt::from(x));
        }
    }
    DriftVector(acc)
}

/// Inventory `sum_s w_s prod_k x_k^{s_k}` at a positive real point.
pub fn inventory_eval(s: &StepSet, point: &[f64]) -> Result<f64> {
    check_point(s, point.len())?;
    if point.iter().any(|&x| x.is_nan() || x <= 0.0) {
        return Err(Error::InvalidArgument("coordinates must be strictly positive".into()));
    }
    Ok(s.steps
        .iter()
        .zip(&s.weights)
        .map(|(v, w)| {
            let m: f64 = v.iter().zip(point).map(|(&e, &x)| x.powi(e as i32)).product();
            crate::rational::to_f64(w) * m
        })
        .sum())
}

/// Exact inventory at a positive rational point.
pub fn inventory_eval_exact(s: &StepSet, point: &[Rational]) -> Result<Rational> {
    check_point(s, point.len())?;
    if point.iter().any(|x| !x.is_positive()) {
        return Err(Error::InvalidArgument("coordinates must be strictly positive".into()));
    }
    Ok(s.steps
        .iter()
        .zip(&s.weights)
        .map(|(v, w)| v.iter().zip(point).fold(w.clone(), |acc, (&e, x)| acc * pow_i(x, e)))
        .sum())
}

fn check_point(s: &StepSet, len: usize) -> Result<()> {
    if len != s.dim {
        return Err(Error::DimensionMismatch { expected: s.dim, found: len });
    }
    Ok(())
}
