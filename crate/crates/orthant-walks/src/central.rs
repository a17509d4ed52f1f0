//! Central weightings: the step matrix, path pairs, exact centrality tests
//! and the monomial solution for (alpha, beta).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::{is_singular, StepSet};
use crate::linalg;
use crate::rational::{format_rational, lcm_denominators, ln_rational, pow_i, Rational};

/// Rows `(s_1, ..., s_d, 1)`, one per step in list order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepMatrix {
    pub rows: Vec<Vec<i64>>,
}

impl StepMatrix {
    fn big_rows(&self) -> Vec<Vec<BigInt>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }
}

pub fn step_matrix(s: &StepSet) -> StepMatrix {
    StepMatrix {
        rows: s
            .steps()
            .iter()
            .map(|v| v.iter().copied().chain(std::iter::once(1)).collect())
            .collect(),
    }
}

/// Exact rank of the step matrix and whether it equals `d + 1`.
pub fn rank_full(s: &StepSet) -> (usize, bool) {
    let r = linalg::rank(&step_matrix(s).big_rows(), s.dim() + 1);
    (r, r == s.dim() + 1)
}

/// Two walks with the same length and endpoint; the first uses `target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathPair {
    pub target: usize,
    /// `(step index, multiplicity)` including the target step.
    pub with_target: Vec<(usize, u64)>,
    /// `(step index, multiplicity)` drawn from the basis only.
    pub without_target: Vec<(usize, u64)>,
    pub endpoint: Vec<i64>,
    pub length: u64,
}

impl PathPair {
    /// `prod_{p_s} a_r` and `prod_{p'_s} a_r` under the given weights.
    pub fn products(&self, weights: &[Rational]) -> (Rational, Rational) {
        let prod = |side: &[(usize, u64)]| {
            side.iter()
                .fold(Rational::one(), |acc, &(k, m)| acc * pow_i(&weights[k], m as i64))
        };
        (prod(&self.with_target), prod(&self.without_target))
    }

    pub fn holds(&self, weights: &[Rational]) -> bool {
        let (l, r) = self.products(weights);
        l == r
    }

    pub fn describe(&self, s: &StepSet) -> String {
        let side = |v: &[(usize, u64)]| {
            v.iter()
                .map(|&(k, m)| {
                    let name = format!("a{:?}", s.steps()[k]);
                    if m == 1 {
                        name
                    } else {
                        format!("{name}^{m}")
                    }
                })
                .collect::<Vec<_>>()
                .join("*")
        };
        let (l, r) = self.products(s.weights());
        format!(
            "{} = {} ({} vs {})",
            side(&self.with_target),
            side(&self.without_target),
            format_rational(&l),
            format_rational(&r)
        )
    }
}

/// The basis `T` together with one path pair per step outside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathPairs {
    pub basis: Vec<usize>,
    pub pairs: Vec<PathPair>,
}

fn require_nonsingular(s: &StepSet) -> Result<()> {
    if is_singular(s) {
        return Err(Error::Singular);
    }
    Ok(())
}

/// Greedy choice of the first `d + 1` steps, in list order, with independent rows.
pub fn default_basis(s: &StepSet) -> Result<Vec<usize>> {
    let rows = step_matrix(s).big_rows();
    let want = s.dim() + 1;
    let mut basis: Vec<usize> = Vec::with_capacity(want);
    for k in 0..rows.len() {
        let mut trial: Vec<Vec<BigInt>> = basis.iter().map(|&j| rows[j].clone()).collect();
        trial.push(rows[k].clone());
        if linalg::rank(&trial, want) == trial.len() {
            basis.push(k);
            if basis.len() == want {
                return Ok(basis);
            }
        }
    }
    Err(Error::Singular)
}

fn basis_matrix(s: &StepSet, basis: &[usize]) -> Result<Vec<Vec<Rational>>> {
    let m = step_matrix(s);
    let want = s.dim() + 1;
    if basis.len() != want || basis.iter().any(|&k| k >= s.len()) {
        return Err(Error::InvalidArgument(format!("basis must hold {want} step indices")));
    }
    let rows: Vec<Vec<Rational>> = basis
        .iter()
        .map(|&k| m.rows[k].iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect())
        .collect();
    Ok(rows)
}

pub fn find_path_pairs(s: &StepSet) -> Result<PathPairs> {
    require_nonsingular(s)?;
    find_path_pairs_with_basis(s, &default_basis(s)?)
}

/// Path pairs relative to an explicit basis `T`.
pub fn find_path_pairs_with_basis(s: &StepSet, basis: &[usize]) -> Result<PathPairs> {
    require_nonsingular(s)?;
    let mt = basis_matrix(s, basis)?;
    let m = step_matrix(s);
    let mut pairs = Vec::new();
    for target in (0..s.len()).filter(|k| !basis.contains(k)) {
        let row: Vec<Rational> = m.rows[target]
            .iter()
            .map(|&x| Rational::from_integer(BigInt::from(x)))
            .collect();
        let x = linalg::solve_left(&mt, &row).ok_or(Error::Singular)?;
        let l = lcm_denominators(&x);
        let coeffs: Vec<BigInt> = x
            .iter()
            .map(|q| (q * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let as_u64 = |b: &BigInt| -> Result<u64> {
            u64::try_from(b.abs()).map_err(|_| Error::InvalidArgument("multiplicity overflow".into()))
        };
        let mut with_target = vec![(target, as_u64(&l)?)];
        let mut without_target = Vec::new();
        for (&k, c) in basis.iter().zip(&coeffs) {
            if c.is_negative() {
                with_target.push((k, as_u64(c)?));
            } else if c.is_positive() {
                without_target.push((k, as_u64(c)?));
            }
        }
        with_target.sort_unstable();
        without_target.sort_unstable();
        let mut endpoint = vec![0i64; s.dim()];
        let mut length = 0u64;
        for &(k, mult) in &with_target {
            length += mult;
            for (e, &c) in endpoint.iter_mut().zip(&s.steps()[k]) {
                *e += c * mult as i64;
            }
        }
        pairs.push(PathPair { target, with_target, without_target, endpoint, length });
    }
    Ok(PathPairs { basis: basis.to_vec(), pairs })
}

/// Outcome of the centrality test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Centrality {
    pub central: bool,
    pub witness: Option<PathPair>,
}

pub fn is_central(s: &StepSet) -> Result<Centrality> {
    let pp = find_path_pairs(s)?;
    Ok(centrality_from(&pp, s.weights()))
}

fn centrality_from(pp: &PathPairs, weights: &[Rational]) -> Centrality {
    let witness = pp.pairs.iter().find(|p| !p.holds(weights)).cloned();
    Centrality { central: witness.is_none(), witness }
}

/// Product `prod_s a_s^{q_s}` with rational exponents `q_s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub exponents: Vec<Rational>,
}

impl Monomial {
    pub fn one(n: usize) -> Self {
        Self { exponents: vec![Rational::zero(); n] }
    }

    pub fn is_one(&self) -> bool {
        self.exponents.iter().all(|e| e.is_zero())
    }

    pub fn eval(&self, weights: &[Rational]) -> f64 {
        self.exponents
            .iter()
            .zip(weights)
            .filter(|(e, _)| !e.is_zero())
            .map(|(e, w)| crate::rational::to_f64(e) * ln_rational(w))
            .sum::<f64>()
            .exp()
    }

    /// `(L, prod_s a_s^{L q_s})` with `L` the exponent denominator lcm.
    fn integerized(&self, weights: &[Rational]) -> (BigInt, Rational) {
        let l = lcm_denominators(&self.exponents);
        let lr = Rational::from_integer(l.clone());
        let p = self
            .exponents
            .iter()
            .zip(weights)
            .fold(Rational::one(), |acc, (e, w)| {
                let k: i64 = (e * &lr).to_integer().try_into().expect("exponent fits i64");
                acc * pow_i(w, k)
            });
        (l, p)
    }

    /// Exact value when it is rational.
    pub fn exact_value(&self, weights: &[Rational]) -> Option<Rational> {
        let (l, p) = self.integerized(weights);
        crate::rational::exact_root(&p, u32::try_from(l).ok()?)
    }

    /// Exact test `value == prod_s a_s^{q_s}` for positive `value`.
    pub fn equals(&self, weights: &[Rational], value: &Rational) -> bool {
        if !value.is_positive() {
            return false;
        }
        let (l, p) = self.integerized(weights);
        let l: usize = l.try_into().expect("small denominator");
        num_traits::pow(value.clone(), l) == p
    }

    fn axpy(&mut self, k: &Rational, other: &Monomial) {
        for (a, b) in self.exponents.iter_mut().zip(&other.exponents) {
            *a += k * b;
        }
    }

    fn exponent_map(&self) -> BTreeMap<String, String> {
        self.exponents
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .map(|(k, e)| (k.to_string(), format_rational(e)))
            .collect()
    }
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map = self.exponent_map();
        let mut m = s.serialize_map(Some(map.len()))?;
        for (k, v) in &map {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

/// `a_s = beta * prod_k alpha_k^{s_k}` with every constant a monomial in the weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralDecomposition {
    pub alpha: Vec<Monomial>,
    pub beta: Monomial,
    pub alpha_value: Vec<f64>,
    pub beta_value: f64,
}

impl CentralDecomposition {
    /// Exponent vector of `beta^n prod_k alpha_k^{i_k}`.
    pub fn scaling(&self, n: usize, endpoint: &[i64]) -> Monomial {
        let mut m = Monomial::one(self.beta.exponents.len());
        m.axpy(&Rational::from_integer(BigInt::from(n)), &self.beta);
        for (a, &i) in self.alpha.iter().zip(endpoint) {
            m.axpy(&Rational::from_integer(BigInt::from(i)), a);
        }
        m
    }

    /// Checks `beta * prod alpha_k^{s_k} = a_s` exactly for every step.
    pub fn reproduces(&self, s: &StepSet) -> bool {
        if self.beta.exponents.len() != s.len() || self.alpha.len() != s.dim() {
            return false;
        }
        s.steps().iter().zip(s.weights()).all(|(v, w)| {
            let m = self.scaling(1, v);
            m.equals(s.weights(), w)
        })
    }

    pub fn alpha_exact(&self, weights: &[Rational]) -> Vec<Option<Rational>> {
        self.alpha.iter().map(|m| m.exact_value(weights)).collect()
    }

    pub fn beta_exact(&self, weights: &[Rational]) -> Option<Rational> {
        self.beta.exact_value(weights)
    }
}

pub fn solve_central(s: &StepSet) -> Result<CentralDecomposition> {
    require_nonsingular(s)?;
    solve_central_with_basis(s, &default_basis(s)?)
}

/// Solution expressed over the weights of an explicit basis `T`.
pub fn solve_central_with_basis(s: &StepSet, basis: &[usize]) -> Result<CentralDecomposition> {
    let pp = find_path_pairs_with_basis(s, basis)?;
    if !centrality_from(&pp, s.weights()).central {
        return Err(Error::NonCentral);
    }
    let mt = basis_matrix(s, basis)?;
    let inv = linalg::inverse(&mt).ok_or(Error::Singular)?;
    let d = s.dim();
    let mono = |row: usize| {
        let mut m = Monomial::one(s.len());
        for (j, &k) in basis.iter().enumerate() {
            m.exponents[k] = inv[row][j].clone();
        }
        m
    };
    let alpha: Vec<Monomial> = (0..d).map(mono).collect();
    let beta = mono(d);
    let dec = CentralDecomposition {
        alpha_value: alpha.iter().map(|m| m.eval(s.weights())).collect(),
        beta_value: beta.eval(s.weights()),
        alpha,
        beta,
    };
    if !dec.reproduces(s) {
        return Err(Error::NonCentral);
    }
    Ok(dec)
}

/// Whether two weightings of the same steps differ by a central weighting.
pub fn are_equivalent(s: &StepSet, other: &StepSet) -> Result<bool> {
    Ok(is_central(&s.ratio(other)?)?.central)
}
