//! Finite checker for the walk-count linear system
//! `sum_s mu_s w_{i-s}(n-1) = 0` over endpoints `i` in the orthant.
//!
//! `w_p(m)` counts unweighted walks of length `m` from the origin to `p`.
//! A trivial null space means only `mu = 0` satisfies every equation up to
//! the cap.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::enumerate::{Guard, Table};
use crate::error::{Error, Result};
use crate::lattice::{Point, StepSet};
use crate::linalg::nullspace;
use crate::rational::{primitive, Rational};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub steps: Vec<Point>,
    pub n_cap: usize,
    /// Null-space basis, one entry per step.
    #[serde(serialize_with = "ser_basis")]
    pub basis: Vec<Vec<Rational>>,
    /// Null-space dimension after adding the equations of each `n = 1..=n_cap`.
    pub dims: Vec<usize>,
    /// Least `n <= n_cap` with a trivial null space.
    #[serde(rename = "N_S")]
    pub n_s: Option<usize>,
    pub verified: bool,
    /// Distinct primitive equations used.
    pub equations: usize,
}

fn ser_basis<S: serde::Serializer>(b: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use crate::rational::format_rational;
    let strs: Vec<Vec<String>> = b.iter().map(|v| v.iter().map(format_rational).collect()).collect();
    serde::Serialize::serialize(&strs, s)
}

/// Equations contributed by length `n`, read off layer `n - 1`.
fn equations_at(table: &Table<BigInt>, steps: &[Point], n: usize) -> Result<Vec<Vec<BigInt>>> {
    let layer = table.layer(n - 1)?;
    let mut targets = BTreeSet::new();
    for (p, _) in layer.iter_nonzero() {
        for s in steps {
            let i: Point = p.iter().zip(s).map(|(a, b)| a + b).collect();
            if i.iter().all(|&x| x >= 0) {
                targets.insert(i);
            }
        }
    }
    Ok(targets
        .into_iter()
        .map(|i| {
            steps
                .iter()
                .map(|s| {
                    let q: Point = i.iter().zip(s).map(|(a, b)| a - b).collect();
                    layer.value(&q)
                })
                .collect()
        })
        .collect())
}

/// All distinct primitive nonzero equations for `n = 1..=n_cap`, grouped by `n`.
pub fn conjecture_system(s: &StepSet, n_cap: usize, guard: Guard) -> Result<Vec<Vec<Vec<BigInt>>>> {
    if n_cap < 1 {
        return Err(Error::InvalidArgument("n_cap must be at least 1".into()));
    }
    let origin = vec![0; s.dim()];
    let table = Table::<BigInt>::build(&s.uniform(), &origin, n_cap - 1, guard)?;
    let steps = s.steps().to_vec();
    let per_n: Vec<Vec<Vec<BigInt>>> = (1..=n_cap)
        .into_par_iter()
        .map(|n| equations_at(&table, &steps, n))
        .collect::<Result<_>>()?;
    let mut seen = BTreeSet::new();
    Ok(per_n
        .into_iter()
        .map(|rows| {
            rows.into_iter()
                .filter(|r| r.iter().any(|x| !x.is_zero()))
                .filter_map(|mut r| {
                    primitive(&mut r);
                    seen.insert(r.clone()).then_some(r)
                })
                .collect()
        })
        .collect())
}

pub fn conjecture2_nullspace_guarded(s: &StepSet, n_cap: usize, guard: Guard) -> Result<ConjectureReport> {
    let system = conjecture_system(s, n_cap, guard)?;
    let ncols = s.len();
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    let mut dims = Vec::with_capacity(n_cap);
    let mut basis = Vec::new();
    for block in system {
        rows.extend(block);
        basis = nullspace(&rows, ncols);
        dims.push(basis.len());
    }
    let n_s = dims.iter().position(|&d| d == 0).map(|k| k + 1);
    Ok(ConjectureReport {
        steps: s.steps().to_vec(),
        n_cap,
        verified: basis.is_empty(),
        basis,
        dims,
        n_s,
        equations: rows.len(),
    })
}

pub fn conjecture2_nullspace(s: &StepSet, n_cap: usize) -> Result<ConjectureReport> {
    conjecture2_nullspace_guarded(s, n_cap, Guard::default())
}

/// Least `n <= cap` at which only `mu = 0` survives.
pub fn minimal_refutation_length(s: &StepSet, cap: usize) -> Result<Option<usize>> {
    Ok(conjecture2_nullspace(s, cap)?.n_s)
}
