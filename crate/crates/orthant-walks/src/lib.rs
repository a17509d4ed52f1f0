//! Weighted lattice walks confined to orthants.
//!
//! The crate counts walks exactly or in extended-range floating point,
//! decides and solves central weightings, classifies two-dimensional models
//! into universality classes and evaluates the closed-form asymptotics of
//! the weighted Gouyou-Beauchamps family.

pub mod central;
pub mod classify;
pub mod conjecture;
pub mod enumerate;
pub mod error;
pub mod extfloat;
pub mod gb;
pub mod lattice;
pub mod linalg;
pub mod rational;
pub mod validate;

pub use central::{are_equivalent, find_path_pairs, is_central, rank_full, solve_central, step_matrix};
pub use classify::{boundary_minimizers, classify, covariance_factor, interior_critical_point, minimize_on_q};
pub use conjecture::{conjecture2_nullspace, minimal_refutation_length};
pub use enumerate::{
    brute_force_count, check_excursion_relation, check_gf_relation, count_walks, excursion_count, sample_walk,
    total_walks, Mode, WalkTable,
};
pub use error::{Error, Result};
pub use extfloat::ExtFloat;
pub use gb::{
    check_harmonicity, gb_classify, gb_contributing, gb_critical_points, gb_estimate, gb_excursion_estimate,
    gb_kappa_v, GbClass, GbParams,
};
pub use lattice::{drift, inventory_eval, is_singular, parse_stepset, DriftVector, Point, StepSet};
pub use rational::Rational;
pub use validate::{validate_excursions, validate_totals};
