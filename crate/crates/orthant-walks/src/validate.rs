//! Exact counts against the closed-form asymptotics of the GB family.

use serde::Serialize;

use crate::enumerate::{Guard, LayerStream};
use crate::error::{Error, Result};
use crate::extfloat::ExtFloat;
use crate::gb::{gb_excursion_estimate, AsymptoticEstimate, GbClass, GbParams};
use crate::lattice::StepSet;
use crate::rational::Rational;

/// Lengths below this are transient and left out of the slope fit.
pub const FIT_START: u64 = 50;
/// The slope a passing report must reach.
pub const MAX_SLOPE: f64 = -0.8;
/// Relative errors below this are at the floating floor and not fitted.
const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Totals,
    Excursions,
}

impl std::str::FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "totals" => Ok(Target::Totals),
            "excursions" => Ok(Target::Excursions),
            other => Err(Error::Parse(format!("unknown validation target {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub n: u64,
    pub count: ExtFloat,
    pub estimate: ExtFloat,
    pub ratio: f64,
}

/// Least-squares slope of `ln|ratio - 1|` against `ln n` for one parity class of `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    /// `"all"`, `"even"` or `"odd"`.
    pub parity: &'static str,
    pub points: usize,
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    #[serde(with = "crate::rational::serde_str")]
    pub a: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub b: Rational,
    pub i: u32,
    pub j: u32,
    pub target: Target,
    pub class: GbClass,
    pub n_max: u64,
    pub tolerance: f64,
    pub samples: Vec<Sample>,
    /// Lengths whose final ratios are tested against the tolerance.
    pub final_n: Vec<u64>,
    pub final_error: f64,
    pub fits: Vec<SlopeFit>,
    /// Worst fitted slope, absent when every error sits at the floating floor.
    pub slope: Option<f64>,
    /// For excursions: lengths of the wrong parity gave count 0 and estimate 0.
    pub parity_zeros: bool,
    pub pass: bool,
}

fn fit_slope(samples: &[&Sample], parity: &'static str) -> SlopeFit {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.n >= FIT_START)
        .map(|s| ((s.n as f64).ln(), (s.ratio - 1.0).abs()))
        .filter(|&(_, e)| e >= NOISE_FLOOR && e.is_finite())
        .map(|(x, e)| (x, e.ln()))
        .collect();
    let k = pts.len() as f64;
    let slope = (pts.len() >= 2).then(|| {
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    SlopeFit { parity, points: pts.len(), slope }
}

fn check_n_max(n_max: u64) -> Result<()> {
    if n_max < FIT_START {
        return Err(Error::InvalidArgument(format!("n_max must be at least {FIT_START}")));
    }
    Ok(())
}

/// Ratios of total weighted counts to `kappa V rho^n n^-alpha`.
pub fn validate_totals_guarded(p: &GbParams, n_max: u64, tolerance: f64, guard: Guard) -> Result<ValidationReport> {
    check_n_max(n_max)?;
    let est = AsymptoticEstimate::new(p)?;
    let s = StepSet::builtin("gb", &p.a, &p.b)?;
    let start = [p.i as i64, p.j as i64];
    let mut stream = LayerStream::<ExtFloat>::new(&s, &start, guard)?;
    let mut samples = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        stream.advance()?;
        let count = stream.total().to_ext();
        let estimate = est.at(n)?;
        samples.push(Sample { n, count, estimate, ratio: count.ratio(estimate) });
    }
    let (fits, final_n) = if est.class.has_parity() {
        let even: Vec<&Sample> = samples.iter().filter(|s| s.n % 2 == 0).collect();
        let odd: Vec<&Sample> = samples.iter().filter(|s| s.n % 2 == 1).collect();
        (vec![fit_slope(&even, "even"), fit_slope(&odd, "odd")], vec![n_max - 1, n_max])
    } else {
        let all: Vec<&Sample> = samples.iter().collect();
        (vec![fit_slope(&all, "all")], vec![n_max])
    };
    Ok(finish(p, Target::Totals, est.class, n_max, tolerance, samples, final_n, fits, true))
}

pub fn validate_totals(p: &GbParams, n_max: u64, tolerance: f64) -> Result<ValidationReport> {
    validate_totals_guarded(p, n_max, tolerance, Guard::default())
}

/// Ratios of weighted excursions from `(i, j)` to the origin against the universal estimate.
pub fn validate_excursions_guarded(
    p: &GbParams,
    n_max: u64,
    tolerance: f64,
    guard: Guard,
) -> Result<ValidationReport> {
    check_n_max(n_max)?;
    let class = crate::gb::gb_class(&p.a, &p.b)?;
    let s = StepSet::builtin("gb", &p.a, &p.b)?;
    let start = [p.i as i64, p.j as i64];
    let mut stream = LayerStream::<ExtFloat>::new(&s, &start, guard)?;
    let mut samples = Vec::new();
    let mut parity_zeros = true;
    for n in 1..=n_max {
        stream.advance()?;
        let count = stream.count_at(&[0, 0]).to_ext();
        let estimate = gb_excursion_estimate(p, n)?;
        if (n + p.i as u64) % 2 == 1 {
            parity_zeros &= count.is_zero() && estimate.is_zero();
            continue;
        }
        samples.push(Sample { n, count, estimate, ratio: count.ratio(estimate) });
    }
    let last = samples.last().map(|s| s.n).unwrap_or(n_max);
    let all: Vec<&Sample> = samples.iter().collect();
    let fits = vec![fit_slope(&all, if p.i.is_multiple_of(2) { "even" } else { "odd" })];
    Ok(finish(p, Target::Excursions, class, n_max, tolerance, samples, vec![last], fits, parity_zeros))
}

pub fn validate_excursions(p: &GbParams, n_max: u64, tolerance: f64) -> Result<ValidationReport> {
    validate_excursions_guarded(p, n_max, tolerance, Guard::default())
}

#[allow(clippy::too_many_arguments)]
fn finish(
    p: &GbParams,
    target: Target,
    class: GbClass,
    n_max: u64,
    tolerance: f64,
    samples: Vec<Sample>,
    final_n: Vec<u64>,
    fits: Vec<SlopeFit>,
    parity_zeros: bool,
) -> ValidationReport {
    let final_error = final_n
        .iter()
        .filter_map(|&n| samples.iter().find(|s| s.n == n))
        .map(|s| (s.ratio - 1.0).abs())
        .fold(0.0, |m: f64, e| if e.is_nan() { f64::NAN } else { m.max(e) });
    let slope = fits.iter().filter_map(|f| f.slope).reduce(f64::max);
    let pass = final_error <= tolerance && slope.is_none_or(|s| s <= MAX_SLOPE) && parity_zeros;
    ValidationReport {
        a: p.a.clone(),
        b: p.b.clone(),
        i: p.i,
        j: p.j,
        target,
        class,
        n_max,
        tolerance,
        samples,
        final_n,
        final_error,
        fits,
        slope,
        parity_zeros,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn balanced_totals_converge() {
        let p = GbParams::origin(int(1), int(1)).unwrap();
        let r = validate_totals(&p, 200, 0.05).unwrap();
        assert!(r.pass, "error {} slope {:?}", r.final_error, r.slope);
        assert_eq!(r.samples.len(), 200);
        assert!(r.slope.unwrap() <= -0.8);
    }

    #[test]
    fn excursions_have_parity_zeros() {
        let p = GbParams::origin(int(1), int(1)).unwrap();
        let r = validate_excursions(&p, 100, 0.2).unwrap();
        assert!(r.parity_zeros);
        assert!(r.samples.iter().all(|s| s.n % 2 == 0));
        assert_eq!(r.final_n, vec![100]);
        let q = GbParams::new(int(2), int(3), 1, 1).unwrap();
        let r = validate_excursions(&q, 61, 0.5).unwrap();
        assert!(r.parity_zeros);
        assert_eq!(r.final_n, vec![61]);
    }

    #[test]
    fn parity_classes_fit_two_sequences() {
        let p = GbParams::origin(rat(1, 2), int(1)).unwrap();
        let r = validate_totals(&p, 60, 1.0).unwrap();
        assert_eq!(r.fits.len(), 2);
        assert_eq!(r.final_n, vec![59, 60]);
    }

    #[test]
    fn short_runs_are_rejected() {
        let p = GbParams::origin(int(1), int(1)).unwrap();
        assert!(validate_totals(&p, 10, 0.1).is_err());
        assert!("sideways".parse::<Target>().is_err());
    }
}
