//! Acceptance checks, one PASS/FAIL line each. Exits nonzero if any fail.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orthant_walks::central::{find_path_pairs, solve_central_with_basis, Monomial};
use orthant_walks::classify::{classify, covariance_factor, p1_from_c};
use orthant_walks::conjecture::{conjecture2_nullspace, minimal_refutation_length};
use orthant_walks::enumerate::{brute_force_count, check_excursion_relation, check_gf_relation, count_walks, Mode};
use orthant_walks::gb::{gb_classify, harmonicity_report, GbClass, GbParams};
use orthant_walks::rational::{int, rat, to_f64, Rational};
use orthant_walks::validate::{validate_excursions, validate_totals};
use orthant_walks::{is_central, solve_central, ExtFloat, StepSet};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn example_steps() -> Vec<Vec<i64>> {
    vec![vec![2, 2], vec![1, 1], vec![-1, 0], vec![0, -1]]
}

fn models(a: &Rational, b: &Rational) -> Vec<(String, StepSet)> {
    let mut out: Vec<(String, StepSet)> = ["gb", "tandem", "gessel", "simple"]
        .iter()
        .map(|m| (m.to_string(), StepSet::builtin(m, a, b).unwrap()))
        .collect();
    let ex = StepSet::central(2, example_steps(), &[a.clone(), b.clone()], &Rational::one()).unwrap();
    out.push(("example".into(), ex));
    out
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let starts = [[0i64, 0], [1, 0], [0, 2], [1, 1]];
    let mut checked = 0;
    for (a, b) in [(int(1), int(1)), (int(2), int(3))] {
        for (name, s) in models(&a, &b) {
            for start in &starts {
                let table = count_walks(&s, start, 8, Mode::Exact).map_err(|e| e.to_string())?;
                for n in 0..=8 {
                    let brute = brute_force_count(&s, start, n).map_err(|e| e.to_string())?;
                    let dp: BTreeMap<Vec<i64>, Rational> = table
                        .endpoints(n)
                        .map_err(|e| e.to_string())?
                        .into_iter()
                        .map(|(p, c)| (p, c.exact().cloned().expect("exact mode")))
                        .collect();
                    if dp != brute {
                        return Err(format!("{name} ({a},{b}) from {start:?} differs at n={n}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs >= 30.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("{checked} tables equal, {secs:.1}s"))
}

fn balanced_totals() -> Outcome {
    let t = Instant::now();
    let p = GbParams::origin(int(1), int(1)).unwrap();
    let r = validate_totals(&p, 1000, 0.02).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let msg = format!("|ratio-1|={:.3e}, slope={}, {secs:.1}s", r.final_error, r.slope.map_or("none".into(), |s| format!("{s:.3}")));
    if r.pass && secs < 60.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn representatives() -> Vec<(Rational, Rational)> {
    vec![
        (int(1), int(1)),
        (int(2), int(3)),
        (rat(1, 2), rat(1, 2)),
        (int(1), int(4)),
        (int(3), int(2)),
        (int(2), int(2)),
        (int(2), int(4)),
        (int(1), rat(1, 2)),
        (rat(1, 2), int(1)),
    ]
}

fn all_classes() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (a, b) in representatives() {
        let p = GbParams::origin(a.clone(), b.clone()).unwrap();
        let r = validate_totals(&p, 800, 0.05).map_err(|e| e.to_string())?;
        let good = r.final_error <= 0.05;
        ok &= good;
        lines.push(format!("{}({a},{b})={:.4}{}", r.class, r.final_error, if good { "" } else { "!" }));
    }
    let msg = format!("max |ratio-1| at n=799/800: {}", lines.join(" "));
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn excursions() -> Outcome {
    let p = GbParams::origin(int(1), int(1)).unwrap();
    let r = validate_excursions(&p, 600, 0.05).map_err(|e| e.to_string())?;
    let last = r.samples.last().unwrap();
    let constant = last
        .count
        .mul(ExtFloat::from_f64((last.n as f64).powi(5)))
        .div(ExtFloat::from_f64(4.0).powi(last.n))
        .to_f64();
    let msg = format!(
        "n={} e(n) n^5/4^n={constant:.4} vs 768/pi={:.4}, odd zeros={}",
        last.n,
        768.0 / PI,
        r.parity_zeros
    );
    if r.final_error <= 0.05 && r.parity_zeros {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn harmonicity() -> Outcome {
    let mut classes = Vec::new();
    for (a, b) in representatives() {
        let r = harmonicity_report(&a, &b, 20).map_err(|e| e.to_string())?;
        if !r.exact || r.failures > 0 || r.checked != 882 {
            return Err(format!("{} ({a},{b}): exact={} failures={}", r.class, r.exact, r.failures));
        }
        classes.push(r.class);
    }
    if classes.len() != GbClass::ALL.len() {
        return Err("not every class covered".into());
    }
    Ok(format!("{} classes, 0<=i,j<=20 grid, both parities, zero residual", classes.len()))
}

fn table_agreement() -> Outcome {
    let step = rat(15, 44);
    let grid: Vec<Rational> = (0..12).map(|k| rat(1, 4) + &step * int(k)).collect();
    let (mut worst_rho, mut worst_c, mut worst_p1) = (0f64, 0f64, 0f64);
    for a in &grid {
        for b in &grid {
            let want = gb_classify(a, b).map_err(|e| e.to_string())?;
            let s = StepSet::builtin("gb", a, b).unwrap();
            let got = classify(&s).map_err(|e| format!("({a},{b}): {e}"))?;
            if got.class != want.class.family() {
                return Err(format!("({a},{b}): {} vs {}", got.class, want.class));
            }
            if (got.alpha - to_f64(&want.alpha)).abs() > 1e-9 {
                return Err(format!("({a},{b}): alpha {} vs {}", got.alpha, want.alpha));
            }
            worst_rho = worst_rho.max((got.rho / want.rho - 1.0).abs());
            let c = covariance_factor(&s).map_err(|e| e.to_string())?;
            worst_c = worst_c.max((c + 2f64.sqrt() / 2.0).abs());
            worst_p1 = worst_p1.max((p1_from_c(c) - 4.0).abs());
        }
    }
    let msg = format!("144 cells, max rho err {worst_rho:.1e}, max |c+sqrt2/2| {worst_c:.1e}, max |p1-4| {worst_p1:.1e}");
    if worst_rho <= 1e-8 && worst_c <= 1e-12 && worst_p1 <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// `m` as a rational exponent vector over the example steps.
fn mono(e: [i64; 4]) -> Monomial {
    Monomial { exponents: e.iter().map(|&x| int(x)).collect() }
}

fn central_algebra() -> Outcome {
    let weights = [int(1), int(2), rat(1, 3), rat(7, 5), int(5)];
    for a in &weights {
        for b in &weights {
            let s = StepSet::builtin("gb", a, b).unwrap();
            if !is_central(&s).map_err(|e| e.to_string())?.central {
                return Err(format!("GB ({a},{b}) rejected"));
            }
        }
    }
    let gb = StepSet::builtin("gb", &int(1), &int(1)).unwrap();
    let bad = gb.with_weights(vec![int(2), rat(1, 2), int(3), int(1)]).unwrap();
    let c = is_central(&bad).map_err(|e| e.to_string())?;
    let Some(w) = c.witness.filter(|_| !c.central) else {
        return Err("(2,1/2,3,1) accepted".into());
    };
    if w.holds(bad.weights()) {
        return Err("witness does not fail".into());
    }

    // closed forms for the example set, up to the relation a_{-1,0} a_{2,2}^3 a_{0,-1} = a_{1,1}^5
    let relation = [3i64, -5, 1, 1];
    let paper = [mono([2, -3, 0, 1]), mono([-1, 2, 0, -1]), mono([-1, 2, 0, 0])];
    let generic = StepSet::unweighted(2, example_steps()).unwrap();
    for basis in [vec![1, 2, 3], vec![0, 1, 2], vec![0, 2, 3]] {
        let dec = solve_central_with_basis(&generic, &basis).map_err(|e| e.to_string())?;
        let ours = [&dec.alpha[0], &dec.alpha[1], &dec.beta];
        for (m, want) in ours.iter().zip(&paper) {
            let diff: Vec<Rational> = m.exponents.iter().zip(&want.exponents).map(|(x, y)| x - y).collect();
            let k = &diff[2];
            if diff.iter().zip(relation).any(|(d, r)| *d != k * int(r)) {
                return Err(format!("basis {basis:?}: exponents {:?} differ from closed form", m.exponents));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let al = [rat(rng.random_range(1..9), rng.random_range(1..9)), rat(rng.random_range(1..9), rng.random_range(1..9))];
        let be = rat(rng.random_range(1..9), rng.random_range(1..9));
        let s = StepSet::central(2, example_steps(), &al, &be).unwrap();
        let dec = solve_central(&s).map_err(|e| e.to_string())?;
        let w = s.weights();
        let a1 = &w[0] * &w[0] * &w[3] / (&w[1] * &w[1] * &w[1]);
        let a2 = &w[1] * &w[1] / (&w[0] * &w[3]);
        let be_closed = &w[1] * &w[1] / &w[0];
        if dec.alpha_exact(w) != vec![Some(a1.clone()), Some(a2.clone())] || dec.beta_exact(w) != Some(be_closed.clone()) {
            return Err(format!("example weighting {al:?},{be}: solution disagrees"));
        }
        if a1 != al[0] || a2 != al[1] || be_closed != be {
            return Err("closed forms do not recover the parameters".into());
        }
    }

    let mut sets = models(&int(2), &int(3));
    sets.push(("gb-(1/3,7/5)".into(), StepSet::builtin("gb", &rat(1, 3), &rat(7, 5)).unwrap()));
    for (name, s) in &sets {
        find_path_pairs(s).map_err(|e| e.to_string())?;
        let dec = solve_central(s).map_err(|e| e.to_string())?;
        if !check_gf_relation(s, &dec, 12).map_err(|e| e.to_string())? {
            return Err(format!("{name}: coefficient relation fails"));
        }
        if !check_excursion_relation(s, &dec, 20).map_err(|e| e.to_string())? {
            return Err(format!("{name}: excursion relation fails"));
        }
    }
    Ok(format!("{} GB weightings central, witness found, closed forms match, relations exact on {} sets", 25, sets.len()))
}

/// Random small-step set containing the all-ones step and some step leaving the orthant.
fn random_all_ones_set(rng: &mut ChaCha8Rng, d: usize) -> StepSet {
    let mut pool: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let c = (k % 3) as i64 - 1;
                    k /= 3;
                    c
                })
                .collect()
        })
        .filter(|s: &Vec<i64>| s.iter().any(|&c| c != 0) && s.iter().any(|&c| c != 1))
        .collect();
    pool.shuffle(rng);
    loop {
        let extra = rng.random_range(1..=pool.len().min(6));
        let mut steps = vec![vec![1; d]];
        steps.extend(pool[..extra].iter().cloned());
        if steps.iter().any(|s| s.iter().any(|&c| c < 0)) {
            return StepSet::unweighted(d, steps).unwrap();
        }
        pool.shuffle(rng);
    }
}

fn conjecture_checker() -> Outcome {
    let t = Instant::now();
    let gb = StepSet::builtin("gb", &int(1), &int(1)).unwrap();
    let r = conjecture2_nullspace(&gb, 3).map_err(|e| e.to_string())?;
    if r.dims != vec![3, 1, 0] || r.n_s != Some(3) {
        return Err(format!("GB dims {:?}", r.dims));
    }
    let s = StepSet::unweighted(2, vec![vec![1, 0], vec![-1, 1], vec![-1, -1]]).unwrap();
    let ns = minimal_refutation_length(&s, 6).map_err(|e| e.to_string())?;
    if ns != Some(4) {
        return Err(format!("three-step set N_S={ns:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..20 {
        let s = random_all_ones_set(&mut rng, 2 + k % 2);
        let ns = minimal_refutation_length(&s, 4).map_err(|e| e.to_string())?;
        if ns != Some(2) {
            return Err(format!("{:?}: N_S={ns:?}", s.steps()));
        }
    }
    let mut builtins = Vec::new();
    for m in ["gb", "tandem", "gessel", "simple"] {
        let ns = minimal_refutation_length(&StepSet::builtin(m, &int(1), &int(1)).unwrap(), 6)
            .map_err(|e| e.to_string())?;
        if !ns.is_some_and(|n| n <= 4) {
            return Err(format!("{m}: N_S={ns:?}"));
        }
        builtins.push(format!("{m}={}", ns.unwrap()));
    }
    let secs = t.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("GB dims (3,1,0), {{(1,0),(-1,1),(-1,-1)}} N_S=4, 20 all-ones sets N_S=2, {}, {secs:.1}s", builtins.join(" ")))
}

fn free_decay() -> Outcome {
    let p = GbParams::origin(int(2), int(3)).unwrap();
    let table = count_walks(&StepSet::builtin("gb", &p.a, &p.b).unwrap(), &[0, 0], 100, Mode::Exact)
        .map_err(|e| e.to_string())?;
    let count = table.total(100).map_err(|e| e.to_string())?.to_ext();
    let est = orthant_walks::gb_estimate(&p, 100).map_err(|e| e.to_string())?;
    let err = (count.ratio(est) - 1.0).abs();
    let msg = format!("|ratio-1| at n=100 is {err:.4e}");
    if err <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let checks: [Check; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("balanced totals", balanced_totals),
        ("all classes at n=800", all_classes),
        ("excursion constant", excursions),
        ("harmonicity", harmonicity),
        ("table agreement", table_agreement),
        ("central algebra", central_algebra),
        ("conjecture checker", conjecture_checker),
        ("free-case decay", free_decay),
    ];
    let mut failed = 0;
    for (k, (name, f)) in checks.iter().enumerate() {
        match f() {
            Ok(msg) => println!("PASS {} {name}: {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg}", k + 1)
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
