use std::fmt::Write as _;
use std::path::Path;

use orthant_walks::central::{
    are_equivalent, default_basis, find_path_pairs_with_basis, is_central, rank_full, solve_central_with_basis,
    step_matrix,
};
use orthant_walks::classify::{classify, diagram, diagram_csv, parse_range};
use orthant_walks::conjecture::conjecture2_nullspace_guarded;
use orthant_walks::enumerate::{count_walks_guarded, sample_walk_streaming, Guard};
use orthant_walks::gb::{
    gb_classify, gb_contributing, gb_critical_points, gb_estimate, gb_excursion_estimate, gb_kappa_v,
    harmonicity_report, GbParams,
};
use orthant_walks::lattice::{drift, StepSet, BUILTIN_MODELS};
use orthant_walks::rational::{format_rational, Rational};
use orthant_walks::validate::{validate_excursions_guarded, validate_totals_guarded, Target};
use orthant_walks::Error;
use serde_json::{json, Value};

use crate::args::*;
use crate::emit::{csv_field, object, Report};

/// Failure of a command, already mapped to its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(Error::ResourceGuard { .. }) => 3,
            CliError::Lib(Error::Ambiguous(_) | Error::NoConvergence(_)) => 1,
            _ => 2,
        }
    }
}

/// Outcome of a successful run; `passed == false` maps to exit status 1.
pub struct Outcome {
    pub report: Report,
    pub passed: bool,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, passed: true }
    }
}

type Res = Result<Outcome, CliError>;

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize")
}

fn rat(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

fn rats(rs: &[Rational]) -> Value {
    Value::Array(rs.iter().map(rat).collect())
}

pub fn run(cli: &Cli) -> Res {
    let guard = Guard::new(cli.guard);
    match &cli.command {
        Command::Count(a) => count(a, guard),
        Command::Sample(a) => sample(a, guard),
        Command::Central(a) => central(a),
        Command::Classify(a) => classify_cmd(a),
        Command::Diagram(a) => diagram_cmd(a),
        Command::Gb(g) => gb(g),
        Command::Conjecture2(a) => conjecture(a, guard),
        Command::Validate(a) => validate(a, guard),
    }
}

fn load_model(m: &ModelArgs) -> Result<StepSet, CliError> {
    let s = match &m.steps_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            StepSet::from_json(&text)?
        }
        None if !BUILTIN_MODELS.contains(&m.model.as_str()) && Path::new(&m.model).is_file() => {
            let text = std::fs::read_to_string(&m.model)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", m.model)))?;
            StepSet::from_json(&text)?
        }
        None => StepSet::builtin(&m.model, &m.a, &m.b)?,
    };
    Ok(match &m.weights {
        Some(w) => s.with_weights(w.clone())?,
        None => s,
    })
}

fn model_value(s: &StepSet) -> Value {
    json!({ "steps": s.steps(), "weights": rats(s.weights()) })
}

fn start_point(s: &StepSet, start: &Option<Vec<i64>>) -> Result<Vec<i64>, CliError> {
    let p = start.clone().unwrap_or_else(|| vec![0; s.dim()]);
    if p.len() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: p.len() }.into());
    }
    Ok(p)
}

fn count(a: &CountArgs, guard: Guard) -> Res {
    let s = load_model(&a.model)?;
    let start = start_point(&s, &a.start)?;
    let t = count_walks_guarded(&s, &start, a.n, a.mode, guard)?;
    let totals = (0..=a.n).map(|n| t.total(n)).collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("n,total\n");
    for (n, c) in totals.iter().enumerate() {
        let _ = writeln!(csv, "{n},{c}");
    }
    let mut out = object([
        ("model", model_value(&s)),
        ("start", json!(start)),
        ("n", json!(a.n)),
        ("mode", json!(format!("{:?}", a.mode).to_lowercase())),
        ("totals", to_value(&totals)),
    ]);
    if a.endpoints {
        let ends = t.endpoints(a.n)?;
        out["endpoints"] = ends.iter().map(|(p, c)| json!({ "point": p, "count": c })).collect();
        csv = String::from("x,count\n");
        for (p, c) in &ends {
            let coords: Vec<String> = p.iter().map(i64::to_string).collect();
            let _ = writeln!(csv, "{},{c}", csv_field(&coords.join(" ")));
        }
    }
    Ok(Report::with_csv(out, csv).into())
}

fn sample(a: &SampleArgs, guard: Guard) -> Res {
    let s = load_model(&a.model)?;
    let start = start_point(&s, &a.start)?;
    let w = sample_walk_streaming(&s, &start, a.n, a.mode, a.seed, guard)?;
    // one step per row: the step taken and the position it reaches
    let mut csv = String::from("k");
    for d in 0..s.dim() {
        let _ = write!(csv, ",s{d}");
    }
    for d in 0..s.dim() {
        let _ = write!(csv, ",x{d}");
    }
    csv.push('\n');
    for (k, (step, p)) in w.steps.iter().zip(w.positions()).enumerate() {
        let cells: Vec<String> = step.iter().chain(&p).map(i64::to_string).collect();
        let _ = writeln!(csv, "{},{}", k + 1, cells.join(","));
    }
    let out = object([
        ("seed", json!(a.seed)),
        ("n", json!(a.n)),
        ("start", json!(start)),
        ("steps", json!(w.steps)),
        ("indices", json!(w.indices)),
        ("endpoint", json!(w.endpoint())),
        ("weight", rat(&w.weight(&s))),
    ]);
    Ok(Report::with_csv(out, csv).into())
}

fn central(a: &CentralArgs) -> Res {
    let s = load_model(&a.model)?;
    let (rank, full) = rank_full(&s);
    let mut out = object([
        ("model", model_value(&s)),
        ("step_matrix", to_value(&step_matrix(&s).rows)),
        ("rank", json!(rank)),
        ("full_rank", json!(full)),
    ]);
    let basis = match &a.basis {
        Some(b) => b.clone(),
        None => default_basis(&s)?,
    };
    let pairs = find_path_pairs_with_basis(&s, &basis)?;
    out["basis"] = json!(basis);
    out["pairs"] = pairs
        .pairs
        .iter()
        .map(|p| {
            let (with, without) = p.products(s.weights());
            json!({
                "target": p.target,
                "description": p.describe(&s),
                "with_target": rat(&with),
                "without_target": rat(&without),
                "holds": p.holds(s.weights()),
            })
        })
        .collect();
    let c = is_central(&s)?;
    out["central"] = json!(c.central);
    out["witness"] = match &c.witness {
        Some(p) => json!(p.describe(&s)),
        None => Value::Null,
    };
    if c.central {
        let dec = solve_central_with_basis(&s, &basis)?;
        let w = s.weights();
        let alpha_exact: Vec<Value> =
            dec.alpha_exact(w).iter().map(|x| x.as_ref().map_or(Value::Null, rat)).collect();
        out["decomposition"] = json!({
            "alpha": to_value(&dec.alpha),
            "beta": to_value(&dec.beta),
            "alpha_value": dec.alpha_value,
            "beta_value": dec.beta_value,
            "alpha_exact": alpha_exact,
            "beta_exact": dec.beta_exact(w).as_ref().map_or(Value::Null, rat),
            "reproduces": dec.reproduces(&s),
        });
    }
    if let Some(cmp) = &a.compare {
        let other = s.with_weights(cmp.clone())?;
        out["compare_weights"] = rats(cmp);
        out["equivalent"] = json!(are_equivalent(&s, &other)?);
    }
    Ok(Report::json(out).into())
}

fn classify_cmd(a: &ModelArgs) -> Res {
    let s = load_model(a)?;
    let c = classify(&s)?;
    let mut out = to_value(&c);
    out["model"] = model_value(&s);
    out["drift"] = to_value(&drift(&s));
    Ok(Report::json(out).into())
}

fn diagram_cmd(a: &DiagramArgs) -> Res {
    let av = parse_range(&a.a_range)?;
    let bv = parse_range(&a.b_range)?;
    let rows = diagram(&a.model, &av, &bv)?;
    let csv = diagram_csv(&rows);
    let out = object([("model", json!(a.model)), ("rows", to_value(&rows))]);
    Ok(Report::with_csv(out, csv).into())
}

fn gb(g: &GbCommand) -> Res {
    match g {
        GbCommand::Classify(ab) => {
            let c = gb_classify(&ab.a, &ab.b)?;
            let rho = c.rho_exact.as_ref().map_or(json!(c.rho), rat);
            Ok(Report::json(json!({ "class": c.class.name(), "rho": rho, "alpha": rat(&c.alpha) })).into())
        }
        GbCommand::Estimate(e) => {
            let p = GbParams::new(e.ab.a.clone(), e.ab.b.clone(), e.i, e.j)?;
            let c = gb_classify(&p.a, &p.b)?;
            let kv = gb_kappa_v(&p)?;
            let mut out = object([
                ("a", rat(&p.a)),
                ("b", rat(&p.b)),
                ("i", json!(p.i)),
                ("j", json!(p.j)),
                ("n", json!(e.n)),
                ("class", json!(c.class.name())),
                ("rho", c.rho_exact.as_ref().map_or(json!(c.rho), rat)),
                ("alpha", rat(&c.alpha)),
                ("kappa", json!(kv.kappa)),
                ("v_even", json!(kv.v_even)),
                ("v_odd", json!(kv.v_odd)),
                ("v_even_exact", kv.v_even_exact.as_ref().map_or(Value::Null, rat)),
                ("v_odd_exact", kv.v_odd_exact.as_ref().map_or(Value::Null, rat)),
            ]);
            if e.excursion {
                out["excursion_estimate"] = to_value(&gb_excursion_estimate(&p, e.n)?);
            } else {
                out["estimate"] = to_value(&gb_estimate(&p, e.n)?);
            }
            Ok(Report::json(out).into())
        }
        GbCommand::Harmonic(h) => {
            let r = harmonicity_report(&h.ab.a, &h.ab.b, h.grid)?;
            let mut out = to_value(&r);
            out["grid"] = json!(h.grid);
            out["pass"] = json!(r.failures == 0);
            Ok(Outcome { report: Report::json(out), passed: r.failures == 0 })
        }
        GbCommand::Critical(ab) => {
            let pts = gb_critical_points(&ab.a, &ab.b)?;
            let contributing = gb_contributing(&ab.a, &ab.b)?;
            let mut csv = String::from("label,x,y,growth,contributing\n");
            for p in &pts {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    p.label,
                    orthant_walks::classify::fmt15(p.x),
                    orthant_walks::classify::fmt15(p.y),
                    orthant_walks::classify::fmt15(p.growth),
                    contributing.contains(&p.label)
                );
            }
            let labels: Vec<String> = contributing.iter().map(ToString::to_string).collect();
            let out = json!({
                "class": gb_classify(&ab.a, &ab.b)?.class.name(),
                "points": to_value(&pts),
                "contributing": labels,
            });
            Ok(Report::with_csv(out, csv).into())
        }
    }
}

fn conjecture(a: &ConjectureArgs, guard: Guard) -> Res {
    let s = load_model(&a.model)?;
    let r = conjecture2_nullspace_guarded(&s, a.cap, guard)?;
    let mut csv = String::from("n,dim\n");
    for (k, d) in r.dims.iter().enumerate() {
        let _ = writeln!(csv, "{},{d}", k + 1);
    }
    Ok(Report::with_csv(to_value(&r), csv).into())
}

fn validate(a: &ValidateArgs, guard: Guard) -> Res {
    let p = GbParams::new(a.a.clone(), a.b.clone(), a.i, a.j)?;
    if !a.tolerance.is_finite() || a.tolerance < 0.0 {
        return Err(CliError::Usage("tolerance must be a nonnegative number".into()));
    }
    let r = match a.what {
        Target::Totals => validate_totals_guarded(&p, a.n_max, a.tolerance, guard)?,
        Target::Excursions => validate_excursions_guarded(&p, a.n_max, a.tolerance, guard)?,
    };
    let mut csv = String::from("n,count,estimate,ratio\n");
    for s in &r.samples {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            s.n,
            s.count,
            s.estimate,
            orthant_walks::classify::fmt15(s.ratio)
        );
    }
    let mut out = to_value(&r);
    if !a.samples {
        let last: Vec<Value> = r
            .samples
            .iter()
            .filter(|s| r.final_n.contains(&s.n))
            .map(to_value)
            .collect();
        out["samples"] = Value::Array(last);
    }
    Ok(Outcome { report: Report::with_csv(out, csv), passed: r.pass })
}
