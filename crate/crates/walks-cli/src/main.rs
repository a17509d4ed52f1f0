mod args;
mod commands;
mod emit;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Emit, COMMANDS, GB_COMMANDS};

/// Splices `--config FILE` into the argument list.
///
/// Each key of the JSON object becomes `--key value` placed right after the
/// subcommand, so flags given on the command line come later and win.
/// A `"command"` key (e.g. `"gb classify"`) supplies the subcommand when none is given.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    let bin = it.next().unwrap_or_else(|| "walks".into());
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = Some(it.next().ok_or("--config needs a file")?);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(std::iter::once(bin).chain(rest).collect());
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path:?}: {e}"))?;
    let cfg: Value = serde_json::from_str(&text).map_err(|e| format!("config is not JSON: {e}"))?;
    let Value::Object(cfg) = cfg else {
        return Err("config must be a JSON object".into());
    };
    let mut extra: Vec<OsString> = Vec::new();
    for (k, v) in &cfg {
        if k == "command" {
            continue;
        }
        let flag = format!("--{}", k.replace('_', "-"));
        match v {
            Value::Bool(true) => extra.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => extra.extend([flag.into(), s.into()]),
            Value::Number(n) => extra.extend([flag.into(), n.to_string().into()]),
            Value::Array(xs) => {
                let parts: Vec<String> = xs
                    .iter()
                    .map(|x| match x {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                extra.extend([flag.into(), parts.join(",").into()]);
            }
            Value::Object(_) => return Err(format!("config key {k:?} cannot be an object")),
        }
    }
    let pos = rest.iter().position(|a| COMMANDS.contains(&a.to_string_lossy().as_ref()));
    let mut out = vec![bin];
    match pos {
        Some(p) => {
            let mut end = p + 1;
            if rest[p] == "gb" && rest.get(end).is_some_and(|a| GB_COMMANDS.contains(&a.to_string_lossy().as_ref())) {
                end += 1;
            }
            out.extend(rest[..end].iter().cloned());
            out.extend(extra);
            out.extend(rest[end..].iter().cloned());
        }
        None => {
            let Some(Value::String(cmd)) = cfg.get("command") else {
                return Err("no subcommand given on the command line or in the config".into());
            };
            out.extend(rest);
            out.extend(cmd.split_whitespace().map(OsString::from));
            out.extend(extra);
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match commands::run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let json = emit::canonical(outcome.report.json);
    let text = match cli.emit {
        Emit::Json => emit::render_json(&json),
        Emit::Csv => outcome.report.csv.unwrap_or_else(|| emit::flatten_csv(&json)),
    };
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(2);
    }
    ExitCode::from(if outcome.passed { 0 } else { 1 })
}
