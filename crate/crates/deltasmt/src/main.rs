//! Command-line entry point: parse, transform, solve, print.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use num_bigint::BigInt;
use num_traits::Signed;

use deltasmt::engine::{solve, Limits, SolveOptions};
use deltasmt::linearise::LinMode;
use deltasmt::num::Rational;
use deltasmt::oracle::{bp_decide, certify_delta_model, exactly_satisfies, BpResult};
use deltasmt::term::Status;
use deltasmt::transform::{normalize_predicates, to_separated_form};

#[derive(Parser, Debug)]
#[command(name = "deltasmt", about = "delta-complete solving of bounded nonlinear real constraints")]
struct Cli {
    /// Input problem file
    input: PathBuf,
    /// Weakening parameter (rational, e.g. 1/1000 or 0.001)
    #[arg(long, default_value = "1/1000", value_parser = parse_rational)]
    delta: Rational,
    /// Linearisation strategy
    #[arg(long, default_value = "local", value_parser = parse_mode)]
    mode: LinMode,
    /// Rule application limit
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    /// Write the run trace (one JSON object per line) to this path
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Cross-check the result against the reference branch-and-prune decider
    #[arg(long)]
    check_oracle: bool,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    let parse_int = |t: &str| -> Result<BigInt, String> {
        t.parse::<BigInt>().map_err(|e| format!("bad integer '{t}': {e}"))
    };
    let q = if let Some((n, d)) = s.split_once('/') {
        let d = parse_int(d)?;
        if d == BigInt::from(0) {
            return Err("zero denominator".into());
        }
        Rational::new(parse_int(n)?, d)
    } else if let Some((w, f)) = s.split_once('.') {
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad decimal '{s}'"));
        }
        let scale = BigInt::from(10u32).pow(f.len() as u32);
        let whole = parse_int(if w.is_empty() { "0" } else { w })?;
        let neg = whole.is_negative() || w.starts_with('-');
        let frac = parse_int(f)?;
        let num = whole * &scale + if neg { -frac } else { frac };
        Rational::new(num, scale)
    } else {
        Rational::from_integer(parse_int(s)?)
    };
    Ok(q)
}

fn parse_mode(s: &str) -> Result<LinMode, String> {
    match s {
        "full-box" => Ok(LinMode::FullBox),
        "local" => Ok(LinMode::Local),
        other => Err(format!("unknown mode '{other}' (expected full-box or local)")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !cli.delta.is_positive() {
        eprintln!("error: delta must be positive");
        return ExitCode::from(2);
    }
    let text = match std::fs::read_to_string(&cli.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.input.display());
            return ExitCode::from(2);
        }
    };
    let script = match deltasmt::parse(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.input.display());
            return ExitCode::from(2);
        }
    };
    let sf = to_separated_form(&normalize_predicates(&script));
    let opts = SolveOptions {
        delta: cli.delta.clone(),
        mode: cli.mode,
        limits: Limits {
            max_steps: cli.max_steps,
            wall_clock: None,
        },
    };
    let outcome = match solve(&sf, &opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    if let Some(path) = &cli.trace {
        let mut lines = String::new();
        for event in &outcome.trace {
            lines.push_str(&event.to_json_line(&sf.symbols));
            lines.push('\n');
        }
        if let Err(e) = std::fs::File::create(path).and_then(|mut f| f.write_all(lines.as_bytes()))
        {
            eprintln!("error: cannot write trace {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }

    for note in &outcome.notes {
        eprintln!("note: {note}");
    }

    let answer = match outcome.status {
        Status::Sat => "sat",
        Status::DeltaSat => "delta-sat",
        Status::Unsat => "unsat",
        Status::Running | Status::ResourceOut => "unknown",
    };
    println!("{answer}");
    if let Some(model) = &outcome.model {
        for v in sf.symbols.vars().take(sf.n_original) {
            if let Some(q) = model.get(v) {
                println!("(define-fun {} () Real {})", sf.symbols.name(v), q);
            }
        }
    }

    if cli.check_oracle {
        let reference = bp_decide(&sf, &cli.delta, 14);
        let agreement = match (&outcome.status, &reference) {
            (Status::DeltaSat | Status::Sat, _) => {
                let m = outcome.model.as_ref().unwrap();
                certify_delta_model(&sf, &cli.delta, m)
            }
            (Status::Unsat, BpResult::Unsat | BpResult::Unknown) => true,
            (Status::Unsat, BpResult::DeltaSat(witness)) => {
                // legal only in the overlap band: the witness must not
                // satisfy the unweakened formula
                exactly_satisfies(&sf, witness) != Some(true)
            }
            (Status::ResourceOut | Status::Running, _) => true,
        };
        if agreement {
            eprintln!("oracle-check: ok");
        } else {
            eprintln!("oracle-check: DISAGREEMENT");
            return ExitCode::from(1);
        }
    }

    match outcome.status {
        Status::Sat | Status::DeltaSat | Status::Unsat => ExitCode::SUCCESS,
        _ => ExitCode::from(1),
    }
}
