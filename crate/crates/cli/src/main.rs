mod cache;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dendeg::boundrules::{
    nondensity_cubic_certificate, nondensity_quadratic_certificate, parity_cubic_hypotheses, roster_json, Assumption,
    CertificateReport, CubicAssertions, EngineOptions, ParityCubicAssertions, QuadraticAssertions, Request, RuleError,
};
use dendeg::curvemodel::{EllipticCurve, HyperellipticCurve};
use dendeg::fixtures::fixtures;
use dendeg::localsolve::{degree_divisibility_with, quadratic_obstruction_with, verify_certificate, LocalCertificate};
use dendeg::rootnumber::{find_parity_twist, DEFAULT_TWIST_BOUND};
use dendeg::Exec;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::input::{parse, read_json, Failure};
use crate::report::{Output, Style};

#[derive(Parser)]
#[command(name = "dendeg", version, about = "Density degree sets of curves and products of curves")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Comparisons and printed sets cover [1, WINDOW].
    #[arg(long, global = true, default_value_t = 200)]
    window: u64,
    /// Compact JSON output.
    #[arg(long, global = true, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    /// Run batch work on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

impl Global {
    fn style(&self) -> Style {
        if self.pretty {
            Style::Pretty
        } else if self.json {
            Style::Json
        } else {
            Style::Text
        }
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    fn engine(&self) -> EngineOptions {
        EngineOptions { window: self.window, exec: self.exec(), ..Default::default() }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Curve,
    Product,
    Jacobian,
    Bielliptic,
    Abelian,
    Potential,
}

impl Op {
    fn tag(self) -> &'static str {
        match self {
            Op::Curve => "curve",
            Op::Product => "product",
            Op::Jacobian => "jacobian",
            Op::Bielliptic => "bielliptic",
            Op::Abelian => "abelian",
            Op::Potential => "potential",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CertKind {
    Quadratic,
    Cubic,
    ParityCubic,
}

#[derive(Subcommand)]
enum Command {
    /// Bound a density degree set from a JSON request.
    Delta {
        op: Op,
        /// Request file; stdin when absent or "-".
        input: Option<PathBuf>,
        /// Accept a conjecture (ParityConjecture, IsotrivialFibration, BombieriLang).
        #[arg(long = "assume", value_parser = parse_assumption)]
        assume: Vec<Assumption>,
    },
    /// Evaluate a JSON array of requests, each carrying its own "op".
    Batch { input: Option<PathBuf> },
    /// Local solvability certificates for a curve at a prime.
    Local {
        /// Curve file {"f": [...], "h": [...]}; stdin when absent or "-".
        input: Option<PathBuf>,
        #[arg(long)]
        p: u64,
        /// Degrees 1..=DMAX of local points.
        #[arg(long, default_value_t = 2, conflicts_with = "pair")]
        dmax: u32,
        /// Second curve: check that no field of degree at most 2 has points on both.
        #[arg(long)]
        pair: Option<PathBuf>,
    },
    /// Re-check a local certificate (or the output of `local`).
    VerifyCertificate { input: Option<PathBuf> },
    /// Smallest imaginary quadratic field in which all bad primes of both curves split.
    ParityTwist {
        /// Fixture label, a-invariants such as "[0,0,0,484,0]", or a file.
        #[arg(long)]
        e1: String,
        #[arg(long)]
        e2: String,
        #[arg(long, default_value_t = DEFAULT_TWIST_BOUND)]
        bound: u64,
    },
    /// Check a non-density or cubic-point certificate.
    Certify { kind: CertKind, input: Option<PathBuf> },
    /// Curve data for a label: cache, then network with --online, then the embedded fixtures.
    Fetch {
        label: String,
        /// Allow a request to the LMFDB API.
        #[arg(long)]
        online: bool,
        /// Cache directory; defaults to $DENDEG_CACHE_DIR, then the user cache directory.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long, env = "DENDEG_LMFDB_URL", default_value = cache::DEFAULT_API_BASE)]
        api_base: String,
    },
    /// Run every embedded fixture case against its expected output.
    Selftest,
    /// Export the rule roster.
    Roster,
}

fn parse_assumption(s: &str) -> Result<Assumption, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|_| format!("unknown assumption {s}"))
}

fn main() -> ExitCode {
    // Usage errors exit with 1; 2 is reserved for missing facts.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let style = cli.global.style();
    match run(&cli) {
        Ok(out) => {
            out.emit(style);
            ExitCode::from(out.code)
        }
        Err(f) => {
            f.emit(style);
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Delta { op, input, assume } => {
            let mut value = read_json(input.as_deref())?;
            let obj = value.as_object_mut().ok_or_else(|| Failure::Schema("request must be a JSON object".into()))?;
            match obj.get("op") {
                None => {
                    obj.insert("op".into(), op.tag().into());
                }
                Some(v) if v == op.tag() => {}
                Some(v) => {
                    return Err(Failure::Schema(format!("request op {v} does not match subcommand {}", op.tag())))
                }
            }
            let mut req: Request = parse(value)?;
            req.assumptions.extend(assume.iter().copied());
            let r = req.run(&g.engine())?;
            Ok(report::bound(op.tag(), &r))
        }
        Command::Batch { input } => {
            let value = read_json(input.as_deref())?;
            let items = value.as_array().ok_or_else(|| Failure::Schema("batch input must be a JSON array".into()))?;
            let requests: Vec<Request> = items.iter().map(|v| parse(v.clone())).collect::<Result<_, _>>()?;
            let opts = g.engine();
            let results = g.exec().map(&requests, |r| r.run(&opts));
            Ok(report::batch(&requests, &results))
        }
        Command::Local { input, p, dmax, pair } => {
            let c: HyperellipticCurve = parse(read_json(input.as_deref())?)?;
            match pair {
                Some(path) => {
                    let d: HyperellipticCurve = parse(read_json(Some(path))?)?;
                    let (o, cert) = quadratic_obstruction_with(&c, &d, *p, g.exec()).map_err(RuleError::from)?;
                    Ok(report::local(json!({ "obstruction": o }), cert))
                }
                None => {
                    let (map, cert) = degree_divisibility_with(&c, *p, *dmax, g.exec()).map_err(RuleError::from)?;
                    Ok(report::local(json!({ "degrees": map }), cert))
                }
            }
        }
        Command::VerifyCertificate { input } => {
            let mut value = read_json(input.as_deref())?;
            if let Some(inner) = value.get("certificate") {
                value = inner.clone();
            }
            let cert: LocalCertificate = parse(value)?;
            Ok(report::verified(verify_certificate(&cert)))
        }
        Command::ParityTwist { e1, e2, bound } => {
            let (a, b) = (input::elliptic(e1)?, input::elliptic(e2)?);
            let t = find_parity_twist(&a, &b, *bound, g.exec()).map_err(RuleError::from)?;
            Ok(report::twist(&t))
        }
        Command::Certify { kind, input } => {
            let value = read_json(input.as_deref())?;
            let report = certify(*kind, value)?;
            Ok(report::certificate(&report))
        }
        Command::Fetch { label, online, cache_dir, api_base } => {
            let dir = cache::resolve_dir(cache_dir.as_deref())?;
            let (curve, origin) = cache::fetch(label, &dir, *online, api_base)?;
            Ok(report::fetched(&curve, origin))
        }
        Command::Selftest => {
            let set = fixtures();
            let opts = EngineOptions { exec: g.exec(), ..Default::default() };
            let rows = set
                .cases
                .iter()
                .map(|case| match set.check(case, &opts) {
                    Ok((_, m)) => (case.name.clone(), m),
                    Err(e) => (case.name.clone(), vec![e.to_string()]),
                })
                .collect::<Vec<_>>();
            let mut unanchored = set.unanchored_facts();
            unanchored.iter_mut().for_each(|f| *f = format!("asserted fact without a source: {f}"));
            Ok(report::selftest(rows, unanchored))
        }
        Command::Roster => Ok(report::roster(&roster_json())),
    }
}

fn certify(kind: CertKind, value: Value) -> Result<CertificateReport, Failure> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Pair<A> {
        c: HyperellipticCurve,
        d: HyperellipticCurve,
        assertions: A,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct ParityCubic {
        e: EllipticCurve,
        c: HyperellipticCurve,
        assertions: ParityCubicAssertions,
    }
    Ok(match kind {
        CertKind::Quadratic => {
            let p: Pair<QuadraticAssertions> = parse(value)?;
            nondensity_quadratic_certificate(&p.c, &p.d, &p.assertions)?
        }
        CertKind::Cubic => {
            let p: Pair<CubicAssertions> = parse(value)?;
            nondensity_cubic_certificate(&p.c, &p.d, &p.assertions)?
        }
        CertKind::ParityCubic => {
            let p: ParityCubic = parse(value)?;
            parity_cubic_hypotheses(&p.e, &p.c, &p.assertions)?
        }
    })
}
