mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hirzfloor::chambers::{build_arrangement, Signature};
use hirzfloor::diagram::{DivergenceSpec, MultiplicityVector, SparseSeq};
use hirzfloor::enumerate::enumerate_diagrams;
use hirzfloor::invariants::{compute_f, compute_n, InvariantQuery};
use hirzfloor::pieces::{chamber_polynomial, degree_parity_report, signature_of, FitOptions, PieceShape};
use hirzfloor::verify::{run_suite, Suite, VerifyOptions};
use hirzfloor::Error;

use config::{Format, RunConfig, CONFIG_ENV};

#[derive(Parser, Debug)]
#[command(name = "hirzfloor", version, about = "Floor-diagram counts of curves on Hirzebruch surfaces")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Seed for sampling and random suites
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest search radius for chamber points
    #[arg(long, global = true)]
    box_bound: Option<u64>,
    #[arg(long, global = true)]
    max_templates: Option<u64>,
    #[arg(long, global = true)]
    max_lattice_points: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// key = value file; defaults to $HIRZFLOOR_CONFIG
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute N_g^{α,β,α̃,β̃}(a,b,k)
    Invariant(InvariantArgs),
    /// Compute F at a point of the lattice
    F(FArgs),
    /// Fit the polynomial piece of F on one chamber
    ChamberPoly(ChamberArgs),
    /// Run a verification suite
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct InvariantArgs {
    #[arg(long)]
    a: u64,
    #[arg(long)]
    b: u64,
    #[arg(long)]
    k: u64,
    #[arg(long, default_value_t = 0)]
    g: u64,
    /// Sparse i:count list
    #[arg(long, default_value = "")]
    alpha: String,
    #[arg(long, default_value = "")]
    beta: String,
    #[arg(long, default_value = "")]
    alpha_tilde: String,
    #[arg(long, default_value = "")]
    beta_tilde: String,
    /// Print every diagram with its multiplicity and the running sum
    #[arg(long)]
    list_diagrams: bool,
}

#[derive(Args, Debug)]
struct FArgs {
    #[arg(long)]
    a: u64,
    #[arg(long)]
    k: u64,
    #[arg(long, default_value_t = 0)]
    g: u64,
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    x: Vec<i64>,
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    y: Vec<i64>,
}

#[derive(Args, Debug)]
struct ChamberArgs {
    #[arg(long)]
    a: u64,
    #[arg(long)]
    k: u64,
    #[arg(long, default_value_t = 0)]
    g: u64,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    /// One of + or − per wall
    #[arg(long, allow_hyphen_values = true, conflicts_with = "point", required_unless_present = "point")]
    signature: Option<String>,
    /// Ambient point x1,..,y1,.. inside the chamber
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    point: Option<Vec<i64>>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// paper-values, figure1, table1, degree-parity, joint-parity,
    /// reciprocity, inclusion-exclusion, oracle, gamma or symmetry
    suite: String,
    #[arg(long)]
    trials: Option<usize>,
    /// table1 only
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<u64>>,
    /// table1 only
    #[arg(long, value_delimiter = ',')]
    g: Option<Vec<u64>>,
}

/// A failed run: message and exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } | Error::Overflow => 3,
            Error::Sampling { .. } | Error::Interpolation(_) => 4,
            Error::HoldoutMismatch { .. } => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn resolve_config(g: &GlobalArgs) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    let path = g.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    if let Some(p) = path {
        cfg.load_file(&p).map_err(usage)?;
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = g.box_bound {
        cfg.box_bound = v;
    }
    if let Some(v) = g.max_templates {
        cfg.budget.max_templates = v;
    }
    if let Some(v) = g.max_lattice_points {
        cfg.budget.max_lattice_points = v;
    }
    if let Some(v) = g.format {
        cfg.format = v;
    }
    if let Some(v) = &g.output {
        cfg.output = (v.as_os_str() != "-").then(|| v.clone());
    }
    if let Some(v) = g.workers {
        cfg.workers = v;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn query_name(g: u64, mv: &MultiplicityVector, a: u64, b: u64, k: u64) -> String {
    format!("N_{g}^{{{mv}}}({a},{b},{k})")
}

fn query_latex(g: u64, mv: &MultiplicityVector, a: u64, b: u64, k: u64) -> String {
    format!("N_{{{g}}}^{{{mv}}}({a},{b},{k})")
}

fn write_json(out: &mut dyn Write, v: &Value, pretty: bool) -> io::Result<()> {
    if pretty {
        serde_json::to_writer_pretty(&mut *out, v)?;
    } else {
        serde_json::to_writer(&mut *out, v)?;
    }
    writeln!(out)
}

fn cmd_invariant(args: &InvariantArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<u8, Failure> {
    let mv = MultiplicityVector {
        alpha: SparseSeq::parse(&args.alpha)?,
        beta: SparseSeq::parse(&args.beta)?,
        alpha_tilde: SparseSeq::parse(&args.alpha_tilde)?,
        beta_tilde: SparseSeq::parse(&args.beta_tilde)?,
    };
    let q = InvariantQuery::new(args.a, args.b, args.k, args.g, mv.clone())?;
    let name = query_name(args.g, &mv, args.a, args.b, args.k);
    if args.list_diagrams {
        let diagrams = enumerate_diagrams(&q.enumeration_query()?, &cfg.budget)?;
        let mut sum: u128 = 0;
        for (d, m) in &diagrams {
            sum += m;
            let diagram: Value = serde_json::from_str(&d.to_json()).expect("diagram JSON round-trips");
            let line = json!({"diagram": diagram, "multiplicity": m.to_string(), "running_sum": sum.to_string()});
            write_json(out, &line, false)?;
        }
        match cfg.format {
            Format::Text => writeln!(out, "{sum}")?,
            Format::Latex => writeln!(out, "{} = {sum}", query_latex(args.g, &mv, args.a, args.b, args.k))?,
            Format::Json | Format::Jsonl => {
                write_json(out, &json!({"query": name, "diagrams": diagrams.len(), "total": sum.to_string()}), false)?
            }
        }
        return Ok(0);
    }
    let n = compute_n(&q, &cfg.budget)?;
    match cfg.format {
        Format::Text => writeln!(out, "{n}")?,
        Format::Latex => writeln!(out, "{} = {n}", query_latex(args.g, &mv, args.a, args.b, args.k))?,
        Format::Json => write_json(out, &invariant_json(&q, &name, n), true)?,
        Format::Jsonl => write_json(out, &invariant_json(&q, &name, n), false)?,
    }
    Ok(0)
}

fn invariant_json(q: &InvariantQuery, name: &str, n: u128) -> Value {
    json!({
        "query": name,
        "a": q.a(), "b": q.b(), "k": q.k(), "g": q.g(),
        "vector": q.multiplicities().to_string(),
        "point_conditions": q.l(),
        "value": n.to_string(),
    })
}

fn cmd_f(args: &FArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<u8, Failure> {
    if args.a == 0 {
        return Err(Error::ZeroA.into());
    }
    let spec = DivergenceSpec::new(args.x.clone(), args.y.clone(), args.k, args.a)?;
    let mv = spec.multiplicities();
    let b = mv.alpha_tilde.weighted_sum() + mv.beta_tilde.weighted_sum();
    let value = compute_f(args.a, args.k, args.g, &args.x, &args.y, &cfg.budget)?;
    let name = query_name(args.g, &mv, args.a, b, args.k);
    let point: Vec<i64> = args.x.iter().chain(&args.y).copied().collect();
    let (chamber, label) = match build_arrangement(args.x.len(), args.y.len(), args.a, args.k) {
        Ok(arr) => match arr.signature(&point) {
            Ok(sig) => (Some(sig.to_string()), arr.table_label(&sig)),
            Err(Error::OnWall(w)) => (Some(format!("on wall {w}")), None),
            Err(e) => return Err(e.into()),
        },
        Err(_) => (None, None),
    };
    match cfg.format {
        Format::Text => {
            writeln!(out, "{value}")?;
            writeln!(out, "query: {name}")?;
            writeln!(out, "alpha: {}", mv.alpha.compact())?;
            writeln!(out, "beta: {}", mv.beta.compact())?;
            writeln!(out, "alpha_tilde: {}", mv.alpha_tilde.compact())?;
            writeln!(out, "beta_tilde: {}", mv.beta_tilde.compact())?;
            writeln!(out, "b: {b}")?;
            if let Some(c) = &chamber {
                writeln!(out, "chamber: {}", label.as_deref().unwrap_or(c))?;
            }
        }
        Format::Latex => writeln!(out, "{} = {value}", query_latex(args.g, &mv, args.a, b, args.k))?,
        Format::Json | Format::Jsonl => {
            let v = json!({
                "value": value.to_string(),
                "query": name,
                "alpha": mv.alpha.compact(),
                "beta": mv.beta.compact(),
                "alpha_tilde": mv.alpha_tilde.compact(),
                "beta_tilde": mv.beta_tilde.compact(),
                "b": b,
                "signature": chamber,
                "label": label,
            });
            write_json(out, &v, cfg.format == Format::Json)?;
        }
    }
    Ok(0)
}

fn cmd_chamber_poly(args: &ChamberArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<u8, Failure> {
    let shape = PieceShape { a: args.a, g: args.g, n1: args.n1, n2: args.n2 };
    let sig = match (&args.signature, &args.point) {
        (Some(s), _) => Signature::parse(s)?,
        (None, Some(p)) => signature_of(shape, args.k, p)?,
        (None, None) => return Err(usage("one of --signature or --point is required")),
    };
    let opts = FitOptions { seed: cfg.seed, budget: cfg.budget, box_bound: cfg.box_bound, ..FitOptions::default() };
    let piece = chamber_polynomial(shape, args.k, &sig, &opts)?;
    let report = degree_parity_report(&piece);
    match cfg.format {
        Format::Text => {
            writeln!(out, "signature: {}", piece.signature)?;
            if let Some(l) = &piece.label {
                writeln!(out, "label: {l}")?;
            }
            writeln!(out, "polynomial: {}", piece.polynomial.to_text())?;
            if let Some(j) = &piece.joint {
                writeln!(out, "joint: {}", j.to_text())?;
            }
            writeln!(out, "degree: {} (expected {})", fmt_opt(report.degree), report.expected_degree)?;
            if let Some(p) = report.fixed_k_parity {
                writeln!(out, "parity at k = 0: {}", pass_word(p))?;
            }
            if let Some(p) = report.joint_parity {
                writeln!(out, "joint parity: {}", pass_word(p))?;
            }
            writeln!(out, "samples: {}, holdouts: {}", piece.samples.len(), piece.holdouts.len())?;
        }
        Format::Latex => writeln!(out, "{}", piece.polynomial.to_latex())?,
        Format::Json | Format::Jsonl => {
            let mut v = piece.to_json();
            v["report"] = report.to_json();
            write_json(out, &v, cfg.format == Format::Json)?;
        }
    }
    Ok(0)
}

fn fmt_opt(d: Option<u32>) -> String {
    d.map_or_else(|| "none".to_string(), |d| d.to_string())
}

fn pass_word(p: bool) -> &'static str {
    if p { "pass" } else { "fail" }
}

fn cmd_verify(args: &VerifyArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<u8, Failure> {
    let suite = Suite::parse(&args.suite)?;
    let opts = VerifyOptions { seed: cfg.seed, trials: args.trials, ks: args.k.clone(), gs: args.g.clone(), budget: cfg.budget };
    let report = run_suite(suite, &opts)?;
    match cfg.format {
        Format::Text | Format::Latex => {
            for c in &report.checks {
                writeln!(out, "{} {}", if c.pass { "pass" } else { "FAIL" }, c.name)?;
            }
            writeln!(out, "{}: {}", suite, if report.pass() { "pass" } else { "FAIL" })?;
        }
        Format::Json => write_json(out, &report.to_json(), true)?,
        Format::Jsonl => write_json(out, &report.to_json(), false)?,
    }
    Ok(if report.pass() { 0 } else { 1 })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let cfg = resolve_config(&cli.global)?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global().map_err(|e| usage(e.to_string()))?;
    }
    let mut out: Box<dyn Write> = match &cfg.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let code = match &cli.command {
        Command::Invariant(a) => cmd_invariant(a, &cfg, &mut out),
        Command::F(a) => cmd_f(a, &cfg, &mut out),
        Command::ChamberPoly(a) => cmd_chamber_poly(a, &cfg, &mut out),
        Command::Verify(a) => cmd_verify(a, &cfg, &mut out),
    };
    out.flush()?;
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
