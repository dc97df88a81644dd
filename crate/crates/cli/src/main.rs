//! `doubling`: compute additive quantities, run single checks and campaigns.
//!
//! Exit status is 0 when nothing failed, 1 when some check failed and 2 on
//! usage, parse or configuration errors. Global flags can also be set
//! through `DOUBLING_FORMAT`, `DOUBLING_TOL`, `DOUBLING_JOBS`,
//! `DOUBLING_SEED` and `DOUBLING_METHOD`.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use doubling::energy::{energy, energy_k, energy_k_int, schur_count};
use doubling::fourier::{eta, spectrum};
use doubling::harness::{
    default_campaign, default_campaigns, run_campaign, CampaignSpec, Generator, Input, JsonlSink, Opts, Registry,
    RunOptions, Sink, Summary, Target,
};
use doubling::setops::{diffset, sumset};
use doubling::structure::{min_ap_cover_int, min_ap_cover_modp};
use doubling::{parse_set_literal, Error, GSet, Method, Outcome, Verdict};

#[derive(Parser, Debug)]
#[command(name = "doubling", version, about = "Small-doubling toolkit: set algebra, energies, Fourier bias, AP covers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text", env = "DOUBLING_FORMAT")]
    format: Format,
    /// Relative tolerance for floating-point comparisons.
    #[arg(long, global = true, default_value_t = doubling::DEFAULT_TOL, env = "DOUBLING_TOL")]
    tol: f64,
    /// Worker threads for campaigns (0 = all cores).
    #[arg(long, global = true, default_value_t = 0, env = "DOUBLING_JOBS")]
    jobs: usize,
    /// Seed for random campaigns; overrides the campaign file.
    #[arg(long, global = true, env = "DOUBLING_SEED")]
    seed: Option<u64>,
    /// Algorithm path for set operations.
    #[arg(long, global = true, value_enum, default_value = "fast", env = "DOUBLING_METHOD")]
    method: MethodArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Jsonl,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Fast,
    Naive,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a single quantity.
    Compute(ComputeArgs),
    /// Run one registered check and print its verdict.
    Check(CheckArgs),
    /// Run a campaign from flags, a TOML file or a built-in name.
    Campaign(CampaignArgs),
    /// List registered checks and built-in campaigns.
    List,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ComputeTarget {
    Sumset,
    Diffset,
    Energy,
    EnergyK,
    Eta,
    Spectrum,
    Apcover,
    Schur,
}

#[derive(Args, Debug)]
struct ComputeArgs {
    target: ComputeTarget,
    /// Set literal, e.g. "p=13: 0,1,3" or "G=4x4: (0,0),(1,2)"; "Z: ..." for integer covers.
    #[arg(long)]
    set: String,
    /// Second operand for sumset, diffset and energy (defaults to the first).
    #[arg(long)]
    b: Option<String>,
    /// Order of E_k.
    #[arg(long, default_value = "3")]
    k: f64,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Check id, or a family such as `theorem`, `rectify`, `convolution_sum`.
    id: String,
    #[arg(long)]
    set: Option<String>,
    /// Second set for pair checks.
    #[arg(long)]
    b: Option<String>,
    /// Integer set for integer checks, e.g. "0,1,2,5".
    #[arg(long)]
    ints: Option<String>,
    /// Theorem preset: freiman24, diff26, sum259.
    #[arg(long)]
    preset: Option<String>,
    /// sum or diff.
    #[arg(long)]
    kind: Option<String>,
    /// Doubling cap for rectification, e.g. 2.4 or 12/5.
    #[arg(long)]
    kcap: Option<String>,
}

#[derive(Args, Debug)]
struct CampaignArgs {
    /// Campaign file (TOML).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Built-in campaign name (see `list`).
    #[arg(long = "default", value_name = "NAME")]
    builtin: Option<String>,
    /// Enumerate every subset of each group.
    #[arg(long)]
    exhaustive: bool,
    /// Random generator.
    #[arg(long, value_enum)]
    generator: Option<GeneratorArg>,
    /// Cyclic group Z_p; repeatable.
    #[arg(long = "p")]
    primes: Vec<u64>,
    /// Product group such as 4x4; repeatable.
    #[arg(long = "group")]
    groups: Vec<String>,
    /// Set corpus, one literal per line.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Comma-separated check ids; `all` and `all-small` are accepted.
    #[arg(long)]
    checks: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    min_size: Option<usize>,
    #[arg(long)]
    max_size: Option<usize>,
    #[arg(long)]
    noise: Option<usize>,
    #[arg(long, value_enum)]
    target: Option<TargetArg>,
    /// Integer window [0, N] for integer checks.
    #[arg(long)]
    int_span: Option<u64>,
    /// Instance cap for exhaustive scans.
    #[arg(long)]
    cap: Option<u64>,
    /// Verdict file; failures also go to counterexamples.jsonl beside it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append to the output files instead of truncating them.
    #[arg(long)]
    append: bool,
    /// Print every verdict in text mode, not only failures.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GeneratorArg {
    RandomSubset,
    ApPerturbed,
    UnionOfAps,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TargetArg {
    None,
    HalfDiff,
    Schur,
    Freiman24,
    Diff26,
    Sum259,
}

enum Failure {
    Usage(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Writes a line to stdout. A closed pipe ends the process quietly, as
/// when output is piped into `head`.
macro_rules! out {
    ($($t:tt)*) => {{
        let mut lock = std::io::stdout().lock();
        if let Err(e) = writeln!(lock, $($t)*) {
            pipe_closed(e);
        }
    }};
}

fn pipe_closed(e: std::io::Error) -> std::io::Error {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        std::process::exit(0);
    }
    e
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = cli.global.clone();
    let result = if !(g.tol > 0.0 && g.tol.is_finite()) {
        Err(Failure::Usage(format!("--tol must be positive, got {}", g.tol)))
    } else {
        match cli.command {
            Command::Compute(a) => compute(&g, a),
            Command::Check(a) => check(&g, a),
            Command::Campaign(a) => campaign(&g, a),
            Command::List => list(&g),
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn opts(g: &Global) -> Opts {
    let method = match g.method {
        MethodArg::Fast => Method::Fast,
        MethodArg::Naive => Method::Naive,
    };
    Opts { method, tol: g.tol }
}

fn emit(g: &Global, text: String, value: Value) {
    match g.format {
        Format::Text => out!("{text}"),
        Format::Jsonl => out!("{value}"),
    }
}

fn parse_ints(s: &str) -> Result<Vec<i64>, Failure> {
    let body = s.trim().strip_prefix("Z:").unwrap_or(s);
    let mut v = body
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| Failure::Usage(format!("not an integer: `{t}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

fn compute(g: &Global, a: ComputeArgs) -> CliResult {
    let target = a.target;
    if matches!(target, ComputeTarget::Apcover) && a.set.trim_start().starts_with("Z:") {
        let v = parse_ints(&a.set)?;
        let c = min_ap_cover_int(&v)?;
        emit(g, c.to_string(), json!({ "target": "apcover", "set": a.set, "cover": c }));
        return Ok(());
    }
    let set = parse_set_literal(&a.set)?;
    let other = match &a.b {
        Some(b) => parse_set_literal(b)?,
        None => set.clone(),
    };
    let name = format!("{target:?}").to_lowercase();
    let (text, value): (String, Value) = match target {
        ComputeTarget::Sumset | ComputeTarget::Diffset => {
            let r = if matches!(target, ComputeTarget::Sumset) { sumset(&set, &other)? } else { diffset(&set, &other)? };
            (r.literal(), json!({ "result": r.literal(), "card": r.card() }))
        }
        ComputeTarget::Energy => {
            let e = energy(&set, &other)?;
            (e.to_string(), json!({ "energy": e.to_string() }))
        }
        ComputeTarget::EnergyK => {
            if a.k.fract() == 0.0 && a.k >= 1.0 && a.k <= 64.0 {
                let e = energy_k_int(&set, a.k as u32)?;
                (e.to_string(), json!({ "k": a.k, "energy_k": e.to_string() }))
            } else {
                let e = energy_k(&set, a.k)?;
                (format!("{e:.6}"), json!({ "k": a.k, "energy_k": e }))
            }
        }
        ComputeTarget::Eta => {
            let (e, xi) = eta(&set)?;
            (format!("{e:.6}"), json!({ "eta": e, "argmax_char": xi }))
        }
        ComputeTarget::Spectrum => {
            let s = spectrum(&set)?;
            let mut lines = Vec::with_capacity(s.coeffs.len() + 1);
            for (i, c) in s.coeffs.iter().enumerate() {
                let chi = set.group().element_literal(i);
                lines.push(format!("{chi}\t{:.6}\t{:.6}\t{:.6}", c.re, c.im, c.norm()));
            }
            lines.push(format!("eta\t{:.6}\targmax\t{}", s.eta, set.group().element_literal(s.argmax_char)));
            let re: Vec<f64> = s.coeffs.iter().map(|c| c.re).collect();
            let im: Vec<f64> = s.coeffs.iter().map(|c| c.im).collect();
            (lines.join("\n"), json!({ "re": re, "im": im, "eta": s.eta, "argmax_char": s.argmax_char }))
        }
        ComputeTarget::Apcover => {
            let c = min_ap_cover_modp(&set)?;
            (c.to_string(), json!({ "cover": c }))
        }
        ComputeTarget::Schur => {
            let n = schur_count(&set)?;
            (n.to_string(), json!({ "schur_triples": n }))
        }
    };
    let mut value = value;
    value["target"] = json!(name);
    value["set"] = json!(set.literal());
    emit(g, text, value);
    Ok(())
}

fn check_id(reg: &Registry, a: &CheckArgs) -> Result<String, Failure> {
    if reg.get(&a.id).is_some() || a.id.contains(':') {
        return Ok(a.id.clone());
    }
    let id = match (&a.preset, &a.kind, &a.kcap) {
        (Some(p), _, _) => format!("{}:{p}", a.id),
        (None, Some(k), Some(c)) => format!("{}:{k}:{c}", a.id),
        (None, Some(k), None) => format!("{}:{k}", a.id),
        (None, None, Some(c)) => format!("{}:sum:{c}", a.id),
        (None, None, None) => a.id.clone(),
    };
    Ok(id)
}

fn render_verdict(v: &Verdict, verbose: bool) -> String {
    let tag = match v.pass {
        Outcome::Pass => "PASS",
        Outcome::Fail => "FAIL",
        Outcome::NotApplicable => "N/A ",
    };
    let mut out = format!("{tag} {} [{}]", v.check_id, v.set_repr);
    if v.pass == Outcome::NotApplicable {
        if let Some(r) = v.params.get("reason").and_then(Value::as_str) {
            out.push_str(&format!(": {r}"));
        }
        return out;
    }
    if let Some(b) = v.params.get("binding").and_then(Value::as_str) {
        let rel = v.params.get("relation").and_then(Value::as_str).unwrap_or("?");
        out.push_str(&format!(": {b}: {} {rel} {} (margin {:.6e})", v.lhs, v.rhs, v.margin));
    }
    if let Some(w) = &v.witness {
        out.push_str(&format!("\n  witness: {w}"));
    }
    if verbose {
        if let Some(Value::Array(cs)) = v.params.get("comparisons") {
            for c in cs {
                let flag = if c["holds"].as_bool() == Some(true) { "ok " } else { "BAD" };
                let info = if c["gating"].as_bool() == Some(false) { " (informational)" } else { "" };
                out.push_str(&format!(
                    "\n  {flag} {}: {} {} {}{info}",
                    c["name"].as_str().unwrap_or(""),
                    c["lhs"].as_str().unwrap_or(""),
                    c["relation"].as_str().unwrap_or(""),
                    c["rhs"].as_str().unwrap_or(""),
                ));
            }
        }
        if let Some(t) = v.params.get("trace") {
            out.push_str("\n  trace:");
            if let Value::Object(m) = t {
                for (k, val) in m {
                    out.push_str(&format!("\n    {k}: {val}"));
                }
            }
        }
    }
    out
}

fn check(g: &Global, a: CheckArgs) -> CliResult {
    let reg = Registry::standard();
    let id = check_id(&reg, &a)?;
    let def = reg.resolve(&id)?;
    let opts = opts(g);
    let set = a.set.as_deref().map(parse_set_literal);
    let v = match def.arity {
        doubling::harness::Arity::Ints => {
            let src = a
                .ints
                .as_deref()
                .or(a.set.as_deref())
                .ok_or_else(|| Failure::Usage(format!("`{id}` needs --ints")))?;
            let ints = parse_ints(src)?;
            def.run(Input::Ints(&ints), &opts)
        }
        arity => {
            let set: GSet = set.ok_or_else(|| Failure::Usage(format!("`{id}` needs --set")))??;
            if arity == doubling::harness::Arity::Pair {
                let b = match &a.b {
                    Some(b) => parse_set_literal(b)?,
                    None => return Err(Failure::Usage(format!("`{id}` needs --b"))),
                };
                def.run(Input::Pair(&set, &b), &opts)
            } else {
                def.run(Input::Set(&set), &opts)
            }
        }
    };
    emit(g, render_verdict(&v, true), serde_json::to_value(&v).expect("verdict serializes"));
    if v.is_fail() { Err(Failure::Checks) } else { Ok(()) }
}

fn parse_shape(s: &str) -> Result<Vec<u64>, Failure> {
    s.split(['x', 'X', '*'])
        .map(|t| t.trim().parse::<u64>().map_err(|_| Failure::Usage(format!("bad group shape `{s}`"))))
        .collect()
}

fn build_spec(g: &Global, a: &CampaignArgs) -> Result<CampaignSpec, Failure> {
    let mut spec = if let Some(path) = &a.spec {
        CampaignSpec::from_path(path)?
    } else if let Some(name) = &a.builtin {
        default_campaign(name).ok_or_else(|| {
            let names: Vec<String> = default_campaigns().into_iter().map(|c| c.name).collect();
            Failure::Usage(format!("unknown campaign `{name}`; built-in: {}", names.join(", ")))
        })?
    } else {
        let generator = if a.file.is_some() {
            Generator::FileCorpus
        } else if a.exhaustive {
            Generator::Exhaustive
        } else {
            match a.generator {
                Some(GeneratorArg::ApPerturbed) => Generator::ApPerturbed,
                Some(GeneratorArg::UnionOfAps) => Generator::UnionOfAps,
                Some(GeneratorArg::RandomSubset) => Generator::RandomSubset,
                None => return Err(Failure::Usage("choose --exhaustive, --generator, --file, --spec or --default".into())),
            }
        };
        let checks = a.checks.as_deref().ok_or_else(|| Failure::Usage("--checks is required".into()))?;
        let mut spec = CampaignSpec::new("cli", generator, &[]);
        spec.checks = vec![checks.to_owned()];
        spec
    };
    if a.exhaustive {
        spec.generator = Generator::Exhaustive;
    }
    if let Some(file) = &a.file {
        spec.generator = Generator::FileCorpus;
        spec.corpus = Some(file.clone());
    }
    if !a.primes.is_empty() || !a.groups.is_empty() {
        spec.groups = a.primes.iter().map(|&p| vec![p]).collect();
        for s in &a.groups {
            spec.groups.push(parse_shape(s)?);
        }
    }
    if let Some(c) = &a.checks {
        spec.checks = vec![c.clone()];
    }
    if let Some(s) = g.seed {
        spec.seed = s;
    }
    spec.trials = a.trials.unwrap_or(spec.trials);
    spec.min_size = a.min_size.unwrap_or(spec.min_size);
    spec.max_size = a.max_size.or(spec.max_size);
    spec.noise = a.noise.unwrap_or(spec.noise);
    spec.int_span = a.int_span.or(spec.int_span);
    spec.cap = a.cap.unwrap_or(spec.cap);
    if let Some(t) = a.target {
        spec.target = match t {
            TargetArg::None => Target::None,
            TargetArg::HalfDiff => Target::HalfDiff,
            TargetArg::Schur => Target::Schur,
            TargetArg::Freiman24 => Target::Freiman24,
            TargetArg::Diff26 => Target::Diff26,
            TargetArg::Sum259 => Target::Sum259,
        };
    }
    Ok(spec)
}

/// Prints verdicts to stdout as they arrive.
struct StdoutSink {
    format: Format,
    verbose: bool,
    out: std::io::BufWriter<std::io::Stdout>,
}

impl Sink for StdoutSink {
    fn wants_all(&self) -> bool {
        self.format == Format::Jsonl || self.verbose
    }

    fn emit(&mut self, v: &Verdict) -> doubling::Result<()> {
        match self.format {
            Format::Jsonl => writeln!(self.out, "{}", v.to_json_line()),
            Format::Text => writeln!(self.out, "{}", render_verdict(v, false)),
        }
        .map_err(pipe_closed)?;
        Ok(())
    }

    fn finish(&mut self, summary: &Summary) -> doubling::Result<()> {
        if self.format == Format::Jsonl {
            writeln!(self.out, "{}", summary.to_json_line()).map_err(pipe_closed)?;
        }
        self.out.flush().map_err(pipe_closed)?;
        Ok(())
    }
}

fn print_tallies(s: &Summary) {
    out!(
        "campaign {} ({}): {} instances, {} verdicts: {} pass, {} fail, {} not applicable, {} discrepancies",
        s.campaign, s.generator, s.instances, s.verdicts, s.pass, s.fail, s.not_applicable, s.discrepancies
    );
    for (id, t) in &s.per_check {
        out!("  {id:<24} pass {:>10}  fail {:>6}  n/a {:>10}", t.pass, t.fail, t.not_applicable);
    }
}

fn campaign(g: &Global, a: CampaignArgs) -> CliResult {
    let spec = build_spec(g, &a)?;
    let run = RunOptions { opts: opts(g), jobs: g.jobs };
    let summary = if let Some(path) = &a.out {
        let mut sink = JsonlSink::to_files(path, a.append)?;
        let s = run_campaign(&spec, &run, &mut sink)?;
        match g.format {
            Format::Text => print_tallies(&s),
            Format::Jsonl => out!("{}", s.to_json_line()),
        }
        s
    } else {
        let verbose = a.verbose || spec.generator == Generator::FileCorpus;
        let mut sink = StdoutSink { format: g.format, verbose, out: std::io::BufWriter::new(std::io::stdout()) };
        let s = run_campaign(&spec, &run, &mut sink)?;
        drop(sink);
        if g.format == Format::Text {
            print_tallies(&s);
        }
        s
    };
    if summary.is_clean() { Ok(()) } else { Err(Failure::Checks) }
}

fn list(g: &Global) -> CliResult {
    let reg = Registry::standard();
    let campaigns = default_campaigns();
    match g.format {
        Format::Text => {
            out!("checks:");
            for d in reg.iter() {
                out!("  {:<24} {:<5} {}", d.id, d.arity, d.about);
            }
            out!("campaigns:");
            for c in &campaigns {
                out!("  {:<24} {:<14} {}", c.name, c.generator.as_str(), c.checks.join(","));
            }
        }
        Format::Jsonl => {
            for d in reg.iter() {
                out!("{}", json!({ "check": d.id, "arity": d.arity.to_string(), "about": d.about }));
            }
            for c in &campaigns {
                out!("{}", json!({ "campaign": c }));
            }
        }
    }
    Ok(())
}
