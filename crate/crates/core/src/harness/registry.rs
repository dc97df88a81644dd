use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::energy::{
    convolution_sum_check_with, cs_bound_check_with, lemma34_check_with, mixed_energy_check_with,
    moments_check_with, triple_sums_check_with,
};
use crate::error::{Error, Result};
use crate::exact::{format_q, parse_q, Q};
use crate::fourier::{
    energy_spectrum_check_with, eta_chain_check_with, parseval_check_with, spectral_product_bound_with,
    spectrum_paths_check, weak_eta_check_with,
};
use crate::group::GSet;
use crate::setops::{combine_with, katz_koester_check_with, Kind, Method};
use crate::structure::{cd_vosper_check_with, freiman_3n4_check, rectify_check_with, theorem_predicate_with, TheoremPreset};
use crate::verdict::{Outcome, Verdict, VerdictBuilder};

use super::appendix::appendix_chain_check_with;

/// What a check consumes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Arity {
    Set,
    Pair,
    Ints,
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arity::Set => "set",
            Arity::Pair => "pair",
            Arity::Ints => "ints",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Input<'a> {
    Set(&'a GSet),
    Pair(&'a GSet, &'a GSet),
    Ints(&'a [i64]),
}

impl Input<'_> {
    pub fn arity(&self) -> Arity {
        match self {
            Input::Set(_) => Arity::Set,
            Input::Pair(..) => Arity::Pair,
            Input::Ints(_) => Arity::Ints,
        }
    }
}

/// Evaluation options shared by every check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Opts {
    pub method: Method,
    pub tol: f64,
}

impl Default for Opts {
    fn default() -> Self {
        Opts { method: Method::Fast, tol: crate::DEFAULT_TOL }
    }
}

type RunFn = Arc<dyn Fn(Input<'_>, &Opts) -> Verdict + Send + Sync>;
type QuickFn = fn(Input<'_>) -> Option<Outcome>;

/// A registered check.
///
/// `quick`, when present, is an exact shortcut that may settle an instance
/// without building a verdict; it returns `None` whenever the full check is
/// needed. Sinks that record every verdict never use it.
#[derive(Clone)]
pub struct CheckDef {
    pub id: String,
    pub arity: Arity,
    pub about: String,
    run: RunFn,
    quick: Option<QuickFn>,
}

impl fmt::Debug for CheckDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CheckDef").field("id", &self.id).field("arity", &self.arity).finish()
    }
}

impl CheckDef {
    pub fn new(
        id: impl Into<String>,
        arity: Arity,
        about: impl Into<String>,
        run: impl Fn(Input<'_>, &Opts) -> Verdict + Send + Sync + 'static,
    ) -> Self {
        CheckDef { id: id.into(), arity, about: about.into(), run: Arc::new(run), quick: None }
    }

    pub fn with_quick(mut self, q: QuickFn) -> Self {
        self.quick = Some(q);
        self
    }

    /// Runs the check; inputs of the wrong shape yield not-applicable.
    pub fn run(&self, input: Input<'_>, opts: &Opts) -> Verdict {
        if input.arity() != self.arity {
            let (group, repr) = describe(input);
            return VerdictBuilder::new(&self.id, group, repr)
                .not_applicable(format!("check takes {} input, got {}", self.arity, input.arity()));
        }
        let mut v = (self.run)(input, opts);
        v.check_id = self.id.clone();
        v
    }

    pub fn quick(&self, input: Input<'_>) -> Option<Outcome> {
        self.quick.and_then(|q| q(input))
    }

    pub fn has_quick(&self) -> bool {
        self.quick.is_some()
    }
}

pub(crate) fn describe(input: Input<'_>) -> (String, String) {
    match input {
        Input::Set(a) | Input::Pair(a, _) => (a.group().descriptor(), a.literal()),
        Input::Ints(v) => ("Z".into(), crate::structure::int_literal(v)),
    }
}

fn set_check(
    id: &str,
    about: &str,
    f: impl Fn(&GSet, &Opts) -> Verdict + Send + Sync + 'static,
) -> CheckDef {
    CheckDef::new(id, Arity::Set, about, move |input, o| match input {
        Input::Set(a) => f(a, o),
        _ => unreachable!("arity checked by CheckDef::run"),
    })
}

fn kind_from(s: &str) -> Result<Kind> {
    s.parse()
}

/// Cauchy-Davenport on `u64` masks; defers to the full check when the Vosper
/// equality case is reached.
fn cd_vosper_quick(input: Input<'_>) -> Option<Outcome> {
    let Input::Pair(a, b) = input else { return None };
    let p = a.group().prime()?;
    if p > 64 || a.is_empty() || b.is_empty() || !std::sync::Arc::ptr_eq(a.group(), b.group()) {
        return None;
    }
    let full = if p == 64 { u64::MAX } else { (1u64 << p) - 1 };
    let bm = b.words()[0];
    let mut s = 0u64;
    let mut am = a.words()[0];
    while am != 0 {
        let x = am.trailing_zeros();
        am &= am - 1;
        s |= if x == 0 { bm } else { ((bm << x) | (bm >> (p as u32 - x))) & full };
        if s == full {
            break;
        }
    }
    let (na, nb, ns) = (a.card() as u64, b.card() as u64, s.count_ones() as u64);
    if ns < (na + nb - 1).min(p) {
        return None;
    }
    let vosper = na >= 2 && nb >= 2 && ns + 2 <= p && ns == na + nb - 1;
    if vosper { None } else { Some(Outcome::Pass) }
}

/// Every check known to the harness.
pub struct Registry {
    checks: BTreeMap<String, CheckDef>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::standard()
    }
}

impl Registry {
    pub fn standard() -> Self {
        let mut r = Registry { checks: BTreeMap::new() };
        r.register(set_check("katz_koester", "A_x -+ A within (A -+ A)_x for every x", |a, o| {
            katz_koester_check_with(a, o.method)
        }));
        r.register(set_check("triple_sums", "triple-intersection sums equal |A|^3 and E_3(A)", |a, o| {
            triple_sums_check_with(a, o.method)
        }));
        r.register(set_check("lemma34", "Schur triples: 4 count <= 3|D|^2 + 1 for odd |D| <= (2p+1)/3", |a, o| {
            lemma34_check_with(a, o.method)
        }));
        r.register(set_check("moments", "centered moment identities and the E_3 upper bound", |a, o| {
            moments_check_with(a, o.method)
        }));
        r.register(set_check("cs_bound", "energy lower bound for |A-A| < p/2", |a, o| cs_bound_check_with(a, o.method)));
        for kind in [Kind::Diff, Kind::Sum] {
            r.register(convolution_def(kind));
            r.register(spectral_product_def(kind));
            r.register(eta_chain_def(kind));
        }
        r.register(set_check("mixed_energy", "Hölder E_{3/2} bound and the mixed-energy inequality", |a, o| {
            mixed_energy_check_with(a, o.method, o.tol)
        }));
        r.register(set_check("parseval", "sum |A^|^2 = |A||G|", |a, o| parseval_check_with(a, o.method, o.tol)));
        r.register(set_check("energy_spectrum", "spectral energy equals the exact E(A)", |a, o| {
            energy_spectrum_check_with(a, o.method, o.tol)
        }));
        r.register(set_check("spectrum_paths", "FFT coefficients match direct character sums to 1e-12", |a, _| {
            spectrum_paths_check(a, 1e-12)
        }));
        r.register(set_check("weak_eta", "E(A) <= (alpha + eta^2)|A|^3 and the weak eta^2 bound", |a, o| {
            weak_eta_check_with(a, o.method, o.tol)
        }));
        r.register(set_check("appendix_chain", "explicit inequalities of the general-group bias argument", |a, o| {
            appendix_chain_check_with(a, o.method, o.tol)
        }));
        for preset in TheoremPreset::all() {
            r.register(theorem_def(preset));
        }
        for (kind, k) in [(Kind::Sum, "2.4"), (Kind::Diff, "2.6"), (Kind::Sum, "2.59")] {
            r.register(rectify_def(kind, parse_q(k).expect("literal"), k));
        }
        r.register(
            CheckDef::new("cd_vosper", Arity::Pair, "Cauchy-Davenport and Vosper's equality case", |input, o| {
                match input {
                    Input::Pair(a, b) => cd_vosper_check_with(a, b, o.method),
                    _ => unreachable!(),
                }
            })
            .with_quick(cd_vosper_quick),
        );
        for kind in [Kind::Sum, Kind::Diff] {
            r.register(CheckDef::new(
                format!("freiman_3n4:{}", kind.as_str()),
                Arity::Ints,
                "integer sets with |A±A| <= 3|A|-4 lie in a short AP",
                move |input, _| match input {
                    Input::Ints(v) => freiman_3n4_check(v, kind),
                    _ => unreachable!(),
                },
            ));
        }
        r
    }

    /// Adds a check, replacing any with the same id.
    pub fn register(&mut self, def: CheckDef) {
        self.checks.insert(def.id.clone(), def);
    }

    pub fn ids(&self) -> Vec<&str> {
        self.checks.keys().map(String::as_str).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CheckDef> {
        self.checks.values()
    }

    /// Looks up a check. Parametric families (`theorem:<preset>`,
    /// `rectify:<kind>:<K>`, `convolution_sum:<kind>` and friends) accept
    /// any parameter value, not just the registered instances.
    pub fn resolve(&self, id: &str) -> Result<CheckDef> {
        let parts: Vec<&str> = id.split(':').collect();
        let def = match parts.as_slice() {
            ["theorem", preset] => Some(theorem_def(TheoremPreset::by_name(preset)?)),
            ["rectify", kind, k] => Some(rectify_def(kind_from(kind)?, parse_q(k)?, k)),
            ["convolution_sum", kind] => Some(convolution_def(kind_from(kind)?)),
            ["spectral_product", kind] => Some(spectral_product_def(kind_from(kind)?)),
            ["eta_chain", kind] => Some(eta_chain_def(kind_from(kind)?)),
            ["freiman_3n4", kind] => {
                let kind = kind_from(kind)?;
                Some(CheckDef::new(id, Arity::Ints, "", move |input, _| match input {
                    Input::Ints(v) => freiman_3n4_check(v, kind),
                    _ => unreachable!(),
                }))
            }
            _ => None,
        };
        if let Some(d) = def {
            return Ok(d);
        }
        if let Some(d) = self.checks.get(id) {
            return Ok(d.clone());
        }
        Err(Error::UnknownCheck { name: id.to_owned(), known: self.ids().join(", ") })
    }

    pub fn get(&self, id: &str) -> Option<&CheckDef> {
        self.checks.get(id)
    }

    /// Expands a comma-separated list, accepting `all` (every check),
    /// `all-small` (every single-set check) and unique id prefixes such as
    /// `theorem` or `katz`.
    pub fn select(&self, list: &str) -> Result<Vec<String>> {
        let mut out: Vec<String> = Vec::new();
        for raw in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let picked: Vec<String> = match raw {
                "all" => self.checks.keys().cloned().collect(),
                "all-small" => self.iter().filter(|d| d.arity == Arity::Set).map(|d| d.id.clone()).collect(),
                _ if self.checks.contains_key(raw) || raw.contains(':') => {
                    self.resolve(raw)?;
                    vec![raw.to_owned()]
                }
                _ => {
                    let m: Vec<String> = self
                        .checks
                        .keys()
                        .filter(|k| k.starts_with(raw) && k[raw.len()..].starts_with([':', '_']))
                        .cloned()
                        .collect();
                    if m.is_empty() {
                        return Err(Error::UnknownCheck { name: raw.to_owned(), known: self.ids().join(", ") });
                    }
                    m
                }
            };
            for id in picked {
                if !out.contains(&id) {
                    out.push(id);
                }
            }
        }
        Ok(out)
    }
}

fn convolution_def(kind: Kind) -> CheckDef {
    set_check(
        &format!("convolution_sum:{}", kind.as_str()),
        "sum |A_x||A -+ A_x| between its Cauchy-Davenport and Katz-Koester bounds",
        move |a, o| convolution_sum_check_with(a, kind, o.method),
    )
}

fn spectral_product_def(kind: Kind) -> CheckDef {
    set_check(
        &format!("spectral_product:{}", kind.as_str()),
        "spectral upper bound on E(A, A -+ A)",
        move |a, o| {
            if a.is_empty() {
                return Verdict::builder("spectral_product", a).not_applicable("empty set");
            }
            let x = combine_with(a, a, kind, o.method).expect("nonempty");
            let mut v = spectral_product_bound_with(a, &x, o.method, o.tol);
            v.params.insert("kind".into(), kind.as_str().into());
            v
        },
    )
}

fn eta_chain_def(kind: Kind) -> CheckDef {
    set_check(
        &format!("eta_chain:{}", kind.as_str()),
        "the spectral chain bounding eta from below, with the density contradiction",
        move |a, o| eta_chain_check_with(a, kind, o.method, o.tol),
    )
}

fn theorem_def(preset: TheoremPreset) -> CheckDef {
    set_check(
        &format!("theorem:{}", preset.name),
        "small doubling in Z_p forces a short AP cover",
        move |a, o| theorem_predicate_with(a, &preset, o.method),
    )
}

fn rectify_def(kind: Kind, k: Q, label: &str) -> CheckDef {
    let label = if label.is_empty() { format_q(&k) } else { label.to_owned() };
    set_check(
        &format!("rectify:{}:{label}", kind.as_str()),
        "constructive rectification from a heavy Fourier coefficient",
        move |a, o| rectify_check_with(a, kind, &k, o.method),
    )
}
