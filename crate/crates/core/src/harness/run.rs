//! Campaign execution.
//!
//! Work is cut into shards. Batches of shards run in parallel and their
//! results are handed to the sink strictly in shard order, so the output
//! does not depend on `jobs`.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::group::{make_group, GSet, Group};
use crate::setops::Method;
use crate::verdict::{Outcome, Verdict};

use super::corpus::{ingest_corpus, CorpusEntry};
use super::generate::{draw_ints, draw_set, shard_seed, Sampler, Shape, RANDOM_SHARD};
use super::registry::{Arity, CheckDef, Input, Opts, Registry};
use super::spec::{CampaignSpec, Generator};

/// Instances per exhaustive shard.
const EXHAUSTIVE_SHARD: u64 = 1 << 12;
/// Shards handed to the pool at a time.
const BATCH: usize = 64;
/// Largest group or integer window an exhaustive scan will enumerate.
const MAX_EXHAUSTIVE_BITS: usize = 40;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub pass: u64,
    pub fail: u64,
    pub not_applicable: u64,
}

impl Tally {
    fn add(&mut self, o: Outcome, count: u64) {
        match o {
            Outcome::Pass => self.pass += count,
            Outcome::Fail => self.fail += count,
            Outcome::NotApplicable => self.not_applicable += count,
        }
    }

    pub fn total(&self) -> u64 {
        self.pass + self.fail + self.not_applicable
    }
}

/// Totals of a campaign, appended to its JSONL stream.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub campaign: String,
    pub generator: String,
    pub seed: u64,
    pub instances: u64,
    pub verdicts: u64,
    pub pass: u64,
    pub fail: u64,
    pub not_applicable: u64,
    /// Failures of the fast path that the naive path overturned.
    pub discrepancies: u64,
    pub per_check: BTreeMap<String, Tally>,
}

impl Summary {
    pub fn is_clean(&self) -> bool {
        self.fail == 0
    }

    pub fn check(&self, id: &str) -> Tally {
        self.per_check.get(id).copied().unwrap_or_default()
    }

    pub fn to_json_line(&self) -> String {
        json!({ "summary": self }).to_string()
    }
}

/// Receives verdicts in canonical order.
pub trait Sink {
    /// When false, only failures are delivered and passes may be settled by
    /// a check's quick path without building a verdict.
    fn wants_all(&self) -> bool {
        true
    }

    fn emit(&mut self, v: &Verdict) -> Result<()>;

    fn finish(&mut self, _summary: &Summary) -> Result<()> {
        Ok(())
    }
}

/// Collects every verdict in memory.
#[derive(Default)]
pub struct VecSink {
    pub verdicts: Vec<Verdict>,
}

impl Sink for VecSink {
    fn emit(&mut self, v: &Verdict) -> Result<()> {
        self.verdicts.push(v.clone());
        Ok(())
    }
}

/// Counts only; keeps the failures.
#[derive(Default)]
pub struct TallySink {
    pub failures: Vec<Verdict>,
}

impl Sink for TallySink {
    fn wants_all(&self) -> bool {
        false
    }

    fn emit(&mut self, v: &Verdict) -> Result<()> {
        self.failures.push(v.clone());
        Ok(())
    }
}

/// One JSON object per line; failures are also copied to a second stream.
/// The summary object (`{"summary": {...}}`) closes the main stream.
pub struct JsonlSink {
    out: Box<dyn Write + Send>,
    counterexamples: Option<Box<dyn Write + Send>>,
}

impl JsonlSink {
    pub fn new(out: Box<dyn Write + Send>, counterexamples: Option<Box<dyn Write + Send>>) -> Self {
        JsonlSink { out, counterexamples }
    }

    /// Writes `path` and, next to it, `counterexamples.jsonl`. With `append`
    /// both files are extended instead of truncated.
    pub fn to_files(path: &Path, append: bool) -> Result<Self> {
        let open = |p: &Path| -> Result<Box<dyn Write + Send>> {
            let f: File = OpenOptions::new()
                .create(true)
                .write(true)
                .append(append)
                .truncate(!append)
                .open(p)?;
            Ok(Box::new(BufWriter::new(f)))
        };
        let cx = path.with_file_name("counterexamples.jsonl");
        Ok(JsonlSink::new(open(path)?, Some(open(&cx)?)))
    }
}

impl Sink for JsonlSink {
    fn emit(&mut self, v: &Verdict) -> Result<()> {
        let line = v.to_json_line();
        writeln!(self.out, "{line}")?;
        if v.is_fail() {
            if let Some(c) = self.counterexamples.as_mut() {
                writeln!(c, "{line}")?;
            }
        }
        Ok(())
    }

    fn finish(&mut self, summary: &Summary) -> Result<()> {
        writeln!(self.out, "{}", summary.to_json_line())?;
        self.out.flush()?;
        if let Some(c) = self.counterexamples.as_mut() {
            c.flush()?;
        }
        Ok(())
    }
}

/// Execution settings that do not change what is generated.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub opts: Opts,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { opts: Opts::default(), jobs: 0 }
    }
}

enum Block {
    Sets { group: Arc<Group> },
    Pairs { sets: Arc<Vec<GSet>> },
    Ints { span: u64 },
    RandomSets { group: Arc<Group>, stream: u64, pairs: bool },
    RandomInts { span: u64, stream: u64 },
    Corpus { entries: Arc<Vec<CorpusEntry>> },
}

struct Plan {
    blocks: Vec<(Block, u64)>,
    checks: Vec<CheckDef>,
    shard: u64,
}

#[derive(Default)]
struct ShardOut {
    instances: u64,
    tallies: Vec<Tally>,
    discrepancies: u64,
    verdicts: Vec<Verdict>,
}

fn size_range(spec: &CampaignSpec, universe: usize) -> Result<(usize, usize)> {
    let max = spec.max_size.unwrap_or(universe).min(universe);
    let min = spec.min_size.max(1);
    if min > max {
        return Err(Error::Config(format!("size range [{min}, {max}] is empty for a universe of {universe}")));
    }
    Ok((min, max))
}

fn binomial_range(n: usize, lo: usize, hi: usize) -> u128 {
    let mut c: u128 = 1;
    let mut total = 0u128;
    for k in 0..=hi.min(n) {
        if k >= lo {
            total += c;
        }
        c = c * (n - k) as u128 / (k + 1) as u128;
    }
    total
}

fn build_plan(spec: &CampaignSpec, reg: &Registry) -> Result<Plan> {
    let ids = reg.select(&spec.checks.join(","))?;
    if ids.is_empty() {
        return Err(Error::Config("campaign has no checks".into()));
    }
    let checks: Vec<CheckDef> = ids.iter().map(|id| reg.resolve(id)).collect::<Result<_>>()?;
    let has = |a: Arity| checks.iter().any(|c| c.arity == a);
    let groups: Vec<Arc<Group>> = spec.groups.iter().map(|o| make_group(o)).collect::<Result<_>>()?;
    let needs_groups = has(Arity::Set) || has(Arity::Pair);
    if spec.generator != Generator::FileCorpus {
        if needs_groups && groups.is_empty() {
            return Err(Error::Config("set checks need at least one group".into()));
        }
        if has(Arity::Ints) && spec.int_span.is_none() {
            return Err(Error::Config("integer checks need `int_span`".into()));
        }
    }
    let mut blocks = Vec::new();
    let shard;
    match spec.generator {
        Generator::Exhaustive => {
            shard = EXHAUSTIVE_SHARD;
            let mut count: u128 = 0;
            for g in &groups {
                let n = g.size();
                if n > MAX_EXHAUSTIVE_BITS {
                    return Err(Error::CapExceeded { count: u128::MAX, cap: spec.cap as u128 });
                }
                let (lo, hi) = size_range(spec, n)?;
                let per = binomial_range(n, lo, hi);
                if has(Arity::Set) {
                    count += per;
                    blocks.push((Block::Sets { group: g.clone() }, (1u64 << n) - 1));
                }
                if has(Arity::Pair) {
                    count += per * per;
                    if count <= spec.cap as u128 {
                        let sets: Vec<GSet> = (1u64..1 << n)
                            .filter(|m| (lo..=hi).contains(&(m.count_ones() as usize)))
                            .map(|m| GSet::from_mask(g, m))
                            .filter(|a| spec.target.accepts(a))
                            .collect();
                        let len = (sets.len() * sets.len()) as u64;
                        blocks.push((Block::Pairs { sets: Arc::new(sets) }, len));
                    }
                }
            }
            if has(Arity::Ints) {
                let span = spec.int_span.expect("checked above");
                let w = span as usize + 1;
                if w > MAX_EXHAUSTIVE_BITS {
                    return Err(Error::CapExceeded { count: u128::MAX, cap: spec.cap as u128 });
                }
                let (lo, hi) = size_range(spec, w)?;
                count += binomial_range(w, lo, hi);
                blocks.push((Block::Ints { span }, (1u64 << w) - 1));
            }
            if count > spec.cap as u128 {
                return Err(Error::CapExceeded { count, cap: spec.cap as u128 });
            }
        }
        Generator::RandomSubset | Generator::ApPerturbed | Generator::UnionOfAps => {
            shard = RANDOM_SHARD;
            for (i, g) in groups.iter().enumerate() {
                size_range(spec, g.size())?;
                if has(Arity::Set) {
                    blocks.push((Block::RandomSets { group: g.clone(), stream: i as u64, pairs: false }, spec.trials));
                }
                if has(Arity::Pair) {
                    let stream = (1 << 32) | i as u64;
                    blocks.push((Block::RandomSets { group: g.clone(), stream, pairs: true }, spec.trials));
                }
            }
            if has(Arity::Ints) {
                let span = spec.int_span.expect("checked above");
                size_range(spec, span as usize + 1)?;
                blocks.push((Block::RandomInts { span, stream: 2 << 32 }, spec.trials));
            }
        }
        Generator::FileCorpus => {
            shard = RANDOM_SHARD;
            let path = spec.corpus.as_ref().ok_or_else(|| Error::Config("file_corpus needs `corpus`".into()))?;
            let entries = ingest_corpus(path)?;
            let len = entries.len() as u64;
            blocks.push((Block::Corpus { entries: Arc::new(entries) }, len));
        }
    }
    Ok(Plan { blocks, checks, shard })
}

struct Worker<'a> {
    spec: &'a CampaignSpec,
    plan: &'a Plan,
    opts: Opts,
    keep_all: bool,
}

impl Worker<'_> {
    fn eval(&self, input: Input<'_>, out: &mut ShardOut) {
        out.instances += 1;
        for (i, def) in self.plan.checks.iter().enumerate() {
            if def.arity != input.arity() {
                continue;
            }
            if !self.keep_all {
                if let Some(o) = def.quick(input) {
                    out.tallies[i].add(o, 1);
                    continue;
                }
            }
            let mut v = def.run(input, &self.opts);
            if v.is_fail() && self.opts.method != Method::Naive {
                // Double entry: a failure stands only if the naive path agrees.
                let naive = def.run(input, &Opts { method: Method::Naive, ..self.opts });
                if naive.is_fail() {
                    v.params.insert("rechecked".into(), json!("naive"));
                } else {
                    let fast = json!({ "pass": v.pass, "binding": v.params.get("binding") });
                    v = naive;
                    v.params.insert("discrepancy".into(), fast);
                    out.discrepancies += 1;
                }
            }
            out.tallies[i].add(v.pass, 1);
            if self.keep_all || v.is_fail() {
                out.verdicts.push(v);
            }
        }
    }

    fn shape(&self, universe: usize) -> Shape {
        let (min, max) = size_range(self.spec, universe).expect("validated when planning");
        Shape { min, max, noise: self.spec.noise }
    }

    fn run_shard(&self, block: &Block, lo: u64, hi: u64) -> Result<ShardOut> {
        let mut out = ShardOut { tallies: vec![Tally::default(); self.plan.checks.len()], ..Default::default() };
        let spec = self.spec;
        match block {
            Block::Sets { group } => {
                let shape = self.shape(group.size());
                for m in lo + 1..=hi {
                    if !(shape.min..=shape.max).contains(&(m.count_ones() as usize)) {
                        continue;
                    }
                    let a = GSet::from_mask(group, m);
                    if spec.target.accepts(&a) {
                        self.eval(Input::Set(&a), &mut out);
                    }
                }
            }
            Block::Pairs { sets } => {
                let n = sets.len() as u64;
                for i in lo..hi {
                    self.eval(Input::Pair(&sets[(i / n) as usize], &sets[(i % n) as usize]), &mut out);
                }
            }
            Block::Ints { span } => {
                let shape = self.shape(*span as usize + 1);
                for m in lo + 1..=hi {
                    if !(shape.min..=shape.max).contains(&(m.count_ones() as usize)) {
                        continue;
                    }
                    let v: Vec<i64> = (0..=*span as i64).filter(|&x| m >> x & 1 == 1).collect();
                    self.eval(Input::Ints(&v), &mut out);
                }
            }
            Block::RandomSets { group, stream, pairs } => {
                let shape = self.shape(group.size());
                let mut rng = ChaCha8Rng::seed_from_u64(shard_seed(spec.seed, *stream, lo / self.plan.shard));
                let mut sampler = Sampler::new();
                for _ in lo..hi {
                    let a = sampler.draw(
                        || draw_set(spec.generator, group, shape, &mut rng),
                        |a| spec.target.accepts(a),
                    )?;
                    if *pairs {
                        let b = draw_set(spec.generator, group, shape, &mut rng);
                        self.eval(Input::Pair(&a, &b), &mut out);
                    } else {
                        self.eval(Input::Set(&a), &mut out);
                    }
                }
            }
            Block::RandomInts { span, stream } => {
                let shape = self.shape(*span as usize + 1);
                let mut rng = ChaCha8Rng::seed_from_u64(shard_seed(spec.seed, *stream, lo / self.plan.shard));
                for _ in lo..hi {
                    let v = draw_ints(spec.generator, *span, shape, &mut rng);
                    self.eval(Input::Ints(&v), &mut out);
                }
            }
            Block::Corpus { entries } => {
                for e in &entries[lo as usize..hi as usize] {
                    match e {
                        CorpusEntry::Set { set, .. } => self.eval(Input::Set(set), &mut out),
                        CorpusEntry::Ints { values, .. } => self.eval(Input::Ints(values), &mut out),
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Runs any campaign with the standard registry.
pub fn run_campaign(spec: &CampaignSpec, run: &RunOptions, sink: &mut dyn Sink) -> Result<Summary> {
    run_with_registry(spec, &Registry::standard(), run, sink)
}

/// Every subset (and, for pair checks, every ordered pair of subsets) of
/// each group, by increasing bitmask, then every integer subset of
/// `[0, int_span]`.
pub fn exhaustive_scan(spec: &CampaignSpec, run: &RunOptions, sink: &mut dyn Sink) -> Result<Summary> {
    if spec.generator != Generator::Exhaustive {
        return Err(Error::Config(format!("exhaustive_scan given a {} campaign", spec.generator.as_str())));
    }
    run_campaign(spec, run, sink)
}

/// `trials` seeded instances per group, rejection-filtered on the target.
pub fn random_scan(spec: &CampaignSpec, run: &RunOptions, sink: &mut dyn Sink) -> Result<Summary> {
    if !spec.generator.is_random() {
        return Err(Error::Config(format!("random_scan given a {} campaign", spec.generator.as_str())));
    }
    run_campaign(spec, run, sink)
}

pub fn run_with_registry(spec: &CampaignSpec, reg: &Registry, run: &RunOptions, sink: &mut dyn Sink) -> Result<Summary> {
    let plan = build_plan(spec, reg)?;
    let worker = Worker { spec, plan: &plan, opts: run.opts, keep_all: sink.wants_all() };
    let shards: Vec<(usize, u64, u64)> = plan
        .blocks
        .iter()
        .enumerate()
        .flat_map(|(b, (_, len))| {
            let step = plan.shard;
            (0..len.div_ceil(step)).map(move |s| (b, s * step, ((s + 1) * step).min(*len)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut summary = Summary {
        campaign: spec.name.clone(),
        generator: spec.generator.as_str().into(),
        seed: spec.seed,
        ..Default::default()
    };
    let mut tallies = vec![Tally::default(); plan.checks.len()];
    let mut outcome = Ok(());
    'batches: for batch in shards.chunks(BATCH) {
        let results: Vec<Result<ShardOut>> = pool.install(|| {
            batch
                .par_iter()
                .map(|&(b, lo, hi)| worker.run_shard(&plan.blocks[b].0, lo, hi))
                .collect()
        });
        for r in results {
            match r {
                Ok(out) => {
                    summary.instances += out.instances;
                    summary.discrepancies += out.discrepancies;
                    for (t, s) in tallies.iter_mut().zip(&out.tallies) {
                        t.pass += s.pass;
                        t.fail += s.fail;
                        t.not_applicable += s.not_applicable;
                    }
                    for v in &out.verdicts {
                        sink.emit(v)?;
                    }
                }
                Err(e) => {
                    outcome = Err(e);
                    break 'batches;
                }
            }
        }
    }
    for (def, t) in plan.checks.iter().zip(&tallies) {
        summary.pass += t.pass;
        summary.fail += t.fail;
        summary.not_applicable += t.not_applicable;
        summary.per_check.insert(def.id.clone(), *t);
    }
    summary.verdicts = summary.pass + summary.fail + summary.not_applicable;
    outcome?;
    sink.finish(&summary)?;
    Ok(summary)
}

/// The sets a random campaign feeds to its single-set checks, in order.
pub fn draw_sets(spec: &CampaignSpec) -> Result<Vec<GSet>> {
    if !spec.generator.is_random() {
        return Err(Error::Config("draw_sets needs a random generator".into()));
    }
    let mut out = Vec::new();
    for (i, orders) in spec.groups.iter().enumerate() {
        let g = make_group(orders)?;
        let (min, max) = size_range(spec, g.size())?;
        let shape = Shape { min, max, noise: spec.noise };
        for s in 0..spec.trials.div_ceil(RANDOM_SHARD) {
            let mut rng = ChaCha8Rng::seed_from_u64(shard_seed(spec.seed, i as u64, s));
            let mut sampler = Sampler::new();
            for _ in s * RANDOM_SHARD..((s + 1) * RANDOM_SHARD).min(spec.trials) {
                out.push(sampler.draw(
                    || draw_set(spec.generator, &g, shape, &mut rng),
                    |a| spec.target.accepts(a),
                )?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::spec::{default_campaign, Target};

    fn exhaustive(p: u64, checks: &[&str]) -> CampaignSpec {
        let mut c = CampaignSpec::new("t", Generator::Exhaustive, checks);
        c.groups = vec![vec![p]];
        c
    }

    fn jsonl(spec: &CampaignSpec, jobs: usize) -> String {
        let buf = SharedBuf::default();
        let mut sink = JsonlSink::new(Box::new(buf.clone()), None);
        run_campaign(spec, &RunOptions { jobs, ..Default::default() }, &mut sink).unwrap();
        drop(sink);
        let bytes = buf.0.lock().unwrap().clone();
        String::from_utf8(bytes).unwrap()
    }

    #[derive(Clone, Default)]
    struct SharedBuf(Arc<std::sync::Mutex<Vec<u8>>>);

    impl Write for SharedBuf {
        fn write(&mut self, b: &[u8]) -> std::io::Result<usize> {
            self.0.lock().unwrap().extend_from_slice(b);
            Ok(b.len())
        }
        fn flush(&mut self) -> std::io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn cs_bound_over_all_subsets_of_z7() {
        let mut sink = VecSink::default();
        let s = exhaustive_scan(&exhaustive(7, &["cs_bound"]), &RunOptions::default(), &mut sink).unwrap();
        assert_eq!(sink.verdicts.len(), 127);
        assert_eq!(s.verdicts, 127);
        assert_eq!(s.instances, 127);
        assert_eq!(s.fail, 0);
        assert_eq!(sink.verdicts[0].set_repr, "p=7: 0");
        assert_eq!(sink.verdicts[126].set_repr, "p=7: 0,1,2,3,4,5,6");
    }

    #[test]
    fn cauchy_davenport_over_all_pairs_of_z11() {
        let mut sink = TallySink::default();
        let s = exhaustive_scan(&exhaustive(11, &["cd_vosper"]), &RunOptions::default(), &mut sink).unwrap();
        assert_eq!(s.instances, 2047 * 2047);
        assert_eq!(s.check("cd_vosper").pass, 2047 * 2047);
        assert!(sink.failures.is_empty());
    }

    #[test]
    fn quick_path_does_not_change_tallies() {
        let spec = exhaustive(5, &["cd_vosper"]);
        let mut all = VecSink::default();
        let a = run_campaign(&spec, &RunOptions::default(), &mut all).unwrap();
        let b = run_campaign(&spec, &RunOptions::default(), &mut TallySink::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(all.verdicts.len(), 31 * 31);
    }

    #[test]
    fn schur_regime_in_z5() {
        let mut spec = exhaustive(5, &["lemma34"]);
        spec.target = Target::Schur;
        spec.max_size = Some(3);
        let mut sink = VecSink::default();
        let s = run_campaign(&spec, &RunOptions::default(), &mut sink).unwrap();
        assert_eq!(s.verdicts, 15);
        assert_eq!(s.pass, 15);
    }

    #[test]
    fn cap_is_enforced() {
        let mut spec = exhaustive(13, &["cd_vosper"]);
        let err = run_campaign(&spec, &RunOptions::default(), &mut TallySink::default()).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { count, cap } if count == 8191 * 8191 && cap == 1 << 24));
        spec.groups = vec![vec![64]];
        spec.checks = vec!["parseval".into()];
        assert!(matches!(
            run_campaign(&spec, &RunOptions::default(), &mut TallySink::default()),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn integer_scan_with_size_floor() {
        let mut spec = CampaignSpec::new("ints", Generator::Exhaustive, &["freiman_3n4:sum"]);
        spec.int_span = Some(6);
        spec.min_size = 3;
        let s = run_campaign(&spec, &RunOptions::default(), &mut TallySink::default()).unwrap();
        assert_eq!(s.instances, 128 - 1 - 7 - 21);
        assert_eq!(s.fail, 0);
    }

    #[test]
    fn random_campaigns_are_reproducible() {
        let mut spec = CampaignSpec::new("r", Generator::ApPerturbed, &["katz_koester", "parseval", "cd_vosper"]);
        spec.groups = vec![vec![101], vec![3, 5]];
        spec.trials = 600;
        spec.seed = 42;
        spec.noise = 2;
        spec.max_size = Some(12);
        let one = jsonl(&spec, 1);
        assert_eq!(one, jsonl(&spec, 1));
        assert_eq!(one, jsonl(&spec, 3));
        assert_eq!(one.lines().count(), 2 * 600 * 3 + 1);
        spec.seed = 43;
        assert_ne!(one, jsonl(&spec, 1));
    }

    #[test]
    fn draw_sets_matches_the_campaign_stream() {
        let mut spec = default_campaign("theorem_diff26_p5003").unwrap();
        spec.trials = 300;
        spec.checks = vec!["theorem:diff26".into()];
        let sets = draw_sets(&spec).unwrap();
        let mut sink = VecSink::default();
        run_campaign(&spec, &RunOptions::default(), &mut sink).unwrap();
        let reprs: Vec<String> = sets.iter().map(GSet::literal).collect();
        let seen: Vec<String> = sink.verdicts.iter().map(|v| v.set_repr.clone()).collect();
        assert_eq!(reprs, seen);
        assert!(sink.verdicts.iter().all(|v| v.is_pass()));
    }

    #[test]
    fn starvation_is_reported() {
        let mut spec = CampaignSpec::new("s", Generator::RandomSubset, &["parseval"]);
        spec.groups = vec![vec![101]];
        spec.trials = 5;
        spec.target = Target::Diff26;
        spec.min_size = 40;
        let err = run_campaign(&spec, &RunOptions::default(), &mut TallySink::default()).unwrap_err();
        assert!(matches!(err, Error::Starvation { .. }));
    }

    #[test]
    fn corpus_campaign_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus.txt");
        std::fs::write(&corpus, "p=13: 0,1,3\nG=4x4: (0,0),(1,0),(2,0),(3,0)\nZ: 0,1,2\n").unwrap();
        let mut spec = CampaignSpec::new("c", Generator::FileCorpus, &["parseval", "katz_koester", "freiman_3n4:sum"]);
        spec.corpus = Some(corpus);
        let out = dir.path().join("verdicts.jsonl");
        let mut sink = JsonlSink::to_files(&out, false).unwrap();
        let s = run_campaign(&spec, &RunOptions::default(), &mut sink).unwrap();
        drop(sink);
        assert_eq!(s.verdicts, 5);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 6);
        let first: Verdict = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first.check_id, "parseval");
        assert!(text.lines().last().unwrap().starts_with("{\"summary\""));
        assert_eq!(std::fs::read_to_string(dir.path().join("counterexamples.jsonl")).unwrap(), "");
    }

    #[test]
    fn failures_are_rechecked_by_the_naive_path() {
        use crate::exact::{int, Comparison, Rel};
        let mut reg = Registry::standard();
        // Wrong on purpose: claims |A| < 3.
        reg.register(CheckDef::new("small_card", Arity::Set, "", |input, _| match input {
            Input::Set(a) => Verdict::builder("small_card", a)
                .finish(vec![Comparison::exact("card", int(a.card() as u64), Rel::Lt, int(3u64))]),
            _ => unreachable!(),
        }));
        // Fails on the fast path only.
        reg.register(CheckDef::new("fast_only", Arity::Set, "", |input, o| match input {
            Input::Set(a) => {
                let b = Verdict::builder("fast_only", a);
                if o.method == Method::Fast { b.fail(json!("fast")) } else { b.finish(vec![]) }
            }
            _ => unreachable!(),
        }));
        let mut spec = exhaustive(5, &["small_card", "fast_only"]);
        spec.max_size = Some(3);
        let mut sink = VecSink::default();
        let s = run_with_registry(&spec, &reg, &RunOptions::default(), &mut sink).unwrap();
        assert_eq!(s.check("small_card").fail, 10);
        assert_eq!(s.check("fast_only").pass, 25);
        assert_eq!(s.discrepancies, 25);
        for v in &sink.verdicts {
            if v.check_id == "small_card" && v.is_fail() {
                assert_eq!(v.params["rechecked"], "naive");
            }
            if v.check_id == "fast_only" {
                assert!(v.is_pass() && v.params.contains_key("discrepancy"));
            }
        }
    }
}
