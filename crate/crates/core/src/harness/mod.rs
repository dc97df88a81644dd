//! Verification campaigns: a registry of checks, seeded and exhaustive
//! instance generators, and verdict sinks.
//!
//! A campaign feeds every generated instance to each requested check and
//! streams the resulting [`Verdict`](crate::Verdict)s, in a canonical order
//! that does not depend on the number of worker threads.

mod appendix;
mod corpus;
mod generate;
mod registry;
mod run;
mod spec;

pub use appendix::{appendix_chain_check, appendix_chain_check_with, golden_ratio_report};
pub use corpus::{ingest_corpus, parse_corpus, CorpusEntry};
pub use generate::{splitmix64, shard_seed};
pub use registry::{Arity, CheckDef, Input, Opts, Registry};
pub use run::{
    draw_sets, exhaustive_scan, random_scan, run_campaign, run_with_registry, JsonlSink, RunOptions, Sink, Summary, Tally,
    TallySink, VecSink,
};
pub use spec::{default_campaign, default_campaigns, CampaignSpec, Generator, Target};
