//! Acceptance suite: each criterion prints one PASS/FAIL line.
//!
//! Runs as a plain binary so the lines show up without `--nocapture`.

use std::process::ExitCode;
use std::time::Instant;

use doubling::energy::schur_count;
use doubling::exact::ratio;
use doubling::fourier::{chain_constants, eta};
use doubling::harness::{
    default_campaign, draw_sets, run_campaign, CampaignSpec, JsonlSink, RunOptions, Summary, TallySink,
};
use doubling::structure::{rectify_via_bias, rectify_via_bias_with, StageStatus};
use doubling::{make_group, GSet, Kind, Method};

type Outcome = Result<String, String>;

fn run(name: &str) -> Summary {
    let spec = default_campaign(name).unwrap_or_else(|| panic!("no default campaign {name}"));
    run_spec(&spec)
}

fn run_spec(spec: &CampaignSpec) -> Summary {
    let mut sink = TallySink::default();
    let s = run_campaign(spec, &RunOptions::default(), &mut sink)
        .unwrap_or_else(|e| panic!("campaign {} failed to run: {e}", spec.name));
    for v in sink.failures.iter().take(3) {
        eprintln!("  counterexample: {}", v.to_json_line());
    }
    s
}

/// Zero failures for `ids` across `summaries`, and at least one pass each.
fn clean(summaries: &[&Summary], ids: &[&str]) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for id in ids {
        let (mut pass, mut fail, mut na) = (0, 0, 0);
        for s in summaries {
            let t = s.check(id);
            pass += t.pass;
            fail += t.fail;
            na += t.not_applicable;
        }
        ok &= fail == 0 && pass > 0;
        parts.push(format!("{id} {pass}/{fail}/{na}"));
    }
    let msg = format!("pass/fail/n.a.: {}", parts.join(", "));
    if ok { Ok(msg) } else { Err(msg) }
}

fn c1() -> Outcome {
    let t = Instant::now();
    let s = run("cd_vosper_exhaustive");
    let secs = t.elapsed().as_secs_f64();
    let expect: u64 = [5u32, 7, 11, 13].iter().map(|&p| ((1u64 << p) - 1).pow(2)).sum();
    if s.instances != expect {
        return Err(format!("enumerated {} pairs, expected {expect}", s.instances));
    }
    let r = clean(&[&s], &["cd_vosper"])?;
    let msg = format!("{} pairs, {r}, {secs:.1}s", s.instances);
    if secs < 120.0 { Ok(msg) } else { Err(format!("{msg} (over 120s)")) }
}

fn c2() -> Outcome {
    let t = Instant::now();
    let s = run("freiman_3n4_exhaustive");
    let secs = t.elapsed().as_secs_f64();
    let expect = (1u64 << 17) - 1 - 17 - 136;
    if s.instances != expect {
        return Err(format!("enumerated {} sets, expected {expect}", s.instances));
    }
    let r = clean(&[&s], &["freiman_3n4:sum", "freiman_3n4:diff"])?;
    let msg = format!("{} sets, {r}, {secs:.1}s", s.instances);
    if secs < 60.0 { Ok(msg) } else { Err(format!("{msg} (over 60s)")) }
}

fn c3() -> Outcome {
    let ex = run("schur_exhaustive");
    let rnd = run("schur_random");
    let r = clean(&[&ex, &rnd], &["lemma34"])?;
    if rnd.instances != 20_000 {
        return Err(format!("random instances {}", rnd.instances));
    }
    // Equality at every centered interval [-k, k] in the admissible range.
    let mut tested = 0;
    for p in [5u64, 7, 11, 13, 101, 499] {
        let g = make_group(&[p]).unwrap();
        let mut k = 0i64;
        while 3 * (2 * k + 1) as u64 <= 2 * p + 1 {
            let d = GSet::from_residues(&g, -k..=k).unwrap();
            let m = d.card() as u64;
            let count = schur_count(&d).unwrap();
            if 4 * count != 3 * m * m + 1 {
                return Err(format!("centered interval k={k} in Z_{p}: 4*{count} != 3*{m}^2+1"));
            }
            tested += 1;
            k += 1;
        }
    }
    Ok(format!("{r}, equality on {tested} centered intervals"))
}

fn small() -> &'static Summary {
    static S: std::sync::OnceLock<Summary> = std::sync::OnceLock::new();
    S.get_or_init(|| run("small_exhaustive"))
}

fn moments() -> &'static Summary {
    static S: std::sync::OnceLock<Summary> = std::sync::OnceLock::new();
    S.get_or_init(|| run("moments_random"))
}

fn large() -> &'static Summary {
    static S: std::sync::OnceLock<Summary> = std::sync::OnceLock::new();
    S.get_or_init(|| run("large_p_random"))
}

fn diff26() -> &'static Summary {
    static S: std::sync::OnceLock<Summary> = std::sync::OnceLock::new();
    S.get_or_init(|| run("theorem_diff26_p5003"))
}

fn sum259() -> &'static Summary {
    static S: std::sync::OnceLock<Summary> = std::sync::OnceLock::new();
    S.get_or_init(|| run("theorem_sum259_p23003"))
}

fn c4() -> Outcome {
    clean(&[small(), moments()], &["moments", "cs_bound"])
}

fn c5() -> Outcome {
    let s = run("triple_sums_random");
    if s.check("triple_sums").total() < 10_000 {
        return Err(format!("only {} sets", s.check("triple_sums").total()));
    }
    clean(&[&s], &["triple_sums"])
}

fn c6() -> Outcome {
    let f = run("fourier_random");
    let sweep = run("spectrum_paths_sweep");
    let a = clean(&[&f], &["parseval", "energy_spectrum"])?;
    let b = clean(&[&f, &sweep], &["spectrum_paths"])?;
    Ok(format!("{a}; {b}"))
}

fn c7() -> Outcome {
    let p101 = run("katz_koester_p101");
    clean(&[small(), large(), &p101, moments()], &["katz_koester"])
}

fn c8() -> Outcome {
    clean(
        &[small(), moments(), large(), diff26(), sum259()],
        &[
            "weak_eta",
            "convolution_sum:diff",
            "convolution_sum:sum",
            "spectral_product:diff",
            "spectral_product:sum",
            "eta_chain:diff",
            "eta_chain:sum",
        ],
    )
}

fn c9() -> Outcome {
    let big = run("theorem_diff26_p23003");
    let a = clean(&[&big, diff26()], &["theorem:diff26"])?;
    let b = clean(&[sum259()], &["theorem:sum259"])?;
    let totals = [big.check("theorem:diff26").pass, diff26().check("theorem:diff26").pass, sum259().check("theorem:sum259").pass];
    if totals != [1_000, 10_000, 1_000] {
        return Err(format!("expected every sampled set to satisfy the hypothesis, got passes {totals:?}"));
    }
    Ok(format!("{a}; {b}"))
}

fn c10() -> Outcome {
    let spec = default_campaign("rectify_diff26_p5003").unwrap();
    let (_, eta0) = chain_constants(Kind::Diff);
    let eta0 = doubling::exact::to_f64(&eta0);
    let k = ratio(13, 5);
    let (mut eligible, mut done, mut bad) = (0u64, 0u64, Vec::new());
    let mut stages = std::collections::BTreeMap::<String, u64>::new();
    for a in draw_sets(&spec).map_err(|e| e.to_string())? {
        if eta(&a).unwrap().0 < eta0 {
            continue;
        }
        eligible += 1;
        let t = rectify_via_bias(&a, Kind::Diff, &k).map_err(|e| format!("{}: {e}", a.literal()))?;
        match &t.stage {
            StageStatus::Done => {
                let c = t.final_cover.as_ref().expect("done carries a cover");
                if !c.covers_modp(&a) || c.length + a.card() as u64 > t.combined + 1 {
                    bad.push(format!("{}: cover {c} outside the bound", a.literal()));
                }
                done += 1;
            }
            StageStatus::FailedAt(stage) => {
                *stages.entry(stage.as_str().to_owned()).or_default() += 1;
                let again = rectify_via_bias_with(&a, Kind::Diff, &k, Method::Naive).unwrap();
                if again.stage != t.stage || again.detail != t.detail {
                    bad.push(format!("{}: fast {} vs naive {}", a.literal(), t.stage, again.stage));
                }
            }
        }
    }
    let rate = done as f64 / eligible.max(1) as f64;
    let msg = format!("{done}/{eligible} done ({:.2}%), failures by stage {stages:?}", 100.0 * rate);
    if eligible == 0 {
        return Err("no eligible sets".into());
    }
    if !bad.is_empty() {
        return Err(format!("{msg}; {}", bad[..bad.len().min(3)].join("; ")));
    }
    if rate >= 0.95 { Ok(msg) } else { Err(format!("{msg}, below 95%")) }
}

fn c11() -> Outcome {
    let s = run("appendix_chain");
    clean(&[&s], &["appendix_chain"])
}

fn jsonl(spec: &CampaignSpec, jobs: usize) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.jsonl");
    let mut sink = JsonlSink::to_files(&path, false).unwrap();
    run_campaign(spec, &RunOptions { jobs, ..Default::default() }, &mut sink).unwrap();
    drop(sink);
    std::fs::read(path).unwrap()
}

fn c12() -> Outcome {
    let mut checked = Vec::new();
    for name in ["appendix_chain", "theorem_diff26_p5003", "schur_exhaustive"] {
        let mut spec = default_campaign(name).unwrap();
        spec.trials = spec.trials.min(600);
        let one = jsonl(&spec, 1);
        let again = jsonl(&spec, 1);
        let wide = jsonl(&spec, 4);
        if one != again || one != wide {
            return Err(format!("{name}: outputs differ between runs"));
        }
        checked.push(format!("{name} ({} bytes)", one.len()));
    }
    Ok(format!("byte-identical reruns and thread counts: {}", checked.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 12] = [
        (1, "Cauchy-Davenport and Vosper, exhaustive p <= 13", c1),
        (2, "Freiman 3n-4 on subsets of [0,16]", c2),
        (3, "Schur-triple bound", c3),
        (4, "energy lower bound and moment identities", c4),
        (5, "triple-intersection identities", c5),
        (6, "Fourier identities and transform paths", c6),
        (7, "Katz-Koester containments", c7),
        (8, "bias inequality chain", c8),
        (9, "difference and sum theorems at desk scale", c9),
        (10, "constructive rectification", c10),
        (11, "general-group chain", c11),
        (12, "determinism", c12),
    ];
    let only: Vec<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for (n, name, f) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("criterion {n:>2} PASS  {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
