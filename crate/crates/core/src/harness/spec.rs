use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::TheoremPreset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Exhaustive,
    RandomSubset,
    ApPerturbed,
    UnionOfAps,
    FileCorpus,
}

impl Generator {
    pub fn as_str(self) -> &'static str {
        match self {
            Generator::Exhaustive => "exhaustive",
            Generator::RandomSubset => "random_subset",
            Generator::ApPerturbed => "ap_perturbed",
            Generator::UnionOfAps => "union_of_aps",
            Generator::FileCorpus => "file_corpus",
        }
    }

    pub fn is_random(self) -> bool {
        matches!(self, Generator::RandomSubset | Generator::ApPerturbed | Generator::UnionOfAps)
    }
}

/// Hypothesis a generated set must satisfy to be kept.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    #[default]
    None,
    /// `|A - A| < |G|/2`.
    HalfDiff,
    /// Odd `|A| <= (2|G| + 1)/3`, the Schur-triple regime.
    Schur,
    Freiman24,
    Diff26,
    Sum259,
}

impl Target {
    pub fn as_str(&self) -> &'static str {
        match self {
            Target::None => "none",
            Target::HalfDiff => "half_diff",
            Target::Schur => "schur",
            Target::Freiman24 => "freiman24",
            Target::Diff26 => "diff26",
            Target::Sum259 => "sum259",
        }
    }

    pub(crate) fn preset(&self) -> Option<TheoremPreset> {
        match self {
            Target::Freiman24 => Some(TheoremPreset::freiman24()),
            Target::Diff26 => Some(TheoremPreset::diff26()),
            Target::Sum259 => Some(TheoremPreset::sum259()),
            _ => None,
        }
    }
}

fn default_name() -> String {
    "campaign".into()
}

fn default_min_size() -> usize {
    1
}

fn default_cap() -> u64 {
    1 << 24
}

/// A campaign: which instances to generate and which checks to run on them.
///
/// ```toml
/// name = "diff26"
/// generator = "ap_perturbed"
/// groups = [[5003]]
/// min_size = 5
/// max_size = 20
/// noise = 3
/// trials = 10000
/// seed = 42
/// target = "diff26"
/// checks = ["theorem:diff26"]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub generator: Generator,
    /// Cyclic orders of each group, e.g. `[[101], [4, 4]]`.
    #[serde(default)]
    pub groups: Vec<Vec<u64>>,
    /// Integer instances live in `[0, int_span]`.
    #[serde(default)]
    pub int_span: Option<u64>,
    #[serde(default = "default_min_size")]
    pub min_size: usize,
    /// Defaults to the group size.
    #[serde(default)]
    pub max_size: Option<usize>,
    /// Random instances per group.
    #[serde(default)]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Points removed and added by the perturbing generators, at most.
    #[serde(default)]
    pub noise: usize,
    #[serde(default)]
    pub target: Target,
    pub checks: Vec<String>,
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    /// Largest number of instances an exhaustive campaign may enumerate.
    #[serde(default = "default_cap")]
    pub cap: u64,
}

impl CampaignSpec {
    pub fn new(name: &str, generator: Generator, checks: &[&str]) -> Self {
        CampaignSpec {
            name: name.into(),
            generator,
            groups: Vec::new(),
            int_span: None,
            min_size: 1,
            max_size: None,
            trials: 0,
            seed: 0,
            noise: 0,
            target: Target::None,
            checks: checks.iter().map(|s| s.to_string()).collect(),
            corpus: None,
            cap: default_cap(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("campaign specs serialize")
    }

    fn groups(mut self, groups: &[&[u64]]) -> Self {
        self.groups = groups.iter().map(|g| g.to_vec()).collect();
        self
    }

    fn sizes(mut self, min: usize, max: usize) -> Self {
        self.min_size = min;
        self.max_size = Some(max);
        self
    }

    fn trials(mut self, trials: u64, seed: u64) -> Self {
        self.trials = trials;
        self.seed = seed;
        self
    }

    fn target(mut self, target: Target) -> Self {
        self.target = target;
        self
    }

    fn noise(mut self, noise: usize) -> Self {
        self.noise = noise;
        self
    }
}

const PRODUCTS: [&[u64]; 3] = [&[4, 4], &[3, 5, 7], &[2, 2, 2, 2, 2, 2]];

/// The standard campaigns. Together they exercise every registered check.
pub fn default_campaigns() -> Vec<CampaignSpec> {
    use Generator::*;
    let small: &[&[u64]] = &[&[5], &[7], &[11], &[13]];
    let mut cd = CampaignSpec::new("cd_vosper_exhaustive", Exhaustive, &["cd_vosper"]).groups(small);
    cd.cap = 1 << 27;
    let mut freiman = CampaignSpec::new("freiman_3n4_exhaustive", Exhaustive, &["freiman_3n4:sum", "freiman_3n4:diff"]);
    freiman.int_span = Some(16);
    freiman.min_size = 3;
    let mut fourier_groups: Vec<&[u64]> = vec![&[101], &[360], &[512], &[2003], &[8, 8, 8]];
    fourier_groups.extend(PRODUCTS);
    let sweep: Vec<Vec<u64>> = (2..=512u64)
        .map(|n| vec![n])
        .chain([vec![2, 2], vec![2, 4], vec![3, 3], vec![2, 3, 4, 5], vec![8, 8, 8], vec![16, 32]])
        .chain(PRODUCTS.iter().map(|g| g.to_vec()))
        .collect();
    let mut paths = CampaignSpec::new("spectrum_paths_sweep", RandomSubset, &["spectrum_paths"])
        .sizes(1, 64)
        .trials(3, 6);
    paths.groups = sweep;
    let chain_checks = [
        "moments",
        "cs_bound",
        "katz_koester",
        "triple_sums",
        "weak_eta",
        "mixed_energy",
        "convolution_sum:diff",
        "convolution_sum:sum",
        "spectral_product:diff",
        "spectral_product:sum",
        "eta_chain:diff",
        "eta_chain:sum",
    ];
    vec![
        cd,
        freiman,
        CampaignSpec::new("schur_exhaustive", Exhaustive, &["lemma34"]).groups(small).target(Target::Schur),
        CampaignSpec::new("schur_random", RandomSubset, &["lemma34"])
            .groups(&[&[101], &[499]])
            .trials(10_000, 3)
            .target(Target::Schur),
        CampaignSpec::new("small_exhaustive", Exhaustive, &["all-small"])
            .groups(&[&[2], &[3], &[5], &[6], &[7], &[11], &[13], &[2, 2, 2], &[4, 4]]),
        CampaignSpec::new("moments_random", RandomSubset, &chain_checks)
            .groups(&[&[101], &[1009]])
            .sizes(1, 10)
            .trials(10_000, 4)
            .target(Target::HalfDiff),
        CampaignSpec::new("large_p_random", RandomSubset, &chain_checks)
            .groups(&[&[5003]])
            .sizes(2, 24)
            .trials(10_000, 7),
        CampaignSpec::new("katz_koester_p101", RandomSubset, &["katz_koester", "triple_sums"])
            .groups(&[&[101]])
            .sizes(8, 8)
            .trials(10_000, 101),
        CampaignSpec::new("triple_sums_random", RandomSubset, &["triple_sums", "katz_koester"])
            .groups(&[&[101], &[360], &[4, 4], &[3, 5, 7], &[2, 2, 2, 2, 2, 2]])
            .sizes(1, 12)
            .trials(2_000, 5),
        CampaignSpec::new("fourier_random", RandomSubset, &["parseval", "energy_spectrum", "spectrum_paths"])
            .groups(&fourier_groups)
            .sizes(1, 40)
            .trials(1_000, 6),
        paths,
        CampaignSpec::new(
            "theorem_diff26_p5003",
            ApPerturbed,
            &["theorem:diff26", "convolution_sum:diff", "spectral_product:diff", "eta_chain:diff", "weak_eta"],
        )
        .groups(&[&[5003]])
        .sizes(5, 20)
        .noise(3)
        .trials(10_000, 26)
        .target(Target::Diff26),
        CampaignSpec::new("theorem_diff26_p23003", ApPerturbed, &["theorem:diff26"])
            .groups(&[&[23003]])
            .sizes(101, 103)
            .noise(3)
            .trials(1_000, 2603)
            .target(Target::Diff26),
        CampaignSpec::new(
            "theorem_sum259_p23003",
            ApPerturbed,
            &["theorem:sum259", "convolution_sum:sum", "eta_chain:sum"],
        )
        .groups(&[&[23003]])
        .sizes(101, 103)
        .noise(3)
        .trials(1_000, 259)
        .target(Target::Sum259),
        CampaignSpec::new("rectify_diff26_p5003", ApPerturbed, &["rectify:diff:2.6"])
            .groups(&[&[5003]])
            .sizes(5, 20)
            .noise(3)
            .trials(10_000, 26)
            .target(Target::Diff26),
        CampaignSpec::new(
            "rectify_sum_p5003",
            ApPerturbed,
            &["theorem:freiman24", "rectify:sum:2.4", "rectify:sum:2.59"],
        )
        .groups(&[&[5003]])
        .sizes(5, 40)
        .noise(2)
        .trials(2_000, 24)
        .target(Target::Freiman24),
        CampaignSpec::new("appendix_chain", RandomSubset, &["appendix_chain", "mixed_energy"])
            .groups(&[&[2003], &[2000], &[1001], &[4, 4], &[3, 5, 7], &[2, 2, 2, 2, 2, 2]])
            .sizes(1, 30)
            .trials(1_000, 11),
    ]
}

/// A default campaign by name.
pub fn default_campaign(name: &str) -> Option<CampaignSpec> {
    default_campaigns().into_iter().find(|c| c.name == name)
}
