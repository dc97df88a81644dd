//! Sumsets, difference sets, layers `A_x = A ∩ (A + x)` and the
//! representation function `x -> |A_x|`.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::exact::{int, ratio, Comparison, Rel, Q};
use crate::group::{shl_or, shr_or, word_count, Elem, GSet, Group};
use crate::verdict::Verdict;

/// Selects `A + A` or `A - A` for checks that come in both flavours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Sum,
    Diff,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Sum => "sum",
            Kind::Diff => "diff",
        }
    }

    pub fn sign(self) -> char {
        match self {
            Kind::Sum => '+',
            Kind::Diff => '-',
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" | "+" => Ok(Kind::Sum),
            "diff" | "-" => Ok(Kind::Diff),
            other => Err(Error::InvalidArgument(format!("kind must be sum or diff, got `{other}`"))),
        }
    }
}

/// Algorithm selector. `Naive` is the double-loop reference used to
/// re-verify failures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    #[default]
    Fast,
    Naive,
}

fn require_nonempty(a: &GSet, b: &GSet) -> Result<()> {
    a.same_group(b)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

pub fn sumset(a: &GSet, b: &GSet) -> Result<GSet> {
    sumset_with(a, b, Method::Fast)
}

pub fn sumset_with(a: &GSet, b: &GSet, method: Method) -> Result<GSet> {
    require_nonempty(a, b)?;
    let out = match method {
        Method::Fast => sumset_fast(a, b),
        Method::Naive => sumset_naive(a, b),
    };
    if let Some(p) = a.group().prime() {
        debug_assert!(
            out.card() >= (a.card() + b.card() - 1).min(p as usize),
            "Cauchy-Davenport violated by sumset output"
        );
    }
    Ok(out)
}

pub fn diffset(a: &GSet, b: &GSet) -> Result<GSet> {
    diffset_with(a, b, Method::Fast)
}

pub fn diffset_with(a: &GSet, b: &GSet, method: Method) -> Result<GSet> {
    require_nonempty(a, b)?;
    match method {
        Method::Fast => Ok(sumset_fast(a, &b.negate())),
        Method::Naive => {
            let g = a.group();
            let diffs = a.iter().flat_map(|x| b.iter().map(move |y| g.sub(x, y)));
            GSet::from_elems(g, diffs)
        }
    }
}

/// `A + B` or `A - B` according to `kind`.
pub fn combine(a: &GSet, b: &GSet, kind: Kind) -> Result<GSet> {
    combine_with(a, b, kind, Method::Fast)
}

pub fn combine_with(a: &GSet, b: &GSet, kind: Kind, method: Method) -> Result<GSet> {
    match kind {
        Kind::Sum => sumset_with(a, b, method),
        Kind::Diff => diffset_with(a, b, method),
    }
}

fn sumset_naive(a: &GSet, b: &GSet) -> GSet {
    let g = a.group();
    let mut words = vec![0u64; word_count(g.size())];
    for x in a.iter() {
        for y in b.iter() {
            let s = g.add(x, y);
            words[s / 64] |= 1 << (s % 64);
        }
    }
    GSet::from_words(g, words)
}

/// Union of shifted copies of the larger operand, one per element of the
/// smaller. Cyclic groups shift into a `2n`-bit buffer and fold the top half.
fn sumset_fast(a: &GSet, b: &GSet) -> GSet {
    let g = a.group();
    let (small, large) = if a.card() <= b.card() { (a, b) } else { (b, a) };
    if !g.is_cyclic() {
        return sumset_naive(small, large);
    }
    let n = g.size();
    let mut buf = vec![0u64; word_count(2 * n)];
    for x in small.iter() {
        shl_or(&mut buf, large.words(), x);
    }
    let mut out = buf[..word_count(n)].to_vec();
    crate::group::mask_tail(&mut out, n);
    shr_or(&mut out, &buf, n);
    GSet::from_words(g, out)
}

/// `A_x = A ∩ (A + x)`.
pub fn layer(a: &GSet, x: Elem) -> Result<GSet> {
    if x >= a.group().size() {
        return Err(Error::ElementOutOfRange(x));
    }
    Ok(a.intersection(&a.translate(x)))
}

/// `x -> |A_x|` over the whole group.
#[derive(Clone, Debug)]
pub struct RepProfile {
    pub group: Arc<Group>,
    pub base_card: usize,
    pub counts: Vec<u32>,
    /// `A - A`.
    pub support: GSet,
}

pub fn rep_profile(a: &GSet) -> Result<RepProfile> {
    rep_profile_with(a, Method::Fast)
}

pub fn rep_profile_with(a: &GSet, method: Method) -> Result<RepProfile> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let g = a.group();
    let mut counts = vec![0u32; g.size()];
    match method {
        Method::Fast => {
            let elems = a.to_vec();
            for &x in &elems {
                for &y in &elems {
                    counts[g.sub(x, y)] += 1;
                }
            }
        }
        Method::Naive => {
            for (x, c) in counts.iter_mut().enumerate() {
                *c = layer(a, x)?.card() as u32;
            }
        }
    }
    let support = GSet::from_elems(
        g,
        counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(x, _)| x),
    )?;
    let profile = RepProfile {
        group: g.clone(),
        base_card: a.card(),
        counts,
        support,
    };
    debug_assert!(profile.invariants_hold());
    Ok(profile)
}

impl RepProfile {
    pub fn count(&self, x: Elem) -> u64 {
        self.counts[x] as u64
    }

    /// Nonzero `(x, |A_x|)` pairs in element order.
    pub fn nonzero(&self) -> impl Iterator<Item = (Elem, u64)> + '_ {
        self.support.iter().map(|x| (x, self.counts[x] as u64))
    }

    pub fn invariants_hold(&self) -> bool {
        let g = &self.group;
        let n = self.base_card as u64;
        let total: u64 = self.counts.iter().map(|&c| c as u64).sum();
        self.counts[0] as u64 == n
            && total == n * n
            && (0..g.size()).all(|x| self.counts[x] == self.counts[g.neg(x)])
            && (0..g.size()).all(|x| (self.counts[x] > 0) == self.support.contains(x))
    }
}

/// Returns `(A_x - A ⊆ (A-A)_x, A_x + A ⊆ (A+A)_x)`. Both always hold.
pub fn katz_koester_verify(a: &GSet, x: Elem) -> Result<(bool, bool)> {
    if a.is_empty() {
        return Ok((true, true));
    }
    let kk = KatzKoester::new(a, Method::Fast)?;
    kk.at(x, Method::Fast)
}

/// Both Katz-Koester containments at every `x`; `A_x` is empty off `A - A`,
/// so only those `x` are visited.
pub fn katz_koester_check(a: &GSet) -> Verdict {
    katz_koester_check_with(a, Method::Fast)
}

pub fn katz_koester_check_with(a: &GSet, method: Method) -> Verdict {
    let b = Verdict::builder("katz_koester", a);
    if a.is_empty() {
        return b.not_applicable("empty set");
    }
    let kk = KatzKoester::new(a, method).expect("nonempty");
    let (mut bad_diff, mut bad_sum) = (Vec::new(), Vec::new());
    for x in kk.diff.iter() {
        let (d, s) = kk.at(x, method).expect("x in group");
        if !d {
            bad_diff.push(x);
        }
        if !s {
            bad_sum.push(x);
        }
    }
    let visited = kk.diff.card();
    let b = b.param("visited", visited);
    let b = if bad_diff.is_empty() && bad_sum.is_empty() {
        b
    } else {
        b.witness(json!({ "diff_violations": bad_diff, "sum_violations": bad_sum }))
    };
    b.finish(vec![
        Comparison::exact("diff_containment_violations", int(bad_diff.len() as u64), Rel::Eq, Q::zero()),
        Comparison::exact("sum_containment_violations", int(bad_sum.len() as u64), Rel::Eq, Q::zero()),
    ])
}

/// Precomputed `A - A` and `A + A` for scanning every `x`.
pub(crate) struct KatzKoester<'a> {
    a: &'a GSet,
    diff: GSet,
    sum: GSet,
}

impl<'a> KatzKoester<'a> {
    pub(crate) fn new(a: &'a GSet, method: Method) -> Result<Self> {
        Ok(KatzKoester {
            a,
            diff: diffset_with(a, a, method)?,
            sum: sumset_with(a, a, method)?,
        })
    }

    pub(crate) fn at(&self, x: Elem, method: Method) -> Result<(bool, bool)> {
        let ax = layer(self.a, x)?;
        if ax.is_empty() {
            return Ok((true, true));
        }
        let diff_layer = layer(&self.diff, x)?;
        let sum_layer = layer(&self.sum, x)?;
        let left_diff = diffset_with(&ax, self.a, method)?;
        let left_sum = sumset_with(&ax, self.a, method)?;
        Ok((left_diff.is_subset(&diff_layer), left_sum.is_subset(&sum_layer)))
    }
}

/// Densities `alpha = |A|/|G|`, `gamma = |A±A|/|G|` and `K = |A±A|/|A|`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile {
    pub alpha: BigRational,
    pub gamma: BigRational,
    pub k: BigRational,
}

impl DensityProfile {
    pub fn of(a: &GSet, kind: Kind) -> Result<Self> {
        let x = combine(a, a, kind)?;
        let g = a.group().size() as i64;
        Ok(DensityProfile {
            alpha: ratio(a.card() as i64, g),
            gamma: ratio(x.card() as i64, g),
            k: ratio(x.card() as i64, a.card() as i64),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;
    use proptest::prelude::*;

    fn set(orders: &[u64], elems: &[usize]) -> GSet {
        let g = make_group(orders).unwrap();
        GSet::from_elems(&g, elems.iter().copied()).unwrap()
    }

    #[test]
    fn sumset_examples() {
        let g = make_group(&[13]).unwrap();
        let a = GSet::from_elems(&g, [0, 1]).unwrap();
        let b = GSet::from_elems(&g, [0, 2]).unwrap();
        assert_eq!(sumset(&a, &b).unwrap().to_vec(), vec![0, 1, 2, 3]);
        let c = GSet::from_elems(&g, [0, 1, 3]).unwrap();
        assert_eq!(sumset(&c, &c).unwrap().to_vec(), vec![0, 1, 2, 3, 4, 6]);
        let z5 = make_group(&[5]).unwrap();
        let full = GSet::full(&z5);
        let two = GSet::from_elems(&z5, [2]).unwrap();
        assert_eq!(sumset(&full, &two).unwrap(), full);
    }

    #[test]
    fn diffset_examples() {
        let a = set(&[13], &[0, 1, 3]);
        assert_eq!(
            diffset(&a, &a).unwrap().to_vec(),
            vec![0, 1, 2, 3, 10, 11, 12]
        );
        let c = set(&[13], &[7]);
        assert_eq!(diffset(&c, &c).unwrap().to_vec(), vec![0]);
        let z7 = make_group(&[7]).unwrap();
        let full = GSet::full(&z7);
        assert_eq!(diffset(&full, &full).unwrap(), full);
    }

    #[test]
    fn empty_and_mismatched_operands_are_errors() {
        let g = make_group(&[13]).unwrap();
        let a = GSet::from_elems(&g, [1]).unwrap();
        assert!(matches!(sumset(&a, &GSet::empty(&g)), Err(Error::EmptySet)));
        assert!(matches!(diffset(&GSet::empty(&g), &a), Err(Error::EmptySet)));
        let other = set(&[11], &[1]);
        assert!(matches!(sumset(&a, &other), Err(Error::GroupMismatch { .. })));
        assert!(rep_profile(&GSet::empty(&g)).is_err());
    }

    #[test]
    fn layer_examples() {
        let a = set(&[13], &[0, 1, 3]);
        assert_eq!(layer(&a, 0).unwrap(), a);
        assert_eq!(layer(&a, 1).unwrap().to_vec(), vec![1]);
        assert!(layer(&a, 5).unwrap().is_empty());
    }

    #[test]
    fn rep_profile_examples() {
        let a = set(&[13], &[0, 1, 3]);
        let prof = rep_profile(&a).unwrap();
        let nz: Vec<(usize, u64)> = prof.nonzero().collect();
        assert_eq!(
            nz,
            vec![(0, 3), (1, 1), (2, 1), (3, 1), (10, 1), (11, 1), (12, 1)]
        );
        assert_eq!(prof.counts.iter().map(|&c| c as u64).sum::<u64>(), 9);

        let single = rep_profile(&set(&[13], &[4])).unwrap();
        assert_eq!(single.nonzero().collect::<Vec<_>>(), vec![(0, 1)]);

        let z5 = make_group(&[5]).unwrap();
        let full = rep_profile(&GSet::full(&z5)).unwrap();
        assert!(full.counts.iter().all(|&c| c == 5));
    }

    #[test]
    fn katz_koester_examples() {
        let a = set(&[13], &[0, 1, 3]);
        assert_eq!(katz_koester_verify(&a, 1).unwrap(), (true, true));
        assert_eq!(katz_koester_verify(&a, 5).unwrap(), (true, true));
        let z7 = make_group(&[7]).unwrap();
        let full = GSet::full(&z7);
        for x in 0..7 {
            assert_eq!(katz_koester_verify(&full, x).unwrap(), (true, true));
        }
    }

    #[test]
    fn cauchy_davenport_exhaustive_small_primes() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            let g = make_group(&[p]).unwrap();
            let sets: Vec<GSet> = (1..1u64 << p).map(|m| GSet::from_mask(&g, m)).collect();
            for a in &sets {
                for b in &sets {
                    let s = sumset(a, b).unwrap();
                    assert!(s.card() >= (a.card() + b.card() - 1).min(p as usize));
                }
            }
        }
    }

    #[test]
    fn fast_paths_match_naive_on_all_small_groups() {
        for orders in [vec![7], vec![31], vec![64], vec![4, 4], vec![2, 3, 5]] {
            let g = make_group(&orders).unwrap();
            let n = g.size();
            for seed in 0..40u64 {
                let pick = |s: u64| {
                    GSet::from_elems(
                        &g,
                        (0..n).filter(|&x| (x as u64 * 2654435761 + s * 97) % 5 < 2),
                    )
                    .unwrap()
                };
                let (a, b) = (pick(seed), pick(seed + 1000));
                if a.is_empty() || b.is_empty() {
                    continue;
                }
                assert_eq!(
                    sumset(&a, &b).unwrap(),
                    sumset_with(&a, &b, Method::Naive).unwrap()
                );
                assert_eq!(
                    diffset(&a, &b).unwrap(),
                    diffset_with(&a, &b, Method::Naive).unwrap()
                );
                let fast = rep_profile(&a).unwrap();
                let naive = rep_profile_with(&a, Method::Naive).unwrap();
                assert_eq!(fast.counts, naive.counts);
                assert_eq!(fast.support, diffset(&a, &a).unwrap());
            }
        }
    }

    #[test]
    fn density_profile_of_ap() {
        let a = set(&[101], &[0, 1, 2, 3]);
        let d = DensityProfile::of(&a, Kind::Diff).unwrap();
        assert_eq!(d.alpha, ratio(4, 101));
        assert_eq!(d.gamma, ratio(7, 101));
        assert_eq!(d.k, ratio(7, 4));
    }

    proptest! {
        #[test]
        fn sumset_agrees_with_double_loop(
            n in 2usize..=64,
            a_bits in any::<u64>(),
            b_bits in any::<u64>(),
        ) {
            let g = make_group(&[n as u64]).unwrap();
            let a = GSet::from_mask(&g, a_bits);
            let b = GSet::from_mask(&g, b_bits);
            prop_assume!(!a.is_empty() && !b.is_empty());
            prop_assert_eq!(sumset(&a, &b).unwrap(), sumset_with(&a, &b, Method::Naive).unwrap());
            prop_assert_eq!(diffset(&a, &b).unwrap(), diffset_with(&a, &b, Method::Naive).unwrap());
        }

        #[test]
        fn profile_counts_are_layer_sizes(p in prop::sample::select(vec![17u64, 23, 61]), bits in any::<u64>()) {
            let g = make_group(&[p]).unwrap();
            let a = GSet::from_mask(&g, bits & ((1u64 << 17) - 1));
            prop_assume!(!a.is_empty());
            let prof = rep_profile(&a).unwrap();
            prop_assert!(prof.invariants_hold());
            for x in 0..g.size() {
                prop_assert_eq!(prof.count(x), layer(&a, x).unwrap().card() as u64);
            }
        }
    }
}
