//! Seeded instance generators.
//!
//! Random campaigns are split into fixed-size shards. Shard `s` of stream
//! `b` (the index of the group in the campaign) draws from a `ChaCha8Rng`
//! seeded with [`shard_seed`]`(seed, b, s)`, so the instance stream depends
//! only on the campaign, never on how shards are scheduled.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{Elem, GSet, Group};
use crate::setops::diffset;

use super::spec::{Generator, Target};

/// Trials per random shard.
pub(crate) const RANDOM_SHARD: u64 = 256;
/// Draws per starvation window and the minimum accepted in each.
pub(crate) const STARVATION_WINDOW: u64 = 10_000;
pub(crate) const STARVATION_MIN: u64 = 10;

/// One step of the splitmix64 generator.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of shard `shard` in stream `stream`: three chained splitmix64
/// steps, mixing in the stream and then the shard index.
pub fn shard_seed(seed: u64, stream: u64, shard: u64) -> u64 {
    let mut st = seed;
    let a = splitmix64(&mut st);
    let mut st = a ^ stream;
    let b = splitmix64(&mut st);
    let mut st = b ^ shard;
    splitmix64(&mut st)
}

/// Size and noise parameters of a draw.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Shape {
    pub min: usize,
    pub max: usize,
    pub noise: usize,
}

/// `k * x` in the group.
fn mul_elem(g: &Group, x: Elem, k: i64) -> Elem {
    let mut base = if k < 0 { g.neg(x) } else { x };
    let mut k = k.unsigned_abs();
    let mut acc: Elem = 0;
    while k > 0 {
        if k & 1 == 1 {
            acc = g.add(acc, base);
        }
        base = g.add(base, base);
        k >>= 1;
    }
    acc
}

fn random_subset(g: &Arc<Group>, shape: Shape, rng: &mut ChaCha8Rng) -> GSet {
    let size = g.size();
    let k = rng.gen_range(shape.min..=shape.max).min(size);
    GSet::from_elems(g, sample(rng, size, k).into_iter()).expect("indices are in range")
}

/// An AP of random length, difference and start with up to `noise` points
/// removed and up to `noise` points added. Added points are taken from the
/// progression's extension `a + i d`, `-m/2 <= i < 3m/2`, so the doubling
/// stays near that of the progression.
fn ap_perturbed(g: &Arc<Group>, shape: Shape, rng: &mut ChaCha8Rng) -> GSet {
    let size = g.size();
    let m = rng.gen_range(shape.min..=shape.max).clamp(1, size);
    let d = rng.gen_range(1..size);
    let a = rng.gen_range(0..size);
    let mut pts: Vec<Elem> = (0..m as i64).map(|i| g.add(a, mul_elem(g, d, i))).collect();
    let r = rng.gen_range(0..=shape.noise.min(m - 1));
    if r > 0 {
        let mut drop = sample(rng, m, r).into_vec();
        drop.sort_unstable_by(|x, y| y.cmp(x));
        for i in drop {
            pts.swap_remove(i);
        }
    }
    let s = rng.gen_range(0..=shape.noise);
    let half = (m as i64 + 1) / 2;
    for _ in 0..s {
        let i = rng.gen_range(-half..m as i64 + half);
        pts.push(g.add(a, mul_elem(g, d, i)));
    }
    GSet::from_elems(g, pts).expect("elements are reduced")
}

/// Union of two or three APs with independent starts and differences.
fn union_of_aps(g: &Arc<Group>, shape: Shape, rng: &mut ChaCha8Rng) -> GSet {
    let size = g.size();
    let total = rng.gen_range(shape.min..=shape.max).clamp(1, size);
    let parts = rng.gen_range(2..=3usize).min(total);
    let mut pts = Vec::with_capacity(total);
    for j in 0..parts {
        let len = total / parts + usize::from(j < total % parts);
        let d = rng.gen_range(1..size);
        let a = rng.gen_range(0..size);
        pts.extend((0..len as i64).map(|i| g.add(a, mul_elem(g, d, i))));
    }
    GSet::from_elems(g, pts).expect("elements are reduced")
}

pub(crate) fn draw_set(gen: Generator, g: &Arc<Group>, shape: Shape, rng: &mut ChaCha8Rng) -> GSet {
    match gen {
        Generator::ApPerturbed => ap_perturbed(g, shape, rng),
        Generator::UnionOfAps => union_of_aps(g, shape, rng),
        _ => random_subset(g, shape, rng),
    }
}

/// Integer sets inside `[0, span]`, except that noise points of a perturbed
/// progression may fall outside it.
pub(crate) fn draw_ints(gen: Generator, span: u64, shape: Shape, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let width = span as usize + 1;
    let mut out: Vec<i64> = match gen {
        Generator::ApPerturbed | Generator::UnionOfAps => {
            let m = rng.gen_range(shape.min..=shape.max).clamp(1, width);
            let dmax = if m > 1 { (span / (m as u64 - 1)).max(1) } else { span.max(1) };
            let d = rng.gen_range(1..=dmax) as i64;
            let a0 = rng.gen_range(0..=span.saturating_sub((m as u64 - 1) * d as u64)) as i64;
            let mut v: Vec<i64> = (0..m as i64).map(|i| a0 + i * d).collect();
            let r = rng.gen_range(0..=shape.noise.min(m - 1));
            for _ in 0..r {
                let i = rng.gen_range(0..v.len());
                v.swap_remove(i);
            }
            let half = (m as i64 + 1) / 2;
            for _ in 0..rng.gen_range(0..=shape.noise) {
                v.push(a0 + d * rng.gen_range(-half..m as i64 + half));
            }
            v
        }
        _ => {
            let k = rng.gen_range(shape.min..=shape.max).min(width);
            sample(rng, width, k).into_iter().map(|x| x as i64).collect()
        }
    };
    out.sort_unstable();
    out.dedup();
    out
}

impl Target {
    /// Filter applied to generated group sets. Integer instances are never filtered.
    pub fn accepts(&self, a: &GSet) -> bool {
        let n = a.card();
        let g = a.group().size();
        match self {
            Target::None => true,
            Target::HalfDiff => n > 0 && 2 * diffset(a, a).expect("same group").card() < g,
            Target::Schur => n % 2 == 1 && 3 * n <= 2 * g + 1,
            Target::Freiman24 | Target::Diff26 | Target::Sum259 => self.preset().expect("theorem target").admits(a),
        }
    }
}

/// Rejection sampler with starvation accounting.
pub(crate) struct Sampler {
    drawn: u64,
    accepted: u64,
}

impl Sampler {
    pub fn new() -> Self {
        Sampler { drawn: 0, accepted: 0 }
    }

    /// Draws until `accept` holds. Fails when a window of
    /// [`STARVATION_WINDOW`] draws yields fewer than [`STARVATION_MIN`] hits.
    pub fn draw<T>(&mut self, mut make: impl FnMut() -> T, accept: impl Fn(&T) -> bool) -> Result<T> {
        loop {
            if self.drawn == STARVATION_WINDOW {
                if self.accepted < STARVATION_MIN {
                    return Err(Error::Starvation { drawn: self.drawn, accepted: self.accepted });
                }
                self.drawn = 0;
                self.accepted = 0;
            }
            self.drawn += 1;
            let x = make();
            if accept(&x) {
                self.accepted += 1;
                return Ok(x);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;
    use crate::structure::min_ap_cover_modp;
    use rand::SeedableRng;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of splitmix64 seeded with 0.
        let mut s = 0u64;
        assert_eq!(splitmix64(&mut s), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(&mut s), 0x6E78_9E6A_A1B9_65F4);
        assert_ne!(shard_seed(1, 0, 0), shard_seed(1, 0, 1));
        assert_ne!(shard_seed(1, 0, 1), shard_seed(1, 1, 0));
    }

    #[test]
    fn mul_elem_matches_repeated_addition() {
        let g = make_group(&[3, 5]).unwrap();
        let x = g.index(&[1, 2]).unwrap();
        let mut acc = 0;
        for k in 0..20i64 {
            assert_eq!(mul_elem(&g, x, k), acc);
            assert_eq!(g.add(mul_elem(&g, x, -k), acc), 0);
            acc = g.add(acc, x);
        }
    }

    #[test]
    fn noiseless_ap_perturbed_is_an_ap() {
        let g = make_group(&[101]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = ap_perturbed(&g, Shape { min: 3, max: 20, noise: 0 }, &mut rng);
            assert_eq!(min_ap_cover_modp(&a).unwrap().length, a.card() as u64);
        }
    }

    #[test]
    fn sizes_respect_the_shape() {
        let g = make_group(&[4, 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let a = random_subset(&g, Shape { min: 2, max: 5, noise: 0 }, &mut rng);
            assert!((2..=5).contains(&a.card()));
            let u = union_of_aps(&g, Shape { min: 2, max: 5, noise: 0 }, &mut rng);
            assert!((1..=5).contains(&u.card()));
            let v = draw_ints(Generator::ApPerturbed, 16, Shape { min: 3, max: 8, noise: 1 }, &mut rng);
            assert!(!v.is_empty() && v.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn sampler_reports_starvation() {
        let mut s = Sampler::new();
        assert!(matches!(s.draw(|| 0, |_| false), Err(Error::Starvation { drawn: 10_000, accepted: 0 })));
        let mut s = Sampler::new();
        let mut i = 0u64;
        for _ in 0..30 {
            s.draw(
                || {
                    i += 1;
                    i
                },
                |x| x % 500 == 0,
            )
            .unwrap();
        }
    }
}
