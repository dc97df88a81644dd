//! Finite abelian groups `Z_{n1} x ... x Z_{nk}` and dense indicator sets.
//!
//! Elements are encoded as a single mixed-radix index in `[0, |G|)`, row-major
//! in the order of the cyclic factors: the last factor varies fastest. The
//! same encoding is used for characters of the dual group.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default ceiling on `|G|`.
pub const DEFAULT_ELEMENT_CAP: usize = 1 << 26;

/// Mixed-radix element index.
pub type Elem = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Group {
    orders: Vec<u64>,
    size: usize,
    prime_cyclic: bool,
}

/// Builds `Z_{orders[0]} x ... x Z_{orders[k-1]}` with the default element cap.
pub fn make_group(orders: &[u64]) -> Result<Arc<Group>> {
    Group::with_cap(orders, DEFAULT_ELEMENT_CAP)
}

impl Group {
    pub fn with_cap(orders: &[u64], cap: usize) -> Result<Arc<Group>> {
        if orders.is_empty() {
            return Err(Error::InvalidArgument("group needs at least one cyclic factor".into()));
        }
        let mut size: u128 = 1;
        for &n in orders {
            if n < 2 {
                return Err(Error::InvalidOrder(n));
            }
            size = size.saturating_mul(n as u128);
            if size > cap as u128 {
                return Err(Error::GroupTooLarge { size, cap });
            }
        }
        let prime_cyclic = orders.len() == 1 && is_prime(orders[0]);
        Ok(Arc::new(Group {
            orders: orders.to_vec(),
            size: size as usize,
            prime_cyclic,
        }))
    }

    pub fn cyclic(n: u64) -> Result<Arc<Group>> {
        make_group(&[n])
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_prime_cyclic(&self) -> bool {
        self.prime_cyclic
    }

    pub fn is_cyclic(&self) -> bool {
        self.orders.len() == 1
    }

    /// The modulus when the group is `Z_p` with `p` prime.
    pub fn prime(&self) -> Option<u64> {
        self.prime_cyclic.then(|| self.orders[0])
    }

    pub(crate) fn require_prime(&self) -> Result<u64> {
        self.prime()
            .ok_or_else(|| Error::NotPrimeCyclic(self.descriptor()))
    }

    /// `p=13` for prime cyclic groups, `G=15` or `G=4x4` otherwise.
    pub fn descriptor(&self) -> String {
        if self.prime_cyclic {
            format!("p={}", self.orders[0])
        } else {
            let parts: Vec<String> = self.orders.iter().map(|n| n.to_string()).collect();
            format!("G={}", parts.join("x"))
        }
    }

    pub fn coords(&self, x: Elem) -> Vec<u64> {
        let mut out = vec![0; self.orders.len()];
        let mut rest = x as u64;
        for (slot, &n) in out.iter_mut().zip(&self.orders).rev() {
            *slot = rest % n;
            rest /= n;
        }
        out
    }

    /// Index of the element with the given coordinates, reduced modulo each order.
    pub fn index(&self, coords: &[i64]) -> Result<Elem> {
        if coords.len() != self.orders.len() {
            return Err(Error::InvalidArgument(format!(
                "element has {} coordinates, group {} has {}",
                coords.len(),
                self.descriptor(),
                self.orders.len()
            )));
        }
        let mut idx: u64 = 0;
        for (&c, &n) in coords.iter().zip(&self.orders) {
            idx = idx * n + c.rem_euclid(n as i64) as u64;
        }
        Ok(idx as Elem)
    }

    /// Reduces an integer into a cyclic group.
    pub fn residue(&self, v: i64) -> Elem {
        v.rem_euclid(self.size as i64) as Elem
    }

    #[inline]
    pub fn add(&self, x: Elem, y: Elem) -> Elem {
        if self.orders.len() == 1 {
            let s = x + y;
            return if s >= self.size { s - self.size } else { s };
        }
        let (mut x, mut y) = (x, y);
        let (mut out, mut mult) = (0usize, 1usize);
        for &n in self.orders.iter().rev() {
            let n = n as usize;
            let mut s = x % n + y % n;
            if s >= n {
                s -= n;
            }
            out += s * mult;
            mult *= n;
            x /= n;
            y /= n;
        }
        out
    }

    #[inline]
    pub fn neg(&self, x: Elem) -> Elem {
        if self.orders.len() == 1 {
            return if x == 0 { 0 } else { self.size - x };
        }
        let mut x = x;
        let (mut out, mut mult) = (0usize, 1usize);
        for &n in self.orders.iter().rev() {
            let n = n as usize;
            let c = x % n;
            out += (if c == 0 { 0 } else { n - c }) * mult;
            mult *= n;
            x /= n;
        }
        out
    }

    #[inline]
    pub fn sub(&self, x: Elem, y: Elem) -> Elem {
        if self.orders.len() == 1 {
            return if x >= y { x - y } else { x + self.size - y };
        }
        self.add(x, self.neg(y))
    }

    /// `d * x` in a cyclic group.
    pub(crate) fn scale_cyclic(&self, d: u64, x: Elem) -> Elem {
        let n = self.size as u128;
        ((d as u128 * x as u128) % n) as Elem
    }

    pub fn element_literal(&self, x: Elem) -> String {
        if self.is_cyclic() {
            x.to_string()
        } else {
            let parts: Vec<String> = self.coords(x).iter().map(|c| c.to_string()).collect();
            format!("({})", parts.join(","))
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

/// Deterministic Miller-Rabin; the witness set is exact below 2^64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo a prime `p`; `None` when `a = 0 mod p`.
pub fn inv_mod_prime(a: i64, p: u64) -> Option<u64> {
    let a = a.rem_euclid(p as i64) as u64;
    (a != 0).then(|| pow_mod(a, p - 2, p))
}

// ---------------------------------------------------------------------------
// Dense sets
// ---------------------------------------------------------------------------

/// A subset of a finite abelian group stored as a dense bitset.
#[derive(Clone, Debug)]
pub struct GSet {
    group: Arc<Group>,
    words: Vec<u64>,
    card: usize,
}

impl PartialEq for GSet {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.group, &other.group) || self.group == other.group)
            && self.words == other.words
    }
}

impl Eq for GSet {}

#[inline]
pub(crate) fn word_count(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl GSet {
    pub fn empty(group: &Arc<Group>) -> Self {
        GSet {
            group: group.clone(),
            words: vec![0; word_count(group.size())],
            card: 0,
        }
    }

    pub fn full(group: &Arc<Group>) -> Self {
        let mut words = vec![u64::MAX; word_count(group.size())];
        mask_tail(&mut words, group.size());
        GSet {
            group: group.clone(),
            words,
            card: group.size(),
        }
    }

    pub fn from_elems<I: IntoIterator<Item = Elem>>(group: &Arc<Group>, elems: I) -> Result<Self> {
        let mut words = vec![0u64; word_count(group.size())];
        for x in elems {
            if x >= group.size() {
                return Err(Error::ElementOutOfRange(x));
            }
            words[x / 64] |= 1 << (x % 64);
        }
        Ok(Self::from_words(group, words))
    }

    /// Integers reduced into a cyclic group.
    pub fn from_residues<I: IntoIterator<Item = i64>>(group: &Arc<Group>, values: I) -> Result<Self> {
        if !group.is_cyclic() {
            return Err(Error::InvalidArgument(format!(
                "plain residues need a cyclic group, got {}",
                group.descriptor()
            )));
        }
        let n = group.size() as i64;
        Self::from_elems(group, values.into_iter().map(|v| v.rem_euclid(n) as Elem))
    }

    /// Bit `i` of `mask` selects element `i`; the group must have at most 64 elements.
    pub fn from_mask(group: &Arc<Group>, mask: u64) -> Self {
        debug_assert!(group.size() <= 64);
        let mut words = vec![mask];
        mask_tail(&mut words, group.size());
        Self::from_words(group, words)
    }

    pub(crate) fn from_words(group: &Arc<Group>, mut words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), word_count(group.size()));
        mask_tail(&mut words, group.size());
        let card = words.iter().map(|w| w.count_ones() as usize).sum();
        GSet {
            group: group.clone(),
            words,
            card,
        }
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn card(&self) -> usize {
        self.card
    }

    pub fn is_empty(&self) -> bool {
        self.card == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn contains(&self, x: Elem) -> bool {
        x < self.group.size() && (self.words[x / 64] >> (x % 64)) & 1 == 1
    }

    pub fn iter(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<Elem> {
        self.iter().collect()
    }

    pub fn same_group(&self, other: &GSet) -> Result<()> {
        if Arc::ptr_eq(&self.group, &other.group) || self.group == other.group {
            Ok(())
        } else {
            Err(Error::GroupMismatch {
                left: self.group.descriptor(),
                right: other.group.descriptor(),
            })
        }
    }

    pub fn intersection(&self, other: &GSet) -> GSet {
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        GSet::from_words(&self.group, words)
    }

    pub fn union(&self, other: &GSet) -> GSet {
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        GSet::from_words(&self.group, words)
    }

    pub fn intersection_card(&self, other: &GSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &GSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// `A + x`.
    pub fn translate(&self, x: Elem) -> GSet {
        let g = &self.group;
        if x == 0 {
            return self.clone();
        }
        if g.is_cyclic() {
            let n = g.size();
            let mut out = vec![0u64; self.words.len()];
            shl_or(&mut out, &self.words, x);
            mask_tail(&mut out, n);
            shr_or(&mut out, &self.words, n - x);
            GSet {
                group: g.clone(),
                words: out,
                card: self.card,
            }
        } else {
            let mut out = vec![0u64; self.words.len()];
            for a in self.iter() {
                let y = g.add(a, x);
                out[y / 64] |= 1 << (y % 64);
            }
            GSet {
                group: g.clone(),
                words: out,
                card: self.card,
            }
        }
    }

    /// `-A`.
    pub fn negate(&self) -> GSet {
        let g = &self.group;
        let mut out = vec![0u64; self.words.len()];
        for a in self.iter() {
            let y = g.neg(a);
            out[y / 64] |= 1 << (y % 64);
        }
        GSet {
            group: g.clone(),
            words: out,
            card: self.card,
        }
    }

    /// Canonical set literal, e.g. `p=13: 0,1,3` or `G=4x4: (0,0),(1,2)`.
    pub fn literal(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for GSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.group.descriptor())?;
        for (i, x) in self.iter().enumerate() {
            let sep = if i == 0 { " " } else { "," };
            write!(f, "{sep}{}", self.group.element_literal(x))?;
        }
        Ok(())
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Ones<'_> {
    type Item = Elem;

    #[inline]
    fn next(&mut self) -> Option<Elem> {
        loop {
            if self.cur != 0 {
                let bit = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * 64 + bit);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

pub(crate) fn mask_tail(words: &mut [u64], bits: usize) {
    let full = bits / 64;
    let rem = bits % 64;
    if rem != 0 && full < words.len() {
        words[full] &= (1u64 << rem) - 1;
        for w in &mut words[full + 1..] {
            *w = 0;
        }
    } else if full < words.len() {
        for w in &mut words[full..] {
            *w = 0;
        }
    }
}

/// `dst |= src << k`, truncated to `dst`.
#[inline]
pub(crate) fn shl_or(dst: &mut [u64], src: &[u64], k: usize) {
    let (w, b) = (k / 64, k % 64);
    for (i, &s) in src.iter().enumerate() {
        if s == 0 {
            continue;
        }
        let j = i + w;
        if j >= dst.len() {
            break;
        }
        dst[j] |= s << b;
        if b > 0 && j + 1 < dst.len() {
            dst[j + 1] |= s >> (64 - b);
        }
    }
}

/// `dst |= src >> k`, truncated to `dst`.
#[inline]
pub(crate) fn shr_or(dst: &mut [u64], src: &[u64], k: usize) {
    let (w, b) = (k / 64, k % 64);
    for (j, d) in dst.iter_mut().enumerate() {
        let i = j + w;
        if i >= src.len() {
            break;
        }
        let mut v = src[i] >> b;
        if b > 0 && i + 1 < src.len() {
            v |= src[i + 1] << (64 - b);
        }
        *d |= v;
    }
}

/// `{d*a + c : a in A}`.
///
/// In `Z_p` any `d != 0 mod p` is accepted. Other groups only allow `d = +-1`.
pub fn affine_map(a: &GSet, d: i64, c: Elem) -> Result<GSet> {
    let g = a.group();
    if c >= g.size() {
        return Err(Error::ElementOutOfRange(c));
    }
    if let Some(p) = g.prime() {
        let d = d.rem_euclid(p as i64) as u64;
        if d == 0 {
            return Err(Error::NonInvertibleDilation(0));
        }
        let image = a.iter().map(|x| g.add(g.scale_cyclic(d, x), c));
        return GSet::from_elems(g, image);
    }
    match d {
        1 => Ok(a.translate(c)),
        -1 => Ok(a.negate().translate(c)),
        _ => Err(Error::NonInvertibleDilation(d)),
    }
}

// ---------------------------------------------------------------------------
// Set literals
// ---------------------------------------------------------------------------

/// Parses `p=13: 0,1,3`, `G=15: 2,7` or `G=4x4: (0,0),(1,2)`.
///
/// `p=` accepts composite moduli; checks that need a prime report
/// not-applicable on such groups.
pub fn parse_set_literal(text: &str) -> Result<GSet> {
    let (head, body) = text
        .split_once(':')
        .ok_or_else(|| Error::parse(format!("missing `:` in set literal `{text}`")))?;
    let head = head.trim();
    let orders: Vec<u64> = if let Some(p) = head.strip_prefix("p=") {
        vec![parse_u64(p)?]
    } else if let Some(spec) = head.strip_prefix("G=") {
        spec.split(['x', 'X', '*'])
            .map(parse_u64)
            .collect::<Result<_>>()?
    } else {
        return Err(Error::parse(format!("set literal must start with `p=` or `G=`, got `{head}`")));
    };
    let group = make_group(&orders)?;
    let body = body.trim();
    let mut elems = Vec::new();
    if !body.is_empty() {
        if group.is_cyclic() {
            for tok in body.split(',') {
                let v = parse_i64(tok)?;
                elems.push(group.residue(v));
            }
        } else {
            for tuple in split_tuples(body)? {
                let coords: Vec<i64> = tuple.split(',').map(parse_i64).collect::<Result<_>>()?;
                elems.push(group.index(&coords)?);
            }
        }
    }
    GSet::from_elems(&group, elems)
}

fn split_tuples(body: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::parse(format!("expected `(` at `{rest}`")))?;
        let close = inner
            .find(')')
            .ok_or_else(|| Error::parse("unterminated tuple"))?;
        out.push(&inner[..close]);
        rest = inner[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        } else if !rest.is_empty() {
            return Err(Error::parse(format!("expected `,` between tuples at `{rest}`")));
        }
    }
    Ok(out)
}

fn parse_u64(s: &str) -> Result<u64> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(format!("not a positive integer: `{}`", s.trim())))
}

fn parse_i64(s: &str) -> Result<i64> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(format!("not an integer: `{}`", s.trim())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_group_examples() {
        let g = make_group(&[13]).unwrap();
        assert_eq!(g.size(), 13);
        assert!(g.is_prime_cyclic());
        let h = make_group(&[4, 4]).unwrap();
        assert_eq!(h.size(), 16);
        assert!(!h.is_prime_cyclic());
        assert!(matches!(make_group(&[1]), Err(Error::InvalidOrder(1))));
        assert!(!make_group(&[15]).unwrap().is_prime_cyclic());
    }

    #[test]
    fn element_cap_is_enforced() {
        assert!(matches!(
            make_group(&[1 << 14, 1 << 13]),
            Err(Error::GroupTooLarge { .. })
        ));
        assert!(Group::with_cap(&[7, 7], 48).is_err());
        assert!(Group::with_cap(&[7, 7], 49).is_ok());
    }

    #[test]
    fn size_matches_coordinate_enumeration() {
        for orders in [vec![2, 3], vec![4, 4], vec![3, 5, 7], vec![2; 6]] {
            let g = make_group(&orders).unwrap();
            let mut count = 0usize;
            let mut tuple = vec![0u64; orders.len()];
            'outer: loop {
                let idx = g
                    .index(&tuple.iter().map(|&c| c as i64).collect::<Vec<_>>())
                    .unwrap();
                assert_eq!(g.coords(idx), tuple);
                count += 1;
                for k in (0..orders.len()).rev() {
                    tuple[k] += 1;
                    if tuple[k] < orders[k] {
                        continue 'outer;
                    }
                    tuple[k] = 0;
                }
                break;
            }
            assert_eq!(count, g.size());
        }
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            small,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(23003));
        assert!(is_prime(5003));
        assert!(!is_prime(3215031751)); // strong pseudoprime to 2,3,5,7
        assert!(is_prime(18446744073709551557));
    }

    #[test]
    fn arithmetic_in_product_group() {
        let g = make_group(&[3, 5, 7]).unwrap();
        for x in 0..g.size() {
            assert_eq!(g.add(x, g.neg(x)), 0);
            for y in [0, 1, 17, 104] {
                let (cx, cy) = (g.coords(x), g.coords(y));
                let expect: Vec<i64> = cx
                    .iter()
                    .zip(&cy)
                    .map(|(a, b)| (*a + *b) as i64)
                    .collect();
                assert_eq!(g.add(x, y), g.index(&expect).unwrap());
                assert_eq!(g.sub(g.add(x, y), y), x);
            }
        }
    }

    #[test]
    fn translate_matches_elementwise() {
        for orders in [vec![13], vec![64], vec![65], vec![130], vec![4, 4]] {
            let g = make_group(&orders).unwrap();
            let a = GSet::from_elems(&g, (0..g.size()).filter(|x| x % 3 != 1)).unwrap();
            for x in 0..g.size() {
                let expect = GSet::from_elems(&g, a.iter().map(|y| g.add(y, x))).unwrap();
                assert_eq!(a.translate(x), expect, "orders {orders:?}, x {x}");
            }
        }
    }

    #[test]
    fn affine_map_examples() {
        let g = make_group(&[13]).unwrap();
        let a = GSet::from_elems(&g, [0, 1, 3]).unwrap();
        assert_eq!(affine_map(&a, 1, 0).unwrap(), a);
        let b = GSet::from_elems(&g, [0, 5, 10]).unwrap();
        assert_eq!(
            affine_map(&b, 8, 0).unwrap(),
            GSet::from_elems(&g, [0, 1, 2]).unwrap()
        );
        let c = GSet::from_elems(&g, [0, 1]).unwrap();
        assert!(matches!(affine_map(&c, 0, 0), Err(Error::NonInvertibleDilation(0))));
        assert!(matches!(affine_map(&c, 13, 0), Err(Error::NonInvertibleDilation(0))));
    }

    #[test]
    fn affine_map_in_general_groups() {
        let g = make_group(&[4, 4]).unwrap();
        let a = GSet::from_elems(&g, [0, 1, 6]).unwrap();
        let neg = affine_map(&a, -1, 0).unwrap();
        assert_eq!(neg, a.negate());
        assert!(matches!(affine_map(&a, 3, 0), Err(Error::NonInvertibleDilation(3))));
        let z15 = make_group(&[15]).unwrap();
        let b = GSet::from_elems(&z15, [1, 2]).unwrap();
        assert!(affine_map(&b, 2, 0).is_err());
        assert_eq!(affine_map(&b, 1, 3).unwrap().to_vec(), vec![4, 5]);
    }

    #[test]
    fn literal_round_trip() {
        for text in ["p=13: 0,1,3", "G=4x4: (0,0),(1,2)", "G=15: 2,7", "p=7:"] {
            let s = parse_set_literal(text).unwrap();
            assert_eq!(s.literal(), text);
            assert_eq!(parse_set_literal(&s.literal()).unwrap(), s);
        }
        let s = parse_set_literal("p=13: -1, 14 ,3").unwrap();
        assert_eq!(s.to_vec(), vec![1, 3, 12]);
        assert!(parse_set_literal("q=13: 1").is_err());
        assert!(parse_set_literal("p=13 1,2").is_err());
        assert!(parse_set_literal("G=4x4: (0,0),(1)").is_err());
        assert!(parse_set_literal("p=1: 0").is_err());
    }

    #[test]
    fn inverse_mod_prime() {
        assert_eq!(inv_mod_prime(5, 13), Some(8));
        assert_eq!(inv_mod_prime(-1, 13), Some(12));
        assert_eq!(inv_mod_prime(26, 13), None);
    }
}
