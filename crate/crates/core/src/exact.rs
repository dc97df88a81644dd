//! Exact rationals, comparison records, and sums of square roots.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn ratio(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn int<T: Into<BigInt>>(n: T) -> Q {
    Q::from_integer(n.into())
}

pub fn to_f64(q: &Q) -> f64 {
    // Direct numer/denom conversion overflows for large operands.
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// `"7"` or `"125/273"`.
pub fn format_q(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"12/5"`, `"2.4"`, `"0.0045"` or `"7"` into an exact rational.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("not a rational number: `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let d = BigInt::from(10u32).pow(frac.len() as u32);
    let q = Q::new(n, d);
    Ok(if neg { -q } else { q })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rel {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "==")]
    Eq,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Eq => "==",
        }
    }

    fn accepts(self, ord: Ordering) -> bool {
        match self {
            Rel::Le => ord != Ordering::Greater,
            Rel::Lt => ord == Ordering::Less,
            Rel::Ge => ord != Ordering::Less,
            Rel::Gt => ord == Ordering::Greater,
            Rel::Eq => ord == Ordering::Equal,
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One side of a comparison: an exact rational or a double.
#[derive(Clone, Debug, PartialEq)]
pub enum Quantity {
    Exact(Q),
    Float(f64),
}

impl Quantity {
    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Exact(q) => to_f64(q),
            Quantity::Float(x) => *x,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Exact(q) => f.write_str(&format_q(q)),
            // `{:?}` prints the shortest string that parses back to the same bits.
            Quantity::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl From<Q> for Quantity {
    fn from(q: Q) -> Self {
        Quantity::Exact(q)
    }
}

impl From<f64> for Quantity {
    fn from(x: f64) -> Self {
        Quantity::Float(x)
    }
}

/// A single evaluated relation `lhs rel rhs`.
///
/// `margin` is positive when the relation holds with room to spare, scaled by
/// `max(|lhs|, |rhs|)`. Non-gating comparisons are recorded but do not decide
/// the verdict.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub name: String,
    pub lhs: Quantity,
    pub rel: Rel,
    pub rhs: Quantity,
    pub tol: f64,
    pub holds: bool,
    pub margin: f64,
    pub gating: bool,
    pub exact_fallback: bool,
}

fn signed_margin(rel: Rel, lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        return 0.0;
    }
    let d = (lhs - rhs) / scale;
    match rel {
        Rel::Ge | Rel::Gt => d,
        Rel::Le | Rel::Lt => -d,
        Rel::Eq => -d.abs(),
    }
}

impl Comparison {
    pub fn exact(name: impl Into<String>, lhs: Q, rel: Rel, rhs: Q) -> Self {
        let holds = rel.accepts(lhs.cmp(&rhs));
        let margin = signed_margin(rel, to_f64(&lhs), to_f64(&rhs));
        Comparison {
            name: name.into(),
            lhs: Quantity::Exact(lhs),
            rel,
            rhs: Quantity::Exact(rhs),
            tol: 0.0,
            holds,
            margin,
            gating: true,
            exact_fallback: false,
        }
    }

    /// Float comparison with relative tolerance `tol`. Strict relations are
    /// treated like their non-strict forms since rounding cannot separate them.
    pub fn float(name: impl Into<String>, lhs: impl Into<Quantity>, rel: Rel, rhs: impl Into<Quantity>, tol: f64) -> Self {
        let (lhs, rhs) = (lhs.into(), rhs.into());
        let (l, r) = (lhs.to_f64(), rhs.to_f64());
        let scale = l.abs().max(r.abs());
        let slack = tol * scale;
        let d = l - r;
        let holds = match rel {
            Rel::Ge | Rel::Gt => d >= -slack,
            Rel::Le | Rel::Lt => d <= slack,
            Rel::Eq => d.abs() <= slack,
        } && l.is_finite()
            && r.is_finite();
        Comparison {
            name: name.into(),
            lhs,
            rel,
            rhs,
            tol,
            holds,
            margin: signed_margin(rel, l, r),
            gating: true,
            exact_fallback: false,
        }
    }

    pub fn informational(mut self) -> Self {
        self.gating = false;
        self
    }
}

// ---------------------------------------------------------------------------
// Sums of square roots
// ---------------------------------------------------------------------------

/// `sum_i coef_i * sqrt(r_i)` with distinct squarefree `r_i`.
///
/// Used for `E_{3/2}(A) = sum_x |A_x|^{3/2}`, the only irrational quantity in
/// the energy checks. Writing `c = f^2 r` with `r` squarefree gives
/// `c^{3/2} = c f sqrt(r)`, so the sum collapses onto squarefree radicands.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SurdSum {
    terms: Vec<(BigUint, u64)>,
}

fn squarefree_split(mut c: u64) -> (u64, u64) {
    // c = f^2 * r
    let mut f = 1u64;
    let mut r = 1u64;
    let mut d = 2u64;
    while d * d <= c {
        let mut e = 0;
        while c % d == 0 {
            c /= d;
            e += 1;
        }
        f *= d.pow(e / 2);
        if e % 2 == 1 {
            r *= d;
        }
        d += 1;
    }
    (f, r * c)
}

impl SurdSum {
    /// `sum_c mult * c^{3/2}` over `(c, mult)` pairs.
    pub fn three_halves<I: IntoIterator<Item = (u64, u64)>>(counts: I) -> Self {
        let mut terms: Vec<(BigUint, u64)> = Vec::new();
        for (c, mult) in counts {
            if c == 0 || mult == 0 {
                continue;
            }
            let (f, r) = squarefree_split(c);
            let coef = BigUint::from(c) * BigUint::from(f) * BigUint::from(mult);
            match terms.iter_mut().find(|(_, rr)| *rr == r) {
                Some(slot) => slot.0 += coef,
                None => terms.push((coef, r)),
            }
        }
        terms.sort_by_key(|t| t.1);
        SurdSum { terms }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(c, r)| c.to_f64().unwrap_or(f64::INFINITY) * (*r as f64).sqrt())
            .sum()
    }

    /// `floor` and `ceil` bounds of `self * 2^bits`.
    fn bounds(&self, bits: u32) -> (BigUint, BigUint) {
        let mut lo = BigUint::zero();
        let mut hi = BigUint::zero();
        for (coef, r) in &self.terms {
            let scaled = BigUint::from(*r) << (2 * bits);
            let s = scaled.sqrt();
            let exact = &s * &s == scaled;
            lo += coef * &s;
            hi += coef * if exact { s } else { s + BigUint::one() };
        }
        (lo, hi)
    }

    /// Exact sign of `self^2 * x - y` for nonnegative integers `x`, `y`.
    pub fn cmp_square_scaled(&self, x: &BigUint, y: &BigUint) -> Ordering {
        if self.terms.len() <= 1 {
            let lhs = match self.terms.first() {
                Some((c, r)) => c * c * BigUint::from(*r) * x,
                None => BigUint::zero(),
            };
            return lhs.cmp(y);
        }
        // Two or more distinct squarefree radicands with positive coefficients
        // make self^2 irrational, so refinement always terminates.
        let mut bits = 64;
        loop {
            let (lo, hi) = self.bounds(bits);
            let target = y << (2 * bits);
            if &lo * &lo * x > target {
                return Ordering::Greater;
            }
            if &hi * &hi * x < target {
                return Ordering::Less;
            }
            if x.is_zero() {
                return BigUint::zero().cmp(y);
            }
            bits *= 2;
        }
    }
}

/// Float comparison `surd^2 * x rel y`, with an exact decision inside the
/// tolerance band.
pub fn surd_square_comparison(
    name: impl Into<String>,
    surd: &SurdSum,
    x: &BigUint,
    rel: Rel,
    y: &BigUint,
    tol: f64,
) -> Comparison {
    let s = surd.to_f64();
    let lhs = s * s * x.to_f64().unwrap_or(f64::INFINITY);
    let rhs = y.to_f64().unwrap_or(f64::INFINITY);
    let mut cmp = Comparison::float(name, lhs, rel, rhs, tol);
    let scale = lhs.abs().max(rhs.abs());
    if (lhs - rhs).abs() <= 4.0 * tol * scale || !cmp.holds {
        cmp.holds = rel.accepts(surd.cmp_square_scaled(x, y));
        cmp.exact_fallback = true;
    }
    cmp
}
