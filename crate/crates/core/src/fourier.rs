//! Characters, spectra and the bias `eta`.
//!
//! Characters are indexed like group elements: `xi` is the character
//! `x -> exp(2 pi i sum_k xi_k x_k / n_k)`, and `A^(xi) = sum_{a in A} chi_xi(a)`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use rustfft::FftPlanner;

use crate::energy::energy_of_profiles;
use crate::error::{Error, Result};
use crate::exact::{int, ratio, to_f64, Comparison, Rel, Q};
use crate::group::{GSet, Group};
use crate::setops::{combine_with, rep_profile_with, Kind, Method};
use crate::verdict::Verdict;
use crate::DEFAULT_TOL;

/// Fourier coefficients of the indicator of `A`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub group: Arc<Group>,
    pub coeffs: Vec<Complex64>,
    pub eta: f64,
    pub argmax_char: usize,
}

pub fn spectrum(a: &GSet) -> Result<Spectrum> {
    spectrum_with(a, Method::Fast)
}

/// `Fast` runs an unnormalized inverse FFT along each axis; `Naive` sums characters directly.
pub fn spectrum_with(a: &GSet, method: Method) -> Result<Spectrum> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut coeffs = match method {
        Method::Fast => fft_coeffs(a),
        Method::Naive => naive_coeffs(a),
    };
    coeffs[0] = Complex64::new(a.card() as f64, 0.0);
    let (eta, argmax_char) = bias(&coeffs, a.card());
    let s = Spectrum { group: a.group().clone(), coeffs, eta, argmax_char };
    debug_assert!(s.invariants_hold(a.card(), 1e-9));
    Ok(s)
}

fn fft_coeffs(a: &GSet) -> Vec<Complex64> {
    let g = a.group();
    let mut buf = vec![Complex64::zero(); g.size()];
    for x in a.iter() {
        buf[x].re = 1.0;
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut stride = g.size();
    for &n in g.orders() {
        let n = n as usize;
        stride /= n;
        if n == 1 {
            continue;
        }
        let fft = planner.plan_fft_inverse(n);
        let mut line = vec![Complex64::zero(); n];
        let block = n * stride;
        for base in (0..g.size()).step_by(block) {
            for off in 0..stride {
                for (i, v) in line.iter_mut().enumerate() {
                    *v = buf[base + off + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    buf[base + off + i * stride] = *v;
                }
            }
        }
    }
    buf
}

fn naive_coeffs(a: &GSet) -> Vec<Complex64> {
    let g = a.group();
    let orders = g.orders();
    let elems: Vec<Vec<u64>> = a.iter().map(|x| g.coords(x)).collect();
    (0..g.size())
        .map(|xi| {
            let xc = g.coords(xi);
            elems
                .iter()
                .map(|ac| {
                    let frac: f64 = orders
                        .iter()
                        .zip(xc.iter().zip(ac))
                        .map(|(&n, (&u, &v))| ((u as u128 * v as u128) % n as u128) as f64 / n as f64)
                        .sum();
                    let (s, c) = (TAU * frac).sin_cos();
                    Complex64::new(c, s)
                })
                .sum()
        })
        .collect()
}

/// Largest nonprincipal `|coeff|` over `|A|`; ties go to the smallest index.
fn bias(coeffs: &[Complex64], card: usize) -> (f64, usize) {
    if coeffs.len() < 2 {
        return (0.0, 0);
    }
    let max = coeffs[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let slack = 1e-12 * card as f64;
    let arg = (1..coeffs.len())
        .find(|&i| coeffs[i].norm() >= max - slack)
        .expect("nonempty range");
    ((max / card as f64).min(1.0), arg)
}

impl Spectrum {
    pub fn size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn abs2(&self) -> impl Iterator<Item = f64> + '_ {
        self.coeffs.iter().map(|c| c.norm_sqr())
    }

    /// `sum_xi |A^(xi)|^2`, summed in index order.
    pub fn parseval_sum(&self) -> f64 {
        self.abs2().sum()
    }

    pub fn invariants_hold(&self, card: usize, tol: f64) -> bool {
        let n = card as f64;
        let g = self.size() as f64;
        self.coeffs[0] == Complex64::new(n, 0.0)
            && self.coeffs.iter().all(|c| c.norm() <= n * (1.0 + tol))
            && (self.parseval_sum() - n * g).abs() <= tol * n * g
            && (0.0..=1.0).contains(&self.eta)
    }
}

/// `(eta, argmax)` for `A`; needs a nonprincipal character.
pub fn eta(a: &GSet) -> Result<(f64, usize)> {
    if a.group().size() < 2 {
        return Err(Error::Precondition("the trivial group has no nonprincipal character".into()));
    }
    let s = spectrum(a)?;
    Ok((s.eta, s.argmax_char))
}

pub fn parseval_check(a: &GSet) -> Verdict {
    parseval_check_with(a, Method::Fast, DEFAULT_TOL)
}

pub fn parseval_check_with(a: &GSet, method: Method, tol: f64) -> Verdict {
    let b = Verdict::builder("parseval", a);
    let s = match spectrum_with(a, method) {
        Ok(s) => s,
        Err(e) => return b.not_applicable(e.to_string()),
    };
    let expected = (a.card() * a.group().size()) as f64;
    b.param("eta", s.eta).finish(vec![Comparison::float(
        "parseval",
        s.parseval_sum(),
        Rel::Eq,
        expected,
        tol,
    )])
}

/// `E(A,B) = |G|^{-1} sum_xi |A^(xi)|^2 |B^(xi)|^2`.
pub fn energy_via_spectrum(a: &GSet, b: &GSet) -> Result<f64> {
    a.same_group(b)?;
    let sa = spectrum(a)?;
    let sb = spectrum(b)?;
    Ok(spectral_energy(&sa, &sb))
}

pub(crate) fn spectral_energy(sa: &Spectrum, sb: &Spectrum) -> f64 {
    let total: f64 = sa.abs2().zip(sb.abs2()).map(|(x, y)| x * y).sum();
    total / sa.size() as f64
}

/// `|G|^{-1} sum |A^|^4` against the exact `E(A)`.
pub fn energy_spectrum_check(a: &GSet) -> Verdict {
    energy_spectrum_check_with(a, Method::Fast, DEFAULT_TOL)
}

pub fn energy_spectrum_check_with(a: &GSet, method: Method, tol: f64) -> Verdict {
    let b = Verdict::builder("energy_spectrum", a);
    let (Ok(s), Ok(prof)) = (spectrum_with(a, method), rep_profile_with(a, method)) else {
        return b.not_applicable("empty set");
    };
    let e = energy_of_profiles(&prof, &prof);
    b.finish(vec![Comparison::float("energy_identity", spectral_energy(&s, &s), Rel::Eq, int(e), tol)])
}

/// The FFT path against direct character sums, coefficient by coefficient,
/// within `tol * |A|`.
pub fn spectrum_paths_check(a: &GSet, tol: f64) -> Verdict {
    let b = Verdict::builder("spectrum_paths", a);
    let (Ok(f), Ok(n)) = (spectrum_with(a, Method::Fast), spectrum_with(a, Method::Naive)) else {
        return b.not_applicable("empty set");
    };
    let worst = f
        .coeffs
        .iter()
        .zip(&n.coeffs)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let scale = a.card() as f64;
    b.param("max_abs_error", worst).finish(vec![
        Comparison::float("max_relative_error", worst / scale, Rel::Le, tol, 0.0),
        // Near-ties may legitimately resolve differently under rounding.
        Comparison::exact("same_argmax", int(f.argmax_char as u64), Rel::Eq, int(n.argmax_char as u64)).informational(),
    ])
}

// ---------------------------------------------------------------------------
// Semicircle concentration
// ---------------------------------------------------------------------------

/// Best open half-circle for a multiset of unit vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcReport {
    pub points: Vec<f64>,
    pub eta_z: f64,
    pub best_count: usize,
    /// Every point in `[arc_start, arc_start + pi)` lies in the open arc
    /// `(arc_start - delta, arc_start - delta + pi)` for small enough `delta > 0`.
    pub arc_start: f64,
}

/// Angular slack when deciding whether a point sits on an arc endpoint.
const ANGLE_EPS: f64 = 1e-12;

impl ArcReport {
    /// `best_count >= (1 + eta_z)|Z|/2`, allowing `1e-9 |Z|` for boundary rounding.
    pub fn concentration_holds(&self) -> bool {
        let n = self.points.len() as f64;
        self.best_count as f64 >= 0.5 * (1.0 + self.eta_z) * n - 1e-9 * n
    }
}

pub fn semicircle_concentration(angles: &[f64]) -> Result<ArcReport> {
    if angles.is_empty() {
        return Err(Error::InvalidArgument("no points on the circle".into()));
    }
    let points: Vec<f64> = angles
        .iter()
        .map(|&t| {
            let t = t.rem_euclid(TAU);
            // Angles a rounding error below 2pi coincide with 0.
            if TAU - t <= ANGLE_EPS { 0.0 } else { t }
        })
        .collect();
    let sum: Complex64 = points.iter().map(|&t| Complex64::from_polar(1.0, t)).sum();
    let eta_z = (sum.norm() / points.len() as f64).min(1.0);

    // An optimal open arc can be rotated forward until a point reaches its
    // left end, so it suffices to count half-open arcs [t_j, t_j + pi).
    let mut sorted = points.clone();
    sorted.sort_by(|x, y| x.total_cmp(y));
    let n = sorted.len();
    let ext: Vec<f64> = sorted.iter().copied().chain(sorted.iter().map(|t| t + TAU)).collect();
    let (mut best, mut start) = (0usize, sorted[0]);
    let mut lo = 0usize;
    let mut hi = 0usize;
    while lo < n {
        // Skip a run of (numerically) equal angles; the run's first element anchors.
        let anchor = ext[lo];
        hi = hi.max(lo);
        while hi < lo + n && ext[hi] - anchor < PI - ANGLE_EPS {
            hi += 1;
        }
        if hi - lo > best {
            best = hi - lo;
            start = anchor;
        }
        let mut next = lo + 1;
        while next < n && ext[next] - anchor <= ANGLE_EPS {
            next += 1;
        }
        lo = next;
    }
    Ok(ArcReport { points, eta_z, best_count: best, arc_start: start })
}

/// Angles of `chi_xi(a)` for `a` in `A`.
pub fn character_angles(a: &GSet, xi: usize) -> Vec<f64> {
    let g = a.group();
    let xc = g.coords(xi);
    a.iter()
        .map(|x| {
            let frac: f64 = g
                .orders()
                .iter()
                .zip(xc.iter().zip(g.coords(x)))
                .map(|(&n, (&u, v))| ((u as u128 * v as u128) % n as u128) as f64 / n as f64)
                .sum::<f64>()
                .fract();
            TAU * frac
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Inequalities involving eta
// ---------------------------------------------------------------------------

/// `E(A) <= (alpha + eta^2)|A|^3` and the resulting lower bound on `eta^2`
/// from the Cauchy-Schwarz energy estimate, for `|A - A| < p/2`.
pub fn weak_eta_check(a: &GSet) -> Verdict {
    weak_eta_check_with(a, Method::Fast, DEFAULT_TOL)
}

pub fn weak_eta_check_with(a: &GSet, method: Method, tol: f64) -> Verdict {
    let b = Verdict::builder("weak_eta", a);
    let Some(p) = a.group().prime() else {
        return b.not_applicable("group is not Z_p");
    };
    if a.card() <= 2 {
        return b.not_applicable("|A| <= 2");
    }
    let prof = rep_profile_with(a, method).expect("nonempty");
    let (n, m) = (a.card() as u64, prof.support.card() as u64);
    if 2 * m >= p {
        return b.not_applicable("|A-A| >= p/2");
    }
    let s = spectrum_with(a, method).expect("nonempty");
    let e = energy_of_profiles(&prof, &prof);
    let alpha = ratio(n as i64, p as i64);
    let k = ratio(m as i64, n as i64);
    let c = Q::from_integer(1.into()) / (int(3) * &k * (&k + int(2)));
    let weak_rhs = Q::from_integer(1.into()) / &k + &c - &c / int(n * n) - &alpha;
    let eta2 = s.eta * s.eta;
    let n3 = (n * n * n) as f64;
    b.param("eta", s.eta)
        .param("argmax_char", s.argmax_char)
        .param("k", crate::exact::format_q(&k))
        .finish(vec![
            Comparison::float("erho", int(e), Rel::Le, (to_f64(&alpha) + eta2) * n3, tol),
            Comparison::float("weak", eta2, Rel::Ge, weak_rhs, tol),
        ])
}

/// `|G|^{-1}(|A|^2|X|^2 + eta^2 |A|^2 (|G| - |X|)|X|) >= E(A, X)`.
pub fn spectral_product_bound(a: &GSet, x: &GSet) -> Verdict {
    spectral_product_bound_with(a, x, Method::Fast, DEFAULT_TOL)
}

pub fn spectral_product_bound_with(a: &GSet, x: &GSet, method: Method, tol: f64) -> Verdict {
    let b = Verdict::builder("spectral_product", a).param("x", x.literal());
    if let Err(e) = a.same_group(x) {
        return b.not_applicable(e.to_string());
    }
    if a.is_empty() || x.is_empty() {
        return b.not_applicable("empty set");
    }
    let pa = rep_profile_with(a, method).expect("nonempty");
    let px = rep_profile_with(x, method).expect("nonempty");
    let sa = spectrum_with(a, method).expect("nonempty");
    let sx = spectrum_with(x, method).expect("nonempty");
    let e = energy_of_profiles(&pa, &px);
    let (n, m, g) = (a.card() as f64, x.card() as f64, a.group().size() as f64);
    let upper = (n * n * m * m + sa.eta * sa.eta * n * n * (g - m) * m) / g;
    b.param("eta", sa.eta).param("e_ax", e.to_string()).finish(vec![
        Comparison::float("spectral_bound", upper, Rel::Ge, int(e), tol),
        Comparison::float("spectral_identity", spectral_energy(&sa, &sx), Rel::Eq, int(e), tol),
    ])
}

// ---------------------------------------------------------------------------
// Final eta chains of the two main theorems
// ---------------------------------------------------------------------------

/// Doubling threshold `K_0` and the bias level `eta_0 = 2K_0/3 - 1` for each kind.
pub fn chain_constants(kind: Kind) -> (Q, Q) {
    let k0 = match kind {
        Kind::Diff => ratio(13, 5),
        Kind::Sum => ratio(259, 100),
    };
    let eta0 = ratio(2, 3) * &k0 - int(1);
    (k0, eta0)
}

/// Lower bound on `sum_{x in D} |A_x||X_x| / |A|^3` after the energy estimate.
///
/// `literal` selects the terms as printed in the source argument, which
/// overstate the difference case by `(|A|^2 - |A|) - (|D| - 1)`.
pub fn chain_polynomial(kind: Kind, k: &Q, n: u64, literal: bool) -> Q {
    let one = int(1);
    let nq = int(n);
    let n2 = &nq * &nq;
    match kind {
        Kind::Diff => {
            let c = &one / (int(3) * k * (k + int(2)));
            let base = &one + &one / k + &c - &c / &n2;
            if literal {
                base + (k - int(2)) / &nq - k / &n2
            } else {
                base + (k - int(3)) / &nq + &one / &n2
            }
        }
        Kind::Sum => &one + &one / k - (int(3) - k) / &nq,
    }
}

/// Density threshold implied by `eta < eta_0` after substituting `K = K_0`:
/// `alpha >= c0 + c1/n + c2/n^2` (returned as `(c0, c1, c2)`).
pub fn chain_threshold_coeffs(kind: Kind, literal: bool) -> (Q, Q, Q) {
    let (k, eta0) = chain_constants(kind);
    let e2 = &eta0 * &eta0;
    let one = int(1);
    let denom = (&one - &e2) * &k * &k;
    // (1 - eta0^2) alpha K^2 + eta0^2 K >= poly(K, n) with poly = a0 + a1/n + a2/n^2.
    let (a0, a1, a2) = match kind {
        Kind::Diff => {
            let c = &one / (int(3) * &k * (&k + int(2)));
            let a0 = &one + &one / &k + &c;
            if literal {
                (a0, &k - int(2), -&c - &k)
            } else {
                (a0, &k - int(3), &one - &c)
            }
        }
        Kind::Sum => (&one + &one / &k, &k - int(3), Q::zero()),
    };
    ((a0 - &e2 * &k) / &denom, a1 / &denom, a2 / &denom)
}

pub fn chain_threshold(kind: Kind, n: u64, literal: bool) -> Q {
    let (c0, c1, c2) = chain_threshold_coeffs(kind, literal);
    let nq = int(n);
    c0 + c1 / &nq + c2 / (&nq * &nq)
}

/// The spectral chain ending in the lower bound on `eta^2` used by the
/// theorem for `kind`, and the density contradiction when `eta < eta_0`.
pub fn eta_chain_check(a: &GSet, kind: Kind) -> Verdict {
    eta_chain_check_with(a, kind, Method::Fast, DEFAULT_TOL)
}

pub fn eta_chain_check_with(a: &GSet, kind: Kind, method: Method, tol: f64) -> Verdict {
    let b = Verdict::builder("eta_chain", a).param("kind", kind.as_str());
    let Some(p) = a.group().prime() else {
        return b.not_applicable("group is not Z_p");
    };
    if a.card() <= 2 {
        return b.not_applicable("|A| <= 2");
    }
    let n = a.card() as u64;
    if 2 * n - 1 > p {
        return b.not_applicable("2|A| - 1 > p");
    }
    let prof = rep_profile_with(a, method).expect("nonempty");
    let x = combine_with(a, a, kind, method).expect("nonempty");
    let m = x.card() as u64;
    if kind == Kind::Diff && 2 * m >= p {
        return b.not_applicable("|A-A| >= p/2");
    }
    let px = rep_profile_with(&x, method).expect("nonempty");
    let s = spectrum_with(a, method).expect("nonempty");
    let e = energy_of_profiles(&prof, &prof);
    let conv = energy_of_profiles(&prof, &px);
    let (nq, mq, pq) = (int(n), int(m), int(p));
    let n2 = &nq * &nq;
    let n3 = &n2 * &nq;
    let k = &mq / &nq;
    let alpha = &nq / &pq;
    let eq = int(e);
    let one = int(1);

    let (closed, literal_closed) = match kind {
        Kind::Diff => (
            &n3 + &eq + (&k - int(3)) * &n2 + &nq,
            Some(&n3 + &eq + (&k - int(2)) * &n2 - &k * &nq),
        ),
        Kind::Sum => (&n3 + &eq + &nq * &mq - int(3) * &n2 + &nq, None),
    };
    let poly = chain_polynomial(kind, &k, n, false);
    let eta2 = s.eta * s.eta;
    let upper = (n as f64).powi(2) * (m as f64) * ((m as f64) + eta2 * (p - m) as f64) / p as f64;

    let mut cmps = vec![
        Comparison::float("spectral_product", upper, Rel::Ge, int(conv), tol),
        Comparison::exact("convolution_lower", int(conv), Rel::Ge, closed.clone()),
        Comparison::exact("polynomial_lower", closed, Rel::Ge, &poly * &n3),
    ];
    if let Some(lit) = literal_closed {
        cmps.push(Comparison::exact("literal_convolution_lower", int(conv), Rel::Gt, lit).informational());
        let lit_poly = chain_polynomial(kind, &k, n, true);
        cmps.push(Comparison::exact("literal_polynomial_lower", int(conv), Rel::Ge, lit_poly * &n3).informational());
    }
    let dense = &alpha * &k;
    if dense < one {
        let eta2_lower = (&poly - &alpha * &k * &k) / (&k * (&one - &dense));
        cmps.push(Comparison::float("eta_lower", eta2, Rel::Ge, eta2_lower, tol));
    }
    let (k0, eta0) = chain_constants(kind);
    let below = to_f64(&eta0) - s.eta;
    let hypothesis = k < k0;
    if hypothesis && below > tol {
        cmps.push(Comparison::exact("density_threshold", alpha.clone(), Rel::Ge, chain_threshold(kind, n, false)));
        cmps.push(Comparison::exact("literal_density_threshold", alpha.clone(), Rel::Gt, chain_threshold(kind, n, true)).informational());
    }
    b.param("eta", s.eta)
        .param("eta0", crate::exact::format_q(&eta0))
        .param("eta_ge_eta0", below <= 0.0)
        .param("k", crate::exact::format_q(&k))
        .param("conv_sum", conv.to_string())
        .finish(cmps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy;
    use crate::exact::format_q;
    use crate::group::{make_group, parse_set_literal};
    use crate::setops::diffset;
    use crate::verdict::Outcome;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(t: &str) -> GSet {
        parse_set_literal(t).unwrap()
    }

    fn random_set(rng: &mut ChaCha8Rng, orders: &[u64]) -> GSet {
        let g = make_group(orders).unwrap();
        let size = g.size();
        let k = rng.gen_range(1..=size.min(40));
        let elems: Vec<usize> = (0..k).map(|_| rng.gen_range(0..size)).collect();
        GSet::from_elems(&g, elems).unwrap()
    }

    #[test]
    fn spectrum_examples() {
        let full = GSet::full(&make_group(&[5]).unwrap());
        let sp = spectrum(&full).unwrap();
        assert_eq!(sp.coeffs[0].re, 5.0);
        assert!(sp.coeffs[1..].iter().all(|c| c.norm() < 1e-12));
        assert_eq!((sp.eta < 1e-12, sp.argmax_char), (true, 1));

        let single = spectrum(&s("p=5: 0")).unwrap();
        assert!(single.coeffs.iter().all(|c| (c.norm() - 1.0).abs() < 1e-12));
        assert_eq!((single.eta, single.argmax_char), (1.0, 1));

        let (e, arg) = eta(&s("p=5: 0,1,2")).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((e * 3.0 - golden).abs() < 1e-12);
        assert!((e - 0.539345).abs() < 1e-6);
        assert_eq!(arg, 1);
    }

    #[test]
    fn fast_matches_naive_up_to_512() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shapes: &[&[u64]] = &[
            &[2], &[5], &[12], &[13], &[64], &[97], &[210], &[509], &[512], &[4, 4], &[3, 5, 7],
            &[2, 2, 2, 2, 2, 2], &[8, 9], &[2, 3, 4, 5], &[16, 32],
        ];
        for shape in shapes {
            for _ in 0..4 {
                let a = random_set(&mut rng, shape);
                let f = spectrum_with(&a, Method::Fast).unwrap();
                let n = spectrum_with(&a, Method::Naive).unwrap();
                let scale = a.card() as f64;
                for (x, y) in f.coeffs.iter().zip(&n.coeffs) {
                    assert!((x - y).norm() <= 1e-12 * scale, "{shape:?} {x} {y}");
                }
                assert_eq!(f.argmax_char, n.argmax_char);
            }
        }
    }

    #[test]
    fn parseval_examples() {
        let v = parseval_check(&s("p=13: 0,1,3"));
        assert!(v.is_pass());
        assert_eq!(v.rhs, "39.0");
        let sp = spectrum(&s("p=13: 6")).unwrap();
        assert!((sp.parseval_sum() - 13.0).abs() < 1e-9);
        let sub = s("G=4x4: (0,0),(1,0),(2,0),(3,0)");
        let sp = spectrum(&sub).unwrap();
        assert!((sp.parseval_sum() - 64.0).abs() < 1e-9);
        // 4 on the annihilator {(0, *)}, 0 elsewhere
        for (i, c) in sp.coeffs.iter().enumerate() {
            let expect = if i < 4 { 4.0 } else { 0.0 };
            assert!((c.norm() - expect).abs() < 1e-12);
        }
        assert_eq!(sp.eta, 1.0);
    }

    #[test]
    fn energy_via_spectrum_examples() {
        let a = s("p=13: 0,1,3");
        assert!((energy_via_spectrum(&a, &a).unwrap() - 15.0).abs() < 1e-9);
        let c = s("p=13: 4");
        assert!((energy_via_spectrum(&c, &c).unwrap() - 1.0).abs() < 1e-9);
        let a = s("p=17: 0,1,3");
        let d = diffset(&a, &a).unwrap();
        let exact = energy(&a, &d).unwrap() as f64;
        assert!((energy_via_spectrum(&a, &d).unwrap() - exact).abs() <= 1e-9 * exact);
        assert!(energy_via_spectrum(&a, &s("p=13: 1")).is_err());
    }

    #[test]
    fn spectral_identities_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let shapes: &[&[u64]] = &[&[101], &[4, 4], &[3, 5, 7], &[2, 2, 2, 2, 2, 2], &[100]];
        for shape in shapes {
            for _ in 0..40 {
                let a = random_set(&mut rng, shape);
                assert!(parseval_check(&a).is_pass());
                let exact = energy(&a, &a).unwrap() as f64;
                let spec = energy_via_spectrum(&a, &a).unwrap();
                assert!((spec - exact).abs() <= 1e-9 * exact);
            }
        }
    }

    /// Independent count over lattice angles `2 pi k / n`. In units of a
    /// quarter step the circle has `4n` units, an open arc spans `2n`, and
    /// every combinatorial type of arc has an integer start.
    fn arc_oracle(ks: &[u64], n: u64) -> usize {
        let pts: Vec<u64> = ks.iter().map(|k| 4 * (k % n)).collect();
        (0..4 * n)
            .map(|start| {
                pts.iter()
                    .filter(|&&t| {
                        let d = (t + 4 * n - start) % (4 * n);
                        d > 0 && d < 2 * n
                    })
                    .count()
            })
            .max()
            .unwrap()
    }

    #[test]
    fn semicircle_examples() {
        let r = semicircle_concentration(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!((r.eta_z, r.best_count), (1.0, 3));
        let roots: Vec<f64> = (0..7).map(|k| TAU * k as f64 / 7.0).collect();
        let r = semicircle_concentration(&roots).unwrap();
        assert!(r.eta_z < 1e-12);
        // Four consecutive seventh roots span 6pi/7 < pi.
        assert_eq!(r.best_count, 4);
        assert!(r.concentration_holds());
        let a = s("p=5: 0,1,2");
        let r = semicircle_concentration(&character_angles(&a, 1)).unwrap();
        assert!((r.eta_z - 0.539345).abs() < 1e-6);
        assert_eq!(r.best_count, 3);
        assert!(r.best_count as f64 >= 2.31);
        assert!(semicircle_concentration(&[]).is_err());
    }

    #[test]
    fn semicircle_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..400 {
            let n = rng.gen_range(2..40u64);
            let len = rng.gen_range(1..=50usize);
            let ks: Vec<u64> = (0..len).map(|_| rng.gen_range(0..n)).collect();
            let angles: Vec<f64> = ks.iter().map(|&k| TAU * k as f64 / n as f64).collect();
            let r = semicircle_concentration(&angles).unwrap();
            assert_eq!(r.best_count, arc_oracle(&ks, n), "n={n} ks={ks:?}");
            assert!(r.concentration_holds(), "n={n} ks={ks:?}");
        }
    }

    #[test]
    fn weak_eta_examples() {
        let v = weak_eta_check(&s("p=17: 0,1,3"));
        assert!(v.is_pass(), "{v:?}");
        let w = v.comparison("weak").unwrap();
        let rhs = crate::exact::parse_q(w["rhs"].as_str().unwrap()).unwrap();
        assert_eq!(rhs, ratio(125, 273) - ratio(3, 17));
        assert!((to_f64(&rhs) - 0.28141).abs() < 1e-5);
        assert_eq!(weak_eta_check(&s("p=17: 4")).pass, Outcome::NotApplicable);
        let g = make_group(&[101]).unwrap();
        let ap = GSet::from_residues(&g, 0..10).unwrap();
        assert!(weak_eta_check(&ap).is_pass());
    }

    #[test]
    fn spectral_product_examples() {
        let a = s("p=17: 0,1,3");
        let d = diffset(&a, &a).unwrap();
        assert!(spectral_product_bound(&a, &d).is_pass());
        let full = GSet::full(&make_group(&[7]).unwrap());
        let v = spectral_product_bound(&full, &full);
        assert!(v.is_pass());
        let c = v.comparison("spectral_bound").unwrap();
        assert_eq!(c["rhs"], "343");
        let mut rng = ChaCha8Rng::seed_from_u64(251);
        let g = make_group(&[251]).unwrap();
        let mut elems = std::collections::BTreeSet::new();
        while elems.len() < 12 {
            elems.insert(rng.gen_range(0..251usize));
        }
        let a = GSet::from_elems(&g, elems).unwrap();
        let ss = crate::setops::sumset(&a, &a).unwrap();
        assert!(spectral_product_bound(&a, &ss).is_pass());
    }

    fn approx(q: &Q, x: f64, tol: f64) -> bool {
        (to_f64(q) - x).abs() < tol
    }

    #[test]
    fn chain_constants_from_literal_terms() {
        let (c0, c1, c2) = chain_threshold_coeffs(Kind::Diff, true);
        assert!(approx(&c0, 0.0045, 1e-4) && to_f64(&c0) > 0.0045);
        assert!(approx(&c1, 0.1920, 1e-4));
        assert!(approx(&c2, -0.8410, 1e-4));
        let (c0, c1, c2) = chain_threshold_coeffs(Kind::Sum, true);
        assert!(approx(&c0, 0.0058, 1e-4));
        // alpha + 0.1296/n > 0.0058
        assert!(approx(&c1, -0.1296, 1e-4));
        assert!(c2.is_zero());
        assert_eq!(format_q(&chain_constants(Kind::Diff).1), "11/15");
        assert_eq!(format_q(&chain_constants(Kind::Sum).1), "109/150");
    }

    #[test]
    fn corrected_diff_threshold() {
        let (c0, c1, c2) = chain_threshold_coeffs(Kind::Diff, false);
        assert!(approx(&c0, 0.004565, 1e-6));
        assert!(approx(&c1, -0.1280, 1e-4));
        assert!(approx(&c2, 0.3111, 1e-4));
        // The corrected threshold clears 0.0045 only for large |A|.
        assert!(chain_threshold(Kind::Diff, 1000, false) < ratio(45, 10000));
        assert!(chain_threshold(Kind::Diff, 3000, false) > ratio(45, 10000));
    }

    #[test]
    fn chain_polynomial_matches_closed_form() {
        // Corrected closed form, divided by n^3, after E >= cs_bound.
        for (n, m) in [(5u64, 9u64), (10, 19), (7, 20)] {
            let k = ratio(m as i64, n as i64);
            let nq = int(n);
            let closed = int(n).pow(3) + crate::energy::cs_bound(n, m) + (&k - int(3)) * &nq * &nq + &nq;
            assert_eq!(closed / nq.pow(3), chain_polynomial(Kind::Diff, &k, n, false));
        }
    }

    #[test]
    fn eta_chain_examples() {
        let g = make_group(&[5003]).unwrap();
        let ap = GSet::from_residues(&g, (0..10).map(|i| 7 * i)).unwrap();
        for kind in [Kind::Diff, Kind::Sum] {
            let v = eta_chain_check(&ap, kind);
            assert!(v.is_pass(), "{v:?}");
            assert_eq!(v.params["eta_ge_eta0"], true);
        }
        assert_eq!(eta_chain_check(&s("p=17: 1,2"), Kind::Diff).pass, Outcome::NotApplicable);
        assert_eq!(eta_chain_check(&s("G=15: 1,2,4"), Kind::Sum).pass, Outcome::NotApplicable);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = make_group(&[1009]).unwrap();
        for _ in 0..200 {
            let k = rng.gen_range(3..15);
            let a = GSet::from_elems(&g, (0..k).map(|_| rng.gen_range(0..1009usize))).unwrap();
            for kind in [Kind::Diff, Kind::Sum] {
                let v = eta_chain_check(&a, kind);
                assert!(!v.is_fail(), "{v:?}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eta_invariant_under_affine_maps(mask in 1u64..(1 << 30), d in 1i64..31, c in 0usize..31) {
            let g = make_group(&[31]).unwrap();
            let a = GSet::from_mask(&g, mask);
            let b = crate::group::affine_map(&a, d, c).unwrap();
            let mut x: Vec<f64> = spectrum(&a).unwrap().abs2().collect();
            let mut y: Vec<f64> = spectrum(&b).unwrap().abs2().collect();
            x.sort_by(f64::total_cmp);
            y.sort_by(f64::total_cmp);
            for (u, v) in x.iter().zip(&y) {
                prop_assert!((u - v).abs() <= 1e-9 * a.card() as f64 * a.card() as f64);
            }
        }

        #[test]
        fn spectrum_invariants(mask in 1u64..(1 << 16)) {
            let g = make_group(&[4, 4]).unwrap();
            let a = GSet::from_mask(&g, mask);
            let sp = spectrum(&a).unwrap();
            prop_assert!(sp.invariants_hold(a.card(), 1e-9));
            prop_assert!((sp.eta * a.card() as f64 - sp.coeffs[sp.argmax_char].norm()).abs() < 1e-9);
        }
    }
}
