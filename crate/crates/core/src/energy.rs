//! Additive energies `E(A,B)`, `E_k(A)`, Schur-triple counts, the centered
//! moments `sigma_k` of `F(x) = |A_x| - lambda D(x)`, and the energy
//! inequalities built from them.
//!
//! Rational bounds are compared exactly after clearing denominators; only
//! `E_{3/2}` is irrational, and it goes through [`SurdSum`].

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{int, ratio, surd_square_comparison, Comparison, Rel, SurdSum, Q};
use crate::group::GSet;
use crate::setops::{
    combine_with, diffset_with, layer, rep_profile_with, sumset_with, Kind, Method, RepProfile,
};
use crate::verdict::Verdict;
use crate::DEFAULT_TOL;

/// `E(A,B) = sum_x |A_x| |B_x|`.
pub fn energy(a: &GSet, b: &GSet) -> Result<u128> {
    a.same_group(b)?;
    let pa = rep_profile_with(a, Method::Fast)?;
    let pb = rep_profile_with(b, Method::Fast)?;
    Ok(energy_of_profiles(&pa, &pb))
}

pub fn energy_of_profiles(pa: &RepProfile, pb: &RepProfile) -> u128 {
    pa.nonzero()
        .map(|(x, c)| c as u128 * pb.count(x) as u128)
        .sum()
}

/// `E_k(A) = sum_{x in A-A} |A_x|^k` for real `k > 0`.
pub fn energy_k(a: &GSet, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("energy order must be positive, got {k}")));
    }
    let prof = rep_profile_with(a, Method::Fast)?;
    Ok(prof.nonzero().map(|(_, c)| (c as f64).powf(k)).sum())
}

/// Exact `E_k(A)` for a positive integer `k`.
pub fn energy_k_int(a: &GSet, k: u32) -> Result<u128> {
    if k == 0 {
        return Err(Error::InvalidArgument("energy order must be positive".into()));
    }
    let prof = rep_profile_with(a, Method::Fast)?;
    energy_k_of_profile(&prof, k)
}

pub fn energy_k_of_profile(prof: &RepProfile, k: u32) -> Result<u128> {
    prof.nonzero().try_fold(0u128, |acc, (_, c)| {
        (c as u128)
            .checked_pow(k)
            .and_then(|t| acc.checked_add(t))
            .ok_or(Error::Overflow("E_k"))
    })
}

/// `E_{3/2}(A)` as an exact sum of square roots.
pub fn e32_surd(prof: &RepProfile) -> SurdSum {
    let mut hist = std::collections::BTreeMap::<u64, u64>::new();
    for (_, c) in prof.nonzero() {
        *hist.entry(c).or_default() += 1;
    }
    SurdSum::three_halves(hist)
}

/// `(sum_{x,y} |A ∩ (A+x) ∩ (A+y)|, sum_{x,y} |A ∩ (A+x) ∩ (A+y)|^2)`,
/// which equal `|A|^3` and `E_3(A)`.
pub fn triple_sums(a: &GSet) -> Result<(u128, u128)> {
    triple_sums_with(a, Method::Fast)
}

pub fn triple_sums_with(a: &GSet, method: Method) -> Result<(u128, u128)> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let g = a.group();
    let (mut s1, mut s2) = (0u128, 0u128);
    match method {
        Method::Fast => {
            // A ∩ (A+x) ∩ (A+y) = A_x ∩ A_y, and it is empty unless x, y ∈ A - A.
            let d = diffset_with(a, a, Method::Fast)?;
            let layers: Vec<GSet> = d.iter().map(|x| layer(a, x)).collect::<Result<_>>()?;
            for (i, lx) in layers.iter().enumerate() {
                let t = lx.card() as u128;
                s1 += t;
                s2 += t * t;
                for ly in &layers[i + 1..] {
                    let t = lx.intersection_card(ly) as u128;
                    s1 += 2 * t;
                    s2 += 2 * t * t;
                }
            }
        }
        Method::Naive => {
            for x in 0..g.size() {
                for y in 0..g.size() {
                    let t = a
                        .iter()
                        .filter(|&z| a.contains(g.sub(z, x)) && a.contains(g.sub(z, y)))
                        .count() as u128;
                    s1 += t;
                    s2 += t * t;
                }
            }
        }
    }
    Ok((s1, s2))
}

/// `sum_{x,y} |A_x ∩ A_y| = |A|^3` and `sum_{x,y} |A_x ∩ A_y|^2 = E_3(A)`.
pub fn triple_sums_check(a: &GSet) -> Verdict {
    triple_sums_check_with(a, Method::Fast)
}

pub fn triple_sums_check_with(a: &GSet, method: Method) -> Verdict {
    let b = Verdict::builder("triple_sums", a);
    let (s1, s2) = match triple_sums_with(a, method) {
        Ok(t) => t,
        Err(e) => return b.not_applicable(e.to_string()),
    };
    let n = a.card() as u128;
    let e3 = energy_k_int(a, 3).expect("nonempty");
    b.finish(vec![
        Comparison::exact("sum_is_cube", int(s1), Rel::Eq, int(n * n * n)),
        Comparison::exact("squares_is_e3", int(s2), Rel::Eq, int(e3)),
    ])
}

/// `|{(x, y) in D^2 : x - y in D}|`.
pub fn schur_count(d: &GSet) -> Result<u64> {
    schur_count_with(d, Method::Fast)
}

pub fn schur_count_with(d: &GSet, method: Method) -> Result<u64> {
    d.group().require_prime()?;
    if d.is_empty() {
        return Err(Error::EmptySet);
    }
    let g = d.group();
    Ok(match method {
        Method::Fast => {
            // x - y in D  <=>  y in x - D
            let neg = d.negate();
            d.iter()
                .map(|x| d.intersection_card(&neg.translate(x)) as u64)
                .sum()
        }
        Method::Naive => d
            .iter()
            .map(|x| d.iter().filter(|&y| d.contains(g.sub(x, y))).count() as u64)
            .sum(),
    })
}

/// Schur-triple bound `4 count <= 3|D|^2 + 1` for odd `|D| <= (2p+1)/3`.
pub fn lemma34_check(d: &GSet) -> Verdict {
    lemma34_check_with(d, Method::Fast)
}

pub fn lemma34_check_with(d: &GSet, method: Method) -> Verdict {
    let b = Verdict::builder("lemma34", d);
    let Some(p) = d.group().prime() else {
        return b.not_applicable("group is not Z_p");
    };
    let n = d.card() as u64;
    if n == 0 {
        return b.not_applicable("empty set");
    }
    if n % 2 == 0 {
        return b.not_applicable("|D| is even");
    }
    if 3 * n > 2 * p + 1 {
        return b.not_applicable("|D| > (2p+1)/3");
    }
    let count = schur_count_with(d, method).expect("prime group, nonempty set");
    b.param("count", count)
        .param("card", n)
        .finish(vec![Comparison::exact(
            "schur_bound",
            int(4 * count),
            Rel::Le,
            int(3 * n * n + 1),
        )])
}

/// Exact energies and the centered moments of `F(x) = |A_x| - lambda D(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub e2: u128,
    pub e3: u128,
    pub e32: f64,
    pub eab: Option<u128>,
    pub lambda: Q,
    pub sigma1: Q,
    pub sigma2: Q,
    pub sigma3: Q,
    pub k: Q,
    pub fmax: Q,
}

pub fn centered_moments(a: &GSet) -> Result<EnergyReport> {
    let prof = rep_profile_with(a, Method::Fast)?;
    Ok(moments_of_profile(&prof))
}

pub(crate) fn moments_of_profile(prof: &RepProfile) -> EnergyReport {
    let n = prof.base_card as i64;
    let m = prof.support.card() as i64;
    let n2 = BigInt::from(n * n);
    let mb = BigInt::from(m);
    // m * F(x) = m |A_x| - |A|^2 is an integer on the support, and F vanishes off it.
    let (mut s1, mut s2, mut s3) = (BigInt::zero(), BigInt::zero(), BigInt::zero());
    let mut fmax: Option<BigInt> = None;
    let (mut e2, mut e3) = (0u128, 0u128);
    for (_, c) in prof.nonzero() {
        let f = BigInt::from(c) * &mb - &n2;
        s1 += &f;
        s2 += &f * &f;
        s3 += &f * &f * &f;
        fmax = Some(match fmax {
            Some(best) if best >= f => best,
            _ => f,
        });
        let c = c as u128;
        e2 += c * c;
        e3 += c * c * c;
    }
    let denom = |k: u32| Q::from_integer(mb.pow(k));
    EnergyReport {
        e2,
        e3,
        e32: prof.nonzero().map(|(_, c)| (c as f64).powf(1.5)).sum(),
        eab: None,
        lambda: ratio(n * n, m),
        sigma1: Q::from_integer(s1) / denom(1),
        sigma2: Q::from_integer(s2) / denom(2),
        sigma3: Q::from_integer(s3) / denom(3),
        k: ratio(m, n),
        fmax: Q::from_integer(fmax.unwrap_or_default()) / denom(1),
    }
}

/// Moment identities and the `E_3` upper bound, all exact.
pub fn moments_check(a: &GSet) -> Verdict {
    moments_check_with(a, Method::Fast)
}

pub fn moments_check_with(a: &GSet, method: Method) -> Verdict {
    let b = Verdict::builder("moments", a);
    let prof = match rep_profile_with(a, method) {
        Ok(p) => p,
        Err(e) => return b.not_applicable(e.to_string()),
    };
    let r = moments_of_profile(&prof);
    let n = int(prof.base_card as u64);
    let m = int(prof.support.card() as u64);
    let e2 = int(r.e2);
    let e3 = int(r.e3);
    let n2 = &n * &n;
    let n4 = &n2 * &n2;
    let n6 = &n4 * &n2;
    let sig2_formula = &e2 - &n4 / &m;
    let sig3_formula = &e3 - int(3) * (&n2 / &m) * &r.sigma2 - &n6 / (&m * &m);
    let sig23_rhs = (Q::one() - &n / &m) * &n * &r.sigma2;
    let e3_upper = (Q::one() + int(2) * &n / &m) * (&e2 - &n4 / &m) * &n + &n6 / (&m * &m);
    b.param("e2", r.e2.to_string())
        .param("e3", r.e3.to_string())
        .param("lambda", crate::exact::format_q(&r.lambda))
        .param("sigma2", crate::exact::format_q(&r.sigma2))
        .param("sigma3", crate::exact::format_q(&r.sigma3))
        .finish(vec![
            Comparison::exact("sigma1_zero", r.sigma1.clone(), Rel::Eq, Q::zero()),
            Comparison::exact("sigma2_identity", r.sigma2.clone(), Rel::Eq, sig2_formula),
            Comparison::exact("sigma3_identity", r.sigma3.clone(), Rel::Eq, sig3_formula),
            Comparison::exact("sigma3_le_max_f_sigma2", r.sigma3.clone(), Rel::Le, sig23_rhs),
            Comparison::exact("fmax_is_a_minus_lambda", r.fmax.clone(), Rel::Eq, &n - &r.lambda),
            Comparison::exact("e3_upper", e3.clone(), Rel::Le, e3_upper),
            Comparison::exact("e2_ge_a_squared", e2.clone(), Rel::Ge, n2.clone()),
            Comparison::exact("e3_le_a_e2", e3, Rel::Le, &n * &e2),
            Comparison::exact("cauchy_schwarz", e2, Rel::Ge, n4 / m),
        ])
}

/// Lower bound `E(A) >= (1/K + (1 - |A|^-2) / (3K(K+2))) |A|^3` for
/// `|A - A| = K|A| < p/2`.
pub fn cs_bound(n: u64, m: u64) -> Q {
    let k = ratio(m as i64, n as i64);
    let n = int(n);
    let n2 = &n * &n;
    (Q::one() / &k + (Q::one() - Q::one() / &n2) / (int(3) * &k * (&k + int(2)))) * &n2 * &n
}

pub fn cs_bound_check(a: &GSet) -> Verdict {
    cs_bound_check_with(a, Method::Fast)
}

pub fn cs_bound_check_with(a: &GSet, method: Method) -> Verdict {
    let b = Verdict::builder("cs_bound", a);
    let Some(p) = a.group().prime() else {
        return b.not_applicable("group is not Z_p");
    };
    let prof = match rep_profile_with(a, method) {
        Ok(pr) => pr,
        Err(e) => return b.not_applicable(e.to_string()),
    };
    let (n, m) = (prof.base_card as u64, prof.support.card() as u64);
    if 2 * m >= p {
        return b.not_applicable("|A-A| >= p/2");
    }
    let e = energy_of_profiles(&prof, &prof);
    let bound = cs_bound(n, m);
    let trivial = int(n * n * n * n) / int(m);
    let e3 = int(energy_k_of_profile(&prof, 3).expect("E_3 fits in u128"));
    let schur = schur_count_with(&prof.support, method).expect("prime group");
    let n6 = int(n).pow(6);
    let mut cmps = vec![
        Comparison::exact("lemma_cs", int(e), Rel::Ge, bound.clone()),
        // Cauchy-Schwarz over the triple intersections, then the Schur bound on D.
        Comparison::exact("e3_times_schur", &e3 * int(schur), Rel::Ge, n6.clone()),
        Comparison::exact("schur_bound", int(4 * schur), Rel::Le, int(3 * m * m + 1)),
        Comparison::exact("e3_lower", e3, Rel::Ge, e3_lower_via_schur(n, m)),
    ];
    if n >= 2 {
        cmps.push(Comparison::exact("improves_cauchy_schwarz", bound, Rel::Gt, trivial));
    }
    b.param("e2", e.to_string())
        .param("k", crate::exact::format_q(&ratio(m as i64, n as i64)))
        .finish(cmps)
}

/// `sum_{x in D} |A_x| |A ∓ A_x|` against its Cauchy-Davenport lower bound and
/// its Katz-Koester upper bound `sum_{x in D} |A_x| |X_x|`, `X = A ∓ A`.
pub fn convolution_sum_check(a: &GSet, kind: Kind) -> Verdict {
    convolution_sum_check_with(a, kind, Method::Fast)
}

pub fn convolution_sum_check_with(a: &GSet, kind: Kind, method: Method) -> Verdict {
    let b = Verdict::builder("convolution_sum", a).param("kind", kind.as_str());
    let Some(p) = a.group().prime() else {
        return b.not_applicable("group is not Z_p");
    };
    let prof = match rep_profile_with(a, method) {
        Ok(pr) => pr,
        Err(e) => return b.not_applicable(e.to_string()),
    };
    let n = prof.base_card as u64;
    // Below this size Cauchy-Davenport never saturates at p.
    if 2 * n - 1 > p {
        return b.not_applicable("2|A| - 1 > p");
    }
    let x_set = combine_with(a, a, kind, method).expect("nonempty");
    let mut lhs: u128 = 0;
    let mut upper: u128 = 0;
    let mut cd_nonzero: u128 = 0;
    for (x, c) in prof.nonzero() {
        let ax = layer(a, x).expect("x in group");
        let t = match kind {
            Kind::Diff => diffset_with(a, &ax, method),
            Kind::Sum => sumset_with(a, &ax, method),
        }
        .expect("nonempty")
        .card() as u128;
        lhs += c as u128 * t;
        upper += c as u128 * layer(&x_set, x).expect("x in group").card() as u128;
        if x != 0 {
            cd_nonzero += c as u128 * (n as u128 + c as u128 - 1);
        }
    }
    let e = energy_of_profiles(&prof, &prof) as i128;
    let (n_i, m_i, s_i) = (n as i128, prof.support.card() as i128, x_set.card() as i128);
    // x = 0 contributes |A||A ∓ A| exactly; every other x is bounded by Cauchy-Davenport.
    let pre_drop = n_i * s_i + cd_nonzero as i128;
    let closed = match kind {
        Kind::Diff => n_i * m_i + (n_i * n_i - n_i) * n_i + (e - n_i * n_i) - (n_i * n_i - n_i),
        Kind::Sum => n_i * n_i * n_i + e + n_i * s_i - 3 * n_i * n_i + n_i,
    };
    let mut cmps = vec![
        Comparison::exact("pre_drop", int(lhs), Rel::Ge, int(pre_drop)),
        Comparison::exact("closed_form", int(pre_drop), Rel::Eq, int(closed)),
        Comparison::exact("katz_koester_upper", int(lhs), Rel::Le, int(upper)),
    ];
    if kind == Kind::Diff {
        // Closed form with -(|D| - 1) in place of -(|A|^2 - |A|); false in general.
        let literal = n_i * m_i + (n_i * n_i - n_i) * n_i + (e - n_i * n_i) - (m_i - 1);
        cmps.push(
            Comparison::exact("literal_closed_form", int(lhs), Rel::Ge, int(literal)).informational(),
        );
    }
    b.param("lhs_sum", lhs.to_string())
        .param("upper_sum", upper.to_string())
        .finish(cmps)
}

/// Hölder `E_{3/2} >= K^{-1/2} |A|^{5/2}` and `|A|^2 E_{3/2}^2 <= E_3(A) E(A, A-A)`.
pub fn mixed_energy_check(a: &GSet) -> Verdict {
    mixed_energy_check_with(a, Method::Fast, DEFAULT_TOL)
}

pub fn mixed_energy_check_with(a: &GSet, method: Method, tol: f64) -> Verdict {
    let b = Verdict::builder("mixed_energy", a);
    let prof = match rep_profile_with(a, method) {
        Ok(pr) => pr,
        Err(e) => return b.not_applicable(e.to_string()),
    };
    let cmps = mixed_energy_comparisons(&prof, method, tol);
    b.param("e32", prof.nonzero().map(|(_, c)| (c as f64).powf(1.5)).sum::<f64>())
        .finish(cmps)
}

pub(crate) fn mixed_energy_comparisons(prof: &RepProfile, method: Method, tol: f64) -> Vec<Comparison> {
    let n = BigUint::from(prof.base_card);
    let m = BigUint::from(prof.support.card());
    let surd = e32_surd(prof);
    let e3 = BigUint::from(energy_k_of_profile(prof, 3).expect("E_3 fits in u128"));
    let d_prof = rep_profile_with(&prof.support, method).expect("support is nonempty");
    let ead = BigUint::from(energy_of_profiles(prof, &d_prof));
    let n2 = &n * &n;
    let n6 = n2.pow(3);
    vec![
        surd_square_comparison("holder_e32", &surd, &m, Rel::Ge, &n6, tol),
        surd_square_comparison("mixed_energy", &surd, &n2, Rel::Le, &(e3 * ead), tol),
    ]
}

/// `4/3 |A|^6/|D|^2 - 1/3 |A|^4/|D|^2`, the `E_3` lower bound obtained from
/// `E_3 (3|D|^2+1)/4 >= |A|^6` and `E_3 <= |A|^4`.
pub(crate) fn e3_lower_via_schur(n: u64, m: u64) -> Q {
    let n2 = int(n * n);
    let m2 = int(m * m);
    int(4) / int(3) * &n2 * &n2 * &n2 / &m2 - ratio(1, 3) * &n2 * &n2 / &m2
}
