//! The bias argument for arbitrary finite abelian groups, one explicit
//! inequality at a time. `K = |A - A|/|A|` and `gamma = |A - A|/|G|`.

use crate::energy::{energy_k_of_profile, energy_of_profiles, mixed_energy_comparisons};
use crate::error::{Error, Result};
use crate::exact::{Comparison, Rel};
use crate::fourier::spectrum_with;
use crate::group::GSet;
use crate::setops::{rep_profile_with, Method};
use crate::verdict::Verdict;
use crate::DEFAULT_TOL;

const PHI: f64 = 1.618_033_988_749_895;

struct Quantities {
    n: f64,
    k: f64,
    alpha: f64,
    gamma: f64,
    eta: f64,
}

fn quantities(a: &GSet, m: usize, eta: f64) -> Quantities {
    let n = a.card() as f64;
    let g = a.group().size() as f64;
    Quantities { n, k: m as f64 / n, alpha: n / g, gamma: m as f64 / g, eta }
}

/// `eta sqrt(K + 1) / sqrt(phi)`, the ratio whose limiting behaviour the
/// general-group bound describes. Recorded, never asserted.
pub fn golden_ratio_report(a: &GSet) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let prof = rep_profile_with(a, Method::Fast)?;
    let s = spectrum_with(a, Method::Fast)?;
    let q = quantities(a, prof.support.card(), s.eta);
    Ok(q.eta * (q.k + 1.0).sqrt() / PHI.sqrt())
}

pub fn appendix_chain_check(a: &GSet) -> Verdict {
    appendix_chain_check_with(a, Method::Fast, DEFAULT_TOL)
}

/// Checks, with `n = |A|` and `D = A - A`:
///
/// * `eta^2 K (1 - alpha) >= 1 - gamma`
/// * `E_3(A) <= (1 + 2/K)(eta^2 - 1/K + alpha) n^4 + n^4/K^2`
/// * `E_{3/2}(A) >= K^{-1/2} n^{5/2}` and `n^2 E_{3/2}^2 <= E_3(A) E(A, D)`
/// * `E(A, D) <= alpha K^2 n^3 + eta^2 K (1 - alpha K) n^3`
pub fn appendix_chain_check_with(a: &GSet, method: Method, tol: f64) -> Verdict {
    let b = Verdict::builder("appendix_chain", a);
    if a.is_empty() {
        return b.not_applicable("empty set");
    }
    if a.card() == a.group().size() {
        return b.not_applicable("A is the whole group");
    }
    let prof = rep_profile_with(a, method).expect("nonempty");
    let d_prof = rep_profile_with(&prof.support, method).expect("nonempty");
    let s = spectrum_with(a, method).expect("nonempty");
    let q = quantities(a, prof.support.card(), s.eta);
    let (n, k, alpha, eta2) = (q.n, q.k, q.alpha, q.eta * q.eta);
    let n3 = n * n * n;
    let n4 = n3 * n;
    let e3 = energy_k_of_profile(&prof, 3).expect("E_3 fits");
    let ead = energy_of_profiles(&prof, &d_prof);
    let mut cmps = vec![
        Comparison::float("bias_explicit", eta2 * k * (1.0 - alpha), Rel::Ge, 1.0 - q.gamma, tol),
        Comparison::float(
            "e3_via_bias",
            e3 as f64,
            Rel::Le,
            (1.0 + 2.0 / k) * (eta2 - 1.0 / k + alpha) * n4 + n4 / (k * k),
            tol,
        ),
    ];
    cmps.extend(mixed_energy_comparisons(&prof, method, tol));
    cmps.push(Comparison::float(
        "ead_spectral",
        ead as f64,
        Rel::Le,
        alpha * k * k * n3 + eta2 * k * (1.0 - alpha * k) * n3,
        tol,
    ));
    b.param("eta", q.eta)
        .param("argmax_char", s.argmax_char)
        .param("k", k)
        .param("alpha", alpha)
        .param("gamma", q.gamma)
        .param("e3", e3.to_string())
        .param("e_ad", ead.to_string())
        .param("golden_ratio", q.eta * (k + 1.0).sqrt() / PHI.sqrt())
        .finish(cmps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_group, parse_set_literal};
    use crate::verdict::Outcome;
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn subgroup_is_tight() {
        let a = parse_set_literal("G=4x4: (0,0),(1,0),(2,0),(3,0)").unwrap();
        let v = appendix_chain_check(&a);
        assert_eq!(v.pass, Outcome::Pass, "{v:?}");
        assert_eq!(v.params["k"], 1.0);
        assert!((v.params["eta"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(v.params["alpha"], 0.25);
        assert_eq!(v.params["gamma"], 0.25);
        assert_eq!(v.comparison_names().len(), 5);
    }

    #[test]
    fn singleton_degenerates_to_equality() {
        let a = parse_set_literal("p=7: 0").unwrap();
        let v = appendix_chain_check(&a);
        assert_eq!(v.pass, Outcome::Pass, "{v:?}");
        assert!(v.comparison("bias_explicit").unwrap()["margin"].as_f64().unwrap().abs() < 1e-9);
    }

    #[test]
    fn whole_group_is_not_applicable() {
        let g = make_group(&[5]).unwrap();
        assert_eq!(appendix_chain_check(&GSet::full(&g)).pass, Outcome::NotApplicable);
    }

    #[test]
    fn random_sets_in_a_product_group() {
        let g = make_group(&[3, 5, 7]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let a = GSet::from_elems(&g, sample(&mut rng, g.size(), 10).into_iter()).unwrap();
            let v = appendix_chain_check(&a);
            assert_eq!(v.pass, Outcome::Pass, "{v:?}");
            let r = golden_ratio_report(&a).unwrap();
            assert!((r - v.params["golden_ratio"].as_f64().unwrap()).abs() < 1e-12);
        }
    }
}
