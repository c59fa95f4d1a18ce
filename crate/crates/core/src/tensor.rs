//! Stabilizers of rank-`k` points `ξ = y₁ + … + y_k` and the split
//! `s_k = (g_k + l_k) + u_k`, `s_k′ = (h_k + l_k) + u_k` that governs the
//! `k`-fold tensor power of the minimal representation.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::catalog::{self, Family};
use crate::error::{Error, Result};
use crate::liealg::{Element, GradedModel};
use crate::linalg::{self, Matrix};
use crate::report::{CheckOutcome, ExactTally, VerificationReport};

/// Exact bases of the pieces of `s_k` and `s_k′`, all as elements of `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerDecomposition {
    pub k: usize,
    pub s_k: Vec<Element>,
    pub s_k_prime: Vec<Element>,
    /// `s_k ∩ θs_k`.
    pub levi: Vec<Element>,
    /// Radical of the invariant form restricted to `s_k`.
    pub nilradical: Vec<Element>,
    pub g_k: Vec<Element>,
    pub h_k: Vec<Element>,
    pub l_k: Vec<Element>,
}

impl StabilizerDecomposition {
    pub fn dims(&self) -> StabilizerDims {
        StabilizerDims {
            k: self.k,
            s_k: self.s_k.len(),
            s_k_prime: self.s_k_prime.len(),
            levi: self.levi.len(),
            g_k: self.g_k.len(),
            h_k: self.h_k.len(),
            l_k: self.l_k.len(),
            u_k: self.nilradical.len(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilizerDims {
    pub k: usize,
    pub s_k: usize,
    pub s_k_prime: usize,
    pub levi: usize,
    pub g_k: usize,
    pub h_k: usize,
    pub l_k: usize,
    pub u_k: usize,
}

/// `ξ = y₁ + … + y_k`.
pub fn xi(m: &GradedModel, k: usize) -> Element {
    let mut v = m.zero();
    for j in 0..k {
        v = linalg::add(&v, m.y(j));
    }
    v
}

/// Basis vectors of grade `g` whose `h_j`-weights vanish for every `j ≥ k`:
/// the part of `n̄` (or `n`) living on the first `k` triples.
fn peirce_two(m: &GradedModel, g: i8, k: usize) -> Vec<Element> {
    m.range_of_grade(g)
        .map(|a| m.basis_vector(a))
        .filter(|v| (k..m.rank()).all(|j| linalg::is_zero(&m.bracket(m.h(j), v))))
        .collect()
}

fn bracket_all(m: &GradedModel, a: &[Element], b: &[Element]) -> Vec<Element> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            let z = m.bracket(x, y);
            if !linalg::is_zero(&z) {
                out.push(z);
            }
        }
    }
    out
}

fn in_span_all(basis: &[Element], vs: &[Element]) -> bool {
    vs.iter().all(|v| linalg::in_span(basis, v))
}

fn check_k(m: &GradedModel, k: usize, min: usize) -> Result<()> {
    if k < min || k >= m.rank() {
        return Err(Error::KOutOfRange {
            k,
            min,
            max_exclusive: m.rank(),
        });
    }
    Ok(())
}

/// Computes `s_k`, `s_k′` and their pieces.
///
/// `l_k` is the part of the Levi factor that commutes with the first `k`
/// triples' blocks of `n̄` and `n` and is orthogonal to the center of `g`;
/// `g_k` is its orthogonal complement in the Levi factor and `h_k = g_k ∩ s_k′`.
pub fn stabilizer_sk(m: &GradedModel, k: usize) -> Result<StabilizerDecomposition> {
    check_k(m, k, 1)?;
    let gram: Matrix = m.pair_matrix();
    let s_k = linalg::independent(&m.centralizer_in_l(&[xi(m, k)])?);
    let ys: Vec<Element> = (0..k).map(|j| m.y(j).clone()).collect();
    let s_k_prime = linalg::independent(&m.centralizer_in_l(&ys)?);
    let theta_s: Vec<Element> = s_k.iter().map(|v| m.theta(v)).collect();
    let levi = linalg::intersection(&s_k, &theta_s);
    let nilradical = linalg::orthogonal_within(&s_k, &s_k, &gram);

    let mut peirce = peirce_two(m, -1, k);
    peirce.extend(peirce_two(m, 1, k));
    let commuting = linalg::intersection(&levi, &m.centralizer_in_l(&peirce)?);
    let l_k = linalg::orthogonal_within(&commuting, m.center(), &gram);
    let g_k = linalg::orthogonal_within(&levi, &l_k, &gram);
    let h_k = linalg::intersection(&g_k, &s_k_prime);
    Ok(StabilizerDecomposition {
        k,
        s_k,
        s_k_prime,
        levi,
        nilradical,
        g_k,
        h_k,
        l_k,
    })
}

/// `dim O_k` in closed form, for the families with a matrix model.
pub fn expected_orbit_dim(m: &GradedModel, k: usize) -> Option<usize> {
    let n = m.rank();
    match m.family() {
        Family::OSplit => Some(k * (4 * n - 2 * k - 1)),
        Family::GlReal => Some(k * (2 * n - k)),
        _ => None,
    }
}

fn form_rank(m: &GradedModel, vs: &[Element]) -> usize {
    let g: Matrix = vs
        .iter()
        .map(|a| vs.iter().map(|b| m.pair(a, b)).collect())
        .collect();
    linalg::rank(&g)
}

/// Structural properties of the decomposition, all exact.
pub fn decomposition_checks(m: &GradedModel, dec: &StabilizerDecomposition) -> VerificationReport {
    let mut rep = VerificationReport::new(format!("tensor-structure-k{}", dec.k), m.name());
    let dims = dec.dims();
    let mut push = |name: &str, ok: bool, detail: alloc::string::String| {
        let mut t = ExactTally::new();
        t.record_bool(ok);
        rep.push(CheckOutcome::exact(name, &t, detail));
    };

    let sum: Vec<Element> = dec.levi.iter().chain(&dec.nilradical).cloned().collect();
    push(
        "levi_plus_nilradical",
        linalg::span_dim(&sum) == dims.s_k && dims.levi + dims.u_k == dims.s_k,
        format!("{} + {} = {}", dims.levi, dims.u_k, dims.s_k),
    );
    push(
        "nilradical_ideal",
        in_span_all(&dec.nilradical, &bracket_all(m, &dec.s_k, &dec.nilradical)),
        "[s_k, u_k] ⊆ u_k".into(),
    );
    let mut series = dec.nilradical.clone();
    let mut steps = 0;
    while !series.is_empty() && steps <= dims.u_k {
        series = linalg::independent(&bracket_all(m, &dec.nilradical, &series));
        steps += 1;
    }
    push(
        "nilradical_nilpotent",
        series.is_empty(),
        format!("lower central series vanishes after {steps} steps"),
    );
    let isotropic = dec
        .nilradical
        .iter()
        .all(|a| dec.s_k.iter().all(|b| m.pair(a, b).is_zero()));
    push("nilradical_isotropic", isotropic, "⟨u_k, s_k⟩ = 0".into());
    push(
        "levi_theta_stable",
        in_span_all(&dec.levi, &dec.levi.iter().map(|v| m.theta(v)).collect::<Vec<_>>()),
        "θ(levi) = levi".into(),
    );
    push(
        "levi_form_nondegenerate",
        form_rank(m, &dec.levi) == dims.levi,
        format!("rank of the form on the Levi factor is {}", form_rank(m, &dec.levi)),
    );
    push(
        "prime_inside",
        dims.s_k_prime <= dims.s_k && in_span_all(&dec.s_k, &dec.s_k_prime),
        format!("s_k′ ({}) ⊆ s_k ({})", dims.s_k_prime, dims.s_k),
    );
    let gl: Vec<Element> = dec.g_k.iter().chain(&dec.l_k).cloned().collect();
    push(
        "levi_splits",
        dims.g_k + dims.l_k == dims.levi && linalg::span_dim(&gl) == dims.levi,
        format!("g_k ({}) ⊕ l_k ({}) = levi ({})", dims.g_k, dims.l_k, dims.levi),
    );
    push(
        "g_l_commute",
        bracket_all(m, &dec.g_k, &dec.l_k).is_empty(),
        "[g_k, l_k] = 0".into(),
    );
    let hlu: Vec<Element> = dec
        .h_k
        .iter()
        .chain(&dec.l_k)
        .chain(&dec.nilradical)
        .cloned()
        .collect();
    push(
        "prime_splits",
        dims.h_k + dims.l_k + dims.u_k == dims.s_k_prime && linalg::span_dim(&hlu) == dims.s_k_prime,
        format!(
            "h_k ({}) + l_k ({}) + u_k ({}) = s_k′ ({})",
            dims.h_k, dims.l_k, dims.u_k, dims.s_k_prime
        ),
    );
    let dim_l = m.l_range().len();
    if let Some(o) = expected_orbit_dim(m, dec.k) {
        push(
            "orbit_stabilizer",
            dims.s_k + o == dim_l,
            format!("dim s_k + dim O_k = {} + {} vs dim l = {}", dims.s_k, o, dim_l),
        );
    }
    if dec.k == 1 {
        let same = dims.s_k == dims.s_k_prime && in_span_all(&dec.s_k_prime, &dec.s_k);
        push("s1_prime_equals_s1", same, "s₁′ = s₁".into());
        let stab = m.stabilizer_algebra(m.y(0)).unwrap_or_default();
        push(
            "s1_matches_stabilizer",
            stab.len() == dims.s_k && in_span_all(&dec.s_k, &stab),
            format!("stabilizer of y₁ has dimension {}", stab.len()),
        );
    }
    rep
}

/// Compares `dim g_k` and `dim h_k` with the groups named in the catalog's
/// dual-pair column.
pub fn audit_dual_pair(m: &GradedModel, k: usize) -> Result<VerificationReport> {
    check_k(m, k, 2)?;
    let pair = catalog::dual_pair(&m.class(), k as u32)?;
    let dec = stabilizer_sk(m, k)?;
    let dims = dec.dims();
    let mut rep = VerificationReport::new(format!("tensor-audit-k{k}"), m.name());
    let mut row = |name: &str, got: usize, group: catalog::GroupName| {
        let want = group.real_dim();
        let mut t = ExactTally::new();
        t.record_bool(got as u64 == want);
        rep.push(CheckOutcome::exact(
            name,
            &t,
            format!("{got} vs dim {group} = {want}"),
        ));
    };
    row("g_k_dim", dims.g_k, pair.g);
    row("h_k_dim", dims.h_k, pair.h);
    rep.note(format!(
        "s_k = {}, s_k′ = {}, levi = {}, g_k = {}, h_k = {}, l_k = {}, u_k = {}",
        dims.s_k, dims.s_k_prime, dims.levi, dims.g_k, dims.h_k, dims.l_k, dims.u_k
    ));
    rep.note(format!(
        "dual pair {pair}: dimensions only; the correspondence of unitary duals is not computed"
    ));
    rep.extend(decomposition_checks(m, &dec));
    Ok(rep)
}

/// Structure checks for every `1 ≤ k < n`, and the dual-pair audit for
/// `k ≥ 2` when the catalog row has one.
pub fn tensor_suite(m: &GradedModel) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("tensor", m.name());
    for k in 1..m.rank() {
        if k >= 2 && m.class().dual.is_some() {
            rep.extend(audit_dual_pair(m, k)?);
        } else {
            let dec = stabilizer_sk(m, k)?;
            rep.extend(decomposition_checks(m, &dec));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::build_model;

    #[test]
    fn o66_k2_dimensions() {
        let m = build_model(Family::OSplit, 3).unwrap();
        let d = stabilizer_sk(&m, 2).unwrap().dims();
        assert_eq!(
            (d.s_k, d.s_k_prime, d.g_k, d.h_k, d.l_k, d.u_k),
            (22, 18, 10, 6, 4, 8)
        );
    }

    #[test]
    fn gl6_k2_dimensions() {
        let m = build_model(Family::GlReal, 3).unwrap();
        let d = stabilizer_sk(&m, 2).unwrap().dims();
        assert_eq!((d.s_k, d.g_k, d.h_k, d.l_k, d.u_k), (10, 4, 2, 2, 4));
    }

    #[test]
    fn k_range_enforced() {
        let m = build_model(Family::OSplit, 2).unwrap();
        assert!(stabilizer_sk(&m, 0).is_err());
        assert!(stabilizer_sk(&m, 2).is_err());
        assert!(audit_dual_pair(&m, 1).is_err());
    }

    #[test]
    fn audits_pass() {
        for fam in [Family::OSplit, Family::GlReal] {
            let m = build_model(fam, 3).unwrap();
            let r = tensor_suite(&m).unwrap();
            for c in &r.checks {
                assert!(c.passed(), "{}: {} {}", m.name(), c.name, c.detail);
            }
        }
    }
}
