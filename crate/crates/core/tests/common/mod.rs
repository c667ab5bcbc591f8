#![allow(dead_code)]

use mq_anneal::mq::{AnfPoly, Assignment, Monomial, VarId};
use mq_anneal::nnf::IntPoly;
use mq_anneal::qubo::Qubo;
use proptest::prelude::*;

/// Monomial whose variables are the set bits of `mask`.
pub fn monomial(mask: u32) -> Monomial {
    Monomial::from_vars((0..32).filter(|i| mask >> i & 1 == 1).map(VarId))
}

pub fn anf(n: usize, max_terms: usize) -> impl Strategy<Value = AnfPoly> {
    prop::collection::vec(0u32..1 << n, 0..=max_terms)
        .prop_map(|masks| AnfPoly::from_monomials(masks.into_iter().map(monomial)))
}

/// Integer polynomial on `n` variables with monomials of degree at most `deg`.
pub fn int_poly(n: usize, deg: u32, max_terms: usize) -> impl Strategy<Value = IntPoly> {
    prop::collection::vec(((0u32..1 << n).prop_filter("degree", move |m| m.count_ones() <= deg), -6i64..=6), 0..=max_terms)
        .prop_map(|terms| IntPoly::from_terms(terms.into_iter().map(|(m, c)| (monomial(m), c))))
}

pub fn qubo(n: usize) -> impl Strategy<Value = Qubo> {
    (
        -5i64..=5,
        prop::collection::vec(-5i64..=5, n),
        prop::collection::vec(-5i64..=5, n * n.saturating_sub(1) / 2),
    )
        .prop_map(move |(offset, lin, quad)| {
            let mut q = Qubo::new(n);
            q.set_offset(offset);
            for (i, c) in lin.into_iter().enumerate() {
                q.add_linear(VarId::from(i), c);
            }
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    q.add_quadratic(VarId::from(i), VarId::from(j), quad[k]);
                    k += 1;
                }
            }
            q
        })
}

pub fn all_assignments(n: usize) -> impl Iterator<Item = Assignment> {
    (0..1u64 << n).map(move |i| Assignment::from_index(i, n))
}

/// Independent parity evaluation: count satisfied monomials by hand.
pub fn parity(p: &AnfPoly, a: &Assignment) -> bool {
    p.monomials()
        .filter(|m| m.vars().iter().all(|&v| a.bits()[v.index()]))
        .count()
        % 2
        == 1
}

/// Exhaustive minimum of `f` over `n` variables and the minimisers' first
/// `project` bits as indices.
pub fn min_and_projections(n: usize, project: usize, f: impl Fn(&Assignment) -> i64) -> (i64, Vec<u64>) {
    let mut best = i64::MAX;
    let mut proj = std::collections::BTreeSet::new();
    for a in all_assignments(n) {
        let e = f(&a);
        if e < best {
            best = e;
            proj.clear();
        }
        if e == best {
            proj.insert(a.truncated(project).to_index());
        }
    }
    (best, proj.into_iter().collect())
}
