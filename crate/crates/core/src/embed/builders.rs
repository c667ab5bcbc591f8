use std::collections::BTreeMap;
use std::ops::Range;

use super::gates::{cnot_penalty, not_penalty, toffoli_penalty};
use super::{Builder, Definition, Embedding, VarRole};
use crate::error::{Error, Result};
use crate::mq::{AnfPoly, Monomial, MqSystem, VarId};
use crate::nnf::{anf_to_nnf, IntPoly};
use crate::par::{map_indexed, Parallelism};
use crate::quadratize::{pair_penalty, Reducer, Weighting};

/// Splits `t` XOR terms into pieces of at most `k` terms once the chain
/// ancillas are counted.
///
/// The first piece takes `k - 1` terms and a fresh chain ancilla, middle
/// pieces take the carried ancilla, `k - 2` terms and a fresh one, and the
/// last piece takes the carried ancilla and whatever remains. A last piece
/// with fewer than three variables in total is merged into its predecessor.
/// Equations with `t <= k` are left whole.
///
/// ```
/// use mq_anneal::embed::chunk_layout;
/// assert_eq!(chunk_layout(9, 4), vec![0..3, 3..5, 5..7, 7..9]);
/// assert_eq!(chunk_layout(4, 4), vec![0..4]);
/// ```
#[allow(clippy::single_range_in_vec_init)]
pub fn chunk_layout(t: usize, k: usize) -> Vec<Range<usize>> {
    assert!(k >= 3, "chunk size must be at least 3");
    if t <= k {
        return vec![0..t];
    }
    let mut chunks = vec![0..k - 1];
    let mut pos = k - 1;
    loop {
        let remaining = t - pos;
        if remaining < k {
            if remaining < 2 {
                let last = chunks.last_mut().expect("first chunk exists");
                last.end = t;
            } else {
                chunks.push(pos..t);
            }
            return chunks;
        }
        chunks.push(pos..pos + k - 2);
        pos += k - 2;
    }
}

/// Sum of the numerical normal forms of all equations, reduced to two-body
/// form in one pass with ancillas shared across equations.
pub fn embed_direct(s: &MqSystem, weighting: Weighting) -> Result<Embedding> {
    let n = s.n_vars();
    let forms = map_indexed(Parallelism::default(), s.num_equations(), |i| {
        anf_to_nnf(&s.polys()[i]).map_err(|e| match e {
            Error::Resource(msg) => Error::Resource(format!("equation {}: {msg}", i + 1)),
            other => other,
        })
    });
    let mut total = IntPoly::zero();
    for f in forms {
        total += &f?;
    }
    let mut b = Builder::new(n);
    let mut reducer = Reducer::new(weighting, n);
    b.reduce_and_add(&total, &mut reducer)?;
    b.finish()
}

/// Truncated embedding with delta-weighted reductions.
pub fn embed_truncated(s: &MqSystem, k: usize) -> Result<Embedding> {
    embed_truncated_with(s, k, Weighting::Delta)
}

/// Truncated embedding: quadratic monomials become pair ancillas, every
/// equation is split by [`chunk_layout`], and each piece is converted and
/// reduced on its own.
pub fn embed_truncated_with(s: &MqSystem, k: usize, weighting: Weighting) -> Result<Embedding> {
    if k < 3 {
        return Err(Error::Invalid(format!("truncation length must be at least 3, got {k}")));
    }
    let n = s.n_vars();
    let mut b = Builder::new(n);

    // A pair ancilla inconsistent with its product can at best repair each
    // equation it occurs in, so its penalty outweighs that many violations.
    let mut occurrences: BTreeMap<(VarId, VarId), i64> = BTreeMap::new();
    for p in s.polys() {
        for m in p.monomials().filter(|m| m.degree() == 2) {
            *occurrences.entry((m.vars()[0], m.vars()[1])).or_default() += 1;
        }
    }
    let mut pair_ids = BTreeMap::new();
    for (&(i, j), &count) in &occurrences {
        let a = b.fresh(VarRole::PairAncilla { left: i, right: j }, Definition::And(i, j));
        let mut penalty = IntPoly::zero();
        penalty.add_scaled(&pair_penalty(i, j, a)?, 1 + count);
        b.add(&penalty);
        pair_ids.insert((i, j), a);
    }

    for (e, p) in s.polys().iter().enumerate() {
        let terms: Vec<Monomial> = p
            .monomials()
            .map(|m| match m.degree() {
                2 => Monomial::var(pair_ids[&(m.vars()[0], m.vars()[1])]),
                _ => m.clone(),
            })
            .collect();
        if terms.is_empty() {
            continue;
        }
        let layout = chunk_layout(terms.len(), k);
        let mut carry: Option<VarId> = None;
        for (position, range) in layout.iter().enumerate() {
            let mut piece: Vec<Monomial> = terms[range.clone()].to_vec();
            if let Some(c) = carry {
                piece.push(Monomial::var(c));
            }
            if position + 1 < layout.len() {
                // The chain ancilla carries the XOR of everything so far.
                let mut vars: Vec<VarId> = piece.iter().flat_map(|m| m.vars().to_vec()).collect();
                vars.sort();
                let negate = piece.iter().any(Monomial::is_one);
                let a = b.fresh(VarRole::ChainAncilla { equation: e, position }, Definition::Xor { vars, negate });
                piece.push(Monomial::var(a));
                carry = Some(a);
            }
            let f = anf_to_nnf(&AnfPoly::from_monomials(piece))?;
            let mut reducer = Reducer::new(weighting, b.next_id());
            b.reduce_and_add(&f, &mut reducer)?;
        }
    }
    b.finish()
}

/// Circuit embedding: each equation drives an output wire through one gate
/// per monomial, and the wire is penalised unless it starts and ends at 0.
///
/// Gates are emitted constant first (NOT), then linear monomials (CNOT),
/// then quadratic ones (Toffoli), each group in canonical order.
pub fn embed_penalty(s: &MqSystem) -> Result<Embedding> {
    let mut b = Builder::new(s.n_vars());
    for (e, p) in s.polys().iter().enumerate() {
        let mut gates: Vec<&Monomial> = p.monomials().collect();
        gates.sort_by_key(|m| m.degree());

        let mut wire = b.fresh(VarRole::OutputAncilla { equation: e, step: 0 }, Definition::Const(false));
        b.add(&IntPoly::from_terms([(Monomial::var(wire), 1)]));
        for (g, m) in gates.iter().enumerate() {
            let out_role = VarRole::OutputAncilla { equation: e, step: g + 1 };
            let t = wire;
            match m.vars() {
                [] => {
                    wire = b.fresh(out_role, Definition::Xor { vars: vec![t], negate: true });
                    b.add(&not_penalty(t, wire));
                }
                &[c] => {
                    let a = b.fresh(VarRole::GateAncilla { equation: e, gate: g, slot: 0 }, Definition::And(c, t));
                    wire = b.fresh(out_role, Definition::Xor { vars: vec![c, t], negate: false });
                    b.add(&cnot_penalty(c, t, wire, a));
                }
                &[c1, c2] => {
                    let a2 = b.fresh(VarRole::GateAncilla { equation: e, gate: g, slot: 1 }, Definition::And(c1, c2));
                    let a1 = b.fresh(VarRole::GateAncilla { equation: e, gate: g, slot: 0 }, Definition::And(a2, t));
                    wire = b.fresh(out_role, Definition::Xor { vars: vec![a2, t], negate: false });
                    b.add(&toffoli_penalty(c1, c2, t, wire, a1, a2));
                }
                _ => unreachable!("system monomials have degree at most two"),
            }
        }
        if !gates.is_empty() {
            b.add(&IntPoly::from_terms([(Monomial::var(wire), 1)]));
        }
    }
    b.finish()
}
