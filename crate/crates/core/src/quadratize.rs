//! Degree reduction of multilinear polynomials to two-body form.
//!
//! A product `x_i x_j` occurring inside higher-order monomials is replaced by
//! an ancilla `x_ij`, and a scaled copy of the penalty
//! `s = 3 x_ij + x_i x_j - 2 x_i x_ij - 2 x_j x_ij` is added. The penalty is
//! zero exactly when `x_ij = x_i x_j`, so minimising over the ancillas
//! recovers the original polynomial value for every assignment of the
//! original variables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mq::{Monomial, VarId};
use crate::nnf::IntPoly;

/// How the penalty for one substitution is scaled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// `sum_K (1 + |alpha_K|)` over every substituted term.
    PerTerm,
    /// A single `1 + delta`, where delta is the larger of the positive and the
    /// negated negative coefficient sums of the substituted terms.
    #[default]
    Delta,
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-term" | "per_term" => Ok(Weighting::PerTerm),
            "delta" => Ok(Weighting::Delta),
            other => Err(Error::Invalid(format!("unknown weighting {other:?}"))),
        }
    }
}

/// Product ancillas, keyed by the unordered pair they stand for.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AncillaMap {
    pairs: BTreeMap<(VarId, VarId), VarId>,
}

impl AncillaMap {
    pub fn get(&self, a: VarId, b: VarId) -> Option<VarId> {
        self.pairs.get(&ordered(a, b)).copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `((i, j), ancilla)` entries ordered by ancilla id.
    pub fn by_ancilla(&self) -> Vec<((VarId, VarId), VarId)> {
        let mut entries: Vec<_> = self.pairs.iter().map(|(&p, &a)| (p, a)).collect();
        entries.sort_by_key(|&(_, a)| a);
        entries
    }

    fn insert(&mut self, a: VarId, b: VarId, ancilla: VarId) {
        self.pairs.insert(ordered(a, b), ancilla);
    }
}

fn ordered(a: VarId, b: VarId) -> (VarId, VarId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A polynomial of degree at most two.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuadPoly(IntPoly);

impl QuadPoly {
    pub fn new(p: IntPoly) -> Result<Self> {
        if p.degree() > 2 {
            return Err(Error::Invalid(format!(
                "polynomial of degree {} is not quadratic",
                p.degree()
            )));
        }
        Ok(QuadPoly(p))
    }

    pub fn as_poly(&self) -> &IntPoly {
        &self.0
    }

    pub fn into_poly(self) -> IntPoly {
        self.0
    }
}

/// `3 x_a + x_i x_j - 2 x_i x_a - 2 x_j x_a`.
pub fn pair_penalty(i: VarId, j: VarId, a: VarId) -> Result<IntPoly> {
    if i == j || i == a || j == a {
        return Err(Error::Invalid(format!(
            "pair penalty needs three distinct variables, got {i}, {j}, {a}"
        )));
    }
    Ok(IntPoly::from_terms([
        (Monomial::var(a), 3),
        (Monomial::pair(i, j), 1),
        (Monomial::pair(i, a), -2),
        (Monomial::pair(j, a), -2),
    ]))
}

/// Largest absolute coefficient.
pub fn max_coefficient(q: &QuadPoly) -> i64 {
    q.0.max_abs_coefficient()
}

/// Stateful reducer that allocates ancillas from a running counter and reuses
/// one ancilla per pair across every polynomial it reduces.
#[derive(Clone, Debug)]
pub struct Reducer {
    weighting: Weighting,
    next_var: u32,
    map: AncillaMap,
    created: Vec<((VarId, VarId), VarId)>,
}

impl Reducer {
    pub fn new(weighting: Weighting, first_ancilla: usize) -> Self {
        Reducer {
            weighting,
            next_var: VarId::from(first_ancilla).0,
            map: AncillaMap::default(),
            created: Vec::new(),
        }
    }

    /// The id the next fresh ancilla will receive.
    pub fn next_var(&self) -> usize {
        self.next_var as usize
    }

    pub fn ancillas(&self) -> &AncillaMap {
        &self.map
    }

    /// Ancillas allocated so far, in allocation order.
    pub fn created(&self) -> &[((VarId, VarId), VarId)] {
        &self.created
    }

    pub fn into_parts(self) -> (AncillaMap, usize) {
        (self.map, self.next_var as usize)
    }

    /// Reduces `f` to degree two.
    ///
    /// Each step substitutes the pair that occurs in the most monomials of
    /// degree three or more, ties going to the smallest pair.
    pub fn reduce(&mut self, f: &IntPoly) -> Result<QuadPoly> {
        if f.var_bound() > self.next_var as usize {
            return Err(Error::Invalid(format!(
                "ancilla counter {} collides with variables of the polynomial (bound {})",
                self.next_var,
                f.var_bound()
            )));
        }
        let mut f = f.clone();
        while let Some((i, j)) = most_frequent_pair(&f) {
            let ancilla = match self.map.get(i, j) {
                Some(a) => a,
                None => {
                    let a = VarId(self.next_var);
                    self.next_var = self
                        .next_var
                        .checked_add(1)
                        .ok_or_else(|| Error::Resource("ancilla ids exhausted".into()))?;
                    self.map.insert(i, j, a);
                    self.created.push(((i, j), a));
                    a
                }
            };
            let substituted: Vec<(Monomial, i64)> = f
                .terms()
                .filter(|(m, _)| m.degree() >= 3 && m.contains(i) && m.contains(j))
                .map(|(m, c)| (m.clone(), c))
                .collect();
            let weight = penalty_weight(self.weighting, substituted.iter().map(|&(_, c)| c))?;
            for (m, c) in substituted {
                f.remove(&m);
                let reduced = m.without(&[i, j]).mul(&Monomial::var(ancilla));
                f.add_term(reduced, c);
            }
            let penalty = pair_penalty(i, j, ancilla)?;
            for (m, c) in penalty.terms() {
                let scaled = c
                    .checked_mul(weight)
                    .ok_or_else(|| Error::Resource("penalty coefficient overflow".into()))?;
                f.add_term(m.clone(), scaled);
            }
        }
        QuadPoly::new(f)
    }
}

fn penalty_weight(weighting: Weighting, mut coefficients: impl Iterator<Item = i64>) -> Result<i64> {
    let overflow = || Error::Resource("penalty weight overflow".into());
    match weighting {
        Weighting::PerTerm => coefficients.try_fold(0i64, |acc, c| {
            acc.checked_add(c.checked_abs().ok_or_else(overflow)?)
                .and_then(|s| s.checked_add(1))
                .ok_or_else(overflow)
        }),
        Weighting::Delta => {
            let (mut pos, mut neg) = (0i64, 0i64);
            for c in coefficients {
                if c > 0 {
                    pos = pos.checked_add(c).ok_or_else(overflow)?;
                } else {
                    neg = neg.checked_sub(c).ok_or_else(overflow)?;
                }
            }
            pos.max(neg).checked_add(1).ok_or_else(overflow)
        }
    }
}

fn most_frequent_pair(f: &IntPoly) -> Option<(VarId, VarId)> {
    let mut counts: BTreeMap<(VarId, VarId), usize> = BTreeMap::new();
    for (m, _) in f.terms().filter(|(m, _)| m.degree() >= 3) {
        let vars = m.vars();
        for (k, &a) in vars.iter().enumerate() {
            for &b in &vars[k + 1..] {
                *counts.entry((a, b)).or_default() += 1;
            }
        }
    }
    let mut best: Option<((VarId, VarId), usize)> = None;
    for (pair, count) in counts {
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((pair, count));
        }
    }
    best.map(|(pair, _)| pair)
}

/// Reduces `f` to degree two with fresh ancillas numbered from `f.var_bound()`.
///
/// When `f` lives in a larger variable space than it mentions, use
/// [`Reducer::new`] with the full variable count instead.
pub fn reduce_to_quadratic(f: &IntPoly, weighting: Weighting) -> Result<(QuadPoly, AncillaMap)> {
    let mut reducer = Reducer::new(weighting, f.var_bound());
    let q = reducer.reduce(f)?;
    Ok((q, reducer.into_parts().0))
}
