//! Canonical QUBO container: integer offset, linear and pairwise terms.

mod ising;
mod io;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mq::{Assignment, Monomial, VarId};
use crate::nnf::IntPoly;

pub use ising::{to_ising, Ising};
pub use io::{from_json, read_qubo, to_json, write_qubo, Registry};

/// `energy(x) = offset + sum_i h_i x_i + sum_{i<j} J_ij x_i x_j` over 0/1 variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Qubo {
    n_vars: usize,
    offset: i64,
    linear: BTreeMap<VarId, i64>,
    quadratic: BTreeMap<(VarId, VarId), i64>,
}

impl Qubo {
    pub fn new(n_vars: usize) -> Self {
        Qubo {
            n_vars,
            ..Default::default()
        }
    }

    /// Builds a QUBO on `n_vars` variables from a polynomial of degree at most two.
    pub fn from_poly(p: &IntPoly, n_vars: usize) -> Result<Self> {
        if p.var_bound() > n_vars {
            return Err(Error::VarOutOfRange {
                index: p.var_bound() - 1,
                declared: n_vars,
            });
        }
        let mut q = Qubo::new(n_vars);
        for (m, c) in p.terms() {
            match m.vars() {
                [] => q.offset += c,
                [a] => q.add_linear(*a, c),
                [a, b] => q.add_quadratic(*a, *b, c),
                _ => {
                    return Err(Error::Invalid(format!(
                        "monomial {m} has degree {} > 2",
                        m.degree()
                    )))
                }
            }
        }
        Ok(q)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: i64) {
        self.offset = offset;
    }

    pub fn linear(&self) -> &BTreeMap<VarId, i64> {
        &self.linear
    }

    /// Pairwise terms keyed by `(i, j)` with `i < j`.
    pub fn quadratic(&self) -> &BTreeMap<(VarId, VarId), i64> {
        &self.quadratic
    }

    pub fn add_linear(&mut self, v: VarId, c: i64) {
        assert!(v.index() < self.n_vars, "{v:?} outside a {}-variable QUBO", self.n_vars);
        add_entry(&mut self.linear, v, c);
    }

    /// Adds `c x_a x_b`; `a == b` folds into the linear term since `x^2 = x`.
    pub fn add_quadratic(&mut self, a: VarId, b: VarId, c: i64) {
        if a == b {
            self.add_linear(a, c);
            return;
        }
        assert!(
            a.index() < self.n_vars && b.index() < self.n_vars,
            "({a:?}, {b:?}) outside a {}-variable QUBO",
            self.n_vars
        );
        let key = if a < b { (a, b) } else { (b, a) };
        add_entry(&mut self.quadratic, key, c);
    }

    pub fn energy(&self, a: &Assignment) -> Result<i64> {
        if a.len() != self.n_vars {
            return Err(Error::Dimension {
                expected: self.n_vars,
                got: a.len(),
            });
        }
        let bits = a.bits();
        let linear: i64 = self
            .linear
            .iter()
            .filter(|(v, _)| bits[v.index()])
            .map(|(_, &c)| c)
            .sum();
        let quadratic: i64 = self
            .quadratic
            .iter()
            .filter(|((i, j), _)| bits[i.index()] && bits[j.index()])
            .map(|(_, &c)| c)
            .sum();
        Ok(self.offset + linear + quadratic)
    }

    pub fn to_poly(&self) -> IntPoly {
        let mut p = IntPoly::constant(self.offset);
        for (&v, &c) in &self.linear {
            p.add_term(Monomial::var(v), c);
        }
        for (&(a, b), &c) in &self.quadratic {
            p.add_term(Monomial::pair(a, b), c);
        }
        p
    }

    /// Largest absolute linear or pairwise coefficient (the offset is excluded).
    pub fn max_coefficient(&self) -> i64 {
        self.linear
            .values()
            .chain(self.quadratic.values())
            .map(|c| c.abs())
            .max()
            .unwrap_or(0)
    }

    /// Substitutes the fixed values and drops those variables.
    ///
    /// The remaining variables are renumbered densely in increasing order of
    /// their original ids; see [`ReducedQubo::kept`].
    pub fn fix_variables(&self, fixed: &PartialAssignment) -> Result<ReducedQubo> {
        for (&v, _) in fixed.iter() {
            if v.index() >= self.n_vars {
                return Err(Error::VarOutOfRange {
                    index: v.index(),
                    declared: self.n_vars,
                });
            }
        }
        let kept: Vec<VarId> = (0..self.n_vars)
            .map(VarId::from)
            .filter(|v| fixed.get(*v).is_none())
            .collect();
        let mut new_id = vec![None; self.n_vars];
        for (k, v) in kept.iter().enumerate() {
            new_id[v.index()] = Some(VarId::from(k));
        }
        let mut q = Qubo::new(kept.len());
        q.offset = self.offset;
        for (&v, &c) in &self.linear {
            match fixed.get(v) {
                Some(true) => q.offset += c,
                Some(false) => {}
                None => q.add_linear(new_id[v.index()].unwrap(), c),
            }
        }
        for (&(a, b), &c) in &self.quadratic {
            match (fixed.get(a), fixed.get(b)) {
                (Some(false), _) | (_, Some(false)) => {}
                (Some(true), Some(true)) => q.offset += c,
                (Some(true), None) => q.add_linear(new_id[b.index()].unwrap(), c),
                (None, Some(true)) => q.add_linear(new_id[a.index()].unwrap(), c),
                (None, None) => q.add_quadratic(new_id[a.index()].unwrap(), new_id[b.index()].unwrap(), c),
            }
        }
        Ok(ReducedQubo {
            qubo: q,
            kept,
            fixed: fixed.clone(),
            original_vars: self.n_vars,
        })
    }
}

fn add_entry<K: Ord>(map: &mut BTreeMap<K, i64>, key: K, c: i64) {
    if c == 0 {
        return;
    }
    match map.entry(key) {
        Entry::Vacant(slot) => {
            slot.insert(c);
        }
        Entry::Occupied(mut slot) => {
            *slot.get_mut() += c;
            if *slot.get() == 0 {
                slot.remove();
            }
        }
    }
}

impl std::ops::Add for &Qubo {
    type Output = Qubo;

    fn add(self, rhs: &Qubo) -> Qubo {
        let mut out = Qubo::new(self.n_vars.max(rhs.n_vars));
        out.offset = self.offset + rhs.offset;
        for q in [self, rhs] {
            for (&v, &c) in &q.linear {
                out.add_linear(v, c);
            }
            for (&(a, b), &c) in &q.quadratic {
                out.add_quadratic(a, b, c);
            }
        }
        out
    }
}

/// Values for a subset of the variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialAssignment(BTreeMap<VarId, bool>);

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: VarId, value: bool) -> Option<bool> {
        self.0.insert(v, value)
    }

    pub fn remove(&mut self, v: VarId) -> Option<bool> {
        self.0.remove(&v)
    }

    pub fn get(&self, v: VarId) -> Option<bool> {
        self.0.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &bool)> {
        self.0.iter()
    }

    /// True when `a` agrees with every fixed value.
    pub fn is_consistent_with(&self, a: &Assignment) -> bool {
        self.0.iter().all(|(&v, &b)| v.index() < a.len() && a.get(v) == b)
    }
}

impl FromIterator<(VarId, bool)> for PartialAssignment {
    fn from_iter<T: IntoIterator<Item = (VarId, bool)>>(iter: T) -> Self {
        PartialAssignment(iter.into_iter().collect())
    }
}

/// Result of [`Qubo::fix_variables`]: the QUBO over the free variables plus
/// the bookkeeping needed to map assignments back.
#[derive(Clone, Debug)]
pub struct ReducedQubo {
    pub qubo: Qubo,
    kept: Vec<VarId>,
    fixed: PartialAssignment,
    original_vars: usize,
}

impl ReducedQubo {
    /// Original id of each reduced variable.
    pub fn kept(&self) -> &[VarId] {
        &self.kept
    }

    pub fn fixed(&self) -> &PartialAssignment {
        &self.fixed
    }

    /// Full assignment from a reduced one plus the fixed values.
    pub fn complete(&self, reduced: &Assignment) -> Result<Assignment> {
        if reduced.len() != self.kept.len() {
            return Err(Error::Dimension {
                expected: self.kept.len(),
                got: reduced.len(),
            });
        }
        let mut full = Assignment::zeros(self.original_vars);
        for (&v, &b) in self.fixed.iter() {
            full.set(v, b);
        }
        for (k, &v) in self.kept.iter().enumerate() {
            full.set(v, reduced.get(VarId::from(k)));
        }
        Ok(full)
    }

    /// The free-variable part of a full assignment.
    pub fn restrict(&self, full: &Assignment) -> Result<Assignment> {
        if full.len() != self.original_vars {
            return Err(Error::Dimension {
                expected: self.original_vars,
                got: full.len(),
            });
        }
        Ok(Assignment::new(self.kept.iter().map(|&v| full.get(v)).collect()))
    }
}

/// Exact energy of `a` under `q`.
pub fn energy(q: &Qubo, a: &Assignment) -> Result<i64> {
    q.energy(a)
}

/// See [`Qubo::fix_variables`].
pub fn fix_variables(q: &Qubo, fixed: &PartialAssignment) -> Result<ReducedQubo> {
    q.fix_variables(fixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadratize::pair_penalty;

    fn v(i: u32) -> VarId {
        VarId(i)
    }

    #[test]
    fn pair_penalty_energy() {
        let q = Qubo::from_poly(&pair_penalty(v(0), v(1), v(2)).unwrap(), 3).unwrap();
        assert_eq!(q.energy(&Assignment::from([1, 1, 0])).unwrap(), 1);
        assert_eq!(q.energy(&Assignment::from([1, 1, 1])).unwrap(), 0);
    }

    #[test]
    fn empty_qubo_energy_is_offset() {
        let mut q = Qubo::new(2);
        q.set_offset(7);
        assert_eq!(q.energy(&Assignment::from([1, 0])).unwrap(), 7);
        assert!(q.energy(&Assignment::from([1])).is_err());
    }

    #[test]
    fn fix_substitution_arithmetic() {
        let mut q = Qubo::new(2);
        q.add_linear(v(0), 3);
        q.add_quadratic(v(0), v(1), 2);
        let fixed: PartialAssignment = [(v(0), true)].into_iter().collect();
        let r = q.fix_variables(&fixed).unwrap();
        assert_eq!(r.qubo.offset(), 3);
        assert_eq!(r.qubo.linear().get(&v(0)), Some(&2));
        assert_eq!(r.kept(), &[v(1)]);
        assert!(r.qubo.quadratic().is_empty());
    }

    #[test]
    fn fix_everything_gives_constant() {
        let q = Qubo::from_poly(&pair_penalty(v(0), v(1), v(2)).unwrap(), 3).unwrap();
        let a = Assignment::from([1, 0, 1]);
        let fixed: PartialAssignment = (0..3).map(|i| (v(i), a.get(v(i)))).collect();
        let r = q.fix_variables(&fixed).unwrap();
        assert_eq!(r.qubo.n_vars(), 0);
        assert_eq!(r.qubo.offset(), q.energy(&a).unwrap());
        assert_eq!(r.complete(&Assignment::zeros(0)).unwrap(), a);
    }

    #[test]
    fn fix_rejects_unknown_variable() {
        let q = Qubo::new(2);
        let fixed: PartialAssignment = [(v(5), true)].into_iter().collect();
        assert!(q.fix_variables(&fixed).is_err());
    }

    #[test]
    fn cancellation_removes_entries() {
        let mut q = Qubo::new(3);
        q.add_quadratic(v(2), v(0), 4);
        q.add_quadratic(v(0), v(2), -4);
        q.add_linear(v(1), 1);
        q.add_quadratic(v(1), v(1), -1);
        assert!(q.quadratic().is_empty());
        assert!(q.linear().is_empty());
    }
}
