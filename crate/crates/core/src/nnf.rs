//! Numerical normal form: the unique integer multilinear polynomial that
//! agrees with a Boolean function on every 0/1 input.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::mq::{AnfPoly, Assignment, Monomial, VarId};

/// Default cap on intermediate term counts during ANF to NNF conversion.
pub const DEFAULT_TERM_CAP: usize = 1 << 22;

/// Integer-coefficient multilinear polynomial over 0/1 variables.
///
/// Zero coefficients are never stored, so equal functions have equal values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntPoly {
    terms: BTreeMap<Monomial, i64>,
}

impl IntPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, i64)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c * m`, dropping the entry if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }

    /// `self += k * other`.
    pub fn add_scaled(&mut self, other: &IntPoly, k: i64) {
        for (m, &c) in &other.terms {
            self.add_term(m.clone(), c * k);
        }
    }

    /// `self * m`, with `x * x = x` folding colliding terms.
    pub fn mul_monomial(&self, m: &Monomial) -> IntPoly {
        IntPoly::from_terms(self.terms.iter().map(|(u, &c)| (u.mul(m), c)))
    }

    pub fn coefficient(&self, m: &Monomial) -> i64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn remove(&mut self, m: &Monomial) -> i64 {
        self.terms.remove(m).unwrap_or(0)
    }

    /// Terms in canonical (degree, lexicographic) order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, i64)> + ExactSizeIterator {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// One past the largest variable index used, or 0.
    pub fn var_bound(&self) -> usize {
        self.terms
            .keys()
            .filter_map(Monomial::max_var)
            .map(|v| v.index() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Largest absolute coefficient, 0 for the zero polynomial.
    pub fn max_abs_coefficient(&self) -> i64 {
        self.terms.values().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, a: &Assignment) -> Result<i64> {
        let need = self.var_bound();
        if a.len() < need {
            return Err(Error::Dimension {
                expected: need,
                got: a.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .filter(|(m, _)| m.eval_bits(a.bits()))
            .map(|(_, &c)| c)
            .sum())
    }

    /// Renames variables through `rename`; colliding terms are merged.
    pub fn map_vars(&self, mut rename: impl FnMut(VarId) -> VarId) -> IntPoly {
        IntPoly::from_terms(
            self.terms
                .iter()
                .map(|(m, &c)| (Monomial::from_vars(m.vars().iter().map(|&v| rename(v))), c)),
        )
    }
}

impl std::ops::Add for &IntPoly {
    type Output = IntPoly;

    fn add(self, rhs: &IntPoly) -> IntPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, 1);
        out
    }
}

impl std::ops::AddAssign<&IntPoly> for IntPoly {
    fn add_assign(&mut self, rhs: &IntPoly) {
        self.add_scaled(rhs, 1);
    }
}

impl fmt::Display for IntPoly {
    /// Highest degree first, e.g. `-2*x1*x2 + x1 + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut ordered: Vec<(&Monomial, i64)> = self.terms().collect();
        ordered.sort_by(|a, b| {
            b.0.degree()
                .cmp(&a.0.degree())
                .then_with(|| a.0.vars().cmp(b.0.vars()))
        });
        for (k, (m, c)) in ordered.into_iter().enumerate() {
            let magnitude = c.unsigned_abs();
            match (k, c < 0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{magnitude}")?;
            } else if magnitude == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{magnitude}*{m}")?;
            }
        }
        Ok(())
    }
}

/// Converts an ANF polynomial to its NNF with the default term cap.
pub fn anf_to_nnf(p: &AnfPoly) -> Result<IntPoly> {
    anf_to_nnf_capped(p, DEFAULT_TERM_CAP)
}

/// Folds the monomials in canonical order with `f XOR m = f + m - 2 f m`.
///
/// Fails with [`Error::Resource`] as soon as an intermediate polynomial
/// exceeds `cap` terms.
pub fn anf_to_nnf_capped(p: &AnfPoly, cap: usize) -> Result<IntPoly> {
    let mut f = IntPoly::zero();
    for m in p.monomials() {
        let product = f.mul_monomial(m);
        f.add_scaled(&product, -2);
        f.add_term(m.clone(), 1);
        if f.len() > cap {
            return Err(Error::Resource(format!(
                "numerical normal form exceeds {cap} terms"
            )));
        }
    }
    Ok(f)
}

/// Integer value of `f` at `a`.
pub fn eval_int(f: &IntPoly, a: &Assignment) -> Result<i64> {
    f.eval(a)
}

/// `2^t - 1` for a polynomial of `t` monomials: the number of non-empty
/// monomial subsets, which bounds the NNF term count. Saturates at `u64::MAX`.
pub fn nnf_term_bound(p: &AnfPoly) -> u64 {
    let t = p.num_terms() as u32;
    if t >= 64 {
        u64::MAX
    } else {
        (1u64 << t) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mq::worked_example;

    fn v(i: u32) -> VarId {
        VarId(i)
    }

    #[test]
    fn worked_example_nnf() {
        let s = worked_example();
        let p = &s.polys()[3];
        let f = anf_to_nnf(p).unwrap();
        assert_eq!(f.to_string(), "-2*x1*x2*x3*x4 + 2*x1*x3*x4 - x1*x3 + x2*x4 - x4 + 1");
        assert_eq!(f.eval(&Assignment::from([1, 0, 1, 0])).unwrap(), 0);
        assert_eq!(f.eval(&Assignment::from([1, 1, 1, 1])).unwrap(), 0);
    }

    #[test]
    fn single_product_is_unchanged() {
        let p = AnfPoly::from_monomials([Monomial::pair(v(0), v(1))]);
        let f = anf_to_nnf(&p).unwrap();
        assert_eq!(f, IntPoly::from_terms([(Monomial::pair(v(0), v(1)), 1)]));
    }

    #[test]
    fn xor_of_two_variables() {
        let p = AnfPoly::from_monomials([Monomial::var(v(0)), Monomial::var(v(1))]);
        assert_eq!(anf_to_nnf(&p).unwrap().to_string(), "-2*x1*x2 + x1 + x2");
    }

    #[test]
    fn constant_one() {
        let f = anf_to_nnf(&AnfPoly::from_monomials([Monomial::one()])).unwrap();
        assert_eq!(f, IntPoly::constant(1));
        assert_eq!(f.eval(&Assignment::from([1, 1])).unwrap(), 1);
    }

    #[test]
    fn term_bound_values() {
        let s = worked_example();
        let p = &s.polys()[3];
        assert_eq!(nnf_term_bound(p), 15);
        assert_eq!(nnf_term_bound(&AnfPoly::from_monomials([Monomial::var(v(0))])), 1);
        assert_eq!(nnf_term_bound(&AnfPoly::zero()), 0);
    }

    #[test]
    fn cap_is_enforced() {
        let p = AnfPoly::from_monomials((0..12).map(|i| Monomial::var(v(i))));
        assert!(matches!(anf_to_nnf_capped(&p, 100), Err(Error::Resource(_))));
        assert_eq!(anf_to_nnf(&p).unwrap().len(), 4095);
    }

    #[test]
    fn eval_dimension_error() {
        let f = IntPoly::from_terms([(Monomial::var(v(3)), 2)]);
        assert!(matches!(
            f.eval(&Assignment::from([1, 0])),
            Err(Error::Dimension { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn cancellation_drops_terms() {
        let mut f = IntPoly::from_terms([(Monomial::var(v(0)), 3)]);
        f.add_term(Monomial::var(v(0)), -3);
        assert!(f.is_empty());
        assert_eq!(f.to_string(), "0");
    }
}
