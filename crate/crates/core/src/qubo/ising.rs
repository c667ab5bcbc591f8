use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::Qubo;
use crate::error::{Error, Result};
use crate::mq::VarId;
use crate::Rational;

/// Spin form `offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j` with `x = (1 - s) / 2`,
/// so `x = 0` is spin `+1` and `x = 1` is spin `-1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ising {
    pub n_vars: usize,
    pub h: BTreeMap<VarId, Rational>,
    pub j: BTreeMap<(VarId, VarId), Rational>,
    pub offset: Rational,
}

impl Ising {
    /// Energy at spins given as `+1` / `-1`.
    pub fn energy(&self, spins: &[i8]) -> Result<Rational> {
        if spins.len() != self.n_vars {
            return Err(Error::Dimension {
                expected: self.n_vars,
                got: spins.len(),
            });
        }
        let s = |v: VarId| Rational::from_integer(spins[v.index()] as i64);
        let mut e = self.offset;
        for (&v, &h) in &self.h {
            e += h * s(v);
        }
        for (&(a, b), &j) in &self.j {
            e += j * s(a) * s(b);
        }
        Ok(e)
    }

    /// Back-substitutes `s = 1 - 2x`; fails if a coefficient is not integral.
    pub fn to_qubo(&self) -> Result<Qubo> {
        let two = Rational::from_integer(2);
        let four = Rational::from_integer(4);
        let mut offset = self.offset;
        let mut linear: BTreeMap<VarId, Rational> = BTreeMap::new();
        for (&v, &h) in &self.h {
            offset += h;
            *linear.entry(v).or_insert_with(Rational::zero) -= two * h;
        }
        let mut q = Qubo::new(self.n_vars);
        for (&(a, b), &j) in &self.j {
            offset += j;
            *linear.entry(a).or_insert_with(Rational::zero) -= two * j;
            *linear.entry(b).or_insert_with(Rational::zero) -= two * j;
            q.add_quadratic(a, b, integral(four * j)?);
        }
        for (v, c) in linear {
            q.add_linear(v, integral(c)?);
        }
        q.set_offset(integral(offset)?);
        Ok(q)
    }
}

fn integral(r: Rational) -> Result<i64> {
    if r.denom().is_one() {
        Ok(*r.numer())
    } else {
        Err(Error::Invalid(format!("coefficient {r} is not an integer")))
    }
}

/// Exact change of variables `x = (1 - s) / 2`.
pub fn to_ising(q: &Qubo) -> Ising {
    let half = Rational::new(1, 2);
    let quarter = Rational::new(1, 4);
    let mut ising = Ising {
        n_vars: q.n_vars(),
        offset: Rational::from_integer(q.offset()),
        ..Default::default()
    };
    for (&v, &c) in q.linear() {
        let c = Rational::from_integer(c);
        ising.offset += c * half;
        *ising.h.entry(v).or_insert_with(Rational::zero) -= c * half;
    }
    for (&(a, b), &c) in q.quadratic() {
        let c = Rational::from_integer(c);
        ising.offset += c * quarter;
        *ising.h.entry(a).or_insert_with(Rational::zero) -= c * quarter;
        *ising.h.entry(b).or_insert_with(Rational::zero) -= c * quarter;
        ising.j.insert((a, b), c * quarter);
    }
    ising.h.retain(|_, h| !h.is_zero());
    ising
}
