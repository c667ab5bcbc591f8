//! Annealer-ready Hamiltonians for MQ systems.
//!
//! Three constructions are provided:
//!
//! * [`embed_direct`]: sum of the numerical normal forms of all equations,
//!   reduced to two-body form in one pass.
//! * [`embed_truncated`]: quadratic monomials become pair ancillas, long
//!   equations are cut into chained pieces of at most `k` terms, and each
//!   piece is converted and reduced on its own.
//! * [`embed_penalty`]: each equation is evaluated by a chain of NOT, CNOT
//!   and Toffoli gates on an output wire, each enforced by a penalty term.
//!
//! Every embedding has ground energy 0 exactly when the system is
//! satisfiable, and its zero-energy states restrict to the solutions.

mod builders;
pub mod estimate;
pub mod gates;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mq::{Assignment, VarId};
use crate::nnf::IntPoly;
use crate::quadratize::Reducer;
use crate::qubo::{Qubo, Registry};

pub use builders::{chunk_layout, embed_direct, embed_penalty, embed_truncated, embed_truncated_with};
pub use estimate::{
    estimate_average_scaling, estimate_direct_qubits, estimate_truncated_qubits, scaling_report,
    ceiling_slack_bound, truncated_qubits_k4, AverageScaling, ScalingReport, ScalingRow, TruncatedEstimate,
};

/// Which embedding to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Truncated,
    Penalty,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "truncated" => Ok(Method::Truncated),
            "penalty" => Ok(Method::Penalty),
            other => Err(Error::Invalid(format!("unknown embedding method {other:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Truncated => "truncated",
            Method::Penalty => "penalty",
        })
    }
}

/// What a QUBO variable stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VarRole {
    Original,
    /// Product of two original variables (truncated embedding).
    PairAncilla { left: VarId, right: VarId },
    /// Running XOR carried between the pieces of a split equation.
    ChainAncilla { equation: usize, position: usize },
    /// Product ancilla introduced by degree reduction.
    ReductionAncilla { left: VarId, right: VarId },
    /// Internal ancilla of a CNOT (slot 0) or Toffoli (slots 0, 1) penalty.
    GateAncilla { equation: usize, gate: usize, slot: usize },
    /// Output wire of an equation after `step` gates.
    OutputAncilla { equation: usize, step: usize },
}

impl VarRole {
    pub fn is_original(&self) -> bool {
        matches!(self, VarRole::Original)
    }
}

impl fmt::Display for VarRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRole::Original => f.write_str("original"),
            VarRole::PairAncilla { left, right } => write!(f, "pair {} {}", left.0, right.0),
            VarRole::ChainAncilla { equation, position } => write!(f, "chain {equation} {position}"),
            VarRole::ReductionAncilla { left, right } => write!(f, "reduction {} {}", left.0, right.0),
            VarRole::GateAncilla { equation, gate, slot } => write!(f, "gate {equation} {gate} {slot}"),
            VarRole::OutputAncilla { equation, step } => write!(f, "output {equation} {step}"),
        }
    }
}

impl FromStr for VarRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let num = |w: &str| -> Result<usize> {
            w.parse()
                .map_err(|_| Error::Invalid(format!("invalid number {w:?} in role {s:?}")))
        };
        let var = |w: &str| -> Result<VarId> { num(w).map(VarId::from) };
        match words.as_slice() {
            ["original"] => Ok(VarRole::Original),
            ["pair", a, b] => Ok(VarRole::PairAncilla { left: var(a)?, right: var(b)? }),
            ["chain", e, p] => Ok(VarRole::ChainAncilla { equation: num(e)?, position: num(p)? }),
            ["reduction", a, b] => Ok(VarRole::ReductionAncilla { left: var(a)?, right: var(b)? }),
            ["gate", e, g, k] => Ok(VarRole::GateAncilla { equation: num(e)?, gate: num(g)?, slot: num(k)? }),
            ["output", e, t] => Ok(VarRole::OutputAncilla { equation: num(e)?, step: num(t)? }),
            _ => Err(Error::Invalid(format!("unknown variable role {s:?}"))),
        }
    }
}

/// How an ancilla's consistent value follows from lower-numbered variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Definition {
    Input,
    Const(bool),
    And(VarId, VarId),
    Xor { vars: Vec<VarId>, negate: bool },
}

/// A QUBO together with the roles of its variables.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub qubo: Qubo,
    pub registry: Registry,
    /// Original variables are `0..n_original`.
    pub n_original: usize,
    /// Target energy of a solution.
    pub ground_energy: i64,
    definitions: Option<Vec<Definition>>,
}

impl Embedding {
    /// Rebuilds an embedding from a QUBO and registry (for example read from
    /// a file). Without a registry every variable counts as original unless
    /// `n_original` is given.
    pub fn from_parts(qubo: Qubo, registry: Registry, n_original: Option<usize>) -> Result<Self> {
        let leading = (0..qubo.n_vars())
            .take_while(|&i| registry.get(&VarId::from(i)).is_some_and(VarRole::is_original))
            .count();
        let n_original = match (n_original, registry.is_empty()) {
            (Some(n), _) => n,
            (None, true) => qubo.n_vars(),
            (None, false) => leading,
        };
        if n_original > qubo.n_vars() {
            return Err(Error::Dimension {
                expected: n_original,
                got: qubo.n_vars(),
            });
        }
        if !registry.is_empty() && leading < n_original {
            return Err(Error::Invalid(format!(
                "registry marks only {leading} leading original variables, expected {n_original}"
            )));
        }
        Ok(Embedding {
            qubo,
            registry,
            n_original,
            ground_energy: 0,
            definitions: None,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.qubo.n_vars()
    }

    pub fn num_ancillas(&self) -> usize {
        self.qubo.n_vars() - self.n_original
    }

    pub fn role(&self, v: VarId) -> Option<&VarRole> {
        self.registry.get(&v)
    }

    pub fn count_roles(&self, pred: impl Fn(&VarRole) -> bool) -> usize {
        self.registry.values().filter(|r| pred(r)).count()
    }

    /// Construction rules for ancillas, when the embedding was built in-process.
    pub fn definitions(&self) -> Option<&[Definition]> {
        self.definitions.as_deref()
    }

    /// Restriction to the original variables.
    pub fn project(&self, a: &Assignment) -> Assignment {
        a.truncated(self.n_original)
    }

    /// Extends an assignment of the original variables by setting every
    /// ancilla to its consistent value.
    pub fn extend(&self, original: &Assignment) -> Result<Assignment> {
        let defs = self
            .definitions
            .as_ref()
            .ok_or_else(|| Error::Invalid("embedding has no ancilla definitions".into()))?;
        if original.len() != self.n_original {
            return Err(Error::Dimension {
                expected: self.n_original,
                got: original.len(),
            });
        }
        let mut full = Assignment::zeros(self.num_vars());
        for (i, def) in defs.iter().enumerate() {
            let v = VarId::from(i);
            let value = match def {
                Definition::Input => original.get(v),
                Definition::Const(b) => *b,
                Definition::And(a, b) => full.get(*a) && full.get(*b),
                Definition::Xor { vars, negate } => {
                    vars.iter().fold(*negate, |acc, &u| acc ^ full.get(u))
                }
            };
            full.set(v, value);
        }
        Ok(full)
    }
}

/// Accumulates variables, roles and energy terms for one embedding.
struct Builder {
    roles: Vec<VarRole>,
    definitions: Vec<Definition>,
    energy: IntPoly,
    n_original: usize,
}

impl Builder {
    fn new(n_original: usize) -> Self {
        Builder {
            roles: vec![VarRole::Original; n_original],
            definitions: vec![Definition::Input; n_original],
            energy: IntPoly::zero(),
            n_original,
        }
    }

    fn next_id(&self) -> usize {
        self.roles.len()
    }

    fn fresh(&mut self, role: VarRole, definition: Definition) -> VarId {
        let id = VarId::from(self.roles.len());
        self.roles.push(role);
        self.definitions.push(definition);
        id
    }

    fn add(&mut self, p: &IntPoly) {
        self.energy += p;
    }

    /// Reduces `p` with `reducer` and registers the ancillas it allocates.
    ///
    /// The reducer's counter must equal the next free id of the builder.
    fn reduce_and_add(&mut self, p: &IntPoly, reducer: &mut Reducer) -> Result<()> {
        debug_assert_eq!(reducer.next_var(), self.next_id());
        let before = reducer.created().len();
        let q = reducer.reduce(p)?;
        for &((left, right), id) in &reducer.created()[before..] {
            let fresh = self.fresh(VarRole::ReductionAncilla { left, right }, Definition::And(left, right));
            debug_assert_eq!(fresh, id);
        }
        self.add(q.as_poly());
        Ok(())
    }

    fn finish(self) -> Result<Embedding> {
        let n_vars = self.roles.len();
        let qubo = Qubo::from_poly(&self.energy, n_vars)?;
        let registry = self
            .roles
            .into_iter()
            .enumerate()
            .map(|(i, r)| (VarId::from(i), r))
            .collect();
        Ok(Embedding {
            qubo,
            registry,
            n_original: self.n_original,
            ground_energy: 0,
            definitions: Some(self.definitions),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn role_text_round_trip() {
        let roles = [
            VarRole::Original,
            VarRole::PairAncilla { left: VarId(0), right: VarId(3) },
            VarRole::ChainAncilla { equation: 2, position: 1 },
            VarRole::ReductionAncilla { left: VarId(4), right: VarId(9) },
            VarRole::GateAncilla { equation: 0, gate: 5, slot: 1 },
            VarRole::OutputAncilla { equation: 3, step: 0 },
        ];
        for r in roles {
            assert_eq!(r.to_string().parse::<VarRole>().unwrap(), r);
        }
        assert!("pair 1".parse::<VarRole>().is_err());
        assert!("gate a b c".parse::<VarRole>().is_err());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("penalty".parse::<Method>().unwrap(), Method::Penalty);
        assert!("quantum".parse::<Method>().is_err());
    }

    #[test]
    fn from_parts_counts_leading_originals() {
        let q = Qubo::new(3);
        let registry: Registry = [
            (VarId(0), VarRole::Original),
            (VarId(1), VarRole::Original),
            (VarId(2), VarRole::OutputAncilla { equation: 0, step: 0 }),
        ]
        .into_iter()
        .collect();
        let e = Embedding::from_parts(q.clone(), registry.clone(), None).unwrap();
        assert_eq!(e.n_original, 2);
        assert!(e.extend(&Assignment::zeros(2)).is_err());
        assert!(Embedding::from_parts(q.clone(), registry, Some(3)).is_err());
        assert_eq!(Embedding::from_parts(q, Registry::new(), None).unwrap().n_original, 3);
    }
}
