//! Iterative search-space reduction.
//!
//! Each round samples the current reduced QUBO, and any variable that takes
//! the same value in all of the `L` lowest-energy samples is fixed. A
//! zero-energy sample ends the search. Fixing a wrong variable silently
//! removes the ground state from the reduced space, so every round also runs
//! an exclusion check: when the reduced space keeps doing worse than the best
//! energy seen so far, the most recent batch of fixes is undone.
//!
//! The exclusion test compares observed energies, not exact minima, and uses
//! a patience counter so a single unlucky round does not trigger it. This is
//! a heuristic reading of "the ground state has been excluded"; with exact
//! offset bookkeeping the reduced and original energies of a completed
//! sample always coincide, so only observed bests can be compared.

use serde::{Deserialize, Serialize};

use crate::anneal::{sample_with, AnnealParams, SampleSet};
use crate::embed::Embedding;
use crate::error::{Error, Result};
use crate::mq::{Assignment, MqSystem, VarId};
use crate::par::Parallelism;
use crate::qubo::{PartialAssignment, Qubo};

/// Settings of the iterative solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterParams {
    /// Number `L` of lowest-energy distinct samples that must agree.
    pub consensus: usize,
    pub max_iterations: usize,
    pub anneal: AnnealParams,
    /// Rounds that fix fewer variables than this count as stalled.
    pub min_fix_per_round: usize,
    /// Consecutive failed exclusion checks before backtracking.
    pub patience: usize,
}

impl Default for IterParams {
    fn default() -> Self {
        IterParams {
            consensus: 10,
            max_iterations: 10,
            anneal: AnnealParams::default(),
            min_fix_per_round: 1,
            patience: 2,
        }
    }
}

impl IterParams {
    pub fn validate(&self) -> Result<()> {
        if self.consensus < 2 {
            return Err(Error::Invalid("consensus count must be at least 2".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Invalid("max_iterations must be at least 1".into()));
        }
        if self.min_fix_per_round == 0 {
            return Err(Error::Invalid("min_fix_per_round must be at least 1".into()));
        }
        if self.patience == 0 {
            return Err(Error::Invalid("patience must be at least 1".into()));
        }
        self.anneal.validate()
    }
}

/// Variables, other than those already fixed, that take one value in all of
/// the `l` lowest records of `ss` (ties at the `l`-th energy included).
pub fn consensus_fix(ss: &SampleSet, l: usize, already_fixed: &PartialAssignment) -> PartialAssignment {
    let window = ss.lowest(l);
    let Some(first) = window.first() else {
        return PartialAssignment::new();
    };
    (0..first.assignment.len())
        .map(VarId::from)
        .filter(|&v| already_fixed.get(v).is_none())
        .filter_map(|v| {
            let value = first.assignment.get(v);
            window.iter().all(|r| r.assignment.get(v) == value).then_some((v, value))
        })
        .collect()
}

/// Whether the best energy found in the reduced space, measured in the
/// original QUBO, is above `reference_best`. Always false without fixes.
pub fn exclusion_check(
    original: &Qubo,
    fixed: &PartialAssignment,
    reduced_best: &Assignment,
    reference_best: i64,
) -> Result<bool> {
    if !fixed.is_consistent_with(reduced_best) {
        return Err(Error::Invalid("best sample does not agree with the fixed values".into()));
    }
    if fixed.is_empty() {
        return Ok(false);
    }
    Ok(original.energy(reduced_best)? > reference_best)
}

/// Counts consecutive positive exclusion checks.
#[derive(Clone, Debug)]
pub struct ExclusionMonitor {
    patience: usize,
    strikes: usize,
}

impl ExclusionMonitor {
    pub fn new(patience: usize) -> Self {
        ExclusionMonitor { patience, strikes: 0 }
    }

    /// Records one check; true once `patience` checks in a row have fired.
    pub fn observe(&mut self, fired: bool) -> bool {
        self.strikes = if fired { self.strikes + 1 } else { 0 };
        self.strikes >= self.patience
    }

    pub fn reset(&mut self) {
        self.strikes = 0;
    }

    pub fn strikes(&self) -> usize {
        self.strikes
    }
}

/// How the search ended.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    /// A zero-energy state whose projection satisfies every equation.
    Solved { solution: String },
    /// The last rounds kept failing the exclusion check.
    Excluded,
    /// No further variables could be fixed, or the iteration budget ran out.
    Exhausted,
}

/// What happened at the end of a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Solved,
    Fixed,
    Stalled,
    Backtracked,
    Exhausted,
}

/// Energy distribution of one round's draws.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergySummary {
    pub min: i64,
    pub q25: i64,
    pub median: i64,
    pub q75: i64,
    pub max: i64,
    pub distinct: usize,
}

impl EnergySummary {
    fn of(ss: &SampleSet) -> Self {
        let q = |p| ss.quantile(p).unwrap_or(0);
        EnergySummary {
            min: q(0.0),
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            max: q(1.0),
            distinct: ss.len(),
        }
    }
}

/// One round of [`iterate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iteration: usize,
    /// Variables fixed while sampling this round.
    pub fixed: usize,
    pub free_vars: usize,
    pub consensus: usize,
    /// Best energy in the original QUBO of the completed samples.
    pub best_energy: i64,
    pub energies: EnergySummary,
    /// `(variable, value)` pairs fixed (or, after backtracking, released) at
    /// the end of the round.
    pub changed: Vec<(u32, bool)>,
    pub step: Step,
}

/// Full log of an [`iterate`] run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterTrace {
    pub rounds: Vec<IterRecord>,
    pub outcome: Outcome,
}

impl IterTrace {
    pub fn solution(&self) -> Option<Assignment> {
        match &self.outcome {
            Outcome::Solved { solution } => solution.parse().ok(),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trace serialises")
    }
}

/// Seed for round `i`, so rounds draw independent streams.
fn round_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn iterate(e: &Embedding, system: &MqSystem, params: &IterParams) -> Result<IterTrace> {
    iterate_with(e, system, params, Parallelism::default())
}

/// Runs the iterative fixing search on `e`; a solution is only reported after
/// `system` confirms it.
pub fn iterate_with(e: &Embedding, system: &MqSystem, params: &IterParams, mode: Parallelism) -> Result<IterTrace> {
    params.validate()?;
    if system.n_vars() != e.n_original {
        return Err(Error::Dimension {
            expected: e.n_original,
            got: system.n_vars(),
        });
    }
    let original = &e.qubo;
    let mut fixed = PartialAssignment::new();
    let mut batches: Vec<Vec<VarId>> = Vec::new();
    let mut l = params.consensus;
    let mut best_seen = i64::MAX;
    let mut monitor = ExclusionMonitor::new(params.patience);
    let mut rounds = Vec::new();
    let mut last_excluded = false;

    for iteration in 0..params.max_iterations {
        let reduced = original.fix_variables(&fixed)?;
        let anneal = AnnealParams {
            seed: round_seed(params.anneal.seed, iteration),
            ..params.anneal.clone()
        };
        let raw = sample_with(&reduced.qubo, &anneal, mode)?;
        let mut draws = Vec::with_capacity(raw.num_reads());
        for r in raw.records() {
            let full = reduced.complete(&r.assignment)?;
            draws.extend(std::iter::repeat_n(full, r.multiplicity));
        }
        // Energies are recomputed in the original QUBO here.
        let ss = SampleSet::from_assignments(original, draws)?;
        let best = ss.best().expect("at least one read").clone();
        debug_assert_eq!(best.energy, raw.best().expect("at least one read").energy);

        let mut record = IterRecord {
            iteration,
            fixed: fixed.len(),
            free_vars: reduced.qubo.n_vars(),
            consensus: l,
            best_energy: best.energy,
            energies: EnergySummary::of(&ss),
            changed: Vec::new(),
            step: Step::Fixed,
        };

        if best.energy == e.ground_energy {
            let candidate = e.project(&best.assignment);
            if !system.is_solution(&candidate)? {
                return Err(Error::Invalid(format!(
                    "zero-energy state {} does not satisfy the system",
                    best.assignment
                )));
            }
            record.step = Step::Solved;
            rounds.push(record);
            return Ok(IterTrace {
                rounds,
                outcome: Outcome::Solved {
                    solution: candidate.to_bitstring(),
                },
            });
        }

        let fired = exclusion_check(original, &fixed, &best.assignment, best_seen)?;
        best_seen = best_seen.min(best.energy);
        last_excluded = fired;
        if monitor.observe(fired) {
            if let Some(batch) = batches.pop() {
                for v in batch {
                    if let Some(value) = fixed.remove(v) {
                        record.changed.push((v.0, value));
                    }
                }
                l = l.saturating_mul(2);
                monitor.reset();
                record.step = Step::Backtracked;
                rounds.push(record);
                continue;
            }
        }

        let new = consensus_fix(&ss, l, &fixed);
        if new.len() < params.min_fix_per_round {
            if l > 2 {
                l = (l / 2).max(2);
                record.step = Step::Stalled;
                rounds.push(record);
                continue;
            }
            record.step = Step::Exhausted;
            rounds.push(record);
            return Ok(IterTrace {
                rounds,
                outcome: if last_excluded { Outcome::Excluded } else { Outcome::Exhausted },
            });
        }
        let mut batch = Vec::with_capacity(new.len());
        for (&v, &value) in new.iter() {
            fixed.insert(v, value);
            batch.push(v);
            record.changed.push((v.0, value));
        }
        batches.push(batch);
        rounds.push(record);
    }
    Ok(IterTrace {
        rounds,
        outcome: if last_excluded { Outcome::Excluded } else { Outcome::Exhausted },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anneal::exact_ground;
    use crate::embed::embed_truncated;
    use crate::mq::{parse_system, worked_example, Monomial};
    use crate::nnf::IntPoly;

    fn set(q: &Qubo, rows: &[&str]) -> SampleSet {
        SampleSet::from_assignments(q, rows.iter().map(|r| r.parse().unwrap())).unwrap()
    }

    #[test]
    fn consensus_basic() {
        let q = Qubo::from_poly(&IntPoly::from_terms([(Monomial::var(VarId(1)), 1)]), 2).unwrap();
        let ss = set(&q, &["00", "01"]);
        let fix = consensus_fix(&ss, 2, &PartialAssignment::new());
        assert_eq!(fix.iter().map(|(v, b)| (v.0, *b)).collect::<Vec<_>>(), [(0, false)]);

        let ss = set(&q, &["00", "11", "10", "01"]);
        assert!(consensus_fix(&ss, 4, &PartialAssignment::new()).is_empty());

        let done: PartialAssignment = [(VarId(0), false)].into_iter().collect();
        assert!(consensus_fix(&set(&q, &["00", "01"]), 2, &done).is_empty());
    }

    #[test]
    fn heavily_penalised_ancilla_is_unanimous() {
        // x2 must equal x0 x1 (weight 5); the data term x0 + x1 is light.
        let mut p = IntPoly::from_terms([(Monomial::var(VarId(0)), 1), (Monomial::var(VarId(1)), 1)]);
        p.add_scaled(&crate::quadratize::pair_penalty(VarId(0), VarId(1), VarId(2)).unwrap(), 5);
        let q = Qubo::from_poly(&p, 3).unwrap();
        let all: Vec<Assignment> = (0..8).map(|i| Assignment::from_index(i, 3)).collect();
        let ss = SampleSet::from_assignments(&q, all).unwrap();
        let fix = consensus_fix(&ss, 3, &PartialAssignment::new());
        assert_eq!(fix.get(VarId(2)), Some(false));
        assert_eq!(exact_ground(&q).unwrap().energy, 0);
    }

    #[test]
    fn exclusion_cases() {
        let s = parse_system("vars 1\nx1 + 1\n").unwrap();
        let e = crate::embed::embed_direct(&s, Default::default()).unwrap();
        let wrong: PartialAssignment = [(VarId(0), false)].into_iter().collect();
        let mut monitor = ExclusionMonitor::new(2);
        let zero = Assignment::from([0]);
        let fired = exclusion_check(&e.qubo, &wrong, &zero, 0).unwrap();
        assert!(fired);
        assert!(!monitor.observe(fired));
        assert!(monitor.observe(fired));

        let right: PartialAssignment = [(VarId(0), true)].into_iter().collect();
        assert!(!exclusion_check(&e.qubo, &right, &Assignment::from([1]), 0).unwrap());
        assert!(!exclusion_check(&e.qubo, &PartialAssignment::new(), &zero, 0).unwrap());
        assert!(exclusion_check(&e.qubo, &right, &zero, 0).is_err());
    }

    fn quick(seed: u64) -> IterParams {
        IterParams {
            anneal: AnnealParams {
                reads: 64,
                sweeps: 200,
                seed,
                ..AnnealParams::default()
            },
            ..IterParams::default()
        }
    }

    #[test]
    fn solves_worked_example() {
        let s = worked_example();
        let e = embed_truncated(&s, 4).unwrap();
        let trace = iterate(&e, &s, &quick(1)).unwrap();
        let sol = trace.solution().expect("solved");
        assert!(s.is_solution(&sol).unwrap());
        let json = trace.to_json();
        assert_eq!(json["outcome"]["status"], "solved");
    }

    #[test]
    fn already_solved_in_first_round() {
        let s = parse_system("vars 2\nx1 + 1\n").unwrap();
        let e = crate::embed::embed_direct(&s, Default::default()).unwrap();
        let trace = iterate(&e, &s, &quick(0)).unwrap();
        assert_eq!(trace.rounds.len(), 1);
        assert_eq!(trace.rounds[0].fixed, 0);
        assert!(trace.solution().is_some());
    }

    #[test]
    fn unsatisfiable_never_solves() {
        let s = parse_system("vars 2\nx1 + x2\nx1 + x2 + 1\n").unwrap();
        let e = embed_truncated(&s, 4).unwrap();
        let trace = iterate(&e, &s, &quick(4)).unwrap();
        assert!(matches!(trace.outcome, Outcome::Excluded | Outcome::Exhausted));
        for r in &trace.rounds {
            assert!(r.best_energy >= 1);
        }
    }

    #[test]
    fn parameter_validation() {
        let p = IterParams { consensus: 1, ..IterParams::default() };
        assert!(p.validate().is_err());
        let p = IterParams { max_iterations: 0, ..IterParams::default() };
        assert!(p.validate().is_err());
        assert!(IterParams::default().validate().is_ok());
    }
}
