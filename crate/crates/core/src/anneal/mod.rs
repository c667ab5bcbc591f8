//! Samplers for QUBO energies: single-flip simulated annealing and the exact
//! oracles in [`exact`].

pub mod exact;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mq::Assignment;
use crate::par::{map_indexed, Parallelism};
use crate::qubo::Qubo;

pub use exact::{
    exact_ground, exact_ground_with, projected_minima, GroundState, EliminationSolver, EXACT_LIMIT,
};

/// Simulated-annealing settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealParams {
    /// Independent restarts.
    pub reads: usize,
    /// Metropolis passes over all variables per read.
    pub sweeps: usize,
    /// Inverse temperature of the first sweep.
    pub beta_start: f64,
    /// Inverse temperature of the last sweep; intermediate sweeps interpolate geometrically.
    pub beta_end: f64,
    pub seed: u64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            reads: 1000,
            sweeps: 1000,
            beta_start: 0.1,
            beta_end: 10.0,
            seed: 0,
        }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<()> {
        if self.reads == 0 {
            return Err(Error::Invalid("reads must be at least 1".into()));
        }
        if self.sweeps == 0 {
            return Err(Error::Invalid("sweeps must be at least 1".into()));
        }
        let finite = self.beta_start.is_finite() && self.beta_end.is_finite();
        if !(finite && self.beta_start > 0.0 && self.beta_start <= self.beta_end) {
            return Err(Error::Invalid(format!(
                "beta schedule needs 0 < start <= end, got {} -> {}",
                self.beta_start, self.beta_end
            )));
        }
        Ok(())
    }

    /// Inverse temperature used in sweep `s` of `self.sweeps`.
    pub fn beta(&self, s: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.beta_end;
        }
        let t = s as f64 / (self.sweeps - 1) as f64;
        self.beta_start * (self.beta_end / self.beta_start).powf(t)
    }
}

/// One distinct assignment with its energy and how often it was drawn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    #[serde(with = "bitstring")]
    pub assignment: Assignment,
    pub energy: i64,
    pub multiplicity: usize,
}

mod bitstring {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::mq::Assignment;

    pub fn serialize<S: Serializer>(a: &Assignment, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&a.to_bitstring())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Assignment, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Distinct samples sorted by energy, then by bitstring.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SampleSet {
    records: Vec<Sample>,
}

impl SampleSet {
    /// Aggregates raw draws, recomputing every energy from `q`.
    pub fn from_assignments(q: &Qubo, draws: impl IntoIterator<Item = Assignment>) -> Result<Self> {
        let mut counts: BTreeMap<Assignment, usize> = BTreeMap::new();
        for a in draws {
            *counts.entry(a).or_default() += 1;
        }
        let mut records = counts
            .into_iter()
            .map(|(assignment, multiplicity)| {
                let energy = q.energy(&assignment)?;
                Ok(Sample {
                    assignment,
                    energy,
                    multiplicity,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        records.sort_by(|a, b| a.energy.cmp(&b.energy).then_with(|| a.assignment.cmp(&b.assignment)));
        Ok(SampleSet { records })
    }

    pub fn records(&self) -> &[Sample] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn best(&self) -> Option<&Sample> {
        self.records.first()
    }

    /// Total number of draws.
    pub fn num_reads(&self) -> usize {
        self.records.iter().map(|r| r.multiplicity).sum()
    }

    /// The `l` lowest distinct records, extended by every further record whose
    /// energy ties the `l`-th.
    pub fn lowest(&self, l: usize) -> &[Sample] {
        if l == 0 || self.records.is_empty() {
            return &[];
        }
        if l >= self.records.len() {
            return &self.records;
        }
        let cutoff = self.records[l - 1].energy;
        let end = l + self.records[l..].iter().take_while(|r| r.energy == cutoff).count();
        &self.records[..end]
    }

    /// Energy at quantile `p` in `[0, 1]` of the draws, counting multiplicity
    /// (nearest rank).
    pub fn quantile(&self, p: f64) -> Option<i64> {
        let total = self.num_reads();
        if total == 0 {
            return None;
        }
        let rank = ((p.clamp(0.0, 1.0) * total as f64).ceil() as usize).clamp(1, total);
        let mut seen = 0;
        for r in &self.records {
            seen += r.multiplicity;
            if seen >= rank {
                return Some(r.energy);
            }
        }
        self.records.last().map(|r| r.energy)
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("sample serialises"));
            out.push('\n');
        }
        out
    }

    pub fn from_json_lines(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<Vec<Sample>, _>>()?;
        Ok(SampleSet { records })
    }
}

/// Neighbour lists of a QUBO for fast local-field updates.
pub(crate) struct Couplings {
    pub linear: Vec<i64>,
    pub offsets: Vec<usize>,
    pub neighbours: Vec<(u32, i64)>,
}

impl Couplings {
    pub fn new(q: &Qubo) -> Self {
        let n = q.n_vars();
        let mut linear = vec![0; n];
        for (v, &c) in q.linear() {
            linear[v.index()] = c;
        }
        let mut adj: Vec<Vec<(u32, i64)>> = vec![Vec::new(); n];
        for (&(a, b), &c) in q.quadratic() {
            adj[a.index()].push((b.0, c));
            adj[b.index()].push((a.0, c));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbours = Vec::new();
        offsets.push(0);
        for list in adj {
            neighbours.extend(list);
            offsets.push(neighbours.len());
        }
        Couplings {
            linear,
            offsets,
            neighbours,
        }
    }

    pub fn of(&self, i: usize) -> &[(u32, i64)] {
        &self.neighbours[self.offsets[i]..self.offsets[i + 1]]
    }

    /// `linear_i + sum_j J_ij x_j` for every `i`.
    pub fn fields(&self, x: &[bool]) -> Vec<i64> {
        (0..self.linear.len())
            .map(|i| {
                self.linear[i]
                    + self
                        .of(i)
                        .iter()
                        .filter(|(j, _)| x[*j as usize])
                        .map(|&(_, c)| c)
                        .sum::<i64>()
            })
            .collect()
    }

    /// Flips `x[i]` and updates `field`; returns the energy change.
    pub fn flip(&self, x: &mut [bool], field: &mut [i64], i: usize) -> i64 {
        let delta = if x[i] { -field[i] } else { field[i] };
        x[i] = !x[i];
        let sign = if x[i] { 1 } else { -1 };
        for &(j, c) in self.of(i) {
            field[j as usize] += sign * c;
        }
        delta
    }
}

/// Simulated annealing with the default parallelism.
pub fn sample(q: &Qubo, params: &AnnealParams) -> Result<SampleSet> {
    sample_with(q, params, Parallelism::default())
}

/// Runs `params.reads` independent single-flip Metropolis anneals and returns
/// the lowest-energy state visited by each read.
///
/// Read `r` draws from a ChaCha8 stream keyed by `(seed, r)`, so the result is
/// the same for every thread count and parallelism mode.
pub fn sample_with(q: &Qubo, params: &AnnealParams, mode: Parallelism) -> Result<SampleSet> {
    params.validate()?;
    let couplings = Couplings::new(q);
    let betas: Vec<f64> = (0..params.sweeps).map(|s| params.beta(s)).collect();
    let reads = map_indexed(mode, params.reads, |r| anneal_read(q, &couplings, &betas, params.seed, r as u64));
    let draws = reads.into_iter().collect::<Result<Vec<_>>>()?;
    SampleSet::from_assignments(q, draws)
}

fn anneal_read(q: &Qubo, c: &Couplings, betas: &[f64], seed: u64, read: u64) -> Result<Assignment> {
    let n = q.n_vars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read);
    let mut x: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let mut field = c.fields(&x);
    let mut energy = q.energy(&Assignment::new(x.clone()))?;
    let mut best = (energy, x.clone());
    for &beta in betas {
        for i in 0..n {
            let delta = if x[i] { -field[i] } else { field[i] };
            if delta <= 0 || rng.random::<f64>() < (-beta * delta as f64).exp() {
                energy += c.flip(&mut x, &mut field, i);
                if energy < best.0 {
                    best = (energy, x.clone());
                }
            }
        }
        let exact = q.energy(&Assignment::new(x.clone()))?;
        if exact != energy {
            return Err(Error::Invalid(format!(
                "incremental energy {energy} drifted from recomputed {exact}"
            )));
        }
    }
    Ok(Assignment::new(best.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mq::{Monomial, VarId};
    use crate::nnf::IntPoly;

    fn small(reads: usize, sweeps: usize, seed: u64) -> AnnealParams {
        AnnealParams {
            reads,
            sweeps,
            seed,
            ..AnnealParams::default()
        }
    }

    #[test]
    fn single_variable() {
        let q = Qubo::from_poly(&IntPoly::from_terms([(Monomial::var(VarId(0)), 1)]), 1).unwrap();
        let ss = sample(&q, &small(10, 100, 3)).unwrap();
        assert_eq!(ss.best().unwrap().energy, 0);
        assert_eq!(ss.num_reads(), 10);
    }

    #[test]
    fn deterministic_and_mode_independent() {
        let (s, _) = crate::mq::generate_planted(4, 4, 11).unwrap();
        let e = crate::embed::embed_truncated(&s, 4).unwrap();
        let p = small(16, 50, 9);
        let a = sample_with(&e.qubo, &p, Parallelism::Parallel).unwrap();
        let b = sample_with(&e.qubo, &p, Parallelism::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, sample(&e.qubo, &p).unwrap());
        for r in a.records() {
            assert_eq!(e.qubo.energy(&r.assignment).unwrap(), r.energy);
        }
    }

    #[test]
    fn validation() {
        assert!(small(0, 10, 0).validate().is_err());
        assert!(small(1, 0, 0).validate().is_err());
        let mut p = small(1, 1, 0);
        p.beta_start = 20.0;
        assert!(p.validate().is_err());
        p.beta_start = 0.0;
        assert!(p.validate().is_err());
        assert!(AnnealParams::default().validate().is_ok());
    }

    #[test]
    fn geometric_schedule() {
        let p = small(1, 3, 0);
        assert!((p.beta(0) - 0.1).abs() < 1e-12);
        assert!((p.beta(1) - 1.0).abs() < 1e-12);
        assert!((p.beta(2) - 10.0).abs() < 1e-12);
        assert_eq!(small(1, 1, 0).beta(0), 10.0);
    }

    #[test]
    fn lowest_includes_ties_and_quantiles() {
        let q = Qubo::from_poly(
            &IntPoly::from_terms([(Monomial::var(VarId(0)), 1), (Monomial::var(VarId(1)), 1)]),
            2,
        )
        .unwrap();
        let draws = ["00", "10", "01", "11", "11"].map(|s| s.parse().unwrap());
        let ss = SampleSet::from_assignments(&q, draws).unwrap();
        assert_eq!(ss.records().iter().map(|r| r.energy).collect::<Vec<_>>(), [0, 1, 1, 2]);
        assert_eq!(ss.lowest(2).len(), 3);
        assert_eq!(ss.lowest(1).len(), 1);
        assert_eq!(ss.lowest(10).len(), 4);
        assert_eq!(ss.quantile(0.0), Some(0));
        assert_eq!(ss.quantile(0.5), Some(1));
        assert_eq!(ss.quantile(1.0), Some(2));
        let back = SampleSet::from_json_lines(&ss.to_json_lines()).unwrap();
        assert_eq!(back, ss);
        assert!(ss.to_json_lines().starts_with(r#"{"assignment":"00","energy":0,"multiplicity":1}"#));
    }

    #[test]
    fn empty_qubo_samples_offset() {
        let mut q = Qubo::new(0);
        q.set_offset(4);
        let ss = sample(&q, &small(3, 2, 0)).unwrap();
        assert_eq!(ss.len(), 1);
        assert_eq!(ss.best().unwrap().energy, 4);
    }
}
