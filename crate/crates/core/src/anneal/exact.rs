//! Exact minimisation: an exhaustive Gray-code scan for small QUBOs and a
//! min-sum variable-elimination solver for sparse larger ones.

use std::collections::BTreeSet;

use super::Couplings;
use crate::error::{Error, Result};
use crate::mq::{Assignment, VarId};
use crate::par::{map_indexed, Parallelism};
use crate::qubo::{PartialAssignment, Qubo};

/// Largest variable count accepted by the exhaustive scan.
pub const EXACT_LIMIT: usize = 26;

/// At most this many minimisers are kept; the count is always exact.
pub const MINIMIZER_CAP: usize = 1 << 20;

const CHUNK_BITS: usize = 16;

/// Result of an exhaustive scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundState {
    pub energy: i64,
    pub n_vars: usize,
    /// Number of minimising assignments.
    pub count: u64,
    /// Minimisers as assignment indices (bit `i` is variable `i`), ascending,
    /// truncated to [`MINIMIZER_CAP`] entries.
    pub minimizers: Vec<u64>,
}

impl GroundState {
    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.minimizers.iter().map(|&i| Assignment::from_index(i, self.n_vars))
    }

    /// Whether `minimizers` holds every minimiser.
    pub fn is_complete(&self) -> bool {
        self.count as usize == self.minimizers.len()
    }
}

pub fn exact_ground(q: &Qubo) -> Result<GroundState> {
    exact_ground_with(q, Parallelism::default())
}

/// Minimum energy and minimisers over all `2^n` assignments.
pub fn exact_ground_with(q: &Qubo, mode: Parallelism) -> Result<GroundState> {
    let n = q.n_vars();
    if n > EXACT_LIMIT {
        return Err(Error::LimitExceeded {
            what: "exhaustive scan variables",
            requested: n,
            limit: EXACT_LIMIT,
        });
    }
    let low = n.min(CHUNK_BITS);
    let couplings = Couplings::new(q);
    let chunks = map_indexed(mode, 1usize << (n - low), |h| scan_chunk(q, &couplings, n, low, h as u64));
    let mut out = GroundState {
        energy: i64::MAX,
        n_vars: n,
        count: 0,
        minimizers: Vec::new(),
    };
    for (energy, count, mut found) in chunks {
        if energy < out.energy {
            out.energy = energy;
            out.count = 0;
            out.minimizers.clear();
        }
        if energy == out.energy {
            out.count += count;
            let room = MINIMIZER_CAP - out.minimizers.len();
            found.truncate(room);
            out.minimizers.extend(found);
        }
    }
    out.minimizers.sort_unstable();
    Ok(out)
}

/// Scans the `2^low` assignments whose high bits equal `high`, in Gray-code order.
fn scan_chunk(q: &Qubo, c: &Couplings, n: usize, low: usize, high: u64) -> (i64, u64, Vec<u64>) {
    let mut index = high << low;
    let mut x: Vec<bool> = (0..n).map(|i| (index >> i) & 1 == 1).collect();
    let mut field = c.fields(&x);
    let mut energy = q.energy(&Assignment::new(x.clone())).expect("length matches");
    let (mut best, mut count, mut found) = (energy, 1u64, vec![index]);
    for t in 1u64..1 << low {
        let i = t.trailing_zeros() as usize;
        energy += c.flip(&mut x, &mut field, i);
        index ^= 1 << i;
        if energy < best {
            best = energy;
            count = 0;
            found.clear();
        }
        if energy == best {
            count += 1;
            if found.len() < MINIMIZER_CAP {
                found.push(index);
            }
        }
    }
    (best, count, found)
}

/// A table over a small set of variables.
#[derive(Clone, Debug)]
struct Factor {
    scope: Vec<u32>,
    table: Vec<i64>,
}

impl Factor {
    /// Value at the given bits, one per scope variable in order.
    fn at(&self, bits: impl Iterator<Item = bool>) -> i64 {
        let idx = bits.enumerate().fold(0usize, |acc, (k, b)| acc | ((b as usize) << k));
        self.table[idx]
    }
}

/// Exact minimum by eliminating variables one at a time (min-sum bucket
/// elimination) in greedy minimum-degree order.
///
/// Cost is exponential only in the induced width of the interaction graph,
/// which stays small for the chain-structured embeddings once the original
/// variables are fixed.
#[derive(Clone, Copy, Debug)]
pub struct EliminationSolver {
    /// Largest intermediate table scope allowed.
    pub max_width: usize,
}

impl Default for EliminationSolver {
    fn default() -> Self {
        EliminationSolver { max_width: 20 }
    }
}

impl EliminationSolver {
    pub fn minimum(&self, q: &Qubo) -> Result<i64> {
        let n = q.n_vars();
        let mut factors: Vec<Factor> = Vec::new();
        let mut graph: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
        for (v, &c) in q.linear() {
            factors.push(Factor {
                scope: vec![v.0],
                table: vec![0, c],
            });
        }
        for (&(a, b), &c) in q.quadratic() {
            factors.push(Factor {
                scope: vec![a.0, b.0],
                table: vec![0, 0, 0, c],
            });
            graph[a.index()].insert(b.0);
            graph[b.index()].insert(a.0);
        }

        let mut eliminated = vec![false; n];
        let mut constant = q.offset();
        for _ in 0..n {
            let v = (0..n)
                .filter(|&i| !eliminated[i])
                .min_by_key(|&i| (graph[i].len(), i))
                .expect("variables remain");
            eliminated[v] = true;
            let neighbours: Vec<u32> = std::mem::take(&mut graph[v]).into_iter().collect();
            for &a in &neighbours {
                graph[a as usize].remove(&(v as u32));
                for &b in &neighbours {
                    if a != b {
                        graph[a as usize].insert(b);
                    }
                }
            }

            let (bucket, rest): (Vec<Factor>, Vec<Factor>) =
                factors.into_iter().partition(|f| f.scope.contains(&(v as u32)));
            factors = rest;
            let scope: Vec<u32> = bucket
                .iter()
                .flat_map(|f| f.scope.iter().copied())
                .filter(|&u| u != v as u32)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if scope.len() > self.max_width {
                return Err(Error::LimitExceeded {
                    what: "elimination width",
                    requested: scope.len(),
                    limit: self.max_width,
                });
            }
            // Bit positions of each factor's variables in `scope` extended by `v`.
            let width = scope.len();
            let positions: Vec<Vec<usize>> = bucket
                .iter()
                .map(|f| {
                    f.scope
                        .iter()
                        .map(|&u| if u == v as u32 { width } else { scope.binary_search(&u).expect("in scope") })
                        .collect()
                })
                .collect();
            let table: Vec<i64> = (0..1usize << width)
                .map(|idx| {
                    let total = |full: usize| -> i64 {
                        bucket
                            .iter()
                            .zip(&positions)
                            .map(|(f, pos)| f.at(pos.iter().map(|&p| (full >> p) & 1 == 1)))
                            .sum()
                    };
                    total(idx).min(total(idx | 1 << width))
                })
                .collect();
            if scope.is_empty() {
                constant += table[0];
            } else {
                factors.push(Factor { scope, table });
            }
        }
        Ok(constant + factors.iter().map(|f| f.table[0]).sum::<i64>())
    }
}

/// For every assignment of the first `n_project` variables (indexed as in
/// [`Assignment::from_index`]), the minimum energy over the remaining ones.
pub fn projected_minima(q: &Qubo, n_project: usize, solver: EliminationSolver) -> Result<Vec<i64>> {
    const LIMIT: usize = 20;
    if n_project > LIMIT || n_project > q.n_vars() {
        return Err(Error::LimitExceeded {
            what: "projected variables",
            requested: n_project,
            limit: LIMIT.min(q.n_vars()),
        });
    }
    map_indexed(Parallelism::default(), 1usize << n_project, |idx| {
        let fixed: PartialAssignment = (0..n_project)
            .map(|i| (VarId::from(i), (idx >> i) & 1 == 1))
            .collect();
        solver.minimum(&q.fix_variables(&fixed)?.qubo)
    })
    .into_iter()
    .collect()
}
