//! Closed-form logical-qubit counts for the direct and truncated embeddings.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use num_traits::{ToPrimitive, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::Rational;

/// Largest variable count accepted by [`scaling_report`]; beyond it the
/// direct count no longer fits the exact arithmetic.
pub const REPORT_MAX_N: u32 = 100;

/// Worst-case total qubit count of the direct embedding of one polynomial
/// containing every monomial over `n` variables: `2^((n+2)/2) - 2` for even
/// `n`, `3 * 2^((n-1)/2) - 2` for odd `n`. Saturates at `u64::MAX`.
pub fn estimate_direct_qubits(n: u32) -> u64 {
    let (base, exp) = if n.is_multiple_of(2) { (1u64, (n + 2) / 2) } else { (3u64, (n - 1) / 2) };
    match 1u64.checked_shl(exp).and_then(|p| p.checked_mul(base)) {
        Some(v) if exp < 64 => v.saturating_sub(2),
        _ => u64::MAX,
    }
}

/// Reduction ancillas needed for one piece of `k` terms: the direct count for
/// `k` variables minus the `k` variables themselves.
fn piece_ancillas(k: usize) -> i64 {
    estimate_direct_qubits(k as u32) as i64 - k as i64
}

fn r(v: i64) -> Rational {
    Rational::from_integer(v)
}

/// Logical-qubit estimates for the truncated embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedEstimate {
    /// The closed form with fractional piece counts, as an exact rational.
    pub formula: Rational,
    /// Upper bound on what the builder allocates: piece counts rounded up
    /// and every pair of original variables given an ancilla.
    pub builder_bound: u64,
    /// `builder_bound - formula` contributed by the rounding alone.
    pub ceiling_slack: Rational,
}

/// Sum over equations of the truncated closed form for term counts `ni`.
fn truncated_formula(n: i64, ni: impl IntoIterator<Item = Rational>, k: usize) -> Rational {
    let a = r(piece_ancillas(k));
    let kk = r(k as i64 - 2);
    let per_eq: Rational = ni
        .into_iter()
        .map(|t| (t - r(2)) / kk * a + (t - r(k as i64)) / kk)
        .fold(Rational::zero(), |acc, x| acc + x);
    per_eq + r(n * (n - 1) / 2 + n)
}

/// Truncated-embedding qubit count for `n` variables and `m` equations with
/// the given term counts, split into pieces of length `k`.
///
/// The closed-form piece cost `2^((k+2)/2) - 2 - k` is generalised to odd `k`
/// through [`estimate_direct_qubits`].
///
/// ```
/// use mq_anneal::embed::estimate_truncated_qubits;
/// let e = estimate_truncated_qubits(4, 4, &[9, 5, 6, 4], 4).unwrap();
/// assert_eq!(e.formula, 30.into());
/// ```
pub fn estimate_truncated_qubits(n: usize, m: usize, term_counts: &[usize], k: usize) -> Result<TruncatedEstimate> {
    if !(3..=60).contains(&k) {
        return Err(Error::Invalid(format!("truncation length must be in 3..=60, got {k}")));
    }
    if term_counts.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: term_counts.len(),
        });
    }
    let n = i64::try_from(n).map_err(|_| Error::Invalid("variable count too large".into()))?;
    let formula = truncated_formula(n, term_counts.iter().map(|&t| r(t as i64)), k);
    let a = piece_ancillas(k) as u64;
    let pieces: u64 = term_counts
        .iter()
        .map(|&t| (t.saturating_sub(2)).div_ceil(k - 2).max(1) as u64 * (a + 1) - 1)
        .sum();
    let builder_bound = pieces + (n * (n - 1) / 2 + n) as u64;
    let ceiling_slack = r(builder_bound as i64) - formula;
    Ok(TruncatedEstimate {
        formula,
        builder_bound,
        ceiling_slack,
    })
}

/// The `k = 4` simplification `n^2/2 + n/2 - 4m + (3/2) sum n_i`.
pub fn truncated_qubits_k4(n: usize, m: usize, term_counts: &[usize]) -> Rational {
    let n = n as i64;
    let total: i64 = term_counts.iter().map(|&t| t as i64).sum();
    Rational::new(n * n + n, 2) - r(4 * m as i64) + Rational::new(3 * total, 2)
}

/// Bound on the rounding slack of each equation, in qubits:
/// `(A + 1) / (k - 2) * (k - 2 - ((n_i - 2) mod (k - 2)))` with `A` the
/// per-piece ancilla count. Equations with fewer than two terms are skipped.
pub fn ceiling_slack_bound(term_counts: &[usize], k: usize) -> Rational {
    let a1 = r(piece_ancillas(k) + 1);
    let kk = k - 2;
    term_counts
        .iter()
        .filter(|&&t| t >= 2)
        .map(|&t| a1 * Rational::new((kk - (t - 2) % kk) as i64, kk as i64))
        .fold(Rational::zero(), |acc, x| acc + x)
}

/// Average-instance scaling of the `k = 4` count with `m = n` equations of
/// `(n + n^2) / 4` terms each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AverageScaling {
    pub n: u32,
    /// The substituted count at `n`.
    pub value: Rational,
    /// Cubic, quadratic and linear coefficients of the substituted form.
    pub coefficients: [Rational; 3],
    /// Commonly quoted coefficients `3/8, 7/8, -7/8`.
    pub printed_coefficients: [Rational; 3],
    /// The quoted polynomial evaluated at `n`.
    pub printed_value: Rational,
    /// False below `n = 2`, where the averages are meaningless.
    pub in_domain: bool,
    /// Whether the two polynomials differ.
    pub mismatch: bool,
}

fn average_k4(n: i64) -> Rational {
    let ni = Rational::new(n + n * n, 4);
    Rational::new(n * n + n, 2) - r(4 * n) + Rational::new(3, 2) * ni * r(n)
}

fn cubic(c: &[Rational; 3], n: i64) -> Rational {
    let x = r(n);
    c[0] * x * x * x + c[1] * x * x + c[2] * x
}

/// Substitutes average instance statistics into the `k = 4` count.
///
/// The coefficients are recovered from the substituted values themselves
/// (forward differences at `n = 0..=3`), not assumed.
pub fn estimate_average_scaling(n: u32) -> AverageScaling {
    let f: Vec<Rational> = (0..4).map(average_k4).collect();
    let d1 = f[1] - f[0];
    let d2 = f[2] - r(2) * f[1] + f[0];
    let d3 = f[3] - r(3) * f[2] + r(3) * f[1] - f[0];
    debug_assert!(f[0].is_zero());
    let coefficients = [d3 / r(6), d2 / r(2) - d3 / r(2), d1 - d2 / r(2) + d3 / r(3)];
    let printed_coefficients = [Rational::new(3, 8), Rational::new(7, 8), Rational::new(-7, 8)];
    AverageScaling {
        n,
        value: cubic(&coefficients, n as i64),
        coefficients,
        printed_coefficients,
        printed_value: cubic(&printed_coefficients, n as i64),
        in_domain: n >= 2,
        mismatch: coefficients != printed_coefficients,
    }
}

/// One line of a scaling table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingRow {
    pub n: u32,
    /// `None` for the direct embedding.
    pub k: Option<usize>,
    pub qubits: Rational,
}

impl ScalingRow {
    pub fn method(&self) -> &'static str {
        if self.k.is_some() {
            "truncated"
        } else {
            "direct"
        }
    }
}

/// Direct versus truncated qubit counts under average instance statistics.
#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// `(n, k)` with the smallest truncated count per `n` (smallest `k` on ties).
    pub optimal_k: Vec<(u32, usize)>,
    /// First `n` at which the direct count exceeds the best truncated count,
    /// provided direct was not already larger at the start of the range.
    pub crossover: Option<u32>,
    pub average: AverageScaling,
}

/// Builds the table for every `n` in `n_range`: one direct row followed by
/// one truncated row per `k`, assuming `m = n` and `(n + n^2) / 4` terms per
/// equation.
pub fn scaling_report(n_range: RangeInclusive<u32>, k_range: &[usize]) -> Result<ScalingReport> {
    if *n_range.end() > REPORT_MAX_N {
        return Err(Error::LimitExceeded {
            what: "report variable count",
            requested: *n_range.end() as usize,
            limit: REPORT_MAX_N as usize,
        });
    }
    if n_range.is_empty() || k_range.is_empty() {
        return Err(Error::Invalid("empty report range".into()));
    }
    if let Some(&k) = k_range.iter().find(|&&k| !(3..=60).contains(&k)) {
        return Err(Error::Invalid(format!("truncation length must be in 3..=60, got {k}")));
    }
    let mut rows = Vec::new();
    let mut optimal_k = Vec::new();
    let mut crossover = None;
    let mut direct_led = None;
    for n in n_range.clone() {
        let direct = r(estimate_direct_qubits(n) as i64);
        rows.push(ScalingRow { n, k: None, qubits: direct });
        let ni = Rational::new((n + n * n) as i64, 4);
        let mut best: Option<(usize, Rational)> = None;
        for &k in k_range {
            let q = truncated_formula(n as i64, std::iter::repeat_n(ni, n as usize), k);
            rows.push(ScalingRow { n, k: Some(k), qubits: q });
            if best.is_none_or(|(bk, bq)| q < bq || (q == bq && k < bk)) {
                best = Some((k, q));
            }
        }
        let (bk, bq) = best.expect("k range is non-empty");
        optimal_k.push((n, bk));
        let direct_smaller = direct <= bq;
        if direct_led.is_none() {
            direct_led = Some(direct_smaller);
        }
        if direct_led == Some(true) && crossover.is_none() && !direct_smaller {
            crossover = Some(n);
        }
    }
    Ok(ScalingReport {
        rows,
        optimal_k,
        crossover,
        average: estimate_average_scaling(*n_range.start()),
    })
}

fn approx(q: Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

impl ScalingReport {
    /// Whether every `n` shares the same optimal `k`.
    pub fn uniform_optimal_k(&self) -> Option<usize> {
        let first = self.optimal_k.first()?.1;
        self.optimal_k.iter().all(|&(_, k)| k == first).then_some(first)
    }

    /// Tab-separated table; trailing `#` lines summarise the result.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n\tmethod\tk\tqubits\tapprox\n");
        for row in &self.rows {
            let k = row.k.map_or_else(|| "-".to_string(), |k| k.to_string());
            let _ = writeln!(out, "{}\t{}\t{k}\t{}\t{:.3}", row.n, row.method(), row.qubits, approx(row.qubits));
        }
        match self.uniform_optimal_k() {
            Some(k) => {
                let _ = writeln!(out, "# optimal k: {k} for every n");
            }
            None => {
                let list: Vec<String> = self.optimal_k.iter().map(|(n, k)| format!("{n}:{k}")).collect();
                let _ = writeln!(out, "# optimal k per n: {}", list.join(" "));
            }
        }
        match self.crossover {
            Some(n) => {
                let _ = writeln!(out, "# direct exceeds truncated from n = {n}");
            }
            None => out.push_str("# no crossover in range\n"),
        }
        out.push_str(&self.mismatch_note());
        out.push('\n');
        out
    }

    /// One-line statement of the average-scaling comparison.
    pub fn mismatch_note(&self) -> String {
        let a = &self.average;
        let c = |v: &[Rational; 3]| format!("{} n^3 + {} n^2 + {} n", v[0], v[1], v[2]);
        format!(
            "# average scaling: substituted {} vs quoted {}{}",
            c(&a.coefficients),
            c(&a.printed_coefficients),
            if a.mismatch { " (MISMATCH: linear coefficients differ)" } else { "" }
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        let q = |v: Rational| json!({ "exact": v.to_string(), "approx": approx(v) });
        let a = &self.average;
        json!({
            "rows": self.rows.iter().map(|row| json!({
                "n": row.n,
                "method": row.method(),
                "k": row.k,
                "qubits": q(row.qubits),
            })).collect::<Vec<_>>(),
            "optimal_k": self.optimal_k.iter().map(|&(n, k)| json!({"n": n, "k": k})).collect::<Vec<_>>(),
            "crossover": self.crossover,
            "average_scaling": {
                "substituted": a.coefficients.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "quoted": a.printed_coefficients.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "mismatch": a.mismatch,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_counts() {
        assert_eq!(estimate_direct_qubits(2), 2);
        assert_eq!(estimate_direct_qubits(4), 6);
        assert_eq!(estimate_direct_qubits(5), 10);
        assert_eq!(estimate_direct_qubits(3), 4);
        assert_eq!(estimate_direct_qubits(200), u64::MAX);
    }

    #[test]
    fn worked_example_count() {
        let e = estimate_truncated_qubits(4, 4, &[9, 5, 6, 4], 4).unwrap();
        assert_eq!(e.formula, r(30));
        assert_eq!(truncated_qubits_k4(4, 4, &[9, 5, 6, 4]), r(30));
        // Pieces 4, 2, 2, 1 at three qubits each, one chain ancilla fewer
        // than pieces, then 6 pairs and 4 originals.
        assert_eq!(e.builder_bound, 11 + 5 + 5 + 2 + 6 + 4);
        assert_eq!(e.ceiling_slack, r(e.builder_bound as i64) - r(30));
    }

    #[test]
    fn exact_pieces_have_no_chain_term() {
        let a = estimate_truncated_qubits(3, 2, &[4, 4], 4).unwrap();
        // (4-2)/2 * 2 + 0 per equation, plus 3 pair ancillas and 3 originals.
        assert_eq!(a.formula, r(2 * 2 + 6));
        assert!(a.ceiling_slack.is_zero());
    }

    #[test]
    fn mismatched_term_counts() {
        assert!(estimate_truncated_qubits(4, 3, &[9, 5, 6, 4], 4).is_err());
        assert!(estimate_truncated_qubits(4, 4, &[9, 5, 6, 4], 2).is_err());
    }

    #[test]
    fn average_scaling_values() {
        let a = estimate_average_scaling(4);
        assert_eq!(a.value, r(24));
        assert_eq!(a.coefficients, [Rational::new(3, 8), Rational::new(7, 8), Rational::new(-7, 2)]);
        assert_eq!(a.coefficients[0], a.printed_coefficients[0]);
        assert!(a.mismatch && a.in_domain);
        for n in 0..20 {
            assert_eq!(estimate_average_scaling(n).value, average_k4(n as i64));
        }
        assert!(!estimate_average_scaling(1).in_domain);
    }

    #[test]
    fn report_shape_and_claims() {
        let rep = scaling_report(4..=40, &[4, 5, 6, 7, 8]).unwrap();
        assert_eq!(rep.rows.len(), 37 * 6);
        assert_eq!(rep.uniform_optimal_k(), Some(4));
        let c = rep.crossover.unwrap();
        assert!((4..=30).contains(&c), "crossover at {c}");
        let tsv = rep.to_tsv();
        assert!(tsv.contains("MISMATCH"));
        assert_eq!(tsv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 37 * 6);
        assert!(scaling_report(4..=200, &[4]).is_err());
    }
}
