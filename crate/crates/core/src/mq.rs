//! Boolean polynomials in algebraic normal form and systems of quadratic
//! equations over F2.
//!
//! Variables are zero-based [`VarId`]s; the text format and `Display` output
//! name them one-based (`x1` is `VarId(0)`).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_indexed, Parallelism};

/// Largest variable count [`brute_force_solutions`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VarId {
    fn from(index: usize) -> Self {
        VarId(u32::try_from(index).expect("variable index exceeds u32"))
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0 + 1)
    }
}

/// A product of distinct variables; the empty product is the constant 1.
///
/// Ordered by degree first, then lexicographically by variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<VarId>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Monomial(vec![v])
    }

    pub fn pair(a: VarId, b: VarId) -> Self {
        Self::from_vars([a, b])
    }

    /// Builds a monomial from any variables, applying `x * x = x`.
    pub fn from_vars(vars: impl IntoIterator<Item = VarId>) -> Self {
        let mut vars: Vec<VarId> = vars.into_iter().collect();
        vars.sort_unstable();
        vars.dedup();
        Monomial(vars)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> &[VarId] {
        &self.0
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.0.last().copied()
    }

    /// Product of two monomials (set union).
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Removes the given variables; absent ones are ignored.
    pub fn without(&self, remove: &[VarId]) -> Monomial {
        Monomial(
            self.0
                .iter()
                .copied()
                .filter(|v| !remove.contains(v))
                .collect(),
        )
    }

    /// Bitmask over variable indices; only valid for indices below 64.
    pub(crate) fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, v| m | (1u64 << v.0))
    }

    /// Product value; the caller guarantees the assignment covers every variable.
    pub(crate) fn eval_bits(&self, bits: &[bool]) -> bool {
        self.0.iter().all(|v| bits[v.index()])
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// An assignment of 0/1 values, one per variable, indexed by [`VarId`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Assignment(vec![false; n])
    }

    /// Bit `i` of `index` gives variable `i`.
    pub fn from_index(index: u64, n: usize) -> Self {
        Assignment((0..n).map(|i| (index >> i) & 1 == 1).collect())
    }

    /// Inverse of [`Assignment::from_index`]; requires at most 64 variables.
    pub fn to_index(&self) -> u64 {
        debug_assert!(self.0.len() <= 64);
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: VarId) -> bool {
        self.0[v.index()]
    }

    pub fn set(&mut self, v: VarId, value: bool) {
        self.0[v.index()] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// The first `n` values.
    pub fn truncated(&self, n: usize) -> Assignment {
        Assignment(self.0[..n.min(self.0.len())].to_vec())
    }

    /// One character per variable, variable 0 first.
    pub fn to_bitstring(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl From<Vec<bool>> for Assignment {
    fn from(bits: Vec<bool>) -> Self {
        Assignment(bits)
    }
}

impl<const N: usize> From<[u8; N]> for Assignment {
    fn from(bits: [u8; N]) -> Self {
        Assignment(bits.iter().map(|&b| b != 0).collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::syntax(1, i + 1, format!("expected 0 or 1, found {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Assignment)
    }
}

/// A Boolean polynomial over F2 as a set of monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AnfPoly {
    monomials: BTreeSet<Monomial>,
}

impl AnfPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// XOR of the given monomials; repeated monomials cancel in pairs.
    pub fn from_monomials(monomials: impl IntoIterator<Item = Monomial>) -> Self {
        let mut p = Self::zero();
        for m in monomials {
            p.toggle(m);
        }
        p
    }

    /// Adds a monomial over F2.
    pub fn toggle(&mut self, m: Monomial) {
        if !self.monomials.remove(&m) {
            self.monomials.insert(m);
        }
    }

    /// Monomials in canonical (degree, lexicographic) order.
    pub fn monomials(&self) -> impl DoubleEndedIterator<Item = &Monomial> + ExactSizeIterator {
        self.monomials.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn has_constant(&self) -> bool {
        self.monomials.contains(&Monomial::one())
    }

    pub fn degree(&self) -> usize {
        self.monomials.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    /// One past the largest variable index used, or 0.
    pub fn var_bound(&self) -> usize {
        self.monomials
            .iter()
            .filter_map(Monomial::max_var)
            .map(|v| v.index() + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, a: &Assignment) -> Result<bool> {
        let need = self.var_bound();
        if a.len() < need {
            return Err(Error::Dimension {
                expected: need,
                got: a.len(),
            });
        }
        Ok(self
            .monomials
            .iter()
            .fold(false, |acc, m| acc ^ m.eval_bits(a.bits())))
    }
}

impl std::ops::Add for &AnfPoly {
    type Output = AnfPoly;

    fn add(self, rhs: &AnfPoly) -> AnfPoly {
        AnfPoly {
            monomials: self
                .monomials
                .symmetric_difference(&rhs.monomials)
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for AnfPoly {
    /// Highest degree first, as in `x1*x3 + x2*x4 + x4 + 1`; the zero polynomial prints `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        let mut by_degree: Vec<&Monomial> = self.monomials.iter().collect();
        by_degree.sort_by(|a, b| b.degree().cmp(&a.degree()).then_with(|| a.vars().cmp(b.vars())));
        for (k, m) in by_degree.into_iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// The bit value of `p` at `a`.
pub fn eval_poly(p: &AnfPoly, a: &Assignment) -> Result<bool> {
    p.eval(a)
}

/// A system of quadratic Boolean equations `p_i(x) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MqSystem {
    n_vars: usize,
    polys: Vec<AnfPoly>,
}

impl MqSystem {
    pub fn new(n_vars: usize, polys: Vec<AnfPoly>) -> Result<Self> {
        for p in &polys {
            if p.var_bound() > n_vars {
                return Err(Error::VarOutOfRange {
                    index: p.var_bound(),
                    declared: n_vars,
                });
            }
            if p.degree() > 2 {
                return Err(Error::Invalid(format!(
                    "polynomial `{p}` has degree {} > 2",
                    p.degree()
                )));
            }
        }
        Ok(MqSystem { n_vars, polys })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn polys(&self) -> &[AnfPoly] {
        &self.polys
    }

    pub fn num_equations(&self) -> usize {
        self.polys.len()
    }

    /// Monomial count per equation.
    pub fn term_counts(&self) -> Vec<usize> {
        self.polys.iter().map(AnfPoly::num_terms).collect()
    }

    pub fn eval(&self, a: &Assignment) -> Result<Vec<bool>> {
        if a.len() != self.n_vars {
            return Err(Error::Dimension {
                expected: self.n_vars,
                got: a.len(),
            });
        }
        self.polys.iter().map(|p| p.eval(a)).collect()
    }

    pub fn is_solution(&self, a: &Assignment) -> Result<bool> {
        Ok(self.eval(a)?.iter().all(|&bit| !bit))
    }
}

/// Residual vector of the system at `a`; all zeros iff `a` is a solution.
pub fn eval_system(s: &MqSystem, a: &Assignment) -> Result<Vec<bool>> {
    s.eval(a)
}

/// All solutions by exhaustive enumeration of the `2^n` inputs, in index order.
pub fn brute_force_solutions(s: &MqSystem) -> Result<Vec<Assignment>> {
    brute_force_solutions_with(s, Parallelism::default())
}

pub fn brute_force_solutions_with(s: &MqSystem, mode: Parallelism) -> Result<Vec<Assignment>> {
    let n = s.n_vars;
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::LimitExceeded {
            what: "brute-force solver",
            requested: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let masks: Vec<Vec<u64>> = s
        .polys
        .iter()
        .map(|p| p.monomials().map(Monomial::mask).collect())
        .collect();
    let total = 1u64 << n;
    let chunk_bits = n.min(16);
    let chunk_len = 1u64 << chunk_bits;
    let chunks = (total / chunk_len) as usize;
    let found = map_indexed(mode, chunks, |c| {
        let start = c as u64 * chunk_len;
        (start..start + chunk_len)
            .filter(|&x| {
                masks.iter().all(|poly| {
                    poly.iter().filter(|&&m| x & m == m).count() % 2 == 0
                })
            })
            .collect::<Vec<u64>>()
    });
    Ok(found
        .into_iter()
        .flatten()
        .map(|x| Assignment::from_index(x, n))
        .collect())
}

/// A random system of `m` equations in `n` variables with a planted solution.
///
/// Every monomial of degree at most two is included with probability 1/2,
/// then the constant term of each equation that is 1 at the planted point is
/// flipped.
pub fn generate_planted(n: usize, m: usize, seed: u64) -> Result<(MqSystem, Assignment)> {
    if n < 2 || m < 1 {
        return Err(Error::Invalid(format!(
            "planted instances need n >= 2 and m >= 1 (got n={n}, m={m})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted = Assignment((0..n).map(|_| rng.random_bool(0.5)).collect());
    let candidates = all_quadratic_monomials(n);
    let mut polys = Vec::with_capacity(m);
    for _ in 0..m {
        let mut p = AnfPoly::from_monomials(
            candidates
                .iter()
                .filter(|_| rng.random_bool(0.5))
                .cloned(),
        );
        if p.eval(&planted)? {
            p.toggle(Monomial::one());
        }
        polys.push(p);
    }
    Ok((MqSystem::new(n, polys)?, planted))
}

/// A uniformly random degree-2 system with no planting (used for unsatisfiable corpora).
pub fn generate_random(n: usize, m: usize, seed: u64) -> Result<MqSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates = all_quadratic_monomials(n);
    let polys = (0..m)
        .map(|_| {
            AnfPoly::from_monomials(
                candidates
                    .iter()
                    .filter(|_| rng.random_bool(0.5))
                    .cloned(),
            )
        })
        .collect();
    MqSystem::new(n, polys)
}

/// The constant, the `n` linear and the `n(n-1)/2` quadratic monomials, in canonical order.
fn all_quadratic_monomials(n: usize) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    out.extend((0..n).map(|i| Monomial::var(VarId::from(i))));
    for i in 0..n {
        for j in i + 1..n {
            out.push(Monomial::pair(VarId::from(i), VarId::from(j)));
        }
    }
    out
}

/// Parses the instance format: a `vars <n>` header then one polynomial per line.
pub fn parse_system(text: &str) -> Result<MqSystem> {
    let mut n_vars: Option<usize> = None;
    let mut polys = Vec::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        match n_vars {
            None => n_vars = Some(parse_header(content, line_no)?),
            Some(n) => polys.push(parse_poly_line(content, line_no, n)?),
        }
    }
    let n_vars = n_vars.ok_or_else(|| Error::syntax(1, 1, "missing `vars <n>` header"))?;
    MqSystem::new(n_vars, polys)
}

fn parse_header(content: &str, line: usize) -> Result<usize> {
    let indent = content.len() - content.trim_start().len();
    let mut words = content.split_whitespace();
    if words.next() != Some("vars") {
        return Err(Error::syntax(line, indent + 1, "expected `vars <n>` header"));
    }
    let count = words
        .next()
        .ok_or_else(|| Error::syntax(line, content.trim_end().len() + 1, "missing variable count"))?;
    let n = count.parse::<usize>().map_err(|_| {
        let col = content.find(count).unwrap_or(0) + 1;
        Error::syntax(line, col, format!("invalid variable count {count:?}"))
    })?;
    if let Some(extra) = words.next() {
        let col = content.rfind(extra).unwrap_or(0) + 1;
        return Err(Error::syntax(line, col, "unexpected text after header"));
    }
    Ok(n)
}

fn parse_poly_line(content: &str, line: usize, n_vars: usize) -> Result<AnfPoly> {
    let mut poly = AnfPoly::zero();
    let mut offset = 0;
    for piece in content.split('+') {
        let lead = piece.len() - piece.trim_start().len();
        let term = piece.trim();
        let column = offset + lead + 1;
        offset += piece.len() + 1;
        if term.is_empty() {
            return Err(Error::syntax(line, column, "empty term"));
        }
        match term {
            "0" => {}
            "1" => poly.toggle(Monomial::one()),
            _ => poly.toggle(parse_product(term, line, column, n_vars)?),
        }
    }
    Ok(poly)
}

fn parse_product(term: &str, line: usize, column: usize, n_vars: usize) -> Result<Monomial> {
    let mut vars = Vec::new();
    let mut sub_offset = 0;
    for factor in term.split('*') {
        let lead = factor.len() - factor.trim_start().len();
        let col = column + sub_offset + lead;
        sub_offset += factor.len() + 1;
        let factor = factor.trim();
        let digits = factor
            .strip_prefix('x')
            .ok_or_else(|| Error::syntax(line, col, format!("expected a variable like `x1`, found {factor:?}")))?;
        let index: usize = digits
            .parse()
            .map_err(|_| Error::syntax(line, col, format!("invalid variable {factor:?}")))?;
        if index == 0 || index > n_vars {
            return Err(Error::VarOutOfRange {
                index,
                declared: n_vars,
            });
        }
        vars.push(VarId::from(index - 1));
    }
    match vars.as_slice() {
        [_] => Ok(Monomial::from_vars(vars)),
        [a, b] if a < b => Ok(Monomial::from_vars(vars)),
        [_, _] => Err(Error::syntax(
            line,
            column,
            format!("quadratic term {term:?} must be written x<i>*x<j> with i < j"),
        )),
        _ => Err(Error::syntax(line, column, format!("term {term:?} has degree above 2"))),
    }
}

/// Canonical text form; `parse_system(&format_system(s)) == s`.
pub fn format_system(s: &MqSystem) -> String {
    let mut out = format!("vars {}\n", s.n_vars);
    for p in &s.polys {
        out.push_str(&p.to_string());
        out.push('\n');
    }
    out
}

/// The 4-variable, 4-equation example system with solutions (1,0,1,0) and (0,0,1,1).
pub fn worked_example() -> MqSystem {
    parse_system(
        "vars 4\n\
         x1*x2 + x1*x3 + x1*x4 + x1 + x2*x3 + x2*x4 + x2 + x3*x4 + x4\n\
         x1*x2 + x1*x3 + x2 + x3*x4 + x3\n\
         x1*x2 + x1*x3 + x2*x3 + x2 + x3 + x4\n\
         x1*x3 + x2*x4 + x4 + 1\n",
    )
    .expect("worked example parses")
}
