//! `.qubo` coordinate-list text format and its JSON equivalent.
//!
//! ```text
//! qubo <n_vars> <offset>
//! # role <id> <role>
//! <i> <i> <linear coefficient>
//! <i> <j> <pairwise coefficient>     (i < j)
//! ```
//!
//! Indices are zero-based. Other `#` lines and blank lines are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Qubo;
use crate::embed::VarRole;
use crate::error::{Error, Result};
use crate::mq::VarId;

/// Variable roles carried alongside a QUBO.
pub type Registry = BTreeMap<VarId, VarRole>;

/// Canonical text form: header, role lines, linear entries, then pairwise entries.
pub fn write_qubo(q: &Qubo, registry: &Registry) -> String {
    let mut out = String::new();
    writeln!(out, "qubo {} {}", q.n_vars(), q.offset()).unwrap();
    for (id, role) in registry {
        writeln!(out, "# role {} {}", id.0, role).unwrap();
    }
    for (v, c) in q.linear() {
        writeln!(out, "{} {} {}", v.0, v.0, c).unwrap();
    }
    for ((a, b), c) in q.quadratic() {
        writeln!(out, "{} {} {}", a.0, b.0, c).unwrap();
    }
    out
}

pub fn read_qubo(text: &str) -> Result<(Qubo, Registry)> {
    let mut qubo: Option<Qubo> = None;
    let mut registry = Registry::new();
    let mut seen_linear = BTreeMap::new();
    let mut seen_pairs = BTreeMap::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim_start().strip_prefix("role ") {
                let (id, role) = parse_role_line(rest, line_no)?;
                if registry.insert(id, role).is_some() {
                    return Err(Error::syntax(line_no, 1, format!("duplicate role for variable {}", id.0)));
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Some(q) = qubo.as_mut() else {
            qubo = Some(parse_header(&fields, line_no)?);
            continue;
        };
        let [i, j, c] = fields[..] else {
            return Err(Error::syntax(line_no, 1, "expected `<i> <j> <coefficient>`"));
        };
        let i = parse_index(i, line_no, q.n_vars())?;
        let j = parse_index(j, line_no, q.n_vars())?;
        let c: i64 = c
            .parse()
            .map_err(|_| Error::syntax(line_no, 1, format!("invalid coefficient {c:?}")))?;
        if i == j {
            if let Some(first) = seen_linear.insert(i, line_no) {
                return Err(duplicate(line_no, first));
            }
            q.add_linear(i, c);
        } else {
            if i > j {
                return Err(Error::syntax(line_no, 1, "pairwise entries must have i < j"));
            }
            if let Some(first) = seen_pairs.insert((i, j), line_no) {
                return Err(duplicate(line_no, first));
            }
            q.add_quadratic(i, j, c);
        }
    }
    let q = qubo.ok_or_else(|| Error::syntax(1, 1, "missing `qubo <n_vars> <offset>` header"))?;
    if let Some((id, _)) = registry.iter().find(|(id, _)| id.index() >= q.n_vars()) {
        return Err(Error::VarOutOfRange {
            index: id.index(),
            declared: q.n_vars(),
        });
    }
    Ok((q, registry))
}

fn duplicate(line: usize, first: usize) -> Error {
    Error::syntax(line, 1, format!("duplicate entry (first given on line {first})"))
}

fn parse_header(fields: &[&str], line: usize) -> Result<Qubo> {
    match fields {
        ["qubo", n, offset] => {
            let n: usize = n
                .parse()
                .map_err(|_| Error::syntax(line, 1, format!("invalid variable count {n:?}")))?;
            let offset: i64 = offset
                .parse()
                .map_err(|_| Error::syntax(line, 1, format!("invalid offset {offset:?}")))?;
            let mut q = Qubo::new(n);
            q.set_offset(offset);
            Ok(q)
        }
        _ => Err(Error::syntax(line, 1, "expected `qubo <n_vars> <offset>` header")),
    }
}

fn parse_index(s: &str, line: usize, n_vars: usize) -> Result<VarId> {
    let index: usize = s
        .parse()
        .map_err(|_| Error::syntax(line, 1, format!("invalid variable index {s:?}")))?;
    if index >= n_vars {
        return Err(Error::VarOutOfRange {
            index,
            declared: n_vars,
        });
    }
    Ok(VarId::from(index))
}

fn parse_role_line(rest: &str, line: usize) -> Result<(VarId, VarRole)> {
    let rest = rest.trim();
    let (id, role) = rest
        .split_once(char::is_whitespace)
        .ok_or_else(|| Error::syntax(line, 1, "expected `# role <id> <role>`"))?;
    let id: u32 = id
        .parse()
        .map_err(|_| Error::syntax(line, 1, format!("invalid role id {id:?}")))?;
    let role = role
        .trim()
        .parse::<VarRole>()
        .map_err(|e| Error::syntax(line, 1, e.to_string()))?;
    Ok((VarId(id), role))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuboJson {
    n: usize,
    offset: i64,
    linear: Vec<(u32, i64)>,
    quadratic: Vec<(u32, u32, i64)>,
    #[serde(default)]
    roles: BTreeMap<u32, String>,
}

pub fn to_json(q: &Qubo, registry: &Registry) -> serde_json::Value {
    let doc = QuboJson {
        n: q.n_vars(),
        offset: q.offset(),
        linear: q.linear().iter().map(|(v, &c)| (v.0, c)).collect(),
        quadratic: q.quadratic().iter().map(|(&(a, b), &c)| (a.0, b.0, c)).collect(),
        roles: registry.iter().map(|(id, r)| (id.0, r.to_string())).collect(),
    };
    serde_json::to_value(doc).expect("QUBO document serializes")
}

pub fn from_json(value: &serde_json::Value) -> Result<(Qubo, Registry)> {
    let doc: QuboJson = serde_json::from_value(value.clone())?;
    let mut q = Qubo::new(doc.n);
    q.set_offset(doc.offset);
    let check = |i: u32| {
        if (i as usize) < doc.n {
            Ok(VarId(i))
        } else {
            Err(Error::VarOutOfRange {
                index: i as usize,
                declared: doc.n,
            })
        }
    };
    for (i, c) in doc.linear {
        q.add_linear(check(i)?, c);
    }
    for (i, j, c) in doc.quadratic {
        q.add_quadratic(check(i)?, check(j)?, c);
    }
    let mut registry = Registry::new();
    for (id, role) in doc.roles {
        registry.insert(check(id)?, role.parse()?);
    }
    Ok((q, registry))
}
