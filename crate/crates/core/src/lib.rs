//! Boolean multivariate quadratic (MQ) systems as two-body QUBO Hamiltonians.
//!
//! The pipeline:
//!
//! * [`mq`] holds systems of quadratic polynomials over F2 (parse, evaluate,
//!   generate planted instances, brute-force solve).
//! * [`nnf`] rewrites XOR sums as integer-valued multilinear polynomials.
//! * [`quadratize`] reduces higher-order terms to two-body form with product
//!   ancillas and exact penalties.
//! * [`embed`] builds the direct, truncated and gate-penalty Hamiltonians and
//!   evaluates the logical-qubit resource formulas.
//! * [`qubo`] is the annealer-ready container with file formats.
//! * [`anneal`] samples with simulated annealing and holds the exact oracles.
//! * [`iterfix`] drives the iterative consensus-fixing search.
//!
//! ```
//! use mq_anneal::{anneal, embed, mq};
//!
//! let system = mq::parse_system("vars 2\nx1 + 1\nx1*x2 + x2\n").unwrap();
//! let embedding = embed::embed_truncated(&system, 4).unwrap();
//! let ground = anneal::exact_ground(&embedding.qubo).unwrap();
//! assert_eq!(ground.energy, 0);
//! ```

pub mod anneal;
pub mod embed;
pub mod error;
pub mod iterfix;
pub mod mq;
pub mod nnf;
pub mod par;
pub mod quadratize;
pub mod qubo;

pub use error::{Error, Result};
pub use par::Parallelism;

/// Exact rational numbers used by the resource formulas and the Ising form.
pub type Rational = num_rational::Ratio<i64>;
