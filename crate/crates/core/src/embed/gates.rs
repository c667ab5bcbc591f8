//! Penalty polynomials for the gates of the circuit embedding.
//!
//! Each penalty is non-negative. Minimised over its internal ancillas it is
//! zero exactly when the output `z` matches the gate:
//!
//! | gate    | output                  | ancillas at zero         |
//! |---------|-------------------------|--------------------------|
//! | NOT     | `z = !x`                | none                     |
//! | CNOT    | `z = x_t ^ x_c`         | `a = x_c x_t`            |
//! | Toffoli | `z = x_t ^ x_c1 x_c2`   | `a2 = x_c1 x_c2`, `a1 = a2 x_t` |

use crate::mq::{Monomial, VarId};
use crate::nnf::IntPoly;

fn lin(v: VarId) -> Monomial {
    Monomial::var(v)
}

fn quad(a: VarId, b: VarId) -> Monomial {
    Monomial::pair(a, b)
}

/// `2 x z - x - z + 1`.
pub fn not_penalty(x: VarId, z: VarId) -> IntPoly {
    IntPoly::from_terms([(quad(x, z), 2), (lin(x), -1), (lin(z), -1), (Monomial::one(), 1)])
}

/// `2 c t - 2 (c + t) z - 4 (c + t) a + 4 z a + c + t + z + 4 a`.
pub fn cnot_penalty(c: VarId, t: VarId, z: VarId, a: VarId) -> IntPoly {
    IntPoly::from_terms([
        (quad(c, t), 2),
        (quad(c, z), -2),
        (quad(t, z), -2),
        (quad(c, a), -4),
        (quad(t, a), -4),
        (quad(z, a), 4),
        (lin(c), 1),
        (lin(t), 1),
        (lin(z), 1),
        (lin(a), 4),
    ])
}

/// `-4 a1 a2 + 4 a1 z - 4 a1 t - 2 a2 c1 - 2 a2 c2 - 2 a2 z + 2 a2 t + c1 c2
///  - 2 t z + 4 a1 + 4 a2 + z + t`.
///
/// This is the commonly printed Toffoli row with the missing operator read as
/// `-` and its `a1 c1` product read as `a2 c1`; the printed variant is not a
/// valid penalty (it is negative at `c1 = t = 1, c2 = z = 0`).
pub fn toffoli_penalty(c1: VarId, c2: VarId, t: VarId, z: VarId, a1: VarId, a2: VarId) -> IntPoly {
    IntPoly::from_terms([
        (quad(a1, a2), -4),
        (quad(a1, z), 4),
        (quad(a1, t), -4),
        (quad(a2, c1), -2),
        (quad(a2, c2), -2),
        (quad(a2, z), -2),
        (quad(a2, t), 2),
        (quad(c1, c2), 1),
        (quad(t, z), -2),
        (lin(a1), 4),
        (lin(a2), 4),
        (lin(z), 1),
        (lin(t), 1),
    ])
}
