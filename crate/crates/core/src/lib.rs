//! Stationary ordered Bratteli diagrams and the finite-dimensional shadows of
//! their operator algebras.
//!
//! * [`diagram`] and [`format`]: diagrams, substitutions, `.bd`/`.sub` files.
//! * [`dynamics`]: finite paths, the Vershik successor map, domains `P_n`.
//! * [`function_algebra`]: cylinder-indicator functions and the partial
//!   action on them.
//! * [`crossed_product`]: the finite-dimensional algebras `A_N` exhausting
//!   the partial crossed product, their blocks and inclusions.
//! * [`operator_model`]: exact truncated matrices for the generators `s_e`,
//!   `u` and automated relation checks.
//! * [`equivalence`]: equivalence of diagrams with checkable certificates.

#![forbid(unsafe_code)]

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::Zero;

pub mod crossed_product;
pub mod diagram;
pub mod dynamics;
pub mod equivalence;
pub mod format;
pub mod function_algebra;
pub mod linalg;
pub mod operator_model;

/// Exact scalar used for every coefficient.
pub type Coeff = num_rational::BigRational;

pub use diagram::{Diagram, DiagramError, EdgeId, Substitution, VertexId};
pub use dynamics::Path;

/// Adds `c` to the coefficient of `key`, dropping the key if it cancels.
pub(crate) fn add_coeff<K: Ord>(map: &mut BTreeMap<K, Coeff>, key: K, c: Coeff) {
    match map.entry(key) {
        Entry::Vacant(v) => {
            if !c.is_zero() {
                v.insert(c);
            }
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}
