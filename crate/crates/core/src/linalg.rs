//! Exact rank of sparse rational vectors.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::Coeff;

pub type SparseVec = BTreeMap<usize, Coeff>;

/// Rank of the span of `vectors`, by Gaussian elimination over the rationals.
pub fn rank(vectors: impl IntoIterator<Item = SparseVec>) -> usize {
    // Reduced echelon form: pivot column -> row with a 1 there, and no pivot
    // row has a nonzero entry in another row's pivot column.
    let mut pivots: BTreeMap<usize, SparseVec> = BTreeMap::new();
    for mut v in vectors {
        let leads: Vec<usize> = v
            .keys()
            .filter(|c| pivots.contains_key(c))
            .copied()
            .collect();
        for lead in leads {
            let factor = match v.get(&lead) {
                Some(f) if !f.is_zero() => f.clone(),
                _ => continue,
            };
            axpy(&mut v, &factor, &pivots[&lead]);
        }
        v.retain(|_, c| !c.is_zero());
        let Some((&lead, c)) = v.iter().next() else {
            continue;
        };
        let inv = c.recip();
        for x in v.values_mut() {
            *x *= &inv;
        }
        for row in pivots.values_mut() {
            if let Some(f) = row.get(&lead).cloned() {
                axpy(row, &f, &v);
                row.retain(|_, c| !c.is_zero());
            }
        }
        pivots.insert(lead, v);
    }
    pivots.len()
}

/// `v -= factor * row`
fn axpy(v: &mut SparseVec, factor: &Coeff, row: &SparseVec) {
    for (col, c) in row {
        let entry = v.entry(*col).or_insert_with(Coeff::zero);
        *entry -= factor * c;
    }
}
