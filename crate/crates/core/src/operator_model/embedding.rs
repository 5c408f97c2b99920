//! The covariant pair `(φ, π)` on the truncated space.
//!
//! `1_f δ_n` is sent to `E_f π(n)`, where `E_f` is the diagonal projection
//! onto basis paths having `f` as a prefix (including `f` itself).

use std::collections::HashMap;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{build_generators, ModelError, SparseMatrix, TruncatedModel, TruncatedOperator};
use crate::crossed_product::{a_n_basis, cross_adjoint, cross_multiply, CrossedElement};
use crate::diagram::Diagram;
use crate::dynamics::Path;
use crate::linalg::{rank, SparseVec};
use crate::Coeff;

/// `(φ×π)(x)` as an exact rational matrix.
pub fn phi_times_pi(
    model: &TruncatedModel,
    x: &CrossedElement,
) -> Result<SparseMatrix<Coeff>, ModelError> {
    Embedder::new(model).image(x)
}

struct Embedder<'m> {
    model: &'m TruncatedModel,
    pi: HashMap<i64, TruncatedOperator>,
}

impl<'m> Embedder<'m> {
    fn new(model: &'m TruncatedModel) -> Self {
        Self {
            model,
            pi: HashMap::new(),
        }
    }

    fn image(&mut self, x: &CrossedElement) -> Result<SparseMatrix<Coeff>, ModelError> {
        let max = self.model.depth() - 1;
        if x.level() > max {
            return Err(ModelError::DepthExceeded {
                level: x.level(),
                max,
            });
        }
        let space = self.model.space();
        let mut triplets = Vec::new();
        for ((f, n), c) in x.terms() {
            let model = self.model;
            let pi = self.pi.entry(*n).or_insert_with(|| model.pi(*n));
            for (i, j, v) in pi.entries() {
                if space.path(i).starts_with(f) {
                    triplets.push((i, j, c * Coeff::from_integer(BigInt::from(*v))));
                }
            }
        }
        Ok(SparseMatrix::from_triplets(space.dim(), triplets))
    }
}

/// Linear independence of the images of the basis of `A_N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceCheck {
    #[serde(rename = "N")]
    pub level: usize,
    pub basis_size: usize,
    pub rank: usize,
    pub pass: bool,
}

/// A pair on which `φ×π` failed to respect products or adjoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingFailure {
    pub check: String,
    pub x: String,
    pub y: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub depth: usize,
    pub seed: u64,
    pub samples: usize,
    pub max_level: usize,
    pub unit_is_identity: bool,
    pub multiplicative: usize,
    pub adjoint_compatible: usize,
    pub failures: Vec<EmbeddingFailure>,
    pub independence: Vec<IndependenceCheck>,
    pub pass: bool,
}

/// Seeded random checks of multiplicativity and adjoint compatibility on
/// elements of `A_N`, `N <= min(4, M - 2)`, plus exact rank of the basis
/// images at every such `N`.
pub fn sample_embedding_checks(
    d: &Diagram,
    depth: usize,
    samples: usize,
    seed: u64,
) -> Result<EmbeddingReport, ModelError> {
    if depth < 3 {
        return Err(ModelError::DepthTooSmall(depth, 3));
    }
    let model = build_generators(d, depth)?;
    let mut embed = Embedder::new(&model);
    let max_level = 4.min(depth - 2);
    let bases: Vec<Vec<(Path, i64)>> = (1..=max_level).map(|n| a_n_basis(d, n)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let unit = embed.image(&CrossedElement::unit(d, 1))?;
    let unit_is_identity = unit == SparseMatrix::identity(model.space().dim());

    let mut failures = Vec::new();
    let (mut multiplicative, mut adjoint_compatible) = (0, 0);
    for _ in 0..samples {
        let basis = &bases[rng.gen_range(0..max_level)];
        let x = random_element(d, basis, &mut rng);
        let y = random_element(d, basis, &mut rng);
        let (px, py) = (embed.image(&x)?, embed.image(&y)?);
        if embed.image(&cross_multiply(d, &x, &y))? == px.mul(&py) {
            multiplicative += 1;
        } else {
            failures.push(EmbeddingFailure {
                check: "multiplicative".into(),
                x: x.display(d),
                y: Some(y.display(d)),
            });
        }
        if embed.image(&cross_adjoint(d, &x))? == px.transpose() {
            adjoint_compatible += 1;
        } else {
            failures.push(EmbeddingFailure {
                check: "adjoint".into(),
                x: x.display(d),
                y: None,
            });
        }
    }

    let mut independence = Vec::new();
    for (i, basis) in bases.iter().enumerate() {
        let dim = model.space().dim();
        let mut vectors = Vec::with_capacity(basis.len());
        for (f, n) in basis {
            let x = CrossedElement::basis(d, f, *n).expect("basis elements lie in their domains");
            let m = embed.image(&x)?;
            let v: SparseVec = m
                .entries()
                .map(|(r, c, val)| (r * dim + c, val.clone()))
                .collect();
            vectors.push(v);
        }
        let r = rank(vectors);
        independence.push(IndependenceCheck {
            level: i + 1,
            basis_size: basis.len(),
            rank: r,
            pass: r == basis.len(),
        });
    }

    let pass = unit_is_identity && failures.is_empty() && independence.iter().all(|c| c.pass);
    Ok(EmbeddingReport {
        depth,
        seed,
        samples,
        max_level,
        unit_is_identity,
        multiplicative,
        adjoint_compatible,
        failures,
        independence,
        pass,
    })
}

/// One to three distinct basis symbols with coefficients in `[-3, 3] \ {0}`.
fn random_element(d: &Diagram, basis: &[(Path, i64)], rng: &mut ChaCha8Rng) -> CrossedElement {
    let k = rng.gen_range(1..=3usize).min(basis.len());
    let terms = basis.choose_multiple(rng, k).map(|(f, n)| {
        let mut c: i64 = rng.gen_range(1..=3);
        if rng.gen_bool(0.5) {
            c = -c;
        }
        ((f.clone(), *n), Coeff::from_integer(BigInt::from(c)))
    });
    let terms: Vec<_> = terms.collect();
    CrossedElement::from_terms(d, terms).expect("basis elements lie in their domains")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_diagram;

    fn fib() -> Diagram {
        parse_diagram("vertices: a b\nedge: A1 a -> a rank 0\nedge: A2 b -> a rank 1\nedge: B1 a -> b rank 0\n")
            .unwrap()
    }

    #[test]
    fn projection_and_shift_images() {
        let d = fib();
        let model = build_generators(&d, 4).unwrap();
        let space = model.space();
        let a1 = Path::parse(&d, "A1").unwrap();
        let p = phi_times_pi(&model, &CrossedElement::basis(&d, &a1, 0).unwrap()).unwrap();
        assert!(p.is_diagonal());
        let expected: Vec<usize> = (0..space.dim())
            .filter(|&i| space.path(i).starts_with(&a1))
            .collect();
        let got: Vec<usize> = p.entries().map(|(i, _, _)| i).collect();
        assert_eq!(got, expected);

        let f = Path::parse(&d, "A2,A1").unwrap();
        let m = phi_times_pi(&model, &CrossedElement::basis(&d, &f, 1).unwrap()).unwrap();
        assert!(m.is_partial_permutation_pattern());
        for (i, j, _) in m.entries() {
            let (row, col) = (space.path(i), space.path(j));
            assert!(row.starts_with(&f));
            assert_eq!(
                col.edges()[..2],
                Path::parse(&d, "A1,A1").unwrap().edges()[..]
            );
            assert_eq!(row.edges()[2..], col.edges()[2..]);
        }
        assert!(m.nnz() > 0);

        let unit = phi_times_pi(&model, &CrossedElement::unit(&d, 1)).unwrap();
        assert_eq!(unit, SparseMatrix::identity(space.dim()));
    }

    #[test]
    fn depth_is_enforced() {
        let d = fib();
        let model = build_generators(&d, 3).unwrap();
        let f = Path::parse(&d, "A1,A1,A1").unwrap();
        let err = phi_times_pi(&model, &CrossedElement::basis(&d, &f, 0).unwrap()).unwrap_err();
        assert_eq!(err, ModelError::DepthExceeded { level: 3, max: 2 });
    }

    #[test]
    fn seeded_report_is_deterministic_and_passes() {
        let d = fib();
        let a = sample_embedding_checks(&d, 5, 30, 7).unwrap();
        let b = sample_embedding_checks(&d, 5, 30, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.pass, "{a:?}");
        assert_eq!(
            a.independence
                .iter()
                .map(|c| c.basis_size)
                .collect::<Vec<_>>(),
            [5, 13, 34]
        );
    }
}
