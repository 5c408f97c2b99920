//! The finite-dimensional filtration of the partial crossed product.
//!
//! `A_N` is spanned by the symbols `1_f δ_n` with `|f| = N` and `f ∈ P_n`.
//! Products and adjoints follow
//!
//! ```text
//! 1_f δ_n · 1_g δ_m = [λ^{-n}(f) = g] 1_f δ_{n+m}
//! (1_f δ_n)^*      = 1_{λ^{-n}(f)} δ_{-n}
//! ```
//!
//! The length-`N` paths ending at a vertex `v` form one λ-chain, and the
//! elements `E_{f,g} = 1_f δ_{pos(f)-pos(g)}` indexed by chain positions are
//! a system of matrix units, so `A_N` is a direct sum of full matrix algebras,
//! one block per vertex.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Diagram, VertexId};
use crate::dynamics::{
    backward_reach, enumerate_paths, forward_reach, in_p_n, iterate, minimal_path_into, vershik,
    Path,
};
use crate::{add_coeff, Coeff};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrossedError {
    #[error("path `{path}` is not in P_{n}")]
    NotInDomain { path: String, n: i64 },
}

/// A finite linear combination of symbols `1_f δ_n`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CrossedElement {
    terms: BTreeMap<(Path, i64), Coeff>,
}

impl CrossedElement {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `1_f δ_n`; requires `f ∈ P_n`.
    pub fn basis(d: &Diagram, f: &Path, n: i64) -> Result<Self, CrossedError> {
        Self::from_terms(d, [((f.clone(), n), Coeff::one())])
    }

    pub fn from_terms(
        d: &Diagram,
        terms: impl IntoIterator<Item = ((Path, i64), Coeff)>,
    ) -> Result<Self, CrossedError> {
        let mut out = Self::zero();
        for ((f, n), c) in terms {
            if !in_p_n(d, &f, n) {
                return Err(CrossedError::NotInDomain {
                    path: f.display(d).to_string(),
                    n,
                });
            }
            add_coeff(&mut out.terms, (f, n), c);
        }
        Ok(out)
    }

    /// `Σ_f 1_f δ_0` over all paths of length `level`.
    pub fn unit(d: &Diagram, level: usize) -> Self {
        Self {
            terms: enumerate_paths(d, level, None)
                .into_iter()
                .map(|f| ((f, 0), Coeff::one()))
                .collect(),
        }
    }

    pub fn terms(&self) -> &BTreeMap<(Path, i64), Coeff> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest path length among the terms (0 for the zero element).
    pub fn level(&self) -> usize {
        self.terms.keys().map(|(f, _)| f.len()).max().unwrap_or(0)
    }

    pub fn add(&self, d: &Diagram, other: &Self) -> Self {
        let level = self.level().max(other.level());
        let mut out = self.refine_to(d, level);
        for (k, c) in other.refine_to(d, level).terms {
            add_coeff(&mut out.terms, k, c);
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Rewrites every term at path length `level` using
    /// `1_f δ_n = Σ_{i(e)=t(f)} 1_{fe} δ_n`.
    pub fn refine_to(&self, d: &Diagram, level: usize) -> Self {
        let mut out = Self::zero();
        for ((f, n), c) in &self.terms {
            assert!(f.len() <= level, "cannot coarsen a crossed element");
            let mut frontier = vec![f.clone()];
            while frontier[0].len() < level {
                frontier = frontier
                    .iter()
                    .flat_map(|p| {
                        d.outgoing(p.target(d))
                            .iter()
                            .map(move |&e| p.extend(d, e).expect("outgoing edges compose"))
                    })
                    .collect();
            }
            for g in frontier {
                add_coeff(&mut out.terms, (g, *n), c.clone());
            }
        }
        out
    }

    pub fn display(&self, d: &Diagram) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|((f, n), c)| format!("{c}·1[{}]δ{n}", f.display(d)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Bilinear extension of `1_f δ_n · 1_g δ_m = [λ^{-n}(f) = g] 1_f δ_{n+m}`,
/// after refining both factors to a common path length.
pub fn cross_multiply(d: &Diagram, x: &CrossedElement, y: &CrossedElement) -> CrossedElement {
    let level = x.level().max(y.level());
    let x = x.refine_to(d, level);
    let y = y.refine_to(d, level);
    let mut by_path: BTreeMap<&Path, Vec<(i64, &Coeff)>> = BTreeMap::new();
    for ((g, m), c) in &y.terms {
        by_path.entry(g).or_default().push((*m, c));
    }
    let mut out = CrossedElement::zero();
    for ((f, n), a) in &x.terms {
        let Some(g) = iterate(d, f, -n) else {
            continue;
        };
        for &(m, b) in by_path.get(&g).map(Vec::as_slice).unwrap_or(&[]) {
            debug_assert!(in_p_n(d, f, n + m), "product left the domain P_{}", n + m);
            add_coeff(&mut out.terms, (f.clone(), n + m), a * b);
        }
    }
    out
}

/// Conjugate-linear extension of `(1_f δ_n)^* = 1_{λ^{-n}(f)} δ_{-n}`.
/// Coefficients are real, so conjugation is the identity on them.
pub fn cross_adjoint(d: &Diagram, x: &CrossedElement) -> CrossedElement {
    let mut out = CrossedElement::zero();
    for ((f, n), c) in &x.terms {
        let g = iterate(d, f, -n).expect("terms satisfy f ∈ P_n");
        add_coeff(&mut out.terms, (g, -n), c.clone());
    }
    out
}

/// All `(f, n)` with `|f| = N` and `f ∈ P_n`, paths in enumeration order and
/// `n` ascending.
pub fn a_n_basis(d: &Diagram, level: usize) -> Vec<(Path, i64)> {
    let mut out = Vec::new();
    for f in enumerate_paths(d, level, None) {
        // f ∈ P_n iff -forward(f) <= n <= backward(f)
        let lo = -(forward_reach(d, &f) as i64);
        let hi = backward_reach(d, &f) as i64;
        out.extend((lo..=hi).map(|n| (f.clone(), n)));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub vertex: VertexId,
    /// Length-`N` paths ending at `vertex`, in λ order from the minimal path.
    pub chain: Vec<Path>,
}

impl Block {
    pub fn size(&self) -> usize {
        self.chain.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub level: usize,
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::size).collect()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size() * b.size()).sum()
    }

    /// `E_{i,j} = 1_{chain[i]} δ_{i-j}` in block `block`.
    pub fn matrix_unit(&self, block: usize, i: usize, j: usize) -> CrossedElement {
        let f = self.blocks[block].chain[i].clone();
        let mut terms = BTreeMap::new();
        terms.insert((f, i as i64 - j as i64), Coeff::one());
        CrossedElement { terms }
    }

    /// Block index and chain position of `f`.
    pub fn locate(&self, f: &Path) -> Option<(usize, usize)> {
        self.blocks
            .iter()
            .enumerate()
            .find_map(|(b, block)| block.chain.iter().position(|g| g == f).map(|i| (b, i)))
    }
}

/// One block per vertex: the λ-chain of length-`N` paths ending there.
pub fn block_decomposition(d: &Diagram, level: usize) -> BlockDecomposition {
    let blocks = d
        .vertices()
        .map(|v| {
            let mut chain = vec![minimal_path_into(d, v, level)];
            while let Some(next) = vershik(d, chain.last().expect("non-empty")) {
                chain.push(next);
            }
            Block { vertex: v, chain }
        })
        .collect();
    BlockDecomposition { level, blocks }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InclusionData {
    pub level: usize,
    /// `multiplicity[v][w]`: copies of block `v` of `A_N` inside block `w` of
    /// `A_{N+1}`.
    pub multiplicity: Vec<Vec<u64>>,
    pub from_sizes: Vec<usize>,
    pub to_sizes: Vec<usize>,
}

impl InclusionData {
    /// `p_{N+1}(w) = Σ_v mult(v, w) p_N(v)` for every `w`.
    pub fn recursion_holds(&self) -> bool {
        self.to_sizes.iter().enumerate().all(|(w, &size)| {
            let sum: u64 = self
                .from_sizes
                .iter()
                .enumerate()
                .map(|(v, &p)| self.multiplicity[v][w] * p as u64)
                .sum();
            sum == size as u64
        })
    }
}

/// The inclusion `A_N → A_{N+1}`, `1_f δ_n ↦ Σ_{i(e)=t(f)} 1_{fe} δ_n`.
pub fn embed(d: &Diagram, x: &CrossedElement) -> CrossedElement {
    x.refine_to(d, x.level() + 1)
}

/// Multiplicities of `A_N ⊆ A_{N+1}`, read off the embedding: the image of a
/// minimal projection of block `v` splits into minimal projections, and the
/// number landing in block `w` is the multiplicity.
pub fn inclusion(d: &Diagram, level: usize) -> InclusionData {
    let from = block_decomposition(d, level);
    let to = block_decomposition(d, level + 1);
    let mut multiplicity = vec![vec![0u64; to.blocks.len()]; from.blocks.len()];
    for (v, block) in from.blocks.iter().enumerate() {
        let image = embed(d, &from.matrix_unit(v, 0, 0));
        for ((g, n), c) in image.terms() {
            debug_assert!(*n == 0 && c.is_one());
            let (w, _) = to.locate(g).expect("every path lies in some block");
            multiplicity[v][w] += 1;
        }
        debug_assert!(block.size() > 0);
    }
    InclusionData {
        level,
        multiplicity,
        from_sizes: from.sizes(),
        to_sizes: to.sizes(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerLevel {
    pub blocks: BlockDecomposition,
    pub inclusion: InclusionData,
}

/// Levels `N = 1..=levels` of the AF tower.
pub fn af_tower(d: &Diagram, levels: usize) -> Vec<TowerLevel> {
    (1..=levels).map(|n| tower_level(d, n)).collect()
}

/// [`af_tower`] with the levels computed concurrently.
pub fn af_tower_parallel(d: &Diagram, levels: usize) -> Vec<TowerLevel> {
    (1..=levels)
        .into_par_iter()
        .map(|n| tower_level(d, n))
        .collect()
}

fn tower_level(d: &Diagram, n: usize) -> TowerLevel {
    TowerLevel {
        blocks: block_decomposition(d, n),
        inclusion: inclusion(d, n),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerDoc {
    pub levels: Vec<TowerLevelDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerLevelDoc {
    #[serde(rename = "N")]
    pub level: usize,
    pub blocks: Vec<BlockDoc>,
    pub dim: usize,
    /// Rows: blocks of this level; columns: blocks of the next level.
    pub mult: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDoc {
    pub vertex: String,
    pub size: usize,
}

pub fn tower_doc(d: &Diagram, tower: &[TowerLevel]) -> TowerDoc {
    TowerDoc {
        levels: tower
            .iter()
            .map(|t| TowerLevelDoc {
                level: t.blocks.level,
                blocks: t
                    .blocks
                    .blocks
                    .iter()
                    .map(|b| BlockDoc {
                        vertex: d.vertex_name(b.vertex).to_owned(),
                        size: b.size(),
                    })
                    .collect(),
                dim: t.blocks.dim(),
                mult: t.inclusion.multiplicity.clone(),
            })
            .collect(),
    }
}

/// Graphviz rendering of the tower: one node per block labelled with its
/// size, one edge per unit of multiplicity between consecutive levels.
pub fn tower_dot(d: &Diagram, tower: &[TowerLevel]) -> String {
    let mut out = String::from("digraph af_tower {\n  rankdir=TB;\n  node [shape=circle];\n");
    for t in tower {
        let n = t.blocks.level;
        let _ = writeln!(out, "  subgraph level_{n} {{ rank=same;");
        for b in &t.blocks.blocks {
            let _ = writeln!(
                out,
                "    \"{n}:{v}\" [label=\"{size}\", xlabel=\"{v}\"];",
                v = d.vertex_name(b.vertex),
                size = b.size()
            );
        }
        out.push_str("  }\n");
    }
    for t in tower.iter().take(tower.len().saturating_sub(1)) {
        let n = t.blocks.level;
        for (v, row) in t.inclusion.multiplicity.iter().enumerate() {
            for (w, &k) in row.iter().enumerate() {
                for _ in 0..k {
                    let _ = writeln!(
                        out,
                        "  \"{n}:{}\" -> \"{}:{}\";",
                        d.vertex_name(VertexId(v)),
                        n + 1,
                        d.vertex_name(VertexId(w))
                    );
                }
            }
        }
    }
    out.push_str("}\n");
    out
}
