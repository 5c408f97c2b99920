//! Exact truncated matrices for the generators `s_e` and `u`.
//!
//! The truncated space has one basis vector per path of length `1..=M`.
//! `V_e` prepends `e` (zero when incompatible or at the depth cap) and `U`
//! applies the successor map (zero on maximal paths). Identities between
//! operator words are verified only on *interior* vectors: those on which no
//! intermediate vector would need a path of length outside `1..=M`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Diagram, EdgeId};
use crate::dynamics::{enumerate_paths, vershik, Path};

pub mod embedding;
mod relations;
pub mod sparse;

pub use embedding::{phi_times_pi, sample_embedding_checks, EmbeddingReport};
pub use relations::{check_all, check_all_parallel, default_n_max};
pub use sparse::SparseMatrix;

/// Exact integer operator on the truncated space.
pub type TruncatedOperator = SparseMatrix<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("depth {0} is too small (need at least {1})")]
    DepthTooSmall(usize, usize),
    #[error("relation `{relation}` has an empty interior at depth {depth}")]
    EmptyInterior { relation: String, depth: usize },
    #[error("element has support at path length {level}, needs at most {max}")]
    DepthExceeded { level: usize, max: usize },
}

/// Paths of length `1..=M`: lengths ascending, enumeration order within a
/// length.
#[derive(Debug, Clone)]
pub struct TruncatedSpace {
    depth: usize,
    basis: Vec<Path>,
    index: HashMap<Path, usize>,
}

impl TruncatedSpace {
    pub fn new(d: &Diagram, depth: usize) -> Self {
        let basis: Vec<Path> = (1..=depth)
            .flat_map(|len| enumerate_paths(d, len, None))
            .collect();
        let index = basis
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Self {
            depth,
            basis,
            index,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Path] {
        &self.basis
    }

    pub fn path(&self, i: usize) -> &Path {
        &self.basis[i]
    }

    pub fn index_of(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }
}

/// The generator matrices on a truncated space.
#[derive(Debug, Clone)]
pub struct TruncatedModel {
    diagram: Diagram,
    space: TruncatedSpace,
    u: TruncatedOperator,
    u_adj: TruncatedOperator,
    v: Vec<TruncatedOperator>,
    v_adj: Vec<TruncatedOperator>,
}

/// Builds `U` and every `V_e` at depth `M`. `U` follows the diagram's
/// dynamics order, which differs from the declared order only for
/// deliberately corrupted inputs.
pub fn build_generators(d: &Diagram, depth: usize) -> Result<TruncatedModel, ModelError> {
    if depth < 2 {
        return Err(ModelError::DepthTooSmall(depth, 2));
    }
    let space = TruncatedSpace::new(d, depth);
    let dynamics = d.dynamics_order();
    let u_map: Vec<Option<usize>> = space
        .basis
        .iter()
        .map(|p| vershik(&dynamics, p).map(|q| space.index[&q]))
        .collect();
    let u = TruncatedOperator::from_partial_map(&u_map);
    let v: Vec<TruncatedOperator> = d
        .edge_ids()
        .map(|e| {
            let map: Vec<Option<usize>> = space
                .basis
                .iter()
                .map(|p| {
                    if p.len() >= depth {
                        return None;
                    }
                    p.prepend(d, e).map(|q| space.index[&q])
                })
                .collect();
            TruncatedOperator::from_partial_map(&map)
        })
        .collect();
    Ok(TruncatedModel {
        diagram: d.clone(),
        space,
        u_adj: u.transpose(),
        u,
        v_adj: v.iter().map(SparseMatrix::transpose).collect(),
        v,
    })
}

impl TruncatedModel {
    pub fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    pub fn space(&self) -> &TruncatedSpace {
        &self.space
    }

    pub fn depth(&self) -> usize {
        self.space.depth
    }

    pub fn u(&self) -> &TruncatedOperator {
        &self.u
    }

    pub fn v(&self, e: EdgeId) -> &TruncatedOperator {
        &self.v[e.0]
    }

    /// `π(n)`: `U^n` for `n >= 0`, `(U^*)^{|n|}` otherwise.
    pub fn pi(&self, n: i64) -> TruncatedOperator {
        let step = if n >= 0 { &self.u } else { &self.u_adj };
        (0..n.unsigned_abs()).fold(TruncatedOperator::identity(self.space.dim()), |acc, _| {
            step.mul(&acc)
        })
    }

    /// `s_f s_f^*` as a matrix product of the generators.
    pub fn range_projection(&self, f: &Path) -> TruncatedOperator {
        let s = self.word_matrix(f.edges());
        s.mul(&s.transpose())
    }

    /// `V_{w_1} V_{w_2} ... V_{w_k}`.
    pub fn word_matrix(&self, word: &[EdgeId]) -> TruncatedOperator {
        word.iter()
            .fold(TruncatedOperator::identity(self.space.dim()), |acc, e| {
                acc.mul(&self.v[e.0])
            })
    }

    /// Compares two operator sums on their common interior.
    pub fn check_relation(
        &self,
        id: &str,
        lhs: &OpSum,
        rhs: &OpSum,
    ) -> Result<RelationReport, ModelError> {
        let mut family = relations::Family::new(id);
        let mut eval = Evaluator::new(self);
        family.check(&mut eval, "", lhs, rhs);
        let report = family.finish();
        if report.interior == 0 {
            return Err(ModelError::EmptyInterior {
                relation: id.to_owned(),
                depth: self.depth(),
            });
        }
        Ok(report)
    }
}

/// Convenience wrapper building the model first.
pub fn check_relation(
    d: &Diagram,
    depth: usize,
    id: &str,
    lhs: &OpSum,
    rhs: &OpSum,
) -> Result<RelationReport, ModelError> {
    build_generators(d, depth)?.check_relation(id, lhs, rhs)
}

/// One factor of an operator word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Letter {
    U,
    UAdj,
    S(EdgeId),
    SAdj(EdgeId),
    /// `π(n)`.
    Pi(i64),
    /// `e_f = s_f s_f^*`, evaluated as one matrix.
    Proj(Path),
}

impl Letter {
    /// (lowest, highest, final) length offsets reached while applying the
    /// letter, relative to the input length.
    fn profile(&self) -> (i64, i64, i64) {
        match self {
            Letter::U | Letter::UAdj | Letter::Pi(_) => (0, 0, 0),
            Letter::S(_) => (1, 1, 1),
            Letter::SAdj(_) => (-1, -1, -1),
            Letter::Proj(f) => (-(f.len() as i64), 0, 0),
        }
    }

    fn render(&self, d: &Diagram) -> String {
        match self {
            Letter::U => "u".into(),
            Letter::UAdj => "u*".into(),
            Letter::S(e) => format!("s[{}]", d.edge_name(*e)),
            Letter::SAdj(e) => format!("s[{}]*", d.edge_name(*e)),
            Letter::Pi(n) => format!("π({n})"),
            Letter::Proj(f) => format!("e[{}]", f.display(d)),
        }
    }
}

/// A product of letters, written left to right; the rightmost acts first.
/// The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct OpWord(pub Vec<Letter>);

impl OpWord {
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        Self(letters.into_iter().collect())
    }

    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn render(&self, d: &Diagram) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0
            .iter()
            .map(|l| l.render(d))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Integer combination of words.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OpSum(pub Vec<(i64, OpWord)>);

impl OpSum {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn word(w: OpWord) -> Self {
        Self(vec![(1, w)])
    }

    pub fn letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        Self::word(OpWord::new(letters))
    }

    pub fn sum(words: impl IntoIterator<Item = OpWord>) -> Self {
        Self(words.into_iter().map(|w| (1, w)).collect())
    }

    pub fn render(&self, d: &Diagram) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        self.0
            .iter()
            .map(|(c, w)| match c {
                1 => w.render(d),
                _ => format!("{c}·{}", w.render(d)),
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Basis vectors of the truncated space on which `word` never leaves the
/// length range `1..=M`.
pub fn interior(word: &OpWord, space: &TruncatedSpace) -> Vec<usize> {
    let depth = space.depth as i64;
    (0..space.dim())
        .filter(|&i| word_fits(word, space.basis[i].len() as i64, depth))
        .collect()
}

fn word_fits(word: &OpWord, mut len: i64, depth: i64) -> bool {
    for letter in word.0.iter().rev() {
        let (lo, hi, net) = letter.profile();
        if len + lo < 1 || len + hi > depth {
            return false;
        }
        len += net;
    }
    true
}

/// A letter ready for evaluation. Every generator word used by the checks is
/// a partial permutation matrix, which is evaluated as an index lookup.
pub(crate) enum LetterOp {
    Map(Vec<Option<usize>>),
    Matrix(TruncatedOperator),
}

impl LetterOp {
    fn new(m: TruncatedOperator) -> Self {
        if m.is_partial_permutation_pattern() {
            LetterOp::Map(
                (0..m.dim())
                    .map(|j| m.column(j).first().map(|(i, _)| *i))
                    .collect(),
            )
        } else {
            LetterOp::Matrix(m)
        }
    }
}

/// A word with its letters in application order (rightmost first).
struct CompiledWord {
    coeff: i64,
    ops: Vec<Rc<LetterOp>>,
    lookups_only: bool,
}

pub(crate) struct CompiledSum(Vec<CompiledWord>);

/// Word evaluation with cached letter operators.
pub(crate) struct Evaluator<'m> {
    model: &'m TruncatedModel,
    pi: HashMap<i64, TruncatedOperator>,
    ops: HashMap<Letter, Rc<LetterOp>>,
}

impl<'m> Evaluator<'m> {
    pub(crate) fn new(model: &'m TruncatedModel) -> Self {
        Self {
            model,
            pi: HashMap::new(),
            ops: HashMap::new(),
        }
    }

    fn pi(&mut self, n: i64) -> &TruncatedOperator {
        if !self.pi.contains_key(&n) {
            let model = self.model;
            let m = if n == 0 {
                TruncatedOperator::identity(model.space.dim())
            } else {
                let toward_zero = n - n.signum();
                let step = if n > 0 { &model.u } else { &model.u_adj };
                step.mul(self.pi(toward_zero))
            };
            self.pi.insert(n, m);
        }
        &self.pi[&n]
    }

    fn op(&mut self, letter: &Letter) -> Rc<LetterOp> {
        if let Some(op) = self.ops.get(letter) {
            return Rc::clone(op);
        }
        let model = self.model;
        let m = match letter {
            Letter::U => model.u.clone(),
            Letter::UAdj => model.u_adj.clone(),
            Letter::S(e) => model.v[e.0].clone(),
            Letter::SAdj(e) => model.v_adj[e.0].clone(),
            Letter::Pi(n) => self.pi(*n).clone(),
            Letter::Proj(f) => model.range_projection(f),
        };
        let op = Rc::new(LetterOp::new(m));
        self.ops.insert(letter.clone(), Rc::clone(&op));
        op
    }

    pub(crate) fn compile(&mut self, sum: &OpSum) -> CompiledSum {
        CompiledSum(
            sum.0
                .iter()
                .map(|(c, w)| {
                    let ops: Vec<Rc<LetterOp>> = w.0.iter().rev().map(|l| self.op(l)).collect();
                    let lookups_only = ops.iter().all(|o| matches!(**o, LetterOp::Map(_)));
                    CompiledWord {
                        coeff: *c,
                        ops,
                        lookups_only,
                    }
                })
                .collect(),
        )
    }

    /// Image of basis vector `basis`, sorted by index, without zeros.
    pub(crate) fn eval(&self, sum: &CompiledSum, basis: usize, out: &mut Vec<(usize, i64)>) {
        out.clear();
        for word in &sum.0 {
            if word.lookups_only {
                let mut i = Some(basis);
                for op in &word.ops {
                    let LetterOp::Map(m) = &**op else {
                        unreachable!()
                    };
                    i = i.and_then(|i| m[i]);
                }
                if let Some(i) = i {
                    out.push((i, word.coeff));
                }
            } else {
                let mut v = vec![(basis, word.coeff)];
                for op in &word.ops {
                    v = match &**op {
                        LetterOp::Map(m) => v
                            .iter()
                            .filter_map(|&(i, c)| m[i].map(|j| (j, c)))
                            .collect(),
                        LetterOp::Matrix(m) => m.apply(&v),
                    };
                }
                out.extend(v);
            }
        }
        out.sort_unstable_by_key(|&(i, _)| i);
        out.dedup_by(|next, acc| {
            if next.0 == acc.0 {
                acc.1 += next.1;
                true
            } else {
                false
            }
        });
        out.retain(|&(_, c)| c != 0);
    }

    pub(crate) fn model(&self) -> &'m TruncatedModel {
        self.model
    }
}

/// A basis vector on which the two sides of a relation disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Which member of the relation family failed (empty for single
    /// relations).
    pub instance: String,
    pub path: String,
    pub lhs: BTreeMap<String, i64>,
    pub rhs: BTreeMap<String, i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Outcome of checking one relation family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub relation: String,
    /// Number of (instance, interior basis vector) evaluations.
    pub interior: usize,
    pub pass: bool,
    /// First disagreements, capped at [`MAX_COUNTEREXAMPLES`].
    pub counterexamples: Vec<Counterexample>,
    pub instances: usize,
    pub failures: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub const MAX_COUNTEREXAMPLES: usize = 20;

impl fmt::Display for RelationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {:<4} instances={:<6} interior={:<8}",
            self.relation,
            if self.pass { "ok" } else { "FAIL" },
            self.instances,
            self.interior
        )?;
        if self.failures > 0 {
            write!(f, " failures={}", self.failures)?;
        }
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}
