//! Stationary ordered Bratteli diagrams.
//!
//! A stationary diagram repeats one vertex set and one edge set on every
//! level, so a [`Diagram`] stores a single copy of each. Edges are ordered
//! inside their *fiber*, the set of edges sharing a terminal vertex; two edges
//! are comparable exactly when they live in the same fiber.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Dense index of a vertex, in the order the vertices were declared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

/// Dense index of an edge, in the order the edges were declared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    /// User-facing identifier, unique within the diagram.
    pub name: String,
    /// Initial vertex `i(e)`.
    pub source: VertexId,
    /// Terminal vertex `t(e)`.
    pub target: VertexId,
    /// Position of the edge inside the fiber of its target.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("{}unknown vertex `{name}`", line_prefix(*.line))]
    UnknownVertex { name: String, line: Option<usize> },
    #[error("{}duplicate vertex `{name}`", line_prefix(*.line))]
    DuplicateVertex { name: String, line: Option<usize> },
    #[error("{}duplicate edge id `{id}`", line_prefix(*.line))]
    DuplicateEdgeId { id: String, line: Option<usize> },
    #[error("edge id `{id}` may not be empty or contain ',', '#' or whitespace")]
    BadEdgeId { id: String },
    #[error("fiber of vertex `{vertex}` has {kind} ranks {ranks:?}; expected 0..{len}", len = .ranks.len())]
    BadRankSet {
        vertex: String,
        kind: &'static str,
        ranks: Vec<usize>,
    },
    #[error("vertex `{vertex}` has no {missing} edge")]
    SinkOrSource {
        vertex: String,
        missing: &'static str,
    },
    #[error("diagram has no vertices")]
    Empty,
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("substitution: {0}")]
    Substitution(String),
}

fn line_prefix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!("line {l}: "),
        None => String::new(),
    }
}

/// Raw edge description, resolved and validated by [`Diagram::new`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    pub name: String,
    pub source: String,
    pub target: String,
    pub rank: usize,
    /// Stale rank used only to drive the successor operator of the truncated
    /// model. Present only in deliberately corrupted inputs.
    pub lambda_rank: Option<usize>,
    /// Source line, for diagnostics.
    pub line: Option<usize>,
}

impl EdgeSpec {
    pub fn new(name: &str, source: &str, target: &str, rank: usize) -> Self {
        Self {
            name: name.to_owned(),
            source: source.to_owned(),
            target: target.to_owned(),
            rank,
            lambda_rank: None,
            line: None,
        }
    }
}

/// Minimal and maximal edges, one of each per fiber, listed by target vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalEdges {
    pub minimal: Vec<EdgeId>,
    pub maximal: Vec<EdgeId>,
}

/// A validated stationary ordered Bratteli diagram. Immutable once built.
#[derive(Debug, Clone)]
pub struct Diagram {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    fibers: Vec<Vec<EdgeId>>,
    outgoing: Vec<Vec<EdgeId>>,
    vertex_index: BTreeMap<String, VertexId>,
    edge_index: BTreeMap<String, EdgeId>,
    lambda_ranks: Option<Vec<usize>>,
}

impl Diagram {
    /// Builds a diagram, checking every structural invariant: dense fiber
    /// ranks, unique ids, and no vertex without incoming or outgoing edges.
    pub fn new(vertices: Vec<String>, edges: Vec<EdgeSpec>) -> Result<Self, DiagramError> {
        Self::build(vertices, edges, None)
    }

    fn build(
        vertices: Vec<String>,
        specs: Vec<EdgeSpec>,
        vertex_lines: Option<usize>,
    ) -> Result<Self, DiagramError> {
        if vertices.is_empty() {
            return Err(DiagramError::Empty);
        }
        let mut vertex_index = BTreeMap::new();
        for (i, name) in vertices.iter().enumerate() {
            if vertex_index.insert(name.clone(), VertexId(i)).is_some() {
                return Err(DiagramError::DuplicateVertex {
                    name: name.clone(),
                    line: vertex_lines,
                });
            }
        }

        let mut edges = Vec::with_capacity(specs.len());
        let mut edge_index = BTreeMap::new();
        let mut lambda = Vec::with_capacity(specs.len());
        let mut any_lambda = false;
        for spec in &specs {
            if !is_valid_edge_id(&spec.name) {
                return Err(DiagramError::BadEdgeId {
                    id: spec.name.clone(),
                });
            }
            let resolve = |name: &str| {
                vertex_index
                    .get(name)
                    .copied()
                    .ok_or_else(|| DiagramError::UnknownVertex {
                        name: name.to_owned(),
                        line: spec.line,
                    })
            };
            let source = resolve(&spec.source)?;
            let target = resolve(&spec.target)?;
            let id = EdgeId(edges.len());
            if edge_index.insert(spec.name.clone(), id).is_some() {
                return Err(DiagramError::DuplicateEdgeId {
                    id: spec.name.clone(),
                    line: spec.line,
                });
            }
            any_lambda |= spec.lambda_rank.is_some();
            lambda.push(spec.lambda_rank.unwrap_or(spec.rank));
            edges.push(Edge {
                name: spec.name.clone(),
                source,
                target,
                rank: spec.rank,
            });
        }

        let fibers = order_fibers(&vertices, &edges, |e| edges[e.0].rank, "rank")?;
        let mut outgoing = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            outgoing[e.source.0].push(EdgeId(i));
        }
        for (v, name) in vertices.iter().enumerate() {
            if fibers[v].is_empty() {
                return Err(DiagramError::SinkOrSource {
                    vertex: name.clone(),
                    missing: "incoming",
                });
            }
            if outgoing[v].is_empty() {
                return Err(DiagramError::SinkOrSource {
                    vertex: name.clone(),
                    missing: "outgoing",
                });
            }
        }

        let lambda_ranks = if any_lambda && lambda.iter().zip(&edges).any(|(l, e)| *l != e.rank) {
            order_fibers(&vertices, &edges, |e| lambda[e.0], "lambda-rank")?;
            Some(lambda)
        } else {
            None
        };

        Ok(Self {
            vertices,
            edges,
            fibers,
            outgoing,
            vertex_index,
            edge_index,
            lambda_ranks,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl ExactSizeIterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertex_index.get(name).copied()
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.0].name
    }

    pub fn edge_by_name(&self, name: &str) -> Result<EdgeId, DiagramError> {
        self.edge_index
            .get(name)
            .copied()
            .ok_or_else(|| DiagramError::UnknownEdge(name.to_owned()))
    }

    pub fn source(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].source
    }

    pub fn target(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].target
    }

    /// Rank-ordered edges with terminal vertex `v`.
    pub fn fiber(&self, v: VertexId) -> &[EdgeId] {
        &self.fibers[v.0]
    }

    /// Edges with initial vertex `v`, in declaration order.
    pub fn outgoing(&self, v: VertexId) -> &[EdgeId] {
        &self.outgoing[v.0]
    }

    pub fn is_max(&self, e: EdgeId) -> bool {
        let edge = &self.edges[e.0];
        edge.rank + 1 == self.fibers[edge.target.0].len()
    }

    pub fn is_min(&self, e: EdgeId) -> bool {
        self.edges[e.0].rank == 0
    }

    pub fn min_edge_into(&self, v: VertexId) -> EdgeId {
        self.fibers[v.0][0]
    }

    pub fn max_edge_into(&self, v: VertexId) -> EdgeId {
        *self.fibers[v.0].last().expect("fibers are non-empty")
    }

    /// The next edge of the same fiber, or `None` for the fiber maximum.
    pub fn successor_edge(&self, e: EdgeId) -> Option<EdgeId> {
        let edge = &self.edges[e.0];
        self.fibers[edge.target.0].get(edge.rank + 1).copied()
    }

    /// The previous edge of the same fiber, or `None` for the fiber minimum.
    pub fn predecessor_edge(&self, e: EdgeId) -> Option<EdgeId> {
        let edge = &self.edges[e.0];
        edge.rank
            .checked_sub(1)
            .map(|r| self.fibers[edge.target.0][r])
    }

    /// Name-level successor lookup.
    pub fn successor_by_name(&self, name: &str) -> Result<Option<EdgeId>, DiagramError> {
        Ok(self.successor_edge(self.edge_by_name(name)?))
    }

    pub fn extremal_edges(&self) -> ExtremalEdges {
        ExtremalEdges {
            minimal: self.vertices().map(|v| self.min_edge_into(v)).collect(),
            maximal: self.vertices().map(|v| self.max_edge_into(v)).collect(),
        }
    }

    /// Entry `[u][w]` counts edges with source `u` and target `w`
    /// (rows are sources, columns are targets).
    pub fn incidence_matrix(&self) -> Vec<Vec<u64>> {
        let n = self.vertex_count();
        let mut m = vec![vec![0u64; n]; n];
        for e in &self.edges {
            m[e.source.0][e.target.0] += 1;
        }
        m
    }

    /// Whether some power of the incidence matrix is strictly positive.
    pub fn is_primitive(&self) -> bool {
        let n = self.vertex_count();
        let adj: Vec<Vec<bool>> = self
            .incidence_matrix()
            .into_iter()
            .map(|row| row.into_iter().map(|x| x > 0).collect())
            .collect();
        // Wielandt: if primitive, the power (n-1)^2 + 1 is already positive.
        let limit = (n - 1) * (n - 1) + 1;
        let mut power = adj.clone();
        for _ in 1..limit {
            power = bool_product(&power, &adj);
        }
        power.iter().all(|row| row.iter().all(|&x| x))
    }

    /// Whether the file carried stale `lambda-rank` data disagreeing with the
    /// declared ranks.
    pub fn has_stale_order(&self) -> bool {
        self.lambda_ranks.is_some()
    }

    pub(crate) fn lambda_rank(&self, e: EdgeId) -> Option<usize> {
        self.lambda_ranks.as_ref().map(|r| r[e.0])
    }

    /// The diagram whose order drives the successor operator `U` of the
    /// truncated model. Equal to `self` unless stale ranks were supplied.
    pub fn dynamics_order(&self) -> Diagram {
        match &self.lambda_ranks {
            None => self.clone(),
            Some(ranks) => {
                let specs = self
                    .edges
                    .iter()
                    .zip(ranks)
                    .map(|(e, &r)| {
                        EdgeSpec::new(
                            &e.name,
                            self.vertex_name(e.source),
                            self.vertex_name(e.target),
                            r,
                        )
                    })
                    .collect();
                Diagram::new(self.vertices.clone(), specs)
                    .expect("stale ranks were validated at construction")
            }
        }
    }

    pub(crate) fn with_vertex_line(
        vertices: Vec<String>,
        edges: Vec<EdgeSpec>,
        line: usize,
    ) -> Result<Self, DiagramError> {
        Self::build(vertices, edges, Some(line))
    }
}

impl PartialEq for Diagram {
    /// Structural equality: same vertex sequence, same edges by id. Internal
    /// edge indices depend on declaration order and are ignored.
    fn eq(&self, other: &Self) -> bool {
        if self.vertices != other.vertices || self.edges.len() != other.edges.len() {
            return false;
        }
        self.edges.iter().enumerate().all(|(i, e)| {
            other.edge_index.get(&e.name).is_some_and(|&j| {
                other.edges[j.0] == *e && other.lambda_rank(j) == self.lambda_rank(EdgeId(i))
            })
        })
    }
}

impl Eq for Diagram {}

fn is_valid_edge_id(id: &str) -> bool {
    !id.is_empty()
        && !id
            .chars()
            .any(|c| c == ',' || c == '#' || c.is_whitespace())
}

fn order_fibers(
    vertices: &[String],
    edges: &[Edge],
    rank_of: impl Fn(EdgeId) -> usize,
    kind: &'static str,
) -> Result<Vec<Vec<EdgeId>>, DiagramError> {
    let mut fibers: Vec<Vec<EdgeId>> = vec![Vec::new(); vertices.len()];
    for i in 0..edges.len() {
        fibers[edges[i].target.0].push(EdgeId(i));
    }
    for (v, fiber) in fibers.iter_mut().enumerate() {
        fiber.sort_by_key(|&e| rank_of(e));
        let ranks: Vec<usize> = fiber.iter().map(|&e| rank_of(e)).collect();
        if ranks.iter().enumerate().any(|(i, &r)| i != r) {
            return Err(DiagramError::BadRankSet {
                vertex: vertices[v].clone(),
                kind,
                ranks,
            });
        }
    }
    Ok(fibers)
}

fn bool_product(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect())
        .collect()
}

/// A substitution on a finite alphabet. Letters are arbitrary tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    alphabet: Vec<String>,
    images: Vec<Vec<usize>>,
}

impl Substitution {
    /// `rules` lists each letter with its image, in alphabet order.
    pub fn new(rules: Vec<(String, Vec<String>)>) -> Result<Self, DiagramError> {
        let mut index = BTreeMap::new();
        for (i, (letter, _)) in rules.iter().enumerate() {
            if index.insert(letter.clone(), i).is_some() {
                return Err(DiagramError::Substitution(format!(
                    "letter `{letter}` has two rules"
                )));
            }
        }
        if rules.is_empty() {
            return Err(DiagramError::Substitution("empty alphabet".into()));
        }
        let mut images = Vec::with_capacity(rules.len());
        for (letter, image) in &rules {
            if image.is_empty() {
                return Err(DiagramError::Substitution(format!(
                    "image of `{letter}` is empty"
                )));
            }
            let resolved = image
                .iter()
                .map(|b| {
                    index.get(b).copied().ok_or_else(|| {
                        DiagramError::Substitution(format!(
                            "image of `{letter}` uses `{b}`, which has no rule"
                        ))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            images.push(resolved);
        }
        Ok(Self {
            alphabet: rules.into_iter().map(|(l, _)| l).collect(),
            images,
        })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn image(&self, letter: usize) -> impl Iterator<Item = &str> + '_ {
        self.images[letter]
            .iter()
            .map(|&b| self.alphabet[b].as_str())
    }

    pub fn image_len(&self, letter: usize) -> usize {
        self.images[letter].len()
    }
}

/// Builds the stationary diagram of a substitution: the `p`-th letter `b` of
/// the image of `a` becomes an edge `b -> a` of rank `p - 1`.
///
/// Edge ids are the upper-cased letter followed by the 1-based position
/// (`A1`, `A2`, ...); if that scheme collides, `letter_position` is used.
pub fn diagram_from_substitution(s: &Substitution) -> Result<Diagram, DiagramError> {
    let mut specs = Vec::new();
    let upper = |l: &str, p: usize| format!("{}{p}", l.to_uppercase());
    let plain = |l: &str, p: usize| format!("{l}_{p}");
    let mut names: Vec<String> = Vec::new();
    for (a, letter) in s.alphabet.iter().enumerate() {
        for p in 1..=s.images[a].len() {
            names.push(upper(letter, p));
        }
    }
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    let use_upper = sorted.len() == names.len() && names.iter().all(|n| is_valid_edge_id(n));
    for (a, letter) in s.alphabet.iter().enumerate() {
        for (p, &b) in s.images[a].iter().enumerate() {
            let name = if use_upper {
                upper(letter, p + 1)
            } else {
                plain(letter, p + 1)
            };
            specs.push(EdgeSpec::new(&name, &s.alphabet[b], letter, p));
        }
    }
    Diagram::new(s.alphabet.clone(), specs)
}
