//! Finite paths and the partially defined Vershik map.
//!
//! A path `f_1 f_2 ... f_m` starts at the top level: `t(f_j) = i(f_{j+1})`.
//! The successor map changes the first non-maximal edge to its fiber
//! successor and resets everything above it to the unique minimal path, so it
//! is the successor function of the colexicographic order (last coordinate
//! most significant) on paths sharing a terminal vertex.

use std::fmt;

use thiserror::Error;

use crate::diagram::{Diagram, DiagramError, EdgeId, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("empty path")]
    Empty,
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("edges `{0}` and `{1}` are not composable")]
    NotComposable(String, String),
}

/// A finite sequence of edges, with no compatibility requirement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<EdgeId>);

impl Word {
    pub fn is_path(&self, d: &Diagram) -> bool {
        self.0.windows(2).all(|w| d.target(w[0]) == d.source(w[1]))
    }
}

/// A non-empty composable edge sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path(Vec<EdgeId>);

impl Path {
    pub fn new(d: &Diagram, edges: Vec<EdgeId>) -> Result<Self, PathError> {
        if edges.is_empty() {
            return Err(PathError::Empty);
        }
        for w in edges.windows(2) {
            if d.target(w[0]) != d.source(w[1]) {
                return Err(PathError::NotComposable(
                    d.edge_name(w[0]).to_owned(),
                    d.edge_name(w[1]).to_owned(),
                ));
            }
        }
        Ok(Self(edges))
    }

    /// Caller guarantees composability.
    pub fn single(e: EdgeId) -> Self {
        Self(vec![e])
    }

    /// Parses the comma-separated edge-id form, e.g. `A1,A2`.
    pub fn parse(d: &Diagram, text: &str) -> Result<Self, PathError> {
        let edges = text
            .split(',')
            .map(|id| d.edge_by_name(id.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(d, edges)
    }

    pub fn display<'a>(&'a self, d: &'a Diagram) -> DisplayPath<'a> {
        DisplayPath { path: self, d }
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Initial vertex of the first edge.
    pub fn source(&self, d: &Diagram) -> VertexId {
        d.source(self.0[0])
    }

    /// Terminal vertex of the last edge.
    pub fn target(&self, d: &Diagram) -> VertexId {
        d.target(*self.0.last().expect("paths are non-empty"))
    }

    pub fn starts_with(&self, prefix: &Path) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// `self` followed by `e`; `None` if `e` does not start at the target.
    pub fn extend(&self, d: &Diagram, e: EdgeId) -> Option<Path> {
        (d.source(e) == self.target(d)).then(|| {
            let mut edges = self.0.clone();
            edges.push(e);
            Path(edges)
        })
    }

    /// `e` followed by `self`; `None` if not composable.
    pub fn prepend(&self, d: &Diagram, e: EdgeId) -> Option<Path> {
        (d.target(e) == self.source(d)).then(|| {
            let mut edges = Vec::with_capacity(self.0.len() + 1);
            edges.push(e);
            edges.extend_from_slice(&self.0);
            Path(edges)
        })
    }

    /// Drops the first edge; `None` for a single edge.
    pub fn tail(&self) -> Option<Path> {
        (self.0.len() > 1).then(|| Path(self.0[1..].to_vec()))
    }

    pub fn into_word(self) -> Word {
        Word(self.0)
    }
}

pub struct DisplayPath<'a> {
    path: &'a Path,
    d: &'a Diagram,
}

impl fmt::Display for DisplayPath<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &e) in self.path.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(self.d.edge_name(e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathClass {
    pub is_max: bool,
    pub is_min: bool,
}

pub fn is_path(d: &Diagram, w: &Word) -> bool {
    w.is_path(d)
}

pub fn classify(d: &Diagram, p: &Path) -> PathClass {
    PathClass {
        is_max: p.0.iter().all(|&e| d.is_max(e)),
        is_min: p.0.iter().all(|&e| d.is_min(e)),
    }
}

/// The unique path of `len` minimal edges ending at `v`.
pub fn minimal_path_into(d: &Diagram, v: VertexId, len: usize) -> Path {
    extremal_path_into(d, v, len, Diagram::min_edge_into)
}

/// The unique path of `len` maximal edges ending at `v`.
pub fn maximal_path_into(d: &Diagram, v: VertexId, len: usize) -> Path {
    extremal_path_into(d, v, len, Diagram::max_edge_into)
}

fn extremal_path_into(
    d: &Diagram,
    v: VertexId,
    len: usize,
    pick: fn(&Diagram, VertexId) -> EdgeId,
) -> Path {
    let mut edges = vec![EdgeId(0); len];
    fill_prefix(d, &mut edges, len, v, pick);
    Path(edges)
}

/// Overwrites `edges[..n]` with the extremal path ending at `v`.
fn fill_prefix(
    d: &Diagram,
    edges: &mut [EdgeId],
    n: usize,
    mut v: VertexId,
    pick: fn(&Diagram, VertexId) -> EdgeId,
) {
    for j in (0..n).rev() {
        let e = pick(d, v);
        edges[j] = e;
        v = d.source(e);
    }
}

/// All paths of `length` edges (ending at `end`, if given), grouped by
/// terminal vertex in index order and listed in colexicographic order inside
/// each group.
pub fn enumerate_paths(d: &Diagram, length: usize, end: Option<VertexId>) -> Vec<Path> {
    assert!(length >= 1, "paths have at least one edge");
    let mut out = Vec::new();
    let ends: Vec<VertexId> = match end {
        Some(v) => vec![v],
        None => d.vertices().collect(),
    };
    let mut buf = vec![EdgeId(0); length];
    for v in ends {
        colex_fill(d, &mut buf, length, v, &mut out);
    }
    out
}

/// Number of paths of `length` edges (ending at `end`, if given), saturating
/// at `u64::MAX`. Cheap even when enumeration is not.
pub fn count_paths(d: &Diagram, length: usize, end: Option<VertexId>) -> u64 {
    if length == 0 {
        return 0;
    }
    let mut counts: Vec<u64> = d.vertices().map(|v| d.fiber(v).len() as u64).collect();
    for _ in 1..length {
        counts = d
            .vertices()
            .map(|w| {
                d.fiber(w)
                    .iter()
                    .fold(0u64, |acc, &e| acc.saturating_add(counts[d.source(e).0]))
            })
            .collect();
    }
    match end {
        Some(v) => counts[v.0],
        None => counts.iter().fold(0u64, |acc, &c| acc.saturating_add(c)),
    }
}

fn colex_fill(d: &Diagram, buf: &mut [EdgeId], n: usize, v: VertexId, out: &mut Vec<Path>) {
    // Position n-1 is the most significant among buf[..n].
    for &e in d.fiber(v) {
        buf[n - 1] = e;
        if n == 1 {
            out.push(Path(buf.to_vec()));
        } else {
            colex_fill(d, buf, n - 1, d.source(e), out);
        }
    }
}

/// The successor map; `None` exactly on maximal paths.
pub fn vershik(d: &Diagram, p: &Path) -> Option<Path> {
    let n = p.0.iter().position(|&e| !d.is_max(e))?;
    let succ = d
        .successor_edge(p.0[n])
        .expect("non-maximal edge has a successor");
    let mut edges = p.0.clone();
    edges[n] = succ;
    fill_prefix(d, &mut edges, n, d.source(succ), Diagram::min_edge_into);
    Some(Path(edges))
}

/// Inverse of [`vershik`]; `None` exactly on minimal paths. Mirror image of
/// the forward map: predecessor at the first non-minimal edge, maximal path
/// above it.
pub fn vershik_inv(d: &Diagram, p: &Path) -> Option<Path> {
    let n = p.0.iter().position(|&e| !d.is_min(e))?;
    let pred = d
        .predecessor_edge(p.0[n])
        .expect("non-minimal edge has a predecessor");
    let mut edges = p.0.clone();
    edges[n] = pred;
    fill_prefix(d, &mut edges, n, d.source(pred), Diagram::max_edge_into);
    Some(Path(edges))
}

/// `λ^n(p)`, stepping one application at a time; `None` as soon as an
/// intermediate path leaves the domain.
pub fn iterate(d: &Diagram, p: &Path, n: i64) -> Option<Path> {
    let step = if n >= 0 { vershik } else { vershik_inv };
    let mut cur = p.clone();
    for _ in 0..n.unsigned_abs() {
        cur = step(d, &cur)?;
    }
    Some(cur)
}

/// Membership in the domain `P_n`: `λ^{-n}(p)` is defined. `P_0` is
/// everything; negative `n` gives the domain of `λ^{|n|}`.
pub fn in_p_n(d: &Diagram, p: &Path, n: i64) -> bool {
    iterate(d, p, -n).is_some()
}

/// Number of times `λ` (forward) can be applied to `p`.
pub fn forward_reach(d: &Diagram, p: &Path) -> u64 {
    let mut count = 0;
    let mut cur = p.clone();
    while let Some(next) = vershik(d, &cur) {
        cur = next;
        count += 1;
    }
    count
}

/// Number of times `λ^{-1}` can be applied to `p`.
pub fn backward_reach(d: &Diagram, p: &Path) -> u64 {
    let mut count = 0;
    let mut cur = p.clone();
    while let Some(prev) = vershik_inv(d, &cur) {
        cur = prev;
        count += 1;
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NReport {
    /// Largest `|n|` with `P_n` meeting the length-`N` paths.
    pub n_sup: u64,
    /// `m^N` with `m = |E_1|`, or `None` if it overflows `u64`.
    pub bound: Option<u64>,
}

/// Finiteness data for the partial action restricted to length-`N` paths.
pub fn n_n_report(d: &Diagram, length: usize) -> NReport {
    // A path without predecessor is all-minimal, so every maximal run starts
    // at one of the minimal paths.
    let n_sup = d
        .vertices()
        .map(|v| forward_reach(d, &minimal_path_into(d, v, length)))
        .max()
        .unwrap_or(0);
    let bound = u32::try_from(length)
        .ok()
        .and_then(|n| (d.edge_count() as u64).checked_pow(n));
    NReport { n_sup, bound }
}
