//! Equivalence of ordered diagrams.
//!
//! A certificate is a bijection `T` between edge sets such that
//!
//! 1. `t(e) = i(f)` if and only if `t(T(e)) = i(T(f))`, and
//! 2. `T(λ(e)) = λ̃(T(e))` for every non-maximal `e`.
//!
//! Condition 1 forces `T` to send fibers onto fibers and condition 2 forces
//! it to preserve ranks inside them, so a certificate is determined by a
//! bijection of vertices with matching fiber sizes. The search branches over
//! those and prunes with source consistency.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Diagram, EdgeId, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("unknown edge id `{id}` in diagram {side}")]
    UnknownEdgeId { side: char, id: String },
}

/// The bijection `T`, by edge id. Serializes as `{"T": {"e1": "f1", ...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceCertificate {
    #[serde(rename = "T")]
    pub map: BTreeMap<String, String>,
}

impl EquivalenceCertificate {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        Self {
            map: pairs.into_iter().collect(),
        }
    }

    pub fn identity(d: &Diagram) -> Self {
        Self::new(d.edges().iter().map(|e| (e.name.clone(), e.name.clone())))
    }

    /// The reverse map. Only meaningful for bijections.
    pub fn inverse(&self) -> Self {
        Self::new(self.map.iter().map(|(a, b)| (b.clone(), a.clone())))
    }

    /// `other ∘ self`: first `self`, then `other`. Edges whose image `other`
    /// does not cover are dropped.
    pub fn then(&self, other: &Self) -> Self {
        Self::new(
            self.map
                .iter()
                .filter_map(|(a, b)| other.map.get(b).map(|c| (a.clone(), c.clone()))),
        )
    }

    fn resolve(&self, a: &Diagram, b: &Diagram) -> Result<Vec<(EdgeId, EdgeId)>, CertificateError> {
        self.map
            .iter()
            .map(|(x, y)| {
                let ex = a
                    .edge_by_name(x)
                    .map_err(|_| CertificateError::UnknownEdgeId {
                        side: 'A',
                        id: x.clone(),
                    })?;
                let ey = b
                    .edge_by_name(y)
                    .map_err(|_| CertificateError::UnknownEdgeId {
                        side: 'B',
                        id: y.clone(),
                    })?;
                Ok((ex, ey))
            })
            .collect()
    }
}

/// One way in which a map fails to be a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// An edge of A without an image.
    Unmapped { edge: String },
    /// Several edges of A share an image.
    NotInjective {
        image: String,
        preimages: Vec<String>,
    },
    /// An edge of B outside the image.
    NotSurjective { edge: String },
    /// Condition 1 fails for the ordered pair `(e, f)`.
    Adjacency {
        e: String,
        f: String,
        composable_in_a: bool,
        composable_in_b: bool,
    },
    /// Condition 2 fails at `e`: `T(λ(e))` differs from `λ̃(T(e))`.
    Successor {
        e: String,
        image_of_successor: String,
        successor_of_image: Option<String>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Unmapped { edge } => write!(f, "edge {edge} has no image"),
            Violation::NotInjective { image, preimages } => {
                write!(f, "{} all map to {image}", preimages.join(", "))
            }
            Violation::NotSurjective { edge } => write!(f, "edge {edge} is not in the image"),
            Violation::Adjacency {
                e,
                f: g,
                composable_in_a,
                composable_in_b,
            } => write!(
                f,
                "adjacency: t({e}) = i({g}) is {composable_in_a} but the images give {composable_in_b}"
            ),
            Violation::Successor {
                e,
                image_of_successor,
                successor_of_image,
            } => write!(
                f,
                "successor at {e}: T(λ({e})) = {image_of_successor} but λ(T({e})) = {}",
                successor_of_image.as_deref().unwrap_or("undefined")
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

/// Validates `cert` as a map from the edges of `a` to the edges of `b`.
pub fn check_certificate(
    a: &Diagram,
    b: &Diagram,
    cert: &EquivalenceCertificate,
) -> Result<CertificateCheck, CertificateError> {
    let pairs = cert.resolve(a, b)?;
    let mut violations = Vec::new();
    let mut t: Vec<Option<EdgeId>> = vec![None; a.edge_count()];
    for &(x, y) in &pairs {
        t[x.0] = Some(y);
    }
    for e in a.edge_ids() {
        if t[e.0].is_none() {
            violations.push(Violation::Unmapped {
                edge: a.edge_name(e).to_owned(),
            });
        }
    }
    let mut preimages: BTreeMap<EdgeId, Vec<EdgeId>> = BTreeMap::new();
    for &(x, y) in &pairs {
        preimages.entry(y).or_default().push(x);
    }
    for (y, xs) in &preimages {
        if xs.len() > 1 {
            violations.push(Violation::NotInjective {
                image: b.edge_name(*y).to_owned(),
                preimages: xs.iter().map(|x| a.edge_name(*x).to_owned()).collect(),
            });
        }
    }
    for y in b.edge_ids() {
        if !preimages.contains_key(&y) {
            violations.push(Violation::NotSurjective {
                edge: b.edge_name(y).to_owned(),
            });
        }
    }
    let mapped: Vec<(EdgeId, EdgeId)> = a
        .edge_ids()
        .filter_map(|e| t[e.0].map(|y| (e, y)))
        .collect();
    for &(e, te) in &mapped {
        for &(f, tf) in &mapped {
            let in_a = a.target(e) == a.source(f);
            let in_b = b.target(te) == b.source(tf);
            if in_a != in_b {
                violations.push(Violation::Adjacency {
                    e: a.edge_name(e).to_owned(),
                    f: a.edge_name(f).to_owned(),
                    composable_in_a: in_a,
                    composable_in_b: in_b,
                });
            }
        }
    }
    for &(e, te) in &mapped {
        let Some(next) = a.successor_edge(e) else {
            continue;
        };
        let Some(t_next) = t[next.0] else { continue };
        let succ = b.successor_edge(te);
        if succ != Some(t_next) {
            violations.push(Violation::Successor {
                e: a.edge_name(e).to_owned(),
                image_of_successor: b.edge_name(t_next).to_owned(),
                successor_of_image: succ.map(|s| b.edge_name(s).to_owned()),
            });
        }
    }
    Ok(CertificateCheck {
        valid: violations.is_empty(),
        violations,
    })
}

/// Why no certificate exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum NotEquivalent {
    EdgeCountMismatch {
        a: usize,
        b: usize,
    },
    VertexCountMismatch {
        a: usize,
        b: usize,
    },
    /// Sorted fiber sizes differ.
    FiberSizeMismatch {
        a: Vec<usize>,
        b: Vec<usize>,
    },
    /// Every vertex bijection with matching fiber sizes was tried.
    SearchExhausted {
        branches: u64,
    },
}

impl fmt::Display for NotEquivalent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotEquivalent::EdgeCountMismatch { a, b } => {
                write!(f, "edge counts differ ({a} vs {b})")
            }
            NotEquivalent::VertexCountMismatch { a, b } => {
                write!(f, "vertex counts differ ({a} vs {b})")
            }
            NotEquivalent::FiberSizeMismatch { a, b } => {
                write!(f, "fiber sizes differ ({a:?} vs {b:?})")
            }
            NotEquivalent::SearchExhausted { branches } => {
                write!(
                    f,
                    "no certificate after exhausting {branches} search branches"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equivalent(EquivalenceCertificate),
    NotEquivalent(NotEquivalent),
}

/// Searches for a certificate. Any certificate returned has passed
/// [`check_certificate`].
pub fn find_equivalence(a: &Diagram, b: &Diagram) -> Verdict {
    if a.edge_count() != b.edge_count() {
        return Verdict::NotEquivalent(NotEquivalent::EdgeCountMismatch {
            a: a.edge_count(),
            b: b.edge_count(),
        });
    }
    if a.vertex_count() != b.vertex_count() {
        return Verdict::NotEquivalent(NotEquivalent::VertexCountMismatch {
            a: a.vertex_count(),
            b: b.vertex_count(),
        });
    }
    let sizes = |d: &Diagram| {
        let mut s: Vec<usize> = d.vertices().map(|v| d.fiber(v).len()).collect();
        s.sort_unstable();
        s
    };
    let (sa, sb) = (sizes(a), sizes(b));
    if sa != sb {
        return Verdict::NotEquivalent(NotEquivalent::FiberSizeMismatch { a: sa, b: sb });
    }
    let mut search = Search {
        a,
        b,
        phi: vec![None; a.vertex_count()],
        used: BTreeSet::new(),
        branches: 0,
    };
    match search.extend(0) {
        Some(cert) => Verdict::Equivalent(cert),
        None => Verdict::NotEquivalent(NotEquivalent::SearchExhausted {
            branches: search.branches,
        }),
    }
}

struct Search<'a> {
    a: &'a Diagram,
    b: &'a Diagram,
    phi: Vec<Option<VertexId>>,
    used: BTreeSet<VertexId>,
    branches: u64,
}

impl Search<'_> {
    fn extend(&mut self, next: usize) -> Option<EquivalenceCertificate> {
        let (a, b) = (self.a, self.b);
        if next == a.vertex_count() {
            let cert = self.certificate();
            let check = check_certificate(a, b, &cert).expect("ids come from the diagrams");
            return check.valid.then_some(cert);
        }
        let v = VertexId(next);
        for w in b.vertices() {
            if self.used.contains(&w) || b.fiber(w).len() != a.fiber(v).len() {
                continue;
            }
            self.branches += 1;
            self.phi[v.0] = Some(w);
            self.used.insert(w);
            if self.consistent(v) {
                if let Some(cert) = self.extend(next + 1) {
                    return Some(cert);
                }
            }
            self.used.remove(&w);
            self.phi[v.0] = None;
        }
        None
    }

    /// `i(T(e)) = φ(i(e))` wherever both sides are already determined and
    /// the newly assigned vertex `v` is involved.
    fn consistent(&self, v: VertexId) -> bool {
        let (a, b) = (self.a, self.b);
        let image = |e: EdgeId| -> Option<EdgeId> {
            let w = self.phi[a.target(e).0]?;
            let rank = a.fiber(a.target(e)).iter().position(|&x| x == e)?;
            Some(b.fiber(w)[rank])
        };
        let touches = a.fiber(v).iter().chain(a.outgoing(v));
        for &e in touches {
            let (Some(te), Some(src)) = (image(e), self.phi[a.source(e).0]) else {
                continue;
            };
            if b.source(te) != src {
                return false;
            }
        }
        true
    }

    fn certificate(&self) -> EquivalenceCertificate {
        let (a, b) = (self.a, self.b);
        EquivalenceCertificate::new(a.vertices().flat_map(|v| {
            let w = self.phi[v.0].expect("all vertices assigned");
            a.fiber(v)
                .iter()
                .zip(b.fiber(w))
                .map(|(&x, &y)| (a.edge_name(x).to_owned(), b.edge_name(y).to_owned()))
        }))
    }
}
