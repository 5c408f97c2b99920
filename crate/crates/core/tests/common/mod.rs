#![allow(dead_code)]

use std::path::PathBuf;

use bratteli_core::diagram::EdgeSpec;
use bratteli_core::format::load_diagram;
use bratteli_core::{Diagram, EdgeId};
use proptest::prelude::*;

/// Every well-formed corpus file.
pub const CORPUS: [&str; 6] = [
    "fib.sub",
    "fib.bd",
    "thue-morse.sub",
    "single-loop.bd",
    "ex4-E.bd",
    "ex4-F.bd",
];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

pub fn corpus(name: &str) -> Diagram {
    load_diagram(&corpus_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn edge(d: &Diagram, name: &str) -> EdgeId {
    d.edge_by_name(name).unwrap()
}

/// Builds a diagram from `(source, target)` pairs; ranks inside each fiber
/// follow `order` (smaller key first).
pub fn build(vertices: usize, edges: &[(usize, usize)], order: &[usize]) -> Diagram {
    let names: Vec<String> = (0..vertices).map(|v| format!("v{v}")).collect();
    let specs = edges
        .iter()
        .enumerate()
        .map(|(i, &(s, t))| {
            let rank = edges
                .iter()
                .enumerate()
                .filter(|&(j, &(_, t2))| t2 == t && order[j] < order[i])
                .count();
            EdgeSpec::new(&format!("e{i}"), &names[s], &names[t], rank)
        })
        .collect();
    Diagram::new(names, specs).expect("generated diagrams are valid")
}

/// Small diagrams without sinks or sources: 1..=3 vertices, at most
/// `max_edges` edges, random fiber orders.
pub fn arb_diagram(max_edges: usize) -> impl Strategy<Value = Diagram> {
    (1usize..=3)
        .prop_flat_map(move |k| {
            prop::collection::vec(0usize..=2, k * k)
                .prop_filter(
                    "every vertex needs an incoming and an outgoing edge",
                    move |m| {
                        let total: usize = m.iter().sum();
                        total <= max_edges
                            && (0..k).all(|v| (0..k).any(|w| m[v * k + w] > 0))
                            && (0..k).all(|w| (0..k).any(|v| m[v * k + w] > 0))
                    },
                )
                .prop_flat_map(move |m| {
                    let edges: Vec<(usize, usize)> = (0..k * k)
                        .flat_map(|c| std::iter::repeat_n((c / k, c % k), m[c]))
                        .collect();
                    let n = edges.len();
                    (
                        Just(k),
                        Just(edges),
                        Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                    )
                })
        })
        .prop_map(|(k, edges, order)| build(k, &edges, &order))
}

/// A copy of `d` with vertices and edges renamed and listed in a shuffled
/// order, plus the renaming of edges.
pub fn relabel(d: &Diagram, vperm: &[usize], eperm: &[usize]) -> (Diagram, Vec<(String, String)>) {
    let k = d.vertex_count();
    let names: Vec<String> = (0..k).map(|v| format!("w{}", vperm[v])).collect();
    let mut listed: Vec<String> = names.clone();
    listed.sort();
    let mut specs: Vec<(usize, EdgeSpec)> = d
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            (
                eperm[i],
                EdgeSpec::new(
                    &format!("f{}", eperm[i]),
                    &names[e.source.0],
                    &names[e.target.0],
                    e.rank,
                ),
            )
        })
        .collect();
    specs.sort_by_key(|(k, _)| *k);
    let renaming = d
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| (e.name.clone(), format!("f{}", eperm[i])))
        .collect();
    let copy = Diagram::new(listed, specs.into_iter().map(|(_, s)| s).collect()).unwrap();
    (copy, renaming)
}

/// Does `t` (indexed by edge id of `a`) satisfy both certificate
/// conditions? Written directly from the definition.
pub fn is_certificate(a: &Diagram, b: &Diagram, t: &[EdgeId]) -> bool {
    for e in a.edge_ids() {
        for f in a.edge_ids() {
            let left = a.target(e) == a.source(f);
            let right = b.target(t[e.0]) == b.source(t[f.0]);
            if left != right {
                return false;
            }
        }
        if let Some(next) = a.successor_edge(e) {
            if b.successor_edge(t[e.0]) != Some(t[next.0]) {
                return false;
            }
        }
    }
    true
}

/// Tries all `|E|!` bijections.
pub fn brute_force_equivalent(a: &Diagram, b: &Diagram) -> bool {
    if a.edge_count() != b.edge_count() {
        return false;
    }
    let mut perm: Vec<EdgeId> = b.edge_ids().collect();
    permutations(&mut perm, 0, &mut |t| is_certificate(a, b, t))
}

fn permutations(
    items: &mut Vec<EdgeId>,
    k: usize,
    found: &mut dyn FnMut(&[EdgeId]) -> bool,
) -> bool {
    if k == items.len() {
        return found(items);
    }
    for i in k..items.len() {
        items.swap(k, i);
        if permutations(items, k + 1, found) {
            items.swap(k, i);
            return true;
        }
        items.swap(k, i);
    }
    false
}
