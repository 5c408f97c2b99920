//! JSON schemas of the subcommand outputs.

use serde_json::{json, Value};

pub const SUBCOMMANDS: [&str; 9] = [
    "info", "paths", "vershik", "orbit", "af-tower", "check", "crossed", "equiv", "convert",
];

fn strings() -> Value {
    json!({"type": "array", "items": {"type": "string"}})
}

fn matrix() -> Value {
    json!({"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}})
}

fn object(required: &[&str], properties: Value) -> Value {
    json!({
        "type": "object",
        "required": required,
        "properties": properties,
    })
}

fn document(name: &str, body: Value) -> Value {
    let mut v = body;
    v["$schema"] = json!("https://json-schema.org/draft/2020-12/schema");
    v["title"] = json!(format!("bratteli {name}"));
    v
}

pub fn schema(name: &str) -> Option<Value> {
    let body = match name {
        "info" => object(
            &[
                "vertices",
                "edges",
                "vertex_count",
                "edge_count",
                "minimal_edges",
                "maximal_edges",
                "incidence",
                "primitive",
            ],
            json!({
                "vertices": strings(),
                "edges": {"type": "array", "items": object(&["id", "source", "target", "rank"], json!({
                    "id": {"type": "string"},
                    "source": {"type": "string"},
                    "target": {"type": "string"},
                    "rank": {"type": "integer", "minimum": 0},
                }))},
                "vertex_count": {"type": "integer"},
                "edge_count": {"type": "integer"},
                "minimal_edges": strings(),
                "maximal_edges": strings(),
                "incidence": matrix(),
                "primitive": {"type": "boolean"},
            }),
        ),
        "paths" => object(
            &["length", "end", "count", "paths"],
            json!({
                "length": {"type": "integer", "minimum": 1},
                "end": {"type": ["string", "null"]},
                "count": {"type": "integer"},
                "paths": strings(),
            }),
        ),
        "vershik" => object(
            &["path", "iterate", "result"],
            json!({
                "path": {"type": "string"},
                "iterate": {"type": "integer"},
                "result": {"type": ["string", "null"]},
            }),
        ),
        "orbit" => object(
            &["length", "n_sup", "bound", "orbits"],
            json!({
                "length": {"type": "integer", "minimum": 1},
                "n_sup": {"type": "integer", "minimum": 0},
                "bound": {"type": ["integer", "null"]},
                "orbits": {"type": "array", "items": object(&["vertex", "size", "chain"], json!({
                    "vertex": {"type": "string"},
                    "size": {"type": "integer"},
                    "chain": strings(),
                }))},
            }),
        ),
        "af-tower" => object(
            &["levels"],
            json!({
                "levels": {"type": "array", "items": object(&["N", "blocks", "dim", "mult"], json!({
                    "N": {"type": "integer", "minimum": 1},
                    "blocks": {"type": "array", "items": object(&["vertex", "size"], json!({
                        "vertex": {"type": "string"},
                        "size": {"type": "integer"},
                    }))},
                    "dim": {"type": "integer"},
                    "mult": matrix(),
                }))},
            }),
        ),
        "check" => {
            let entries = json!({"type": "object", "additionalProperties": {"type": "integer"}});
            object(
                &["diagram", "depth", "n_max", "pass", "relations"],
                json!({
                    "diagram": {"type": "string"},
                    "depth": {"type": "integer", "minimum": 3},
                    "n_max": {"type": "integer", "minimum": 1},
                    "pass": {"type": "boolean"},
                    "relations": {"type": "array", "items": object(
                        &["relation", "interior", "pass", "counterexamples", "instances", "failures"],
                        json!({
                            "relation": {"type": "string"},
                            "interior": {"type": "integer"},
                            "pass": {"type": "boolean"},
                            "instances": {"type": "integer"},
                            "failures": {"type": "integer"},
                            "note": {"type": "string"},
                            "counterexamples": {"type": "array", "items": object(
                                &["instance", "path", "lhs", "rhs"],
                                json!({
                                    "instance": {"type": "string"},
                                    "path": {"type": "string"},
                                    "lhs": entries,
                                    "rhs": entries,
                                    "detail": {"type": "string"},
                                }),
                            )},
                        }),
                    )},
                }),
            )
        }
        "crossed" => object(
            &[
                "depth",
                "seed",
                "samples",
                "max_level",
                "unit_is_identity",
                "multiplicative",
                "adjoint_compatible",
                "failures",
                "independence",
                "pass",
            ],
            json!({
                "depth": {"type": "integer"},
                "seed": {"type": "integer"},
                "samples": {"type": "integer"},
                "max_level": {"type": "integer"},
                "unit_is_identity": {"type": "boolean"},
                "multiplicative": {"type": "integer"},
                "adjoint_compatible": {"type": "integer"},
                "failures": {"type": "array", "items": object(&["check", "x"], json!({
                    "check": {"enum": ["multiplicative", "adjoint"]},
                    "x": {"type": "string"},
                    "y": {"type": ["string", "null"]},
                }))},
                "independence": {"type": "array", "items": object(&["N", "basis_size", "rank", "pass"], json!({
                    "N": {"type": "integer"},
                    "basis_size": {"type": "integer"},
                    "rank": {"type": "integer"},
                    "pass": {"type": "boolean"},
                }))},
                "pass": {"type": "boolean"},
            }),
        ),
        "equiv" => object(
            &["equivalent"],
            json!({
                "equivalent": {"type": "boolean"},
                "certificate": object(&["T"], json!({
                    "T": {"type": "object", "additionalProperties": {"type": "string"}},
                })),
                "reason": object(&["reason"], json!({
                    "reason": {"enum": ["edge-count-mismatch", "vertex-count-mismatch", "fiber-size-mismatch", "search-exhausted"]},
                })),
                "violations": {"type": "array", "items": object(&["kind"], json!({
                    "kind": {"enum": ["unmapped", "not-injective", "not-surjective", "adjacency", "successor"]},
                }))},
            }),
        ),
        "convert" => json!({
            "description": "convert prints a .bd document, not JSON",
            "type": "string",
        }),
        _ => return None,
    };
    Some(document(name, body))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_subcommand_has_a_schema() {
        for name in SUBCOMMANDS {
            let s = schema(name).unwrap();
            assert_eq!(s["title"], format!("bratteli {name}"));
        }
        assert!(schema("nope").is_none());
    }
}
