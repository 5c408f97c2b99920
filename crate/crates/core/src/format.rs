//! Text formats for diagrams (`.bd`) and substitutions (`.sub`).
//!
//! `.bd`:
//!
//! ```text
//! # Fibonacci
//! vertices: a b
//! edge: A1 a -> a rank 0
//! edge: A2 b -> a rank 1
//! edge: B1 a -> b rank 0
//! ```
//!
//! An edge line may end with `lambda-rank <k>`, a stale rank that drives the
//! successor operator of the truncated model instead of `rank`. It exists to
//! build negative controls and is never emitted for consistent diagrams.
//!
//! `.sub`: one rule per line, `a -> a b`.

use std::path::Path;

use thiserror::Error;

use crate::diagram::{diagram_from_substitution, Diagram, DiagramError, EdgeSpec, Substitution};

pub fn parse_diagram(text: &str) -> Result<Diagram, DiagramError> {
    let mut vertices: Option<(Vec<String>, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let malformed = |reason: &str| DiagramError::MalformedLine {
            line: line_no,
            reason: reason.to_owned(),
        };
        if let Some(rest) = line.strip_prefix("vertices:") {
            if vertices.is_some() {
                return Err(malformed("second `vertices:` line"));
            }
            let names: Vec<String> = rest.split_whitespace().map(str::to_owned).collect();
            if names.is_empty() {
                return Err(malformed("`vertices:` lists no vertex"));
            }
            vertices = Some((names, line_no));
        } else if let Some(rest) = line.strip_prefix("edge:") {
            if vertices.is_none() {
                return Err(malformed("edge declared before `vertices:`"));
            }
            edges.push(parse_edge(rest, line_no)?);
        } else {
            return Err(malformed("expected `vertices:` or `edge:`"));
        }
    }
    let (names, line) = vertices.ok_or(DiagramError::Empty)?;
    Diagram::with_vertex_line(names, edges, line)
}

fn parse_edge(rest: &str, line: usize) -> Result<EdgeSpec, DiagramError> {
    let tokens: Vec<&str> = rest.split_whitespace().collect();
    let malformed = |reason: String| DiagramError::MalformedLine { line, reason };
    let shape = "expected `edge: <id> <source> -> <target> rank <k> [lambda-rank <k>]`";
    if !(tokens.len() == 6 || tokens.len() == 8) || tokens[2] != "->" || tokens[4] != "rank" {
        return Err(malformed(shape.to_owned()));
    }
    let number = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| malformed(format!("`{s}` is not a natural number")))
    };
    let mut spec = EdgeSpec::new(tokens[0], tokens[1], tokens[3], number(tokens[5])?);
    if tokens.len() == 8 {
        if tokens[6] != "lambda-rank" {
            return Err(malformed(shape.to_owned()));
        }
        spec.lambda_rank = Some(number(tokens[7])?);
    }
    spec.line = Some(line);
    Ok(spec)
}

/// `.bd` text: the vertex line, then one line per edge in declaration
/// order, so parsing the output reproduces `d` exactly.
pub fn serialize_diagram(d: &Diagram) -> String {
    let mut out = format!("vertices: {}\n", d.vertex_names().join(" "));
    for e in d.edge_ids() {
        let edge = d.edge(e);
        out.push_str(&format!(
            "edge: {} {} -> {} rank {}",
            edge.name,
            d.vertex_name(edge.source),
            d.vertex_name(edge.target),
            edge.rank
        ));
        if let Some(r) = d.lambda_rank(e) {
            out.push_str(&format!(" lambda-rank {r}"));
        }
        out.push('\n');
    }
    out
}

pub fn parse_substitution(text: &str) -> Result<Substitution, DiagramError> {
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let malformed = |reason: &str| DiagramError::MalformedLine {
            line: idx + 1,
            reason: reason.to_owned(),
        };
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| malformed("expected `<letter> -> <letters...>`"))?;
        let letters: Vec<&str> = lhs.split_whitespace().collect();
        if letters.len() != 1 {
            return Err(malformed("left-hand side must be a single letter"));
        }
        let image: Vec<String> = rhs.split_whitespace().map(str::to_owned).collect();
        if image.is_empty() {
            return Err(malformed("image is empty"));
        }
        if image.iter().any(|l| l.contains("->")) {
            return Err(malformed("more than one `->`"));
        }
        rules.push((letters[0].to_owned(), image));
    }
    Substitution::new(rules)
}

pub fn serialize_substitution(s: &Substitution) -> String {
    let mut out = String::new();
    for (i, letter) in s.alphabet().iter().enumerate() {
        let image: Vec<&str> = s.image(i).collect();
        out.push_str(&format!("{letter} -> {}\n", image.join(" ")));
    }
    out
}

fn strip_comment(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: DiagramError,
    },
}

/// Reads a diagram from disk; `.sub` files are converted through
/// [`diagram_from_substitution`], anything else is read as `.bd`.
pub fn load_diagram(path: &Path) -> Result<Diagram, LoadError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: display.clone(),
        source,
    })?;
    let parsed = if path.extension().is_some_and(|ext| ext == "sub") {
        parse_substitution(&text).and_then(|s| diagram_from_substitution(&s))
    } else {
        parse_diagram(&text)
    };
    parsed.map_err(|source| LoadError::Parse {
        path: display,
        source,
    })
}
