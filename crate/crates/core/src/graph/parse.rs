//! Line-oriented edge-list format.
//!
//! ```text
//! # comment
//! node A          # declares a vertex (needed for isolated ones)
//! A -> B
//! B -- C
//! ```
//!
//! Vertex indices follow order of first appearance.

use std::collections::HashMap;

use thiserror::Error;

use super::{Pdag, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

enum Statement<'a> {
    Node(&'a str),
    Directed(&'a str, &'a str),
    Undirected(&'a str, &'a str),
}

fn lex(text: &str) -> impl Iterator<Item = (usize, Result<Statement<'_>, ParseError>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            return None;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let stmt = match tokens.as_slice() {
            ["node", name] => Ok(Statement::Node(name)),
            [a, "->", b] => Ok(Statement::Directed(a, b)),
            [a, "--", b] => Ok(Statement::Undirected(a, b)),
            _ => Err(ParseError::new(line, format!("cannot parse `{body}`"))),
        };
        Some((line, stmt))
    })
}

/// Parses a graph file. Rejects self-edges, repeated vertex pairs and
/// directed cycles, naming the offending line.
pub fn parse_graph(text: &str) -> Result<Pdag, ParseError> {
    let mut g = Pdag::empty(Vec::<String>::new()).expect("empty graph");
    let mut index: HashMap<String, VertexId> = HashMap::new();
    let mut intern = |g: &mut Pdag, name: &str| -> VertexId {
        *index
            .entry(name.to_owned())
            .or_insert_with(|| g.push_vertex(name.to_owned()))
    };
    for (line, stmt) in lex(text) {
        let (a, b, directed) = match stmt? {
            Statement::Node(name) => {
                intern(&mut g, name);
                continue;
            }
            Statement::Directed(a, b) => (a, b, true),
            Statement::Undirected(a, b) => (a, b, false),
        };
        if a == b {
            return Err(ParseError::new(line, format!("self-edge on `{a}`")));
        }
        let (va, vb) = (intern(&mut g, a), intern(&mut g, b));
        if directed && g.is_directed(vb, va) {
            return Err(ParseError::new(line, "directed cycle"));
        }
        if g.adjacent(va, vb) {
            return Err(ParseError::new(
                line,
                format!("duplicate edge between `{a}` and `{b}`"),
            ));
        }
        if directed {
            if va == vb || g.descendants(vb).contains(&va) {
                return Err(ParseError::new(line, "directed cycle"));
            }
            g.set_directed(va, vb);
        } else {
            g.set_undirected(va, vb);
        }
    }
    Ok(g)
}

/// Parses a background-knowledge file (`S -> T` lines) against `g`.
pub fn parse_background(text: &str, g: &Pdag) -> Result<Vec<(VertexId, VertexId)>, ParseError> {
    let mut out = Vec::new();
    for (line, stmt) in lex(text) {
        match stmt? {
            Statement::Directed(a, b) => {
                let resolve = |n: &str| {
                    g.vertex(n)
                        .ok_or_else(|| ParseError::new(line, format!("unknown vertex `{n}`")))
                };
                let (s, t) = (resolve(a)?, resolve(b)?);
                if s == t {
                    return Err(ParseError::new(line, format!("self-edge on `{a}`")));
                }
                out.push((s, t));
            }
            _ => return Err(ParseError::new(line, "expected `S -> T`")),
        }
    }
    Ok(out)
}
