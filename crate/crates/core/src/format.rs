//! Line-oriented graph text format.
//!
//! ```text
//! # comment
//! Z -> X
//! X -> Y
//! Z <-> Y
//! node W
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::admg::{Admg, GraphError, VarSet, VariableId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: unexpected token {token:?}")]
    Syntax { line: usize, token: String },
    #[error("line {line}: {source}")]
    Graph {
        line: usize,
        #[source]
        source: GraphError,
    },
    #[error("{0}")]
    Invalid(GraphError),
}

impl ParseError {
    /// 1-based line number of the offending input, when known.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. } | ParseError::Graph { line, .. } => Some(*line),
            ParseError::Invalid(_) => None,
        }
    }
}

enum Edge {
    Directed,
    Bidirected,
}

fn name(token: &str, line: usize) -> Result<VariableId, ParseError> {
    VariableId::new(token).map_err(|_| ParseError::Syntax {
        line,
        token: token.to_string(),
    })
}

pub fn parse_graph(text: &str) -> Result<Admg, ParseError> {
    let mut vertices = VarSet::new();
    let mut directed = Vec::new();
    let mut bidirected = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.as_slice() {
            ["node", rest @ ..] if !rest.is_empty() => {
                for t in rest {
                    vertices.insert(name(t, line)?);
                }
            }
            [a, arrow, b] => {
                let kind = match *arrow {
                    "->" => Edge::Directed,
                    "<->" => Edge::Bidirected,
                    other => {
                        return Err(ParseError::Syntax {
                            line,
                            token: other.to_string(),
                        })
                    }
                };
                let (a, b) = (name(a, line)?, name(b, line)?);
                if a == b {
                    return Err(ParseError::Graph {
                        line,
                        source: GraphError::SelfLoop(a),
                    });
                }
                vertices.insert(a.clone());
                vertices.insert(b.clone());
                match kind {
                    Edge::Directed => directed.push((line, a, b)),
                    Edge::Bidirected => bidirected.push((line, a, b)),
                }
            }
            _ => {
                let token = tokens.last().copied().unwrap_or_default().to_string();
                return Err(ParseError::Syntax { line, token });
            }
        }
    }
    // report duplicates against the line that repeats them
    let mut seen_d = std::collections::BTreeSet::new();
    for (line, a, b) in &directed {
        if !seen_d.insert((a, b)) {
            return Err(ParseError::Graph {
                line: *line,
                source: GraphError::DuplicateEdge(format!("{a} -> {b}")),
            });
        }
    }
    let mut seen_b = std::collections::BTreeSet::new();
    for (line, a, b) in &bidirected {
        if !seen_b.insert(if a <= b { (a, b) } else { (b, a) }) {
            return Err(ParseError::Graph {
                line: *line,
                source: GraphError::DuplicateEdge(format!("{a} <-> {b}")),
            });
        }
    }
    Admg::build(
        vertices,
        directed.into_iter().map(|(_, a, b)| (a, b)),
        bidirected.into_iter().map(|(_, a, b)| (a, b)),
    )
    .map_err(ParseError::Invalid)
}

/// Renders a graph in the text format; `parse_graph` reads it back unchanged.
pub fn render_graph(g: &Admg) -> String {
    let mut out = String::new();
    for v in g.vertices() {
        let touched = g.directed_edges().iter().any(|(a, b)| a == v || b == v)
            || g.bidirected_edges().iter().any(|(a, b)| a == v || b == v);
        if !touched {
            let _ = writeln!(out, "node {v}");
        }
    }
    for (a, b) in g.directed_edges() {
        let _ = writeln!(out, "{a} -> {b}");
    }
    for (a, b) in g.bidirected_edges() {
        let _ = writeln!(out, "{a} <-> {b}");
    }
    out
}
