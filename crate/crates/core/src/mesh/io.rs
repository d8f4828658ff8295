//! Line-oriented neutral mesh format.
//!
//! ```text
//! # comment
//! nodes <N> elements <E>
//! <id> <x> <y>                 (N lines)
//! <id> <n0> ... <n8>           (E lines)
//! boundary <name> <count>
//! <id> <id> ...                (count ids, any line breaks)
//! ```
//!
//! Indices are 0-based; element nodes follow the [`crate::quad9`] ordering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Mesh, Node, Quad9Element};
use crate::error::{Error, Result};

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text).map_err(|e| e.context(format!("loading mesh {}", path.display())))
}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("");
            items.extend(content.split_whitespace().map(|t| (i + 1, t)));
        }
        let last_line = text.lines().count().max(1);
        Tokens {
            items,
            pos: 0,
            last_line,
        }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.items.get(self.pos).copied()
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let tok = self.peek().ok_or_else(|| Error::MeshParse {
            line: self.last_line,
            message: format!("unexpected end of file, expected {what}"),
        })?;
        self.pos += 1;
        Ok(tok)
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let (line, tok) = self.next(kw)?;
        if tok != kw {
            return Err(Error::MeshParse {
                line,
                message: format!("expected `{kw}`, found `{tok}`"),
            });
        }
        Ok(())
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<(usize, T)> {
        let (line, tok) = self.next(what)?;
        tok.parse()
            .map(|v| (line, v))
            .map_err(|_| Error::MeshParse {
                line,
                message: format!("invalid {what} `{tok}`"),
            })
    }
}

/// Parses mesh text; errors carry the offending line number.
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut tok = Tokens::new(text);
    tok.keyword("nodes")?;
    let (_, n_nodes): (_, usize) = tok.parse("node count")?;
    tok.keyword("elements")?;
    let (_, n_elems): (_, usize) = tok.parse("element count")?;

    let mut nodes = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let (line, id): (_, usize) = tok.parse("node id")?;
        if id != i {
            return Err(Error::MeshParse {
                line,
                message: format!("expected node id {i}, found {id}"),
            });
        }
        let (_, x): (_, f64) = tok.parse("x coordinate")?;
        let (line, y): (_, f64) = tok.parse("y coordinate")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::MeshParse {
                line,
                message: format!("non-finite coordinates for node {id}"),
            });
        }
        nodes.push(Node { id, x, y });
    }

    let mut elements = Vec::with_capacity(n_elems);
    let mut element_lines = Vec::with_capacity(n_elems);
    for e in 0..n_elems {
        let (line, id): (_, usize) = tok.parse("element id")?;
        if id != e {
            return Err(Error::MeshParse {
                line,
                message: format!("expected element id {e}, found {id}"),
            });
        }
        let mut node_ids = [0usize; 9];
        for slot in node_ids.iter_mut() {
            let (line, n): (_, usize) = tok.parse("element node")?;
            if n >= n_nodes {
                return Err(Error::MeshParse {
                    line,
                    message: format!("element {e} references missing node {n}"),
                });
            }
            *slot = n;
        }
        elements.push(Quad9Element { node_ids });
        element_lines.push(line);
    }

    let mut sets: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    while tok.peek().is_some() {
        tok.keyword("boundary")?;
        let (line, name) = tok.next("boundary name")?;
        let (_, count): (_, usize) = tok.parse("boundary node count")?;
        let mut ids = Vec::with_capacity(count);
        for _ in 0..count {
            let (l, n): (_, usize) = tok.parse("boundary node id")?;
            if n >= n_nodes {
                return Err(Error::MeshParse {
                    line: l,
                    message: format!("boundary `{name}` references missing node {n}"),
                });
            }
            ids.push(n);
        }
        if sets.insert(name.to_string(), ids).is_some() {
            return Err(Error::MeshParse {
                line,
                message: format!("duplicate boundary set `{name}`"),
            });
        }
    }

    Mesh::new(nodes, elements, sets).map_err(|e| match e {
        Error::InvertedElement { element, det_j } => Error::MeshParse {
            line: element_lines[element],
            message: format!("element {element} is inverted (det J = {det_j:.3e})"),
        },
        other => other,
    })
}

/// Serializes a mesh; `parse_mesh(&write_mesh(m))` reproduces `m` exactly.
pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "nodes {} elements {}",
        mesh.node_count(),
        mesh.element_count()
    );
    for n in mesh.nodes() {
        // `{:?}` prints the shortest representation that round-trips.
        let _ = writeln!(out, "{} {:?} {:?}", n.id, n.x, n.y);
    }
    for (e, el) in mesh.elements().iter().enumerate() {
        let _ = write!(out, "{e}");
        for id in el.node_ids {
            let _ = write!(out, " {id}");
        }
        out.push('\n');
    }
    for set in mesh.boundary_sets().values() {
        let _ = writeln!(out, "boundary {} {}", set.name, set.node_ids.len());
        for chunk in set.node_ids.chunks(12) {
            let line: Vec<String> = chunk.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}
