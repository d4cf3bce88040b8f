//! TOML description of a periodic graph.
//!
//! ```toml
//! dimension = 1                      # number of period translations
//!
//! [[vertex]]
//! name = "v"
//! coupling = { kind = "delta", alpha = 2 }
//! # kind: "kirchhoff" | "delta" | "circulant" | "matrix"
//! # matrix: rows = [[[re, im], ...], ...]
//! slots = ["e0.tail", "e1.tail", "e0.head", "e1.head"]   # optional
//!
//! [[edge]]
//! name = "e0"                        # optional, defaults to e<index>
//! tail = "v"
//! head = "v"
//! length = "pi"                      # number or token: pi, golden, 3/2, 2*pi, pi/3
//! potential = 0.3                    # optional
//! shift = [1]                        # cell offset of the head; optional for dimension 0
//!
//! [[lead]]
//! vertex = "v"
//! ```
//!
//! Errors carry the line number and the offending field.

use std::collections::HashMap;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use toml::Spanned;

use crate::coupling::VertexCoupling;
use crate::graph::{CouplingSpec, EdgeEnd, GraphBuilder, MetricGraph};
use crate::{CMatrix, Error, Result};

/// Parses a real number token: a literal, `pi`, `golden`, or a product or
/// quotient of those such as `3/2`, `2*pi`, `-pi/3`.
pub fn parse_real(token: &str) -> std::result::Result<f64, String> {
    let t = token.trim();
    if t.is_empty() {
        return Err("empty number".into());
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    let atom = |s: &str| -> std::result::Result<f64, String> {
        match s.trim() {
            "pi" | "π" => Ok(std::f64::consts::PI),
            "golden" => Ok(0.5 * (1.0 + 5f64.sqrt())),
            other => other.parse::<f64>().map_err(|_| format!("`{token}` is not a number")),
        }
    };
    let mut value = 1.0;
    let mut op = '*';
    let mut start = 0;
    let chars: Vec<(usize, char)> = body.char_indices().collect();
    for &(i, c) in chars.iter().chain(std::iter::once(&(body.len(), '*'))) {
        // `1e-3` style exponents are not operators
        if (c == '*' || c == '/') && i >= start {
            let x = atom(&body[start..i])?;
            if op == '*' {
                value *= x;
            } else {
                if x == 0.0 {
                    return Err(format!("`{token}` divides by zero"));
                }
                value /= x;
            }
            op = c;
            start = i + c.len_utf8();
        }
    }
    let v = sign * value;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{token}` is not finite"))
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RealDoc {
    Int(i64),
    Float(f64),
    Text(String),
}

impl RealDoc {
    fn value(&self) -> std::result::Result<f64, String> {
        match self {
            RealDoc::Int(i) => Ok(*i as f64),
            RealDoc::Float(x) => Ok(*x),
            RealDoc::Text(s) => parse_real(s),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc {
    dimension: Spanned<i64>,
    #[serde(default)]
    vertex: Vec<VertexDoc>,
    #[serde(default)]
    edge: Vec<EdgeDoc>,
    #[serde(default)]
    lead: Vec<LeadDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    name: Spanned<String>,
    coupling: Spanned<CouplingDoc>,
    slots: Option<Spanned<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingDoc {
    kind: String,
    alpha: Option<RealDoc>,
    rows: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    name: Option<Spanned<String>>,
    tail: Spanned<String>,
    head: Spanned<String>,
    length: Spanned<RealDoc>,
    potential: Option<Spanned<RealDoc>>,
    shift: Option<Spanned<Vec<i64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeadDoc {
    vertex: Spanned<String>,
}

struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn line(&self, offset: usize) -> usize {
        self.0[..offset.min(self.0.len())].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err<T>(&self, span: std::ops::Range<usize>, field: &str, message: impl Into<String>) -> Result<T> {
        Err(Error::GraphFile {
            line: self.line(span.start),
            field: field.to_string(),
            message: message.into(),
        })
    }
}

/// Reads a graph description from a file.
pub fn load_graph(path: impl AsRef<Path>) -> Result<MetricGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_graph(&text)
}

/// Parses a graph description.
pub fn parse_graph(text: &str) -> Result<MetricGraph> {
    let lines = Lines(text);
    let doc: FileDoc = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| lines.line(s.start));
        Error::GraphFile {
            line,
            field: field_of_message(e.message()),
            message: e.message().trim().to_string(),
        }
    })?;
    let dim = *doc.dimension.get_ref();
    if !(0..=3).contains(&dim) {
        return lines.err(doc.dimension.span(), "dimension", "must be 0, 1, 2 or 3");
    }
    let dim = dim as usize;
    let mut b = GraphBuilder::new(dim);

    let mut vertex_ids: HashMap<String, usize> = HashMap::new();
    for v in &doc.vertex {
        let name = v.name.get_ref().clone();
        if vertex_ids.contains_key(&name) {
            return lines.err(v.name.span(), "vertex.name", format!("duplicate vertex `{name}`"));
        }
        let c = v.coupling.get_ref();
        let span = v.coupling.span();
        let spec = match c.kind.as_str() {
            "kirchhoff" => CouplingSpec::Kirchhoff,
            "delta" => {
                let Some(alpha) = &c.alpha else {
                    return lines.err(span, "vertex.coupling.alpha", "delta coupling needs `alpha`");
                };
                match alpha.value() {
                    Ok(a) => CouplingSpec::Delta(a),
                    Err(m) => return lines.err(span, "vertex.coupling.alpha", m),
                }
            }
            "circulant" => CouplingSpec::CirculantShift,
            "matrix" => {
                let Some(rows) = &c.rows else {
                    return lines.err(span, "vertex.coupling.rows", "matrix coupling needs `rows`");
                };
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) {
                    return lines.err(span, "vertex.coupling.rows", "rows must form a nonempty square matrix");
                }
                let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
                if let Err(e) = VertexCoupling::new(m.clone()) {
                    return lines.err(span, "vertex.coupling.rows", e.to_string());
                }
                CouplingSpec::Matrix(m)
            }
            other => {
                return lines.err(
                    span,
                    "vertex.coupling.kind",
                    format!("unknown coupling `{other}` (expected kirchhoff, delta, circulant or matrix)"),
                )
            }
        };
        if c.kind != "delta" && c.alpha.is_some() {
            return lines.err(span, "vertex.coupling.alpha", format!("`alpha` does not apply to `{}`", c.kind));
        }
        let id = b.vertex(name.clone(), spec);
        vertex_ids.insert(name, id);
    }

    let find = |s: &Spanned<String>, field: &str| -> Result<usize> {
        match vertex_ids.get(s.get_ref()) {
            Some(&id) => Ok(id),
            None => lines.err(s.span(), field, format!("unknown vertex `{}`", s.get_ref())),
        }
    };

    let mut edge_ids: HashMap<String, usize> = HashMap::new();
    for (i, e) in doc.edge.iter().enumerate() {
        let tail = find(&e.tail, "edge.tail")?;
        let head = find(&e.head, "edge.head")?;
        let length = match e.length.get_ref().value() {
            Ok(l) if l > 0.0 => l,
            Ok(l) => return lines.err(e.length.span(), "edge.length", format!("length {l} must be positive")),
            Err(m) => return lines.err(e.length.span(), "edge.length", m),
        };
        let potential = match &e.potential {
            None => 0.0,
            Some(p) => match p.get_ref().value() {
                Ok(x) => x,
                Err(m) => return lines.err(p.span(), "edge.potential", m),
            },
        };
        let shift = match &e.shift {
            None if dim == 0 => Vec::new(),
            None => return lines.err(e.tail.span(), "edge.shift", format!("missing `shift` ({dim} components)")),
            Some(s) if s.get_ref().len() != dim => {
                return lines.err(
                    s.span(),
                    "edge.shift",
                    format!("has {} components, expected {dim}", s.get_ref().len()),
                )
            }
            Some(s) => s.get_ref().clone(),
        };
        let id = b.edge(tail, head, length, potential, &shift);
        let name = e.name.as_ref().map_or_else(|| format!("e{i}"), |n| n.get_ref().clone());
        if edge_ids.insert(name.clone(), id).is_some() {
            let span = e.name.as_ref().map_or(e.tail.span(), |n| n.span());
            return lines.err(span, "edge.name", format!("duplicate edge `{name}`"));
        }
    }

    for l in &doc.lead {
        let v = find(&l.vertex, "lead.vertex")?;
        b.lead(v);
    }

    for v in &doc.vertex {
        let Some(slots) = &v.slots else { continue };
        let mut order = Vec::new();
        for s in slots.get_ref() {
            let end = if let Some(idx) = s.strip_prefix("lead") {
                idx.parse::<usize>().ok().filter(|&i| i < doc.lead.len()).map(EdgeEnd::Lead)
            } else if let Some((name, which)) = s.rsplit_once('.') {
                edge_ids.get(name).and_then(|&id| match which {
                    "tail" => Some(EdgeEnd::Tail(id)),
                    "head" => Some(EdgeEnd::Head(id)),
                    _ => None,
                })
            } else {
                None
            };
            match end {
                Some(e) => order.push(e),
                None => {
                    return lines.err(
                        slots.span(),
                        "vertex.slots",
                        format!("`{s}` is not `<edge>.tail`, `<edge>.head` or `lead<index>`"),
                    )
                }
            }
        }
        b.slots(vertex_ids[v.name.get_ref()], order);
    }

    b.build().map_err(|e| {
        let message = e.to_string();
        // point at the vertex the builder complains about, if it names one
        let vertex = doc
            .vertex
            .iter()
            .find(|v| message.contains(&format!("vertex `{}`", v.name.get_ref())));
        match vertex {
            Some(v) => Error::GraphFile {
                line: lines.line(v.coupling.span().start),
                field: "vertex.coupling".into(),
                message,
            },
            None => Error::GraphFile {
                line: lines.line(doc.dimension.span().start),
                field: "graph".into(),
                message,
            },
        }
    })
}

fn field_of_message(msg: &str) -> String {
    // toml reports e.g. "missing field `length`" or "unknown field `lenght`"
    msg.split('`').nth(1).unwrap_or("document").to_string()
}
