//! Metric graphs with Floquet periodicity.
//!
//! A periodic graph is described by one period cell: its vertices, the edges
//! leaving them, and for every edge the lattice translation (`shift`) of the
//! cell containing the head vertex. An edge with a nonzero shift is a *cut*
//! edge; its head end picks up the Floquet phase `e^{-iθ·shift}` when the
//! vertex conditions are written in the reference cell. Semi-infinite leads
//! are allowed for compact (non-periodic) graphs.
//!
//! Edge-end ordering at each vertex is explicit: couplings refer to slots.
//! The default order lists tail ends in edge order, then head ends in edge
//! order, then leads.

use crate::coupling::VertexCoupling;
use crate::{CMatrix, Error, Result};

/// One end of an edge, or a lead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeEnd {
    Tail(usize),
    Head(usize),
    Lead(usize),
}

/// An edge of the period cell, parametrised by `x ∈ [0, length]` from tail to head.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub length: f64,
    /// Constant tangential vector potential along the edge direction.
    pub potential: f64,
    /// Cell offset of the head vertex (length = lattice dimension).
    pub shift: Vec<i64>,
}

impl Edge {
    pub fn is_cut(&self) -> bool {
        self.shift.iter().any(|&s| s != 0)
    }
}

/// A half-line `[0, ∞)` attached at one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lead {
    pub vertex: usize,
}

/// Coupling family, resolved against the vertex degree when the graph is built.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingSpec {
    Kirchhoff,
    Delta(f64),
    CirculantShift,
    Matrix(CMatrix),
}

impl CouplingSpec {
    pub fn resolve(&self, degree: usize) -> Result<VertexCoupling> {
        match self {
            CouplingSpec::Kirchhoff => VertexCoupling::kirchhoff(degree),
            CouplingSpec::Delta(alpha) => VertexCoupling::delta(degree, *alpha),
            CouplingSpec::CirculantShift => VertexCoupling::circulant_shift(degree),
            CouplingSpec::Matrix(m) => {
                if m.nrows() != degree {
                    return Err(Error::Dimension {
                        expected: degree,
                        found: m.nrows(),
                    });
                }
                VertexCoupling::with_tolerance(m.clone(), 1e-9)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub name: String,
    pub coupling: VertexCoupling,
    pub slots: Vec<EdgeEnd>,
}

impl Vertex {
    pub fn degree(&self) -> usize {
        self.slots.len()
    }
}

/// Period cell of a (possibly trivially) periodic metric graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    leads: Vec<Lead>,
    dimension: usize,
}

impl MetricGraph {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn leads(&self) -> &[Lead] {
        &self.leads
    }

    /// Number of independent period translations.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.name == name)
    }

    /// Copy of the graph with every edge potential replaced via `f(edge index, old)`.
    pub fn with_potentials(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let mut g = self.clone();
        for (i, e) in g.edges.iter_mut().enumerate() {
            e.potential = f(i, e.potential);
        }
        g
    }
}

struct PendingVertex {
    name: String,
    coupling: CouplingSpec,
    slots: Option<Vec<EdgeEnd>>,
}

/// Incremental construction of a [`MetricGraph`].
pub struct GraphBuilder {
    dimension: usize,
    vertices: Vec<PendingVertex>,
    edges: Vec<Edge>,
    leads: Vec<Lead>,
}

impl GraphBuilder {
    /// Starts a graph with `dimension` period translations (0 for compact graphs).
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            vertices: Vec::new(),
            edges: Vec::new(),
            leads: Vec::new(),
        }
    }

    pub fn vertex(&mut self, name: impl Into<String>, coupling: CouplingSpec) -> usize {
        self.vertices.push(PendingVertex {
            name: name.into(),
            coupling,
            slots: None,
        });
        self.vertices.len() - 1
    }

    pub fn edge(&mut self, tail: usize, head: usize, length: f64, potential: f64, shift: &[i64]) -> usize {
        self.edges.push(Edge {
            tail,
            head,
            length,
            potential,
            shift: shift.to_vec(),
        });
        self.edges.len() - 1
    }

    pub fn lead(&mut self, vertex: usize) -> usize {
        self.leads.push(Lead { vertex });
        self.leads.len() - 1
    }

    /// Overrides the slot order at `vertex`.
    pub fn slots(&mut self, vertex: usize, order: Vec<EdgeEnd>) -> &mut Self {
        self.vertices[vertex].slots = Some(order);
        self
    }

    pub fn build(self) -> Result<MetricGraph> {
        let nv = self.vertices.len();
        if nv == 0 {
            return Err(Error::Graph("graph has no vertices".into()));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.tail >= nv || e.head >= nv {
                return Err(Error::Graph(format!("edge {i} refers to a missing vertex")));
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::Graph(format!(
                    "edge {i} has length {}; period-cell edges need finite positive length",
                    e.length
                )));
            }
            if !e.potential.is_finite() {
                return Err(Error::Graph(format!("edge {i} has a non-finite potential")));
            }
            if e.shift.len() != self.dimension {
                return Err(Error::Graph(format!(
                    "edge {i}: cut-edge shift has {} components but the lattice has {} period translations",
                    e.shift.len(),
                    self.dimension
                )));
            }
        }
        for (i, l) in self.leads.iter().enumerate() {
            if l.vertex >= nv {
                return Err(Error::Graph(format!("lead {i} refers to a missing vertex")));
            }
        }

        let mut default_slots: Vec<Vec<EdgeEnd>> = vec![Vec::new(); nv];
        for (i, e) in self.edges.iter().enumerate() {
            default_slots[e.tail].push(EdgeEnd::Tail(i));
        }
        for (i, e) in self.edges.iter().enumerate() {
            default_slots[e.head].push(EdgeEnd::Head(i));
        }
        for (i, l) in self.leads.iter().enumerate() {
            default_slots[l.vertex].push(EdgeEnd::Lead(i));
        }

        let mut vertices = Vec::with_capacity(nv);
        for (vi, (pending, attached)) in self.vertices.into_iter().zip(default_slots).enumerate() {
            let slots = match pending.slots {
                None => attached,
                Some(order) => {
                    let mut a = attached.clone();
                    let mut b = order.clone();
                    let key = |e: &EdgeEnd| match *e {
                        EdgeEnd::Tail(i) => (0, i),
                        EdgeEnd::Head(i) => (1, i),
                        EdgeEnd::Lead(i) => (2, i),
                    };
                    a.sort_by_key(key);
                    b.sort_by_key(key);
                    if a != b {
                        return Err(Error::Graph(format!(
                            "slot order at vertex `{}` must list each attached edge end exactly once",
                            pending.name
                        )));
                    }
                    order
                }
            };
            if slots.is_empty() {
                return Err(Error::Graph(format!("vertex `{}` (#{vi}) has no attached edges", pending.name)));
            }
            let coupling = pending.coupling.resolve(slots.len()).map_err(|e| {
                Error::Graph(format!("coupling at vertex `{}`: {e}", pending.name))
            })?;
            vertices.push(Vertex {
                name: pending.name,
                coupling,
                slots,
            });
        }
        Ok(MetricGraph {
            vertices,
            edges: self.edges,
            leads: self.leads,
            dimension: self.dimension,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_slot_order_and_degree() {
        let mut b = GraphBuilder::new(2);
        let v = b.vertex("v", CouplingSpec::CirculantShift);
        b.edge(v, v, 1.0, 0.0, &[1, 0]);
        b.edge(v, v, 1.0, 0.0, &[0, 1]);
        let g = b.build().unwrap();
        assert_eq!(
            g.vertices()[0].slots,
            vec![EdgeEnd::Tail(0), EdgeEnd::Tail(1), EdgeEnd::Head(0), EdgeEnd::Head(1)]
        );
        assert_eq!(g.vertices()[0].coupling.degree(), 4);
    }

    #[test]
    fn validation_errors() {
        let mut b = GraphBuilder::new(1);
        let v = b.vertex("v", CouplingSpec::Kirchhoff);
        b.edge(v, v, 0.0, 0.0, &[1]);
        assert!(matches!(b.build(), Err(Error::Graph(_))));

        let mut b = GraphBuilder::new(1);
        let v = b.vertex("v", CouplingSpec::Kirchhoff);
        b.edge(v, v, 1.0, 0.0, &[1, 0]);
        assert!(b.build().unwrap_err().to_string().contains("period translations"));

        let mut b = GraphBuilder::new(1);
        let v = b.vertex("v", CouplingSpec::Kirchhoff);
        b.edge(v, v, 1.0, 0.0, &[1]);
        b.slots(v, vec![EdgeEnd::Tail(0), EdgeEnd::Tail(0)]);
        assert!(b.build().is_err());

        let mut b = GraphBuilder::new(0);
        b.vertex("lonely", CouplingSpec::Kirchhoff);
        assert!(b.build().is_err());
    }
}
