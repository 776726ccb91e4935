//! Edge-marked graphs over named vertices.
//!
//! [`Pdag`] is the single representation used for DAGs, CPDAGs and MPDAGs.
//! Marks are kept in a dense `n x n` table, which is the right trade-off for
//! the graph sizes this crate deals with (tens of vertices).

mod parse;
mod paths;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse_background, parse_graph, ParseError};
pub use paths::{Bucket, PathKind};

/// Index of a vertex inside one [`Pdag`]. Stable under edge edits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(usize);

impl VertexId {
    pub const fn new(index: usize) -> Self {
        VertexId(index)
    }

    pub const fn index(self) -> usize {
        self.0
    }
}

/// Sorted vertex set; iteration order is index order.
pub type VertexSet = BTreeSet<VertexId>;

/// One edge of a [`Pdag`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Edge {
    Directed {
        tail: VertexId,
        head: VertexId,
    },
    /// Stored with `a < b`.
    Undirected(VertexId, VertexId),
}

impl Edge {
    pub fn endpoints(&self) -> (VertexId, VertexId) {
        match *self {
            Edge::Directed { tail, head } => (tail, head),
            Edge::Undirected(a, b) => (a, b),
        }
    }
}

/// Mark of the ordered pair `(i, j)` as seen from `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Mark {
    None,
    /// `i -> j`
    Out,
    /// `i <- j`
    In,
    Undirected,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex name `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("self-edge on `{0}`")]
    SelfEdge(String),
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
    #[error("directed cycle")]
    DirectedCycle,
    #[error("graph is not fully directed")]
    NotDirected,
    #[error("not a path: {0}")]
    NotAPath(String),
}

/// Partially directed graph with at most one edge per vertex pair and no
/// directed cycles.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pdag {
    names: Vec<String>,
    marks: Vec<Mark>,
}

impl Pdag {
    /// Graph with the given vertices and no edges.
    pub fn empty<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, GraphError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if seen.insert(name.as_str(), i).is_some() {
                return Err(GraphError::DuplicateVertex(name.clone()));
            }
        }
        let n = names.len();
        Ok(Pdag {
            names,
            marks: vec![Mark::None; n * n],
        })
    }

    /// Builds a graph and validates it: no self-edges, no repeated pairs,
    /// no directed cycle.
    pub fn from_edges<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        edges: &[Edge],
    ) -> Result<Self, GraphError> {
        let mut g = Self::empty(names)?;
        for e in edges {
            let (a, b) = e.endpoints();
            if a == b {
                return Err(GraphError::SelfEdge(g.name(a).to_owned()));
            }
            if g.adjacent(a, b) {
                return Err(GraphError::DuplicateEdge(
                    g.name(a).to_owned(),
                    g.name(b).to_owned(),
                ));
            }
            match *e {
                Edge::Directed { tail, head } => g.set_directed(tail, head),
                Edge::Undirected(a, b) => g.set_undirected(a, b),
            }
        }
        if g.has_directed_cycle() {
            return Err(GraphError::DirectedCycle);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n()).map(VertexId)
    }

    pub fn vertex_set(&self) -> VertexSet {
        self.vertices().collect()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.0]
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name).map(VertexId)
    }

    /// Resolves a list of names, failing on the first unknown one.
    pub fn vertices_named<'a>(
        &self,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<VertexSet, GraphError> {
        names
            .into_iter()
            .map(|n| {
                self.vertex(n)
                    .ok_or_else(|| GraphError::UnknownVertex(n.to_owned()))
            })
            .collect()
    }

    fn mark(&self, a: VertexId, b: VertexId) -> Mark {
        self.marks[a.0 * self.n() + b.0]
    }

    fn set_pair(&mut self, a: VertexId, b: VertexId, ab: Mark, ba: Mark) {
        let n = self.n();
        self.marks[a.0 * n + b.0] = ab;
        self.marks[b.0 * n + a.0] = ba;
    }

    /// Sets `tail -> head`, replacing whatever was between the pair.
    pub(crate) fn set_directed(&mut self, tail: VertexId, head: VertexId) {
        self.set_pair(tail, head, Mark::Out, Mark::In);
    }

    pub(crate) fn set_undirected(&mut self, a: VertexId, b: VertexId) {
        self.set_pair(a, b, Mark::Undirected, Mark::Undirected);
    }

    pub(crate) fn remove_edge(&mut self, a: VertexId, b: VertexId) {
        self.set_pair(a, b, Mark::None, Mark::None);
    }

    /// Appends an isolated vertex and returns its id.
    pub(crate) fn push_vertex(&mut self, name: String) -> VertexId {
        let old = self.n();
        let n = old + 1;
        let mut marks = vec![Mark::None; n * n];
        for i in 0..old {
            marks[i * n..i * n + old].copy_from_slice(&self.marks[i * old..(i + 1) * old]);
        }
        self.marks = marks;
        self.names.push(name);
        VertexId(old)
    }

    pub fn adjacent(&self, a: VertexId, b: VertexId) -> bool {
        self.mark(a, b) != Mark::None
    }

    /// `a -> b`
    pub fn is_directed(&self, a: VertexId, b: VertexId) -> bool {
        self.mark(a, b) == Mark::Out
    }

    /// `a - b`
    pub fn is_undirected(&self, a: VertexId, b: VertexId) -> bool {
        self.mark(a, b) == Mark::Undirected
    }

    fn select(&self, v: VertexId, m: Mark) -> Vec<VertexId> {
        self.vertices().filter(|&u| self.mark(v, u) == m).collect()
    }

    pub fn parents_of(&self, v: VertexId) -> Vec<VertexId> {
        self.select(v, Mark::In)
    }

    pub fn children_of(&self, v: VertexId) -> Vec<VertexId> {
        self.select(v, Mark::Out)
    }

    /// Undirected neighbours.
    pub fn siblings_of(&self, v: VertexId) -> Vec<VertexId> {
        self.select(v, Mark::Undirected)
    }

    pub fn neighbors_of(&self, v: VertexId) -> Vec<VertexId> {
        self.vertices().filter(|&u| self.adjacent(v, u)).collect()
    }

    /// `pa(nodes) \ nodes`.
    pub fn parents(&self, nodes: &VertexSet) -> VertexSet {
        nodes
            .iter()
            .flat_map(|&v| self.parents_of(v))
            .filter(|u| !nodes.contains(u))
            .collect()
    }

    pub fn children(&self, v: VertexId) -> VertexSet {
        self.children_of(v).into_iter().collect()
    }

    pub fn siblings(&self, v: VertexId) -> VertexSet {
        self.siblings_of(v).into_iter().collect()
    }

    /// All edges, sorted by endpoint indices.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for a in self.vertices() {
            for b in self.vertices().skip(a.0 + 1) {
                match self.mark(a, b) {
                    Mark::None => {}
                    Mark::Out => out.push(Edge::Directed { tail: a, head: b }),
                    Mark::In => out.push(Edge::Directed { tail: b, head: a }),
                    Mark::Undirected => out.push(Edge::Undirected(a, b)),
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.marks.iter().filter(|&&m| m != Mark::None).count() / 2
    }

    pub fn undirected_edges(&self) -> Vec<(VertexId, VertexId)> {
        self.edges()
            .into_iter()
            .filter_map(|e| match e {
                Edge::Undirected(a, b) => Some((a, b)),
                Edge::Directed { .. } => None,
            })
            .collect()
    }

    pub fn directed_edges(&self) -> Vec<(VertexId, VertexId)> {
        self.edges()
            .into_iter()
            .filter_map(|e| match e {
                Edge::Directed { tail, head } => Some((tail, head)),
                Edge::Undirected(..) => None,
            })
            .collect()
    }

    /// True when no undirected edge remains.
    pub fn is_dag(&self) -> bool {
        !self.marks.contains(&Mark::Undirected)
    }

    /// Topological order of the directed part (undirected edges ignored),
    /// smallest index first among ready vertices. `None` on a directed cycle.
    pub fn topological_order(&self) -> Option<Vec<VertexId>> {
        let n = self.n();
        let mut indegree: Vec<usize> = self.vertices().map(|v| self.parents_of(v).len()).collect();
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(i)) = ready.pop() {
            order.push(VertexId(i));
            for c in self.children_of(VertexId(i)) {
                indegree[c.0] -= 1;
                if indegree[c.0] == 0 {
                    ready.push(Reverse(c.0));
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn has_directed_cycle(&self) -> bool {
        self.topological_order().is_none()
    }

    /// Vertices reachable from `v` along directed edges, excluding `v`
    /// unless it sits on a directed cycle.
    pub fn descendants(&self, v: VertexId) -> VertexSet {
        let mut seen = VertexSet::new();
        let mut stack = self.children_of(v);
        while let Some(u) = stack.pop() {
            if seen.insert(u) {
                stack.extend(self.children_of(u));
            }
        }
        seen
    }

    /// Same vertices, every adjacency undirected.
    pub fn skeleton(&self) -> Pdag {
        let mut out = self.clone();
        for m in out.marks.iter_mut() {
            if *m != Mark::None {
                *m = Mark::Undirected;
            }
        }
        out
    }

    /// Unshielded colliders `u -> mid <- v` among directed edges, reported
    /// once each with `u < v`. Errors unless the graph is a DAG.
    pub fn unshielded_colliders(
        &self,
    ) -> Result<BTreeSet<(VertexId, VertexId, VertexId)>, GraphError> {
        if !self.is_dag() {
            return Err(GraphError::NotDirected);
        }
        Ok(self.directed_unshielded_colliders())
    }

    /// Unshielded colliders formed by directed edges only; undirected edges
    /// are ignored. Works on any PDAG.
    pub fn directed_unshielded_colliders(&self) -> BTreeSet<(VertexId, VertexId, VertexId)> {
        let mut out = BTreeSet::new();
        for mid in self.vertices() {
            let pa = self.parents_of(mid);
            for (i, &u) in pa.iter().enumerate() {
                for &v in &pa[i + 1..] {
                    if !self.adjacent(u, v) {
                        out.insert((u, mid, v));
                    }
                }
            }
        }
        out
    }

    /// Subgraph induced by `keep`; vertex order follows the original indices.
    pub fn induced(&self, keep: &VertexSet) -> Pdag {
        let kept: Vec<VertexId> = keep.iter().copied().collect();
        let names = kept.iter().map(|&v| self.name(v).to_owned());
        let mut g = Pdag::empty(names).expect("names were unique");
        for (i, &a) in kept.iter().enumerate() {
            for (j, &b) in kept.iter().enumerate() {
                let m = self.mark(a, b);
                g.marks[i * kept.len() + j] = m;
            }
        }
        g
    }

    /// Vertex-for-vertex map from `self` into `other` by name.
    pub fn map_into(&self, other: &Pdag) -> Option<Vec<VertexId>> {
        self.names.iter().map(|n| other.vertex(n)).collect()
    }

    /// Renders a set as `{A,B}` using vertex names.
    pub fn fmt_set(&self, set: &VertexSet) -> String {
        let names: Vec<&str> = set.iter().map(|&v| self.name(v)).collect();
        format!("{{{}}}", names.join(","))
    }
}

impl fmt::Display for Pdag {
    /// Writes the graph in the edge-list file format. All vertices are
    /// declared up front so that reading the output back preserves indices.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for name in &self.names {
            writeln!(f, "node {name}")?;
        }
        for e in self.edges() {
            match e {
                Edge::Directed { tail, head } => {
                    writeln!(f, "{} -> {}", self.name(tail), self.name(head))?
                }
                Edge::Undirected(a, b) => writeln!(f, "{} -- {}", self.name(a), self.name(b))?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Pdag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edges()
            .into_iter()
            .map(|e| match e {
                Edge::Directed { tail, head } => {
                    format!("{}->{}", self.name(tail), self.name(head))
                }
                Edge::Undirected(a, b) => format!("{}-{}", self.name(a), self.name(b)),
            })
            .collect();
        write!(f, "Pdag[{}; {}]", self.names.join(","), edges.join(", "))
    }
}

impl std::str::FromStr for Pdag {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_graph(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(text: &str) -> Pdag {
        text.parse().unwrap()
    }

    #[test]
    fn skeleton_undirects_everything() {
        let s = g("A -> B").skeleton();
        assert_eq!(s, g("A -- B"));
        assert_eq!(Pdag::empty(Vec::<String>::new()).unwrap().skeleton().n(), 0);
    }

    #[test]
    fn skeleton_of_complete_dag_is_complete() {
        let d = g("A -> X1\nA -> X2\nA -> X3\nX1 -> X2\nX1 -> X3\nX2 -> X3");
        let s = d.skeleton();
        assert_eq!(s.edge_count(), 6);
        assert!(s.undirected_edges().len() == 6);
    }

    #[test]
    fn colliders() {
        let d = g("X -> Z\nY -> Z");
        let (x, y, z) = (
            d.vertex("X").unwrap(),
            d.vertex("Y").unwrap(),
            d.vertex("Z").unwrap(),
        );
        assert_eq!(
            d.unshielded_colliders().unwrap(),
            BTreeSet::from([(x, z, y)])
        );
        assert!(g("X -> Y\nY -> Z")
            .unshielded_colliders()
            .unwrap()
            .is_empty());
        assert_eq!(
            g("A -- B").unshielded_colliders(),
            Err(GraphError::NotDirected)
        );
    }

    #[test]
    fn complete_dag_has_no_unshielded_collider() {
        let d = g("A -> X1\nA -> X2\nA -> X3\nX1 -> X2\nX1 -> X3\nX2 -> X3");
        assert!(d.unshielded_colliders().unwrap().is_empty());
    }

    #[test]
    fn parents_children_siblings() {
        let d = g("A -> B\nB -- C\nD -> B");
        let v = |n| d.vertex(n).unwrap();
        assert_eq!(
            d.parents(&VertexSet::from([v("B")])),
            VertexSet::from([v("A"), v("D")])
        );
        assert_eq!(
            d.parents(&VertexSet::from([v("A"), v("B")])),
            VertexSet::from([v("D")])
        );
        assert_eq!(d.children(v("A")), VertexSet::from([v("B")]));
        assert_eq!(d.siblings(v("B")), VertexSet::from([v("C")]));
        assert!(d.parents(&VertexSet::from([v("A")])).is_empty());
    }

    #[test]
    fn push_vertex_keeps_existing_marks() {
        let mut d = g("A -> B\nB -- C");
        let y = d.push_vertex("Y".into());
        assert_eq!(y.index(), 3);
        let v = |n| d.vertex(n).unwrap();
        assert!(d.is_directed(v("A"), v("B")));
        assert!(d.is_undirected(v("C"), v("B")));
        assert!(!d.adjacent(v("A"), y));
    }

    #[test]
    fn induced_subgraph_reindexes() {
        let d = g("A -> B\nB -> C\nA -> C");
        let keep = d.vertices_named(["A", "C"]).unwrap();
        let sub = d.induced(&keep);
        assert_eq!(sub.names(), ["A", "C"]);
        assert!(sub.is_directed(VertexId::new(0), VertexId::new(1)));
    }

    #[test]
    fn display_roundtrips() {
        let d = g("node Q\nA -> B\nB -- C");
        let back: Pdag = d.to_string().parse().unwrap();
        assert_eq!(back, d);
    }
}
