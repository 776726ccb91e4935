//! Path taxonomy and bucket decomposition.

use std::collections::VecDeque;

use super::{GraphError, Pdag, VertexId, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathKind {
    /// Every step is `V_i -> V_{i+1}`.
    Causal,
    /// No step points backwards, at least one is undirected.
    PossiblyCausal,
    /// Some step is `V_i <- V_{i+1}`.
    NonCausal,
}

/// Maximal undirected-connected subset of a node set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bucket {
    members: VertexSet,
}

impl Bucket {
    pub fn new(members: VertexSet) -> Self {
        assert!(!members.is_empty(), "bucket must be nonempty");
        Bucket { members }
    }

    pub fn members(&self) -> &VertexSet {
        &self.members
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.contains(&v)
    }

    pub fn first(&self) -> VertexId {
        *self.members.first().expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Pdag {
    /// Classifies a path given as a vertex sequence.
    pub fn classify_path(&self, path: &[VertexId]) -> Result<PathKind, GraphError> {
        let mut seen = VertexSet::new();
        for &v in path {
            if v.index() >= self.n() {
                return Err(GraphError::NotAPath(format!(
                    "vertex index {} out of range",
                    v.index()
                )));
            }
            if !seen.insert(v) {
                return Err(GraphError::NotAPath(format!("`{}` repeats", self.name(v))));
            }
        }
        let mut kind = PathKind::Causal;
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !self.adjacent(a, b) {
                return Err(GraphError::NotAPath(format!(
                    "`{}` and `{}` are not adjacent",
                    self.name(a),
                    self.name(b)
                )));
            }
            if self.is_directed(b, a) {
                kind = PathKind::NonCausal;
            } else if self.is_undirected(a, b) && kind == PathKind::Causal {
                kind = PathKind::PossiblyCausal;
            }
        }
        Ok(kind)
    }

    /// Whether a proper possibly causal path from `src` to `dst` exists whose
    /// first edge is undirected. Paths may not revisit `src` after the start.
    ///
    /// Any walk obeying the step rule reduces to a path with the same first
    /// edge, so plain reachability with a visited set is exact.
    pub fn exists_proper_possibly_causal_path_starting_undirected(
        &self,
        src: &VertexSet,
        dst: &VertexSet,
    ) -> bool {
        let mut visited = vec![false; self.n()];
        let mut queue = VecDeque::new();
        for &s in src {
            for v in self.siblings_of(s) {
                if !src.contains(&v) && !visited[v.index()] {
                    visited[v.index()] = true;
                    queue.push_back(v);
                }
            }
        }
        while let Some(v) = queue.pop_front() {
            if dst.contains(&v) {
                return true;
            }
            for w in self.vertices() {
                let step = self.is_directed(v, w) || self.is_undirected(v, w);
                if step && !src.contains(&w) && !visited[w.index()] {
                    visited[w.index()] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// Partition of `nodes` into maximal sets connected by undirected paths
    /// running inside `nodes`. Sorted by smallest member.
    pub fn bucket_decomposition(&self, nodes: &VertexSet) -> Vec<Bucket> {
        let mut assigned = VertexSet::new();
        let mut out = Vec::new();
        for &start in nodes {
            if assigned.contains(&start) {
                continue;
            }
            let mut members = VertexSet::from([start]);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for w in self.siblings_of(v) {
                    if nodes.contains(&w) && members.insert(w) {
                        stack.push(w);
                    }
                }
            }
            assigned.extend(members.iter().copied());
            out.push(Bucket::new(members));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source_clique() -> Pdag {
        "A -> X1\nA -> X2\nA -> X3\nX1 -- X2\nX1 -- X3\nX2 -- X3"
            .parse()
            .unwrap()
    }

    fn ids(g: &Pdag, names: &[&str]) -> Vec<VertexId> {
        names.iter().map(|n| g.vertex(n).unwrap()).collect()
    }

    fn set(g: &Pdag, names: &[&str]) -> VertexSet {
        ids(g, names).into_iter().collect()
    }

    #[test]
    fn classify_source_clique_paths() {
        let g = source_clique();
        assert_eq!(
            g.classify_path(&ids(&g, &["A", "X1"])).unwrap(),
            PathKind::Causal
        );
        assert_eq!(
            g.classify_path(&ids(&g, &["X1", "X2"])).unwrap(),
            PathKind::PossiblyCausal
        );
        assert_eq!(
            g.classify_path(&ids(&g, &["X1", "A"])).unwrap(),
            PathKind::NonCausal
        );
        assert_eq!(
            g.classify_path(&ids(&g, &["A", "X1", "X2"])).unwrap(),
            PathKind::PossiblyCausal
        );
        assert_eq!(
            g.classify_path(&ids(&g, &["X2", "X1", "A"])).unwrap(),
            PathKind::NonCausal
        );
    }

    #[test]
    fn classify_rejects_non_paths() {
        let g: Pdag = "A -> B\nC -> D".parse().unwrap();
        assert!(g.classify_path(&ids(&g, &["A", "C"])).is_err());
        assert!(g.classify_path(&ids(&g, &["A", "B", "A"])).is_err());
    }

    #[test]
    fn undirected_start_paths() {
        let g = source_clique();
        assert!(!g.exists_proper_possibly_causal_path_starting_undirected(
            &set(&g, &["A"]),
            &set(&g, &["X1", "X2", "X3"])
        ));
        let ab: Pdag = "A -- B".parse().unwrap();
        assert!(ab.exists_proper_possibly_causal_path_starting_undirected(
            &set(&ab, &["A"]),
            &set(&ab, &["B"])
        ));
        // A - B -> C reaches C; A - B <- C does not.
        let g: Pdag = "A -- B\nB -> C".parse().unwrap();
        assert!(g.exists_proper_possibly_causal_path_starting_undirected(
            &set(&g, &["A"]),
            &set(&g, &["C"])
        ));
        let g: Pdag = "A -- B\nC -> B".parse().unwrap();
        assert!(!g.exists_proper_possibly_causal_path_starting_undirected(
            &set(&g, &["A"]),
            &set(&g, &["C"])
        ));
    }

    #[test]
    fn buckets_source_clique() {
        let g = source_clique();
        let buckets = g.bucket_decomposition(&g.vertex_set());
        let expect = vec![
            Bucket::new(set(&g, &["A"])),
            Bucket::new(set(&g, &["X1", "X2", "X3"])),
        ];
        assert_eq!(buckets, expect);
    }

    #[test]
    fn buckets_only_use_paths_inside_the_node_set() {
        let g: Pdag = "A -- B\nB -- C".parse().unwrap();
        let buckets = g.bucket_decomposition(&set(&g, &["A", "C"]));
        assert_eq!(buckets.len(), 2);
    }

    #[test]
    fn dag_buckets_are_singletons() {
        let g: Pdag = "A -> B\nB -> C\nA -> C".parse().unwrap();
        assert!(g
            .bucket_decomposition(&g.vertex_set())
            .iter()
            .all(|b| b.len() == 1));
    }
}
