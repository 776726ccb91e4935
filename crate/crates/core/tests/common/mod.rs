//! Brute-force reference implementations shared by integration tests. They
//! work on plain adjacency matrices and never call the library's closure or
//! enumeration code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use fairmpdag::graph::{Edge, Pdag, VertexId};
use fairmpdag::scm::random_er_dag;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `m[i][j]` is true iff `i -> j`.
pub type Dag = Vec<Vec<bool>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn has_cycle(m: &Dag) -> bool {
    let n = m.len();
    let mut indeg: Vec<usize> = (0..n)
        .map(|j| (0..n).filter(|&i| m[i][j]).count())
        .collect();
    let mut stack: Vec<usize> = (0..n).filter(|&j| indeg[j] == 0).collect();
    let mut seen = 0;
    while let Some(i) = stack.pop() {
        seen += 1;
        for j in 0..n {
            if m[i][j] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    stack.push(j);
                }
            }
        }
    }
    seen < n
}

fn adjacent(m: &Dag, a: usize, b: usize) -> bool {
    m[a][b] || m[b][a]
}

/// Unshielded colliders `(u, mid, v)` with `u < v`.
pub fn colliders(m: &Dag, skeleton: &Dag) -> BTreeSet<(usize, usize, usize)> {
    let n = m.len();
    let mut out = BTreeSet::new();
    for mid in 0..n {
        for u in 0..n {
            for v in u + 1..n {
                if m[u][mid] && m[v][mid] && !skeleton[u][v] {
                    out.insert((u, mid, v));
                }
            }
        }
    }
    out
}

pub fn to_matrix(g: &Pdag) -> Dag {
    let n = g.n();
    let mut m = vec![vec![false; n]; n];
    for (t, h) in g.directed_edges() {
        m[t.index()][h.index()] = true;
    }
    m
}

fn skeleton_matrix(g: &Pdag) -> Dag {
    let n = g.n();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| g.adjacent(VertexId::new(i), VertexId::new(j)))
                .collect()
        })
        .collect()
}

/// Every DAG that keeps the directed edges of `g`, orients each undirected
/// edge of `g`, is acyclic, and has exactly `target` as its unshielded
/// colliders.
pub fn orientations_with_colliders(g: &Pdag, target: &BTreeSet<(usize, usize, usize)>) -> Vec<Dag> {
    let skel = skeleton_matrix(g);
    let free: Vec<(usize, usize)> = g
        .undirected_edges()
        .iter()
        .map(|&(a, b)| (a.index(), b.index()))
        .collect();
    let mut out = Vec::new();
    let mut m = to_matrix(g);
    fn rec(
        m: &mut Dag,
        free: &[(usize, usize)],
        skel: &Dag,
        target: &BTreeSet<(usize, usize, usize)>,
        out: &mut Vec<Dag>,
    ) {
        if has_cycle(m) || !colliders(m, skel).is_subset(target) {
            return;
        }
        let Some((&(a, b), rest)) = free.split_first() else {
            if &colliders(m, skel) == target {
                out.push(m.clone());
            }
            return;
        };
        for (t, h) in [(a, b), (b, a)] {
            m[t][h] = true;
            rec(m, rest, skel, target, out);
            m[t][h] = false;
        }
    }
    rec(&mut m, &free, &skel, target, &mut out);
    out
}

/// Markov equivalence class of a DAG by search over all skeleton
/// orientations.
pub fn equivalence_class(d: &Pdag) -> Vec<Dag> {
    let m = to_matrix(d);
    let target = colliders(&m, &skeleton_matrix(d));
    orientations_with_colliders(&d.skeleton(), &target)
}

/// Members of the class represented by an MPDAG `g`: orientations of its
/// undirected edges adding no unshielded collider.
pub fn members(g: &Pdag) -> Vec<Dag> {
    let target = colliders(&to_matrix(g), &skeleton_matrix(g));
    orientations_with_colliders(g, &target)
}

/// Edge directed iff every member agrees on it.
pub fn union_graph(names: &[String], skeleton: &Pdag, dags: &[Dag]) -> Pdag {
    assert!(!dags.is_empty(), "empty class");
    let edges: Vec<Edge> = skeleton
        .undirected_edges()
        .into_iter()
        .map(|(a, b)| {
            let (i, j) = (a.index(), b.index());
            if dags.iter().all(|m| m[i][j]) {
                Edge::Directed { tail: a, head: b }
            } else if dags.iter().all(|m| m[j][i]) {
                Edge::Directed { tail: b, head: a }
            } else {
                Edge::Undirected(a, b)
            }
        })
        .collect();
    Pdag::from_edges(names.to_vec(), &edges).unwrap()
}

pub fn brute_cpdag(d: &Pdag) -> Pdag {
    union_graph(d.names(), &d.skeleton(), &equivalence_class(d))
}

/// Members of `[cpdag]` that contain every `bk` orientation.
pub fn brute_mpdag(cpdag: &Pdag, bk: &BTreeSet<(VertexId, VertexId)>) -> Pdag {
    let dags: Vec<Dag> = members(cpdag)
        .into_iter()
        .filter(|m| bk.iter().all(|&(s, t)| m[s.index()][t.index()]))
        .collect();
    union_graph(cpdag.names(), &cpdag.skeleton(), &dags)
}

pub fn descendants(m: &Dag, s: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([s]);
    let mut stack = vec![s];
    while let Some(v) = stack.pop() {
        for w in 0..m.len() {
            if m[v][w] && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.remove(&s);
    seen
}

pub fn random_dag(rng: &mut ChaCha8Rng, max_vertices: usize) -> Pdag {
    let d = rng.random_range(2..=max_vertices);
    let s = rng.random_range(0..=d * (d - 1) / 2);
    random_er_dag(d, s, rng.random()).unwrap()
}

/// Each directed edge of `d` that is undirected in `cpdag` is kept with
/// probability `p`.
pub fn random_true_background(
    rng: &mut ChaCha8Rng,
    d: &Pdag,
    cpdag: &Pdag,
    p: f64,
) -> BTreeSet<(VertexId, VertexId)> {
    d.directed_edges()
        .into_iter()
        .filter(|&(t, h)| cpdag.is_undirected(t, h) && rng.random_bool(p))
        .collect()
}

/// Every labelled DAG on `n` vertices.
pub fn all_dags(n: usize) -> Vec<Pdag> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut out = Vec::new();
    let total = 3usize.pow(pairs.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut m = vec![vec![false; n]; n];
        for &(i, j) in &pairs {
            match c % 3 {
                1 => m[i][j] = true,
                2 => m[j][i] = true,
                _ => {}
            }
            c /= 3;
        }
        if has_cycle(&m) {
            continue;
        }
        let edges: Vec<Edge> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| m[i][j])
            .map(|(i, j)| Edge::Directed {
                tail: VertexId::new(i),
                head: VertexId::new(j),
            })
            .collect();
        out.push(Pdag::from_edges(names.clone(), &edges).unwrap());
    }
    out
}
