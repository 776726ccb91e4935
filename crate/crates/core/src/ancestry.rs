//! Definite and possible ancestral relations in an MPDAG via critical sets.

use std::collections::{HashSet, VecDeque};

use crate::graph::{Pdag, VertexId, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AncestralRelation {
    DefiniteDescendant,
    DefiniteNonDescendant,
    PossibleDescendant,
}

/// Neighbours of `s` lying on at least one chordless possibly causal path
/// from `s` to `t`.
///
/// Breadth-first search over triples `(first hop, previous, current)`.
pub fn critical_set(g: &Pdag, s: VertexId, t: VertexId) -> VertexSet {
    assert_ne!(s, t, "critical set needs distinct endpoints");
    type Triple = (VertexId, VertexId, VertexId);
    let mut critical = VertexSet::new();
    let mut queue: VecDeque<Triple> = VecDeque::new();
    let mut queued: HashSet<Triple> = HashSet::new();
    let mut done: HashSet<Triple> = HashSet::new();

    for alpha in g.siblings_of(s).into_iter().chain(g.children_of(s)) {
        let tr = (alpha, s, alpha);
        queue.push_back(tr);
        queued.insert(tr);
    }
    while let Some(tr @ (alpha, phi, tau)) = queue.pop_front() {
        queued.remove(&tr);
        done.insert(tr);
        if tau == t {
            critical.insert(alpha);
            queue.retain(|q| q.0 != alpha);
            queued.retain(|q| q.0 != alpha);
            continue;
        }
        for beta in g.vertices() {
            let forward = g.is_directed(tau, beta);
            if !(forward || g.is_undirected(tau, beta)) {
                continue;
            }
            if !(forward || !g.adjacent(phi, beta)) {
                continue;
            }
            if beta == s || g.adjacent(beta, s) {
                continue;
            }
            let next = (alpha, tau, beta);
            if !done.contains(&next) && queued.insert(next) {
                queue.push_back(next);
            }
        }
    }
    critical
}

pub fn ancestral_relation(g: &Pdag, s: VertexId, t: VertexId) -> AncestralRelation {
    let c = critical_set(g, s, t);
    if c.is_empty() {
        return AncestralRelation::DefiniteNonDescendant;
    }
    let arrow_into = c.iter().any(|&v| g.is_directed(s, v));
    let incomplete = c
        .iter()
        .enumerate()
        .any(|(i, &u)| c.iter().skip(i + 1).any(|&v| !g.adjacent(u, v)));
    if arrow_into || incomplete {
        AncestralRelation::DefiniteDescendant
    } else {
        AncestralRelation::PossibleDescendant
    }
}

/// Relation of every other vertex to `s`, in index order.
pub fn relations_of(g: &Pdag, s: VertexId) -> Vec<(VertexId, AncestralRelation)> {
    g.vertices()
        .filter(|&t| t != s)
        .map(|t| (t, ancestral_relation(g, s, t)))
        .collect()
}

pub fn definite_nondescendants(g: &Pdag, s: VertexId) -> VertexSet {
    relations_of(g, s)
        .into_iter()
        .filter(|&(_, r)| r == AncestralRelation::DefiniteNonDescendant)
        .map(|(t, _)| t)
        .collect()
}

/// Every relation to `s` is definite iff `s` has no undirected edge.
pub fn all_relations_definite(g: &Pdag, s: VertexId) -> bool {
    g.siblings_of(s).is_empty()
}
