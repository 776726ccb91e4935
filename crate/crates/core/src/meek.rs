//! Meek orientation rules, CPDAG/MPDAG construction and the augmented graph
//! with a prediction vertex.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{GraphError, Pdag, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeekError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("background knowledge contains both `{0} -> {1}` and its reverse")]
    Contradictory(String, String),
    #[error("background knowledge `{tail} -> {head}` is inconsistent with the graph")]
    Inconsistent { tail: String, head: String },
    #[error("vertex `{0}` already exists")]
    NameClash(String),
}

/// Required directed orientations (direct-causal statements).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BackgroundKnowledge {
    orientations: BTreeSet<(VertexId, VertexId)>,
}

impl BackgroundKnowledge {
    pub fn new(
        g: &Pdag,
        pairs: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, MeekError> {
        let orientations: BTreeSet<_> = pairs.into_iter().collect();
        for &(s, t) in &orientations {
            if orientations.contains(&(t, s)) {
                return Err(MeekError::Contradictory(g.name(s).into(), g.name(t).into()));
            }
        }
        Ok(BackgroundKnowledge { orientations })
    }

    /// Resolves `(tail, head)` names against `g`.
    pub fn from_names(g: &Pdag, pairs: &[(&str, &str)]) -> Result<Self, MeekError> {
        let resolve = |n: &str| {
            g.vertex(n)
                .ok_or_else(|| MeekError::Graph(GraphError::UnknownVertex(n.into())))
        };
        let ids = pairs
            .iter()
            .map(|&(s, t)| Ok((resolve(s)?, resolve(t)?)))
            .collect::<Result<Vec<_>, MeekError>>()?;
        Self::new(g, ids)
    }

    pub fn orientations(&self) -> &BTreeSet<(VertexId, VertexId)> {
        &self.orientations
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    /// Union, rejecting contradictions.
    pub fn union(&self, other: &Self, g: &Pdag) -> Result<Self, MeekError> {
        Self::new(
            g,
            self.orientations.iter().chain(&other.orientations).copied(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MeekRule {
    R1,
    R2,
    R3,
    R4,
}

impl MeekRule {
    pub const CPDAG: [MeekRule; 3] = [MeekRule::R1, MeekRule::R2, MeekRule::R3];
    pub const ALL: [MeekRule; 4] = [MeekRule::R1, MeekRule::R2, MeekRule::R3, MeekRule::R4];

    /// Whether the rule forces the undirected edge `a - b` into `a -> b`.
    fn orients(self, g: &Pdag, a: VertexId, b: VertexId) -> bool {
        match self {
            // c -> a - b, c and b nonadjacent
            MeekRule::R1 => g.parents_of(a).into_iter().any(|c| !g.adjacent(c, b)),
            // a -> c -> b
            MeekRule::R2 => g.children_of(a).into_iter().any(|c| g.is_directed(c, b)),
            // a - c -> b <- d - a, c and d nonadjacent
            MeekRule::R3 => {
                let mids: Vec<VertexId> = g
                    .siblings_of(a)
                    .into_iter()
                    .filter(|&c| g.is_directed(c, b))
                    .collect();
                mids.iter()
                    .enumerate()
                    .any(|(i, &c)| mids[i + 1..].iter().any(|&d| !g.adjacent(c, d)))
            }
            // a - d -> c -> b, a adjacent to c, b and d nonadjacent
            MeekRule::R4 => g.siblings_of(a).into_iter().any(|d| {
                d != b
                    && !g.adjacent(b, d)
                    && g.children_of(d)
                        .into_iter()
                        .any(|c| g.is_directed(c, b) && g.adjacent(a, c))
            }),
        }
    }
}

/// Applies `rules` until no undirected edge can be oriented.
pub fn meek_closure(g: &Pdag, rules: &[MeekRule]) -> Pdag {
    let order: Vec<VertexId> = g.vertices().collect();
    meek_closure_in_order(g, rules, &order)
}

/// [`meek_closure`] with an explicit vertex scan order and rule order. The
/// fixpoint does not depend on either; this entry point exists so that can
/// be checked.
pub fn meek_closure_in_order(g: &Pdag, rules: &[MeekRule], order: &[VertexId]) -> Pdag {
    let mut out = g.clone();
    loop {
        let mut changed = false;
        for &rule in rules {
            for &a in order {
                for &b in order {
                    if out.is_undirected(a, b) && rule.orients(&out, a, b) {
                        out.set_directed(a, b);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    assert!(
        !out.has_directed_cycle(),
        "Meek closure produced a directed cycle"
    );
    out
}

/// Skeleton with the unshielded colliders of `d` directed.
pub fn pattern_of_dag(d: &Pdag) -> Result<Pdag, MeekError> {
    let colliders = d.unshielded_colliders()?;
    let mut p = d.skeleton();
    for (u, mid, v) in colliders {
        p.set_directed(u, mid);
        p.set_directed(v, mid);
    }
    Ok(p)
}

/// CPDAG of the Markov equivalence class of `d`.
pub fn cpdag_from_dag(d: &Pdag) -> Result<Pdag, MeekError> {
    Ok(meek_closure(&pattern_of_dag(d)?, &MeekRule::CPDAG))
}

/// Orients each background edge in turn and closes under R1-R4. Fails when a
/// required edge is absent or already points the other way.
pub fn construct_mpdag(g: &Pdag, bk: &BackgroundKnowledge) -> Result<Pdag, MeekError> {
    let mut out = g.clone();
    for &(s, t) in bk.orientations() {
        if out.is_undirected(s, t) || out.is_directed(s, t) {
            out.set_directed(s, t);
            out = meek_closure(&out, &MeekRule::ALL);
        } else {
            return Err(MeekError::Inconsistent {
                tail: g.name(s).into(),
                head: g.name(t).into(),
            });
        }
    }
    Ok(out)
}

/// Adds a vertex `label` with an incoming edge from every existing vertex.
pub fn augment_with_prediction(g: &Pdag, label: &str) -> Result<Pdag, MeekError> {
    if g.vertex(label).is_some() {
        return Err(MeekError::NameClash(label.into()));
    }
    let mut out = g.clone();
    let y = out.push_vertex(label.into());
    for v in g.vertices() {
        out.set_directed(v, y);
    }
    Ok(out)
}

/// Background knowledge `V -> label` for every vertex of `g`, expressed on
/// the augmented graph `aug`.
pub fn prediction_background(
    g: &Pdag,
    aug: &Pdag,
    label: &str,
) -> Result<BackgroundKnowledge, MeekError> {
    let y = aug
        .vertex(label)
        .ok_or_else(|| GraphError::UnknownVertex(label.into()))?;
    BackgroundKnowledge::new(aug, g.vertices().map(|v| (v, y)))
}
