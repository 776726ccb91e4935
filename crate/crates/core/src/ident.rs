//! Partial causal ordering, identifiability of interventional densities and
//! the truncated-factorisation formula, plus enumeration helpers for the
//! non-identifiable case.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Bucket, Edge, Pdag, VertexId, VertexSet};
use crate::meek::{construct_mpdag, BackgroundKnowledge};

/// Largest graph [`enumerate_dags_in_class`] accepts.
pub const MAX_ENUMERATION_VERTICES: usize = 12;

/// Largest number of free edges [`enumerate_valid_orientations`] will try.
pub const MAX_FREE_EDGES: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IdentError {
    #[error("no bucket is a sink; the graph is not an MPDAG")]
    NotAnMpdag,
    #[error("effect of {0} is not identifiable")]
    NotIdentifiable(String),
    #[error("effect of {0} is already identifiable")]
    AlreadyIdentifiable(String),
    #[error("graph has {0} vertices; enumeration is limited to {MAX_ENUMERATION_VERTICES}")]
    TooLarge(usize),
    #[error("{0} undirected edges touch the intervened set; limit is {MAX_FREE_EDGES}")]
    TooManyFreeEdges(usize),
    #[error("no orientation of the free edges is consistent")]
    NoConsistentOrientation,
}

/// Ordered bucket list; edges between earlier and later buckets point
/// forward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalOrdering {
    buckets: Vec<Bucket>,
}

impl CausalOrdering {
    pub fn buckets(&self) -> &[Bucket] {
        &self.buckets
    }

    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// `{B,C} < {A,E} < ...`
    pub fn render(&self, g: &Pdag) -> String {
        self.buckets
            .iter()
            .map(|b| g.fmt_set(b.members()))
            .collect::<Vec<_>>()
            .join(" < ")
    }
}

/// Partial causal ordering of `nodes`.
///
/// Strips sink buckets of the full graph one at a time and prepends their
/// intersection with `nodes`. When several buckets are sinks, the one
/// furthest from the sources goes first (ties: larger smallest index), which
/// makes the result equal to sorting buckets by longest-path depth and then
/// by smallest member.
pub fn pco(nodes: &VertexSet, g: &Pdag) -> Result<CausalOrdering, IdentError> {
    let comps = g.bucket_decomposition(&g.vertex_set());
    let mut comp_of = vec![0usize; g.n()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c.members() {
            comp_of[v.index()] = i;
        }
    }
    let depth = bucket_depths(g, &comps, &comp_of)?;

    let mut remaining: BTreeSet<usize> = (0..comps.len()).collect();
    let mut out = VecDeque::new();
    while !remaining.is_empty() {
        let is_sink = |ci: usize| {
            comps[ci].members().iter().all(|&u| {
                g.neighbors_of(u).into_iter().all(|w| {
                    let cw = comp_of[w.index()];
                    cw == ci || !remaining.contains(&cw) || g.is_directed(w, u)
                })
            })
        };
        let pick = remaining
            .iter()
            .copied()
            .filter(|&ci| is_sink(ci))
            .max_by_key(|&ci| (depth[ci], comps[ci].first()))
            .ok_or(IdentError::NotAnMpdag)?;
        remaining.remove(&pick);
        let kept: VertexSet = comps[pick].members().intersection(nodes).copied().collect();
        if !kept.is_empty() {
            out.push_front(Bucket::new(kept));
        }
    }
    Ok(CausalOrdering {
        buckets: out.into(),
    })
}

/// Longest directed path (in buckets) from any source bucket.
fn bucket_depths(g: &Pdag, comps: &[Bucket], comp_of: &[usize]) -> Result<Vec<usize>, IdentError> {
    let k = comps.len();
    let mut preds: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for (t, h) in g.directed_edges() {
        let (ct, ch) = (comp_of[t.index()], comp_of[h.index()]);
        if ct != ch {
            preds[ch].insert(ct);
        }
    }
    let mut depth = vec![None; k];
    let mut progress = true;
    while progress {
        progress = false;
        for c in 0..k {
            if depth[c].is_some() {
                continue;
            }
            let ds: Option<Vec<usize>> = preds[c].iter().map(|&p| depth[p]).collect();
            if let Some(ds) = ds {
                depth[c] = Some(ds.into_iter().map(|d| d + 1).max().unwrap_or(0));
                progress = true;
            }
        }
    }
    depth
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(IdentError::NotAnMpdag)
}

/// True iff no undirected edge joins `intervened` to the rest of the graph.
pub fn is_identifiable(g: &Pdag, intervened: &VertexSet) -> bool {
    crossing_undirected_edges(g, intervened).is_empty()
}

fn crossing_undirected_edges(g: &Pdag, intervened: &VertexSet) -> Vec<(VertexId, VertexId)> {
    g.undirected_edges()
        .into_iter()
        .filter(|(a, b)| intervened.contains(a) != intervened.contains(b))
        .map(|(a, b)| {
            if intervened.contains(&a) {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect()
}

/// One `f(bucket | conditioning)` term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub bucket: VertexSet,
    pub conditioning: VertexSet,
}

/// Symbolic truncated factorisation of `f(v' | do(s))`.
///
/// `factors` are kept in causal order (the order to sample them in);
/// [`IdentificationFormula::render`] prints them last bucket first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentificationFormula {
    pub names: Vec<String>,
    pub factors: Vec<Factor>,
    pub integrated_out: VertexSet,
    /// Intervened vertex -> value slot.
    pub fixed: BTreeMap<VertexId, usize>,
}

impl IdentificationFormula {
    pub fn render(&self) -> String {
        if self.factors.is_empty() {
            return "1".into();
        }
        let lower = |set: &VertexSet| {
            set.iter()
                .map(|v| self.names[v.index()].to_lowercase())
                .collect::<Vec<_>>()
                .join(",")
        };
        self.factors
            .iter()
            .rev()
            .map(|f| {
                if f.conditioning.is_empty() {
                    format!("f({})", lower(&f.bucket))
                } else {
                    format!("f({}|{})", lower(&f.bucket), lower(&f.conditioning))
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for IdentificationFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Truncated factorisation over the PCO of all vertices, dropping buckets
/// inside `intervened`.
pub fn identification_formula(
    g: &Pdag,
    intervened: &VertexSet,
) -> Result<IdentificationFormula, IdentError> {
    if !is_identifiable(g, intervened) {
        return Err(IdentError::NotIdentifiable(g.fmt_set(intervened)));
    }
    let ordering = pco(&g.vertex_set(), g)?;
    let factors = ordering
        .buckets()
        .iter()
        .filter(|b| b.members().is_disjoint(intervened))
        .map(|b| Factor {
            bucket: b.members().clone(),
            conditioning: g.parents(b.members()),
        })
        .collect();
    Ok(IdentificationFormula {
        names: g.names().to_vec(),
        factors,
        integrated_out: g.vertex_set().difference(intervened).copied().collect(),
        fixed: intervened
            .iter()
            .enumerate()
            .map(|(slot, &v)| (v, slot))
            .collect(),
    })
}

/// MPDAGs obtained by orienting the undirected edges between `intervened`
/// and the rest in every consistent way, deduplicated, in a stable order.
pub fn enumerate_valid_orientations(
    g: &Pdag,
    intervened: &VertexSet,
) -> Result<Vec<Pdag>, IdentError> {
    let free = crossing_undirected_edges(g, intervened);
    if free.is_empty() {
        return Err(IdentError::AlreadyIdentifiable(g.fmt_set(intervened)));
    }
    if free.len() > MAX_FREE_EDGES {
        return Err(IdentError::TooManyFreeEdges(free.len()));
    }
    let colliders = g.directed_unshielded_colliders();
    let candidates: Vec<Option<Pdag>> = (0u64..1 << free.len())
        .into_par_iter()
        .map(|mask| {
            let pairs =
                free.iter()
                    .enumerate()
                    .map(|(i, &(s, v))| if mask >> i & 1 == 1 { (v, s) } else { (s, v) });
            let bk = BackgroundKnowledge::new(g, pairs).ok()?;
            let out = construct_mpdag(g, &bk).ok()?;
            let consistent = out.directed_unshielded_colliders() == colliders
                && is_identifiable(&out, intervened);
            consistent.then_some(out)
        })
        .collect();
    let mut seen: BTreeSet<Vec<Edge>> = BTreeSet::new();
    let out: Vec<Pdag> = candidates
        .into_iter()
        .flatten()
        .filter(|m| seen.insert(m.edges()))
        .collect();
    if out.is_empty() {
        return Err(IdentError::NoConsistentOrientation);
    }
    Ok(out)
}

/// All DAGs represented by `g`: orientations of its undirected edges that
/// are acyclic and introduce no unshielded collider.
pub fn enumerate_dags_in_class(g: &Pdag) -> Result<Vec<Pdag>, IdentError> {
    if g.n() > MAX_ENUMERATION_VERTICES {
        return Err(IdentError::TooLarge(g.n()));
    }
    let free = g.undirected_edges();
    let mut out = Vec::new();
    let mut work = g.clone();
    extend_orientations(&mut work, &free, &mut out);
    Ok(out)
}

fn extend_orientations(work: &mut Pdag, free: &[(VertexId, VertexId)], out: &mut Vec<Pdag>) {
    let Some((&(a, b), rest)) = free.split_first() else {
        out.push(work.clone());
        return;
    };
    for (t, h) in [(a, b), (b, a)] {
        if work.descendants(h).contains(&t) {
            continue;
        }
        let new_collider = work.parents_of(h).into_iter().any(|p| !work.adjacent(p, t));
        if new_collider {
            continue;
        }
        work.set_directed(t, h);
        extend_orientations(work, rest, out);
        work.set_undirected(a, b);
    }
}
