//! Ground-truth structural causal models: Erdős–Rényi DAGs, linear and
//! nonlinear additive-noise SCMs with a categorical sensitive vertex, and
//! observational / interventional sampling.

use std::collections::BTreeMap;

use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, SplitScheme};
use crate::graph::{Pdag, VertexId};
use crate::rng::SeedTree;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScmError {
    #[error("{edges} edges do not fit in a DAG on {vertices} vertices")]
    InfeasibleEdgeCount { vertices: usize, edges: usize },
    #[error("SCM needs a DAG with at least two vertices")]
    NotADag,
    #[error("vertex index {0} is out of range")]
    UnknownVertex(usize),
}

/// Values clamped by an intervention.
pub type Assignment = BTreeMap<VertexId, f64>;

/// Random DAG on `d` vertices named `X1..Xd` with exactly `s` edges, drawn
/// uniformly among the forward pairs of a random vertex permutation.
pub fn random_er_dag(d: usize, s: usize, seed: u64) -> Result<Pdag, ScmError> {
    let max = d * d.saturating_sub(1) / 2;
    if s > max {
        return Err(ScmError::InfeasibleEdgeCount {
            vertices: d,
            edges: s,
        });
    }
    let mut rng = SeedTree::new(seed).child_str("er").rng();
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(&mut rng);
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
        .collect();
    let mut g = Pdag::empty((1..=d).map(|i| format!("X{i}"))).expect("distinct names");
    for k in sample_indices(&mut rng, max, s) {
        let (i, j) = pairs[k];
        g.set_directed(VertexId::new(perm[i]), VertexId::new(perm[j]));
    }
    debug_assert!(!g.has_directed_cycle());
    Ok(g)
}

/// Coefficient with magnitude uniform on `[0.1, 1]` and a random sign.
fn edge_weight<R: Rng>(rng: &mut R) -> f64 {
    let m: f64 = rng.random_range(0.1..=1.0);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

/// `X_i = Σ β_ij X_j + ε_i`, with the sensitive vertex drawn uniformly
/// from `{0, .., levels-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearScm {
    #[serde(with = "pdag_text")]
    pub dag: Pdag,
    #[serde(with = "edge_weights")]
    pub weights: BTreeMap<(VertexId, VertexId), f64>,
    pub noise_std: Vec<f64>,
    pub sensitive: VertexId,
    pub sensitive_levels: usize,
    pub outcome: VertexId,
}

mod pdag_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::graph::Pdag;

    pub fn serialize<S: Serializer>(g: &Pdag, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&g.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Pdag, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

mod edge_weights {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::graph::VertexId;

    type Weights = BTreeMap<(VertexId, VertexId), f64>;

    pub fn serialize<S: Serializer>(w: &Weights, s: S) -> Result<S::Ok, S::Error> {
        w.iter()
            .map(|(&(t, h), &b)| (t, h, b))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Weights, D::Error> {
        let list = Vec::<(VertexId, VertexId, f64)>::deserialize(d)?;
        Ok(list.into_iter().map(|(t, h, b)| ((t, h), b)).collect())
    }
}

impl LinearScm {
    /// Outcome is the last vertex in topological order; the sensitive vertex
    /// is uniform among the rest, loses its incoming edges, and gets 2 or 3
    /// levels.
    pub fn random(dag: &Pdag, seed: u64) -> Result<Self, ScmError> {
        let order = dag
            .topological_order()
            .filter(|_| dag.is_dag() && dag.n() >= 2)
            .ok_or(ScmError::NotADag)?;
        let mut rng = SeedTree::new(seed).child_str("linear-scm").rng();
        let outcome = *order.last().expect("nonempty");
        let sensitive = order[rng.random_range(0..order.len() - 1)];
        let sensitive_levels = rng.random_range(2..=3);
        let mut dag = dag.clone();
        for p in dag.parents_of(sensitive) {
            dag.remove_edge(p, sensitive);
        }
        let weights = dag
            .directed_edges()
            .into_iter()
            .map(|e| (e, edge_weight(&mut rng)))
            .collect();
        Ok(LinearScm {
            noise_std: vec![1.0; dag.n()],
            dag,
            weights,
            sensitive,
            sensitive_levels,
            outcome,
        })
    }

    pub fn weight(&self, tail: VertexId, head: VertexId) -> Option<f64> {
        self.weights.get(&(tail, head)).copied()
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..self.sensitive_levels).map(|l| l as f64).collect()
    }

    fn linear_input(&self, v: VertexId, row: &[f64]) -> f64 {
        self.dag
            .parents_of(v)
            .into_iter()
            .map(|p| self.weights[&(p, v)] * row[p.index()])
            .sum()
    }

    /// Exact mean vector under `do(assign)` (observational when empty).
    pub fn interventional_mean(&self, assign: &Assignment) -> Vec<f64> {
        let mut mu = vec![0.0; self.dag.n()];
        for v in self.dag.topological_order().expect("dag") {
            mu[v.index()] = if let Some(&x) = assign.get(&v) {
                x
            } else if v == self.sensitive {
                (self.sensitive_levels - 1) as f64 / 2.0
            } else {
                self.linear_input(v, &mu)
            };
        }
        mu
    }

    pub fn sample_observational(&self, n: usize, seed: u64) -> Dataset {
        sample(
            self,
            &Assignment::new(),
            n,
            seed,
            SplitScheme::Observational,
            |_, x| x,
        )
    }

    pub fn sample_interventional_truth(
        &self,
        assign: &Assignment,
        n: usize,
        seed: u64,
    ) -> Result<Dataset, ScmError> {
        check_assignment(&self.dag, assign)?;
        Ok(sample(
            self,
            assign,
            n,
            seed,
            SplitScheme::AllTest,
            |_, x| x,
        ))
    }
}

fn check_assignment(dag: &Pdag, assign: &Assignment) -> Result<(), ScmError> {
    match assign.keys().find(|v| v.index() >= dag.n()) {
        Some(v) => Err(ScmError::UnknownVertex(v.index())),
        None => Ok(()),
    }
}

/// Ancestral sampling. `f(v, input)` maps the linear predictor plus noise
/// to the vertex value.
fn sample(
    scm: &LinearScm,
    assign: &Assignment,
    n: usize,
    seed: u64,
    scheme: SplitScheme,
    f: impl Fn(VertexId, f64) -> f64,
) -> Dataset {
    let g = &scm.dag;
    let order = g.topological_order().expect("dag");
    let mut rng = SeedTree::new(seed).child_str("sample").rng();
    let mut columns = vec![vec![0.0; n]; g.n()];
    let mut row = vec![0.0; g.n()];
    for i in 0..n {
        for &v in &order {
            let x = if let Some(&x) = assign.get(&v) {
                x
            } else if v == scm.sensitive {
                rng.random_range(0..scm.sensitive_levels) as f64
            } else {
                let eps: f64 = rng.sample(StandardNormal);
                f(
                    v,
                    scm.linear_input(v, &row) + scm.noise_std[v.index()] * eps,
                )
            };
            row[v.index()] = x;
            columns[v.index()][i] = x;
        }
    }
    Dataset::new(g.names().to_vec(), columns, scheme).expect("rectangular")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseFn {
    Linear,
    Sin,
    Cos,
    Tanh,
    Sigmoid,
}

impl BaseFn {
    pub const ALL: [BaseFn; 5] = [
        BaseFn::Linear,
        BaseFn::Sin,
        BaseFn::Cos,
        BaseFn::Tanh,
        BaseFn::Sigmoid,
    ];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            BaseFn::Linear => x,
            BaseFn::Sin => x.sin(),
            BaseFn::Cos => x.cos(),
            BaseFn::Tanh => x.tanh(),
            BaseFn::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        }
    }
}

/// `f_i`; a composite applies `outer(inner(x))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Base(BaseFn),
    Composite { outer: BaseFn, inner: BaseFn },
}

impl Mechanism {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Mechanism::Base(f) => f.apply(x),
            Mechanism::Composite { outer, inner } => outer.apply(inner.apply(x)),
        }
    }

    fn random<R: Rng>(rng: &mut R) -> Self {
        let pick = |rng: &mut R| BaseFn::ALL[rng.random_range(0..BaseFn::ALL.len())];
        if rng.random_range(0..=BaseFn::ALL.len()) == BaseFn::ALL.len() {
            Mechanism::Composite {
                outer: pick(rng),
                inner: pick(rng),
            }
        } else {
            Mechanism::Base(pick(rng))
        }
    }
}

/// `X_i = f_i(Σ β_ij X_j + ε_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearScm {
    pub linear: LinearScm,
    pub mechanisms: Vec<Mechanism>,
}

impl NonlinearScm {
    pub fn random(dag: &Pdag, seed: u64) -> Result<Self, ScmError> {
        let linear = LinearScm::random(dag, seed)?;
        let mut rng = SeedTree::new(seed).child_str("mechanisms").rng();
        let mechanisms = (0..dag.n()).map(|_| Mechanism::random(&mut rng)).collect();
        Ok(NonlinearScm { linear, mechanisms })
    }

    pub fn sample_observational(&self, n: usize, seed: u64) -> Dataset {
        sample(
            &self.linear,
            &Assignment::new(),
            n,
            seed,
            SplitScheme::Observational,
            |v, x| self.mechanisms[v.index()].apply(x),
        )
    }

    pub fn sample_interventional_truth(
        &self,
        assign: &Assignment,
        n: usize,
        seed: u64,
    ) -> Result<Dataset, ScmError> {
        check_assignment(&self.linear.dag, assign)?;
        Ok(sample(
            &self.linear,
            assign,
            n,
            seed,
            SplitScheme::AllTest,
            |v, x| self.mechanisms[v.index()].apply(x),
        ))
    }
}

/// Either kind of model, as used by the experiment pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scm {
    Linear(LinearScm),
    Nonlinear(NonlinearScm),
}

impl Scm {
    pub fn core(&self) -> &LinearScm {
        match self {
            Scm::Linear(s) => s,
            Scm::Nonlinear(s) => &s.linear,
        }
    }

    pub fn sample_observational(&self, n: usize, seed: u64) -> Dataset {
        match self {
            Scm::Linear(s) => s.sample_observational(n, seed),
            Scm::Nonlinear(s) => s.sample_observational(n, seed),
        }
    }

    pub fn sample_interventional_truth(
        &self,
        assign: &Assignment,
        n: usize,
        seed: u64,
    ) -> Result<Dataset, ScmError> {
        match self {
            Scm::Linear(s) => s.sample_interventional_truth(assign, n, seed),
            Scm::Nonlinear(s) => s.sample_interventional_truth(assign, n, seed),
        }
    }
}
