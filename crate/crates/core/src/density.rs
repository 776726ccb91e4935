//! Bucket-wise conditional Gaussians fitted from observational data and
//! Monte-Carlo evaluation of identification formulas.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError, SplitScheme};
use crate::graph::{Pdag, VertexId, VertexSet};
use crate::ident::{
    identification_formula, pco, CausalOrdering, IdentError, IdentificationFormula,
};
use crate::rng::SeedTree;
use crate::scm::Assignment;

/// Relative ridge added to a singular parent covariance.
pub const RIDGE: f64 = 1e-6;

/// Most distinct integer values a column may take to be fitted as
/// categorical.
const MAX_CATEGORIES: usize = 10;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error(transparent)]
    Data(#[from] DatasetError),
    #[error(transparent)]
    Ident(#[from] IdentError),
    #[error("no value assigned to intervened vertex `{0}`")]
    MissingAssignment(String),
    #[error("vertex `{0}` is assigned but not intervened in the formula")]
    UnexpectedAssignment(String),
    #[error("models and formula describe different graphs: {0}")]
    Mismatch(String),
    #[error("cannot fit on an empty dataset")]
    Empty,
}

/// `bucket | parents ~ N(intercept + coef · parents, residual_cov)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketConditional {
    pub bucket: Vec<VertexId>,
    pub parents: Vec<VertexId>,
    /// `|bucket| x |parents|`, row-major.
    pub coef: Vec<Vec<f64>>,
    pub intercept: Vec<f64>,
    pub residual_cov: Vec<Vec<f64>>,
    /// `L` with `L Lᵀ` the clipped residual covariance.
    pub sampling_factor: Vec<Vec<f64>>,
}

/// Frequency table for a discrete parentless vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Categorical {
    pub vertex: VertexId,
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Conditional {
    Gaussian(BucketConditional),
    Categorical(Categorical),
}

impl Conditional {
    pub fn bucket(&self) -> Vec<VertexId> {
        match self {
            Conditional::Gaussian(b) => b.bucket.clone(),
            Conditional::Categorical(c) => vec![c.vertex],
        }
    }

    pub fn parents(&self) -> &[VertexId] {
        match self {
            Conditional::Gaussian(b) => &b.parents,
            Conditional::Categorical(_) => &[],
        }
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn matrix(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Eigen-decomposition square root with negative eigenvalues clipped.
fn psd_factor(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let sqrt = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&sqrt)
}

/// Solves `a x = b` for symmetric PSD `a`, adding a ridge of
/// `RIDGE · trace(a)` when `a` is numerically singular.
fn solve_psd(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let mut a = a.clone();
    if !(min > 1e-12 * max.max(f64::MIN_POSITIVE)) {
        let ridge = RIDGE * a.trace().max(f64::MIN_POSITIVE);
        for i in 0..a.nrows() {
            a[(i, i)] += ridge;
        }
    }
    match a.clone().cholesky() {
        Some(ch) => ch.solve(b),
        None => a.pseudo_inverse(1e-12).expect("pseudo-inverse") * b,
    }
}

impl BucketConditional {
    /// Least squares of `bucket` on `parents` with maximum-likelihood
    /// residual covariance. `cols[v]` is the sample of vertex `v`.
    pub fn fit(
        bucket: &[VertexId],
        parents: &[VertexId],
        cols: &[&[f64]],
    ) -> Result<Self, DensityError> {
        let n = cols[bucket[0].index()].len();
        if n == 0 {
            return Err(DensityError::Empty);
        }
        let nf = n as f64;
        let mean = |v: VertexId| cols[v.index()].iter().sum::<f64>() / nf;
        let mb: Vec<f64> = bucket.iter().map(|&v| mean(v)).collect();
        let mp: Vec<f64> = parents.iter().map(|&v| mean(v)).collect();
        let centred = |vs: &[VertexId], m: &[f64]| {
            DMatrix::from_fn(n, vs.len(), |i, j| cols[vs[j].index()][i] - m[j])
        };
        let yb = centred(bucket, &mb);
        let xp = centred(parents, &mp);
        let coef = if parents.is_empty() {
            DMatrix::zeros(bucket.len(), 0)
        } else {
            let sxx = xp.transpose() * &xp;
            let sxy = xp.transpose() * &yb;
            solve_psd(&sxx, &sxy).transpose()
        };
        let resid = &yb - &xp * coef.transpose();
        let cov = resid.transpose() * &resid / nf;
        let intercept = DVector::from_vec(mb) - &coef * DVector::from_vec(mp);
        Ok(BucketConditional {
            bucket: bucket.to_vec(),
            parents: parents.to_vec(),
            coef: rows(&coef),
            intercept: intercept.iter().copied().collect(),
            sampling_factor: rows(&psd_factor(&cov)),
            residual_cov: rows(&cov),
        })
    }

    /// Population version: conditional of `bucket` given `parents` under a
    /// joint Gaussian with the given mean and covariance.
    pub fn from_moments(
        bucket: &[VertexId],
        parents: &[VertexId],
        mean: &[f64],
        cov: &DMatrix<f64>,
    ) -> Self {
        let sub = |a: &[VertexId], b: &[VertexId]| {
            DMatrix::from_fn(a.len(), b.len(), |i, j| cov[(a[i].index(), b[j].index())])
        };
        let coef = if parents.is_empty() {
            DMatrix::zeros(bucket.len(), 0)
        } else {
            solve_psd(&sub(parents, parents), &sub(parents, bucket)).transpose()
        };
        let rcov = sub(bucket, bucket) - &coef * sub(parents, bucket);
        let mb = DVector::from_iterator(bucket.len(), bucket.iter().map(|v| mean[v.index()]));
        let mp = DVector::from_iterator(parents.len(), parents.iter().map(|v| mean[v.index()]));
        BucketConditional {
            bucket: bucket.to_vec(),
            parents: parents.to_vec(),
            coef: rows(&coef),
            intercept: (mb - &coef * mp).iter().copied().collect(),
            sampling_factor: rows(&psd_factor(&rcov)),
            residual_cov: rows(&rcov),
        }
    }

    /// Conditional mean given parent values (indexed by vertex).
    pub fn mean_given(&self, values: &[f64]) -> Vec<f64> {
        self.intercept
            .iter()
            .zip(&self.coef)
            .map(|(b, row)| {
                b + row
                    .iter()
                    .zip(&self.parents)
                    .map(|(c, p)| c * values[p.index()])
                    .sum::<f64>()
            })
            .collect()
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        matrix(&self.residual_cov, self.bucket.len())
    }
}

impl Categorical {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (v, p) in self.values.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return *v;
            }
        }
        *self.values.last().expect("nonempty table")
    }
}

/// Fitted conditionals of one graph, in causal order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedModels {
    pub names: Vec<String>,
    pub conditionals: Vec<Conditional>,
}

impl FittedModels {
    fn find(&self, bucket: &VertexSet) -> Option<&Conditional> {
        self.conditionals
            .iter()
            .find(|c| c.bucket().into_iter().collect::<VertexSet>() == *bucket)
    }

    /// Mean of every vertex under `formula` and `assign`, propagated through
    /// the conditional means.
    pub fn interventional_mean(
        &self,
        formula: &IdentificationFormula,
        assign: &Assignment,
    ) -> Result<Vec<f64>, DensityError> {
        check(self, formula, assign)?;
        let mut mu = vec![0.0; self.names.len()];
        for (&v, &x) in assign {
            mu[v.index()] = x;
        }
        for f in &formula.factors {
            match self.find(&f.bucket).expect("checked") {
                Conditional::Gaussian(b) => {
                    for (v, m) in b.bucket.iter().zip(b.mean_given(&mu)) {
                        mu[v.index()] = m;
                    }
                }
                Conditional::Categorical(c) => {
                    mu[c.vertex.index()] = c.values.iter().zip(&c.probs).map(|(v, p)| v * p).sum();
                }
            }
        }
        Ok(mu)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

fn is_categorical(col: &[f64]) -> bool {
    let mut seen = BTreeSet::new();
    for &x in col {
        if x.fract() != 0.0 || !x.is_finite() {
            return false;
        }
        seen.insert(x as i64);
        if seen.len() > MAX_CATEGORIES {
            return false;
        }
    }
    true
}

/// One conditional per bucket of `ordering`, with parents taken from `g`.
/// Columns of `data` are matched to vertices by name. Parentless singleton
/// buckets holding small integer codes become frequency tables.
pub fn fit_bucket_conditionals(
    data: &Dataset,
    ordering: &CausalOrdering,
    g: &Pdag,
) -> Result<FittedModels, DensityError> {
    if data.n() == 0 {
        return Err(DensityError::Empty);
    }
    let cols: Vec<&[f64]> = g
        .names()
        .iter()
        .map(|n| data.column_named(n))
        .collect::<Result<_, _>>()?;
    let conditionals = ordering
        .buckets()
        .iter()
        .map(|b| {
            let bucket: Vec<VertexId> = b.members().iter().copied().collect();
            let parents: Vec<VertexId> = g.parents(b.members()).into_iter().collect();
            if bucket.len() == 1 && parents.is_empty() && is_categorical(cols[bucket[0].index()]) {
                Ok(Conditional::Categorical(categorical(
                    bucket[0],
                    cols[bucket[0].index()],
                )))
            } else {
                Ok(Conditional::Gaussian(BucketConditional::fit(
                    &bucket, &parents, &cols,
                )?))
            }
        })
        .collect::<Result<_, DensityError>>()?;
    Ok(FittedModels {
        names: g.names().to_vec(),
        conditionals,
    })
}

fn categorical(vertex: VertexId, col: &[f64]) -> Categorical {
    let mut counts: std::collections::BTreeMap<i64, usize> = Default::default();
    for &x in col {
        *counts.entry(x as i64).or_default() += 1;
    }
    let n = col.len() as f64;
    Categorical {
        vertex,
        values: counts.keys().map(|&k| k as f64).collect(),
        probs: counts.values().map(|&c| c as f64 / n).collect(),
    }
}

/// Population counterpart of [`fit_bucket_conditionals`].
pub fn fit_from_moments(
    g: &Pdag,
    ordering: &CausalOrdering,
    mean: &[f64],
    cov: &DMatrix<f64>,
) -> FittedModels {
    let conditionals = ordering
        .buckets()
        .iter()
        .map(|b| {
            let bucket: Vec<VertexId> = b.members().iter().copied().collect();
            let parents: Vec<VertexId> = g.parents(b.members()).into_iter().collect();
            Conditional::Gaussian(BucketConditional::from_moments(
                &bucket, &parents, mean, cov,
            ))
        })
        .collect();
    FittedModels {
        names: g.names().to_vec(),
        conditionals,
    }
}

fn check(
    models: &FittedModels,
    formula: &IdentificationFormula,
    assign: &Assignment,
) -> Result<(), DensityError> {
    if models.names != formula.names {
        return Err(DensityError::Mismatch("vertex lists differ".into()));
    }
    for &v in formula.fixed.keys() {
        if !assign.contains_key(&v) {
            return Err(DensityError::MissingAssignment(
                models.names[v.index()].clone(),
            ));
        }
    }
    for &v in assign.keys() {
        if !formula.fixed.contains_key(&v) {
            let name = models
                .names
                .get(v.index())
                .cloned()
                .unwrap_or_else(|| format!("#{}", v.index()));
            return Err(DensityError::UnexpectedAssignment(name));
        }
    }
    for f in &formula.factors {
        let c = models.find(&f.bucket).ok_or_else(|| {
            DensityError::Mismatch(format!("no model for bucket of size {}", f.bucket.len()))
        })?;
        if c.parents().iter().copied().collect::<VertexSet>() != f.conditioning {
            return Err(DensityError::Mismatch("conditioning sets differ".into()));
        }
    }
    Ok(())
}

/// Samples `n` rows from the identified interventional density, bucket by
/// bucket in causal order. Rows are split 8:2 train/val.
pub fn generate_interventional(
    models: &FittedModels,
    formula: &IdentificationFormula,
    assign: &Assignment,
    n: usize,
    seed: u64,
) -> Result<Dataset, DensityError> {
    check(models, formula, assign)?;
    let k = models.names.len();
    let mut columns = vec![vec![0.0; n]; k];
    for (&v, &x) in assign {
        columns[v.index()].fill(x);
    }
    let root = SeedTree::new(seed).child_str("generate");
    for (fi, f) in formula.factors.iter().enumerate() {
        let mut rng = root.child(fi as u64).rng();
        match models.find(&f.bucket).expect("checked") {
            Conditional::Categorical(c) => {
                for i in 0..n {
                    columns[c.vertex.index()][i] = c.sample(&mut rng);
                }
            }
            Conditional::Gaussian(b) => {
                let m = b.bucket.len();
                let mut z = vec![0.0; m];
                let mut values = vec![0.0; k];
                for i in 0..n {
                    for &p in &b.parents {
                        values[p.index()] = columns[p.index()][i];
                    }
                    let mean = b.mean_given(&values);
                    for zj in z.iter_mut() {
                        *zj = rng.sample(StandardNormal);
                    }
                    for (r, &v) in b.bucket.iter().enumerate() {
                        let noise: f64 = b.sampling_factor[r]
                            .iter()
                            .zip(&z)
                            .map(|(l, z)| l * z)
                            .sum();
                        columns[v.index()][i] = mean[r] + noise;
                    }
                }
            }
        }
    }
    Ok(Dataset::new(
        models.names.clone(),
        columns,
        SplitScheme::Interventional,
    )?)
}

/// One interventional dataset per candidate MPDAG, each with the same `n`
/// and seed. The intervened set is the key set of `assign`.
pub fn generate_for_unidentifiable(
    models_per_mpdag: &[FittedModels],
    mpdags: &[Pdag],
    assign: &Assignment,
    n: usize,
    seed: u64,
) -> Result<Vec<Dataset>, DensityError> {
    if models_per_mpdag.len() != mpdags.len() {
        return Err(DensityError::Mismatch(format!(
            "{} model sets for {} graphs",
            models_per_mpdag.len(),
            mpdags.len()
        )));
    }
    let s: VertexSet = assign.keys().copied().collect();
    models_per_mpdag
        .iter()
        .zip(mpdags)
        .map(|(models, g)| {
            let formula = identification_formula(g, &s)?;
            generate_interventional(models, &formula, assign, n, seed)
        })
        .collect()
}

/// Fits one model set per candidate graph on the same data.
pub fn fit_for_graphs(data: &Dataset, graphs: &[Pdag]) -> Result<Vec<FittedModels>, DensityError> {
    graphs
        .iter()
        .map(|g| {
            let ordering = pco(&g.vertex_set(), g)?;
            fit_bucket_conditionals(data, &ordering, g)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::dataset::Split;
    use crate::scm::LinearScm;

    fn ax_scm() -> LinearScm {
        let (a, x) = (VertexId::new(0), VertexId::new(1));
        LinearScm {
            dag: "A -> X".parse().unwrap(),
            weights: BTreeMap::from([((a, x), 0.5)]),
            noise_std: vec![1.0, 1.0],
            sensitive: a,
            sensitive_levels: 2,
            outcome: x,
        }
    }

    fn fitted(g: &Pdag, data: &Dataset) -> FittedModels {
        fit_bucket_conditionals(data, &pco(&g.vertex_set(), g).unwrap(), g).unwrap()
    }

    #[test]
    fn ols_recovers_coefficient() {
        let scm = ax_scm();
        let data = scm.sample_observational(1000, 5);
        let m = fitted(&scm.dag, &data);
        let Conditional::Gaussian(b) = &m.conditionals[1] else {
            panic!("expected gaussian")
        };
        assert!((b.coef[0][0] - 0.5).abs() < 0.1, "{b:?}");
        assert!(matches!(m.conditionals[0], Conditional::Categorical(_)));
    }

    #[test]
    fn parentless_bucket_intercept_is_mean() {
        let g: Pdag = "node X".parse().unwrap();
        let data = Dataset::new(
            vec!["X".into()],
            vec![vec![0.5, 1.5, 2.5, 3.0]],
            SplitScheme::AllTest,
        )
        .unwrap();
        let m = fitted(&g, &data);
        let Conditional::Gaussian(b) = &m.conditionals[0] else {
            panic!("expected gaussian")
        };
        assert!((b.intercept[0] - 1.875).abs() < 1e-12);
    }

    #[test]
    fn triangle_bucket_shapes() {
        let g: Pdag = "A -> X1\nA -> X2\nA -> X3\nX1 -- X2\nX1 -- X3\nX2 -- X3"
            .parse()
            .unwrap();
        let cols = (0..4)
            .map(|j| {
                (0..50)
                    .map(|i| ((i * (j + 3)) % 7) as f64 + 0.1 * j as f64 * (i as f64).sin())
                    .collect()
            })
            .collect();
        let data = Dataset::new(g.names().to_vec(), cols, SplitScheme::AllTest).unwrap();
        let m = fitted(&g, &data);
        let Conditional::Gaussian(b) = &m.conditionals[1] else {
            panic!("expected gaussian")
        };
        assert_eq!((b.coef.len(), b.coef[0].len()), (3, 1));
        assert_eq!((b.residual_cov.len(), b.residual_cov[0].len()), (3, 3));
    }

    #[test]
    fn rank_deficient_design_uses_ridge() {
        let g: Pdag = "node P\nnode Q\nP -> X\nQ -> X".parse().unwrap();
        let p: Vec<f64> = (0..40).map(|i| i as f64 * 0.3 + 0.01).collect();
        let x: Vec<f64> = p.iter().map(|v| 2.0 * v + 1.0).collect();
        let data = Dataset::new(
            g.names().to_vec(),
            vec![p.clone(), p, x],
            SplitScheme::AllTest,
        )
        .unwrap();
        let m = fitted(&g, &data);
        let Conditional::Gaussian(b) = &m.conditionals[2] else {
            panic!("expected gaussian")
        };
        assert!(b.coef[0].iter().all(|c| c.is_finite()));
        assert!((b.coef[0][0] + b.coef[0][1] - 2.0).abs() < 1e-3, "{b:?}");
    }

    #[test]
    fn generated_mean_matches_truth() {
        let scm = ax_scm();
        let a = VertexId::new(0);
        let data = scm.sample_observational(1000, 9).subset(Split::Train);
        let m = fitted(&scm.dag, &data);
        let formula = identification_formula(&scm.dag, &VertexSet::from([a])).unwrap();
        let assign = Assignment::from([(a, 1.0)]);
        let gen = generate_interventional(&m, &formula, &assign, 4000, 1).unwrap();
        assert!((gen.mean(1) - 0.5).abs() < 0.1);
        assert_eq!(gen.count(Split::Val), 800);
        assert_eq!(
            gen,
            generate_interventional(&m, &formula, &assign, 4000, 1).unwrap()
        );
    }

    #[test]
    fn assignment_errors() {
        let scm = ax_scm();
        let a = VertexId::new(0);
        let data = scm.sample_observational(100, 9);
        let m = fitted(&scm.dag, &data);
        let formula = identification_formula(&scm.dag, &VertexSet::from([a])).unwrap();
        assert!(matches!(
            generate_interventional(&m, &formula, &Assignment::new(), 10, 1),
            Err(DensityError::MissingAssignment(_))
        ));
        let extra = Assignment::from([(a, 1.0), (VertexId::new(1), 0.0)]);
        assert!(matches!(
            generate_interventional(&m, &formula, &extra, 10, 1),
            Err(DensityError::UnexpectedAssignment(_))
        ));
        let other: Pdag = "A -> X\nnode Z".parse().unwrap();
        let f2 = identification_formula(&other, &VertexSet::from([a])).unwrap();
        assert!(matches!(
            generate_interventional(&m, &f2, &Assignment::from([(a, 1.0)]), 10, 1),
            Err(DensityError::Mismatch(_))
        ));
    }

    #[test]
    fn unidentifiable_pair_gives_distinct_datasets() {
        let scm = ax_scm();
        let a = VertexId::new(0);
        let data = scm.sample_observational(2000, 4).subset(Split::Train);
        let g: Pdag = "A -- X".parse().unwrap();
        let mpdags = crate::ident::enumerate_valid_orientations(&g, &VertexSet::from([a])).unwrap();
        let models = fit_for_graphs(&data, &mpdags).unwrap();
        let assign = Assignment::from([(a, 1.0)]);
        let sets = generate_for_unidentifiable(&models, &mpdags, &assign, 4000, 3).unwrap();
        assert_eq!(sets.len(), 2);
        // A -> X: E[X | do(A=1)] = 0.5; X -> A: E[X] = 0.25.
        assert!((sets[0].mean(1) - 0.5).abs() < 0.1);
        assert!((sets[1].mean(1) - 0.25).abs() < 0.1);
        let single = generate_for_unidentifiable(&models[..1], &mpdags[..1], &assign, 4000, 3)
            .unwrap()
            .remove(0);
        let f = identification_formula(&mpdags[0], &VertexSet::from([a])).unwrap();
        assert_eq!(
            single,
            generate_interventional(&models[0], &f, &assign, 4000, 3).unwrap()
        );
    }

    #[test]
    fn models_serialize() {
        let scm = ax_scm();
        let m = fitted(&scm.dag, &scm.sample_observational(100, 1));
        let back: FittedModels = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back.conditionals.len(), 2);
    }
}
