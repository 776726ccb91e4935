//! The synthetic accuracy/fairness benchmark: random graphs and SCMs,
//! background knowledge, fitted interventional data, training of every
//! variant over the λ grid, and evaluation on ground-truth interventions.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ancestry::definite_nondescendants;
use crate::dataset::{Dataset, Split};
use crate::density::{fit_bucket_conditionals, generate_interventional};
use crate::fair::{
    admissible_intervention_values, eval_bandwidth, evaluate, train_predictor, FairPredictor,
    FeatureSpec, InterventionalGroup, TrainConfig, Variant,
};
use crate::graph::{Pdag, VertexId, VertexSet};
use crate::ident::{enumerate_valid_orientations, identification_formula, is_identifiable, pco};
use crate::meek::{construct_mpdag, cpdag_from_dag, BackgroundKnowledge};
use crate::rng::SeedTree;
use crate::scm::{random_er_dag, Assignment, LinearScm, NonlinearScm, Scm};

/// Model label for penalized runs trained on averaged candidate graphs.
pub const UNIDENTIFIABLE_LABEL: &str = "EpsIFair-Unidentifiable";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSetting {
    pub d: usize,
    pub s: usize,
    pub count: usize,
    #[serde(default)]
    pub admissible_count: usize,
}

impl GraphSetting {
    pub fn label(&self) -> String {
        format!("{}nodes{}edges", self.d, self.s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScmKind {
    Linear,
    Nonlinear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph_settings: Vec<GraphSetting>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n")]
    pub sample_n: usize,
    #[serde(default = "default_n")]
    pub interventional_n: usize,
    #[serde(default = "default_n")]
    pub test_n: usize,
    #[serde(default)]
    pub bk_fraction: f64,
    #[serde(default = "default_kind")]
    pub scm_kind: ScmKind,
    #[serde(default)]
    pub unidentifiable_mode: bool,
    /// Keep fitted predictors and their test predictions in the report.
    #[serde(default = "default_true")]
    pub keep_artifacts: bool,
    #[serde(flatten)]
    pub train: TrainConfig,
}

fn default_n() -> usize {
    1000
}

fn default_kind() -> ScmKind {
    ScmKind::Linear
}

fn default_true() -> bool {
    true
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            graph_settings: vec![GraphSetting {
                d: 10,
                s: 20,
                count: 10,
                admissible_count: 0,
            }],
            seed: 0,
            sample_n: 1000,
            interventional_n: 1000,
            test_n: 1000,
            bk_fraction: 0.0,
            scm_kind: ScmKind::Linear,
            unidentifiable_mode: false,
            keep_artifacts: true,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("no graph settings")]
    NoSettings,
    #[error("setting {0}: count must be positive")]
    ZeroCount(String),
    #[error("setting {0}: too many edges for the vertex count")]
    TooManyEdges(String),
    #[error("setting {0}: needs at least {1} vertices")]
    TooFewVertices(String, usize),
    #[error("bk_fraction {0} is outside [0, 1]")]
    BadFraction(f64),
    #[error("sample sizes must be at least 10")]
    TinySample,
    #[error("lambda grid is empty or has a negative value")]
    BadLambdaGrid,
    #[error("no training seeds")]
    NoSeeds,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.graph_settings.is_empty() {
            return Err(ConfigError::NoSettings);
        }
        for g in &self.graph_settings {
            if g.count == 0 {
                return Err(ConfigError::ZeroCount(g.label()));
            }
            if g.s > g.d * g.d.saturating_sub(1) / 2 {
                return Err(ConfigError::TooManyEdges(g.label()));
            }
            // outcome + sensitive + admissible + at least one free vertex
            let need = 3 + g.admissible_count;
            if g.d < need {
                return Err(ConfigError::TooFewVertices(g.label(), need));
            }
        }
        if !(0.0..=1.0).contains(&self.bk_fraction) {
            return Err(ConfigError::BadFraction(self.bk_fraction));
        }
        if self.sample_n < 10 || self.interventional_n < 10 || self.test_n < 10 {
            return Err(ConfigError::TinySample);
        }
        if self.train.lambda_grid.is_empty() || self.train.lambda_grid.iter().any(|&l| !(l >= 0.0))
        {
            return Err(ConfigError::BadLambdaGrid);
        }
        if self.train.seeds.is_empty() {
            return Err(ConfigError::NoSeeds);
        }
        Ok(())
    }

    /// Every `(model, λ)` pair a graph is expected to report.
    pub fn model_grid(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = [Variant::Full, Variant::Unaware, Variant::IFair]
            .iter()
            .map(|v| (v.as_str().to_owned(), 0.0))
            .collect();
        out.extend(
            self.train
                .lambda_grid
                .iter()
                .map(|&l| (Variant::EpsIFair.as_str().to_owned(), l)),
        );
        if self.unidentifiable_mode {
            out.extend(
                self.train
                    .lambda_grid
                    .iter()
                    .map(|&l| (UNIDENTIFIABLE_LABEL.to_owned(), l)),
            );
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub setting: String,
    pub graph_id: usize,
    pub model: String,
    pub lambda: f64,
    pub seed: u64,
    pub rmse: f64,
    pub mmd2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRow {
    pub setting: String,
    pub graph_id: usize,
    pub model: String,
    pub lambda: f64,
    pub seed: u64,
    pub stage: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphRow {
    pub setting: String,
    pub graph_id: usize,
    pub sensitive: String,
    pub levels: usize,
    pub outcome: String,
    pub admissible: String,
    pub definite_nondescendants: String,
    pub candidate_mpdags: usize,
    pub eval_bandwidth: f64,
    pub outcome_std: f64,
}

/// A trained model and its predictions on the ground-truth interventional
/// test sets, one vector per sensitive level.
#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifact {
    pub run_id: String,
    pub setting: String,
    pub graph_id: usize,
    pub model: String,
    pub predictor: FairPredictor,
    pub truth_predictions: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphFiles {
    pub stem: String,
    pub dag: Pdag,
    pub cpdag: Pdag,
    pub mpdag: Pdag,
    pub candidates: Vec<Pdag>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<TradeoffRow>,
    pub failures: Vec<FailureRow>,
    pub graphs: Vec<GraphRow>,
    pub graph_files: Vec<GraphFiles>,
    pub artifacts: Vec<RunArtifact>,
}

impl ExperimentReport {
    fn extend(&mut self, other: ExperimentReport) {
        self.rows.extend(other.rows);
        self.failures.extend(other.failures);
        self.graphs.extend(other.graphs);
        self.graph_files.extend(other.graph_files);
        self.artifacts.extend(other.artifacts);
    }
}

/// Everything about one graph that precedes training.
#[derive(Clone, Debug)]
pub struct PreparedGraph {
    pub setting: String,
    pub graph_id: usize,
    pub scm: Scm,
    /// True DAG without the outcome vertex.
    pub dag: Pdag,
    pub cpdag: Pdag,
    /// MPDAG with the background knowledge needed for identification.
    pub mpdag: Pdag,
    /// Candidate MPDAGs when the identifying knowledge is withheld; a
    /// single graph when the effect is identifiable anyway.
    pub candidates: Vec<Pdag>,
    pub sensitive: VertexId,
    pub admissible: Vec<VertexId>,
    pub obs: Dataset,
    pub spec: FeatureSpec,
    pub seeds: SeedTree,
}

impl PreparedGraph {
    pub fn intervened(&self) -> VertexSet {
        std::iter::once(self.sensitive)
            .chain(self.admissible.iter().copied())
            .collect()
    }
}

fn graph_seeds(config: &ExperimentConfig, setting: &GraphSetting, graph_id: usize) -> SeedTree {
    SeedTree::new(config.seed)
        .child_str(&setting.label())
        .child(graph_id as u64)
}

/// Builds the SCM, data and graphs for one graph id.
pub fn prepare_graph(
    config: &ExperimentConfig,
    setting: &GraphSetting,
    graph_id: usize,
) -> Result<PreparedGraph, String> {
    let seeds = graph_seeds(config, setting, graph_id);
    let er = random_er_dag(setting.d, setting.s, seeds.child_str("dag").seed())
        .map_err(|e| e.to_string())?;
    let scm_seed = seeds.child_str("scm").seed();
    let scm = match config.scm_kind {
        ScmKind::Linear => {
            Scm::Linear(LinearScm::random(&er, scm_seed).map_err(|e| e.to_string())?)
        }
        ScmKind::Nonlinear => {
            Scm::Nonlinear(NonlinearScm::random(&er, scm_seed).map_err(|e| e.to_string())?)
        }
    };
    let core = scm.core();
    let outcome_name = core.dag.name(core.outcome).to_owned();
    let keep: VertexSet = core.dag.vertices().filter(|&v| v != core.outcome).collect();
    let dag = core.dag.induced(&keep);
    let sensitive = dag
        .vertex(core.dag.name(core.sensitive))
        .expect("sensitive kept");

    let mut rng = seeds.child_str("admissible").rng();
    let mut pool: Vec<VertexId> = dag.vertices().filter(|&v| v != sensitive).collect();
    let mut admissible = Vec::new();
    for _ in 0..setting.admissible_count {
        admissible.push(pool.remove(rng.random_range(0..pool.len())));
    }
    admissible.sort();

    let cpdag = cpdag_from_dag(&dag).map_err(|e| e.to_string())?;
    let s: VertexSet = std::iter::once(sensitive)
        .chain(admissible.iter().copied())
        .collect();
    let mut bk_rng = seeds.child_str("bk").rng();
    let mut random_bk = BTreeSet::new();
    let mut identifying_bk = BTreeSet::new();
    for (t, h) in dag.directed_edges() {
        if !cpdag.is_undirected(t, h) {
            continue;
        }
        let touches_s = s.contains(&t) || s.contains(&h);
        let coin = bk_rng.random_bool(config.bk_fraction);
        if touches_s {
            identifying_bk.insert((t, h));
        } else if coin {
            random_bk.insert((t, h));
        }
    }
    let bk_of = |pairs: &BTreeSet<(VertexId, VertexId)>| {
        BackgroundKnowledge::new(&cpdag, pairs.iter().copied())
    };
    let full_bk =
        bk_of(&random_bk.union(&identifying_bk).copied().collect()).map_err(|e| e.to_string())?;
    let mpdag = construct_mpdag(&cpdag, &full_bk).map_err(|e| e.to_string())?;
    if !is_identifiable(&mpdag, &s) {
        return Err("background knowledge did not make the effect identifiable".into());
    }
    let candidates = if config.unidentifiable_mode {
        let partial = construct_mpdag(&cpdag, &bk_of(&random_bk).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        if is_identifiable(&partial, &s) {
            vec![partial]
        } else {
            enumerate_valid_orientations(&partial, &s).map_err(|e| e.to_string())?
        }
    } else {
        vec![mpdag.clone()]
    };

    let obs = scm.sample_observational(config.sample_n, seeds.child_str("obs").seed());
    let names = |vs: &mut dyn Iterator<Item = VertexId>| {
        vs.map(|v| dag.name(v).to_owned()).collect::<Vec<_>>()
    };
    let spec = FeatureSpec {
        all: dag.names().to_vec(),
        sensitive: dag.name(sensitive).to_owned(),
        outcome: outcome_name,
        definite_nondescendants: names(&mut definite_nondescendants(&mpdag, sensitive).into_iter()),
        admissible: names(&mut admissible.iter().copied()),
    };
    Ok(PreparedGraph {
        setting: setting.label(),
        graph_id,
        scm,
        dag,
        cpdag,
        mpdag,
        candidates,
        sensitive,
        admissible,
        obs,
        spec,
        seeds,
    })
}

/// Assignment for sensitive level `a` with admissible vertices at their
/// observational means, keyed by vertex name.
fn named_assignment(p: &PreparedGraph, a: f64) -> Result<Vec<(String, f64)>, String> {
    let means =
        admissible_intervention_values(&p.obs, &p.spec.admissible).map_err(|e| e.to_string())?;
    Ok(std::iter::once((p.spec.sensitive.clone(), a))
        .chain(means)
        .collect())
}

fn resolve(g: &Pdag, named: &[(String, f64)]) -> Assignment {
    named
        .iter()
        .map(|(n, x)| (g.vertex(n).expect("known vertex"), *x))
        .collect()
}

/// Generated interventional data for one candidate graph.
pub fn generated_group(
    config: &ExperimentConfig,
    p: &PreparedGraph,
    g: &Pdag,
) -> Result<InterventionalGroup, String> {
    let train = p.obs.subset(Split::Train);
    let ordering = pco(&g.vertex_set(), g).map_err(|e| e.to_string())?;
    let models = fit_bucket_conditionals(&train, &ordering, g).map_err(|e| e.to_string())?;
    let formula = identification_formula(g, &p.intervened()).map_err(|e| e.to_string())?;
    let levels = p.scm.core().levels();
    let arm = levels
        .iter()
        .enumerate()
        .map(|(l, &a)| {
            let assign = resolve(g, &named_assignment(p, a)?);
            let seed = p.seeds.child_str("generate").child(l as u64).seed();
            generate_interventional(&models, &formula, &assign, config.interventional_n, seed)
                .map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(InterventionalGroup { arms: vec![arm] })
}

/// Ground-truth interventional test sets, one per sensitive level.
pub fn truth_sets(config: &ExperimentConfig, p: &PreparedGraph) -> Result<Vec<Dataset>, String> {
    let core = p.scm.core();
    core.levels()
        .iter()
        .enumerate()
        .map(|(l, &a)| {
            let assign = resolve(&core.dag, &named_assignment(p, a)?);
            let seed = p.seeds.child_str("truth").child(l as u64).seed();
            p.scm
                .sample_interventional_truth(&assign, config.test_n, seed)
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn fmt_lambda(l: f64) -> String {
    format!("{l}").replace('.', "p")
}

/// Trains and evaluates every model of one prepared graph.
pub fn run_prepared(config: &ExperimentConfig, p: &PreparedGraph) -> ExperimentReport {
    let mut report = ExperimentReport::default();
    let grid = config.model_grid();
    let fail_all = |stage: &str, message: &str| -> Vec<FailureRow> {
        grid.iter()
            .flat_map(|(m, l)| {
                config.train.seeds.iter().map(move |&seed| FailureRow {
                    setting: p.setting.clone(),
                    graph_id: p.graph_id,
                    model: m.clone(),
                    lambda: *l,
                    seed,
                    stage: stage.into(),
                    message: message.into(),
                })
            })
            .collect()
    };
    let prepared = (|| -> Result<_, (String, String)> {
        let ident = generated_group(config, p, &p.mpdag).map_err(|e| ("generate".into(), e))?;
        let unid = if config.unidentifiable_mode {
            p.candidates
                .iter()
                .map(|g| generated_group(config, p, g))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ("generate-candidates".into(), e))?
        } else {
            Vec::new()
        };
        let truth = truth_sets(config, p).map_err(|e| ("truth".into(), e))?;
        Ok((ident, unid, truth))
    })();
    let (ident, unid, truth) = match prepared {
        Ok(x) => x,
        Err((stage, msg)) => {
            report.failures = fail_all(&stage, &msg);
            return report;
        }
    };

    let test = p.obs.subset(Split::Test);
    let y_test = test.column_named(&p.spec.outcome).expect("outcome column");
    let sigma = eval_bandwidth(y_test);
    let y_mean = y_test.iter().sum::<f64>() / y_test.len() as f64;
    let outcome_std =
        (y_test.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / y_test.len() as f64).sqrt();
    report.graphs.push(GraphRow {
        setting: p.setting.clone(),
        graph_id: p.graph_id,
        sensitive: p.spec.sensitive.clone(),
        levels: p.scm.core().sensitive_levels,
        outcome: p.spec.outcome.clone(),
        admissible: p.spec.admissible.join(";"),
        definite_nondescendants: p.spec.definite_nondescendants.join(";"),
        candidate_mpdags: p.candidates.len(),
        eval_bandwidth: sigma,
        outcome_std,
    });
    report.graph_files.push(GraphFiles {
        stem: format!("{}_g{}", p.setting, p.graph_id),
        dag: p.dag.clone(),
        cpdag: p.cpdag.clone(),
        mpdag: p.mpdag.clone(),
        candidates: if config.unidentifiable_mode {
            p.candidates.clone()
        } else {
            Vec::new()
        },
    });

    let tasks: Vec<(String, f64, u64)> = grid
        .iter()
        .flat_map(|(m, l)| config.train.seeds.iter().map(move |&s| (m.clone(), *l, s)))
        .collect();
    let ident_groups = [ident];
    let results: Vec<Result<(TradeoffRow, RunArtifact), FailureRow>> = tasks
        .par_iter()
        .map(|(model, lambda, seed)| {
            let (variant, groups): (Variant, &[InterventionalGroup]) = match model.as_str() {
                "Full" => (Variant::Full, &[]),
                "Unaware" => (Variant::Unaware, &[]),
                "IFair" => (Variant::IFair, &[]),
                UNIDENTIFIABLE_LABEL => (Variant::EpsIFair, &unid),
                _ => (Variant::EpsIFair, &ident_groups),
            };
            let fail = |stage: &str, e: String| FailureRow {
                setting: p.setting.clone(),
                graph_id: p.graph_id,
                model: model.clone(),
                lambda: *lambda,
                seed: *seed,
                stage: stage.into(),
                message: e,
            };
            let run_seed = p.seeds.child_str("train").child(*seed).seed();
            let mut predictor = train_predictor(
                variant,
                *lambda,
                &p.obs,
                groups,
                &p.spec,
                &config.train,
                run_seed,
            )
            .map_err(|e| fail("train", e.to_string()))?;
            predictor.seed = *seed;
            let rec = evaluate(
                &predictor,
                &p.spec.outcome,
                &test,
                std::slice::from_ref(&truth),
                sigma,
            )
            .map_err(|e| fail("evaluate", e.to_string()))?;
            let truth_predictions = truth
                .iter()
                .map(|d| predictor.predict(d))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| fail("predict", e.to_string()))?;
            let run_id = format!(
                "{}_g{}_{}_l{}_s{}",
                p.setting,
                p.graph_id,
                model,
                fmt_lambda(*lambda),
                seed
            );
            Ok((
                TradeoffRow {
                    setting: p.setting.clone(),
                    graph_id: p.graph_id,
                    model: model.clone(),
                    lambda: *lambda,
                    seed: *seed,
                    rmse: rec.rmse,
                    mmd2: rec.mmd2,
                },
                RunArtifact {
                    run_id,
                    setting: p.setting.clone(),
                    graph_id: p.graph_id,
                    model: model.clone(),
                    predictor,
                    truth_predictions,
                },
            ))
        })
        .collect();
    for r in results {
        match r {
            Ok((row, art)) => {
                report.rows.push(row);
                if config.keep_artifacts {
                    report.artifacts.push(art);
                }
            }
            Err(f) => report.failures.push(f),
        }
    }
    report
}

/// Runs one graph end to end, turning a preparation failure into failure
/// rows for every expected model.
pub fn run_graph(
    config: &ExperimentConfig,
    setting: &GraphSetting,
    graph_id: usize,
) -> ExperimentReport {
    match prepare_graph(config, setting, graph_id) {
        Ok(p) => run_prepared(config, &p),
        Err(message) => ExperimentReport {
            failures: config
                .model_grid()
                .into_iter()
                .flat_map(|(model, lambda)| {
                    let message = message.clone();
                    config.train.seeds.iter().map(move |&seed| FailureRow {
                        setting: setting.label(),
                        graph_id,
                        model: model.clone(),
                        lambda,
                        seed,
                        stage: "prepare".into(),
                        message: message.clone(),
                    })
                })
                .collect(),
            ..Default::default()
        },
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ConfigError> {
    config.validate()?;
    let jobs: Vec<(&GraphSetting, usize)> = config
        .graph_settings
        .iter()
        .flat_map(|s| (0..s.count).map(move |i| (s, i)))
        .collect();
    let parts: Vec<ExperimentReport> = jobs
        .par_iter()
        .map(|&(s, i)| run_graph(config, s, i))
        .collect();
    let mut report = ExperimentReport::default();
    for part in parts {
        report.extend(part);
    }
    Ok(report)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

/// Writes `tradeoff.csv`, `failures.csv`, `graphs.csv`, graph files, and
/// per-run `predictions/` and `models/` under `dir`.
pub fn write_outputs(
    report: &ExperimentReport,
    config: &ExperimentConfig,
    dir: &Path,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(
        &dir.join("tradeoff.csv"),
        &report.rows,
        &[
            "setting", "graph_id", "model", "lambda", "seed", "rmse", "mmd2",
        ],
    )?;
    write_csv(
        &dir.join("failures.csv"),
        &report.failures,
        &[
            "setting", "graph_id", "model", "lambda", "seed", "stage", "message",
        ],
    )?;
    write_csv(
        &dir.join("graphs.csv"),
        &report.graphs,
        &[
            "setting",
            "graph_id",
            "sensitive",
            "levels",
            "outcome",
            "admissible",
            "definite_nondescendants",
            "candidate_mpdags",
            "eval_bandwidth",
            "outcome_std",
        ],
    )?;
    fs::write(
        dir.join("config.json"),
        serde_json::to_string_pretty(config).map_err(io::Error::other)?,
    )?;
    let graphs = dir.join("graphs");
    fs::create_dir_all(&graphs)?;
    for f in &report.graph_files {
        fs::write(graphs.join(format!("{}.dag", f.stem)), f.dag.to_string())?;
        fs::write(
            graphs.join(format!("{}.cpdag", f.stem)),
            f.cpdag.to_string(),
        )?;
        fs::write(
            graphs.join(format!("{}.mpdag", f.stem)),
            f.mpdag.to_string(),
        )?;
        for (i, c) in f.candidates.iter().enumerate() {
            fs::write(
                graphs.join(format!("{}.candidate{}.mpdag", f.stem, i)),
                c.to_string(),
            )?;
        }
    }
    if !report.artifacts.is_empty() {
        let preds = dir.join("predictions");
        let models = dir.join("models");
        fs::create_dir_all(&preds)?;
        fs::create_dir_all(&models)?;
        for a in &report.artifacts {
            let mut w = csv::Writer::from_path(preds.join(format!("{}.csv", a.run_id)))?;
            w.write_record(["level", "prediction"])?;
            for (level, values) in a.truth_predictions.iter().enumerate() {
                for v in values {
                    w.write_record([level.to_string(), v.to_string()])?;
                }
            }
            w.flush()?;
            let json = serde_json::to_string_pretty(&a.predictor).map_err(io::Error::other)?;
            fs::write(models.join(format!("{}.json", a.run_id)), json)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            graph_settings: vec![GraphSetting {
                d: 5,
                s: 8,
                count: 2,
                admissible_count: 1,
            }],
            sample_n: 200,
            interventional_n: 100,
            test_n: 100,
            train: TrainConfig {
                epochs: 20,
                lambda_grid: vec![0.0, 5.0],
                ..TrainConfig::default()
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn every_model_is_reported() {
        let cfg = tiny();
        let report = run_experiment(&cfg).unwrap();
        let per_graph = cfg.model_grid().len();
        assert_eq!(report.rows.len() + report.failures.len(), 2 * per_graph);
        assert!(report.rows.iter().all(|r| r.mmd2 > -1e-9 && r.rmse >= 0.0));
    }

    #[test]
    fn deterministic_outputs() {
        let cfg = tiny();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny();
        cfg.bk_fraction = 1.5;
        assert_eq!(cfg.validate(), Err(ConfigError::BadFraction(1.5)));
        let mut cfg = tiny();
        cfg.graph_settings[0].s = 11;
        assert!(matches!(cfg.validate(), Err(ConfigError::TooManyEdges(_))));
        let json = r#"{"graph_settings":[{"d":5,"s":8,"count":10}],"lambda_grid":[0,1]}"#;
        let parsed: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(parsed.train.lambda_grid, vec![0.0, 1.0]);
        assert_eq!(parsed.sample_n, 1000);
    }

    #[test]
    fn unidentifiable_mode_adds_rows() {
        let mut cfg = tiny();
        cfg.unidentifiable_mode = true;
        cfg.graph_settings[0].admissible_count = 0;
        let report = run_experiment(&cfg).unwrap();
        assert!(report.rows.iter().any(|r| r.model == UNIDENTIFIABLE_LABEL));
        assert!(report.graphs.iter().all(|g| g.candidate_mpdags >= 1));
    }
}
