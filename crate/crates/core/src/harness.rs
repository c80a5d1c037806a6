//! Downstream evaluation: learning curves over training-pool size, zero-shot
//! training on prompt labels, and group-level score aggregation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::linear::{
    accuracy, fit_on_space, fit_univariate_logistic, precision_recall_f1, Averaging, FeatureSpace, Hyper,
    LinearError, LinearModel, UnivariateFit,
};
use crate::rng::{derive_seed, rng_from_seed, sample_indices};
use crate::tagger::{sequences_from_corpus, span_f1, PerceptronTagger, TaggedSequence, TaggerError};

pub const DEFAULT_TRAIN_SIZES: [usize; 7] = [25, 50, 100, 200, 300, 400, 500];
pub const DEFAULT_REPLICATES: usize = 25;
pub const DEFAULT_TAGGER_EPOCHS: usize = 5;

pub const METRIC_ACCURACY: &str = "accuracy";
pub const METRIC_F1: &str = "f1";
pub const METRIC_SPAN_F1: &str = "span_f1";
pub const METRIC_SPAN_PRECISION: &str = "span_precision";
pub const METRIC_SPAN_RECALL: &str = "span_recall";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("pool {pool:?} has {available} documents, fewer than {size}")]
    PoolTooSmall { pool: String, size: usize, available: usize },
    #[error("evaluation document {id:?} also appears in pool {pool:?}")]
    LeakageDetected { pool: String, id: String },
    #[error("train sizes must be non-empty, ascending and positive")]
    InvalidSizes,
    #[error("replicates must be at least 1")]
    NoReplicates,
    #[error("no pools given")]
    NoPools,
    #[error("document {0:?} has no label")]
    MissingLabel(String),
    #[error("document {0:?} carries no prompt label")]
    MissingPromptLabel(String),
    #[error("document {0:?} lacks the grouping field")]
    MissingGroupKey(String),
    #[error("group {0:?} has no outcome label")]
    MissingGroupLabel(String),
    #[error("reference ({0}, {1}) is not in the curve")]
    UnknownReference(String, usize),
    #[error(transparent)]
    Fit(#[from] LinearError),
    #[error(transparent)]
    Tagger(#[from] TaggerError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Binary classification of `label == positive_label`.
    DocClassification { positive_label: String },
    SequenceTagging { epochs: usize },
}

impl Task {
    pub fn primary_metric(&self) -> &'static str {
        match self {
            Task::DocClassification { .. } => METRIC_ACCURACY,
            Task::SequenceTagging { .. } => METRIC_SPAN_F1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub train_sizes: Vec<usize>,
    pub replicates: usize,
    pub task: Task,
    pub master_seed: u64,
    #[serde(default)]
    pub hyper: Hyper,
}

impl CurveSpec {
    pub fn new(task: Task, master_seed: u64) -> Self {
        Self {
            train_sizes: DEFAULT_TRAIN_SIZES.to_vec(),
            replicates: DEFAULT_REPLICATES,
            task,
            master_seed,
            hyper: Hyper::default(),
        }
    }

    /// Seed for one (size, replicate) cell. Every source shares it, so
    /// sources are compared on common random numbers.
    pub fn cell_seed(&self, size: usize, replicate: usize) -> u64 {
        derive_seed(self.master_seed, &[size as u64, replicate as u64])
    }
}

pub type Metrics = BTreeMap<String, f64>;

/// One independent unit of learning-curve work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub source: usize,
    pub size: usize,
    pub replicate: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub source: String,
    pub size: usize,
    pub mean: Metrics,
    pub replicates: Vec<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveResult {
    pub metric: String,
    pub points: Vec<CurvePoint>,
}

impl CurveResult {
    pub fn point(&self, source: &str, size: usize) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.source == source && p.size == size)
    }

    pub fn mean(&self, source: &str, size: usize) -> Option<f64> {
        self.point(source, size).and_then(|p| p.mean.get(&self.metric).copied())
    }

    pub fn sources(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for p in &self.points {
            if !out.contains(&p.source.as_str()) {
                out.push(&p.source);
            }
        }
        out
    }
}

/// Fails when any evaluation id appears in a pool.
pub fn check_leakage(pools: &[(String, Corpus)], eval: &Corpus) -> Result<(), HarnessError> {
    let ids: BTreeSet<&str> = eval.iter().map(|d| d.id.as_str()).collect();
    for (name, pool) in pools {
        if let Some(d) = pool.iter().find(|d| ids.contains(d.id.as_str())) {
            return Err(HarnessError::LeakageDetected { pool: name.clone(), id: d.id.clone() });
        }
    }
    Ok(())
}

fn binary_labels(docs: &[Document], positive: &str) -> Result<Vec<bool>, HarnessError> {
    docs.iter()
        .map(|d| d.label.as_deref().map(|l| l == positive).ok_or_else(|| HarnessError::MissingLabel(d.id.clone())))
        .collect()
}

/// Checks the spec and the pools, and lists every cell in
/// source → size → replicate order.
pub fn curve_cells(pools: &[(String, Corpus)], eval: &Corpus, spec: &CurveSpec) -> Result<Vec<Cell>, HarnessError> {
    if pools.is_empty() {
        return Err(HarnessError::NoPools);
    }
    if spec.replicates == 0 {
        return Err(HarnessError::NoReplicates);
    }
    let sizes = &spec.train_sizes;
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::InvalidSizes);
    }
    let max = *sizes.last().unwrap();
    for (name, pool) in pools {
        if pool.len() < max {
            return Err(HarnessError::PoolTooSmall { pool: name.clone(), size: max, available: pool.len() });
        }
    }
    check_leakage(pools, eval)?;
    if let Task::DocClassification { positive_label } = &spec.task {
        binary_labels(eval.documents(), positive_label)?;
        for (_, pool) in pools {
            binary_labels(pool.documents(), positive_label)?;
        }
    }
    let mut cells = Vec::new();
    for source in 0..pools.len() {
        for &size in sizes {
            for replicate in 0..spec.replicates {
                cells.push(Cell { source, size, replicate, seed: spec.cell_seed(size, replicate) });
            }
        }
    }
    Ok(cells)
}

/// A class-stratified subsample of `size` indices. Classes get their
/// proportional share (largest remainder), and at least one slot each when
/// `size` allows it.
pub fn stratified_subsample(labels: &[bool], size: usize, seed: u64) -> Vec<usize> {
    let n = labels.len();
    let by_class: [Vec<usize>; 2] = [
        (0..n).filter(|&i| !labels[i]).collect(),
        (0..n).filter(|&i| labels[i]).collect(),
    ];
    let exact: [f64; 2] = [0, 1].map(|c| by_class[c].len() as f64 * size as f64 / n as f64);
    let mut take: [usize; 2] = exact.map(|e| e as usize);
    if take[0] + take[1] < size {
        let c = if exact[1] - take[1] as f64 > exact[0] - take[0] as f64 { 1 } else { 0 };
        take[c] += 1;
    }
    for c in 0..2 {
        let o = 1 - c;
        if take[c] == 0 && !by_class[c].is_empty() && take[o] > 1 {
            take[c] = 1;
            take[o] -= 1;
        }
    }
    let mut out = Vec::with_capacity(size);
    for c in 0..2 {
        let mut rng = rng_from_seed(derive_seed(seed, &[c as u64]));
        out.extend(sample_indices(&mut rng, by_class[c].len(), take[c]).into_iter().map(|i| by_class[c][i]));
    }
    out.sort_unstable();
    out
}

/// Fits on `docs` and scores accuracy and positive-class F1 on `eval`.
pub fn classification_metrics(
    docs: &[&Document],
    eval: &Corpus,
    positive: &str,
    hyper: &Hyper,
    seed: u64,
) -> Result<(LinearModel, Metrics), HarnessError> {
    let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
    let labels: Vec<bool> = docs
        .iter()
        .map(|d| d.label.as_deref().map(|l| l == positive).ok_or_else(|| HarnessError::MissingLabel(d.id.clone())))
        .collect::<Result<_, _>>()?;
    let space = FeatureSpace::fit(&texts, hyper.features)?;
    let (model, _) = fit_on_space(space, &texts, &labels, hyper, seed)?;
    let gold = binary_labels(eval.documents(), positive)?;
    let pred: Vec<bool> = eval.iter().map(|d| model.predict(&d.text)).collect();
    let mut m = Metrics::new();
    m.insert(METRIC_ACCURACY.to_string(), accuracy(&pred, &gold)?);
    m.insert(METRIC_F1.to_string(), precision_recall_f1(&pred, &gold, Averaging::Binary(&true))?.f1);
    Ok((model, m))
}

fn tagging_metrics(train: &[TaggedSequence], eval: &[TaggedSequence], epochs: usize, seed: u64) -> Result<Metrics, HarnessError> {
    let tagger = PerceptronTagger::train(train, epochs, seed)?;
    let pred: Vec<TaggedSequence> = eval.iter().map(|s| tagger.tag(s.tokens())).collect();
    let s = span_f1(&pred, eval)?;
    let mut m = Metrics::new();
    m.insert(METRIC_SPAN_F1.to_string(), s.f1);
    m.insert(METRIC_SPAN_PRECISION.to_string(), s.precision);
    m.insert(METRIC_SPAN_RECALL.to_string(), s.recall);
    Ok(m)
}

/// Trains on one subsample of one pool and scores it on the evaluation corpus.
pub fn run_cell(pools: &[(String, Corpus)], eval: &Corpus, spec: &CurveSpec, cell: Cell) -> Result<Metrics, HarnessError> {
    let pool = &pools[cell.source].1;
    let docs = pool.documents();
    match &spec.task {
        Task::DocClassification { positive_label } => {
            let labels = binary_labels(docs, positive_label)?;
            let idx = stratified_subsample(&labels, cell.size, cell.seed);
            let train: Vec<&Document> = idx.iter().map(|&i| &docs[i]).collect();
            Ok(classification_metrics(&train, eval, positive_label, &spec.hyper, cell.seed)?.1)
        }
        Task::SequenceTagging { epochs } => {
            let mut rng = rng_from_seed(cell.seed);
            let idx = sample_indices(&mut rng, docs.len(), cell.size);
            let train: Vec<TaggedSequence> = idx.iter().map(|&i| TaggedSequence::from_document(&docs[i])).collect();
            tagging_metrics(&train, &sequences_from_corpus(eval), *epochs, derive_seed(cell.seed, &[1]))
        }
    }
}

/// Folds per-cell metrics (in [`curve_cells`] order) into curve points.
pub fn assemble_curve(pools: &[(String, Corpus)], spec: &CurveSpec, cells: &[Cell], metrics: Vec<Metrics>) -> CurveResult {
    let mut points: Vec<CurvePoint> = Vec::new();
    for (cell, m) in cells.iter().zip(metrics) {
        let source = &pools[cell.source].0;
        match points.last_mut() {
            Some(p) if p.source == *source && p.size == cell.size => p.replicates.push(m),
            _ => points.push(CurvePoint { source: source.clone(), size: cell.size, mean: Metrics::new(), replicates: alloc::vec![m] }),
        }
    }
    for p in &mut points {
        let n = p.replicates.len() as f64;
        for r in &p.replicates {
            for (k, v) in r {
                *p.mean.entry(k.clone()).or_insert(0.0) += v / n;
            }
        }
    }
    CurveResult { metric: spec.task.primary_metric().to_string(), points }
}

/// Sequential learning curve. Results depend only on the master seed.
pub fn learning_curve(pools: &[(String, Corpus)], eval: &Corpus, spec: &CurveSpec) -> Result<CurveResult, HarnessError> {
    let cells = curve_cells(pools, eval, spec)?;
    let metrics = cells.iter().map(|&c| run_cell(pools, eval, spec, c)).collect::<Result<Vec<_>, _>>()?;
    Ok(assemble_curve(pools, spec, &cells, metrics))
}

/// For every source other than the reference's, the smallest evaluated size
/// whose mean metric reaches the reference point's mean; `None` if it never does.
pub fn crossover_analysis(
    curve: &CurveResult,
    reference_source: &str,
    reference_size: usize,
) -> Result<BTreeMap<String, Option<usize>>, HarnessError> {
    let target = curve
        .mean(reference_source, reference_size)
        .ok_or_else(|| HarnessError::UnknownReference(reference_source.to_string(), reference_size))?;
    let mut out = BTreeMap::new();
    for source in curve.sources() {
        if source == reference_source {
            continue;
        }
        let mut sizes: Vec<(usize, f64)> = curve
            .points
            .iter()
            .filter(|p| p.source == source)
            .map(|p| (p.size, p.mean.get(&curve.metric).copied().unwrap_or(f64::NAN)))
            .collect();
        sizes.sort_by_key(|s| s.0);
        out.insert(source.to_string(), sizes.iter().find(|(_, m)| *m >= target).map(|s| s.0));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroShotReport {
    pub accuracy: f64,
    pub f1: f64,
    pub n_train: usize,
    pub n_eval: usize,
}

/// Trains on the whole synthetic pool using the labels its prompts intended.
pub fn zero_shot_train(
    pool: &Corpus,
    eval: &Corpus,
    positive_label: &str,
    hyper: &Hyper,
    seed: u64,
) -> Result<(LinearModel, ZeroShotReport), HarnessError> {
    for d in pool {
        let from_prompt = d.meta.get("label_source").map(String::as_str) == Some("prompt");
        if !from_prompt || d.label.is_none() {
            return Err(HarnessError::MissingPromptLabel(d.id.clone()));
        }
    }
    check_leakage(&[(pool.name().to_string(), pool.clone())], eval)?;
    let docs: Vec<&Document> = pool.iter().collect();
    let (model, m) = classification_metrics(&docs, eval, positive_label, hyper, seed)?;
    let report = ZeroShotReport {
        accuracy: m[METRIC_ACCURACY],
        f1: m[METRIC_F1],
        n_train: pool.len(),
        n_eval: eval.len(),
    };
    Ok((model, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScore {
    pub group: String,
    pub n: usize,
    pub mean: f64,
    pub max: f64,
    pub count_above: usize,
    /// Highest-scoring documents as `(id, score)`, best first.
    pub top: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScoreReport {
    pub group_key: String,
    pub threshold: f64,
    pub groups: Vec<GroupScore>,
}

impl GroupScoreReport {
    pub fn group(&self, name: &str) -> Option<&GroupScore> {
        self.groups.iter().find(|g| g.group == name)
    }
}

/// Aggregates per-document scores by the `group_key` metadata field.
/// Counts use a strict `score > threshold`.
pub fn aggregate_scores(
    scored: &[(&Document, f64)],
    group_key: &str,
    threshold: f64,
    top_k: usize,
) -> Result<GroupScoreReport, HarnessError> {
    let mut groups: BTreeMap<&str, Vec<(&str, f64)>> = BTreeMap::new();
    for (d, s) in scored {
        let g = d.meta.get(group_key).ok_or_else(|| HarnessError::MissingGroupKey(d.id.clone()))?;
        groups.entry(g.as_str()).or_default().push((d.id.as_str(), *s));
    }
    let groups = groups
        .into_iter()
        .map(|(g, items)| {
            let n = items.len();
            let mean = items.iter().map(|i| i.1).sum::<f64>() / n as f64;
            let max = items.iter().map(|i| i.1).fold(f64::NEG_INFINITY, f64::max);
            let count_above = items.iter().filter(|i| i.1 > threshold).count();
            let mut ranked = items.clone();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            let top = ranked.into_iter().take(top_k).map(|(id, s)| (id.to_string(), s)).collect();
            GroupScore { group: g.to_string(), n, mean, max, count_above, top }
        })
        .collect();
    Ok(GroupScoreReport { group_key: group_key.to_string(), threshold, groups })
}

pub fn score_groups(
    model: &LinearModel,
    corpus: &Corpus,
    group_key: &str,
    threshold: f64,
    top_k: usize,
) -> Result<GroupScoreReport, HarnessError> {
    let scored: Vec<(&Document, f64)> = corpus.iter().map(|d| (d, model.predict_proba(&d.text))).collect();
    aggregate_scores(&scored, group_key, threshold, top_k)
}

/// Logistic regression of a binary group outcome on the group's mean score.
pub fn group_regression(report: &GroupScoreReport, labels: &BTreeMap<String, bool>) -> Result<UnivariateFit, HarnessError> {
    let mut x = Vec::with_capacity(report.groups.len());
    let mut y = Vec::with_capacity(report.groups.len());
    for g in &report.groups {
        let l = labels.get(&g.group).ok_or_else(|| HarnessError::MissingGroupLabel(g.group.clone()))?;
        x.push(g.mean);
        y.push(*l);
    }
    Ok(fit_univariate_logistic(&x, &y)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DisclaimerPolicy, Span};
    use alloc::format;
    use alloc::vec;

    fn labeled(prefix: &str, n: usize, flip: bool) -> Corpus {
        let docs = (0..n)
            .map(|i| {
                let pos = i % 2 == 0;
                let text = if pos { format!("alpha beta w{} gamma", i % 5) } else { format!("delta zeta w{} eta", i % 5) };
                let label = if pos != flip { "yes" } else { "no" };
                Document::real(format!("{prefix}-{i}"), text).with_label(label)
            })
            .collect();
        Corpus::new(prefix, docs).unwrap()
    }

    fn task() -> Task {
        Task::DocClassification { positive_label: "yes".into() }
    }

    #[test]
    fn single_point_curve() {
        let pools = vec![("real".to_string(), labeled("p", 20, false))];
        let eval = labeled("e", 20, false);
        let spec = CurveSpec { train_sizes: vec![10], replicates: 1, ..CurveSpec::new(task(), 1) };
        let c = learning_curve(&pools, &eval, &spec).unwrap();
        assert_eq!(c.points.len(), 1);
        assert_eq!(c.points[0].replicates.len(), 1);
        assert_eq!(c.mean("real", 10), Some(1.0));
    }

    #[test]
    fn leakage_and_small_pools() {
        let eval = labeled("e", 20, false);
        let mut docs = labeled("p", 20, false).into_documents();
        docs.push(eval.documents()[3].clone());
        let pools = vec![("leaky".to_string(), Corpus::new("leaky", docs).unwrap())];
        let spec = CurveSpec { train_sizes: vec![10], replicates: 1, ..CurveSpec::new(task(), 1) };
        assert!(matches!(learning_curve(&pools, &eval, &spec), Err(HarnessError::LeakageDetected { .. })));
        let pools = vec![("small".to_string(), labeled("p", 5, false))];
        assert!(matches!(learning_curve(&pools, &eval, &spec), Err(HarnessError::PoolTooSmall { .. })));
    }

    #[test]
    fn matched_pool_dominates_flipped_pool() {
        let pools = vec![("matched".to_string(), labeled("m", 60, false)), ("flipped".to_string(), labeled("f", 60, true))];
        let eval = labeled("e", 40, false);
        let spec = CurveSpec { train_sizes: vec![10, 20, 40], replicates: 5, ..CurveSpec::new(task(), 4) };
        let c = learning_curve(&pools, &eval, &spec).unwrap();
        for s in [10, 20, 40] {
            assert!(c.mean("matched", s).unwrap() > c.mean("flipped", s).unwrap());
        }
        let x = crossover_analysis(&c, "matched", 10).unwrap();
        assert_eq!(x["flipped"], None);
        assert!(matches!(crossover_analysis(&c, "other", 10), Err(HarnessError::UnknownReference(..))));
    }

    #[test]
    fn identical_source_crosses_at_reference() {
        let pool = labeled("m", 60, false);
        let pools = vec![("a".to_string(), pool.clone()), ("b".to_string(), pool)];
        let eval = labeled("e", 40, false);
        let spec = CurveSpec { train_sizes: vec![4, 10, 20], replicates: 3, ..CurveSpec::new(task(), 9) };
        let c = learning_curve(&pools, &eval, &spec).unwrap();
        let x = crossover_analysis(&c, "a", 10).unwrap();
        assert!(x["b"].unwrap() <= 10);
        let first = crossover_analysis(&c, "a", 4).unwrap();
        assert_eq!(first["b"], Some(4));
    }

    #[test]
    fn subsample_is_stratified() {
        let labels: Vec<bool> = (0..100).map(|i| i % 4 == 0).collect();
        let idx = stratified_subsample(&labels, 20, 3);
        assert_eq!(idx.len(), 20);
        assert_eq!(idx.iter().filter(|&&i| labels[i]).count(), 5);
        let idx = stratified_subsample(&labels, 2, 3);
        assert_eq!(idx.iter().filter(|&&i| labels[i]).count(), 1);
    }

    fn prompt_pool(flip: bool) -> Corpus {
        let policy = DisclaimerPolicy::default();
        let docs = labeled("s", 40, flip)
            .into_documents()
            .into_iter()
            .map(|d| {
                let mut s = Document::synthetic_draft(d.id, d.text).with_meta("label_source", "prompt");
                s.label = d.label;
                policy.apply(s).unwrap()
            })
            .collect();
        Corpus::new("synthetic", docs).unwrap()
    }

    #[test]
    fn zero_shot_paths() {
        let eval = labeled("e", 30, false);
        let (_, r) = zero_shot_train(&prompt_pool(false), &eval, "yes", &Hyper::default(), 0).unwrap();
        assert!(r.accuracy > 0.9);
        let (_, r) = zero_shot_train(&prompt_pool(true), &eval, "yes", &Hyper::default(), 0).unwrap();
        assert!(r.accuracy <= 0.5);
        let mut docs = prompt_pool(false).into_documents();
        docs[0].meta.remove("label_source");
        let pool = Corpus::new("x", docs).unwrap();
        assert_eq!(
            zero_shot_train(&pool, &eval, "yes", &Hyper::default(), 0).err(),
            Some(HarnessError::MissingPromptLabel("s-0".into()))
        );
    }

    #[test]
    fn group_aggregation() {
        let a = Document::real("a", "x").with_meta("party", "P1");
        let b = Document::real("b", "y").with_meta("party", "P1");
        let c = Document::real("c", "z").with_meta("party", "P2");
        let r = aggregate_scores(&[(&a, 0.6), (&b, 0.4), (&c, 0.0)], "party", 0.5, 1).unwrap();
        let p1 = r.group("P1").unwrap();
        assert!((p1.mean - 0.5).abs() < 1e-15);
        assert_eq!((p1.count_above, p1.max, p1.n), (1, 0.6, 2));
        assert_eq!(p1.top, vec![("a".to_string(), 0.6)]);
        let p2 = r.group("P2").unwrap();
        assert_eq!((p2.mean, p2.count_above), (0.0, 0));
        let d = Document::real("d", "w");
        assert_eq!(aggregate_scores(&[(&d, 0.1)], "party", 0.5, 1).err(), Some(HarnessError::MissingGroupKey("d".into())));
    }

    #[test]
    fn regression_on_ordered_groups() {
        let groups = (0..6)
            .map(|i| GroupScore { group: format!("g{i}"), n: 1, mean: i as f64 / 10.0, max: 0.0, count_above: 0, top: vec![] })
            .collect();
        let report = GroupScoreReport { group_key: "k".into(), threshold: 0.5, groups };
        let labels: BTreeMap<String, bool> = (0..6).map(|i| (format!("g{i}"), i >= 3)).collect();
        let f = group_regression(&report, &labels).unwrap();
        assert_eq!(f.auc, 1.0);
        assert!(f.coef > 0.0);
        let one: BTreeMap<String, bool> = (0..6).map(|i| (format!("g{i}"), true)).collect();
        assert_eq!(group_regression(&report, &one).err(), Some(HarnessError::Fit(LinearError::SingleClass)));
    }

    #[test]
    fn tagging_curve_runs() {
        let docs: Vec<Document> = (0..30)
            .map(|i| {
                let text = format!("officers saw a rifle near block {i}");
                Document::real(format!("t{i}"), text).with_spans(vec![Span::new(3, 4, "WEAPON")])
            })
            .collect();
        let pool = Corpus::new("p", docs[..20].to_vec()).unwrap();
        let eval = Corpus::new("e", docs[20..].to_vec()).unwrap();
        let spec = CurveSpec {
            train_sizes: vec![5, 10],
            replicates: 2,
            ..CurveSpec::new(Task::SequenceTagging { epochs: 3 }, 2)
        };
        let c = learning_curve(&[("real".into(), pool)], &eval, &spec).unwrap();
        assert_eq!(c.metric, METRIC_SPAN_F1);
        assert_eq!(c.mean("real", 10), Some(1.0));
    }
}
