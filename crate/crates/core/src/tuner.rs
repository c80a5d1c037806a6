//! Adversarial selection of generation parameters.
//!
//! Every grid point generates a batch of synthetic documents; a logistic
//! discriminator then tries to tell them from an equally sized sample of
//! real documents. The configuration whose documents are hardest to tell
//! apart (lowest held-out accuracy) wins.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::corpus::{Corpus, DisclaimerPolicy, Document};
use crate::generator::{generate_with_id, Backend, GenerateError, LocalBackend, Prompt};
use crate::linear::{auc, fit, EvalSplit, Hyper, LinearError};
use crate::ngram::{AdaptationParams, LmError, NGramModel};
use crate::rng::{derive_seed, rng_from_seed, sample_indices};
use crate::sampling::SamplingParams;

pub const AXIS_TEMPERATURE: &str = "temperature";
pub const AXIS_TOP_K: &str = "top_k";
pub const AXIS_TOP_P: &str = "top_p";
pub const AXIS_MAX_TOKENS: &str = "max_tokens";
/// Adaptation mixing weight; the only axis that changes the model itself.
pub const AXIS_MU: &str = "mu";

pub const MIN_DOCS: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TuneError {
    #[error("axis {0:?} has no values")]
    EmptyAxis(String),
    #[error("unknown axis {0:?}")]
    UnknownAxis(String),
    #[error("axis {0:?} listed twice")]
    DuplicateAxis(String),
    #[error("the grid has no axes")]
    EmptyGrid,
    #[error("value {value} is not valid for axis {axis:?}")]
    InvalidValue { axis: String, value: f64 },
    #[error("need {needed} real documents, have {available}")]
    InsufficientRealDocs { needed: usize, available: usize },
    #[error("runs must be at least 1")]
    NoRuns,
    #[error("no adapted model for mu={0}")]
    MissingTheta(f64),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Fit(#[from] LinearError),
    #[error(transparent)]
    Model(#[from] LmError),
}

/// Named axes in the order given; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Axes(pub Vec<(String, Vec<f64>)>);

impl Axes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn axis(mut self, name: impl Into<String>, values: impl Into<Vec<f64>>) -> Self {
        self.0.push((name.into(), values.into()));
        self
    }

    /// Two adaptation weights, four nucleus masses, seven temperatures and a fixed top-k.
    pub fn standard() -> Self {
        Self::new()
            .axis(AXIS_MU, [0.25, 0.75])
            .axis(AXIS_TOP_P, [0.8, 0.9, 0.95, 0.99])
            .axis(AXIS_TEMPERATURE, [0.3, 0.5, 0.7, 1.0, 1.3, 1.5, 1.8])
            .axis(AXIS_TOP_K, [50.0])
    }
}

/// One grid point: axis values in axis order.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(from = "BTreeMap<String, f64>")]
pub struct GridConfig(pub Vec<(String, f64)>);

impl From<BTreeMap<String, f64>> for GridConfig {
    fn from(m: BTreeMap<String, f64>) -> Self {
        Self(m.into_iter().collect())
    }
}

impl Serialize for GridConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            if k == AXIS_TOP_K || k == AXIS_MAX_TOKENS {
                m.serialize_entry(k, &(*v as u64))?;
            } else {
                m.serialize_entry(k, v)?;
            }
        }
        m.end()
    }
}

impl GridConfig {
    pub fn get(&self, axis: &str) -> Option<f64> {
        self.0.iter().find(|(k, _)| k == axis).map(|(_, v)| *v)
    }

    pub fn mu(&self) -> Option<f64> {
        self.get(AXIS_MU)
    }

    /// `base` with the decoding axes of this point substituted.
    pub fn sampling_params(&self, base: &SamplingParams) -> SamplingParams {
        let mut p = base.clone();
        for (k, v) in &self.0 {
            match k.as_str() {
                AXIS_TEMPERATURE => p.temperature = *v,
                AXIS_TOP_K => p.top_k = Some(*v as usize),
                AXIS_TOP_P => p.top_p = Some(*v),
                AXIS_MAX_TOKENS => p.max_tokens = *v as usize,
                _ => {}
            }
        }
        p
    }

    /// Lexicographic order on the values, axis by axis.
    pub fn cmp_values(&self, other: &Self) -> Ordering {
        for ((_, a), (_, b)) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }

    /// Human-readable rendering, e.g. `top_p=0.90, top_k=50, temperature=1.5`.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| match k.as_str() {
                AXIS_TOP_P => format!("{k}={v:.2}"),
                AXIS_TOP_K | AXIS_MAX_TOKENS => format!("{k}={}", *v as u64),
                _ => format!("{k}={v}"),
            })
            .collect();
        parts.join(", ")
    }
}

fn check_value(axis: &str, v: f64) -> Result<(), TuneError> {
    let ok = v.is_finite()
        && match axis {
            AXIS_TEMPERATURE => v >= 0.0,
            AXIS_TOP_K | AXIS_MAX_TOKENS => v >= 1.0 && libm::trunc(v) == v,
            AXIS_TOP_P => v > 0.0 && v <= 1.0,
            AXIS_MU => (0.0..=1.0).contains(&v),
            _ => return Err(TuneError::UnknownAxis(axis.to_string())),
        };
    if ok {
        Ok(())
    } else {
        Err(TuneError::InvalidValue { axis: axis.to_string(), value: v })
    }
}

/// Cartesian product of the axes, first axis outermost.
pub fn build_grid(axes: &Axes) -> Result<Vec<GridConfig>, TuneError> {
    if axes.0.is_empty() {
        return Err(TuneError::EmptyGrid);
    }
    for (i, (name, values)) in axes.0.iter().enumerate() {
        if values.is_empty() {
            return Err(TuneError::EmptyAxis(name.clone()));
        }
        if axes.0[..i].iter().any(|(n, _)| n == name) {
            return Err(TuneError::DuplicateAxis(name.clone()));
        }
        for &v in values {
            check_value(name, v)?;
        }
    }
    let mut grid = vec![GridConfig(Vec::new())];
    for (name, values) in &axes.0 {
        let mut next = Vec::with_capacity(grid.len() * values.len());
        for point in &grid {
            for &v in values {
                let mut p = point.clone();
                p.0.push((name.clone(), v));
                next.push(p);
            }
        }
        grid = next;
    }
    Ok(grid)
}

/// Supplies a generation backend for a given adaptation weight
/// (`None` when the grid has no adaptation axis).
pub trait BackendFactory {
    type Backend: Backend;

    /// Called once with every weight the grid uses, before any [`Self::backend`] call.
    fn prepare(&mut self, _mus: &[f64]) -> Result<(), TuneError> {
        Ok(())
    }

    fn backend(&self, mu: Option<f64>) -> Result<Self::Backend, TuneError>;
}

/// Local n-gram backends; adapted models are built in [`BackendFactory::prepare`]
/// and cached by weight.
#[derive(Debug, Clone)]
pub struct LocalFactory {
    base: Arc<NGramModel>,
    target: Option<Arc<NGramModel>>,
    cache: BTreeMap<u64, Arc<NGramModel>>,
}

impl LocalFactory {
    pub fn new(base: Arc<NGramModel>) -> Self {
        Self { base, target: None, cache: BTreeMap::new() }
    }

    /// Adapt towards counts taken from `target` for grid points carrying `mu`.
    pub fn with_adaptation(mut self, target: Arc<NGramModel>) -> Self {
        self.target = Some(target);
        self
    }

    pub fn with_adaptation_corpus(self, corpus: &Corpus) -> Result<Self, TuneError> {
        let target = NGramModel::train(corpus, self.base.order(), self.base.discount())?;
        Ok(self.with_adaptation(Arc::new(target)))
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }
}

impl BackendFactory for LocalFactory {
    type Backend = LocalBackend;

    fn prepare(&mut self, mus: &[f64]) -> Result<(), TuneError> {
        for &mu in mus {
            if self.cache.contains_key(&mu.to_bits()) {
                continue;
            }
            let target = self.target.as_ref().ok_or(TuneError::MissingTheta(mu))?;
            let adapted = self.base.adapt_to_model(target, AdaptationParams { mix_weight: mu })?;
            self.cache.insert(mu.to_bits(), Arc::new(adapted));
        }
        Ok(())
    }

    fn backend(&self, mu: Option<f64>) -> Result<LocalBackend, TuneError> {
        match mu {
            None => Ok(LocalBackend::new(self.base.clone(), "base")),
            Some(mu) => {
                let m = self.cache.get(&mu.to_bits()).ok_or(TuneError::MissingTheta(mu))?;
                Ok(LocalBackend::new(m.clone(), format!("mu={mu}")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub axes: Axes,
    /// Values for every sampling parameter no axis names.
    pub base_params: SamplingParams,
    /// Synthetic documents per configuration, matched by as many real ones.
    pub n_docs: usize,
    pub runs: usize,
    pub split: EvalSplit,
    pub hyper: Hyper,
    pub master_seed: u64,
    /// Prompts used round-robin; the empty prompt when none are given.
    #[serde(default)]
    pub prompts: Vec<(String, String)>,
}

impl TuneConfig {
    pub fn new(axes: Axes, n_docs: usize, master_seed: u64) -> Self {
        Self {
            axes,
            base_params: SamplingParams::default(),
            n_docs,
            runs: 10,
            split: EvalSplit::default(),
            hyper: Hyper::default(),
            master_seed,
            prompts: Vec::new(),
        }
    }

    pub fn validate(&self, real_docs: usize) -> Result<Vec<GridConfig>, TuneError> {
        if self.n_docs < MIN_DOCS || real_docs < self.n_docs {
            return Err(TuneError::InsufficientRealDocs {
                needed: self.n_docs.max(MIN_DOCS),
                available: real_docs,
            });
        }
        if self.runs == 0 {
            return Err(TuneError::NoRuns);
        }
        self.base_params.validate().map_err(GenerateError::from)?;
        build_grid(&self.axes)
    }

    fn prompt_list(&self) -> Vec<Prompt> {
        if self.prompts.is_empty() {
            vec![Prompt::empty()]
        } else {
            self.prompts.iter().map(|(id, text)| Prompt::new(id.clone(), text.clone())).collect()
        }
    }

    /// Seed for the synthetic batch of grid point `config_index`; shared by all its runs.
    pub fn generation_seed(&self, config_index: usize) -> u64 {
        derive_seed(self.master_seed, &[0, config_index as u64])
    }

    /// Seed for the real-document sample and split of one run.
    pub fn run_seed(&self, config_index: usize, run: usize) -> u64 {
        derive_seed(self.master_seed, &[1, config_index as u64, run as u64])
    }
}

/// Synthetic documents for one grid point.
pub fn generate_for_config<F: BackendFactory>(
    factory: &F,
    config: &GridConfig,
    tune: &TuneConfig,
    seed: u64,
    policy: &DisclaimerPolicy,
) -> Result<Vec<Document>, TuneError> {
    let backend = factory.backend(config.mu())?;
    let base = config.sampling_params(&tune.base_params);
    let prompts = tune.prompt_list();
    (0..tune.n_docs)
        .map(|i| {
            let params = SamplingParams { seed: derive_seed(seed, &[i as u64]), ..base.clone() };
            let prompt = &prompts[i % prompts.len()];
            Ok(generate_with_id(&backend, format!("synthetic-{i}"), prompt, &params, policy)?)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub accuracy: f64,
    pub auc: f64,
}

/// One discriminator run: sample `synthetic.len()` real documents without
/// replacement, split 75/25 by class, fit on the text alone, and score the
/// held-out part.
pub fn discriminate(
    synthetic: &[Document],
    real: &Corpus,
    split: &EvalSplit,
    hyper: &Hyper,
    run_seed: u64,
) -> Result<RunOutcome, TuneError> {
    let n = synthetic.len();
    if real.len() < n {
        return Err(TuneError::InsufficientRealDocs { needed: n, available: real.len() });
    }
    let mut rng = rng_from_seed(derive_seed(run_seed, &[0]));
    let picked = sample_indices(&mut rng, real.len(), n);
    let mut texts: Vec<&str> = synthetic.iter().map(|d| d.text.as_str()).collect();
    texts.extend(picked.iter().map(|&i| real.documents()[i].text.as_str()));
    let labels: Vec<bool> = (0..2 * n).map(|i| i < n).collect();
    let split = EvalSplit { seed: derive_seed(run_seed, &[1]), ..*split };
    let report = fit(&texts, &labels, &split, hyper)?;
    Ok(RunOutcome { accuracy: report.held_out_accuracy, auc: auc(&report.held_out)? })
}

/// Generate and discriminate in one step.
pub fn evaluate_config<F: BackendFactory>(
    factory: &F,
    real: &Corpus,
    config: &GridConfig,
    tune: &TuneConfig,
    generation_seed: u64,
    run_seed: u64,
) -> Result<RunOutcome, TuneError> {
    if tune.n_docs < MIN_DOCS || real.len() < tune.n_docs {
        return Err(TuneError::InsufficientRealDocs { needed: tune.n_docs.max(MIN_DOCS), available: real.len() });
    }
    let synthetic = generate_for_config(factory, config, tune, generation_seed, &DisclaimerPolicy::default())?;
    discriminate(&synthetic, real, &tune.split, &tune.hyper, run_seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub config: GridConfig,
    pub mean_accuracy: f64,
    /// Sample standard deviation across runs; 0 for a single run.
    pub std_accuracy: f64,
    pub mean_auc: f64,
    pub accuracies: Vec<f64>,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub grid: Vec<GridConfig>,
    pub results: Vec<ConfigResult>,
    pub best: GridConfig,
    pub best_index: usize,
    /// Largest minus smallest mean accuracy over the grid.
    pub accuracy_range: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    libm::sqrt(v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64)
}

/// Folds per-run outcomes (indexed `[config][run]`) into a report. The best
/// configuration has the lowest mean accuracy; ties go to the
/// lexicographically smallest configuration.
pub fn assemble_report(grid: Vec<GridConfig>, outcomes: Vec<Vec<RunOutcome>>) -> TuningReport {
    let results: Vec<ConfigResult> = grid
        .iter()
        .zip(&outcomes)
        .map(|(config, runs)| {
            let accuracies: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
            let aucs: Vec<f64> = runs.iter().map(|r| r.auc).collect();
            ConfigResult {
                config: config.clone(),
                mean_accuracy: mean(&accuracies),
                std_accuracy: sample_std(&accuracies),
                mean_auc: mean(&aucs),
                runs: accuracies.len(),
                accuracies,
            }
        })
        .collect();
    let mut best_index = 0;
    for (i, r) in results.iter().enumerate().skip(1) {
        let b = &results[best_index];
        let better = match r.mean_accuracy.total_cmp(&b.mean_accuracy) {
            Ordering::Less => true,
            Ordering::Equal => r.config.cmp_values(&b.config) == Ordering::Less,
            Ordering::Greater => false,
        };
        if better {
            best_index = i;
        }
    }
    let hi = results.iter().map(|r| r.mean_accuracy).fold(f64::MIN, f64::max);
    let lo = results.iter().map(|r| r.mean_accuracy).fold(f64::MAX, f64::min);
    TuningReport { best: grid[best_index].clone(), grid, results, best_index, accuracy_range: hi - lo }
}

/// Adaptation weights used anywhere in the grid, for [`BackendFactory::prepare`].
pub fn grid_mus(grid: &[GridConfig]) -> Vec<f64> {
    let mut mus: Vec<f64> = grid.iter().filter_map(GridConfig::mu).collect();
    mus.sort_by(f64::total_cmp);
    mus.dedup();
    mus
}

/// Sequential tuning. Seeds depend only on (configuration index, run index),
/// so any evaluation order gives the same report.
pub fn tune<F: BackendFactory>(factory: &mut F, real: &Corpus, config: &TuneConfig) -> Result<TuningReport, TuneError> {
    let grid = config.validate(real.len())?;
    factory.prepare(&grid_mus(&grid))?;
    let policy = DisclaimerPolicy::default();
    let mut outcomes = Vec::with_capacity(grid.len());
    for (ci, point) in grid.iter().enumerate() {
        let synthetic = generate_for_config(&*factory, point, config, config.generation_seed(ci), &policy)?;
        let runs = (0..config.runs)
            .map(|r| discriminate(&synthetic, real, &config.split, &config.hyper, config.run_seed(ci, r)))
            .collect::<Result<Vec<_>, _>>()?;
        outcomes.push(runs);
    }
    Ok(assemble_report(grid, outcomes))
}
