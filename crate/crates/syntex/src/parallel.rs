//! Rayon versions of the batch, tuning and learning-curve loops.
//!
//! Seeds in the core crate depend only on positional indices, and results
//! are collected in index order, so each function returns exactly what its
//! sequential counterpart returns.

use rayon::prelude::*;
use syntex_core::corpus::DisclaimerPolicy;
use syntex_core::generator::{batch_jobs, run_job, GenerateError};
use syntex_core::harness::{assemble_curve, curve_cells, run_cell, CurveResult, CurveSpec, HarnessError};
use syntex_core::tuner::{
    assemble_report, discriminate, generate_for_config, grid_mus, BackendFactory, TuneConfig, TuneError, TuningReport,
};
use syntex_core::{Backend, Corpus, Prompt, SamplingParams};

pub fn generate_batch<B: Backend + Sync + ?Sized>(
    backend: &B,
    prompts: &[Prompt],
    params: &SamplingParams,
    count_per_prompt: usize,
    policy: &DisclaimerPolicy,
    corpus_name: &str,
) -> Result<Corpus, GenerateError> {
    let docs = batch_jobs(prompts, params.seed, count_per_prompt)?
        .into_par_iter()
        .map(|job| run_job(backend, prompts, job, params, policy))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Corpus::new(corpus_name, docs)?)
}

pub fn tune<F: BackendFactory + Sync>(factory: &mut F, real: &Corpus, config: &TuneConfig) -> Result<TuningReport, TuneError> {
    let grid = config.validate(real.len())?;
    factory.prepare(&grid_mus(&grid))?;
    let factory = &*factory;
    let policy = DisclaimerPolicy::default();
    let synthetic = grid
        .par_iter()
        .enumerate()
        .map(|(ci, point)| generate_for_config(factory, point, config, config.generation_seed(ci), &policy))
        .collect::<Result<Vec<_>, _>>()?;
    let cells: Vec<(usize, usize)> = (0..grid.len()).flat_map(|ci| (0..config.runs).map(move |r| (ci, r))).collect();
    let flat = cells
        .par_iter()
        .map(|&(ci, r)| discriminate(&synthetic[ci], real, &config.split, &config.hyper, config.run_seed(ci, r)))
        .collect::<Result<Vec<_>, _>>()?;
    let outcomes = flat.chunks(config.runs).map(|c| c.to_vec()).collect();
    Ok(assemble_report(grid, outcomes))
}

pub fn learning_curve(pools: &[(String, Corpus)], eval: &Corpus, spec: &CurveSpec) -> Result<CurveResult, HarnessError> {
    let cells = curve_cells(pools, eval, spec)?;
    let metrics = cells
        .par_iter()
        .map(|&c| run_cell(pools, eval, spec, c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble_curve(pools, spec, &cells, metrics))
}
