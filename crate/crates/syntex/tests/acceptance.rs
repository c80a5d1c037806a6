//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p syntex --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use syntex::cli::{self, Args, Command};
use syntex::jsonl;
use syntex::parallel;
use syntex_core::bench::{
    DialectBenchmark, TaggingBenchmark, TuningBenchmark, POOL_MATCHED, POOL_MISMATCHED, POOL_REAL,
};
use syntex_core::corpus::DisclaimerPolicy;
use syntex_core::rng::ChaCha8Rng;
use syntex_core::generator::generate_batch;
use syntex_core::harness::{crossover_analysis, zero_shot_train, CurveSpec, Task};
use syntex_core::linear::{
    accuracy, auc, fit, precision_recall_f1, stratified_split, Averaging, EvalSplit, Hyper, LogisticObjective,
    SparseVec,
};
use syntex_core::ngram::{BOS, EOS, UNK};
use syntex_core::sampling::{sample_next, transform};
use syntex_core::tagger::{span_f1, spans_to_bio, TaggedSequence};
use syntex_core::tuner::{build_grid, discriminate, Axes, LocalFactory, TuneConfig};
use syntex_core::{Corpus, Distribution, Document, LocalBackend, NGramModel, Prompt, SamplingParams, Span};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- 1

fn scope() -> Outcome {
    outcome(
        true,
        "full-scale corpora and pretrained models are unavailable; acceptance rests on the oracle, property and benchmark checks below",
    )
}

// ---------------------------------------------------------------- 2

/// Brute-force absolute-discount backoff straight from the token lists.
struct Oracle {
    order: usize,
    discount: f64,
    padded: Vec<Vec<String>>,
    vocab: BTreeSet<String>,
}

impl Oracle {
    fn new(seqs: &[Vec<String>], order: usize, discount: f64) -> Self {
        let mut vocab: BTreeSet<String> = [BOS, EOS, UNK].iter().map(|s| s.to_string()).collect();
        let padded: Vec<Vec<String>> = seqs
            .iter()
            .map(|s| {
                let mut p = vec![BOS.to_string(); order - 1];
                p.extend(s.iter().cloned());
                p.push(EOS.to_string());
                p
            })
            .collect();
        for s in seqs {
            vocab.extend(s.iter().cloned());
        }
        Self { order, discount, padded, vocab }
    }

    /// Tokens following `ctx` (exact length match on the preceding tokens).
    fn followers(&self, ctx: &[String]) -> Vec<&String> {
        let mut out = Vec::new();
        for p in &self.padded {
            for i in (self.order - 1)..p.len() {
                if i >= ctx.len() && p[i - ctx.len()..i] == *ctx {
                    out.push(&p[i]);
                }
            }
        }
        out
    }

    fn prob(&self, history: &[String], w: &str) -> f64 {
        let mut h: Vec<String> = vec![BOS.to_string(); self.order - 1];
        h.extend(history.iter().map(|t| if self.vocab.contains(t) { t.clone() } else { UNK.to_string() }));
        let h = h[h.len() - (self.order - 1)..].to_vec();
        if w == BOS {
            return 0.0;
        }
        let w = if self.vocab.contains(w) { w.to_string() } else { UNK.to_string() };
        self.level(&h, &w, self.order - 1)
    }

    fn level(&self, h: &[String], w: &str, j: usize) -> f64 {
        let floor = 1.0 / (self.vocab.len() - 1) as f64;
        let lower = |this: &Self| if j == 0 { floor } else { this.level(h, w, j - 1) };
        let ctx = &h[h.len() - j..];
        let f = self.followers(ctx);
        if f.is_empty() {
            return lower(self);
        }
        let total = f.len() as f64;
        let c = f.iter().filter(|t| t.as_str() == w).count() as f64;
        if self.discount == 0.0 {
            return c / total;
        }
        let types = f.iter().collect::<BTreeSet<_>>().len() as f64;
        (c - self.discount).max(0.0) / total + self.discount * types / total * lower(self)
    }
}

fn ngram_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(2);
    let words = ["a", "b", "c", "d", "e", "f"];
    let (mut corpora, mut queries, mut worst_exact, mut worst) = (0, 0usize, 0.0f64, 0.0f64);
    let mut exact_ok = true;
    for i in 0..60 {
        let mut seqs = Vec::new();
        let mut tokens = 0;
        while tokens < 50 {
            let len = r.random_range(1..8).min(50 - tokens);
            seqs.push((0..len).map(|_| words[r.random_range(0..words.len())].to_string()).collect::<Vec<_>>());
            tokens += len;
            if r.random_bool(0.2) {
                break;
            }
        }
        let order = r.random_range(1..=4);
        let discount = if i % 2 == 0 { 0.0 } else { r.random_range(0.05..0.95) };
        let model = NGramModel::train_sequences(seqs.iter().map(|s| s.as_slice()), order, discount).unwrap();
        let oracle = Oracle::new(&seqs, order, discount);
        let mut histories: BTreeSet<Vec<String>> = BTreeSet::new();
        for s in &seqs {
            for k in 0..=s.len() {
                histories.insert(s[k.saturating_sub(order)..k].to_vec());
            }
        }
        for _ in 0..10 {
            let n = r.random_range(0..order + 1);
            histories.insert((0..n).map(|_| ["a", "b", "zz", BOS][r.random_range(0..4)].to_string()).collect());
        }
        let targets: Vec<&str> = words.iter().copied().chain([EOS, UNK, BOS, "zz"]).collect();
        for h in &histories {
            for &w in &targets {
                let (m, o) = (model.prob(h, w), oracle.prob(h, w));
                queries += 1;
                if discount == 0.0 {
                    if m != o {
                        exact_ok = false;
                        worst_exact = worst_exact.max((m - o).abs());
                    }
                } else {
                    worst = worst.max((m - o).abs());
                }
            }
        }
        corpora += 1;
    }
    let dt = t0.elapsed();
    outcome(
        exact_ok && worst <= 1e-9 && corpora >= 25 && dt < Duration::from_secs(5),
        format!(
            "{corpora} corpora, {queries} probabilities; D=0 exact: {exact_ok} (max diff {worst_exact:e}), D>0 max diff {worst:e}; {dt:.2?}"
        ),
    )
}

// ---------------------------------------------------------------- 3

fn target(probs: &[f64], params: &SamplingParams) -> Vec<f64> {
    let mut p: Vec<f64> = if params.temperature == 0.0 {
        let m = (0..probs.len()).fold(0, |b, i| if probs[i] > probs[b] { i } else { b });
        (0..probs.len()).map(|i| if i == m { 1.0 } else { 0.0 }).collect()
    } else {
        let w: Vec<f64> = probs.iter().map(|x| x.powf(1.0 / params.temperature)).collect();
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    };
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    let mut keep = vec![true; p.len()];
    if let Some(k) = params.top_k {
        for &i in &order[k.min(p.len())..] {
            keep[i] = false;
        }
    }
    let renorm = |p: &mut Vec<f64>, keep: &[bool]| {
        let s: f64 = (0..p.len()).filter(|&i| keep[i]).map(|i| p[i]).sum();
        for i in 0..p.len() {
            p[i] = if keep[i] { p[i] / s } else { 0.0 };
        }
    };
    renorm(&mut p, &keep);
    if let Some(top) = params.top_p {
        let mut cum = 0.0;
        let mut done = false;
        for &i in &order {
            if done || !keep[i] {
                keep[i] = false;
                continue;
            }
            cum += p[i];
            if cum >= top - 1e-12 {
                done = true;
            }
        }
        renorm(&mut p, &keep);
    }
    p
}

fn sampling_laws() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(3);
    let base = [0.4, 0.25, 0.15, 0.1, 0.06, 0.04];
    let settings = [
        (1.0, None, None),
        (0.5, None, None),
        (2.0, None, None),
        (1.0, Some(3), None),
        (1.0, None, Some(0.7)),
        (1.3, Some(4), Some(0.9)),
    ];
    let mut worst = 0.0f64;
    for (si, &(t, k, p)) in settings.iter().enumerate() {
        let dist = Distribution::from_weights(base.iter().enumerate().map(|(i, &w)| (i, w))).unwrap();
        let params = SamplingParams { temperature: t, top_k: k, top_p: p, ..Default::default() };
        let want = target(&base, &params);
        let mut counts = vec![0usize; base.len()];
        let mut g = rng(100 + si as u64);
        let n = 100_000;
        for _ in 0..n {
            counts[sample_next(&dist, &params, &mut g).unwrap()] += 1;
        }
        for i in 0..base.len() {
            worst = worst.max((counts[i] as f64 / n as f64 - want[i]).abs());
        }
    }
    let mut argmax_ok = true;
    for _ in 0..200 {
        let w: Vec<f64> = (0..8).map(|_| r.random_range(0.01..1.0)).collect();
        let dist = Distribution::from_weights(w.iter().enumerate().map(|(i, &x)| (i, x))).unwrap();
        let best = *dist.argmax().unwrap();
        for params in [
            SamplingParams { temperature: 0.0, ..Default::default() },
            SamplingParams { top_k: Some(1), ..Default::default() },
            SamplingParams { top_p: Some(1e-12), ..Default::default() },
        ] {
            let d = transform(&dist, &params);
            let mut g = rng(r.random());
            argmax_ok &= d.len() == 1 && d.prob(&best) == 1.0 && sample_next(&dist, &params, &mut g) == Some(best);
        }
    }
    let mut entropy_ok = true;
    for _ in 0..100 {
        let w: Vec<f64> = (0..r.random_range(2..12)).map(|_| r.random_range(0.001..1.0)).collect();
        let dist = Distribution::from_weights(w.iter().enumerate().map(|(i, &x)| (i, x))).unwrap();
        let temps = [0.05, 0.1, 0.3, 0.5, 0.8, 1.0, 1.5, 2.0, 4.0, 10.0];
        let hs: Vec<f64> = temps
            .iter()
            .map(|&t| transform(&dist, &SamplingParams { temperature: t, ..Default::default() }).entropy())
            .collect();
        entropy_ok &= hs.windows(2).all(|p| p[1] >= p[0] - 1e-12);
    }
    let dt = t0.elapsed();
    outcome(
        worst <= 0.01 && argmax_ok && entropy_ok && dt < Duration::from_secs(30),
        format!(
            "6 settings x 100000 draws, max |freq - target| = {worst:.4}; argmax limits: {argmax_ok}; entropy monotone in T on 100 distributions: {entropy_ok}; {dt:.2?}"
        ),
    )
}

// ---------------------------------------------------------------- 4

fn tuner_phenomenon() -> Outcome {
    let t0 = Instant::now();
    let (mut matched_lo, mut matched_hi, mut extreme_lo) = (1.0f64, 0.0f64, 1.0f64);
    let mut best_hits = 0;
    for seed in 0..10u64 {
        let b = TuningBenchmark::new(seed, 600);
        let mut f = LocalFactory::new(b.truth.clone());
        let mut cfg = TuneConfig::new(b.axes.clone(), 200, seed);
        cfg.base_params = b.real_params.clone();
        let r = parallel::tune(&mut f, &b.real, &cfg).unwrap();
        for res in &r.results {
            if res.config == b.matched {
                matched_lo = matched_lo.min(res.mean_accuracy);
                matched_hi = matched_hi.max(res.mean_accuracy);
            } else {
                extreme_lo = extreme_lo.min(res.mean_accuracy);
            }
        }
        best_hits += usize::from(r.best == b.matched);
    }
    let dt = t0.elapsed();
    outcome(
        matched_lo >= 0.4 && matched_hi <= 0.6 && extreme_lo >= 0.85 && best_hits >= 9 && dt < Duration::from_secs(300),
        format!(
            "10 seeds x 10 runs: matched mean accuracy in [{matched_lo:.3}, {matched_hi:.3}], extremes >= {extreme_lo:.3}, best = matched in {best_hits}/10; {dt:.2?}"
        ),
    )
}

// ---------------------------------------------------------------- 5

fn grid_cardinality() -> Outcome {
    let grid = build_grid(&Axes::standard()).unwrap();
    let distinct: BTreeSet<String> = grid.iter().map(|g| g.describe()).collect();
    outcome(grid.len() == 56 && distinct.len() == 56, format!("standard axes give {} configurations ({} distinct)", grid.len(), distinct.len()))
}

// ---------------------------------------------------------------- 6

fn discriminator_protocol() -> Outcome {
    let mut r = rng(6);
    let mut split_ok = true;
    for _ in 0..500 {
        let n_pos = r.random_range(3..120);
        let n_neg = r.random_range(3..120);
        let mut labels: Vec<bool> = (0..n_pos).map(|_| true).chain((0..n_neg).map(|_| false)).collect();
        syntex_core::rng::shuffle(&mut syntex_core::rng::rng_from_seed(r.random()), &mut labels);
        let (train, eval) = stratified_split(&labels, &EvalSplit { train_fraction: 0.75, seed: r.random() }).unwrap();
        let tp = train.iter().filter(|&&i| labels[i]).count();
        let tn = train.len() - tp;
        let all: BTreeSet<usize> = train.iter().chain(&eval).copied().collect();
        split_ok &= tp == (n_pos as f64 * 0.75).round() as usize
            && tn == (n_neg as f64 * 0.75).round() as usize
            && all.len() == labels.len()
            && train.len() + eval.len() == labels.len();
    }
    // Synthetic and real drawn from the same source: nothing to learn.
    let b = TuningBenchmark::new(60, 400);
    let backend = LocalBackend::new(b.truth.clone(), "same");
    let policy = DisclaimerPolicy::default();
    let params = SamplingParams { seed: 61, ..b.real_params.clone() };
    let synthetic = generate_batch(&backend, &[Prompt::empty()], &params, 200, &policy, "s").unwrap().into_documents();
    let accs: Vec<f64> = (0..10)
        .map(|run| discriminate(&synthetic, &b.real, &EvalSplit::default(), &Hyper::default(), 600 + run).unwrap().accuracy)
        .collect();
    let same_source = accs.iter().sum::<f64>() / accs.len() as f64;
    // Coin-flip labels on 200 documents.
    let texts: Vec<&str> = b.real.iter().take(200).map(|d| d.text.as_str()).collect();
    let coin: Vec<f64> = (0..10)
        .map(|run| {
            let mut g = rng(700 + run);
            let labels: Vec<bool> = texts.iter().map(|_| g.random_bool(0.5)).collect();
            fit(&texts, &labels, &EvalSplit { train_fraction: 0.75, seed: run }, &Hyper::default()).unwrap().held_out_accuracy
        })
        .collect();
    let coin_mean = coin.iter().sum::<f64>() / coin.len() as f64;
    outcome(
        split_ok && (same_source - 0.5).abs() <= 0.1 && (coin_mean - 0.5).abs() <= 0.1,
        format!(
            "500 random splits exactly 75/25 per class: {split_ok}; label-independent accuracy: same-source {same_source:.3}, coin-flip {coin_mean:.3} (mean of 10 runs)"
        ),
    )
}

// ---------------------------------------------------------------- 7

fn pairwise_auc(scores: &[(f64, bool)]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for a in scores.iter().filter(|s| s.1) {
        for b in scores.iter().filter(|s| !s.1) {
            den += 1.0;
            num += if a.0 > b.0 {
                1.0
            } else if a.0 == b.0 {
                0.5
            } else {
                0.0
            };
        }
    }
    num / den
}

fn classifier_numerics() -> Outcome {
    let mut r = rng(7);
    let mut grad_worst = 0.0f64;
    for _ in 0..20 {
        let dim = r.random_range(3..15);
        let n = r.random_range(5..40);
        let rows: Vec<SparseVec> = (0..n)
            .map(|_| {
                let mut row = SparseVec::new();
                for j in 0..dim {
                    if r.random_bool(0.4) {
                        row.push((j, r.random_range(0.0..2.0)));
                    }
                }
                row
            })
            .collect();
        let labels: Vec<bool> = (0..n).map(|_| r.random_bool(0.5)).collect();
        let obj = LogisticObjective { rows: &rows, labels: &labels, l2_lambda: r.random_range(0.0..0.1), dim };
        let w: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
        let b = r.random_range(-1.0..1.0);
        let (gw, gb) = obj.gradient(&w, b);
        let h = 1e-5;
        let rel = |fd: f64, g: f64| (fd - g).abs() / fd.abs().max(g.abs()).max(1e-3);
        for i in 0..dim {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[i] += h;
            wm[i] -= h;
            grad_worst = grad_worst.max(rel((obj.loss(&wp, b) - obj.loss(&wm, b)) / (2.0 * h), gw[i]));
        }
        grad_worst = grad_worst.max(rel((obj.loss(&w, b + h) - obj.loss(&w, b - h)) / (2.0 * h), gb));
    }
    let mut auc_worst = 0.0f64;
    for _ in 0..1000 {
        let n = r.random_range(2..60);
        let mut s: Vec<(f64, bool)> = (0..n).map(|_| ((r.random_range(0.0..1.0f64) * 10.0).round() / 10.0, r.random_bool(0.5))).collect();
        s[0].1 = true;
        s[1].1 = false;
        auc_worst = auc_worst.max((auc(&s).unwrap() - pairwise_auc(&s)).abs());
    }
    let mut fixed = Vec::new();
    let p = [true, true, false, false];
    let g = [true, false, true, false];
    let macro_f1 = precision_recall_f1(&p, &g, Averaging::Macro).unwrap().f1;
    fixed.push((accuracy(&p, &g).unwrap(), 0.5));
    fixed.push((precision_recall_f1(&p, &g, Averaging::Binary(&true)).unwrap().f1, 0.5));
    fixed.push((precision_recall_f1(&p, &g, Averaging::Binary(&false)).unwrap().f1, 0.5));
    fixed.push((macro_f1, 0.5));
    let all_pos = [true; 4];
    let g2 = [true, false, false, false];
    let prf = precision_recall_f1(&all_pos, &g2, Averaging::Binary(&true)).unwrap();
    fixed.push((prf.recall, 1.0));
    fixed.push((prf.precision, 0.25));
    fixed.push((prf.f1, 0.4));
    fixed.push((auc(&[(0.8, true), (0.3, true), (0.5, false), (0.1, false)]).unwrap(), 0.75));
    let fixed_ok = fixed.iter().all(|(a, b)| (a - b).abs() < 1e-12);
    outcome(
        grad_worst <= 1e-6 && auc_worst <= 1e-9 && fixed_ok,
        format!(
            "gradient vs finite differences on 20 problems: max rel err {grad_worst:.2e}; AUC vs pairwise on 1000 sets: max diff {auc_worst:.1e}; hand confusion-matrix oracles: {fixed_ok}"
        ),
    )
}

// ---------------------------------------------------------------- 8

fn learning_curve_phenomenon() -> (Outcome, Outcome) {
    let t0 = Instant::now();
    let (mut ordered, mut matched_monotone, mut real_monotone) = (0, 0, 0);
    let mut crossings = Vec::new();
    for seed in 0..20u64 {
        let b = TaggingBenchmark::new(seed);
        let (pools, eval) = b.curve_pools(500, 300, seed).unwrap();
        let spec = CurveSpec::new(Task::SequenceTagging { epochs: 5 }, seed);
        let curve = parallel::learning_curve(&pools, &eval, &spec).unwrap();
        let x = crossover_analysis(&curve, POOL_REAL, 200).unwrap();
        let size = |s: &str| x[s].unwrap_or(usize::MAX);
        if size(POOL_MISMATCHED) > size(POOL_MATCHED) {
            ordered += 1;
        }
        crossings.push(format!("{:?}/{:?}", x[POOL_MATCHED], x[POOL_MISMATCHED]));
        let monotone = |source: &str| {
            let m: Vec<f64> = spec.train_sizes.iter().map(|&n| curve.mean(source, n).unwrap()).collect();
            m.windows(2).all(|w| w[1] >= w[0])
        };
        matched_monotone += usize::from(monotone(POOL_MATCHED));
        real_monotone += usize::from(monotone(POOL_REAL));
    }
    let dt = t0.elapsed();
    let curve = outcome(
        ordered >= 18 && matched_monotone == 20 && dt < Duration::from_secs(600),
        format!(
            "20 seeds: mismatched crossover strictly larger in {ordered}/20, matched means non-decreasing in {matched_monotone}/20; matched/mismatched crossover sizes {}; {dt:.2?}",
            crossings.join(" ")
        ),
    );
    let tagger = outcome(
        real_monotone >= 18,
        format!("tagger span-F1 non-decreasing in training size on the real pool in {real_monotone}/20 seeds"),
    );
    (curve, tagger)
}

// ---------------------------------------------------------------- 9

fn zero_shot() -> Outcome {
    let mut accs = Vec::new();
    for seed in 0..5u64 {
        let b = DialectBenchmark::new(seed);
        let pool = b.synthetic_pool("pool", 10, seed).unwrap();
        let eval = b.real_corpus("eval", 300, seed + 100);
        let hand_labels = pool.iter().filter(|d| d.meta.get("label_source").map(String::as_str) != Some("prompt")).count();
        assert_eq!(hand_labels, 0);
        let (_, r) = zero_shot_train(&pool, &eval, &b.labels[0], &Hyper::default(), seed).unwrap();
        accs.push(r.accuracy);
    }
    let lo = accs.iter().copied().fold(1.0, f64::min);
    outcome(lo >= 0.9, format!("prompt-labeled training, 0 hand labels, 5 seeds: real-eval accuracy >= {lo:.3} ({accs:.3?})"))
}

// ---------------------------------------------------------------- 10

fn seq(len: usize, spans: &[(usize, usize, &str)]) -> TaggedSequence {
    let spans: Vec<Span> = spans.iter().map(|&(s, e, t)| Span::new(s, e, t)).collect();
    let tokens = (0..len).map(|i| format!("t{i}")).collect();
    TaggedSequence::new(tokens, spans_to_bio(len, &spans)).unwrap()
}

fn span_oracle() -> Outcome {
    let three = [seq(10, &[(0, 1, "W"), (2, 4, "W"), (6, 9, "P")])];
    let a = span_f1(&three, &three).unwrap();
    let pred = [seq(8, &[(2, 4, "W"), (6, 7, "W")])];
    let gold = [seq(8, &[(2, 4, "W")])];
    let b = span_f1(&pred, &gold).unwrap();
    let none = span_f1(&[seq(8, &[])], &gold).unwrap();
    let fixed_ok = (a.precision, a.recall, a.f1) == (1.0, 1.0, 1.0)
        && b.precision == 0.5
        && b.recall == 1.0
        && (b.f1 - 2.0 / 3.0).abs() < 1e-12
        && (none.precision, none.recall, none.f1) == (0.0, 0.0, 0.0);
    let mut r = rng(10);
    let mut self_ok = 0;
    for _ in 0..100 {
        let docs: Vec<TaggedSequence> = (0..r.random_range(1..5))
            .map(|_| {
                let len = r.random_range(1..20);
                let mut spans = Vec::new();
                let mut i = 0;
                while i < len {
                    if r.random_bool(0.3) {
                        let end = (i + r.random_range(1..4)).min(len);
                        spans.push((i, end, ["W", "P", "L"][r.random_range(0..3)]));
                        i = end;
                    } else {
                        i += 1;
                    }
                }
                seq(len, &spans)
            })
            .collect();
        let s = span_f1(&docs, &docs).unwrap();
        self_ok += usize::from((s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0));
    }
    outcome(fixed_ok && self_ok == 100, format!("fixed examples: {fixed_ok}; span_f1(x, x) = (1,1,1) on {self_ok}/100 random taggings"))
}

// ---------------------------------------------------------------- 11

/// Synthetic lines without a non-empty disclaimer, read as raw JSON.
fn undisclaimed_lines(dir: &Path) -> usize {
    let mut bad = 0;
    for entry in walk(dir) {
        if entry.extension().and_then(|e| e.to_str()) != Some("jsonl") {
            continue;
        }
        for line in fs::read_to_string(&entry).unwrap().lines().filter(|l| !l.trim().is_empty()) {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            if v["provenance"] == "synthetic" {
                let ok = v["disclaimer"].as_str().is_some_and(|d| !d.trim().is_empty());
                bad += usize::from(!ok);
            }
        }
    }
    bad
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let Ok(rd) = fs::read_dir(&d) else { continue };
        for e in rd {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

fn random_text(r: &mut ChaCha8Rng) -> String {
    let words = ["gun", "fired", "a", "the", "\"q\"", "tab\there", "ü", ""];
    (0..r.random_range(0..6)).map(|_| words[r.random_range(0..words.len())]).collect::<Vec<_>>().join(" ")
}

fn random_disclaimer(r: &mut ChaCha8Rng) -> serde_json::Value {
    match r.random_range(0..5) {
        0 => serde_json::Value::Null,
        1 => serde_json::json!(""),
        2 => serde_json::json!("   "),
        _ => serde_json::json!("SYNTHETIC TEXT! fuzz"),
    }
}

fn ethics_fuzz() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let model = {
        let seqs: Vec<Vec<String>> = ["the gun fired", "a knife", "the rifle fired twice"]
            .iter()
            .map(|s| s.split(' ').map(String::from).collect())
            .collect();
        Arc::new(NGramModel::train_sequences(seqs.iter().map(|s| s.as_slice()), 2, 0.3).unwrap())
    };
    fs::write(dir.path().join("model.nglm"), syntex::formats::nglm_to_string(&model)).unwrap();
    let mut r = rng(11);
    let (mut writes, mut refused, mut load_violations, mut loads_refused) = (0, 0, 0, 0);
    for i in 0..1000 {
        let out = dir.path().join(format!("run{i}"));
        match i % 4 {
            // Library generation with a random, possibly empty, policy.
            0 => {
                let policy = DisclaimerPolicy {
                    template: ["", "  ", "{author}", "SYNTHETIC by {author}"][r.random_range(0..4)].into(),
                    author: ["", "x"][r.random_range(0..2)].into(),
                    contact: String::new(),
                    purpose: String::new(),
                };
                let backend = LocalBackend::new(model.clone(), "fuzz");
                let params = SamplingParams { seed: r.random(), max_tokens: r.random_range(1..8), ..Default::default() };
                let n = r.random_range(1..4);
                match generate_batch(&backend, &[Prompt::new("p", random_text(&mut r))], &params, n, &policy, "c") {
                    Ok(c) => {
                        fs::create_dir_all(&out).unwrap();
                        jsonl::save_jsonl(&c, &out.join("c.jsonl")).unwrap();
                        writes += 1;
                    }
                    Err(_) => refused += 1,
                }
            }
            // CLI generation with a random disclaimer block.
            1 => {
                fs::create_dir_all(&out).unwrap();
                let disclaimer = if r.random_bool(0.5) {
                    let template = ["", "SYNTHETIC {author}", " "][r.random_range(0..3)];
                    serde_json::json!({"template": template, "author": "a", "contact": "", "purpose": ""})
                } else {
                    serde_json::Value::Null
                };
                let cfg = serde_json::json!({
                    "seed": r.random::<u32>(),
                    "disclaimer": disclaimer,
                    "generate": {"model": "../model.nglm", "count_per_prompt": r.random_range(1..3), "sampling": {"max_tokens": 5}}
                });
                let path = out.join("config.json");
                fs::write(&path, cfg.to_string()).unwrap();
                let args = Args { command: Command::Generate, config: Some(path), seed: None, out: None, backend: None, backend_url: None };
                match cli::run(&args) {
                    Ok(_) => writes += 1,
                    Err(_) => refused += 1,
                }
            }
            // Raw JSONL with random provenance and disclaimer fields.
            2 => {
                let mut lines = Vec::new();
                let mut expect_fail = false;
                for k in 0..r.random_range(1..5) {
                    let synthetic = r.random_bool(0.5);
                    let d = if synthetic { random_disclaimer(&mut r) } else { serde_json::Value::Null };
                    if synthetic && !d.as_str().is_some_and(|s| !s.trim().is_empty()) {
                        expect_fail = true;
                    }
                    lines.push(serde_json::json!({
                        "id": format!("d{k}"), "text": random_text(&mut r),
                        "provenance": if synthetic { "synthetic" } else { "real" }, "disclaimer": d,
                    }).to_string());
                }
                let loaded = jsonl::parse_jsonl("fuzz", &lines.join("\n"));
                if expect_fail {
                    if loaded.is_ok() {
                        load_violations += 1;
                    } else {
                        loads_refused += 1;
                    }
                } else if loaded.is_err() {
                    load_violations += 1;
                }
            }
            // Stripping the disclaimer from a loaded corpus cannot produce a corpus.
            _ => {
                let policy = DisclaimerPolicy::default();
                let docs: Vec<Document> = (0..r.random_range(1..4))
                    .map(|k| policy.apply(Document::synthetic_draft(format!("s{k}"), random_text(&mut r))).unwrap())
                    .collect();
                let mut docs = Corpus::new("c", docs).unwrap().into_documents();
                let k = r.random_range(0..docs.len());
                docs[k].disclaimer = if r.random_bool(0.5) { None } else { Some(" ".into()) };
                match Corpus::new("c", docs) {
                    Ok(c) => {
                        fs::create_dir_all(&out).unwrap();
                        let _ = jsonl::save_jsonl(&c, &out.join("stripped.jsonl"));
                        load_violations += 1;
                    }
                    Err(_) => refused += 1,
                }
            }
        }
    }
    let bad = undisclaimed_lines(dir.path());
    outcome(
        bad == 0 && load_violations == 0 && writes > 0 && loads_refused > 0,
        format!(
            "1000 invocations: {writes} corpora written, {refused} refused writes, {loads_refused} undisclaimed loads refused; undisclaimed synthetic lines on disk: {bad}; violations: {load_violations}"
        ),
    )
}

// ---------------------------------------------------------------- 12

fn run_cli(command: Command, config: Option<PathBuf>, seed: Option<u64>, out: Option<PathBuf>) {
    let args = Args { command, config, seed, out, backend: None, backend_url: None };
    if let Err(e) = cli::run(&args) {
        panic!("{} failed: {e}", command.name());
    }
}

fn pipeline(root: &Path, seed: u64) -> BTreeMap<PathBuf, Vec<u8>> {
    run_cli(Command::Bench, None, Some(seed), Some(root.to_path_buf()));
    let cfg = root.join("pipeline.json");
    for c in [Command::TrainLm, Command::Adapt, Command::Tune, Command::Generate, Command::ZeroShot, Command::Curve] {
        run_cli(c, Some(cfg.clone()), None, None);
    }
    walk(root).into_iter().map(|p| (p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap())).collect()
}

fn reproducibility() -> Outcome {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ta = pipeline(a.path(), 1234);
    let tb = pipeline(b.path(), 1234);
    let tc = pipeline(c.path(), 4321);
    let identical = ta == tb;
    let differs = ta.get(Path::new("pipeline/synthetic.jsonl")) != tc.get(Path::new("pipeline/synthetic.jsonl"));
    let expected = ["pipeline/model.nglm", "pipeline/adapted.nglm", "pipeline/tuning_report.json", "pipeline/synthetic.jsonl", "pipeline/zero_shot.json", "pipeline/curve.tsv", "pipeline/manifest.json"];
    let complete = expected.iter().all(|p| ta.contains_key(Path::new(p)));
    outcome(
        identical && differs && complete,
        format!(
            "train-lm -> adapt -> tune -> generate -> zero-shot -> curve twice with seed 1234: {} files, byte-identical: {identical}; another seed changes the output: {differs}",
            ta.len()
        ),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |id: &str, name: &str, o: Outcome| {
        let status = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("{status} [{id}] {name}: {}", o.detail);
    };
    report("1", "scope", scope());
    report("2", "n-gram oracle equivalence", ngram_oracle());
    report("3", "sampling laws", sampling_laws());
    report("4", "adversarial tuner phenomenon", tuner_phenomenon());
    report("5", "grid cardinality", grid_cardinality());
    report("6", "discriminator protocol", discriminator_protocol());
    report("7", "classifier numerics", classifier_numerics());
    let (curve, tagger) = learning_curve_phenomenon();
    report("8", "learning-curve phenomenon", curve);
    report("8+", "tagger learning-curve property", tagger);
    report("9", "zero-shot pathway", zero_shot());
    report("10", "span-F1 oracle", span_oracle());
    report("11", "ethics policy fuzz", ethics_fuzz());
    report("12", "end-to-end reproducibility", reproducibility());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
