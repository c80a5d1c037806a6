//! BIO sequence tagging with a greedy averaged perceptron, and exact-span scoring.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Span};
use crate::rng::{rng_from_seed, shuffle};
use crate::tokenize::{tokenize, TokenSequence};

pub const OUTSIDE: &str = "O";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaggerError {
    #[error("tokens and tags differ in length ({tokens} vs {tags})")]
    LengthMismatch { tokens: usize, tags: usize },
    #[error("tag {index} ({tag:?}) breaks the BIO scheme")]
    InvalidBio { index: usize, tag: String },
    #[error("no training sequence contains a span")]
    NoSpans,
    #[error("prediction and gold are not aligned: {0}")]
    AlignmentMismatch(String),
}

enum Bio<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
}

fn parse(tag: &str) -> Option<Bio<'_>> {
    if tag == OUTSIDE {
        return Some(Bio::Outside);
    }
    match tag.split_once('-') {
        Some(("B", t)) if !t.is_empty() => Some(Bio::Begin(t)),
        Some(("I", t)) if !t.is_empty() => Some(Bio::Inside(t)),
        _ => None,
    }
}

/// An `I-T` tag is valid only after `B-T` or `I-T`.
pub fn is_valid_bio<S: AsRef<str>>(tags: &[S]) -> bool {
    first_invalid(tags).is_none()
}

fn first_invalid<S: AsRef<str>>(tags: &[S]) -> Option<usize> {
    let mut open: Option<&str> = None;
    for (i, tag) in tags.iter().enumerate() {
        let Some(parsed) = parse(tag.as_ref()) else { return Some(i) };
        match parsed {
            Bio::Outside => open = None,
            Bio::Begin(t) => open = Some(t),
            Bio::Inside(t) => {
                if open != Some(t) {
                    return Some(i);
                }
            }
        }
    }
    None
}

/// Rewrites every `I-T` that does not continue a `T` span as `B-T`.
pub fn repair_bio(tags: &mut [String]) {
    let mut open: Option<String> = None;
    for tag in tags.iter_mut() {
        match parse(tag) {
            Some(Bio::Inside(t)) if open.as_deref() != Some(t) => {
                let t = t.to_string();
                *tag = format!("B-{t}");
                open = Some(t);
            }
            Some(Bio::Inside(_)) => {}
            Some(Bio::Begin(t)) => open = Some(t.to_string()),
            Some(Bio::Outside) | None => open = None,
        }
    }
}

pub fn spans_to_bio(len: usize, spans: &[Span]) -> Vec<String> {
    let mut tags = vec![String::from(OUTSIDE); len];
    for s in spans {
        for (k, tag) in tags.iter_mut().enumerate().take(s.end).skip(s.start) {
            *tag = if k == s.start { format!("B-{}", s.tag) } else { format!("I-{}", s.tag) };
        }
    }
    tags
}

pub fn bio_to_spans<S: AsRef<str>>(tags: &[S]) -> Vec<Span> {
    let mut out = Vec::new();
    let mut open: Option<(usize, &str)> = None;
    for (i, tag) in tags.iter().enumerate() {
        let parsed = parse(tag.as_ref());
        let continues = matches!((&parsed, open), (Some(Bio::Inside(t)), Some((_, o))) if *t == o);
        if continues {
            continue;
        }
        if let Some((start, t)) = open.take() {
            out.push(Span { start, end: i, tag: t.to_string() });
        }
        match parsed {
            Some(Bio::Begin(t)) | Some(Bio::Inside(t)) => open = Some((i, t)),
            _ => {}
        }
    }
    if let Some((start, t)) = open {
        out.push(Span { start, end: tags.len(), tag: t.to_string() });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSequence {
    tokens: TokenSequence,
    bio_tags: Vec<String>,
}

impl TaggedSequence {
    pub fn new(tokens: TokenSequence, bio_tags: Vec<String>) -> Result<Self, TaggerError> {
        if tokens.len() != bio_tags.len() {
            return Err(TaggerError::LengthMismatch { tokens: tokens.len(), tags: bio_tags.len() });
        }
        if let Some(index) = first_invalid(&bio_tags) {
            return Err(TaggerError::InvalidBio { index, tag: bio_tags[index].clone() });
        }
        Ok(Self { tokens, bio_tags })
    }

    /// Tokens under the corpus tokenizer, tagged from the document's spans.
    pub fn from_document(doc: &Document) -> Self {
        let tokens = tokenize(&doc.text);
        let spans = doc.spans.as_deref().unwrap_or(&[]);
        let bio_tags = spans_to_bio(tokens.len(), spans);
        Self { tokens, bio_tags }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn tags(&self) -> &[String] {
        &self.bio_tags
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn spans(&self) -> Vec<Span> {
        bio_to_spans(&self.bio_tags)
    }
}

pub fn sequences_from_corpus(corpus: &Corpus) -> Vec<TaggedSequence> {
    corpus.iter().map(TaggedSequence::from_document).collect()
}

fn shape(token: &str) -> String {
    let mut out = String::new();
    let mut last = None;
    for c in token.chars() {
        let s = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_numeric() {
            'd'
        } else {
            c
        };
        if last != Some(s) {
            out.push(s);
            last = Some(s);
        }
    }
    out
}

fn features(tokens: &[String], i: usize, prev_tag: &str) -> [String; 7] {
    let w = &tokens[i];
    let prev = if i == 0 { "<s>" } else { tokens[i - 1].as_str() };
    let next = tokens.get(i + 1).map_or("</s>", String::as_str);
    [
        String::from("bias"),
        format!("w={w}"),
        format!("lw={}", w.to_lowercase()),
        format!("p={prev}"),
        format!("n={next}"),
        format!("pt={prev_tag}"),
        format!("sh={}", shape(w)),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptronTagger {
    /// Tag inventory; `O` first so it wins score ties.
    tags: Vec<String>,
    /// Averaged weight row per feature, one column per tag.
    weights: BTreeMap<String, Vec<f64>>,
    epochs: usize,
}

/// Training state over interned features: `w` is the current weight matrix
/// (feature-major, one column per tag) and `u` accumulates `step · update`,
/// so the average is `w − u / step` without touching every weight each step.
struct Trainer {
    k: usize,
    w: Vec<f64>,
    u: Vec<f64>,
    step: f64,
}

impl Trainer {
    fn scores(&self, feats: &[usize]) -> Vec<f64> {
        let mut scores = vec![0.0; self.k];
        for &f in feats {
            for (s, w) in scores.iter_mut().zip(&self.w[f * self.k..(f + 1) * self.k]) {
                *s += w;
            }
        }
        scores
    }

    fn update(&mut self, feats: &[usize], gold: usize, pred: usize) {
        for &f in feats {
            self.w[f * self.k + gold] += 1.0;
            self.w[f * self.k + pred] -= 1.0;
            self.u[f * self.k + gold] += self.step;
            self.u[f * self.k + pred] -= self.step;
        }
    }
}

struct Interner {
    ids: BTreeMap<String, usize>,
    names: Vec<String>,
}

impl Interner {
    fn id(&mut self, name: String) -> usize {
        if let Some(&i) = self.ids.get(&name) {
            return i;
        }
        let i = self.names.len();
        self.ids.insert(name.clone(), i);
        self.names.push(name);
        i
    }
}

fn scores(weights: &BTreeMap<String, Vec<f64>>, feats: &[String], k: usize) -> Vec<f64> {
    let mut scores = vec![0.0; k];
    for f in feats {
        if let Some(row) = weights.get(f) {
            for (s, w) in scores.iter_mut().zip(row) {
                *s += w;
            }
        }
    }
    scores
}

/// Highest score, earliest index on ties; `skip` excludes one column.
fn argmax(scores: &[f64], skip: Option<usize>) -> usize {
    let mut best: Option<usize> = None;
    for (j, s) in scores.iter().enumerate() {
        if Some(j) == skip {
            continue;
        }
        if best.is_none_or(|b| *s > scores[b]) {
            best = Some(j);
        }
    }
    best.unwrap_or(0)
}

impl PerceptronTagger {
    /// Perceptron training with greedy decoding; the visiting order is
    /// reshuffled each epoch from `seed`.
    pub fn train(data: &[TaggedSequence], epochs: usize, seed: u64) -> Result<Self, TaggerError> {
        let mut types = BTreeSet::new();
        for seq in data {
            for s in seq.spans() {
                types.insert(s.tag);
            }
        }
        if types.is_empty() {
            return Err(TaggerError::NoSpans);
        }
        let mut tags = vec![String::from(OUTSIDE)];
        for t in &types {
            tags.push(format!("B-{t}"));
            tags.push(format!("I-{t}"));
        }
        let index: BTreeMap<&str, usize> = tags.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let gold_ids: Vec<Vec<usize>> =
            data.iter().map(|s| s.bio_tags.iter().map(|t| index[t.as_str()]).collect()).collect();

        let mut interner = Interner { ids: BTreeMap::new(), names: Vec::new() };
        // every feature except the previous tag is fixed per token
        let static_feats: Vec<Vec<[usize; 6]>> = data
            .iter()
            .map(|seq| {
                (0..seq.tokens.len())
                    .map(|i| {
                        let [a, b, c, d, e, _, g] = features(&seq.tokens, i, "");
                        [a, b, c, d, e, g].map(|f| interner.id(f))
                    })
                    .collect()
            })
            .collect();
        let prev_feats: Vec<usize> = tags.iter().map(|t| interner.id(format!("pt={t}"))).collect();

        let k = tags.len();
        let n = interner.names.len();
        let mut trainer = Trainer { k, w: vec![0.0; n * k], u: vec![0.0; n * k], step: 1.0 };
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut rng = rng_from_seed(seed);
        for _ in 0..epochs {
            shuffle(&mut rng, &mut order);
            for &d in &order {
                let mut prev = 0;
                for (i, fixed) in static_feats[d].iter().enumerate() {
                    let mut feats = [0usize; 7];
                    feats[..6].copy_from_slice(fixed);
                    feats[6] = prev_feats[prev];
                    let scores = trainer.scores(&feats);
                    let pred = argmax(&scores, None);
                    let gold = gold_ids[d][i];
                    // a tie with the gold tag counts as a mistake, so correct
                    // guesses made by the tie rule still leave evidence behind
                    let rival = argmax(&scores, Some(gold));
                    if scores[gold] <= scores[rival] {
                        trainer.update(&feats, gold, rival);
                    }
                    trainer.step += 1.0;
                    prev = pred;
                }
            }
        }
        let mut weights = BTreeMap::new();
        for (f, name) in interner.names.into_iter().enumerate() {
            let row = f * k..(f + 1) * k;
            let avg: Vec<f64> =
                trainer.w[row.clone()].iter().zip(&trainer.u[row]).map(|(w, u)| w - u / trainer.step).collect();
            if avg.iter().any(|v| *v != 0.0) {
                weights.insert(name, avg);
            }
        }
        Ok(PerceptronTagger { tags, weights, epochs })
    }

    pub fn train_corpus(corpus: &Corpus, epochs: usize, seed: u64) -> Result<Self, TaggerError> {
        Self::train(&sequences_from_corpus(corpus), epochs, seed)
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn weights(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.weights
    }

    pub fn weight(&self, feature: &str, tag: &str) -> f64 {
        let Some(j) = self.tags.iter().position(|t| t == tag) else { return 0.0 };
        self.weights.get(feature).map_or(0.0, |row| row[j])
    }

    /// Greedy left-to-right decoding followed by BIO repair.
    pub fn tag(&self, tokens: &[String]) -> TaggedSequence {
        let mut out = Vec::with_capacity(tokens.len());
        let k = self.tags.len();
        for i in 0..tokens.len() {
            let prev = out.last().map_or(OUTSIDE, |t: &String| t.as_str());
            let best = argmax(&scores(&self.weights, &features(tokens, i, prev), k), None);
            out.push(self.tags[best].clone());
        }
        repair_bio(&mut out);
        TaggedSequence { tokens: tokens.to_vec(), bio_tags: out }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Micro-averaged exact-match span scores. A predicted span is correct only
/// when start, end and type all match a gold span. With no spans on either
/// side the result is (1, 1, 1); with none on one side the empty side's ratio is 0.
pub fn span_f1(pred: &[TaggedSequence], gold: &[TaggedSequence]) -> Result<SpanScores, TaggerError> {
    if pred.len() != gold.len() {
        return Err(TaggerError::AlignmentMismatch(format!(
            "{} predicted sequences, {} gold",
            pred.len(),
            gold.len()
        )));
    }
    let (mut hit, mut n_pred, mut n_gold) = (0usize, 0usize, 0usize);
    for (i, (p, g)) in pred.iter().zip(gold).enumerate() {
        if p.len() != g.len() {
            return Err(TaggerError::AlignmentMismatch(format!(
                "sequence {i} has {} predicted tags and {} gold",
                p.len(),
                g.len()
            )));
        }
        let ps = p.spans();
        let gs: BTreeSet<Span> = g.spans().into_iter().collect();
        n_pred += ps.len();
        n_gold += gs.len();
        hit += ps.iter().filter(|s| gs.contains(*s)).count();
    }
    if n_pred == 0 && n_gold == 0 {
        return Ok(SpanScores { precision: 1.0, recall: 1.0, f1: 1.0 });
    }
    let precision = if n_pred == 0 { 0.0 } else { hit as f64 / n_pred as f64 };
    let recall = if n_gold == 0 { 0.0 } else { hit as f64 / n_gold as f64 };
    let f1 = if hit == 0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(SpanScores { precision, recall, f1 })
}
