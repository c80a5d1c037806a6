//! Classification metrics and a one-feature logistic regression.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::LinearError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging<'a, T> {
    /// Scores for one positive class.
    Binary(&'a T),
    /// Unweighted mean over every class seen in `golds` or `preds`.
    Macro,
}

fn check_lengths(a: usize, b: usize) -> Result<(), LinearError> {
    if a != b {
        return Err(LinearError::LengthMismatch { left: a, right: b });
    }
    if a == 0 {
        return Err(LinearError::EmptyInput);
    }
    Ok(())
}

pub fn accuracy<T: PartialEq>(preds: &[T], golds: &[T]) -> Result<f64, LinearError> {
    check_lengths(preds.len(), golds.len())?;
    let hits = preds.iter().zip(golds).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / preds.len() as f64)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn class_prf<T: PartialEq>(preds: &[T], golds: &[T], class: &T) -> Prf {
    let tp = preds.iter().zip(golds).filter(|(p, g)| *p == class && *g == class).count();
    let predicted = preds.iter().filter(|p| *p == class).count();
    let actual = golds.iter().filter(|g| *g == class).count();
    let precision = ratio(tp, predicted);
    let recall = ratio(tp, actual);
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    Prf { precision, recall, f1 }
}

/// Precision, recall and F1. Undefined ratios (no predictions, no golds) count as 0.
pub fn precision_recall_f1<T: Ord>(preds: &[T], golds: &[T], averaging: Averaging<'_, T>) -> Result<Prf, LinearError> {
    check_lengths(preds.len(), golds.len())?;
    Ok(match averaging {
        Averaging::Binary(pos) => class_prf(preds, golds, pos),
        Averaging::Macro => {
            let classes: BTreeSet<&T> = preds.iter().chain(golds).collect();
            let k = classes.len() as f64;
            let mut acc = Prf { precision: 0.0, recall: 0.0, f1: 0.0 };
            for c in classes {
                let m = class_prf(preds, golds, c);
                acc.precision += m.precision / k;
                acc.recall += m.recall / k;
                acc.f1 += m.f1 / k;
            }
            acc
        }
    })
}

/// Area under the ROC curve, `P(s⁺ > s⁻) + ½ P(s⁺ = s⁻)`, via mid-ranks.
pub fn auc(scores: &[(f64, bool)]) -> Result<f64, LinearError> {
    if scores.iter().any(|s| s.0.is_nan()) {
        return Err(LinearError::NonFinite);
    }
    let n_pos = scores.iter().filter(|s| s.1).count();
    let n_neg = scores.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(LinearError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].0.total_cmp(&scores[b].0));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]].0 == scores[order[i]].0 {
            j += 1;
        }
        // ranks are 1-based; ties share the mean rank
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if scores[k].1 {
                rank_sum_pos += mid;
            }
        }
        i = j + 1;
    }
    let np = n_pos as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnivariateFit {
    pub coef: f64,
    pub intercept: f64,
    /// In-sample AUC of the fitted scores.
    pub auc: f64,
}

impl UnivariateFit {
    pub fn predict_proba(&self, x: f64) -> f64 {
        let s = self.coef * x + self.intercept;
        1.0 / (1.0 + libm::exp(-s))
    }
}

/// Ridge penalty on the standardized slope; keeps separable data finite.
const UNIVARIATE_RIDGE: f64 = 1e-6;

/// `P(y = 1 | x) = σ(coef·x + intercept)` by damped Newton iterations on
/// standardized `x`.
pub fn fit_univariate_logistic(x: &[f64], y: &[bool]) -> Result<UnivariateFit, LinearError> {
    check_lengths(x.len(), y.len())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LinearError::NonFinite);
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos < 2 || y.len() - pos < 2 {
        return Err(LinearError::SingleClass);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = if var > 0.0 { libm::sqrt(var) } else { 1.0 };
    let z: Vec<f64> = x.iter().map(|v| (v - mean) / sd).collect();
    let loss = |a: f64, b: f64| -> f64 {
        let data: f64 = z
            .iter()
            .zip(y)
            .map(|(&zi, &yi)| {
                let s = a * zi + b;
                let sp = if s > 0.0 { s + libm::log1p(libm::exp(-s)) } else { libm::log1p(libm::exp(s)) };
                sp - if yi { s } else { 0.0 }
            })
            .sum();
        data / n + 0.5 * UNIVARIATE_RIDGE * a * a
    };
    let mut a = 0.0;
    let mut b = libm::log(pos as f64 / (n - pos as f64));
    let mut current = loss(a, b);
    for _ in 0..200 {
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&zi, &yi) in z.iter().zip(y) {
            let p = 1.0 / (1.0 + libm::exp(-(a * zi + b)));
            let r = p - if yi { 1.0 } else { 0.0 };
            let w = p * (1.0 - p);
            ga += r * zi;
            gb += r;
            haa += w * zi * zi;
            hab += w * zi;
            hbb += w;
        }
        ga = ga / n + UNIVARIATE_RIDGE * a;
        gb /= n;
        haa = haa / n + UNIVARIATE_RIDGE;
        hab /= n;
        hbb = hbb / n + 1e-12;
        let det = haa * hbb - hab * hab;
        if !(det > 0.0) || (ga.abs() < 1e-12 && gb.abs() < 1e-12) {
            break;
        }
        let da = (hbb * ga - hab * gb) / det;
        let db = (haa * gb - hab * ga) / det;
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let cand = loss(a - t * da, b - t * db);
            if cand <= current {
                a -= t * da;
                b -= t * db;
                improved = cand < current;
                current = cand;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let coef = a / sd;
    let intercept = b - a * mean / sd;
    if !(coef.is_finite() && intercept.is_finite()) {
        return Err(LinearError::NonFinite);
    }
    let fitted: Vec<(f64, bool)> = x.iter().zip(y).map(|(&v, &l)| (coef * v, l)).collect();
    Ok(UnivariateFit { coef, intercept, auc: auc(&fitted)? })
}
