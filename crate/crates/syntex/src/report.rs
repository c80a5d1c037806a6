//! Report files: tuning JSON and heatmap, learning-curve TSV and summary,
//! group-score TSV.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use syntex_core::harness::{CurveResult, GroupScoreReport, Metrics};
use syntex_core::linear::UnivariateFit;
use syntex_core::tuner::{GridConfig, TuningReport, AXIS_TEMPERATURE, AXIS_TOP_P};

pub fn tuning_json(report: &TuningReport) -> String {
    let mut v = serde_json::to_value(report).expect("report serializes");
    v["best_description"] = Value::String(report.best.describe());
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

fn push_unique(v: &mut Vec<f64>, x: f64) {
    if !v.iter().any(|y| y.to_bits() == x.to_bits()) {
        v.push(x);
    }
}

/// Mean accuracy with temperature rows and top_p columns. Grids with other
/// axes get one table per combination of the remaining values, each
/// introduced by a `# axis=value, ...` line.
pub fn tuning_heatmap(report: &TuningReport) -> String {
    let mut panels: Vec<(GridConfig, Vec<(Option<f64>, Option<f64>, f64)>)> = Vec::new();
    for r in &report.results {
        let rest = GridConfig(
            r.config.0.iter().filter(|(k, _)| k != AXIS_TEMPERATURE && k != AXIS_TOP_P).cloned().collect(),
        );
        let cell = (r.config.get(AXIS_TEMPERATURE), r.config.get(AXIS_TOP_P), r.mean_accuracy);
        match panels.iter_mut().find(|(k, _)| *k == rest) {
            Some((_, cells)) => cells.push(cell),
            None => panels.push((rest, vec![cell])),
        }
    }
    let mut out = String::new();
    for (rest, cells) in panels {
        if !rest.0.is_empty() {
            out.push_str(&format!("# {}\n", rest.describe()));
        }
        let mut temps = Vec::new();
        let mut ps = Vec::new();
        for (t, p, _) in &cells {
            push_unique(&mut temps, t.unwrap_or(f64::NAN));
            push_unique(&mut ps, p.unwrap_or(f64::NAN));
        }
        out.push_str(AXIS_TEMPERATURE);
        for p in &ps {
            if p.is_nan() {
                out.push_str("\tmean_accuracy");
            } else {
                out.push_str(&format!("\t{AXIS_TOP_P}={p}"));
            }
        }
        out.push('\n');
        for t in &temps {
            out.push_str(&if t.is_nan() { "-".to_string() } else { t.to_string() });
            for p in &ps {
                let hit = cells.iter().find(|(ct, cp, _)| {
                    ct.unwrap_or(f64::NAN).to_bits() == t.to_bits() && cp.unwrap_or(f64::NAN).to_bits() == p.to_bits()
                });
                match hit {
                    Some((_, _, a)) => out.push_str(&format!("\t{a:.4}")),
                    None => out.push_str("\t"),
                }
            }
            out.push('\n');
        }
    }
    out
}

pub const CURVE_HEADER: &str = "source\tsize\treplicate\tmetric\tvalue";

/// One row per (source, size, replicate, metric).
pub fn curve_tsv(curve: &CurveResult) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for p in &curve.points {
        for (r, m) in p.replicates.iter().enumerate() {
            for (k, v) in m {
                out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", p.source, p.size, r, k, v));
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct SummaryPoint<'a> {
    source: &'a str,
    size: usize,
    replicates: usize,
    mean: &'a Metrics,
}

#[derive(Debug, Serialize)]
pub struct Crossover {
    pub reference_source: String,
    pub reference_size: usize,
    /// Smallest size at which each other source reaches the reference; null if none does.
    pub sizes: BTreeMap<String, Option<usize>>,
}

pub fn curve_summary(curve: &CurveResult, crossover: Option<&Crossover>) -> String {
    let points: Vec<SummaryPoint> = curve
        .points
        .iter()
        .map(|p| SummaryPoint { source: &p.source, size: p.size, replicates: p.replicates.len(), mean: &p.mean })
        .collect();
    let v = serde_json::json!({ "metric": curve.metric, "points": points, "crossover": crossover });
    let mut s = serde_json::to_string_pretty(&v).expect("summary serializes");
    s.push('\n');
    s
}

pub const GROUP_HEADER: &str = "group\tmean_score\tmax_score\tcount_above\tn";

pub fn group_tsv(report: &GroupScoreReport) -> String {
    let mut out = format!("{GROUP_HEADER}\n");
    for g in &report.groups {
        out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", g.group, g.mean, g.max, g.count_above, g.n));
    }
    out
}

pub fn group_json(report: &GroupScoreReport, regression: Option<&UnivariateFit>) -> String {
    let v = serde_json::json!({ "report": report, "regression": regression });
    let mut s = serde_json::to_string_pretty(&v).expect("group report serializes");
    s.push('\n');
    s
}

pub fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use syntex_core::tuner::{assemble_report, build_grid, Axes, RunOutcome};

    fn report(axes: Axes) -> TuningReport {
        let grid = build_grid(&axes).unwrap();
        let outcomes = (0..grid.len())
            .map(|i| vec![RunOutcome { accuracy: 0.5 + i as f64 / 100.0, auc: 0.5 }])
            .collect();
        assemble_report(grid, outcomes)
    }

    #[test]
    fn heatmap_layout() {
        let r = report(Axes::new().axis("top_p", [0.9, 0.95]).axis("temperature", [0.5, 1.0, 1.5]));
        let h = tuning_heatmap(&r);
        let lines: Vec<&str> = h.lines().collect();
        assert_eq!(lines[0], "temperature\ttop_p=0.9\ttop_p=0.95");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0.5\t0.5000\t0.5300");
    }

    #[test]
    fn heatmap_panels_per_extra_axis() {
        let r = report(Axes::standard());
        let h = tuning_heatmap(&r);
        assert_eq!(h.lines().filter(|l| l.starts_with('#')).count(), 2);
        assert_eq!(h.lines().filter(|l| l.starts_with("temperature")).count(), 2);
    }

    #[test]
    fn tuning_json_has_required_keys() {
        let v: Value = serde_json::from_str(&tuning_json(&report(Axes::new().axis("temperature", [1.0, 2.0])))).unwrap();
        for k in ["grid", "results", "best"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert!(v["results"][0].get("mean_accuracy").is_some());
        assert!(v["results"][0].get("std_accuracy").is_some());
        assert_eq!(v["best"]["temperature"], 1.0);
    }
}
