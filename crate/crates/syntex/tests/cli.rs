use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use serde_json::{json, Value};
use syntex::cli::main_with;
use syntex::formats::load_nglm;
use syntex::jsonl::{load_jsonl, save_jsonl};
use syntex_core::{Corpus, Document};

fn write_json(path: &Path, v: &Value) -> PathBuf {
    fs::write(path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path.to_path_buf()
}

fn run(args: &[&str]) -> i32 {
    main_with(std::iter::once("syntex").chain(args.iter().copied()))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn toy_corpus(dir: &Path) {
    let c = Corpus::new("toy", vec![Document::real("d0", "a b a b c a b d")]).unwrap();
    save_jsonl(&c, &dir.join("toy.jsonl")).unwrap();
}

#[test]
fn train_lm_matches_hand_counts() {
    let dir = tempfile::tempdir().unwrap();
    toy_corpus(dir.path());
    let cfg = write_json(
        &dir.path().join("run.json"),
        &json!({"seed": 1, "train_lm": {"corpus": "toy.jsonl", "order": 3, "discount": 0.0}}),
    );
    assert_eq!(run(&["train-lm", "--config", cfg.to_str().unwrap()]), 0);
    let path = dir.path().join("out/model.nglm");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("NGLM v1 order=3 discount=0"));
    assert!(text.lines().any(|l| l == "a b\tc\t1"));
    let m = load_nglm(&path).unwrap();
    // "a b" is followed by a, c and d once each.
    for w in ["a", "c", "d"] {
        assert_eq!(m.prob(&["a", "b"], w), 1.0 / 3.0);
    }
    assert_eq!(m.prob(&["a", "b"], "b"), 0.0);
    assert_eq!(m.prob(&["b", "a"], "b"), 1.0);
    assert_eq!(m.prob::<&str>(&[], "a"), 1.0);
    assert_eq!(m.prob(&["b", "d"], "</s>"), 1.0);
}

#[test]
fn missing_input_is_a_config_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(&dir.path().join("run.json"), &json!({"seed": 1, "train_lm": {"corpus": "nope/missing.jsonl"}}));
    assert_eq!(run(&["train-lm", "--config", cfg.to_str().unwrap()]), 2);
    let out = Proc::new(env!("CARGO_BIN_EXE_syntex"))
        .args(["train-lm", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope/missing.jsonl"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["no-such-command"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(&dir.path().join("run.json"), &json!({"train_lm": {"corpus": "x.jsonl"}}));
    // No seed anywhere.
    assert_eq!(run(&["train-lm", "--config", cfg.to_str().unwrap()]), 2);
    let bad = write_json(&dir.path().join("bad.json"), &json!({"seed": 1, "unknown_block": {}}));
    assert_eq!(run(&["train-lm", "--config", bad.to_str().unwrap()]), 2);
    let no_block = write_json(&dir.path().join("nb.json"), &json!({"seed": 1}));
    assert_eq!(run(&["train-lm", "--config", no_block.to_str().unwrap()]), 2);
}

#[test]
fn malformed_corpus_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.jsonl"), "{\"id\":\"x\",\"text\":\"t\",\"provenance\":\"synthetic\"}\n").unwrap();
    let cfg = write_json(&dir.path().join("run.json"), &json!({"seed": 1, "train_lm": {"corpus": "c.jsonl"}}));
    assert_eq!(run(&["train-lm", "--config", cfg.to_str().unwrap()]), 3);
    assert!(!dir.path().join("out/model.nglm").exists());
}

#[test]
fn remote_backend_down_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let cfg = write_json(
        &dir.path().join("run.json"),
        &json!({
            "seed": 3,
            "backend": {"kind": "remote", "url": format!("http://127.0.0.1:{port}"), "retries": 1, "backoff_ms": 1},
            "generate": {"count_per_prompt": 1}
        }),
    );
    assert_eq!(run(&["generate", "--config", cfg.to_str().unwrap()]), 4);
    assert!(!dir.path().join("out/synthetic.jsonl").exists());
}

#[test]
fn manifest_records_inputs_outputs_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    toy_corpus(dir.path());
    let cfg = write_json(&dir.path().join("run.json"), &json!({"seed": 1, "train_lm": {"corpus": "toy.jsonl", "order": 2}}));
    let out = dir.path().join("elsewhere");
    assert_eq!(run(&["train-lm", "--config", cfg.to_str().unwrap(), "--seed", "99", "--out", out.to_str().unwrap()]), 0);
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["tool"], "syntex");
    let r = &m["runs"]["train-lm"];
    assert_eq!(r["seed"], 99);
    assert_eq!(r["config"]["seed"], 99);
    assert_eq!(r["config"]["train_lm"]["order"], 2);
    assert_eq!(r["inputs"][0]["path"], "toy.jsonl");
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(r["outputs"][0]["path"], "model.nglm");
    assert_eq!(r["config_sha256"].as_str().unwrap().len(), 64);

    // A second subcommand merges into the same manifest.
    let cfg2 = write_json(
        &dir.path().join("adapt.json"),
        &json!({"seed": 1, "adapt": {"model": "elsewhere/model.nglm", "corpus": "toy.jsonl", "mix_weight": 0.5}}),
    );
    assert_eq!(run(&["adapt", "--config", cfg2.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let m = read_json(&out.join("manifest.json"));
    assert!(m["runs"]["train-lm"].is_object() && m["runs"]["adapt"].is_object());
}

#[test]
fn tuning_benchmark_picks_the_matched_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    assert_eq!(run(&["bench", "--seed", "5", "--out", root]), 0);
    assert_eq!(run(&["tune", "--config", &format!("{root}/tuning.json")]), 0);
    let r = read_json(&dir.path().join("tuning/tuning_report.json"));
    assert_eq!(r["best"]["temperature"], 1.0);
    assert_eq!(r["results"].as_array().unwrap().len(), 3);
    let heat = fs::read_to_string(dir.path().join("tuning/tuning_heatmap.tsv")).unwrap();
    assert_eq!(heat.lines().count(), 4);
}

#[test]
fn zero_shot_then_curve_composes() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    assert_eq!(run(&["bench", "--seed", "8", "--out", root]), 0);
    let cfg = format!("{root}/pipeline.json");
    for c in ["train-lm", "adapt", "tune", "generate", "zero-shot", "curve"] {
        assert_eq!(run(&[c, "--config", &cfg]), 0, "{c}");
    }
    let p = dir.path().join("pipeline");
    let synth = load_jsonl(&p.join("synthetic.jsonl")).unwrap();
    assert_eq!(synth.len(), 200);
    assert!(synth.iter().all(|d| d.is_synthetic() && d.label.is_some()));
    let z = read_json(&p.join("zero_shot.json"));
    assert!(z["accuracy"].as_f64().unwrap() > 0.8, "{z}");
    let tsv = fs::read_to_string(p.join("curve.tsv")).unwrap();
    assert!(tsv.starts_with("source\tsize\treplicate\tmetric\tvalue\n"));
    let summary = read_json(&p.join("curve_summary.json"));
    assert_eq!(summary["crossover"]["reference_source"], "real");
    assert_eq!(summary["points"].as_array().unwrap().len(), 8);
    let manifest = read_json(&p.join("manifest.json"));
    assert_eq!(manifest["runs"].as_object().unwrap().len(), 6);
}

#[test]
fn tagging_pipeline_scores_spans() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    assert_eq!(run(&["bench", "--seed", "2", "--out", root]), 0);
    let cfg = format!("{root}/tagging.json");
    for c in ["tag", "score-spans"] {
        assert_eq!(run(&[c, "--config", &cfg]), 0, "{c}");
    }
    let s = read_json(&dir.path().join("tagging/span_scores.json"));
    assert!(s["f1"].as_f64().unwrap() > 0.8, "{s}");
    let tagged = load_jsonl(&dir.path().join("tagging/tagged.jsonl")).unwrap();
    assert_eq!(tagged.len(), 300);
}
