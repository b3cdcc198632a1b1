//! Hermetic fixture verification.
//!
//! Each fixture directory holds `input/`, `expected/`, and an `ORACLE.md`
//! describing the independent script that produced the expected outputs
//! (direct formula, exhaustive enumeration, or a step-by-step simulation).
//! `verify_all` replays production code over every fixture and diffs the
//! results against the committed expectations, with numeric comparisons at a
//! per-fixture absolute tolerance (default 1e-9).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::align::{self, AlignmentParams};
use crate::corpus::{load_corpus, CorpusFormat, StyleLabel};
use crate::distill::distill_article_with_trace;
use crate::embed::EmbeddingProvider;
use crate::metrics::{evaluate, load_eval_records, render_report_table};
use crate::scenegraph::{profile_from_entities, EntityProfile};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct FixtureResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureReport {
    pub results: Vec<FixtureResult>,
}

impl FixtureReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

type Runner = fn(&Path) -> std::result::Result<(), String>;

const RUNNERS: &[(&str, Runner)] = &[
    ("corpus_dup_id", run_corpus_dup_id),
    ("sas_pairwise", run_sas_pairwise),
    ("knapsack_n15", run_knapsack_n15),
    ("gm_table", run_gm_table),
    ("mine_5x5", run_mine_5x5),
    ("stats_50", run_stats_50),
    ("distill_6", run_distill_6),
    ("eval_20", run_eval_20),
    ("eval_gm_reference", run_eval_gm_reference),
];

/// Run every known fixture under `dir`. Deterministic and hermetic: no
/// network, no randomness beyond committed inputs.
pub fn verify_all(dir: &Path) -> Result<FixtureReport> {
    let mut results = Vec::new();
    for (name, runner) in RUNNERS {
        let fixture_dir = dir.join(name);
        if !fixture_dir.is_dir() {
            return Err(Error::InvalidInput(format!(
                "fixture {name} missing under {}",
                dir.display()
            )));
        }
        let outcome = runner(&fixture_dir);
        results.push(FixtureResult {
            name: name.to_string(),
            passed: outcome.is_ok(),
            detail: outcome.err().unwrap_or_else(|| "ok".into()),
        });
    }
    Ok(FixtureReport { results })
}

fn read_jsonl(path: &Path) -> std::result::Result<Vec<Value>, String> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| format!("{}: {e}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("{}: {e}", path.display()))?);
    }
    Ok(out)
}

fn read_json(path: &Path) -> std::result::Result<Value, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Recursive comparison with an absolute tolerance on numbers.
fn json_close(got: &Value, want: &Value, tol: f64, path: &str) -> std::result::Result<(), String> {
    match (got, want) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            if (a - b).abs() > tol {
                return Err(format!("{path}: {a} vs {b} (tol {tol})"));
            }
            Ok(())
        }
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                return Err(format!("{path}: length {} vs {}", a.len(), b.len()));
            }
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                json_close(x, y, tol, &format!("{path}[{i}]"))?;
            }
            Ok(())
        }
        (Value::Object(a), Value::Object(b)) => {
            for (key, wanted) in b {
                let inner = a
                    .get(key)
                    .ok_or_else(|| format!("{path}.{key}: missing in output"))?;
                json_close(inner, wanted, tol, &format!("{path}.{key}"))?;
            }
            Ok(())
        }
        _ => {
            if got == want {
                Ok(())
            } else {
                Err(format!("{path}: {got} vs {want}"))
            }
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn run_corpus_dup_id(dir: &Path) -> std::result::Result<(), String> {
    let expected = std::fs::read_to_string(dir.join("expected/error.txt"))
        .map_err(|e| e.to_string())?;
    let err = load_corpus(
        &dir.join("input/corpus.tsv"),
        &StyleLabel::new("x"),
        CorpusFormat::Tsv,
    )
    .err()
    .ok_or("load unexpectedly succeeded")?;
    if err.to_string() != expected.trim() {
        return Err(format!("error {:?} != expected {:?}", err.to_string(), expected.trim()));
    }
    Ok(())
}

#[derive(Deserialize)]
struct SasCase {
    src_entities: Vec<String>,
    tgt_entities: Vec<String>,
    tgt_len: usize,
    beta: f64,
    norm_mode: String,
}

fn run_sas_pairwise(dir: &Path) -> std::result::Result<(), String> {
    let cases = read_jsonl(&dir.join("input/cases.jsonl"))?;
    let expected = read_jsonl(&dir.join("expected/expected.jsonl"))?;
    if cases.len() != expected.len() {
        return Err("case/expected count mismatch".into());
    }
    for (i, (case, want)) in cases.iter().zip(&expected).enumerate() {
        let case: SasCase =
            serde_json::from_value(case.clone()).map_err(|e| format!("case {i}: {e}"))?;
        let params = AlignmentParams {
            beta: case.beta,
            norm_mode: case.norm_mode.parse().map_err(|e: Error| e.to_string())?,
            ..AlignmentParams::default()
        };
        let got = align::sas(
            &profile_from_entities("s", &case.src_entities),
            &profile_from_entities("t", &case.tgt_entities),
            case.tgt_len,
            &params,
        );
        json_close(&to_value(&got), want, 1e-12, &format!("case {i}"))?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct KnapsackCase {
    values: Vec<u64>,
    weights: Vec<u64>,
    budget: u64,
}

fn run_knapsack_n15(dir: &Path) -> std::result::Result<(), String> {
    let cases = read_jsonl(&dir.join("input/instances.jsonl"))?;
    let expected = read_jsonl(&dir.join("expected/expected.jsonl"))?;
    if cases.len() != expected.len() {
        return Err("case/expected count mismatch".into());
    }
    for (i, (case, want)) in cases.iter().zip(&expected).enumerate() {
        let case: KnapsackCase =
            serde_json::from_value(case.clone()).map_err(|e| format!("case {i}: {e}"))?;
        let got = crate::distill::knapsack(&case.values, &case.weights, case.budget);
        if got.total_weight > case.budget {
            return Err(format!("case {i}: weight {} over budget", got.total_weight));
        }
        json_close(&to_value(&got), want, 0.0, &format!("case {i}"))?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct GmCase {
    acc: f64,
    bleu: f64,
}

fn run_gm_table(dir: &Path) -> std::result::Result<(), String> {
    let cases = read_jsonl(&dir.join("input/cases.jsonl"))?;
    let expected = read_jsonl(&dir.join("expected/expected.jsonl"))?;
    for (i, (case, want)) in cases.iter().zip(&expected).enumerate() {
        let case: GmCase =
            serde_json::from_value(case.clone()).map_err(|e| format!("case {i}: {e}"))?;
        let got = crate::metrics::gm(case.acc, case.bleu).map_err(|e| e.to_string())?;
        json_close(
            &serde_json::json!({ "gm": got }),
            want,
            1e-12,
            &format!("case {i}"),
        )?;
    }
    Ok(())
}

fn load_profiles_from_corpora(
    corpora: &[&crate::corpus::Corpus],
) -> HashMap<String, EntityProfile> {
    let mut map = HashMap::new();
    for corpus in corpora {
        for s in &corpus.sentences {
            let entities = s.entities.clone().unwrap_or_default();
            map.insert(s.id.clone(), profile_from_entities(&s.id, &entities));
        }
    }
    map
}

fn run_mine_5x5(dir: &Path) -> std::result::Result<(), String> {
    let src = load_corpus(
        &dir.join("input/src.jsonl"),
        &StyleLabel::new("neg"),
        CorpusFormat::JsonLines,
    )
    .map_err(|e| e.to_string())?;
    let tgt = load_corpus(
        &dir.join("input/tgt.jsonl"),
        &StyleLabel::new("pos"),
        CorpusFormat::JsonLines,
    )
    .map_err(|e| e.to_string())?;
    let params: AlignmentParams =
        serde_json::from_value(read_json(&dir.join("input/params.json"))?)
            .map_err(|e| e.to_string())?;
    let provider =
        EmbeddingProvider::from_file(&dir.join("input/embeddings.jsonl")).map_err(|e| e.to_string())?;
    let profiles = load_profiles_from_corpora(&[&src, &tgt]);

    let output = align::mine(&src, &tgt, &profiles, Some(&provider), &params)
        .map_err(|e| e.to_string())?;
    let expected = read_jsonl(&dir.join("expected/groups.jsonl"))?;
    if output.groups.len() != expected.len() {
        return Err(format!(
            "{} groups, expected {}",
            output.groups.len(),
            expected.len()
        ));
    }
    for (i, (group, want)) in output.groups.iter().zip(&expected).enumerate() {
        // Compare the mined structure; params echo the input and are skipped.
        let got = serde_json::json!({
            "source_id": group.source_id,
            "candidates": to_value(&group.candidates),
            "expert_id": group.expert_id,
            "amateur_ids": group.amateur_ids,
        });
        json_close(&got, want, 1e-9, &format!("group {i}"))?;
    }
    let want_dropped = read_json(&dir.join("expected/dropped.json"))?;
    json_close(
        &serde_json::json!({ "dropped_sources": output.dropped_sources }),
        &want_dropped,
        0.0,
        "dropped",
    )?;
    Ok(())
}

fn run_stats_50(dir: &Path) -> std::result::Result<(), String> {
    let src = load_corpus(
        &dir.join("input/src.jsonl"),
        &StyleLabel::new("neg"),
        CorpusFormat::JsonLines,
    )
    .map_err(|e| e.to_string())?;
    let tgt = load_corpus(
        &dir.join("input/tgt.jsonl"),
        &StyleLabel::new("pos"),
        CorpusFormat::JsonLines,
    )
    .map_err(|e| e.to_string())?;
    let groups: Vec<align::ParallelGroup> = read_jsonl(&dir.join("input/groups.jsonl"))?
        .into_iter()
        .map(|v| serde_json::from_value(v).map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, String>>()?;
    let profiles = load_profiles_from_corpora(&[&src, &tgt]);
    let got = align::dataset_stats(&groups, &src, &tgt, &profiles).map_err(|e| e.to_string())?;
    let want = read_json(&dir.join("expected/stats.json"))?;
    json_close(&to_value(&got), &want, 1e-9, "stats")
}

#[derive(Deserialize)]
struct DistillInput {
    title: String,
    sentences: Vec<String>,
    lambda: f64,
}

fn run_distill_6(dir: &Path) -> std::result::Result<(), String> {
    let input: DistillInput =
        serde_json::from_value(read_json(&dir.join("input/article.json"))?)
            .map_err(|e| e.to_string())?;
    let style = StyleLabel::new("article");
    let title = crate::corpus::Sentence::new("title", style.clone(), input.title);
    let article: Vec<crate::corpus::Sentence> = input
        .sentences
        .iter()
        .enumerate()
        .map(|(i, text)| crate::corpus::Sentence::new(format!("s{i}"), style.clone(), text.clone()))
        .collect();
    let (plan, trace) =
        distill_article_with_trace(&title, &article, input.lambda).map_err(|e| e.to_string())?;
    for round in &trace {
        if round.selected_cost_after > plan.budget {
            return Err(format!(
                "round {} spent {} over budget {}",
                round.round, round.selected_cost_after, plan.budget
            ));
        }
    }
    let want_plan = read_json(&dir.join("expected/plan.json"))?;
    json_close(&to_value(&plan), &want_plan, 0.0, "plan")?;
    let want_trace = read_jsonl(&dir.join("expected/trace.jsonl"))?;
    if trace.len() != want_trace.len() {
        return Err(format!("{} rounds, expected {}", trace.len(), want_trace.len()));
    }
    for (i, (round, want)) in trace.iter().zip(&want_trace).enumerate() {
        json_close(&to_value(round), want, 0.0, &format!("round {i}"))?;
    }
    Ok(())
}

fn run_eval_20(dir: &Path) -> std::result::Result<(), String> {
    let records = load_eval_records(&dir.join("input/records.jsonl")).map_err(|e| e.to_string())?;
    let got = evaluate(&records).map_err(|e| e.to_string())?;
    let want = read_json(&dir.join("expected/report.json"))?;
    json_close(&to_value(&got), &want, 1e-9, "report")
}

fn run_eval_gm_reference(dir: &Path) -> std::result::Result<(), String> {
    let records = load_eval_records(&dir.join("input/records.jsonl")).map_err(|e| e.to_string())?;
    let got = evaluate(&records).map_err(|e| e.to_string())?;
    let want = read_json(&dir.join("expected/report.json"))?;
    json_close(&to_value(&got), &want, 1e-9, "report")?;
    // The rendered table must print the row the fixture encodes.
    let table = render_report_table(&got);
    for needle in ["97.0", "34.1", "57.5"] {
        if !table.contains(needle) {
            return Err(format!("table missing {needle}:\n{table}"));
        }
    }
    Ok(())
}

/// Directory of the committed fixtures inside this crate.
pub fn default_fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}
