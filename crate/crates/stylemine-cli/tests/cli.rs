//! End-to-end subcommand tests against the committed fixtures.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stylemine"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../stylemine/fixtures")
        .canonicalize()
        .unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn mine_writes_groups_pairs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let fix = fixtures().join("mine_5x5/input");
    let groups = dir.path().join("groups.jsonl");
    let pairs = dir.path().join("pairs.jsonl");
    let status = bin()
        .args(["mine", "--strategy", "semb-sas", "--k", "2", "--p", "0.05"])
        .args(["--src".as_ref(), fix.join("src.jsonl").as_os_str()])
        .args(["--tgt".as_ref(), fix.join("tgt.jsonl").as_os_str()])
        .args(["--src-style", "neg", "--tgt-style", "pos"])
        .args(["--provider", "file"])
        .args(["--embeddings".as_ref(), fix.join("embeddings.jsonl").as_os_str()])
        .args(["--out".as_ref(), groups.as_os_str()])
        .args(["--pairs-out".as_ref(), pairs.as_os_str()])
        .status()
        .unwrap();
    assert!(status.success());

    // Mined groups equal the committed oracle expectations (ids and order).
    let got: Vec<serde_json::Value> = read(&groups)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let want: Vec<serde_json::Value> = read(&fixtures().join("mine_5x5/expected/groups.jsonl"))
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g["source_id"], w["source_id"]);
        assert_eq!(g["expert_id"], w["expert_id"]);
        assert_eq!(g["amateur_ids"], w["amateur_ids"]);
    }

    let pair_lines = read(&pairs);
    assert!(pair_lines.lines().next().unwrap().contains("</s><s>"));

    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("groups.jsonl.manifest.json"))).unwrap();
    assert_eq!(manifest["tool"], "stylemine");
    assert_eq!(manifest["command"], "mine");
    assert_eq!(manifest["config"]["k"], 2);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    for input in manifest["inputs"].as_array().unwrap() {
        assert_eq!(input["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn mine_reruns_and_worker_counts_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let fix = fixtures().join("mine_200x200/input");
    let run = |out: &Path, workers: &str| {
        let status = bin()
            .args(["mine", "--strategy", "semb-sas", "--k", "4", "--p", "0.03"])
            .args(["--src".as_ref(), fix.join("src.jsonl").as_os_str()])
            .args(["--tgt".as_ref(), fix.join("tgt.jsonl").as_os_str()])
            .args(["--src-style", "neg", "--tgt-style", "pos"])
            .args(["--provider", "deterministic-test", "--dim", "32"])
            .args(["--workers", workers])
            .args(["--out".as_ref(), out.as_os_str()])
            .status()
            .unwrap();
        assert!(status.success());
    };
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let c = dir.path().join("c.jsonl");
    run(&a, "1");
    run(&b, "8");
    run(&c, "1");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn eval_perfect_copy_scores_bleu_100() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("records.jsonl");
    std::fs::write(
        &input,
        concat!(
            r#"{"source":"rough words here","candidate":"fine words now","references":["fine words now"]}"#,
            "\n",
            r#"{"source":"more rough","candidate":"better prose","references":["better prose","great prose"]}"#,
            "\n",
        ),
    )
    .unwrap();
    let report = dir.path().join("report.json");
    let output = bin()
        .args(["eval", "--table"])
        .args(["--input".as_ref(), input.as_os_str()])
        .args(["--report-out".as_ref(), report.as_os_str()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let table = String::from_utf8(output.stdout).unwrap();
    assert!(table.contains("100.0"), "table was:\n{table}");
    let parsed: serde_json::Value = serde_json::from_str(&read(&report)).unwrap();
    assert_eq!(parsed["bleu_avg"], 1.0);
    assert!(parsed["acc"].is_null());
}

#[test]
fn eval_prints_reference_gm_row() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let output = bin()
        .args(["eval", "--table"])
        .args(["--input".as_ref(), fixtures().join("eval_gm_reference/input/records.jsonl").as_os_str()])
        .args(["--report-out".as_ref(), report.as_os_str()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let table = String::from_utf8(output.stdout).unwrap();
    for value in ["97.0", "34.1", "57.5"] {
        assert!(table.contains(value), "missing {value} in:\n{table}");
    }
}

#[test]
fn parse_then_stats_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.txt");
    std::fs::write(&raw, "the food was very good\nthe staff was kind\n").unwrap();
    let parsed = dir.path().join("parsed.jsonl");
    let status = bin()
        .args(["parse", "--style", "positive", "--format", "plain-lines"])
        .args(["--input".as_ref(), raw.as_os_str()])
        .args(["--output".as_ref(), parsed.as_os_str()])
        .status()
        .unwrap();
    assert!(status.success());
    let first: serde_json::Value =
        serde_json::from_str(read(&parsed).lines().next().unwrap()).unwrap();
    assert_eq!(first["id"], "positive-0");
    assert_eq!(first["entities"], serde_json::json!(["food", "good"]));
    assert_eq!(first["lemmas"][1], "food");

    // rd mining straight off the parsed corpus, then stats over the groups.
    let groups = dir.path().join("groups.jsonl");
    let status = bin()
        .args(["mine", "--strategy", "rd", "--k", "1", "--seed", "5"])
        .args(["--src".as_ref(), parsed.as_os_str()])
        .args(["--tgt".as_ref(), parsed.as_os_str()])
        .args(["--src-style", "positive", "--tgt-style", "positive"])
        .args(["--out".as_ref(), groups.as_os_str()])
        .status()
        .unwrap();
    assert!(status.success());

    let stats = dir.path().join("stats.json");
    let output = bin()
        .args(["stats", "--table"])
        .args(["--groups".as_ref(), groups.as_os_str()])
        .args(["--src".as_ref(), parsed.as_os_str()])
        .args(["--tgt".as_ref(), parsed.as_os_str()])
        .args(["--src-style", "positive", "--tgt-style", "positive"])
        .args(["--out".as_ref(), stats.as_os_str()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let table = String::from_utf8(output.stdout).unwrap();
    assert!(table.contains("# Sent Pairs"), "{table}");
    let parsed_stats: serde_json::Value = serde_json::from_str(&read(&stats)).unwrap();
    assert_eq!(parsed_stats["pair_count"], 2);
}

#[test]
fn distill_command_writes_plans_and_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let articles = dir.path().join("articles.jsonl");
    let fixture: serde_json::Value = serde_json::from_str(&read(
        &fixtures().join("distill_6/input/article.json"),
    ))
    .unwrap();
    std::fs::write(
        &articles,
        format!(
            "{}\n",
            serde_json::json!({
                "article_id": "a1",
                "title": fixture["title"],
                "sentences": fixture["sentences"],
            })
        ),
    )
    .unwrap();
    let plans = dir.path().join("plans.jsonl");
    let corpus = dir.path().join("distilled.jsonl");
    let status = bin()
        .args(["distill", "--style", "liberal", "--lambda", "0.5"])
        .args(["--input".as_ref(), articles.as_os_str()])
        .args(["--plans-out".as_ref(), plans.as_os_str()])
        .args(["--corpus-out".as_ref(), corpus.as_os_str()])
        .status()
        .unwrap();
    assert!(status.success());
    let plan: serde_json::Value = serde_json::from_str(read(&plans).lines().next().unwrap()).unwrap();
    assert_eq!(plan["article_id"], "a1");
    assert_eq!(plan["selected_ids"], serde_json::json!(["a1-s0", "a1-s1"]));
    assert_eq!(plan["rounds"], 2);
    assert_eq!(read(&corpus).lines().count(), 2);
}

#[test]
fn reward_batch_and_stdio_serve() {
    let dir = tempfile::tempdir().unwrap();
    let requests = dir.path().join("requests.jsonl");
    let body = concat!(
        r#"{"req_id":"r1","mode":"j_il","candidate":{"text":"the food was great"},"expert":{"text":"the food was wonderful"},"amateurs":[{"text":"the patio was loud"}]}"#,
        "\n",
        "not json\n",
        r#"{"req_id":"r2","mode":"advantage","sample":{"text":"good food"},"greedy":{"text":"bad day"},"expert":{"text":"great food"},"amateurs":[],"params":{"j_safe":-1.0}}"#,
        "\n"
    );
    std::fs::write(&requests, body).unwrap();
    let out = dir.path().join("responses.jsonl");
    let status = bin()
        .args(["reward", "--task", "formality"])
        .args(["--requests".as_ref(), requests.as_os_str()])
        .args(["--output".as_ref(), out.as_os_str()])
        .status()
        .unwrap();
    assert!(status.success());
    let lines: Vec<serde_json::Value> = read(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["req_id"], "r1");
    assert_eq!(lines[1]["error"], "parse");
    assert!(lines[2]["breakdown"]["advantage"].is_number());

    // Same protocol over stdio: write requests, close stdin, read responses.
    let mut child = bin()
        .args(["serve", "--transport", "stdio"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(body.as_bytes())
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert!(output.status.success());
    assert_eq!(String::from_utf8(output.stdout).unwrap().lines().count(), 3);
}

#[test]
fn exit_codes_distinguish_validation() {
    // Unknown flag -> 1.
    let status = bin().args(["mine", "--no-such-flag"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));

    // Missing input file -> 1, message names the path.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.jsonl");
    let output = bin()
        .args(["eval"])
        .args(["--input", "/nonexistent/records.jsonl"])
        .args(["--report-out".as_ref(), out.as_os_str()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("/nonexistent/records.jsonl"));

    // Preset conflict -> 1.
    let output = bin()
        .args(["eval", "--task", "sentiment", "--alpha", "0.9"])
        .args(["--input", "/tmp/whatever.jsonl", "--report-out", "/tmp/out.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("task preset"));
}

#[test]
fn task_presets_bind_reward_constants() {
    let dir = tempfile::tempdir().unwrap();
    let requests = dir.path().join("requests.jsonl");
    // Identical expert and sole amateur: j_il collapses to delta, and the
    // skip decision depends only on the preset's j_safe.
    std::fs::write(
        &requests,
        concat!(
            r#"{"req_id":"p","mode":"advantage","sample":{"text":"alpha beta"},"greedy":{"text":"alpha beta"},"expert":{"text":"gamma delta"},"amateurs":[{"text":"gamma delta"}]}"#,
            "\n"
        ),
    )
    .unwrap();
    let run = |task: &str, delta: &str, out: &Path| {
        let status = bin()
            .args(["reward", "--task", task, "--delta", delta])
            .args(["--requests".as_ref(), requests.as_os_str()])
            .args(["--output".as_ref(), out.as_os_str()])
            .status()
            .unwrap();
        assert!(status.success());
        serde_json::from_str::<serde_json::Value>(read(out).lines().next().unwrap()).unwrap()
    };
    // greedy j_il = delta = 0.7: sentiment preset (j_safe 0.8) skips,
    // political preset (j_safe 0.4) does not.
    let sentiment = run("sentiment", "0.7", &dir.path().join("s.jsonl"));
    assert_eq!(sentiment["breakdown"]["skipped"], true);
    let political = run("political", "0.7", &dir.path().join("p.jsonl"));
    assert_eq!(political["breakdown"]["skipped"], false);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "strategy": "rd",
            "k": 3,
            "seed": 11,
            "embedding": {"provider": "deterministic-test", "dim": 16}
        })
        .to_string(),
    )
    .unwrap();
    let fix = fixtures().join("mine_5x5/input");
    let out = dir.path().join("groups.jsonl");
    // Flag overrides k from the file; strategy/seed come from the file.
    let status = bin()
        .args(["mine", "--k", "2"])
        .args(["--config".as_ref(), config.as_os_str()])
        .args(["--src".as_ref(), fix.join("src.jsonl").as_os_str()])
        .args(["--tgt".as_ref(), fix.join("tgt.jsonl").as_os_str()])
        .args(["--src-style", "neg", "--tgt-style", "pos"])
        .args(["--out".as_ref(), out.as_os_str()])
        .status()
        .unwrap();
    assert!(status.success());
    let group: serde_json::Value = serde_json::from_str(read(&out).lines().next().unwrap()).unwrap();
    assert_eq!(group["params"]["strategy"], "rd");
    assert_eq!(group["params"]["k"], 2);
    assert_eq!(group["params"]["seed"], 11);
}
