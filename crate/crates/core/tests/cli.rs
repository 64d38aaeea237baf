use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

use intertrain::ranking::{self, QualityKind};

const SCORES: &str = "model,target,seed,score
m1,t1,0,72.0
m1,t1,1,74.0
m1,t2,0,61.0
m1,t2,1,61.0
m2,t1,0,70.0
m2,t1,1,70.0
m2,t2,0,63.0
m2,t2,1,63.0
m3,t1,0,69.0
m3,t1,1,69.0
m3,t2,0,59.0
m3,t2,1,59.0
";

const BASELINES: &str = "target,seed,score
t1,0,70.0
t1,1,70.0
t2,0,60.0
t2,1,60.0
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_intertrain"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["intertrain"];
    full.extend_from_slice(args);
    intertrain::cli::run(full)
}

fn as_fraction(csv: &str) -> String {
    csv.lines()
        .enumerate()
        .map(|(i, line)| match line.rsplit_once(',') {
            Some((head, score)) if i > 0 => format!("{head},{}\n", score.parse::<f64>().unwrap() / 100.0),
            _ => format!("{line}\n"),
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let scores = write(dir.path(), "s.csv", SCORES);
    let baselines = write(dir.path(), "b.csv", BASELINES);
    let out = dir.path().join("v.json");
    assert_eq!(run(&["validate", "--gains", s(&scores), "--baselines", s(&baselines), "--out", s(&out)]), 0);
    assert_eq!(read_json(&out)["sections"]["validation"]["result"]["violations"], Value::Array(vec![]));

    let partial = write(dir.path(), "b2.csv", "target,seed,score\nt1,0,70.0\nt1,1,70.0\n");
    assert_eq!(run(&["validate", "--gains", s(&scores), "--baselines", s(&partial), "--out", s(&out)]), 2);
    let violations = read_json(&out)["sections"]["validation"]["result"]["violations"].clone();
    assert_eq!(violations.as_array().unwrap().len(), 1);
    assert!(violations.to_string().contains("t2"));

    let over = write(dir.path(), "s2.csv", &SCORES.replace("72.0", "105.0"));
    assert_eq!(run(&["validate", "--gains", s(&over), "--baselines", s(&baselines), "--out", s(&out)]), 2);

    let frac_scores = write(dir.path(), "fs.csv", &as_fraction(SCORES));
    let frac_base = write(dir.path(), "fb.csv", &as_fraction(BASELINES));
    assert_eq!(run(&["gains", "--gains", s(&frac_scores), "--baselines", s(&frac_base), "--out", s(&out)]), 2);
    let code = run(&[
        "gains", "--gains", s(&frac_scores), "--baselines", s(&frac_base), "--scale", "fraction", "--out", s(&out),
    ]);
    assert_eq!(code, 0);

    let missing = dir.path().join("nope.csv");
    assert_eq!(run(&["gains", "--gains", s(&missing), "--baselines", s(&baselines), "--out", s(&out)]), 1);
    let garbled = write(dir.path(), "bad.csv", "model,target,seed,score\nm1,t1,zero,abc\n");
    assert_eq!(run(&["gains", "--gains", s(&garbled), "--baselines", s(&baselines), "--out", s(&out)]), 1);
}

#[test]
fn gains_report_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let scores = write(dir.path(), "s.csv", SCORES);
    let baselines = write(dir.path(), "b.csv", BASELINES);
    let out_dir = dir.path().join("out");
    let code = run(&[
        "gains", "--gains", s(&scores), "--baselines", s(&baselines), "--out-dir", s(&out_dir), "--plots", "--markdown",
    ]);
    assert_eq!(code, 0);
    let report = read_json(&out_dir.join("gains.json"));
    assert_eq!(report["tool"], "intertrain");
    assert_eq!(report["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(report["sections"]["gains"]["operation"], "compute_gains");
    let max_gain = &report["sections"]["gains"]["result"]["max_gain"];
    assert_eq!(max_gain[0].as_f64().unwrap(), 3.0);
    assert_eq!(max_gain[1].as_f64().unwrap(), 3.0);
    assert!(out_dir.join("gains.md").exists());
    let svg = fs::read_to_string(out_dir.join("heatmap.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("cell")).count(), 6);
}

#[test]
fn env_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let scores = write(dir.path(), "s.csv", SCORES);
    let baselines = write(dir.path(), "b.csv", BASELINES);
    let status = bin()
        .args(["gains", "--gains", s(&scores), "--baselines", s(&baselines)])
        .env("INTERTRAIN_OUT_DIR", dir.path())
        .env("INTERTRAIN_SEED", "41")
        .env("INTERTRAIN_RULE", "sem")
        .status()
        .unwrap();
    assert!(status.success());
    let report = read_json(&dir.path().join("gains.json"));
    assert_eq!(report["settings"]["global"]["seed"], 41);
    assert_eq!(report["settings"]["command"]["gains"]["rule"], "sem");

    let status = bin()
        .args(["gains", "--gains", s(&scores), "--baselines", s(&baselines), "--seed", "5"])
        .env("INTERTRAIN_OUT_DIR", dir.path())
        .env("INTERTRAIN_SEED", "41")
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read_json(&dir.path().join("gains.json"))["settings"]["global"]["seed"], 5);
}

#[test]
fn usage_errors() {
    let out = bin().args(["gains"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["regress", "--help"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("INTERTRAIN_MAX_ITERS"));
}

#[test]
fn recommend_matches_ranking_and_predictor() {
    let dir = tempfile::tempdir().unwrap();
    let lp_text = "model,value\na,10.0\nb,30.0\nc,-4.0\nd,22.5\ne,30.0\n";
    let lp = write(dir.path(), "lp.csv", lp_text);
    let out = dir.path().join("r.json");
    assert_eq!(run(&["recommend", "--lp", s(&lp), "--k", "3", "--out", s(&out)]), 0);
    let shortlist = read_json(&out)["sections"]["recommend"]["result"].clone();
    let shortlist = shortlist.as_array().unwrap();
    assert_eq!(shortlist.len(), 3);

    let pairs = intertrain::ingest::parse_quality_csv("lp", lp_text.as_bytes()).unwrap();
    let scores = ranking::quality_scores(&pairs, QualityKind::LpProbe);
    let order = ranking::rank_models(&scores).unwrap();
    for (k, item) in shortlist.iter().enumerate() {
        let id = &order[k];
        let value = pairs.iter().find(|(m, _)| m == id).unwrap().1;
        assert_eq!(item["model_id"], id.as_str());
        assert_eq!(item["rank"], k + 1);
        assert_eq!(item["predicted_avg_gain"].as_f64().unwrap(), ranking::predict_avg_gain(value));
    }
    assert_eq!(shortlist[0]["model_id"], "b");
    assert_eq!(shortlist[1]["model_id"], "e");
}

#[test]
fn synth_round_trip_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    assert_eq!(
        run(&[
            "synth", "--models", "6", "--targets", "6", "--seeds", "3", "--shared-ids", "--groups", "2", "--seed", "3",
            "--out", s(&scores),
        ]),
        0
    );
    let baselines = dir.path().join("baselines.csv");
    let metadata = dir.path().join("metadata.csv");
    assert!(baselines.exists() && metadata.exists());

    let out = dir.path().join("a.json");
    let args = [
        "analyze", "--all", "--gains", s(&scores), "--baselines", s(&baselines), "--metadata", s(&metadata),
        "--perms", "200", "--max-iters", "2000", "--shuffles", "3", "--out", s(&out),
    ];
    assert_eq!(run(&args), 0);
    let first = fs::read(&out).unwrap();
    let report: Value = serde_json::from_slice(&first).unwrap();
    for name in ["gains", "decomposition", "ranking", "sensitivity", "symmetry", "groups"] {
        assert!(report["sections"].get(name).is_some(), "missing {name}");
    }
    assert!(report["skipped"].get("lp_predictor").is_some());
    assert_eq!(run(&args), 0);
    assert_eq!(fs::read(&out).unwrap(), first);

    let out2 = dir.path().join("g.json");
    assert_eq!(run(&["analyze", "--sections", "gains,symmetry", "--gains", s(&scores), "--baselines", s(&baselines), "--out", s(&out2)]), 0);
    let report = read_json(&out2);
    assert_eq!(report["sections"].as_object().unwrap().len(), 2);
}

#[test]
fn xcorr_with_itself() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    assert_eq!(run(&["synth", "--models", "5", "--targets", "5", "--seeds", "2", "--out", s(&scores)]), 0);
    let baselines = dir.path().join("baselines.csv");
    let out = dir.path().join("x.json");
    let code = run(&[
        "xcorr", "--gains", s(&scores), "--baselines", s(&baselines), "--other", s(&scores), "--other-baselines",
        s(&baselines), "--quantity", "model-mean", "--perms", "100", "--out", s(&out),
    ]);
    assert_eq!(code, 0);
    let r = read_json(&out)["sections"]["xcorr"]["result"]["result"]["coefficient"].as_f64().unwrap();
    assert!((r - 1.0).abs() < 1e-12);
}
