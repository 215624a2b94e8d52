#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::{Command, Output};

fn onionforge(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onionforge"))
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("spawn onionforge")
}

fn ok(cwd: &Path, args: &[&str]) -> Output {
    let out = onionforge(cwd, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(p: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}

#[test]
fn run_prints_id_and_reuses_on_second_call() {
    let tmp = tempfile::tempdir().unwrap();
    let p = common::write_planted(tmp.path(), "out");
    let cfg = p.config.to_str().unwrap();
    let first = ok(tmp.path(), &["run", "--config", cfg]);
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert!(v["run_id"].as_str().unwrap().contains('-'));
    let campaigns: Vec<serde_json::Value> =
        serde_json::from_slice(&read(tmp.path().join("out/campaigns.json"))).unwrap();
    assert_eq!(campaigns.len(), 3);

    let second = ok(tmp.path(), &["run", "--config", cfg]);
    let err = String::from_utf8_lossy(&second.stderr);
    assert_eq!(err.lines().filter(|l| l.ends_with("reused")).count(), 8, "{err}");
}

#[test]
fn stage_commands_match_run() {
    let tmp = tempfile::tempdir().unwrap();
    let p = common::write_planted(tmp.path(), "out");
    ok(tmp.path(), &["run", "--config", p.config.to_str().unwrap()]);

    let d = tmp.path();
    let steps: [&[&str]; 8] = [
        &[
            "ingest",
            "--root",
            "snapshot",
            "--out",
            "m/corpus.jsonl",
            "--warnings",
            "m/ingest_warnings.jsonl",
        ],
        &["extract", "--corpus", "m/corpus.jsonl", "--out", "m/addresses.jsonl"],
        &[
            "classify",
            "--corpus",
            "m/corpus.jsonl",
            "--ground-truth",
            "ground_truth.jsonl",
            "--out",
            "m/labels.jsonl",
        ],
        &[
            "filter",
            "--labels",
            "m/labels.jsonl",
            "--addresses",
            "m/addresses.jsonl",
            "--annotations",
            "address_annotations.jsonl",
            "--out",
            "m/illicit.jsonl",
            "--removed",
            "m/removed.jsonl",
        ],
        &[
            "fetch-tx",
            "--addresses",
            "m/illicit.jsonl",
            "--fixtures",
            "ledgers",
            "--rate-limit",
            "0",
            "--out",
            "m/ledgers",
        ],
        &[
            "trace",
            "--addresses",
            "m/illicit.jsonl",
            "--fixtures",
            "search",
            "--annotations",
            "trace_annotations.jsonl",
            "--rate-limit",
            "0",
            "--out",
            "m/hits.jsonl",
            "--surface",
            "m/surface.jsonl",
        ],
        &[
            "cluster",
            "--labels",
            "m/labels.jsonl",
            "--illicit",
            "m/illicit.jsonl",
            "--ledgers",
            "m/ledgers",
            "--emails",
            "m/addresses.jsonl",
            "--surface",
            "m/surface.jsonl",
            "--out",
            "m/campaigns.json",
            "--trace",
            "m/phase_trace.json",
            "--graph",
            "m/campaign_graph.json",
            "--report",
            "m/cluster_report.json",
        ],
        &["report", "--dir", "m"],
    ];
    for args in steps {
        let mut a = vec!["--sequential"];
        a.extend_from_slice(args);
        ok(d, &a);
    }
    for f in [
        "corpus.jsonl",
        "addresses.jsonl",
        "labels.jsonl",
        "illicit.jsonl",
        "removed.jsonl",
        "hits.jsonl",
        "surface.jsonl",
        "campaigns.json",
        "phase_trace.json",
        "campaign_graph.json",
        "campaigns.graphml",
        "campaigns.dot",
        "tables/tables.json",
        "tables/categories.csv",
        "tables/campaigns.csv",
    ] {
        assert!(read(d.join("m").join(f)) == read(d.join("out").join(f)), "{f} differs");
    }
}

#[test]
fn sequential_flag_gives_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let p = common::write_planted(tmp.path(), "par");
    ok(tmp.path(), &["run", "--config", p.config.to_str().unwrap()]);
    let text = std::fs::read_to_string(&p.config)
        .unwrap()
        .replace("output_dir = \"par\"", "output_dir = \"seq\"");
    std::fs::write(&p.config, text).unwrap();
    ok(
        tmp.path(),
        &["--sequential", "run", "--config", p.config.to_str().unwrap()],
    );
    let par = common::snapshot_outputs(&tmp.path().join("par"));
    let seq = common::snapshot_outputs(&tmp.path().join("seq"));
    let differing: Vec<&String> = par
        .keys()
        .filter(|k| par.get(*k) != seq.get(*k) && *k != "state.json")
        .collect();
    assert!(differing.is_empty(), "{differing:?}");
}

#[test]
fn bad_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let p = common::write_planted(tmp.path(), "out");
    let text = std::fs::read_to_string(&p.config)
        .unwrap()
        .replace("threshold = 0.5", "threshold = 7");
    std::fs::write(&p.config, text).unwrap();
    let out = onionforge(tmp.path(), &["run", "--config", p.config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("out").exists());

    let out = onionforge(
        tmp.path(),
        &[
            "classify",
            "--corpus",
            "x",
            "--ground-truth",
            "y",
            "--out",
            "z",
            "--threshold",
            "-1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = onionforge(tmp.path(), &["ingest", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stage_failure_exits_3_and_names_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let p = common::write_planted(tmp.path(), "out");
    std::fs::write(tmp.path().join("ground_truth.jsonl"), "not json\n").unwrap();
    let out = onionforge(tmp.path(), &["run", "--config", p.config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("classify"));

    std::fs::create_dir_all(tmp.path().join("empty")).unwrap();
    let out = onionforge(tmp.path(), &["report", "--dir", "empty"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage not run: ingest"));
}
