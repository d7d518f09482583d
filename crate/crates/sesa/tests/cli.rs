//! The command line end to end: generated data through training, evaluation,
//! tagging, neighbours, export and the baseline, plus exit codes.

use std::{
    fs,
    path::{Path, PathBuf},
    process::Command,
};

use sesa::cli::{run, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};

const SMALL_TRAIN: &str = r#"
[train]
d_emb = 8
hidden = 8
batch_size = 4
eval_every = 50
patience = 3
max_iters = 200
seed = 5
"#;

fn sesa(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sesa").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gen(dir: &Path, seed: &str) -> PathBuf {
    let data = dir.join(format!("data{seed}"));
    let (code, _, err) = sesa(&[
        "gen-data", "--out", p(&data), "--seed", seed, "--n-examples", "400", "--n-skills", "12", "--embedding-dim", "8",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    data
}

fn train_small(dir: &Path, data: &Path, name: &str) -> PathBuf {
    let config = dir.join("train.toml");
    fs::write(&config, SMALL_TRAIN).unwrap();
    let out = dir.join(name);
    let (code, stdout, err) = sesa(&[
        "train",
        "--train",
        p(&data.join("train.jsonl")),
        "--valid",
        p(&data.join("valid.jsonl")),
        "--config",
        p(&config),
        "--embeddings",
        p(&data.join("embeddings.txt")),
        "--out",
        p(&out),
        "--threads",
        "2",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.contains("best validation AUC"));
    out
}

fn files_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(sesa(&[]).0, EXIT_USAGE);
    assert_eq!(sesa(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(sesa(&["eval", "--model", "m.json"]).0, EXIT_USAGE);
    assert_eq!(sesa(&["tag", "--model", "m.json"]).0, EXIT_USAGE, "tag needs --text or --file");
    assert_eq!(sesa(&["tag", "--model", "m", "--text", "a", "--file", "b"]).0, EXIT_USAGE);
    assert_eq!(sesa(&["nn", "--model", "m", "--skill", "x", "--k", "many"]).0, EXIT_USAGE);
}

#[test]
fn help_and_version_succeed() {
    let (code, out, _) = sesa(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("[train]"), "long help shows the config defaults");
    assert_eq!(sesa(&["--version"]).0, EXIT_OK);
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let (code, _, err) = sesa(&["tag", "--model", p(&missing), "--text", "x"]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(err.starts_with("error:") && err.contains("missing.json"), "{err}");

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[train]\nhiden = 3\n").unwrap();
    let (code, _, err) = sesa(&["train", "--train", "a", "--valid", "b", "--config", p(&bad), "--out", "o"]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(err.contains("hiden"), "{err}");
}

#[test]
fn the_binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_sesa");
    let status = Command::new(bin).arg("no-such-command").output().unwrap().status;
    assert_eq!(status.code(), Some(EXIT_USAGE));
    let status = Command::new(bin)
        .args(["eval", "--model", "/nonexistent/m.json", "--test", "t", "--report", "r"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(EXIT_RUNTIME));
}

#[test]
fn gen_data_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = files_of(&gen(dir.path(), "21"));
    let b_dir = dir.path().join("again");
    fs::create_dir(&b_dir).unwrap();
    let b = files_of(&gen(&b_dir, "21"));
    assert_eq!(a, b);
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    for expected in ["config.json", "embeddings.txt", "ground_truth.jsonl", "lexicon.json", "test.jsonl", "train.jsonl", "valid.jsonl"] {
        assert!(names.contains(&expected), "{names:?}");
    }
    let c = files_of(&gen(dir.path(), "22"));
    assert_ne!(a, c);
}

#[test]
fn train_eval_tag_nn_export_and_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "3");
    let out = train_small(dir.path(), &data, "run");
    let model = out.join("model.json");
    for f in ["model.json", "history.json", "skills.tsv"] {
        assert!(out.join(f).is_file(), "{f}");
    }

    let report = dir.path().join("report.json");
    let (code, stdout, err) = sesa(&["eval", "--model", p(&model), "--test", p(&data.join("test.jsonl")), "--report", p(&report)]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.starts_with("auc "));
    let r: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    let auc = r["auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
    assert_eq!(r["scorer"], "sesa");
    assert!(r["config_digest"].as_str().unwrap().len() == 64);

    let (code, stdout, _) = sesa(&["tag", "--model", p(&model), "--text", "some job text", "--top-k", "5"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<Vec<&str>> = stdout.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 10);
    let score = |r: &Vec<&str>| r[2].parse::<f64>().unwrap();
    assert!(rows[..5].iter().all(|r| r[0] == "+"));
    assert!(rows[5..].iter().all(|r| r[0] == "-"));
    assert!(rows[..5].windows(2).all(|w| score(&w[0]) >= score(&w[1])));
    assert!(rows[5..].windows(2).all(|w| score(&w[0]) <= score(&w[1])));

    let text_file = dir.path().join("job.txt");
    fs::write(&text_file, "some job text").unwrap();
    let (code, from_file, _) = sesa(&["tag", "--model", p(&model), "--file", p(&text_file), "--top-k", "5"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(from_file, stdout);

    let skill = rows[0][1];
    let (code, stdout, _) = sesa(&["nn", "--model", p(&model), "--skill", skill, "--k", "3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(stdout.lines().count(), 3);
    assert!(stdout.lines().all(|l| l.split('\t').next() != Some(skill)));
    assert_eq!(sesa(&["nn", "--model", p(&model), "--skill", "no such skill"]).0, EXIT_RUNTIME);

    let exported = dir.path().join("skills.txt");
    let (code, _, _) = sesa(&["export-embeddings", "--model", p(&model), "--out", p(&exported)]);
    assert_eq!(code, EXIT_OK);
    let table = sesa::embeddings::read_embeddings(&exported).unwrap();
    assert_eq!(table.dim, Some(8));
    assert_eq!(table.rows.len(), 12);

    let report = dir.path().join("logreg.json");
    let (code, stdout, err) = sesa(&[
        "baseline-logreg",
        "--train",
        p(&data.join("train.jsonl")),
        "--test",
        p(&data.join("test.jsonl")),
        "--report",
        p(&report),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.starts_with("auc "));
    let r: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(r["scorer"], "logreg");
}

#[test]
fn training_twice_gives_identical_model_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "4");
    let a = train_small(dir.path(), &data, "a");
    let b = train_small(dir.path(), &data, "b");
    assert_eq!(fs::read(a.join("model.json")).unwrap(), fs::read(b.join("model.json")).unwrap());
    assert_eq!(fs::read(a.join("skills.tsv")).unwrap(), fs::read(b.join("skills.tsv")).unwrap());
}

#[test]
fn the_seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "6");
    let config = dir.path().join("train.toml");
    fs::write(&config, SMALL_TRAIN).unwrap();
    let (train_file, valid_file) = (data.join("train.jsonl"), data.join("valid.jsonl"));
    let train = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let args = [
            "train",
            "--train",
            p(&train_file),
            "--valid",
            p(&valid_file),
            "--config",
            p(&config),
            "--out",
            p(&out),
            "--seed",
            seed,
        ];
        assert_eq!(sesa(&args).0, EXIT_OK);
        fs::read(out.join("model.json")).unwrap()
    };
    assert_ne!(train("s1", "1"), train("s2", "2"));
}
