use std::fs;
use std::path::Path;
use std::process::Command;

const TINY: &[&str] = &[
    "--set", "synth.nodes=40",
    "--set", "synth.cascades=20",
    "--set", "synth.seed=3",
];

const SMALL_MODEL: &[&str] = &[
    "--set", "model.layers=2",
    "--set", "model.embed_dim=4",
    "--set", "model.hidden_c=6",
    "--set", "model.hidden_p=5",
    "--set", "train.max_epochs=2",
    "--set", "train.batch_size=8",
];

fn casper(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_casper")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn synth(dir: &Path) {
    let mut args = vec!["synth", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(TINY);
    let (code, _, err) = casper(&args);
    assert_eq!(code, 0, "{err}");
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn synth_is_byte_identical_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    synth(&a);
    synth(&b);
    let (fa, fb) = (read_dir_sorted(&a), read_dir_sorted(&b));
    assert_eq!(fa.len(), 6);
    assert_eq!(fa, fb);
}

#[test]
fn train_echoes_hyperparameters_then_eval_reads_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let run = tmp.path().join("run");
    let mut args = vec!["train", "--data", data.to_str().unwrap(), "--out", run.to_str().unwrap()];
    args.extend_from_slice(SMALL_MODEL);
    args.extend_from_slice(&["--set", "train.lambda=10.0", "--set", "train.learning_rate=0.0005", "--set", "model.layers=3"]);
    let (code, _, err) = casper(&args);
    assert_eq!(code, 0, "{err}");
    let report = fs::read_to_string(run.join("report.txt")).unwrap();
    for line in ["train.lambda=10", "train.learning_rate=0.0005", "model.layers=3"] {
        assert!(report.lines().any(|l| l == line), "{line} missing from\n{report}");
    }
    assert!(report.contains("test.cascade.rmrse="));
    let history = fs::read_to_string(run.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 3);

    let ckpt = run.join("checkpoint");
    let (code, out, err) = casper(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--data", data.to_str().unwrap(), "--split", "val"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("val.personality.mape="), "{out}");
}

#[test]
fn sweep_writes_rows_and_means() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let out = tmp.path().join("sweep");
    let mut args = vec![
        "sweep", "--data", data.to_str().unwrap(), "--out", out.to_str().unwrap(), "--lambdas", "0,1", "--seeds", "5",
    ];
    args.extend_from_slice(SMALL_MODEL);
    let (code, _, err) = casper(&args);
    assert_eq!(code, 0, "{err}");
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 1 + 2 + 2, "{summary}");
    assert!(lines[1].starts_with("0,5,") && lines[2].starts_with("1,5,"));
    assert!(lines[3].starts_with("0,mean,") && lines[4].starts_with("1,mean,"));
    assert!(out.join("lambda_1_seed_5/report.txt").exists());
}

#[test]
fn features_and_baseline_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let edges = tmp.path().join("g.edges");
    fs::write(&edges, "a b\nb c\nc a\n").unwrap();
    let csv = tmp.path().join("f.csv");
    let (code, _, err) = casper(&["features", "--graph", edges.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("node,coreness,pagerank,hub,authority,eigenvector,clustering\n"));
    assert_eq!(text.lines().count(), 4);

    let data = tmp.path().join("data");
    synth(&data);
    let report = tmp.path().join("baseline.txt");
    let (code, _, err) = casper(&[
        "baseline", "--data", data.to_str().unwrap(), "--out", report.to_str().unwrap(), "--set", "baseline.epochs=20",
    ]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(report).unwrap();
    for name in ["FBC-r.test.cascade.rmrse", "FBC-m.test.cascade.mape", "FBP-r.train.personality", "FBP-m.train.personality"] {
        assert!(text.contains(name), "{name}\n{text}");
    }
}

#[test]
fn validation_failures_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let o = out.to_str().unwrap();
    assert_eq!(casper(&["synth", "--out", o, "--bogus"]).0, 1);
    assert_eq!(casper(&["synth", "--out", o, "--set", "synth.colour=red"]).0, 1);
    assert_eq!(casper(&["synth", "--out", o, "--set", "train.patience=0"]).0, 1);
    let (code, _, err) = casper(&["train", "--data", "/nonexistent/data", "--out", o]);
    assert_eq!(code, 1);
    assert!(err.contains("graph.edges"), "{err}");
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "train.lambda = 1\nnot a pair\n").unwrap();
    let (code, _, err) = casper(&["synth", "--out", o, "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");
    assert_eq!(casper(&["--help"]).0, 0);
}

#[test]
fn report_echo_reproduces_the_run_without_touching_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let before = read_dir_sorted(&data);

    let first = tmp.path().join("first");
    let mut args = vec!["train", "--data", data.to_str().unwrap(), "--out", first.to_str().unwrap()];
    args.extend_from_slice(SMALL_MODEL);
    args.extend_from_slice(&["--set", "train.seed=4", "--set", "model.base=gat"]);
    let (code, _, err) = casper(&args);
    assert_eq!(code, 0, "{err}");

    let report = fs::read_to_string(first.join("report.txt")).unwrap();
    let echo: String = report
        .lines()
        .filter(|l| ["model.", "train.", "data."].iter().any(|p| l.starts_with(p)))
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg = tmp.path().join("echo.cfg");
    fs::write(&cfg, echo).unwrap();
    let second = tmp.path().join("second");
    let (code, _, err) =
        casper(&["train", "--config", cfg.to_str().unwrap(), "--data", data.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");

    assert_eq!(report, fs::read_to_string(second.join("report.txt")).unwrap());
    assert_eq!(fs::read(first.join("history.csv")).unwrap(), fs::read(second.join("history.csv")).unwrap());
    assert_eq!(read_dir_sorted(&first.join("checkpoint")), read_dir_sorted(&second.join("checkpoint")));
    assert_eq!(before, read_dir_sorted(&data));
}
