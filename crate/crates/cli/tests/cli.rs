use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn truthdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_truthdisc"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, seed: &str) {
    let out = truthdisc(&[
        "--seed",
        seed,
        "generate",
        "--sources",
        "8",
        "--items",
        "30",
        "--cov",
        "U75",
        "--gt",
        "80O",
        "--max-distinct",
        "3",
        "-o",
        s(dir),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn generate_writes_all_files_deterministically() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    generate(a.path(), "5");
    generate(b.path(), "5");
    for f in ["claims.csv", "truth.csv", "scenario.txt", "metadata.txt"] {
        let x = fs::read_to_string(a.path().join(f)).unwrap();
        assert_eq!(x, fs::read_to_string(b.path().join(f)).unwrap(), "{f}");
    }
    let claims = fs::read_to_string(a.path().join("claims.csv")).unwrap();
    assert!(claims.starts_with("claim_id,source_id,data_item_id,value\n"));
    let truth = fs::read_to_string(a.path().join("truth.csv")).unwrap();
    assert_eq!(truth.lines().count(), 31);
    assert!(fs::read_to_string(a.path().join("scenario.txt"))
        .unwrap()
        .contains("seed=5"));
}

#[test]
fn scenario_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.txt");
    fs::write(&cfg, "n_sources=6\nn_items=12\ngt=U25\n").unwrap();
    let out = truthdisc(&[
        "generate",
        "--config",
        s(&cfg),
        "--items",
        "9",
        "-o",
        s(dir.path()),
    ]);
    assert!(out.status.success());
    let kv = fs::read_to_string(dir.path().join("scenario.txt")).unwrap();
    assert!(kv.contains("n_sources=6") && kv.contains("n_items=9") && kv.contains("gt=U25"));
}

#[test]
fn run_reports_and_exits_zero_when_all_ok() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "1");
    let spec = dir.path().join("spec.toml");
    let report = dir.path().join("report.csv");
    fs::write(
        &spec,
        format!(
            "[[datasets]]\nname = \"g\"\nclaims = \"{}\"\ntruth = \"{}\"\n\n\
             [[algorithms]]\nname = \"MajorityVoting\"\n\n\
             [[algorithms]]\nname = \"SimpleLCA\"\nparams = {{ t0 = 0.7 }}\n",
            s(&dir.path().join("claims.csv")),
            s(&dir.path().join("truth.csv")),
        ),
    )
    .unwrap();
    let out = truthdisc(&["--max-iters", "50", "run", s(&spec), "-o", s(&report)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&report).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("dataset,algorithm,params,precision"));
    assert!(lines[1].starts_with("g,MajorityVoting,"));
    assert!(lines[2].contains("t0=0.7") && lines[2].ends_with(",OK"));
}

#[test]
fn run_exits_nonzero_on_guarded_cell() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        "[[datasets]]\nscenario = { n_sources = 5200, n_items = 8, cov = \"U25\", max_distinct = 2 }\n\
         [[algorithms]]\nname = \"MLE\"\n",
    )
    .unwrap();
    let out = truthdisc(&["run", s(&spec)]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().nth(1).unwrap().ends_with(",NA"), "{stdout}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not complete"));
}

#[test]
fn bad_spec_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, "datasets = []\nalgorithms = []\n").unwrap();
    let out = truthdisc(&["run", s(&spec)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn convert_splits_lists_and_builds_boolean_claims() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(
        &input,
        "claim_id,source_id,data_item_id,value\nc1,s,Book:AuthorOf,AuthorA|AuthorB\n",
    )
    .unwrap();
    let ltm = dir.path().join("ltm.csv");
    assert!(truthdisc(&["convert", "ltm", s(&input), s(&ltm)])
        .status
        .success());
    assert_eq!(fs::read_to_string(&ltm).unwrap().lines().count(), 3);
    let mle = dir.path().join("mle.csv");
    assert!(truthdisc(&["convert", "mle", s(&ltm), s(&mle)])
        .status
        .success());
    let text = fs::read_to_string(&mle).unwrap();
    assert!(text.contains("c1.1,s,Book:AuthorOf:AuthorA,True"), "{text}");
    assert!(text.contains("c1.2,s,Book:AuthorOf:AuthorB,True"), "{text}");
}

#[test]
fn sweep_writes_long_format_figure() {
    let dir = tempfile::tempdir().unwrap();
    let fig = dir.path().join("fig.csv");
    let out = truthdisc(&[
        "sweep",
        "--sources",
        "6",
        "--items",
        "20",
        "--from",
        "2",
        "--to",
        "5",
        "--seeds",
        "2",
        "-a",
        "voting,truthfinder,cosine",
        "--figure",
        s(&fig),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&fig).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "scenario,algorithm,distinct_values,precision"
    );
    assert_eq!(text.lines().count(), 1 + 4 * 3);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).lines().count(),
        1 + 4 * 3
    );
}
