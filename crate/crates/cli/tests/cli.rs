use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fcforest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcforest"))
        .args(args)
        .output()
        .expect("spawn fcforest")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Last stderr line; warnings may precede the error.
fn stderr(out: &Output) -> String {
    let text = String::from_utf8_lossy(&out.stderr);
    text.lines().last().unwrap_or_default().to_string()
}

fn assert_ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", stderr(out));
}

#[test]
fn synth_fit_score_grid_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bimodal.csv");
    let model = dir.path().join("model.json");
    let scores = dir.path().join("scores.csv");
    let grid = dir.path().join("grid.csv");

    let out = fcforest(&[
        "synth",
        "--kind",
        "bimodal",
        "--size",
        "200",
        "--seed",
        "1",
        "--out",
        p(&data),
    ]);
    assert_ok(&out);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "rows: 400");

    let out = fcforest(&[
        "fit",
        "--data",
        p(&data),
        "--out",
        p(&model),
        "--trees",
        "20",
        "--seed",
        "4",
    ]);
    assert_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("trees: 20"), "{text}");
    assert!(text.contains("sample_size: 256"), "{text}");

    assert_ok(&fcforest(&[
        "score",
        "--model",
        p(&model),
        "--data",
        p(&data),
        "--out",
        p(&scores),
    ]));
    let lines: Vec<String> = fs::read_to_string(&scores).unwrap().lines().map(String::from).collect();
    assert_eq!(lines[0], "row_index,score");
    assert_eq!(lines.len(), 401);
    for (i, line) in lines[1..].iter().enumerate() {
        let (idx, s) = line.split_once(',').unwrap();
        assert_eq!(idx.parse::<usize>().unwrap(), i);
        let s: f64 = s.parse().unwrap();
        assert!(s > 0.0 && s < 1.0);
    }

    assert_ok(&fcforest(&[
        "grid",
        "--model",
        p(&model),
        "--bounds",
        "-5,15,-5,15",
        "--resolution",
        "10",
        "--out",
        p(&grid),
    ]));
    let grid_text = fs::read_to_string(&grid).unwrap();
    assert_eq!(grid_text.lines().next(), Some("x,y,score"));
    assert_eq!(grid_text.lines().count(), 101);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("blob.csv");
    assert_ok(&fcforest(&[
        "synth",
        "--kind",
        "blob",
        "--size",
        "300",
        "--out",
        p(&data),
    ]));
    let mut models = Vec::new();
    let mut scores = Vec::new();
    for threads in ["1", "3"] {
        let model = dir.path().join(format!("m{threads}.json"));
        let score = dir.path().join(format!("s{threads}.csv"));
        assert_ok(&fcforest(&[
            "--threads",
            threads,
            "fit",
            "--data",
            p(&data),
            "--out",
            p(&model),
            "--seed",
            "9",
        ]));
        assert_ok(&fcforest(&[
            "--threads",
            threads,
            "score",
            "--model",
            p(&model),
            "--data",
            p(&data),
            "--out",
            p(&score),
        ]));
        models.push(fs::read(&model).unwrap());
        scores.push(fs::read(&score).unwrap());
    }
    assert_eq!(models[0], models[1]);
    assert_eq!(scores[0], scores[1]);
}

#[test]
fn planted_outlier_scores_highest() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("blob.csv");
    let model = dir.path().join("m.json");
    let scores = dir.path().join("s.csv");
    assert_ok(&fcforest(&[
        "synth",
        "--kind",
        "blob",
        "--size",
        "500",
        "--outlier",
        "7,-7",
        "--out",
        p(&data),
    ]));
    assert_ok(&fcforest(&[
        "fit",
        "--data",
        p(&data),
        "--out",
        p(&model),
        "--preset",
        "iforest",
    ]));
    assert_ok(&fcforest(&[
        "score",
        "--model",
        p(&model),
        "--data",
        p(&data),
        "--out",
        p(&scores),
    ]));
    let text = fs::read_to_string(&scores).unwrap();
    let best = text
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap())
        .max_by(|a, b| a.1.parse::<f64>().unwrap().total_cmp(&b.1.parse::<f64>().unwrap()))
        .unwrap();
    assert_eq!(best.0, "500");
}

#[test]
fn bench_writes_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("blob.csv");
    let json = dir.path().join("bench.json");
    assert_ok(&fcforest(&[
        "synth",
        "--kind",
        "blob",
        "--size",
        "200",
        "--out",
        p(&data),
    ]));
    let out = fcforest(&[
        "bench",
        "--data",
        p(&data),
        "--runs",
        "3",
        "--trees",
        "10",
        "--preset",
        "iforest",
        "--json",
        p(&json),
    ]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("iforest"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["seeds"], serde_json::json!([0, 1, 2]));
    assert_eq!(v["runs"].as_array().unwrap().len(), 3);
    let auroc = v["mean_auroc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auroc));
}

#[test]
fn bench_without_labels_is_a_labels_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("blob.csv");
    assert_ok(&fcforest(&[
        "synth",
        "--kind",
        "blob",
        "--size",
        "50",
        "--out",
        p(&data),
    ]));
    let out = fcforest(&["bench", "--data", p(&data), "--label-col", "none", "--runs", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[labels]:"), "{}", stderr(&out));
}

#[test]
fn grid_rejects_models_that_are_not_two_dimensional() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("wide.csv");
    let model = dir.path().join("m.json");
    let rows: String = (0..40).map(|i| format!("{},{},{},0\n", i, i * i % 7, i % 5)).collect();
    fs::write(&data, format!("a,b,c,label\n{rows}")).unwrap();
    assert_ok(&fcforest(&[
        "fit",
        "--data",
        p(&data),
        "--out",
        p(&model),
        "--trees",
        "5",
    ]));
    let out = fcforest(&["grid", "--model", p(&model), "--out", p(&dir.path().join("g.csv"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[dimension]:"), "{}", stderr(&out));
}

#[test]
fn score_rejects_mismatched_columns() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("blob.csv");
    let wide = dir.path().join("wide.csv");
    let model = dir.path().join("m.json");
    assert_ok(&fcforest(&[
        "synth",
        "--kind",
        "blob",
        "--size",
        "50",
        "--out",
        p(&data),
    ]));
    fs::write(&wide, "a,b,c,label\n1,2,3,0\n4,5,6,1\n").unwrap();
    assert_ok(&fcforest(&[
        "fit",
        "--data",
        p(&data),
        "--out",
        p(&model),
        "--trees",
        "5",
    ]));
    let out = fcforest(&[
        "score",
        "--model",
        p(&model),
        "--data",
        p(&wide),
        "--out",
        p(&dir.path().join("s.csv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[dimension]:"), "{}", stderr(&out));
}

#[test]
fn malformed_inputs_report_their_category() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    let model = dir.path().join("m.json");
    fs::write(&bad, "a,b,label\n1,2,0\n3,oops,1\n").unwrap();
    let out = fcforest(&["fit", "--data", p(&bad), "--out", p(&model)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[data]:"), "{}", stderr(&out));

    let missing = dir.path().join("nope.csv");
    let out = fcforest(&["fit", "--data", p(&missing), "--out", p(&model)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[io]:"), "{}", stderr(&out));

    fs::write(&model, "{\"not\": \"a model\"}").unwrap();
    let out = fcforest(&[
        "score",
        "--model",
        p(&model),
        "--data",
        p(&bad),
        "--out",
        p(&dir.path().join("s.csv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[format]:"), "{}", stderr(&out));
}

#[test]
fn conflicting_options_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("blob.csv");
    let model = dir.path().join("m.json");
    assert_ok(&fcforest(&[
        "synth",
        "--kind",
        "blob",
        "--size",
        "50",
        "--out",
        p(&data),
    ]));
    for extra in [
        &["--full-isolation", "--max-depth", "4"][..],
        &["--preset", "iforest", "--gain-threshold", "0.1"][..],
        &["--trees", "0"][..],
        &["--gain-threshold", "1.5"][..],
    ] {
        let mut args = vec!["fit", "--data", p(&data), "--out", p(&model)];
        args.extend_from_slice(extra);
        let out = fcforest(&args);
        assert_eq!(out.status.code(), Some(1), "{extra:?}");
        assert!(
            stderr(&out).starts_with("error[config]:"),
            "{extra:?}: {}",
            stderr(&out)
        );
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["fit"][..],
        &["fit", "--data", "x.csv", "--out", "m.json", "--criterion", "best"][..],
        &["frobnicate"][..],
        &["--threads", "0", "synth", "--out", "x.csv"][..],
        &["synth", "--kind", "blob", "--outlier", "1,2,3", "--out", "x.csv"][..],
    ] {
        let out = fcforest(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).starts_with("error[usage]:"), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn help_succeeds() {
    let out = fcforest(&["--help"]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("bench"));
}
