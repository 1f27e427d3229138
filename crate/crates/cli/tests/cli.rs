use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cfn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfn"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// 30 users × 20 items of MovieLens-style ratings plus a genre list.
fn fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let mut ratings = String::new();
    for u in 0..30u32 {
        for i in 0..20u32 {
            if (u * 7 + i * 3) % 4 != 0 {
                let r = 1 + (u + 2 * i) % 5;
                ratings.push_str(&format!("{}::{}::{}::97830{u}{i}\n", u + 1, i + 100, r));
            }
        }
    }
    let genres = ["Action", "Comedy", "Drama", "Children's"];
    let mut movies = String::new();
    for i in 0..20u32 {
        let g = format!(
            "{}|{}",
            genres[(i % 4) as usize],
            genres[((i / 4) % 4) as usize]
        );
        movies.push_str(&format!("{}::Movie {i} (1999)::{g}\n", i + 100));
    }
    let r = dir.join("ratings.dat");
    let m = dir.join("movies.dat");
    fs::write(&r, ratings).unwrap();
    fs::write(&m, movies).unwrap();
    (r, m)
}

fn ingest(dir: &Path) -> PathBuf {
    let (r, m) = fixture(dir);
    let data = dir.join("data");
    let out = cfn(&[
        "ingest",
        "--ratings",
        p(&r),
        "--genres",
        p(&m),
        "--out",
        p(&data),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    data
}

const QUICK: &[&str] = &["--hidden", "8", "--epochs", "2", "--batch-size", "4"];

#[test]
fn ingest_writes_snapshot_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let data = ingest(dir.path());
    let stats: serde_json::Value =
        serde_json::from_slice(&fs::read(data.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["n_users"], 30);
    assert_eq!(stats["n_items"], 20);
    let n = stats["n_ratings"].as_u64().unwrap() as f64;
    assert!((stats["density"].as_f64().unwrap() - n / 600.0).abs() < 1e-12);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(data.join("manifest.json")).unwrap()).unwrap();
    let listed: Vec<String> = manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    for f in ["ratings.csv", "side.json", "stats.json", "manifest.json"] {
        assert!(data.join(f).exists());
        assert!(
            listed.iter().any(|l| l.ends_with(f)),
            "{f} missing from manifest"
        );
    }

    // a second ingest produces identical files
    let before = fs::read(data.join("ratings.csv")).unwrap();
    let (r, m) = fixture(dir.path());
    assert!(cfn(&[
        "ingest",
        "--ratings",
        p(&r),
        "--genres",
        p(&m),
        "--out",
        p(&data)
    ])
    .status
    .success());
    assert_eq!(before, fs::read(data.join("ratings.csv")).unwrap());
}

#[test]
fn ingest_errors_exit_with_data_code() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.dat");
    fs::write(&empty, "").unwrap();
    let out = cfn(&[
        "ingest",
        "--ratings",
        p(&empty),
        "--out",
        p(&dir.path().join("d")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let missing = cfn(&[
        "ingest",
        "--ratings",
        "/nonexistent/ratings.dat",
        "--out",
        p(&dir.path().join("d")),
    ]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(cfn(&["train"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let data = ingest(dir.path());
    let out = cfn(&[
        "train",
        "--data",
        p(&data),
        "--epochs",
        "0",
        "--out",
        p(&dir.path().join("m")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(cfn(&["--help"]).status.success());
}

#[test]
fn train_evaluate_predict() {
    let dir = tempfile::tempdir().unwrap();
    let data = ingest(dir.path());
    let model = dir.path().join("model");
    let mut args = vec![
        "train",
        "--data",
        p(&data),
        "--orientation",
        "i",
        "--out",
        p(&model),
    ];
    args.extend_from_slice(QUICK);
    let out = cfn(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["model.ckpt", "loss_curve.csv", "run.json", "manifest.json"] {
        assert!(model.join(f).exists(), "{f}");
    }

    // same seed, same checkpoint
    let again = dir.path().join("model2");
    let mut args2 = vec![
        "train",
        "--data",
        p(&data),
        "--orientation",
        "i",
        "--out",
        p(&again),
    ];
    args2.extend_from_slice(QUICK);
    assert!(cfn(&args2).status.success());
    assert_eq!(
        fs::read(model.join("model.ckpt")).unwrap(),
        fs::read(again.join("model.ckpt")).unwrap()
    );

    let out = cfn(&["evaluate", "--model", p(&model), "--clusters", "item"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(model.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["per_cluster"].as_array().unwrap().len(), 5);
    assert!(report["rmse"].as_f64().unwrap() > 0.0);
    let n: u64 = report["per_cluster"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["n_entries"].as_u64().unwrap())
        .sum();
    assert_eq!(n, report["n_test"].as_u64().unwrap());

    let out = cfn(&[
        "predict",
        "--model",
        p(&model),
        "--user",
        "3",
        "--item",
        "105",
    ]);
    assert!(out.status.success());
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((1.0..=5.0).contains(&v));

    // unknown user and item: global mean, with a warning
    let out = Command::new(env!("CARGO_BIN_EXE_cfn"))
        .args([
            "predict",
            "--model",
            p(&model),
            "--user",
            "nobody",
            "--item",
            "nothing",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown user"));
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    let csv = fs::read_to_string(data.join("ratings.csv")).unwrap();
    let vals: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    // the mean is over the training split, so only roughly the overall mean
    let overall = vals.iter().sum::<f64>() / vals.len() as f64;
    assert!((v - overall).abs() < 0.2, "{v} vs {overall}");
}

#[test]
fn genre_side_information_trains() {
    let dir = tempfile::tempdir().unwrap();
    let data = ingest(dir.path());
    let model = dir.path().join("m");
    let mut args = vec![
        "train",
        "--data",
        p(&data),
        "--side-info",
        "both",
        "--out",
        p(&model),
    ];
    args.extend_from_slice(QUICK);
    let out = cfn(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(cfn(&["evaluate", "--model", p(&model)]).status.success());

    // genres describe items, so U-CFN has nothing to use
    let mut args = vec![
        "train",
        "--data",
        p(&data),
        "--side-info",
        "both",
        "--orientation",
        "u",
        "--out",
        p(&model),
    ];
    args.extend_from_slice(QUICK);
    assert!(!cfn(&args).status.success());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let data = ingest(dir.path());
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "hidden = 5\nepochs = 1\nbeta = 0.3\n").unwrap();
    let model = dir.path().join("m");
    let out = cfn(&[
        "train",
        "--data",
        p(&data),
        "--config",
        p(&conf),
        "--hidden",
        "7",
        "--out",
        p(&model),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run: serde_json::Value =
        serde_json::from_slice(&fs::read(model.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["settings"]["train"]["hidden"], 7);
    assert_eq!(run["settings"]["train"]["epochs"], 1);
    assert_eq!(run["settings"]["train"]["beta"], 0.3);
}

#[test]
fn sweeps_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = ingest(dir.path());
    let out_dir = dir.path().join("sweep");
    let mut args = vec![
        "sweep",
        "--kind",
        "ratio",
        "--data",
        p(&data),
        "--jobs",
        "2",
        "--out",
        p(&out_dir),
    ];
    args.extend_from_slice(QUICK);
    let out = cfn(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(out_dir.join("sweep_ratio.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);

    let mut args = vec![
        "sweep",
        "--kind",
        "dae",
        "--data",
        p(&data),
        "--betas",
        "0,0.5",
        "--masks",
        "0,0.25",
        "--out",
        p(&out_dir),
    ];
    args.extend_from_slice(QUICK);
    let out = cfn(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(out_dir.join("sweep_dae.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 1 + 4);
    assert!(rows[1].starts_with("0.0,0.0,,false"), "{}", rows[1]);
}
