mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use cnmf::cli::{run, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};
use cnmf::factor::{FactorModel, FitConfig};
use cnmf::interchange::{DatasetBundle, LabelTable};
use ndarray::{array, Array2};

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cnmf").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_bundle(dir: &Path, b: &DatasetBundle) -> PathBuf {
    b.write(dir.join("bundle")).unwrap()
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn factorize_twice_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write_bundle(tmp.path(), &common::random_bundle(1, &[3, 3], &[6, 4], 15));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let (code, stdout, _) = cli(&[
            "factorize",
            "--manifest",
            s(&manifest),
            "--out",
            s(out),
            "--rank",
            "3",
            "--seed",
            "7",
            "--lambda-p",
            "0.1",
            "--max-iters",
            "40",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(stdout.contains("objective"));
    }
    let (fa, fb) = (dir_bytes(&a), dir_bytes(&b));
    assert_eq!(fa.len(), 6);
    assert_eq!(fa, fb);
}

#[test]
fn existing_model_needs_force() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write_bundle(tmp.path(), &common::random_bundle(2, &[], &[5], 8));
    let out = tmp.path().join("m");
    let args = [
        "factorize",
        "--manifest",
        s(&manifest),
        "--out",
        s(&out),
        "--rank",
        "2",
        "--max-iters",
        "3",
    ];
    assert_eq!(cli(&args).0, EXIT_OK);
    let (code, _, err) = cli(&args);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--force"));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(cli(&forced).0, EXIT_OK);
}

#[test]
fn missing_manifest_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nowhere/bundle.json");
    let (code, _, err) = cli(&[
        "factorize",
        "--manifest",
        s(&missing),
        "--out",
        s(tmp.path()),
        "--rank",
        "2",
    ]);
    assert_eq!(code, EXIT_IO);
    assert!(err.contains(s(&missing)), "{err}");
}

#[test]
fn usage_errors() {
    assert_eq!(cli(&["factorize"]).0, EXIT_USAGE);
    assert_eq!(cli(&["bogus"]).0, EXIT_USAGE);
    assert_eq!(cli(&["--help"]).0, EXIT_OK);
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write_bundle(tmp.path(), &common::random_bundle(2, &[], &[5], 8));
    let (code, _, _) = cli(&[
        "factorize",
        "--manifest",
        s(&manifest),
        "--out",
        s(tmp.path()),
        "--rank",
        "0",
    ]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn group_sparse_with_pixel_channels_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write_bundle(tmp.path(), &common::random_bundle(3, &[2], &[5], 8));
    let (code, _, err) = cli(&[
        "factorize",
        "--manifest",
        s(&manifest),
        "--out",
        s(&tmp.path().join("m")),
        "--rank",
        "2",
        "--group-sparse",
        "--lambda-f",
        "1",
    ]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.starts_with("error:"));
}

#[test]
fn report_with_classes_requires_labels() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write_bundle(tmp.path(), &common::random_bundle(4, &[2], &[5], 8));
    let model = tmp.path().join("m");
    assert_eq!(
        cli(&[
            "factorize",
            "--manifest",
            s(&manifest),
            "--out",
            s(&model),
            "--rank",
            "2",
            "--max-iters",
            "5"
        ])
        .0,
        0
    );
    let rep = tmp.path().join("r");
    let base = [
        "report",
        "--manifest",
        s(&manifest),
        "--model",
        s(&model),
        "--out",
        s(&rep),
    ];
    let mut strict = base.to_vec();
    strict.push("--classes");
    assert_eq!(cli(&strict).0, EXIT_VALIDATION);
    let (code, stdout, _) = cli(&base);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("artifacts"));
    assert!(rep.join("index.txt").is_file());
    assert!(rep.join("pixels/factor_000_channel0_latent.pgm").is_file());
}

#[test]
fn report_with_labels_and_pixel_image() {
    let tmp = tempfile::tempdir().unwrap();
    let b = common::random_bundle(5, &[3], &[5], 9)
        .with_labels(Some(LabelTable::from_classes(
            (0..9).map(|k| format!("c{}", k % 3)),
        )))
        .unwrap();
    let manifest = write_bundle(tmp.path(), &b);
    let model = tmp.path().join("m");
    assert_eq!(
        cli(&[
            "factorize",
            "--manifest",
            s(&manifest),
            "--out",
            s(&model),
            "--rank",
            "2",
            "--max-iters",
            "5"
        ])
        .0,
        0
    );
    let rep = tmp.path().join("r");
    let (code, _, _) = cli(&[
        "report",
        "--manifest",
        s(&manifest),
        "--model",
        s(&model),
        "--out",
        s(&rep),
        "--classes",
        "--no-pixels",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(rep.join("factors/factor_001_classes.csv").is_file());
    assert!(!rep.join("pixels").exists());

    let px = tmp.path().join("px");
    let (code, _, _) = cli(&[
        "pixel-image",
        "--manifest",
        s(&manifest),
        "--model",
        s(&model),
        "--factor",
        "1",
        "--out",
        s(&px),
    ]);
    assert_eq!(code, EXIT_OK);
    let pgm = fs::read(px.join("factor_001_channel0_mask.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n3 3\n255\n"));
    let (code, _, _) = cli(&[
        "pixel-image",
        "--manifest",
        s(&manifest),
        "--model",
        s(&model),
        "--factor",
        "9",
        "--out",
        s(&px),
    ]);
    assert_eq!(code, EXIT_VALIDATION);
}

fn saved_model(dir: &Path, o: Array2<f64>, f: Array2<f64>) -> PathBuf {
    let path = dir.join("model");
    let d = f.nrows();
    FactorModel::from_factors(vec![], vec![o], f, FitConfig::with_rank(d))
        .unwrap()
        .save(&path, false)
        .unwrap();
    path
}

#[test]
fn similarity_of_identity_layer() {
    let tmp = tempfile::tempdir().unwrap();
    let model = saved_model(tmp.path(), Array2::eye(3), Array2::ones((3, 4)));
    let out = tmp.path().join("sim");
    let (code, stdout, _) = cli(&[
        "similarity",
        "--model",
        s(&model),
        "--layer",
        "0",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("mean 1.000000000"), "{stdout}");
    let csv = fs::read_to_string(out.join("layer0_layer0_similarity.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(
        rows,
        vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0]
        ]
    );
    assert_eq!(
        cli(&[
            "similarity",
            "--model",
            s(&model),
            "--layer",
            "1",
            "--out",
            s(&out)
        ])
        .0,
        EXIT_VALIDATION
    );
}

#[test]
fn knn_finds_duplicate_column_at_zero_distance() {
    let tmp = tempfile::tempdir().unwrap();
    let mut f = common::uniform(&mut common::rng(6), 4, 12, 0.1, 1.0);
    let col = f.column(5).to_owned();
    f.column_mut(9).assign(&col);
    let model = saved_model(tmp.path(), Array2::ones((2, 4)), f);
    let out = tmp.path().join("knn");
    let (code, _, _) = cli(&[
        "knn",
        "--model",
        s(&model),
        "--query",
        "5",
        "--k",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    let csv = fs::read_to_string(out.join("knn_5.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "9");
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
    let hist = fs::read_to_string(out.join("knn_5_concepts.csv")).unwrap();
    assert_eq!(hist.lines().count(), 5);
    // k must be smaller than N.
    assert_eq!(
        cli(&[
            "knn",
            "--model",
            s(&model),
            "--query",
            "5",
            "--k",
            "12",
            "--out",
            s(&out)
        ])
        .0,
        EXIT_USAGE
    );
}

#[test]
fn objective_of_exact_factorization_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    // Small integers: exact in f32.
    let p = array![[1.0, 0.0], [2.0, 1.0], [0.0, 3.0], [1.0, 1.0]];
    let o = array![[2.0, 1.0], [0.0, 4.0], [1.0, 1.0]];
    let f = array![[1.0, 2.0, 0.0], [3.0, 1.0, 2.0]];
    let b = DatasetBundle::from_arrays(vec![(2, 2, p.dot(&f))], vec![o.dot(&f)], None).unwrap();
    let manifest = write_bundle(tmp.path(), &b);
    let model = tmp.path().join("model");
    FactorModel::from_factors(vec![p], vec![o], f, FitConfig::with_rank(2))
        .unwrap()
        .save(&model, false)
        .unwrap();
    let (code, stdout, _) = cli(&[
        "objective",
        "--manifest",
        s(&manifest),
        "--model",
        s(&model),
    ]);
    assert_eq!(code, EXIT_OK);
    let value: f64 = stdout.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(value.abs() <= 1e-9, "{stdout}");
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cnmf");
    let status = Command::new(bin).arg("--version").output().unwrap();
    assert!(status.status.success());
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(bin)
        .args(["objective", "--manifest"])
        .arg(tmp.path().join("absent.json"))
        .arg("--model")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_IO));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));
}
