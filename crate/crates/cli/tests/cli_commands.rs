//! End-to-end runs of the `phogsvm` binary: subcommand flows, exit codes,
//! and byte-identical outputs under fixed seeds.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use phogsvm_testkit::synth;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phogsvm"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Tiny two-class image set on disk; returns the manifest path.
fn write_dataset(dir: &Path, per_class: usize, size: usize, seed: u64) -> PathBuf {
    let mut rng = synth::rng(seed);
    let mut manifest = String::from("id,path,label\n");
    for i in 0..per_class {
        let pixels = synth::ellipse_image(size, &mut rng);
        let name = format!("ellipse{i}.pgm");
        fs::write(dir.join(&name), synth::to_pgm_p5(&pixels, size, size)).unwrap();
        manifest.push_str(&format!("e{i},{name},male\n"));
        let pixels = synth::cross_image(size, &mut rng);
        let name = format!("cross{i}.pgm");
        fs::write(dir.join(&name), synth::to_pgm_p5(&pixels, size, size)).unwrap();
        manifest.push_str(&format!("c{i},{name},female\n"));
    }
    let path = dir.join("manifest.csv");
    fs::write(&path, manifest).unwrap();
    path
}

const SMALL_DESC: &[&str] = &[
    "--levels",
    "2",
    "--bins",
    "8",
    "--resample",
    "32x32",
    "--sigma",
    "1.0",
];

#[test]
fn extract_train_evaluate_predict_flow() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_dataset(dir.path(), 8, 32, 11);

    let mut args = vec![
        "extract",
        "--manifest",
        manifest.to_str().unwrap(),
        "--features",
        "features.csv",
    ];
    args.extend_from_slice(SMALL_DESC);
    let out = run(&args, dir.path());
    assert!(out.status.success(), "extract failed: {}", stderr(&out));
    assert!(stdout(&out).contains("descriptors of length 168"));

    let features = fs::read_to_string(dir.path().join("features.csv")).unwrap();
    assert!(features.starts_with("phogfeat v1 L=2 H=8 A=360 t=0.1 resample=32x32 sigma=1"));
    assert_eq!(features.lines().count(), 17);

    let out = run(
        &[
            "train",
            "--features",
            "features.csv",
            "--model",
            "model.txt",
            "--kernel",
            "rbf",
            "--C",
            "8",
            "--gamma",
            "4",
            "--seed",
            "1",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "train failed: {}", stderr(&out));
    assert!(fs::read_to_string(dir.path().join("model.txt"))
        .unwrap()
        .starts_with("phogsvm v1\nkernel rbf gamma "));

    let out = run(
        &[
            "evaluate",
            "--model",
            "model.txt",
            "--features",
            "features.csv",
            "--out",
            "eval.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "evaluate failed: {}", stderr(&out));
    assert!(stdout(&out).contains("recognition rate:"));
    let eval = fs::read_to_string(dir.path().join("eval.csv")).unwrap();
    assert!(eval.starts_with("tp,tn,fp,fn,rate\n"));

    let mut args = vec!["predict", "--model", "model.txt"];
    args.extend_from_slice(SMALL_DESC);
    args.extend_from_slice(&["ellipse0.pgm", "cross0.pgm"]);
    let out = run(&args, dir.path());
    assert!(out.status.success(), "predict failed: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("ellipse0.pgm\t"));
    for line in &lines {
        let label = line.split('\t').nth(1).unwrap();
        assert!(label == "male" || label == "female", "line {line:?}");
    }
}

#[test]
fn debug_dump_writes_decodable_filter_responses() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_dataset(dir.path(), 2, 32, 17);
    let mut args = vec![
        "extract",
        "--manifest",
        manifest.to_str().unwrap(),
        "--features",
        "f.csv",
        "--debug-dump",
        "dumps",
    ];
    args.extend_from_slice(SMALL_DESC);
    let out = run(&args, dir.path());
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    for name in ["e0-laplacian.pgm", "e0-magnitude.pgm", "c1-laplacian.pgm"] {
        let bytes = fs::read(dir.path().join("dumps").join(name)).unwrap();
        let img = phogsvm::formats::pgm::decode(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (32, 32));
    }
}

#[test]
fn selftest_passes_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["selftest"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("PASS two-point closed form"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn exit_codes_separate_validation_from_runtime() {
    let dir = tempfile::tempdir().unwrap();

    // Missing manifest file: runtime error.
    let out = run(
        &[
            "extract",
            "--manifest",
            "nope.csv",
            "--features",
            "f.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));

    // Bad label in the manifest: validation error naming the line.
    fs::write(dir.path().join("bad.csv"), "id,path,label\nx,i.pgm,cat\n").unwrap();
    let out = run(
        &[
            "extract",
            "--manifest",
            "bad.csv",
            "--features",
            "f.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"));

    // Unknown flag: validation error.
    let out = run(&["train", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    // Bad flag value: validation error naming the flag.
    let out = run(
        &[
            "extract",
            "--manifest",
            "bad.csv",
            "--features",
            "f.csv",
            "--sigma=-1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--sigma"), "stderr: {}", stderr(&out));
}

#[test]
fn predict_dimension_mismatch_exits_one_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_dataset(dir.path(), 4, 32, 5);
    let mut args = vec![
        "extract",
        "--manifest",
        manifest.to_str().unwrap(),
        "--features",
        "f.csv",
    ];
    args.extend_from_slice(SMALL_DESC);
    assert!(run(&args, dir.path()).status.success());
    assert!(run(
        &[
            "train",
            "--features",
            "f.csv",
            "--model",
            "m.txt",
            "--kernel",
            "linear",
            "--C",
            "1",
        ],
        dir.path(),
    )
    .status
    .success());

    // Default descriptor flags produce 1360-dim vectors; the model wants 168.
    let out = run(
        &["predict", "--model", "m.txt", "ellipse0.pgm"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("1360") && err.contains("168"), "stderr: {err}");
}

#[test]
fn help_lists_flags_with_documented_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["extract", "--help"], dir.path());
    assert!(out.status.success());
    let help = stdout(&out);
    for needle in [
        "--levels",
        "[default: 3]",
        "--bins",
        "[default: 16]",
        "--angle",
        "[default: 360]",
        "--edge-thresh",
        "[default: 0.1]",
        "--sigma",
        "[default: 1]",
        "--resample",
        "[default: 300x300]",
        "--grad-source",
        "[default: image]",
    ] {
        assert!(help.contains(needle), "extract --help missing {needle:?}");
    }

    let out = run(&["train", "--help"], dir.path());
    let help = stdout(&out);
    for needle in [
        "--kernel",
        "--C",
        "[default: 4]",
        "--gamma",
        "[default: 1024]",
        "--degree",
        "[default: 3]",
        "--coef0",
        "[default: 1]",
        "--tol",
        "[default: 0.001]",
    ] {
        assert!(help.contains(needle), "train --help missing {needle:?}");
    }
}

#[test]
fn same_seed_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_dataset(dir.path(), 8, 32, 21);

    let mut args = vec![
        "extract",
        "--manifest",
        manifest.to_str().unwrap(),
        "--features",
        "a.csv",
    ];
    args.extend_from_slice(SMALL_DESC);
    assert!(run(&args, dir.path()).status.success());
    args[4] = "b.csv";
    assert!(run(&args, dir.path()).status.success());
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );

    let search = |out_name: &str, model_name: &str| {
        let out = run(
            &[
                "grid-search",
                "--features",
                "a.csv",
                "--kernel",
                "linear",
                "--folds",
                "3",
                "--seed",
                "9",
                "--out",
                out_name,
                "--model",
                model_name,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "grid-search failed: {}", stderr(&out));
        stdout(&out)
    };
    let text1 = search("r1.csv", "m1.txt");
    let text2 = search("r2.csv", "m2.txt");
    assert_eq!(text1.replace("r1.csv", "").replace("m1.txt", ""),
               text2.replace("r2.csv", "").replace("m2.txt", ""));
    assert_eq!(
        fs::read(dir.path().join("r1.csv")).unwrap(),
        fs::read(dir.path().join("r2.csv")).unwrap()
    );
    assert_eq!(
        fs::read(dir.path().join("m1.txt")).unwrap(),
        fs::read(dir.path().join("m2.txt")).unwrap()
    );
}

#[test]
fn grid_search_from_manifest_uses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_dataset(dir.path(), 6, 32, 33);

    let args = vec![
        "grid-search",
        "--manifest",
        manifest.to_str().unwrap(),
        "--kernel",
        "linear",
        "--folds",
        "2",
        "--levels",
        "2",
        "--bins",
        "8",
        "--resample",
        "32x32",
        "--out",
        "cells.csv",
    ];
    let first = run(&args, dir.path());
    assert!(first.status.success(), "stderr: {}", stderr(&first));
    assert!(stderr(&first).contains("extracted"));
    let cells_first = fs::read(dir.path().join("cells.csv")).unwrap();

    let second = run(&args, dir.path());
    assert!(second.status.success());
    assert!(stderr(&second).contains("cache hit"));
    assert_eq!(cells_first, fs::read(dir.path().join("cells.csv")).unwrap());
}

#[test]
fn repeats_report_mean_and_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_dataset(dir.path(), 8, 32, 44);
    let mut args = vec![
        "extract",
        "--manifest",
        manifest.to_str().unwrap(),
        "--features",
        "f.csv",
    ];
    args.extend_from_slice(SMALL_DESC);
    assert!(run(&args, dir.path()).status.success());

    let out = run(
        &[
            "grid-search",
            "--features",
            "f.csv",
            "--kernel",
            "linear",
            "--folds",
            "2",
            "--repeats",
            "3",
            "--seed",
            "5",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("repeat 0: seed=5"));
    assert!(text.contains("repeat 2: seed=7"));
    assert!(text.contains("test rate over 3 repeat(s): mean="));
}
