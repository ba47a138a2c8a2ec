//! End-to-end CLI behavior: exit codes, diagnostics, and report output.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_taskstream")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn cli")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn synth_dataset(dir: &Path) -> String {
    let ds = dir.join("train.ds");
    let out = run(&[
        "synth", "--classes", "10", "--per-class", "20", "--dim", "16", "--seed", "7", "--out",
        ds.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    ds.to_str().unwrap().to_string()
}

#[test]
fn synth_writes_expected_record_count() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth_dataset(dir.path());
    let text = std::fs::read_to_string(&ds).unwrap();
    assert_eq!(text.lines().count(), 201); // header + 200 records

    // identical flags, identical bytes
    let ds2 = dir.path().join("again.ds");
    run(&[
        "synth", "--classes", "10", "--per-class", "20", "--dim", "16", "--seed", "7", "--out",
        ds2.to_str().unwrap(),
    ]);
    assert_eq!(text, std::fs::read_to_string(ds2).unwrap());
}

#[test]
fn synth_rejects_zero_per_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "synth", "--classes", "2", "--per-class", "0", "--dim", "4", "--out",
        dir.path().join("x.ds").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("InvalidSynthSpec"));
}

#[test]
fn build_diagnostic_names_engine_error() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth_dataset(dir.path());
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kind = \"class_incremental\"\nincrements = [3]\n").unwrap();
    let out = run(&[
        "build",
        "--dataset",
        &ds,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("UnevenIncrement"), "{}", stderr(&out));
}

#[test]
fn build_is_deterministic_and_seed_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth_dataset(dir.path());
    let cfg = dir.path().join("ii.toml");
    std::fs::write(&cfg, "kind = \"instance_incremental\"\nnb_tasks = 4\nseed = 1\n").unwrap();
    let out1 = dir.path().join("s1");
    let out2 = dir.path().join("s2");
    let out3 = dir.path().join("s3");
    for (path, seed) in [(&out1, None), (&out2, None), (&out3, Some("99"))] {
        let mut args = vec![
            "build",
            "--dataset",
            &ds,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
        ];
        if let Some(seed) = seed {
            args.extend(["--seed", seed]);
        }
        assert!(run(&args).status.success());
    }
    let a = std::fs::read(&out1).unwrap();
    assert_eq!(a, std::fs::read(&out2).unwrap());
    assert_ne!(a, std::fs::read(&out3).unwrap());
}

#[test]
fn inspect_transformation_scenario_shows_uniform_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth_dataset(dir.path());
    let cfg = dir.path().join("tr.toml");
    std::fs::write(
        &cfg,
        "kind = \"transformation\"\ntransforms = [\"identity\", \"perm:1:16\", \"perm:2:16\"]\n",
    )
    .unwrap();
    let scen = dir.path().join("tr.scenario");
    assert!(run(&[
        "build",
        "--dataset",
        &ds,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        scen.to_str().unwrap(),
    ])
    .status
    .success());
    let out = run(&["inspect", scen.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("tasks: 3, classes: 10"));
    assert_eq!(text.matches("size 200").count(), 3, "{text}");
}

#[test]
fn inspect_truncated_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("garbage");
    std::fs::write(&path, "scenario,class_incremental,5").unwrap();
    let out = run(&["inspect", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dump_identity_task_matches_source_slice() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth_dataset(dir.path());
    let cfg = dir.path().join("ci.toml");
    std::fs::write(&cfg, "kind = \"class_incremental\"\nincrements = [2]\n").unwrap();
    let scen = dir.path().join("ci.scenario");
    assert!(run(&[
        "build",
        "--dataset",
        &ds,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        scen.to_str().unwrap(),
    ])
    .status
    .success());
    let dump = dir.path().join("task0.ds");
    assert!(run(&[
        "dump",
        "--scenario",
        scen.to_str().unwrap(),
        "--task",
        "0",
        "--out",
        dump.to_str().unwrap(),
    ])
    .status
    .success());
    // identity transform: dump records equal the classes-0/1 slice of the source
    let source = std::fs::read_to_string(&ds).unwrap();
    let expected: Vec<&str> = source
        .lines()
        .skip(1)
        .filter(|l| {
            let label: u32 = l.split(',').nth(1).unwrap().parse().unwrap();
            label < 2
        })
        .collect();
    let dumped: Vec<String> = std::fs::read_to_string(&dump)
        .unwrap()
        .lines()
        .skip(1)
        .map(str::to_string)
        .collect();
    assert_eq!(dumped, expected);

    let out = run(&[
        "dump",
        "--scenario",
        scen.to_str().unwrap(),
        "--task",
        "99",
        "--out",
        dir.path().join("nope").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("TaskIndexOutOfRange"));
}

/// Log fixture reproducing R = [[1.0],[0.9,1.0],[0.8,0.9,1.0]] with 10
/// records per cell.
fn fixture_log() -> String {
    let mut out = String::new();
    let correct_of = [vec![10usize], vec![9, 10], vec![8, 9, 10]];
    for (step, row) in correct_of.iter().enumerate() {
        for (task, &correct) in row.iter().enumerate() {
            for k in 0..10 {
                let pred = u32::from(k >= correct);
                out.push_str(&format!("{step},{k},0,{pred},{task},0\n"));
            }
        }
    }
    out
}

#[test]
fn metrics_report_fixture_values() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("preds.log");
    std::fs::write(&log, fixture_log()).unwrap();
    let out = run(&["metrics", log.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("average_incremental_accuracy 0.950000\n"), "{text}");
    assert!(text.contains("backward_transfer -0.150000\n"), "{text}");
    assert!(text.contains("remembering 0.850000\n"), "{text}");
    assert!(text.contains("model_size_efficiency n/a\n"), "{text}");
}

#[test]
fn metrics_report_perfect_and_single_step_logs() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("perfect.log");
    std::fs::write(&log, "0,0,1,1,0,0\n1,0,1,1,0,0\n1,1,2,2,1,0\n").unwrap();
    let out = run(&["metrics", log.to_str().unwrap()]);
    let text = stdout(&out);
    assert!(text.contains("last_accuracy 1.000000\n"));
    assert!(text.contains("average_incremental_accuracy 1.000000\n"));
    assert!(text.contains("remembering 1.000000\n"));

    let single = dir.path().join("single.log");
    std::fs::write(&single, "0,0,1,1,0,0\n").unwrap();
    let out = run(&["metrics", single.to_str().unwrap()]);
    let text = stdout(&out);
    assert!(text.contains("backward_transfer n/a\n"), "{text}");
}

#[test]
fn metrics_rejects_malformed_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bad.log");
    std::fs::write(&log, "0,0,1\n").unwrap();
    let out = run(&["metrics", log.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ParseError"));
}
