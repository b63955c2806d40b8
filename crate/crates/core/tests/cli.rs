// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use std::path::Path;
use std::process::{Command, Output};

use ceremony_sim::meeting::log_respects_transitions;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ceremony-sim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn derive_code_prints_exactly_the_code() {
    let o = run(&["derive-code", "--key-hex", &"00".repeat(32)]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "39962 64396 34983 58855 60708 66040 02674 42528\n"
    );
    let seeded = run(&["derive-code", "--seed", "5"]);
    assert_eq!(
        stdout(&seeded),
        stdout(&run(&["derive-code", "--seed", "5"]))
    );
}

#[test]
fn usage_errors_are_one_line() {
    for args in [
        &["derive-code", "--key-hex", "abc"][..],
        &["no-such-command"],
        &["mcd", "only-one.wav"],
    ] {
        let o = run(args);
        assert!(!o.status.success(), "{args:?}");
        assert_eq!(stderr(&o).lines().count(), 1, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_lists_every_subcommand() {
    let help = stdout(&run(&["--help"]));
    for cmd in [
        "derive-code",
        "segment",
        "synthesize-code",
        "mcd",
        "simulate",
        "report",
        "plot-data",
    ] {
        assert!(help.contains(cmd), "{cmd}");
    }
}

fn corpus_dir(dir: &Path) {
    let o = run(&[
        "synth-corpus",
        "--out",
        dir.to_str().unwrap(),
        "--takes",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn splice_then_mcd_then_segment() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    corpus_dir(&d.join("corpus"));
    let lib = d.join("corpus");
    let p = |n: &str| d.join(n).to_str().unwrap().to_string();

    let o = run(&[
        "synthesize-code",
        "--library",
        lib.to_str().unwrap(),
        "--speaker",
        "carl",
        "--code",
        common::FIXTURE_ORIGINAL[0],
        "--out",
        &p("a.wav"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&[
        "synthesize-code",
        "--library",
        lib.to_str().unwrap(),
        "--speaker",
        "carl",
        "--code",
        common::FIXTURE_REORDERED[0],
        "--out",
        &p("b.wav"),
    ]);
    assert!(o.status.success());

    let o = run(&[
        "mcd",
        &p("a.wav"),
        &p("a.wav.spans"),
        &p("b.wav"),
        &p("b.wav.spans"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 41);
    assert_eq!(out.lines().last().unwrap(), "mean_mcd=0.00");

    let digits: String = common::FIXTURE_ORIGINAL[0].split(' ').collect();
    let o = run(&[
        "segment",
        &p("a.wav"),
        "--expected",
        "40",
        "--digits",
        &digits,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let truth = std::fs::read_to_string(p("a.wav.spans")).unwrap();
    let found = stdout(&o);
    assert_eq!(found.lines().count(), 40);
    for (f, t) in found.lines().zip(truth.lines()) {
        let f: Vec<i64> = f.split(',').map(|x| x.parse().unwrap()).collect();
        let t: Vec<i64> = t.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((f[0] - t[0]).abs() <= 80 && (f[1] - t[1]).abs() <= 80);
        assert_eq!(f[2], t[2]);
    }

    let o = run(&["plot-data", &p("a.wav"), "--out-prefix", &p("plot")]);
    assert!(o.status.success());
    assert!(d.join("plot.time.csv").exists() && d.join("plot.freq.csv").exists());
}

#[test]
fn missing_digit_exits_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let lib = tmp.path().join("corpus");
    corpus_dir(&lib);
    for f in std::fs::read_dir(&lib).unwrap() {
        let path = f.unwrap().path();
        if path
            .file_name()
            .unwrap()
            .to_str()
            .unwrap()
            .starts_with("3_")
        {
            std::fs::remove_file(path).unwrap();
        }
    }
    let o = run(&[
        "synthesize-code",
        "--library",
        lib.to_str().unwrap(),
        "--code",
        common::FIXTURE_ORIGINAL[0],
        "--out",
        tmp.path().join("x.wav").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert_eq!(stderr(&o).trim(), "error: MissingDigit(3)");
}

#[test]
fn simulate_with_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    corpus_dir(&tmp.path().join("corpus"));
    let cfg = tmp.path().join("baseline.toml");
    std::fs::write(
        &cfg,
        "seed = 4\n[victim]\nspeaker = \"evan\"\nname = \"Evan\"\nrequire_all_digits = true\n[corpus]\ndir = \"corpus\"\nnaming = \"fsdd\"\n",
    )
    .unwrap();
    let events = tmp.path().join("events.csv");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--events",
        events.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("success=true"), "{out}");
    assert!(out.ends_with("mean_mcd=0.00\n"));
    let log = std::fs::read_to_string(&events).unwrap();
    assert!(log.lines().any(|l| l.ends_with(",Verified,")));
    assert!(log.contains(",Chat,") && log.contains(",ScreenShare,"));

    let json = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--matrix",
        "--json",
    ]);
    let lines: Vec<serde_json::Value> = stdout(&json)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1]["failure_reason"], "Timeout");
    assert_eq!(lines[2]["failure_reason"], "OobMismatch");

    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "[victim]\nspeeker = \"x\"\n").unwrap();
    let o = run(&["simulate", "--config", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn event_logs_from_the_library_respect_transitions() {
    let out =
        ceremony_sim::attack::execute_attack(&common::baseline("fern"), common::corpus()).unwrap();
    assert!(log_respects_transitions(&out.timeline));
}

#[test]
fn report_writes_both_tables() {
    let tmp = tempfile::tempdir().unwrap();
    corpus_dir(&tmp.path().join("corpus"));
    let cfg = tmp.path().join("report.toml");
    std::fs::write(
        &cfg,
        "[victim]\nrequire_all_digits = true\n[corpus]\ndir = \"corpus\"\nspeakers = [\"adam\", \"beth\"]\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = run(&[
        "report",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(6) == Some("0.00")));
    assert!(out.join("report.txt").exists());

    let missing = run(&[
        "report",
        "--config",
        tmp.path().join("absent.toml").to_str().unwrap(),
    ]);
    assert!(!missing.status.success());
}

#[test]
fn baseline_event_log_matches_golden() {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/baseline.toml");
    let tmp = tempfile::tempdir().unwrap();
    let events = tmp.path().join("events.csv");
    let o = run(&[
        "simulate",
        "--config",
        cfg,
        "--events",
        events.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(events).unwrap(),
        include_str!("golden/baseline_events.csv")
    );
}
