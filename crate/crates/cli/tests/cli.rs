use std::path::Path;
use std::process::{Command, Output};

fn cpslint(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpslint")).current_dir(dir).args(args).output().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn fixture_inspect_and_run_with_the_interpreter() {
    let dir = tempfile::tempdir().unwrap();
    ok(&cpslint(dir.path(), &["fixture", "--rows", "500", "--seed", "42", "--out", "trace.csv"]));
    ok(&cpslint(dir.path(), &["inspect", "trace.csv"]));
    let baseline = std::fs::read_to_string(dir.path().join("trace.cps")).unwrap();
    assert!(baseline.contains("'Voltage' is 'Voltage' as real"));

    std::fs::write(dir.path().join("config.yaml"), "input_dir: .\noutput_dir: clean\npipeline: interpreter\n").unwrap();
    let out = cpslint(dir.path(), &["run", "trace.cps"]);
    ok(&out);
    let clean = dir.path().join("clean/trace_clean.csv");
    assert_eq!(lines(&clean), lines(&dir.path().join("trace.csv")));
    assert!(String::from_utf8_lossy(&out.stdout).contains("trace_clean.csv"));
}

#[test]
fn inspect_honours_an_explicit_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.csv"), "A,B\n1,x\n").unwrap();
    ok(&cpslint(dir.path(), &["inspect", "t.csv", "--out", "mine.cps"]));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("mine.cps")).unwrap(),
        "import csv from 't.csv';\nexport csv\n    'A' is 'A' as int,\n    'B' is 'B' as str\n    to 't_clean.csv';\n"
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.yaml"), "input_dir: .\noutput_dir: out\npipeline: interpreter\n").unwrap();
    std::fs::write(dir.path().join("broken.cps"), "import csv from 'x.csv'\nexport").unwrap();
    let out = cpslint(dir.path(), &["run", "broken.cps"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.cps:2:1"), "{}", String::from_utf8_lossy(&out.stderr));

    std::fs::write(dir.path().join("missing.cps"), "import csv from 'x.csv'; export csv 'A' is 'A' to 'o.csv';").unwrap();
    assert_eq!(cpslint(dir.path(), &["run", "missing.cps"]).status.code(), Some(1));

    std::fs::write(dir.path().join("bad.yaml"), "input_dir: .\noutput_dir: out\npipeline: banana\n").unwrap();
    let out = cpslint(dir.path(), &["run", "missing.cps", "--config", "bad.yaml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("allowed: compiler, interpreter"));
}

#[test]
fn gen_writes_a_script_without_running_it() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.yaml"), "input_dir: in\noutput_dir: out\npython_cmd: python3\npipeline: compiler\n").unwrap();
    std::fs::write(dir.path().join("p.cps"), "import csv from 'x.csv'; export csv 'A' is 'A' as real in [0.0, 1.0] to 'o.csv';").unwrap();
    ok(&cpslint(dir.path(), &["gen", "p.cps", "--out", "p.py"]));
    let script = std::fs::read_to_string(dir.path().join("p.py")).unwrap();
    assert!(script.contains("# restrict 'A' to [0.0, 1.0]"));
    assert!(!dir.path().join("out/o.csv").exists());
}

#[test]
fn corrupt_is_deterministic_and_named_after_the_kind() {
    let dir = tempfile::tempdir().unwrap();
    ok(&cpslint(dir.path(), &["fixture", "--rows", "10000", "--out", "ref.csv"]));
    ok(&cpslint(dir.path(), &["corrupt", "ref.csv", "--kind", "out-of-bounds", "--seed", "7"]));
    let first = std::fs::read(dir.path().join("ref.out-of-bounds.csv")).unwrap();
    ok(&cpslint(dir.path(), &["corrupt", "ref.csv", "--kind", "out-of-bounds", "--seed", "7"]));
    assert_eq!(first, std::fs::read(dir.path().join("ref.out-of-bounds.csv")).unwrap());

    ok(&cpslint(dir.path(), &["corrupt", "ref.csv", "--kind", "missing-rows", "--rate", "0.005", "--block", "10", "--out", "gone.csv"]));
    assert_eq!(lines(&dir.path().join("gone.csv")).len() - 1, 9950);

    let out = cpslint(dir.path(), &["corrupt", "ref.csv", "--kind", "sideways"]);
    assert!(!out.status.success());
}

#[test]
fn targeted_type_mismatch_prefers_blocks_with_the_message() {
    let dir = tempfile::tempdir().unwrap();
    ok(&cpslint(dir.path(), &["fixture", "--rows", "10000", "--out", "ref.csv"]));
    let reference = lines(&dir.path().join("ref.csv"));
    let targeted_base_rate = reference.iter().filter(|l| l.ends_with(",image loader")).count() as f64 / 1000.0;
    let mut hits = 0;
    let mut blocks = 0;
    for seed in ["1", "2", "3", "4", "5"] {
        ok(&cpslint(dir.path(), &[
            "corrupt", "ref.csv", "--kind", "type-mismatch", "--uart-target", "image loader", "--seed", seed, "--out", "t.csv",
        ]));
        let corrupted = lines(&dir.path().join("t.csv"));
        for block in 0..1000 {
            let rows = 1 + block * 10..1 + (block + 1) * 10;
            if rows.clone().any(|r| corrupted[r] != reference[r]) {
                blocks += 1;
                if rows.clone().any(|r| reference[r].ends_with(",image loader")) {
                    hits += 1;
                }
            }
        }
    }
    assert_eq!(blocks, 25);
    assert!(hits as f64 / blocks as f64 > 10.0 * targeted_base_rate, "{hits}/{blocks} vs base {targeted_base_rate}");
}
