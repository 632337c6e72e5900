use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const NAND: &str = "a INPUT\nb INPUT\ng NAND a b\nOUTPUT g\n";
const THREE_NAND: &str =
    "x1 INPUT\nx2 INPUT\nx3 INPUT\nx4 INPUT\na NAND x1 x2\nb NAND x3 x4\nout NAND a b\nOUTPUT out\n";

fn qnn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnn"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn compiled_three_nand_verifies_against_source() {
    let dir = TempDir::new().unwrap();
    write(&dir, "n3.txt", THREE_NAND);
    let o = qnn(&["compile", "--from", "nand", "--to", "qnn", "n3.txt", "-o", "n3.qnn"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = qnn(&["verify", "n3.txt", "n3.qnn"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("checked 16\n"));
    assert!(out.contains("mismatches 0\n"));
}

#[test]
fn nand_against_its_ec_form_and_itself() {
    let dir = TempDir::new().unwrap();
    write(&dir, "nand.txt", NAND);
    let o = qnn(&["compile", "--from", "nand", "--to", "ec", "nand.txt", "-o", "nand.ec"], dir.path());
    assert!(o.status.success());
    for other in ["nand.ec", "nand.txt"] {
        let o = qnn(&["verify", "nand.txt", other], dir.path());
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("checked 4\n"));
    }
}

#[test]
fn mismatch_exits_one_and_lists_inputs() {
    let dir = TempDir::new().unwrap();
    write(&dir, "nand.txt", NAND);
    write(&dir, "and.txt", "a INPUT\nb INPUT\nt TH 2 a b\nOUTPUT t\n");
    let o = qnn(&["verify", "nand.txt", "and.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("mismatches 4\n"));
    assert!(out.contains("mismatch input=11 left=0 right=1\n"));
}

#[test]
fn sampled_verification_reports_its_seed() {
    let dir = TempDir::new().unwrap();
    write(&dir, "n3.txt", THREE_NAND);
    let o = qnn(&["verify", "n3.txt", "n3.txt", "--samples", "7", "--seed", "42"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("mode sampled 7 seed 42\n"));
}

#[test]
fn parse_errors_exit_two_with_line() {
    let dir = TempDir::new().unwrap();
    write(&dir, "bad.txt", "a INPUT\nb INPUT\ng NAND a zz\nOUTPUT g\n");
    let o = qnn(&["compile", "--from", "nand", "--to", "ec", "bad.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = qnn(&["verify", "missing.txt", "bad.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn wrong_input_arity_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    write(&dir, "nand.txt", NAND);
    write(&dir, "n3.txt", THREE_NAND);
    assert_eq!(qnn(&["verify", "nand.txt", "n3.txt"], dir.path()).status.code(), Some(2));
    qnn(&["compile", "--from", "nand", "--to", "qnn", "nand.txt", "-o", "nand.qnn"], dir.path());
    let o = qnn(&["simulate", "nand.qnn", "--input", "101"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_modes_agree() {
    let dir = TempDir::new().unwrap();
    write(&dir, "nand.txt", NAND);
    qnn(&["compile", "--from", "nand", "--to", "qnn", "nand.txt", "-o", "nand.qnn"], dir.path());
    for (input, want) in [("00", "output 1\n"), ("01", "output 1\n"), ("10", "output 1\n"), ("11", "output 0\n")] {
        for mode in ["ideal", "ode"] {
            let o = qnn(&["simulate", "nand.qnn", "--input", input, "--d-mode", mode], dir.path());
            assert!(o.status.success());
            assert!(stdout(&o).contains(want), "{input} {mode}");
        }
    }
    let o = qnn(&["simulate", "nand.qnn", "--input", "11", "--trace", "--precision", "6"], dir.path());
    let out = stdout(&o);
    assert!(out.contains("layer level=1 "));
    assert!(out.contains("output 0\n"));
}

#[test]
fn encode_examples() {
    let dir = TempDir::new().unwrap();
    let o = qnn(&["encode", "1111"], dir.path());
    let out = stdout(&o);
    for i in 0..4 {
        assert!(out.contains(&format!("{i}\t5.0000000000000000e-1\t0.0000000000000000e0\n")));
    }
    assert!(out.ends_with("sink\t0.0000000000000000e0\n"));
    let out = stdout(&qnn(&["encode", "0000"], dir.path()));
    assert!(out.ends_with("# command: qnn encode 0000\nsink\t1.0000000000000000e0\n"));
    let out = stdout(&qnn(&["encode", "10", "--sink-qubit"], dir.path()));
    assert!(out.contains("\n0\t7.07106781186547"));
    assert!(out.contains("\n3\t7.07106781186547"));
    assert_eq!(qnn(&["encode", "101"], dir.path()).status.code(), Some(2));
}

#[test]
fn dgate_plan_table() {
    let dir = TempDir::new().unwrap();
    let o = qnn(
        &["dgate-plan", "--delta", "0.5", "--delta0", "0.25", "--delta1", "0.75", "--eps", "0.01", "--time", "1"],
        dir.path(),
    );
    assert!(o.status.success());
    let out = stdout(&o);
    let rate: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("rate "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((rate - 8.574).abs() < 1e-3);
    assert!(out.contains("a0,t,abs_a,implicit_lhs,exp_neg_rt\n"));
    assert_eq!(out.lines().filter(|l| l.matches(',').count() == 4).count(), 1 + 2 * 17);
    let bad = qnn(&["dgate-plan", "--delta", "0.5", "--delta0", "0.6", "--delta1", "0.75", "--eps", "0.01"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn outputs_are_reproducible_and_carry_headers() {
    let dir = TempDir::new().unwrap();
    write(&dir, "n3.txt", THREE_NAND);
    let args = ["compile", "--from", "nand", "--to", "qnn", "n3.txt", "-o", "out.qnn", "--report", "bounds.txt"];
    qnn(&args, dir.path());
    let first = fs::read(dir.path().join("out.qnn")).unwrap();
    qnn(&args, dir.path());
    assert_eq!(first, fs::read(dir.path().join("out.qnn")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with(&format!("# qnn-cli {}\n# command: qnn compile", env!("CARGO_PKG_VERSION"))));
    let bounds = fs::read_to_string(dir.path().join("bounds.txt")).unwrap();
    assert!(bounds.contains("output qubits=5 depth=4 layers=2\n"));
}

#[test]
fn json_exports_parse() {
    let dir = TempDir::new().unwrap();
    write(&dir, "nand.txt", NAND);
    let o = qnn(&["compile", "--from", "nand", "--to", "tc", "nand.txt", "--json"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["command"].as_str().unwrap().starts_with("qnn compile"));
    assert!(v["circuit"]["nodes"].is_array());
    qnn(&["compile", "--from", "nand", "--to", "qnn", "nand.txt", "-o", "nand.qnn"], dir.path());
    let o = qnn(&["simulate", "nand.qnn", "--input", "01", "--json", "--trace"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["simulation"]["output"], serde_json::Value::Bool(true));
    assert_eq!(v["simulation"]["layers"].as_array().unwrap().len(), 1);
    let o = qnn(&["verify", "nand.txt", "nand.qnn", "--json"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["checked"], 4);
}

#[test]
fn circuit_text_round_trips_through_compile() {
    let dir = TempDir::new().unwrap();
    write(&dir, "w.txt", "x INPUT\ny INPUT\none CONST1\ng WTH 2 (2:x) (-1:!y) (1:one)\nOUTPUT g\n");
    let o = qnn(&["compile", "--from", "wtc", "--to", "wtc", "w.txt"], dir.path());
    let body: String = stdout(&o).lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    assert_eq!(body, "x INPUT\ny INPUT\none CONST1\ng WTH 2 (2:x) (-1:!y) (1:one)\nOUTPUT g\n");
}
