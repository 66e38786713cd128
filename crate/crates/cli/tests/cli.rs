use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn gvfa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gvfa")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        let files = Self { dir: TempDir::new().unwrap() };
        files.write("A", "2 2\n2 3\n3 4\n");
        files.write("B", "2 2\n1 -6\n1 6\n");
        files.write("C", "2 2\n5 6\n7 6\n");
        files.write("Cp", "2 2\n6 5\n6 7\n");
        files
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_owned()
    }

    fn write(&self, name: &str, text: &str) {
        std::fs::write(self.path(name), text).unwrap();
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }
}

fn verify_files(f: &Files, c: &str, extra: &[&str]) -> Output {
    let (a, b, c) = (f.arg("A"), f.arg("B"), f.arg(c));
    let mut args = vec!["verify", "--a", &a, "--b", &b, "--c", &c];
    args.extend_from_slice(extra);
    gvfa(&args)
}

#[test]
fn correct_triple_is_accepted() {
    let f = Files::new();
    let out = verify_files(&f, "C", &["--method", "gvfa", "--k", "1", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).starts_with("accepted"));
}

#[test]
fn checksum_scheme_accepts_the_swap_with_a_note() {
    let f = Files::new();
    let out = verify_files(&f, "Cp", &["--method", "huang-abraham"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("cannot detect"));
    let out = verify_files(&f, "Cp", &["--method", "huang-abraham", "--output", "json"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["note"].is_string());
}

#[test]
fn gvfa_rejects_the_swap() {
    let f = Files::new();
    for method in ["gvfa", "poly", "gvfa-rowcol", "chain"] {
        let out = verify_files(&f, "Cp", &["--method", method]);
        assert_eq!(code(&out), 1, "{method}");
    }
    let out = gvfa(&["verify", "--fixture", "paper2x2", "--c", &f.arg("Cp")]);
    assert_eq!(code(&out), 1);
    let out = gvfa(&["verify", "--fixture", "paper2x2"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn text_and_json_decisions_agree() {
    let f = Files::new();
    for c in ["C", "Cp"] {
        for method in ["gvfa", "freivalds", "gvfa-rowcol", "huang-abraham"] {
            let text = verify_files(&f, c, &["--method", method, "--k", "3"]);
            let js = verify_files(&f, c, &["--method", method, "--k", "3", "--output", "json"]);
            assert_eq!(code(&text), code(&js));
            assert_eq!(json(&js)["verdict"]["accepted"].as_bool().unwrap(), code(&text) == 0);
        }
    }
}

#[test]
fn rowcol_reports_localization() {
    let f = Files::new();
    f.write("Cbad", "2 2\n5 6\n7 6.5\n");
    let out = verify_files(&f, "Cbad", &["--method", "gvfa-rowcol", "--output", "json"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["localization"]["implicated_cells"], serde_json::json!([[1, 1]]));
}

#[test]
fn chain_files_are_verified() {
    let f = Files::new();
    f.write("I", "2 2\n1 0\n0 1\n");
    let (a, i, b, c) = (f.arg("A"), f.arg("I"), f.arg("B"), f.arg("C"));
    let out = gvfa(&["verify", "--method", "chain", "--chain", &a, &i, &b, "--c", &c]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = gvfa(&["verify", "--method", "gvfa", "--chain", &a, &i, &b, "--c", &c]);
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_input_exits_2_with_position() {
    let f = Files::new();
    f.write("bad", "2 2\n1 2\n3 oops\n");
    let (bad, b, c) = (f.arg("bad"), f.arg("B"), f.arg("C"));
    let out = gvfa(&["verify", "--a", &bad, "--b", &b, "--c", &c]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("column 3"), "{err}");

    let out = gvfa(&["verify", "--a", &f.arg("A"), "--b", &b, "--c", &f.arg("missing")]);
    assert_eq!(code(&out), 2);
    f.write("wide", "2 3\n1 2 3\n4 5 6\n");
    let out = gvfa(&["verify", "--a", &f.arg("A"), "--b", &b, "--c", &f.arg("wide")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_2() {
    let f = Files::new();
    let (a, b, c) = (f.arg("A"), f.arg("B"), f.arg("C"));
    assert_eq!(code(&gvfa(&["verify", "--a", &a, "--b", &b, "--chain", &a, &b, "--c", &c])), 2);
    assert_eq!(code(&gvfa(&["verify", "--bogus"])), 2);
    assert_eq!(code(&gvfa(&["verify", "--method", "nope", "--fixture", "paper2x2"])), 2);
    assert_eq!(code(&gvfa(&["verify", "--fixture", "paper2x2", "--tolerance", "abc"])), 2);
    assert_eq!(code(&gvfa(&["verify", "--fixture", "paper2x2", "--k", "0"])), 2);
}

#[test]
fn absolute_tolerance_literal() {
    let out = gvfa(&["verify", "--fixture", "paper2x2", "--tolerance", "1e-6", "--output", "json"]);
    assert_eq!(code(&out), 0);
    let tol = &json(&out)["verdict"]["tolerances"][0];
    assert_eq!(tol, &serde_json::json!([1e-6, 1e-6]));
}

#[test]
fn inject_swaps_columns() {
    let f = Files::new();
    let out = gvfa(&["inject", "--c", &f.arg("C"), "--fault", "colswap:0,1", "--out", &f.arg("out")]);
    assert_eq!(code(&out), 0);
    assert_eq!(f.read("out"), f.read("Cp"));
}

#[test]
fn bitflip_twice_restores_the_file() {
    let f = Files::new();
    f.write("M", "2 2\n0.1 -2.5e-300\n3 1e300\n");
    for (src, dst) in [("M", "M1"), ("M1", "M2")] {
        let out = gvfa(&["inject", "--c", &f.arg(src), "--fault", "bitflip:0,0,0", "--out", &f.arg(dst)]);
        assert_eq!(code(&out), 0);
    }
    assert_ne!(f.read("M1"), f.read("M"));
    assert_eq!(f.read("M2"), f.read("M"));
}

#[test]
fn neutral_injection_exits_3() {
    let f = Files::new();
    f.write("same", "2 2\n1 1\n2 2\n");
    let out = gvfa(&["inject", "--c", &f.arg("same"), "--fault", "colswap:0,1", "--output", "json"]);
    assert_eq!(code(&out), 3);
    assert_eq!(stdout(&out), "2 2\n1 1\n2 2\n");
    let status: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(status["neutral"], true);
}

#[test]
fn bad_fault_grammar_exits_2() {
    let f = Files::new();
    for fault in ["colswap:0", "swap:0,1", "element:0,0,nan", "element:5,0,1", "bitflip:0,0,64"] {
        let out = gvfa(&["inject", "--c", &f.arg("C"), "--fault", fault]);
        assert_eq!(code(&out), 2, "{fault}");
    }
}

#[test]
fn inject_adversarial_generator() {
    let f = Files::new();
    let out =
        gvfa(&["inject", "--c", &f.arg("C"), "--fault", "adversarial-paired-columns:0,1,0.5", "--out", &f.arg("adv")]);
    assert_eq!(code(&out), 0);
    assert_eq!(f.read("adv"), "2 2\n4.5 6.5\n6.5 6.5\n");
}

#[test]
fn experiment_reports_json() {
    let out = gvfa(&[
        "experiment",
        "--method",
        "freivalds",
        "--fault",
        "adversarial-paired-columns",
        "--n",
        "8",
        "--trials",
        "20000",
        "--k",
        "1",
        "--seed",
        "42",
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    let rate = r["empirical_fp_rate"].as_f64().unwrap();
    assert!((rate - 0.5).abs() < 0.015, "{rate}");
    assert_eq!(r["seed"], 42);
    let sum =
        ["false_positives", "detections", "neutral_injections"].iter().map(|k| r[k].as_u64().unwrap()).sum::<u64>();
    assert_eq!(sum, 20000);
}

#[test]
fn experiment_on_the_fixture() {
    let out = gvfa(&[
        "experiment",
        "--method",
        "gvfa",
        "--fault",
        "colswap:0,1",
        "--fixture",
        "paper2x2",
        "--trials",
        "20000",
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["false_positives"], 0);
    assert_eq!(r["n"], 2);
    let out = gvfa(&[
        "experiment",
        "--method",
        "huang-abraham",
        "--fault",
        "colswap:0,1",
        "--fixture",
        "paper2x2",
        "--trials",
        "1",
    ]);
    assert_eq!(json(&out)["false_positives"], 1);
}

#[test]
fn experiment_sweep_is_an_array() {
    let out = gvfa(&["experiment", "--n", "8", "--trials", "200", "--sweep", "0,1000", "--k", "2"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    let reports = r.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["detections"], 0);
    assert_eq!(reports[1]["detections"], 200);
}

#[test]
fn experiment_config_errors_exit_2() {
    assert_eq!(code(&gvfa(&["experiment", "--trials", "0"])), 2);
    assert_eq!(code(&gvfa(&["experiment", "--n", "0"])), 2);
    assert_eq!(code(&gvfa(&["experiment", "--fault", "rowswap:0,9", "--n", "4", "--trials", "3"])), 2);
    assert_eq!(code(&gvfa(&["experiment", "--sweep", "10,1", "--n", "4"])), 2);
}

#[test]
fn bound_from_delta_file() {
    let f = Files::new();
    f.write("D", "2 2\n-1 1\n1 -1\n");
    let out = gvfa(&["bound", "--delta", &f.arg("D"), "--epsilon", "1e-12", "--k", "2"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["sigma_tilde"].as_f64().unwrap(), std::f64::consts::SQRT_2);
    let p = r["bound_dependent"].as_f64().unwrap();
    assert!((p - 5.64e-13).abs() < 0.01e-13);
    assert_eq!(r["bound_iterated"].as_f64().unwrap(), p * p);
}

#[test]
fn bound_of_zero_delta_is_degenerate() {
    let f = Files::new();
    f.write("Z", "2 2\n0 0\n0 0\n");
    let out = gvfa(&["bound", "--delta", &f.arg("Z"), "--epsilon", "1e-12"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["degenerate"], true);
    assert_eq!(r["bound_dependent"], 1.0);
}

#[test]
fn bound_from_triple_uses_the_tolerance_scale() {
    let f = Files::new();
    let out = gvfa(&["bound", "--a", &f.arg("A"), "--b", &f.arg("B"), "--c", &f.arg("Cp")]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert!(r["epsilon"].as_f64().unwrap() > 0.0);
    assert!(r["bound_dependent"].as_f64().unwrap() < 1e-12);
    assert_eq!(code(&gvfa(&["bound", "--delta", &f.arg("A")])), 2);
    assert_eq!(code(&gvfa(&["bound", "--delta", &f.arg("A"), "--epsilon", "0"])), 2);
}

#[test]
fn written_matrices_round_trip() {
    let f = Files::new();
    let text = "3 2\n0.1 -0\n1e-300 12345678901234567\n5e-324 -1.7976931348623157e308\n";
    f.write("R", text);
    let out = gvfa(&["inject", "--c", &f.arg("R"), "--fault", "element:0,0,1", "--out", &f.arg("R1")]);
    assert_eq!(code(&out), 0);
    let out = gvfa(&["inject", "--c", &f.arg("R1"), "--fault", "element:0,0,-1", "--out", &f.arg("R2")]);
    assert_eq!(code(&out), 0);
    let read = |name: &str| gvfa_core::DenseMatrix::load(Path::new(&f.path(name))).unwrap();
    assert!(read("R").bitwise_eq(&gvfa_core::DenseMatrix::parse_text(&f.read("R")).unwrap()));
    assert_eq!(read("R1").get(1, 1), read("R").get(1, 1));
}
