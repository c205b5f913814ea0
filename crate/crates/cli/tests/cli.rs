use std::io::Write;
use std::process::{Command, Output, Stdio};

use ffg::dsl::{coalgebra_from_json, coalgebra_to_json};
use serde_json::Value;

const NFA: &str = "p -> out 0 via a:{p,q} b:{}\nq -> out 1 via a:{} b:{q}\n";

fn ffg(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ffg"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn example_streams_are_equivalent() {
    let o = ffg(&["equiv", "(1,2,7,4)(1,3,2)^w", "(5,6)(0,4)^w"], "");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "mean 2 = mean 2");
}

#[test]
fn different_means_exit_one() {
    let o = ffg(&["equiv", "(1)(2)^w", "(1)(1)^w"], "");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "mean 2 != mean 1");
}

#[test]
fn constant_increment_solves_to_its_mean() {
    let o = ffg(&["solve", "-", "--backend", "stream"], "x = F[(2) next x]\n");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "x = 2/1");
}

#[test]
fn parameters_feed_solutions() {
    let src = "param P = (1)(3,0)^w\nx = F[(1) next y]\ny = param P\nz = param 5/2\n";
    let o = ffg(&["solve", "-", "--format", "json"], src);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["solution"]["x"], "3/2");
    assert_eq!(v["solution"]["y"], "3/2");
    assert_eq!(v["solution"]["z"], "5/2");
}

#[test]
fn stream_compositionality_holds() {
    let o = ffg(&["laws", "--axiom", "compositionality", "--backend", "stream", "--bound", "2"], "");
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PASS compositionality"));
}

#[test]
fn broken_solver_fails_with_a_counterexample() {
    let o = ffg(&["laws", "--axiom", "compositionality", "--backend", "broken", "--bound", "1"], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample: e = "));
}

#[test]
fn laws_are_reproducible_under_a_seed() {
    let args = ["laws", "--backend", "bisim", "--shape", "moore:a", "--bound", "1", "--seed", "7", "--format", "json"];
    let a = ffg(&args, "");
    let b = ffg(&args, "");
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn determinized_json_reads_back() {
    let o = ffg(&["determinize", "-", "--format", "json"], NFA);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = coalgebra_from_json(&v).unwrap();
    assert_eq!(c.len(), 4);
    assert_eq!(coalgebra_to_json(&c), v);
}

#[test]
fn determinized_text_and_dot() {
    let o = ffg(&["determinize", "-"], NFA);
    assert!(stdout(&o).contains("{p,q} -> out 1 via a:{p,q} b:{q}"));
    let o = ffg(&["determinize", "-", "--format", "dot"], NFA);
    assert!(stdout(&o).starts_with("digraph"));
}

#[test]
fn language_of_a_state() {
    let o = ffg(&["language", "-", "{q}", "--length", "3"], NFA);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("words up to length 3: ε b bb bbb"));
}

#[test]
fn bisim_equivalence_reports_a_word() {
    let dir = std::env::temp_dir().join(format!("ffg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("nfa.txt");
    std::fs::write(&path, format!("{NFA}r -> out 0 via a:{{p,q}} b:{{}}\n")).unwrap();
    let path = path.to_str().unwrap();
    let o = ffg(&["equiv", "--backend", "bisim", "--input", path, "{p}", "{r}"], "");
    assert_eq!(o.status.code(), Some(0));
    let o = ffg(&["equiv", "--backend", "bisim", "--input", path, "{p}", "{p,q}"], "");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "inequivalent: after ε the outputs are 0 and 1");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn zigzag_between_example_streams() {
    let o = ffg(&["zigzag", "(1)(2)^w", "(3)(2)^w"], "");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("prefix 1, period 1"));
    let o = ffg(&["zigzag", "(1)(2)^w", "(3)(1)^w"], "");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn parse_errors_exit_two_with_position() {
    let o = ffg(&["solve", "-"], "x = F[(2) next y]\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1, column 16"), "{}", stderr(&o));
}

#[test]
fn unsupported_instances_exit_three() {
    let o = ffg(&["determinize", "-", "--variety", "unary", "--shape", "id"], "x -> +1 x\n");
    assert_eq!(o.status.code(), Some(3));
    let o = ffg(&["zigzag", "--backend", "bisim", "{p}", "{q}"], "");
    assert_eq!(o.status.code(), Some(3));
}
