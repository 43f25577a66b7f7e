use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const P1: &str = "b. c. a :- b, c.\n";
const GOLDEN: &str = "why a.truth\nhow rel:1\nwhy R1.used\nhow rel:2\nwhy b.truth\nhow rel:4\nwhy a.truth\n";

fn explainer(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_explainer"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    // commands that never read stdin may exit before the write lands
    let _ = child.stdin.take().unwrap().write_all(stdin.as_bytes());
    child.wait_with_output().unwrap()
}

fn file(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn prolog_dialogue_and_transcript() {
    let dir = TempDir::new().unwrap();
    let program = file(&dir, "p1.pl", P1);
    let transcript = dir.path().join("t.json");
    let out = explainer(&["explain-prolog", s(&program), "a", "--transcript", s(&transcript)], GOLDEN);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("output: a (Predicate): fact=false, text=\"a\", truth=true"));
    assert!(text.contains("This predicate is true because it is the head of this used rule"));
    assert!(text.contains("TrueBody: A rule is considered used when each element in body evaluated to True"));
    assert!(text.contains("nothing more explains a.truth"));
    assert!(text.contains("targets: b, c, a, R1 | rel:1, rel:2, rel:3, rel:4"));

    let turns: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&transcript).unwrap()).unwrap();
    assert_eq!(turns.len(), 8);
    let kinds: Vec<&str> = turns.iter().map(|t| t["answer_kind"].as_str().unwrap()).collect();
    assert_eq!(
        kinds,
        ["presentation", "tier", "models", "tier", "models", "tier", "models", "exhausted"]
    );
}

#[test]
fn transcripts_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let program = file(&dir, "p1.pl", P1);
    let strip = |path: &Path| {
        let mut turns: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        for t in &mut turns {
            t.as_object_mut().unwrap().remove("timestamp");
        }
        turns
    };
    let (t1, t2) = (dir.path().join("1.json"), dir.path().join("2.json"));
    let o1 = explainer(&["explain-prolog", s(&program), "a", "--transcript", s(&t1)], GOLDEN);
    let o2 = explainer(&["explain-prolog", s(&program), "a", "--transcript", s(&t2)], GOLDEN);
    assert_eq!(stdout(&o1), stdout(&o2));
    assert_eq!(strip(&t1), strip(&t2));
}

#[test]
fn prolog_exit_codes() {
    let dir = TempDir::new().unwrap();
    let program = file(&dir, "p1.pl", P1);
    let out = explainer(&["explain-prolog", s(&program), "d"], "");
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("d is not derivable"));

    let negated = file(&dir, "neg.pl", "b.\na :- \\+ b.\n");
    let out = explainer(&["explain-prolog", s(&negated), "a"], "");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("negation"), "{}", stderr(&out));

    let out = explainer(&["explain-prolog", "/nonexistent/p.pl", "a"], "");
    assert_eq!(out.status.code(), Some(2));
    let out = explainer(&["explain-prolog"], "");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seeded_network_presents_the_output() {
    let dir = TempDir::new().unwrap();
    let pixels: Vec<String> = (0..784).map(|i| format!("{}", (i % 10) as f64 / 10.0)).collect();
    let image = file(&dir, "img.json", &format!("[{}]", pixels.join(",")));
    let out = explainer(&["explain-nn", "--seed", "7", "--input", s(&image)], "why output.value\nhow rel:1\n");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("output: output (OutputAnswer): value="), "{text}");
    assert!(text.contains("OutputNeuronToOutputNetwork: n_2_0 -> output"));
    assert!(text.contains("Output generation: output = argmax({x_i^{2} ∀ i})"));
}

#[test]
fn network_input_errors() {
    let dir = TempDir::new().unwrap();
    let toy = r#"{"layer_sizes": [2, 2, 1], "activation": "relu",
        "weights": [[[1, 0], [0, 1]], [[1], [1]]], "biases": [[0, 0], [0]]}"#;
    let net = file(&dir, "toy.json", toy);
    let bad = file(&dir, "bad.csv", "1.0,2.0,3.0\n");
    let out = explainer(&["explain-nn", "--net", s(&net), "--input", s(&bad)], "");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("input has 3 values, the network expects 2"), "{}", stderr(&out));

    let good = file(&dir, "good.csv", "3,-2\n");
    let out = explainer(&["explain-nn", "--net", s(&net), "--input", s(&good)], "why output.value\n");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let broken = file(&dir, "broken.json", r#"{"layer_sizes": [2, 1], "weights": [[[1]]], "biases": [[0]]}"#);
    let out = explainer(&["explain-nn", "--net", s(&broken), "--input", s(&good)], "");
    assert_eq!(out.status.code(), Some(2));
    let out = explainer(&["explain-nn", "--input", s(&good)], "");
    assert_eq!(out.status.code(), Some(2), "a network source is required");
    let out = explainer(&["explain-nn", "--net", s(&net), "--layers", "2,1", "--input", s(&good)], "");
    assert_eq!(out.status.code(), Some(2), "--layers only applies to --seed");
}

#[test]
fn export_then_explore() {
    let dir = TempDir::new().unwrap();
    let program = file(&dir, "p1.pl", P1);
    let (d1, d2) = (dir.path().join("p1.json"), dir.path().join("again.json"));
    let out = explainer(&["explain-prolog", s(&program), "a", "--export", s(&d1)], "why a.truth\n");
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty(), "export must not open the dialogue");
    explainer(&["explain-prolog", s(&program), "a", "--export", s(&d2)], "");
    assert_eq!(std::fs::read(&d1).unwrap(), std::fs::read(&d2).unwrap());

    let out = explainer(&["explore", "--import", s(&d1)], GOLDEN);
    assert_eq!(out.status.code(), Some(0));
    let direct = explainer(&["explain-prolog", s(&program), "a"], GOLDEN);
    assert_eq!(stdout(&out), stdout(&direct));

    let out = explainer(&["explore", "--import", s(&d1), "--no-scope"], "why b.truth\n");
    assert!(stdout(&out).contains("FactToFact: b -> b"));

    let garbage = file(&dir, "garbage.json", "{\"version\": 1");
    let out = explainer(&["explore", "--import", s(&garbage)], "");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn serve_on_a_busy_port_fails() {
    let dir = TempDir::new().unwrap();
    let program = file(&dir, "p1.pl", P1);
    let doc = dir.path().join("p1.json");
    explainer(&["explain-prolog", s(&program), "a", "--export", s(&doc)], "");
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let out = explainer(&["serve", s(&doc), "--port", &port], "");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot bind"), "{}", stderr(&out));
}

#[test]
fn serve_lists_models() {
    let dir = TempDir::new().unwrap();
    let program = file(&dir, "p1.pl", P1);
    let doc = dir.path().join("p1.json");
    explainer(&["explain-prolog", s(&program), "a", "--export", s(&doc)], "");
    let mut child = Command::new(env!("CARGO_BIN_EXE_explainer"))
        .args(["serve", s(&doc), "--port", "0"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let banner = lines.next().unwrap().unwrap();
    let addr = banner.rsplit("http://").next().unwrap().trim().to_owned();

    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /models HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("\"name\":\"p1\""), "{response}");

    // one log line per request
    let logged = lines.next().unwrap().unwrap();
    assert!(logged.contains("GET /models 200"), "{logged}");
    child.kill().unwrap();
    child.wait().unwrap();
}
