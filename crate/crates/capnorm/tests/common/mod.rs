//! Helpers shared by the integration tests.
#![allow(dead_code)]

use capnorm::ingest::parse_transcript;
use capnorm::tower::TowerData;

pub fn fixture_path(rel: &str) -> String {
    format!("{}/fixtures/{rel}", env!("CARGO_MANIFEST_DIR"))
}

pub fn read_fixture(rel: &str) -> String {
    let path = fixture_path(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn transcript(name: &str) -> TowerData {
    parse_transcript(&read_fixture(&format!("transcripts/{name}.txt"))).unwrap()
}

/// What a printed block claims: the polynomial, the headers and the `(A, B)` pairs, in order.
pub struct Printed {
    pub polys: Vec<String>,
    pub headers: Vec<String>,
    pub pairs: Vec<(String, String)>,
}

fn is_header(tok: &str) -> bool {
    tok.starts_with("P=x^") && tok.ends_with(".B") && tok.contains(".A+p^")
}

/// Reads a printed block. Continuation lines start with `+`; decompositions
/// may be laid out side by side, so tokens are read row by row.
pub fn read_printed(text: &str) -> Printed {
    let mut lines: Vec<String> = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.starts_with('+') {
            lines.last_mut().expect("continuation after a line").push_str(t);
        } else if !t.is_empty() {
            lines.push(t.to_string());
        }
    }
    let mut out = Printed { polys: vec![], headers: vec![], pairs: vec![] };
    for line in &lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.first() == Some(&"Case") {
            if let Some(p) = toks.iter().find(|t| t.starts_with("P=")) {
                out.polys.push(p.trim_end_matches('$').to_string());
            }
            continue;
        }
        let mut i = 0;
        while i < toks.len() {
            let t = toks[i];
            if is_header(t) {
                out.headers.push(t.to_string());
            } else if t.starts_with("P=") {
                out.polys.push(t.to_string());
            } else if t.starts_with("A=") {
                let b = toks.get(i + 1).expect("B= follows A=");
                assert!(b.starts_with("B="), "unpaired {t}");
                out.pairs.push((t.to_string(), b.to_string()));
                i += 1;
            } else {
                panic!("unexpected token {t}");
            }
            i += 1;
        }
    }
    out
}
