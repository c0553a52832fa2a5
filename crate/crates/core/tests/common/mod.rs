//! Shared test support: a seeded generator of small loop-bounded programs and
//! corpus loading.
#![allow(dead_code)]

pub mod suites;

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GLOBALS: [&str; 3] = ["x", "y", "z"];

fn stmt(rng: &mut ChaCha8Rng, globals: &[&str], has_local: bool, depth: usize) -> String {
    let g = *globals.choose(rng).unwrap();
    let h = *globals.choose(rng).unwrap();
    let k: i64 = rng.gen_range(0..3);
    let pick = rng.gen_range(0..if has_local { 14 } else { 8 });
    match pick {
        0 => format!("{g} = {k};"),
        1 => format!("{g} = {g} + 1;"),
        2 => format!("{g} = {h};"),
        3 => format!("assume({g} <= {});", k + 1),
        4 => format!("assert({g} <= {});", k + 2),
        5 if depth == 0 => format!(
            "if ({g} == {k}) {{ {} }}",
            stmt(rng, globals, has_local, depth + 1)
        ),
        5 | 6 => format!("{g} = {h} + {k};"),
        7 => format!("assume({g} != {k});"),
        8 => format!("l = {g};"),
        9 => format!("{g} = l;"),
        10 => "l = l + 1;".to_string(),
        11 => "havoc(l, 0, 1);".to_string(),
        12 if depth == 0 => format!(
            "if (l == 0) {{ {} }} else {{ {} }}",
            stmt(rng, globals, has_local, depth + 1),
            stmt(rng, globals, has_local, depth + 1)
        ),
        12 => "l = l + 1;".to_string(),
        _ if depth == 0 => format!("while (l < 2) {{ l = l + 1; {} }}", stmt(rng, globals, has_local, depth + 1)),
        _ => "havoc(l, 0, 1);".to_string(),
    }
}

/// A 2- or 3-thread program over at most three globals. Every loop is
/// bounded by a thread-local counter, so all reachable sets are finite.
pub fn random_program(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ng = rng.gen_range(1..=3);
    let globals = &GLOBALS[..ng];
    let mut src = String::new();
    for g in globals {
        src.push_str(&format!("global {g} = {};\n", rng.gen_range(0..2)));
    }
    for t in 0..rng.gen_range(2..=3) {
        let has_local = rng.gen_bool(0.5);
        src.push_str(&format!("thread t{t} {{\n"));
        if has_local {
            src.push_str("    local l = 0;\n");
        }
        for _ in 0..rng.gen_range(1..=3) {
            src.push_str("    ");
            src.push_str(&stmt(&mut rng, globals, has_local, 0));
            src.push('\n');
        }
        src.push_str("}\n");
    }
    src
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// `(name, source)` of every bundled corpus program, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "prog"))
        .map(|p| {
            (
                p.file_stem().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}
