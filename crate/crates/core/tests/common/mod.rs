//! Helpers shared by the integration tests.

#![allow(dead_code)]

use std::process::{Command, Output};
use trident::triangle::{classify, Curvature, TriangleTriple};

pub fn tt(a: u64, b: u64, c: u64) -> TriangleTriple {
    TriangleTriple::finite(a, b, c).unwrap()
}

pub fn hyperbolic(a: u64, b: u64, c: u64) -> Option<TriangleTriple> {
    let t = tt(a, b, c);
    (classify(&t) == Curvature::Hyperbolic).then_some(t)
}

/// Runs the `trident` binary.
pub fn trident(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trident")).args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).expect("JSON error on stderr")
}
