//! The shipped `.qnl` corpus parses, round-trips through the pretty
//! printer, and executes to the same distributions as the programmatic
//! machine builder.

use std::fs;
use std::path::PathBuf;

use num_complex::Complex64 as C64;

use dualrail::machine::{build_machine, MachineConfig, OracleSelector};
use dualrail::netlist;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../netlists")
}

fn read(name: &str) -> String {
    let path = corpus_dir().join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {path:?}: {e}"))
}

fn config(k: &str) -> MachineConfig {
    MachineConfig::new(OracleSelector::parse(k).unwrap())
}

#[test]
fn corpus_is_complete() {
    let mut names: Vec<String> = fs::read_dir(corpus_dir())
        .expect("netlists directory")
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".qnl"))
        .collect();
    names.sort();
    assert!(names.len() >= 7, "corpus has only {} files", names.len());
    for required in [
        "classical_k10.qnl",
        "deutsch_k00.qnl",
        "deutsch_k01.qnl",
        "deutsch_k10.qnl",
        "deutsch_k11.qnl",
        "fig5a.qnl",
        "fig5b.qnl",
    ] {
        assert!(names.iter().any(|n| n == required), "missing {required}");
    }
}

#[test]
fn corpus_parses_and_round_trips() {
    for entry in fs::read_dir(corpus_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("qnl") {
            continue;
        }
        let text = fs::read_to_string(&path).unwrap();
        let program = netlist::parse(&text)
            .unwrap_or_else(|e| panic!("{} does not parse: {e}", path.display()));
        let printed = program.to_string();
        let reparsed = netlist::parse(&printed)
            .unwrap_or_else(|e| panic!("{} does not round-trip: {e}", path.display()));
        assert_eq!(program, reparsed, "{} round trip differs", path.display());
    }
}

#[test]
fn deutsch_files_match_builder_with_s() {
    for k in ["00", "01", "10", "11"] {
        let text = read(&format!("deutsch_k{k}.qnl"));
        let netlist_dist = netlist::parse(&text)
            .unwrap()
            .execute()
            .unwrap()
            .distribution
            .unwrap();
        let builder_dist = build_machine(&config(k)).unwrap().measure().unwrap();
        assert!(
            netlist_dist.max_divergence(&builder_dist) < 1e-12,
            "k = {k} netlist and builder disagree"
        );
    }
}

#[test]
fn deutsch_files_match_builder_without_s() {
    // removing the S line turns the machine into the identity
    for k in ["00", "01", "10", "11"] {
        let text = read(&format!("deutsch_k{k}.qnl"));
        let stripped: String = text
            .lines()
            .filter(|l| !l.trim_start().starts_with("phase a pi"))
            .map(|l| format!("{l}\n"))
            .collect();
        let netlist_dist = netlist::parse(&stripped)
            .unwrap()
            .execute()
            .unwrap()
            .distribution
            .unwrap();
        let builder_dist = build_machine(&config(k).with_s(false))
            .unwrap()
            .measure()
            .unwrap();
        assert!(
            netlist_dist.max_divergence(&builder_dist) < 1e-12,
            "k = {k} netlist (S removed) and builder disagree"
        );
        assert!((netlist_dist.prob(&[0, 1, 0, 1]) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fig5a_reduces_to_the_full_machine() {
    let reduced = netlist::parse(&read("fig5a.qnl"))
        .unwrap()
        .execute()
        .unwrap()
        .distribution
        .unwrap();
    let full = build_machine(&config("10")).unwrap().measure().unwrap();
    assert!(reduced.max_divergence(&full) < 1e-12);
    assert!((reduced.prob(&[0, 1, 1, 0]) - 1.0).abs() < 1e-12);
}

#[test]
fn fig5b_returns_the_input() {
    let dist = netlist::parse(&read("fig5b.qnl"))
        .unwrap()
        .execute()
        .unwrap()
        .distribution
        .unwrap();
    assert!((dist.prob(&[0, 1, 0, 1]) - 1.0).abs() < 1e-12);
    let full = build_machine(&config("10").with_s(false))
        .unwrap()
        .measure()
        .unwrap();
    assert!(dist.max_divergence(&full) < 1e-12);
}

#[test]
fn classical_file_matches_coherent_builder() {
    let netlist_dist = netlist::parse(&read("classical_k10.qnl"))
        .unwrap()
        .execute()
        .unwrap()
        .distribution
        .unwrap();
    let builder_dist = build_machine(&config("10").coherent(C64::new(1.0, 0.0), 16))
        .unwrap()
        .measure()
        .unwrap();
    assert!(netlist_dist.max_divergence(&builder_dist) < 1e-12);
}

#[test]
fn adjoint_wrapped_second_pass_is_identical() {
    let plain = netlist::parse(&read("deutsch_k10.qnl"))
        .unwrap()
        .execute()
        .unwrap()
        .distribution
        .unwrap();
    let wrapped = "\
modes 4
cutoff 2
state fock 0 1 0 1
bs c d
bs a b
kerr b c pi
bs a b -pi/4
phase a pi
adjoint {
  bs a b
  kerr b c pi
  bs a b -pi/4
}
bs c d -pi/4
measure
";
    let dist = netlist::parse(wrapped)
        .unwrap()
        .execute()
        .unwrap()
        .distribution
        .unwrap();
    assert!(dist.max_divergence(&plain) < 1e-12);
}
