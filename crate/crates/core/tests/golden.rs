use std::path::PathBuf;

use sdglab_core::instances::{gen_c3, gen_chain_metric, gen_line_graph, gen_star_metric, read_instance, InstanceBundle};

fn golden(name: &str) -> InstanceBundle {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "instances", name].iter().collect();
    read_instance(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn star_5() {
    assert_eq!(golden("star_5.json"), gen_star_metric(5).unwrap());
}

#[test]
fn chain_5() {
    assert_eq!(golden("chain_5.json"), gen_chain_metric(5).unwrap());
}

#[test]
fn c3_1000() {
    assert_eq!(golden("c3_1000.json"), gen_c3(1000.0).unwrap());
}

#[test]
fn line_5() {
    assert_eq!(golden("line_5.json"), gen_line_graph(5, 1000.0, 1e-4).unwrap());
}

#[test]
fn every_fixed_family_carries_references() {
    for name in ["star_5.json", "chain_5.json", "c3_1000.json", "line_5.json"] {
        assert!(!golden(name).reference.is_empty(), "{name}");
    }
}
