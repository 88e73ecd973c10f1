//! Surface decomposition of the contracted sparsifier, with its stopping rules.
use std::collections::BTreeMap;
use udgpack::gen::{udg, Layout};
use udgpack::sc::{decompose, ScConfig};

fn main() {
    let g = udg(Layout::Uniform, 300, 10.0, 2);
    let b = decompose(&g, &ScConfig::default()).unwrap();
    let sd = b.surface.expect("graph has cycles");
    sd.check().unwrap();
    let mut rules = BTreeMap::new();
    for node in &sd.nodes {
        *rules.entry(format!("{:?}", node.rule)).or_insert(0) += 1;
    }
    println!("{} nodes, width {:.2}, depth {}", sd.nodes.len(), sd.width(), sd.depth());
    println!("rules {rules:?}");
}
