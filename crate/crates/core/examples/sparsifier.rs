//! The planar sparsifier H of a unit disk graph and its contraction H3.
use udgpack::gen::{udg, Layout};
use udgpack::sparsifier::{build_sparsifier, contract_to_h3, h_weights};
use udgpack::GridMap;

fn main() {
    let g = udg(Layout::Uniform, 150, 8.0, 11);
    let map = GridMap::build(&g);
    let h = build_sparsifier(&g, &map);
    let h3 = contract_to_h3(&h);
    let w = h_weights(&h, &map);
    println!("G: n={} m={} degree>=3: {}", g.n(), g.m(), h.ell);
    println!("H: {} vertices, {} edges, {} crossing vertices", h.n(), h.edges.len(), h.crossings());
    println!("H3: {} vertices, {} edges; realized {} vertices", h3.h3.n, h3.h3.edges.len(), h3.graph.n);
    println!("pendant curves removed: {}", h3.forbidden.len());
    println!("max weight {:.2}", w.iter().cloned().fold(0.0, f64::max));
}
