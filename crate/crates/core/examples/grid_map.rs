//! Cells of side 1/sqrt(2), their clique weights, and the map constants.
use udgpack::gen::{udg, Layout};
use udgpack::GridMap;

fn main() {
    let g = udg(Layout::Clustered, 200, 8.0, 3);
    let map = GridMap::build(&g);
    let c = map.constants();
    println!("side {:.4}, alpha {} beta {} kappa {}", map.side, c.alpha, c.beta, c.kappa);
    println!("occupied cells {}, total clique weight {:.2}", map.stats().len(), map.total_weight());
    let mut stats = map.stats();
    stats.sort_by(|a, b| b.count.cmp(&a.count));
    for s in stats.iter().take(5) {
        println!("  cell {:?}: {} vertices, weight {:.3}", s.cell, s.count, s.clique_weight);
    }
}
