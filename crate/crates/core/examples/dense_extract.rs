//! Many degree-3 vertices force many disjoint cycles, found without any dynamic program.
use udgpack::oracle::verify_solution;
use udgpack::structure::{clean, dense_extract, dense_factor, extract};
use udgpack::{GridMap, Point, UnitDiskGraph};

fn main() {
    let pts = (0..40 * 40).map(|i| Point::new((i % 40) as f64 * 0.9, (i / 40) as f64 * 0.9)).collect();
    let g = UnitDiskGraph::new(pts).unwrap();
    let g = clean(&g).graph;
    let factor = dense_factor(GridMap::build(&g).constants());
    let high = (0..g.n()).filter(|&v| g.degree(v) >= 3).count();
    let k = ((high as f64 / factor).ceil() as usize).saturating_sub(1).max(1);
    println!("{high} vertices of degree >= 3, factor {factor:.1}, largest k above the threshold {k}");
    match dense_extract(&g, k, None) {
        Some(ex) => println!("k={k}: {} cycles, valid {}", ex.cycles.len(), verify_solution(&g, &ex.cycles)),
        None => println!("k={k}: below the default threshold"),
    }
    let ex = extract(&g, 200);
    println!("extraction alone: {} cycles ({} faces, {} shortest)", ex.cycles.len(), ex.faces, ex.fallback);
}
