//! Crossing edges of a unit disk graph always close a triangle on three of their endpoints.
use udgpack::gen::{udg, Layout};
use udgpack::{Point, UnitDiskGraph};

fn main() {
    for seed in 0..5 {
        let g = udg(Layout::Clustered, 120, 6.0, seed);
        let (ok, _) = g.check_icf();
        println!("seed {seed}: {} crossings, icf {ok}", g.find_crossings().len());
    }
    // a drawing that is not a unit disk graph: two long crossing edges, nothing else
    let pts = vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0), Point::new(1.5, -1.0), Point::new(1.5, 1.0)];
    let g = UnitDiskGraph::from_drawing(pts, &[(0, 1), (2, 3)]);
    let (ok, bad) = g.check_icf();
    println!("abstract drawing: icf {ok}, witness at {:?}", bad.first().map(|c| c.point));
}
