//! Generate a seeded point set, pack cycles, and verify the packing.
use udgpack::gen::{udg, Layout};
use udgpack::oracle::verify_solution;
use udgpack::solve::{solve, SolveOptions};

fn main() {
    let g = udg(Layout::Uniform, 60, 6.0, 7);
    let sol = solve(&g, &SolveOptions::default()).expect("solve");
    println!("n={} m={} cycles={} valid={}", g.n(), g.m(), sol.value, verify_solution(&g, &sol.cycles));
    for c in &sol.cycles {
        println!("  {c:?}");
    }
    println!("{}", serde_json::to_string_pretty(&sol.report).unwrap());
}
