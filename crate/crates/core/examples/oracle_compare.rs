//! The exhaustive oracle against the decomposition-based solver on small instances.
use udgpack::gen::small_suite;
use udgpack::oracle::max_cycle_packing;
use udgpack::solve::{solve, SolveOptions};

fn main() {
    let mut agree = 0;
    let suite = small_suite(50, 12, 1);
    for g in &suite {
        let want = max_cycle_packing(g).unwrap().value;
        let got = solve(g, &SolveOptions::default()).unwrap().value;
        agree += (want == got) as usize;
        println!("n={:2} m={:2} oracle={} solve={}", g.n(), g.m(), want, got);
    }
    println!("{agree}/{} agree", suite.len());
}
