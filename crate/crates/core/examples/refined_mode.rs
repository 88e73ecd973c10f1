//! Refined signatures restrict pairings to K_{z,z}-free ones; disagreements are reported, not hidden.
use udgpack::dp::Mode;
use udgpack::gen::small_suite;
use udgpack::solve::{solve, SolveOptions};
use udgpack::Error;

fn main() {
    for z in [1, 2, 3] {
        let (mut same, mut aborts) = (0, 0);
        for g in small_suite(100, 13, 2) {
            let std = solve(&g, &SolveOptions::default()).unwrap().value;
            match solve(&g, &SolveOptions { mode: Mode::Refined, z, ..Default::default() }) {
                Ok(s) => {
                    assert_eq!(s.value, std);
                    same += 1;
                }
                Err(Error::ZTooSmall { .. }) => aborts += 1,
                Err(e) => panic!("{e}"),
            }
        }
        println!("z={z}: {same} agree, {aborts} z-too-small");
    }
}
