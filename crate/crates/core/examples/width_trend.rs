//! Clique-weighted width against the number of degree-3 vertices, as CSV.
use udgpack::bench::{width_suite, write_csv};
use udgpack::sc::ScConfig;

fn main() {
    let rows = width_suite(&[50, 100, 200, 400, 800], 2, 1, &ScConfig::default()).unwrap();
    write_csv(&rows, std::io::stdout()).unwrap();
}
