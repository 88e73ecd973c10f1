//! Counts of K_{z,z}-free pairings of 2m points on a circle.
use udgpack::cac::{catalan, double_factorial_odd, enumerate_kzz_free};

fn main() {
    println!(" m  z=1  z=2  z=3  catalan  (2m-1)!!");
    for m in 1..=7 {
        let counts: Vec<usize> = (1..=3).map(|z| enumerate_kzz_free(m, z).len()).collect();
        println!("{m:2} {:4} {:4} {:4} {:8} {:9}", counts[0], counts[1], counts[2], catalan(m), double_factorial_odd(m));
    }
}
