//! Paths between the two circles of an annulus: cross-ordered ends and equal crossing parity
//! with the connector force an intersection.
use rand::SeedableRng;
use udgpack::parity::{crossing_parity, fuzz, Annulus};

fn main() {
    let a = Annulus::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let p = a.random_path(&mut rng, 0.5, 2.0, 1);
    println!("path of {} points winding once: parity {:?}", p.len(), crossing_parity(&p, &a.lambda()));
    let r = fuzz(a, 2000, &mut rng);
    println!("{} pairs tested of {} drawn, {} counterexamples", r.tested, r.drawn, r.counterexamples);
}
