//! Balanced cycle separator of a weighted triangulation.
use rand::{Rng, SeedableRng};
use udgpack::gen::random_triangulation;
use udgpack::separator::{balanced_small_separator, c_star};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for n in [50, 200, 500] {
        let h = random_triangulation(n, rng.gen());
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..4.0)).collect();
        let r = balanced_small_separator(&h, &c, &c).unwrap();
        println!("n={n}: cycle of {} vertices, balance {:.3}, weight {:.1} <= {:.1}", r.cycle.len(), r.balance_ratio, r.weight, 10.0 * c_star(&c));
    }
}
