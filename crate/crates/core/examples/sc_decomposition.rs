//! Surface-cut decomposition of a unit disk graph, validated, with its clique-weighted width.
use udgpack::gen::{udg, Layout};
use udgpack::sc::{decompose, width_of, ScConfig};

fn main() {
    let cfg = ScConfig::default();
    for (n, side) in [(100, 7.0), (300, 12.0), (600, 17.0)] {
        let g = udg(Layout::Uniform, n, side, 4);
        let b = decompose(&g, &cfg).unwrap();
        let rep = b.sc.check(&g, &b.map, cfg.spread).unwrap();
        println!(
            "n={n} ell={} width={:.2} (recomputed {:.2}) leaves={} spread={} depth={}",
            b.h.ell,
            rep.width,
            width_of(&b.sc, &g, &b.map),
            rep.leaves,
            rep.spread,
            rep.depth
        );
    }
}
