use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{Point, UnitDiskGraph};
use crate::plane::{twin, PlaneGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Layout {
    Uniform,
    Clustered,
}

/// `n` seeded random points in a `side` x `side` square.
pub fn uniform(n: usize, side: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side))).collect()
}

/// Gaussian-ish blobs: `clusters` centres, points scattered within `spread` of a random centre.
pub fn clustered(n: usize, side: f64, clusters: usize, spread: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres: Vec<Point> = (0..clusters.max(1)).map(|_| Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side))).collect();
    (0..n)
        .map(|_| {
            let c = centres[rng.gen_range(0..centres.len())];
            let r = spread * (rng.gen::<f64>() + rng.gen::<f64>()) / 2.0;
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            Point::new(c.x + r * th.cos(), c.y + r * th.sin())
        })
        .collect()
}

pub fn points(layout: Layout, n: usize, side: f64, seed: u64) -> Vec<Point> {
    match layout {
        Layout::Uniform => uniform(n, side, seed),
        Layout::Clustered => clustered(n, side, (n / 8).max(1), 0.8, seed),
    }
}

/// Random UDG whose density is controlled by the square side.
pub fn udg(layout: Layout, n: usize, side: f64, seed: u64) -> UnitDiskGraph {
    UnitDiskGraph::new(points(layout, n, side, seed)).expect("random points are distinct")
}

/// The seeded small-instance suite: `count` graphs with `n <= max_n`, from edgeless to near-clique.
pub fn small_suite(count: usize, max_n: usize, seed: u64) -> Vec<UnitDiskGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(1..=max_n);
            // side sweeps from well-spread (few edges) to tiny (clique)
            let frac = i as f64 / count.max(1) as f64;
            let side = 0.4 + 4.6 * (1.0 - frac) * rng.gen_range(0.3..1.0);
            let layout = if rng.gen_bool(0.3) { Layout::Clustered } else { Layout::Uniform };
            udg(layout, n, side, rng.gen())
        })
        .collect()
}

/// Random stacked triangulation on `n >= 3` vertices, then random edge flips.
pub fn random_triangulation(n: usize, seed: u64) -> PlaneGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tris: Vec<[u32; 3]> = vec![[0, 1, 2], [0, 2, 1]];
    for v in 3..n as u32 {
        let i = rng.gen_range(0..tris.len());
        let [a, b, c] = tris[i];
        tris[i] = [a, b, v];
        tris.push([b, c, v]);
        tris.push([c, a, v]);
    }
    let mut g = glue(n, &tris);
    for _ in 0..n * 2 {
        let e = rng.gen_range(0..g.edges.len() as u32);
        if let Some(t2) = flip(&g, e) {
            g = glue(n, &t2);
        }
    }
    g
}

/// Oriented vertex triples of the faces of a triangulation.
pub fn triangles_of(g: &PlaneGraph) -> Vec<[u32; 3]> {
    (0..g.faces.len()).map(|f| {
        let w = g.walk(g.faces[f][0]);
        [g.tail(w[0]), g.tail(w[1]), g.tail(w[2])]
    }).collect()
}

fn flip(g: &PlaneGraph, e: u32) -> Option<Vec<[u32; 3]>> {
    let d = 2 * e;
    let (a, b) = (g.tail(d), g.head(d));
    let c = g.head(g.next[d as usize]);
    let x = g.head(g.next[twin(d) as usize]);
    if c == x || g.edges.iter().any(|&(p, q)| (p == c && q == x) || (p == x && q == c)) {
        return None;
    }
    let (f1, f2) = (g.face_of[d as usize], g.face_of[twin(d) as usize]);
    let mut t: Vec<[u32; 3]> = triangles_of(g).into_iter().enumerate().filter(|&(i, _)| i as u32 != f1 && i as u32 != f2).map(|(_, t)| t).collect();
    t.push([a, x, c]);
    t.push([x, b, c]);
    Some(t)
}

/// Plane graph from oriented triangles sharing edges by vertex pair.
pub fn glue(n: usize, tris: &[[u32; 3]]) -> PlaneGraph {
    let key = |a: u32, b: u32| ((a.min(b) as u64) << 32) | a.max(b) as u64;
    let t: Vec<[(u32, u64); 3]> = tris.iter().map(|&[a, b, c]| [(a, key(a, b)), (b, key(b, c)), (c, key(c, a))]).collect();
    PlaneGraph::from_triangles(n, &t).unwrap()
}

/// Tube of `len` rings of `m` vertices, each end closed by a fan around a cap vertex (ids 0 and 1).
pub fn tube(m: usize, len: usize) -> PlaneGraph {
    let v = |i: usize, k: usize| (2 + m * i + k % m) as u32;
    let (s, e) = (0, 1);
    let mut t = Vec::new();
    for k in 0..m {
        t.push([s, v(0, k), v(0, k + 1)]);
        t.push([e, v(len - 1, k + 1), v(len - 1, k)]);
    }
    for i in 0..len - 1 {
        for k in 0..m {
            t.push([v(i, k), v(i + 1, k), v(i + 1, k + 1)]);
            t.push([v(i, k), v(i + 1, k + 1), v(i, k + 1)]);
        }
    }
    glue(m * len + 2, &t)
}

/// Four-rail tube: rails 0 and 2 weigh 1, the filler rails between them weigh 2, so level-tree
/// branches along the two light rails stay apart and balanced fundamental cycles are long.
pub fn railed_tube(len: usize) -> (PlaneGraph, Vec<f64>) {
    let g = tube(4, len);
    let c = (0..g.n).map(|v| if v >= 2 && v % 2 == 1 { 2.0 } else { 1.0 }).collect();
    (g, c)
}
