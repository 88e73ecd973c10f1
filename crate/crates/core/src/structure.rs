use std::collections::{BTreeSet, HashSet};

use crate::dp::shortest_cycle_through;
use crate::geom::UnitDiskGraph;
use crate::grid::{GridMap, MapConstants};
use crate::plane::PlaneGraph;

/// The graph left after repeatedly deleting vertices of degree at most one.
#[derive(Debug, Clone)]
pub struct Cleaned {
    pub graph: UnitDiskGraph,
    /// Original id of every kept vertex.
    pub kept: Vec<usize>,
    /// Deleted vertices in deletion order.
    pub removed: Vec<usize>,
}

pub fn clean(g: &UnitDiskGraph) -> Cleaned {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut alive = vec![true; n];
    let mut removed = Vec::new();
    let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        removed.push(v);
        for &w in g.neighbors(v) {
            let w = w as usize;
            if alive[w] {
                deg[w] -= 1;
                if deg[w] <= 1 {
                    stack.push(w);
                }
            }
        }
    }
    let kept: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    let (graph, kept) = g.induced(&kept);
    Cleaned { graph, kept, removed }
}

/// Per-cell cap on vertices of an optimal solution that leave their cell: 3β².
pub fn packedness_constant(c: MapConstants) -> u64 {
    3 * (c.beta as u64) * (c.beta as u64)
}

/// Threshold multiplier for the dense shortcut, following the counting in the extraction argument:
/// 10k face-bounded vertices, 3 per harvested triangle, and 4β neighbours of each removed vertex
/// counted twice (adjacency and degree loss).
pub fn dense_factor(c: MapConstants) -> f64 {
    13.0 + 24.0 * c.beta as f64
}

#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub cycles: Vec<Vec<usize>>,
    pub triangles: usize,
    pub faces: usize,
    pub fallback: usize,
}

/// When the cleaned graph has more than `factor * k` vertices of degree at least three, find `k`
/// vertex-disjoint cycles: triangles at crossings first, then faces of one colour class of a
/// 5-colouring of the dual of the planar remainder, then shortest cycles.
pub fn dense_extract(g: &UnitDiskGraph, k: usize, factor: Option<f64>) -> Option<Extraction> {
    let factor = factor.unwrap_or_else(|| dense_factor(GridMap::build(g).constants()));
    let high = (0..g.n()).filter(|&v| g.degree(v) >= 3).count();
    if (high as f64) <= factor * k as f64 {
        return None;
    }
    let ex = extract(g, k);
    (ex.cycles.len() >= k).then_some(ex)
}

/// The extraction itself, without the threshold test. Returns as many cycles as it finds, up to `k`.
pub fn extract(g: &UnitDiskGraph, k: usize) -> Extraction {
    let mut ex = Extraction::default();
    let mut alive = vec![true; g.n()];
    // triangles at crossings
    loop {
        if ex.cycles.len() >= k {
            return ex;
        }
        let keep: Vec<usize> = (0..g.n()).filter(|&v| alive[v]).collect();
        let (sub, ids) = g.induced(&keep);
        let Some(c) = sub.find_crossings().into_iter().next() else { break };
        let (x, x2) = sub.edge(c.edge_a.idx());
        let (y, y2) = sub.edge(c.edge_b.idx());
        let q = [x, x2, y, y2];
        let tri = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]].into_iter().find(|t| {
            sub.has_edge(q[t[0]], q[t[1]]) && sub.has_edge(q[t[1]], q[t[2]]) && sub.has_edge(q[t[0]], q[t[2]])
        });
        let Some(t) = tri else { break };
        let cyc: Vec<usize> = t.iter().map(|&i| ids[q[i]]).collect();
        for &v in &cyc {
            alive[v] = false;
        }
        ex.cycles.push(cyc);
        ex.triangles += 1;
    }
    // planar remainder, pruned to minimum degree two
    let keep: Vec<usize> = (0..g.n()).filter(|&v| alive[v]).collect();
    let (g1, ids1) = g.induced(&keep);
    let c = clean(&g1);
    let ids2: Vec<usize> = c.kept.iter().map(|&v| ids1[v]).collect();
    if c.graph.n() > 0 {
        let pg = PlaneGraph::from_straight_line(c.graph.points(), c.graph.edges());
        let colour = five_colour_dual(&pg);
        let mut classes: Vec<Vec<u32>> = vec![Vec::new(); 5];
        for (f, &col) in colour.iter().enumerate() {
            classes[col as usize].push(f as u32);
        }
        classes.sort_by_key(|c| std::cmp::Reverse(c.len()));
        let mut used: HashSet<usize> = HashSet::new();
        'faces: for &f in &classes[0] {
            if ex.cycles.len() >= k {
                break;
            }
            if pg.faces[f as usize].len() != 1 {
                continue;
            }
            let verts: Vec<usize> = pg.walk(pg.faces[f as usize][0]).iter().map(|&d| pg.tail(d) as usize).collect();
            let distinct: BTreeSet<usize> = verts.iter().copied().collect();
            if distinct.len() != verts.len() || verts.len() < 3 {
                continue;
            }
            for v in &verts {
                if used.contains(v) {
                    continue 'faces;
                }
            }
            used.extend(verts.iter().copied());
            ex.cycles.push(verts.iter().map(|&v| ids2[v]).collect());
            ex.faces += 1;
        }
        for &v in &used {
            alive[ids2[v]] = false;
        }
    }
    // shortest cycles on what is left
    while ex.cycles.len() < k {
        let best = (0..g.n()).filter(|&v| alive[v]).filter_map(|s| shortest_cycle_through(g, &alive, s)).min_by_key(|c| c.len());
        let Some(cyc) = best else { break };
        for &v in &cyc {
            alive[v] = false;
        }
        ex.cycles.push(cyc);
        ex.fallback += 1;
    }
    ex
}

/// Simple dual: faces adjacent when they share an edge, loops dropped.
pub fn dual_graph(pg: &PlaneGraph) -> Vec<Vec<u32>> {
    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); pg.faces.len()];
    for e in 0..pg.edges.len() {
        let (f, h) = (pg.face_of[2 * e], pg.face_of[2 * e + 1]);
        if f != h {
            adj[f as usize].insert(h);
            adj[h as usize].insert(f);
        }
    }
    adj.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Proper 5-colouring of the dual of a plane graph: peel vertices of degree at most five, then
/// colour in reverse, resolving five-coloured neighbourhoods by a Kempe chain swap.
pub fn five_colour_dual(pg: &PlaneGraph) -> Vec<u8> {
    five_colour(&dual_graph(pg))
}

pub fn five_colour(adj: &[Vec<u32>]) -> Vec<u8> {
    let n = adj.len();
    let mut deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut gone = vec![false; n];
    let mut set: BTreeSet<(usize, u32)> = (0..n as u32).map(|v| (deg[v as usize], v)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&(d, v)) = set.iter().next() {
        set.remove(&(d, v));
        gone[v as usize] = true;
        order.push(v);
        for &w in &adj[v as usize] {
            if !gone[w as usize] {
                set.remove(&(deg[w as usize], w));
                deg[w as usize] -= 1;
                set.insert((deg[w as usize], w));
            }
        }
    }
    const UNSET: u8 = u8::MAX;
    let mut colour = vec![UNSET; n];
    for &v in order.iter().rev() {
        let used = |colour: &[u8]| {
            let mut u = [false; 5];
            for &w in &adj[v as usize] {
                if colour[w as usize] != UNSET {
                    u[colour[w as usize] as usize] = true;
                }
            }
            u
        };
        let u = used(&colour);
        if let Some(c) = (0..5).find(|&c| !u[c]) {
            colour[v as usize] = c as u8;
            continue;
        }
        // every colour appears: swap a Kempe chain between two neighbours' colours
        let nbrs: Vec<u32> = adj[v as usize].iter().copied().filter(|&w| colour[w as usize] != UNSET).collect();
        let mut done = false;
        'pairs: for a in 0..5u8 {
            for b in a + 1..5u8 {
                let Some(&start) = nbrs.iter().find(|&&w| colour[w as usize] == a) else { continue };
                let mut chain = vec![start];
                let mut seen: HashSet<u32> = HashSet::from([start]);
                let mut i = 0;
                while i < chain.len() {
                    let x = chain[i];
                    i += 1;
                    for &y in &adj[x as usize] {
                        let cy = colour[y as usize];
                        if (cy == a || cy == b) && y != v && seen.insert(y) {
                            chain.push(y);
                        }
                    }
                }
                if nbrs.iter().any(|&w| colour[w as usize] == b && seen.contains(&w)) {
                    continue;
                }
                for &x in &chain {
                    colour[x as usize] = if colour[x as usize] == a { b } else { a };
                }
                let u = used(&colour);
                if let Some(c) = (0..5).find(|&c| !u[c]) {
                    colour[v as usize] = c as u8;
                    done = true;
                    break 'pairs;
                }
            }
        }
        assert!(done, "planar graphs are 5-colourable");
    }
    colour
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{small_suite, udg, Layout};
    use crate::geom::Point;
    use crate::oracle::{max_cycle_packing, verify_solution};

    #[test]
    fn tree_cleans_to_nothing() {
        let pts = (0..6).map(|i| Point::new(i as f64 * 0.9, 0.0)).collect();
        let g = UnitDiskGraph::new(pts).unwrap();
        let c = clean(&g);
        assert_eq!(c.graph.n(), 0);
        assert_eq!(c.removed.len(), 6);
    }

    #[test]
    fn triangle_with_tail_keeps_triangle() {
        let pts = vec![Point::new(0., 0.), Point::new(0.5, 0.), Point::new(0.25, 0.4), Point::new(1.4, 0.), Point::new(2.3, 0.)];
        let g = UnitDiskGraph::new(pts).unwrap();
        let c = clean(&g);
        assert_eq!(c.kept, vec![0, 1, 2]);
        let again = clean(&c.graph);
        assert_eq!(again.graph.n(), 3);
    }

    #[test]
    fn cleaning_preserves_packing_value() {
        for g in small_suite(60, 12, 21) {
            let c = clean(&g);
            assert_eq!(max_cycle_packing(&g).unwrap().value, max_cycle_packing(&c.graph).unwrap().value);
        }
    }

    #[test]
    fn packedness_values() {
        assert_eq!(packedness_constant(MapConstants::from_alpha(5)), 11163);
        assert_eq!(packedness_constant(MapConstants::from_alpha(0)), 3);
    }

    #[test]
    fn disjoint_triangles_found() {
        let mut pts = Vec::new();
        for i in 0..5 {
            let x = i as f64 * 3.0;
            pts.extend([Point::new(x, 0.), Point::new(x + 0.5, 0.), Point::new(x + 0.25, 0.4)]);
        }
        pts.push(Point::new(100.0, 100.0));
        let g = UnitDiskGraph::new(pts).unwrap();
        let ex = extract(&g, 5);
        assert_eq!(ex.cycles.len(), 5);
        assert!(verify_solution(&g, &ex.cycles));
    }

    fn lattice(w: usize, h: usize, seed: u64) -> UnitDiskGraph {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..w * h).map(|i| Point::new((i % w) as f64 * 0.9 + rng.gen_range(-0.02..0.02), (i / w) as f64 * 0.9 + rng.gen_range(-0.02..0.02))).collect();
        UnitDiskGraph::new(pts).unwrap()
    }

    #[test]
    fn planar_lattice_gives_face_cycles() {
        let g = lattice(8, 8, 1);
        assert!(g.find_crossings().is_empty());
        let ex = dense_extract(&g, 3, Some(5.0)).unwrap();
        assert_eq!(ex.cycles.len(), 3);
        assert!(ex.faces > 0);
        assert!(verify_solution(&g, &ex.cycles));
    }

    #[test]
    fn sparse_graph_below_threshold() {
        let g = lattice(3, 3, 2);
        assert!(dense_extract(&g, 2, None).is_none());
    }

    #[test]
    fn colouring_is_proper() {
        for seed in 0..20 {
            let g = udg(Layout::Uniform, 80, 6.0, seed);
            let c = clean(&g);
            // planar part only: drop one endpoint of every crossing
            let mut bad: BTreeSet<usize> = BTreeSet::new();
            for x in c.graph.find_crossings() {
                bad.insert(c.graph.edge(x.edge_a.idx()).0);
            }
            let rest: Vec<usize> = (0..c.graph.n()).filter(|v| !bad.contains(v)).collect();
            let (p, _) = c.graph.induced(&rest);
            if !p.find_crossings().is_empty() || p.m() == 0 {
                continue;
            }
            let pg = PlaneGraph::from_straight_line(p.points(), p.edges());
            let dual = dual_graph(&pg);
            let col = five_colour(&dual);
            for (f, nb) in dual.iter().enumerate() {
                assert!(col[f] < 5);
                for &h in nb {
                    assert_ne!(col[f], col[h as usize]);
                }
            }
        }
    }
}
