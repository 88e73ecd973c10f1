use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::geom::{intersection_param, lerp, Point, UnitDiskGraph};
use crate::grid::{CellId, GridMap};
use crate::plane::{PlaneGraph, NONE};

/// A straight piece of the sparsifier before subdivision: a unit grid side or a G-edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Seg {
    /// Bottom side of cell `(i, j)`: corner `(i, j)` to `(i + 1, j)`.
    Horizontal(i32, i32),
    /// Left side of cell `(i, j)`: corner `(i, j)` to `(i, j + 1)`.
    Vertical(i32, i32),
    Edge(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum HVertex {
    Corner(i32, i32),
    Base(u32),
    Cross(Seg, Seg),
}

#[derive(Debug, Clone)]
pub struct MapSparsifier {
    pub points: Vec<Point>,
    pub kinds: Vec<HVertex>,
    pub edges: Vec<(u32, u32)>,
    pub edge_seg: Vec<Seg>,
    pub plane: PlaneGraph,
    /// Number of G-vertices of degree at least three.
    pub ell: usize,
}

impl MapSparsifier {
    /// Proper crossings among H-edges; empty for a valid sparsifier.
    pub fn crossings(&self) -> usize {
        UnitDiskGraph::from_drawing(self.points.clone(), &self.edges).find_crossings().len()
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n()];
        for &(a, b) in &self.edges {
            d[a as usize] += 1;
            d[b as usize] += 1;
        }
        d
    }

    pub fn high_vertices(&self) -> usize {
        self.degrees().iter().filter(|&&d| d >= 3).count()
    }

    /// The cell an H-vertex is charged to. Points on grid lines use the cell above or to the right.
    pub fn cell(&self, v: usize, map: &GridMap) -> CellId {
        let col = |x: f64| ((x - map.offset.0) / map.side).floor() as i32;
        let row = |y: f64| ((y - map.offset.1) / map.side).floor() as i32;
        let p = self.points[v];
        match self.kinds[v] {
            HVertex::Corner(i, j) => CellId(i, j),
            HVertex::Base(g) => map.cell_of(g as usize),
            HVertex::Cross(Seg::Horizontal(_, j), _) | HVertex::Cross(_, Seg::Horizontal(_, j)) => CellId(col(p.x), j),
            HVertex::Cross(Seg::Vertical(i, _), _) | HVertex::Cross(_, Seg::Vertical(i, _)) => CellId(i, row(p.y)),
            HVertex::Cross(..) => map.cell_of_point(p),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.points.iter().zip(&self.kinds).map(|(p, k)| serde_json::json!({"x": p.x, "y": p.y, "kind": k})).collect::<Vec<_>>(),
            "edges": self.edges.iter().zip(&self.edge_seg).map(|(e, s)| serde_json::json!({"ends": e, "from": s})).collect::<Vec<_>>(),
        })
    }
}

fn seg_ends(s: Seg, g: &UnitDiskGraph, map: &GridMap) -> (Point, Point) {
    match s {
        Seg::Horizontal(i, j) => (map.corner(i, j), map.corner(i + 1, j)),
        Seg::Vertical(i, j) => (map.corner(i, j), map.corner(i, j + 1)),
        Seg::Edge(e) => {
            let (a, b) = g.edge(e as usize);
            (g.point(a), g.point(b))
        }
    }
}

/// The map sparsifier: sides of every cell within distance α of a cell holding a vertex of
/// degree at least three, plus every G-edge between vertices of degree at most two, with all
/// crossings promoted to vertices.
pub fn build_sparsifier(g: &UnitDiskGraph, map: &GridMap) -> MapSparsifier {
    let alpha = map.constants().alpha;
    let high: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) >= 3).collect();
    let mut region: BTreeSet<CellId> = BTreeSet::new();
    for &v in &high {
        region.extend(map.cell_of(v).ball(alpha));
    }
    let mut segs: BTreeSet<Seg> = BTreeSet::new();
    for &CellId(i, j) in &region {
        segs.extend([Seg::Horizontal(i, j), Seg::Horizontal(i, j + 1), Seg::Vertical(i, j), Seg::Vertical(i + 1, j)]);
    }
    let low: Vec<u32> = (0..g.m() as u32)
        .filter(|&e| {
            let (a, b) = g.edge(e as usize);
            g.degree(a) <= 2 && g.degree(b) <= 2
        })
        .collect();

    let mut points = Vec::new();
    let mut kinds = Vec::new();
    let mut corner_id: HashMap<(i32, i32), u32> = HashMap::new();
    let mut base_id: HashMap<u32, u32> = HashMap::new();
    let mut corner = |i: i32, j: i32, points: &mut Vec<Point>, kinds: &mut Vec<HVertex>| {
        *corner_id.entry((i, j)).or_insert_with(|| {
            points.push(map.corner(i, j));
            kinds.push(HVertex::Corner(i, j));
            points.len() as u32 - 1
        })
    };
    // (param, vertex) stops along each segment, endpoints included
    let mut stops: HashMap<Seg, Vec<(f64, u32)>> = HashMap::new();
    for &s in &segs {
        let (a, b) = match s {
            Seg::Horizontal(i, j) => (corner(i, j, &mut points, &mut kinds), corner(i + 1, j, &mut points, &mut kinds)),
            Seg::Vertical(i, j) => (corner(i, j, &mut points, &mut kinds), corner(i, j + 1, &mut points, &mut kinds)),
            Seg::Edge(_) => unreachable!(),
        };
        stops.insert(s, vec![(0.0, a), (1.0, b)]);
    }
    for &e in &low {
        let (a, b) = g.edge(e as usize);
        let mut ends = [0u32; 2];
        for (k, v) in [a, b].into_iter().enumerate() {
            ends[k] = *base_id.entry(v as u32).or_insert_with(|| {
                points.push(g.point(v));
                kinds.push(HVertex::Base(v as u32));
                points.len() as u32 - 1
            });
        }
        stops.insert(Seg::Edge(e), vec![(0.0, ends[0]), (1.0, ends[1])]);
    }
    // low edges against grid sides
    for &e in &low {
        let (a, b) = g.edge(e as usize);
        let (p, q) = (g.point(a), g.point(b));
        let (cp, cq) = (map.cell_of_point(p), map.cell_of_point(q));
        let mut hits = Vec::new();
        for i in cp.0.min(cq.0) + 1..=cp.0.max(cq.0) {
            let x = map.corner(i, 0).x;
            let t = (x - p.x) / (q.x - p.x);
            let j = ((p.y + t * (q.y - p.y) - map.offset.1) / map.side).floor() as i32;
            hits.push((t, Seg::Vertical(i, j)));
        }
        for j in cp.1.min(cq.1) + 1..=cp.1.max(cq.1) {
            let y = map.corner(0, j).y;
            let t = (y - p.y) / (q.y - p.y);
            let i = ((p.x + t * (q.x - p.x) - map.offset.0) / map.side).floor() as i32;
            hits.push((t, Seg::Horizontal(i, j)));
        }
        for (t, s) in hits {
            if !segs.contains(&s) {
                continue;
            }
            let pt = lerp(p, q, t);
            let (c, d) = seg_ends(s, g, map);
            let u = intersection_param(c, d, p, q);
            let id = points.len() as u32;
            points.push(pt);
            kinds.push(HVertex::Cross(s, Seg::Edge(e)));
            stops.get_mut(&Seg::Edge(e)).unwrap().push((t, id));
            stops.get_mut(&s).unwrap().push((u, id));
        }
    }
    // low edges against each other
    let low_pts: Vec<Point> = g.points().to_vec();
    let low_pairs: Vec<(u32, u32)> = low.iter().map(|&e| g.edges()[e as usize]).collect();
    let drawing = UnitDiskGraph::from_drawing(low_pts, &low_pairs);
    for c in drawing.find_crossings() {
        let (ea, eb) = (drawing.edge(c.edge_a.idx()), drawing.edge(c.edge_b.idx()));
        let e1 = g.edge_id(ea.0, ea.1).unwrap() as u32;
        let e2 = g.edge_id(eb.0, eb.1).unwrap() as u32;
        let id = points.len() as u32;
        points.push(c.point);
        kinds.push(HVertex::Cross(Seg::Edge(e1), Seg::Edge(e2)));
        for (e, other) in [(e1, e2), (e2, e1)] {
            let (p, q) = seg_ends(Seg::Edge(e), g, map);
            let (r, s) = seg_ends(Seg::Edge(other), g, map);
            stops.get_mut(&Seg::Edge(e)).unwrap().push((intersection_param(p, q, r, s), id));
        }
    }
    let mut keys: Vec<Seg> = stops.keys().copied().collect();
    keys.sort_unstable();
    let mut edges = Vec::new();
    let mut edge_seg = Vec::new();
    for s in keys {
        let st = stops.get_mut(&s).unwrap();
        st.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in st.windows(2) {
            edges.push((w[0].1, w[1].1));
            edge_seg.push(s);
        }
    }
    let plane = PlaneGraph::from_straight_line(&points, &edges);
    MapSparsifier { points, kinds, edges, edge_seg, plane, ell: high.len() }
}

/// Vertex weights `1 + sum of log2(1 + |cell|)` over the α-neighbourhood of the vertex's cell.
pub fn h_weights(h: &MapSparsifier, map: &GridMap) -> Vec<f64> {
    let alpha = map.constants().alpha;
    (0..h.n()).map(|v| 1.0 + h.cell(v, map).ball(alpha).map(|c| map.clique_weight(c)).sum::<f64>()).collect()
}

/// A pendant tree of H removed before contraction. `anchor` is the H-vertex it hangs from,
/// `None` when the whole component is a tree.
#[derive(Debug, Clone, Serialize)]
pub struct ForbiddenCurve {
    pub anchor: Option<u32>,
    pub vertices: Vec<u32>,
    pub edges: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct ContractedSparsifier {
    /// The 2-core of H as a plane graph; `core_h` maps its vertices to H.
    pub core: PlaneGraph,
    pub core_h: Vec<u32>,
    /// H₃ itself: a plane multigraph on the branch vertices; `h3_h` maps to H and
    /// `h3_chains[e]` lists the H-vertices along edge `e`, ends included.
    pub h3: PlaneGraph,
    pub h3_h: Vec<u32>,
    pub h3_chains: Vec<Vec<u32>>,
    /// Simple realization of H₃ used for decomposition: loops and parallel edges are subdivided
    /// at chain vertices. Same face ids as `core` and `h3`.
    pub graph: PlaneGraph,
    pub graph_h: Vec<u32>,
    pub chains: Vec<Vec<u32>>,
    pub forbidden: Vec<ForbiddenCurve>,
}

impl ContractedSparsifier {
    /// H-edges recovered by undoing the contraction, plus the removed pendant trees.
    pub fn uncontract(&self, h: &MapSparsifier) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for ch in self.h3_chains.iter() {
            out.extend(ch.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))));
        }
        for f in &self.forbidden {
            out.extend(f.edges.iter().map(|&e| {
                let (a, b) = h.edges[e as usize];
                (a.min(b), a.max(b))
            }));
        }
        out.sort_unstable();
        out
    }
}

pub fn contract_to_h3(h: &MapSparsifier) -> ContractedSparsifier {
    let n = h.n();
    let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    for (e, &(a, b)) in h.edges.iter().enumerate() {
        adj[a as usize].push((b, e as u32));
        adj[b as usize].push((a, e as u32));
    }
    let mut deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut alive = vec![true; n];
    let mut edge_alive = vec![true; h.edges.len()];
    let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &(w, e) in &adj[v] {
            if edge_alive[e as usize] {
                edge_alive[e as usize] = false;
                deg[w as usize] -= 1;
                if deg[w as usize] <= 1 && alive[w as usize] {
                    stack.push(w as usize);
                }
            }
        }
    }
    // pendant trees, grouped by connectivity through removed edges
    let mut forbidden = Vec::new();
    let mut seen = vec![false; h.edges.len()];
    for s in 0..h.edges.len() {
        if edge_alive[s] || seen[s] {
            continue;
        }
        let mut curve = ForbiddenCurve { anchor: None, vertices: vec![], edges: vec![] };
        let mut q = vec![s as u32];
        seen[s] = true;
        let mut verts = BTreeSet::new();
        while let Some(e) = q.pop() {
            curve.edges.push(e);
            let (a, b) = h.edges[e as usize];
            for x in [a, b] {
                if alive[x as usize] {
                    curve.anchor = Some(x);
                    continue;
                }
                verts.insert(x);
                for &(_, f) in &adj[x as usize] {
                    if !edge_alive[f as usize] && !seen[f as usize] {
                        seen[f as usize] = true;
                        q.push(f);
                    }
                }
            }
        }
        curve.vertices = verts.into_iter().collect();
        curve.edges.sort_unstable();
        forbidden.push(curve);
    }

    let core_h: Vec<u32> = (0..n as u32).filter(|&v| alive[v as usize]).collect();
    let mut core_id = vec![NONE; n];
    for (i, &v) in core_h.iter().enumerate() {
        core_id[v as usize] = i as u32;
    }
    let core_pts: Vec<Point> = core_h.iter().map(|&v| h.points[v as usize]).collect();
    let core_edges: Vec<(u32, u32)> = h
        .edges
        .iter()
        .enumerate()
        .filter(|&(e, _)| edge_alive[e])
        .map(|(_, &(a, b))| (core_id[a as usize], core_id[b as usize]))
        .collect();
    let core = PlaneGraph::from_straight_line(&core_pts, &core_edges);
    let cdeg = core.degree();
    let hdeg = h.degrees();
    let mut keep: Vec<bool> = (0..core.n).map(|v| cdeg[v] >= 3 || hdeg[core_h[v] as usize] > cdeg[v]).collect();
    // pure cycles keep three vertices so the realization stays simple
    let comp = core.components();
    let ncomp = comp.iter().filter(|&&c| c != NONE).map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut has_keep = vec![false; ncomp];
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); ncomp];
    for v in 0..core.n {
        if comp[v] != NONE {
            has_keep[comp[v] as usize] |= keep[v];
            members[comp[v] as usize].push(v as u32);
        }
    }
    for c in 0..ncomp {
        if !has_keep[c] {
            let start = *members[c].iter().min().unwrap();
            let d = (0..core.num_darts() as u32).find(|&d| core.tail(d) == start).unwrap();
            let w = core.walk(d);
            let k = w.len();
            for i in [0, k / 3, 2 * k / 3] {
                keep[core.tail(w[i]) as usize] = true;
            }
        }
    }
    let to_h = |chain: &[u32], g: &PlaneGraph| -> Vec<u32> {
        let mut v: Vec<u32> = chain.iter().map(|&d| core_h[g.tail(d) as usize]).collect();
        v.push(core_h[g.head(*chain.last().unwrap()) as usize]);
        v
    };
    let (h3, h3_core, h3_darts) = core.contract_chains(&keep);
    let h3_chains: Vec<Vec<u32>> = h3_darts.iter().map(|c| to_h(c, &core)).collect();
    let h3_h: Vec<u32> = h3_core.iter().map(|&v| core_h[v as usize]).collect();
    // subdivide loops twice, and every parallel edge except one per class once (a direct edge
    // stays whole if present)
    let mut classes: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for (e, &(a, b)) in h3.edges.iter().enumerate() {
        let inner: Vec<u32> = h3_darts[e][1..].iter().map(|&d| core.tail(d)).collect();
        if a == b {
            let k = inner.len();
            keep[inner[k / 3] as usize] = true;
            keep[inner[(2 * k / 3).max(k / 3 + 1).min(k - 1)] as usize] = true;
        } else {
            classes.entry((a.min(b), a.max(b))).or_default().push(e);
        }
    }
    for mut class in classes.into_values() {
        class.sort_by_key(|&e| (h3_darts[e].len(), e));
        for &e in &class[1..] {
            let inner = &h3_darts[e][1..];
            keep[core.tail(inner[inner.len() / 2]) as usize] = true;
        }
    }
    let (graph, graph_core, darts) = core.contract_chains(&keep);
    let chains = darts.iter().map(|c| to_h(c, &core)).collect();
    let graph_h = graph_core.iter().map(|&v| core_h[v as usize]).collect();
    ContractedSparsifier { core, core_h, h3, h3_h, h3_chains, graph, graph_h, chains, forbidden }
}

pub fn is_simple(g: &PlaneGraph) -> bool {
    let mut seen = BTreeSet::new();
    g.edges.iter().all(|&(a, b)| a != b && seen.insert((a.min(b), a.max(b))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{udg, Layout};

    fn build(g: &UnitDiskGraph) -> (GridMap, MapSparsifier, ContractedSparsifier) {
        let map = GridMap::build(g);
        let h = build_sparsifier(g, &map);
        let c = contract_to_h3(&h);
        (map, h, c)
    }

    #[test]
    fn triangle_in_one_cell() {
        let g = UnitDiskGraph::new(vec![Point::new(0.1, 0.1), Point::new(0.2, 0.15), Point::new(0.15, 0.3)]).unwrap();
        let (map, h, c) = build(&g);
        assert_eq!(h.ell, 0);
        // all degrees are two: only the triangle itself enters
        assert_eq!(h.edges.len(), 3);
        assert_eq!(h.crossings(), 0);
        assert!(h.kinds.iter().all(|k| matches!(k, HVertex::Base(_))));
        assert_eq!(c.graph.n, 3);
        assert!(is_simple(&c.graph));
        let _ = map;
    }

    #[test]
    fn clique_brings_cell_sides() {
        let pts = vec![Point::new(0.1, 0.1), Point::new(0.2, 0.15), Point::new(0.15, 0.3), Point::new(0.3, 0.3)];
        let g = UnitDiskGraph::new(pts).unwrap();
        let (map, h, c) = build(&g);
        assert_eq!(h.ell, 4);
        assert!(h.kinds.iter().all(|k| matches!(k, HVertex::Corner(..))));
        assert_eq!(h.crossings(), 0);
        let alpha = map.constants().alpha as i32;
        let cells = 2 * alpha * alpha + 2 * alpha + 1;
        // union of the sides of a diamond of cells
        assert!(h.edges.len() >= 2 * cells as usize);
        assert!(is_simple(&c.graph));
        assert_eq!(c.forbidden.len(), 0);
    }

    #[test]
    fn two_far_points_with_an_edge() {
        let g = UnitDiskGraph::new(vec![Point::new(0.0, 0.0), Point::new(0.9, 0.1)]).unwrap();
        let (_, h, c) = build(&g);
        assert_eq!(h.edges.len(), 1);
        assert_eq!(c.graph.n, 0);
        assert_eq!(c.forbidden.len(), 1);
        assert_eq!(c.forbidden[0].anchor, None);
    }

    #[test]
    fn weights_follow_the_formula() {
        let pts = vec![Point::new(0.1, 0.1), Point::new(0.2, 0.15), Point::new(0.15, 0.3), Point::new(0.3, 0.3)];
        let g = UnitDiskGraph::new(pts).unwrap();
        let map = GridMap::build(&g);
        let h = build_sparsifier(&g, &map);
        let w = h_weights(&h, &map);
        let occupied = map.cell_of(0);
        let alpha = map.constants().alpha;
        for v in 0..h.n() {
            let near = h.cell(v, &map).distance(occupied) <= alpha;
            let expect = if near { 1.0 + 5f64.log2() } else { 1.0 };
            assert!((w[v] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn random_instances_are_planar_and_round_trip() {
        for seed in 0..25 {
            let g = udg(if seed % 3 == 0 { Layout::Clustered } else { Layout::Uniform }, 40, 4.0 + (seed % 5) as f64, seed);
            let (_, h, c) = build(&g);
            assert_eq!(h.crossings(), 0, "seed {seed}");
            let mut all: Vec<(u32, u32)> = h.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
            all.sort_unstable();
            assert_eq!(c.uncontract(&h), all, "seed {seed}");
            assert!(is_simple(&c.graph), "seed {seed}");
            let hdeg = h.degrees();
            let low_branch = c.h3_h.iter().filter(|&&v| hdeg[v as usize] < 3).count();
            assert_eq!(low_branch % 3, 0, "seed {seed}: only pure cycles keep degree-two vertices");
            for f in &c.forbidden {
                if let Some(a) = f.anchor {
                    assert!(c.h3_h.contains(&a), "seed {seed}: anchor {a} is not a branch vertex");
                }
            }
            assert_eq!(c.graph.faces.len(), c.core.faces.len());
            assert_eq!(c.h3.faces.len(), c.core.faces.len());
        }
    }
}
