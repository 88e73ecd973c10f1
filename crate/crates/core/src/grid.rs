use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geom::{intersection_param, lerp, segments_cross, Point, UnitDiskGraph};

pub const CELL_SIDE: f64 = std::f64::consts::FRAC_1_SQRT_2;
const GP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CellId(pub i32, pub i32);

impl CellId {
    pub fn distance(self, o: CellId) -> u32 {
        self.0.abs_diff(o.0) + self.1.abs_diff(o.1)
    }

    /// Cells at dual distance at most `r`.
    pub fn ball(self, r: u32) -> impl Iterator<Item = CellId> {
        let r = r as i32;
        (-r..=r).flat_map(move |di| {
            let rem = r - di.abs();
            (-rem..=rem).map(move |dj| CellId(self.0 + di, self.1 + dj))
        })
    }
}

pub fn cell_distance(a: CellId, b: CellId) -> u32 {
    a.distance(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MapConstants {
    pub alpha: u32,
    pub beta: u32,
    pub kappa: u32,
}

impl MapConstants {
    pub fn from_alpha(alpha: u32) -> Self {
        let ball = |r: u32| 2 * r * r + 2 * r + 1;
        MapConstants { alpha, beta: ball(alpha), kappa: ball(2 * alpha) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellStats {
    pub cell: CellId,
    pub count: usize,
    pub clique_weight: f64,
}

pub fn clique_weight(count: usize) -> f64 {
    (count as f64 + 1.0).log2()
}

#[derive(Debug, Clone)]
pub struct GridMap {
    pub side: f64,
    pub offset: (f64, f64),
    cell_of: Vec<CellId>,
    cells: BTreeMap<CellId, Vec<u32>>,
    constants: MapConstants,
}

impl GridMap {
    pub fn build(g: &UnitDiskGraph) -> GridMap {
        let mut h = DefaultHasher::new();
        for p in g.points() {
            p.x.to_bits().hash(&mut h);
            p.y.to_bits().hash(&mut h);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
        let low = low_degree_crossings(g);
        let mut offset = (0.5 * CELL_SIDE, 0.5 * CELL_SIDE);
        for attempt in 0.. {
            if attempt > 0 {
                offset = (rng.gen_range(0.0..CELL_SIDE), rng.gen_range(0.0..CELL_SIDE));
            }
            if general_position(g, offset, &low) {
                break;
            }
        }
        Self::with_offset(g, offset)
    }

    pub fn with_offset(g: &UnitDiskGraph, offset: (f64, f64)) -> GridMap {
        let mut m = GridMap { side: CELL_SIDE, offset, cell_of: Vec::with_capacity(g.n()), cells: BTreeMap::new(), constants: MapConstants::from_alpha(1) };
        for (v, &p) in g.points().iter().enumerate() {
            let c = m.cell_of_point(p);
            m.cell_of.push(c);
            m.cells.entry(c).or_default().push(v as u32);
        }
        let alpha = g.edges().iter().map(|&(a, b)| m.cells_crossed(m.cell_of[a as usize], m.cell_of[b as usize])).max().unwrap_or(1).max(1);
        m.constants = MapConstants::from_alpha(alpha);
        m
    }

    pub fn cell_of_point(&self, p: Point) -> CellId {
        CellId(((p.x - self.offset.0) / self.side).floor() as i32, ((p.y - self.offset.1) / self.side).floor() as i32)
    }

    /// Without corner passes a segment visits one cell per grid line it crosses, plus one.
    fn cells_crossed(&self, a: CellId, b: CellId) -> u32 {
        1 + a.distance(b)
    }

    pub fn segment_cells(&self, p: Point, q: Point) -> u32 {
        self.cells_crossed(self.cell_of_point(p), self.cell_of_point(q))
    }

    pub fn corner(&self, i: i32, j: i32) -> Point {
        Point::new(self.offset.0 + i as f64 * self.side, self.offset.1 + j as f64 * self.side)
    }

    pub fn cell_of(&self, v: usize) -> CellId {
        self.cell_of[v]
    }

    pub fn vertices_in(&self, c: CellId) -> &[u32] {
        self.cells.get(&c).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn count(&self, c: CellId) -> usize {
        self.vertices_in(c).len()
    }

    pub fn clique_weight(&self, c: CellId) -> f64 {
        clique_weight(self.count(c))
    }

    pub fn occupied(&self) -> impl Iterator<Item = (CellId, &[u32])> {
        self.cells.iter().map(|(c, v)| (*c, v.as_slice()))
    }

    pub fn stats(&self) -> Vec<CellStats> {
        self.occupied().map(|(cell, v)| CellStats { cell, count: v.len(), clique_weight: clique_weight(v.len()) }).collect()
    }

    pub fn constants(&self) -> MapConstants {
        self.constants
    }

    pub fn total_weight(&self) -> f64 {
        self.occupied().map(|(_, v)| clique_weight(v.len())).sum()
    }
}

pub fn compute_constants(map: &GridMap) -> MapConstants {
    map.constants()
}

/// Crossing points between edges whose endpoints all have degree at most two.
pub(crate) fn low_degree_crossings(g: &UnitDiskGraph) -> Vec<Point> {
    let low: Vec<usize> = (0..g.m())
        .filter(|&e| {
            let (a, b) = g.edge(e);
            g.degree(a) <= 2 && g.degree(b) <= 2
        })
        .collect();
    let mut out = Vec::new();
    for (i, &e) in low.iter().enumerate() {
        for &f in &low[i + 1..] {
            let (a, b) = g.edge(e);
            let (c, d) = g.edge(f);
            let (pa, pb, pc, pd) = (g.point(a), g.point(b), g.point(c), g.point(d));
            if segments_cross(pa, pb, pc, pd) {
                out.push(lerp(pa, pb, intersection_param(pa, pb, pc, pd)));
            }
        }
    }
    out
}

fn general_position(g: &UnitDiskGraph, offset: (f64, f64), low_crossings: &[Point]) -> bool {
    let off_line = |v: f64, o: f64| {
        let t = (v - o) / CELL_SIDE;
        let f = t - t.floor();
        f > GP_EPS && f < 1.0 - GP_EPS
    };
    let clear = |p: &Point| off_line(p.x, offset.0) && off_line(p.y, offset.1);
    if !g.points().iter().all(clear) || !low_crossings.iter().all(clear) {
        return false;
    }
    // no edge passes (numerically) through a grid corner
    let probe = GridMap { side: CELL_SIDE, offset, cell_of: vec![], cells: BTreeMap::new(), constants: MapConstants::from_alpha(1) };
    for &(a, b) in g.edges() {
        let (p, q) = (g.point(a as usize), g.point(b as usize));
        let (ca, cb) = (probe.cell_of_point(p), probe.cell_of_point(q));
        for i in ca.0.min(cb.0)..=ca.0.max(cb.0) + 1 {
            for j in ca.1.min(cb.1)..=ca.1.max(cb.1) + 1 {
                if point_segment_dist(probe.corner(i, j), p, q) < GP_EPS * 10.0 {
                    return false;
                }
            }
        }
    }
    true
}

pub fn point_segment_dist(c: Point, p: Point, q: Point) -> f64 {
    let (dx, dy) = (q.x - p.x, q.y - p.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((c.x - p.x) * dx + (c.y - p.y) * dy) / len2).clamp(0.0, 1.0) };
    c.dist2(lerp(p, q, t)).sqrt()
}

/// Occupied-cell counts indexed for neighbourhood sums.
pub fn cell_counts(map: &GridMap) -> HashMap<CellId, usize> {
    map.occupied().map(|(c, v)| (c, v.len())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_point_cell() {
        let g = UnitDiskGraph::new(vec![Point::new(0.1, 0.1)]).unwrap();
        let m = GridMap::build(&g);
        let st = m.stats();
        assert_eq!(st.len(), 1);
        assert_eq!(st[0].clique_weight, 1.0);
    }

    #[test]
    fn three_points_one_cell() {
        let g = UnitDiskGraph::new(vec![Point::new(0.1, 0.1), Point::new(0.12, 0.1), Point::new(0.1, 0.13)]).unwrap();
        let m = GridMap::build(&g);
        assert_eq!(m.stats().len(), 1);
        assert_eq!(m.stats()[0].clique_weight, 2.0);
    }

    #[test]
    fn close_pair_in_two_cells() {
        let g = UnitDiskGraph::new(vec![Point::new(0.0, 0.3), Point::new(0.99, 0.3)]).unwrap();
        let m = GridMap::build(&g);
        assert_ne!(m.cell_of(0), m.cell_of(1));
        assert!(m.segment_cells(g.point(0), g.point(1)) >= 2);
    }

    #[test]
    fn distances() {
        assert_eq!(cell_distance(CellId(3, 4), CellId(3, 4)), 0);
        assert_eq!(cell_distance(CellId(0, 0), CellId(1, 0)), 1);
        assert_eq!(cell_distance(CellId(0, 0), CellId(2, 3)), 5);
    }

    #[test]
    fn bfs_on_dual_matches_l1() {
        use std::collections::VecDeque;
        let mut dist = HashMap::new();
        dist.insert(CellId(0, 0), 0u32);
        let mut q = VecDeque::from([CellId(0, 0)]);
        while let Some(c) = q.pop_front() {
            let d = dist[&c];
            if d == 8 {
                continue;
            }
            for n in [CellId(c.0 + 1, c.1), CellId(c.0 - 1, c.1), CellId(c.0, c.1 + 1), CellId(c.0, c.1 - 1)] {
                dist.entry(n).or_insert_with(|| {
                    q.push_back(n);
                    d + 1
                });
            }
        }
        for (c, d) in dist {
            assert_eq!(cell_distance(CellId(0, 0), c), d);
        }
    }

    #[test]
    fn beta_kappa_counts() {
        let lattice = |r: i32| (-r..=r).flat_map(|i| (-r..=r).map(move |j| (i, j))).filter(|(i, j)| i.abs() + j.abs() <= r).count() as u32;
        let k = MapConstants::from_alpha(5);
        assert_eq!(k.beta, 61);
        assert_eq!(k.beta, lattice(5));
        assert_eq!(k.kappa, lattice(10));
        assert_eq!(CellId(2, -1).ball(5).count(), 61);
    }

    #[test]
    fn axis_parallel_unit_edge_from_center() {
        let g = UnitDiskGraph::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).unwrap();
        let m = GridMap::with_offset(&g, (-0.5 * CELL_SIDE, -0.5 * CELL_SIDE));
        let c = m.segment_cells(g.point(0), g.point(1));
        assert!((2..=3).contains(&c));
    }

    /// Walk a segment across the grid by sampling it densely.
    fn sampled_cells(m: &GridMap, p: Point, q: Point) -> usize {
        let mut seen = std::collections::HashSet::new();
        for k in 0..=4000 {
            seen.insert(m.cell_of_point(lerp(p, q, k as f64 / 4000.0)));
        }
        seen.len()
    }

    #[test]
    fn unit_segments_meet_at_most_five_cells() {
        let g = UnitDiskGraph::new(vec![Point::new(0.0, 0.0)]).unwrap();
        let m = GridMap::with_offset(&g, (0.0, 0.0));
        let mut worst = 0;
        for a in 0..24 {
            for b in 0..24 {
                for t in 0..32 {
                    let p = Point::new(a as f64 * CELL_SIDE / 24.0 + 1e-7, b as f64 * CELL_SIDE / 24.0 + 1e-7);
                    let th = t as f64 * std::f64::consts::PI / 16.0;
                    let q = Point::new(p.x + th.cos(), p.y + th.sin());
                    let n = m.segment_cells(p, q);
                    assert_eq!(n as usize, sampled_cells(&m, p, q).max(n as usize));
                    worst = worst.max(n);
                }
            }
        }
        assert!(worst <= 5);
        assert!(worst >= 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn cells_are_cliques_and_edges_bounded(p in prop::collection::vec((0.0..3.0f64, 0.0..3.0f64), 1..60)) {
            let mut pts: Vec<Point> = p.into_iter().map(|(x, y)| Point::new(x, y)).collect();
            pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
            pts.dedup();
            let g = UnitDiskGraph::new(pts).unwrap();
            let m = GridMap::build(&g);
            for (_, vs) in m.occupied() {
                for i in 0..vs.len() { for j in i+1..vs.len() {
                    prop_assert!(g.has_edge(vs[i] as usize, vs[j] as usize));
                }}
            }
            let a = m.constants().alpha;
            prop_assert!((1..=5).contains(&a));
            for &(x, y) in g.edges() {
                prop_assert!(m.segment_cells(g.point(x as usize), g.point(y as usize)) <= a);
            }
            let total: f64 = m.stats().iter().map(|s| s.clique_weight).sum();
            prop_assert!((total - m.total_weight()).abs() < 1e-9);
        }
    }
}
