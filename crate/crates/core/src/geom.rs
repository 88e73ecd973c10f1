use std::collections::HashMap;
use std::path::Path;

use robust::{orient2d, Coord};
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist2(self, o: Point) -> f64 {
        let (dx, dy) = (self.x - o.x, self.y - o.y);
        dx * dx + dy * dy
    }

    fn coord(self) -> Coord<f64> {
        Coord { x: self.x, y: self.y }
    }
}

/// Sign of the exact orientation of `c` relative to the directed line `a -> b`.
pub fn orient(a: Point, b: Point, c: Point) -> i8 {
    let d = orient2d(a.coord(), b.coord(), c.coord());
    if d > 0.0 {
        1
    } else if d < 0.0 {
        -1
    } else {
        0
    }
}

/// Proper crossing: the open segments meet in exactly one interior point.
pub fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0 && o3 * o4 < 0
}

pub fn segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool {
    let on = |p: Point, q: Point, r: Point| {
        orient(p, q, r) == 0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    (o1 * o2 < 0 && o3 * o4 < 0) || on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b)
}

/// Parameter `t` along `a -> b` of the intersection with line `c -> d`.
pub fn intersection_param(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let r = (b.x - a.x, b.y - a.y);
    let s = (d.x - c.x, d.y - c.y);
    let den = r.0 * s.1 - r.1 * s.0;
    ((c.x - a.x) * s.1 - (c.y - a.y) * s.0) / den
}

pub fn lerp(a: Point, b: Point, t: f64) -> Point {
    Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

impl VertexId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitDiskGraph {
    points: Vec<Point>,
    edges: Vec<(u32, u32)>,
    #[serde(skip)]
    adj: Vec<Vec<u32>>,
    #[serde(skip)]
    edge_index: HashMap<(u32, u32), u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentCrossing {
    pub edge_a: EdgeId,
    pub edge_b: EdgeId,
    pub point: Point,
}

impl UnitDiskGraph {
    pub fn new(points: Vec<Point>) -> Result<Self, Error> {
        if points.is_empty() {
            return Err(Error::Input("empty point set".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::Input(format!("point {i} has a non-finite coordinate")));
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(points[a].y.total_cmp(&points[b].y)));
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(Error::DuplicatePoint(a, b));
            }
        }
        // sweep over x-sorted points; only pairs with |dx| <= 1 can be adjacent
        let mut edges = Vec::new();
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if points[j].x - points[i].x > 1.0 {
                    break;
                }
                if points[i].dist2(points[j]) <= 1.0 {
                    edges.push((i.min(j) as u32, i.max(j) as u32));
                }
            }
        }
        edges.sort_unstable();
        Ok(Self::from_parts(points, edges))
    }

    /// Abstract straight-line drawing with an arbitrary edge set (not necessarily a UDG).
    pub fn from_drawing(points: Vec<Point>, edges: &[(u32, u32)]) -> Self {
        let mut es: Vec<(u32, u32)> = edges
            .iter()
            .filter(|(a, b)| a != b)
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        es.sort_unstable();
        es.dedup();
        Self::from_parts(points, es)
    }

    fn from_parts(points: Vec<Point>, edges: Vec<(u32, u32)>) -> Self {
        let mut adj = vec![Vec::new(); points.len()];
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (e, &(a, b)) in edges.iter().enumerate() {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
            edge_index.insert((a, b), e as u32);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        UnitDiskGraph { points, edges, adj, edge_index }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, v: usize) -> Point {
        self.points[v]
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        let (a, b) = self.edges[e];
        (a as usize, b as usize)
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_id(a, b).is_some()
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b) as u32, a.max(b) as u32);
        self.edge_index.get(&key).map(|&e| e as usize)
    }

    /// Induced subgraph on `keep` (sorted old ids); returns the graph and the old id of each new vertex.
    pub fn induced(&self, keep: &[usize]) -> (UnitDiskGraph, Vec<usize>) {
        let mut new_id = vec![u32::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            new_id[v] = i as u32;
        }
        let pts = keep.iter().map(|&v| self.points[v]).collect();
        let edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .filter(|(a, b)| new_id[*a as usize] != u32::MAX && new_id[*b as usize] != u32::MAX)
            .map(|&(a, b)| (new_id[a as usize], new_id[b as usize]))
            .collect();
        (Self::from_drawing(pts, &edges), keep.to_vec())
    }

    pub fn find_crossings(&self) -> Vec<SegmentCrossing> {
        let mut boxes: Vec<(f64, f64, usize)> = self
            .edges
            .iter()
            .enumerate()
            .map(|(e, &(a, b))| {
                let (pa, pb) = (self.points[a as usize], self.points[b as usize]);
                (pa.x.min(pb.x), pa.x.max(pb.x), e)
            })
            .collect();
        boxes.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut out = Vec::new();
        for i in 0..boxes.len() {
            let (_, hi, e) = boxes[i];
            for &(lo2, _, f) in &boxes[i + 1..] {
                if lo2 > hi {
                    break;
                }
                let (a, b) = self.edges[e];
                let (c, d) = self.edges[f];
                if a == c || a == d || b == c || b == d {
                    continue;
                }
                let (pa, pb) = (self.points[a as usize], self.points[b as usize]);
                let (pc, pd) = (self.points[c as usize], self.points[d as usize]);
                if segments_cross(pa, pb, pc, pd) {
                    let t = intersection_param(pa, pb, pc, pd);
                    let (e, f) = (e.min(f), e.max(f));
                    out.push(SegmentCrossing { edge_a: EdgeId(e as u32), edge_b: EdgeId(f as u32), point: lerp(pa, pb, t) });
                }
            }
        }
        out.sort_by_key(|c| (c.edge_a, c.edge_b));
        out
    }

    /// Every crossing pair has three endpoints forming a triangle; returns the violations.
    pub fn check_icf(&self) -> (bool, Vec<SegmentCrossing>) {
        let bad: Vec<SegmentCrossing> = self
            .find_crossings()
            .into_iter()
            .filter(|c| {
                let (x, x2) = self.edge(c.edge_a.idx());
                let (y, y2) = self.edge(c.edge_b.idx());
                let q = [x, x2, y, y2];
                let tri = |a: usize, b: usize, c: usize| self.has_edge(q[a], q[b]) && self.has_edge(q[b], q[c]) && self.has_edge(q[a], q[c]);
                !(tri(0, 1, 2) || tri(0, 1, 3) || tri(0, 2, 3) || tri(1, 2, 3))
            })
            .collect();
        (bad.is_empty(), bad)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.points.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
            "edges": self.edges,
        })
    }
}

pub fn parse_points_csv(text: &str) -> Result<Vec<Point>, Error> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut pts = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Input(format!("csv: {e}")))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 2 && rec[0].eq_ignore_ascii_case("x") && rec[1].eq_ignore_ascii_case("y") {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::Input(format!("line {line}: expected `x,y`, got {} fields", rec.len())));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Input(format!("line {line}: bad number `{s}`")));
        pts.push(Point::new(parse(&rec[0])?, parse(&rec[1])?));
    }
    Ok(pts)
}

pub fn parse_points_json(text: &str) -> Result<Vec<Point>, Error> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Input(format!("json: {e}")))?;
    let arr = v
        .get("vertices")
        .unwrap_or(&v)
        .as_array()
        .ok_or_else(|| Error::Input("json: expected an array of points".into()))?;
    arr.iter()
        .enumerate()
        .map(|(i, p)| {
            let xy = match p {
                serde_json::Value::Array(a) if a.len() == 2 => (a[0].as_f64(), a[1].as_f64()),
                serde_json::Value::Object(o) => (o.get("x").and_then(|x| x.as_f64()), o.get("y").and_then(|y| y.as_f64())),
                _ => (None, None),
            };
            match xy {
                (Some(x), Some(y)) => Ok(Point::new(x, y)),
                _ => Err(Error::Input(format!("json: point {i} is malformed"))),
            }
        })
        .collect()
}

pub fn read_points(path: &Path) -> Result<Vec<Point>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with(['[', '{']) {
        parse_points_json(&text)
    } else {
        parse_points_csv(&text)
    }
}
