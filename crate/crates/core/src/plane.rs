use std::collections::{HashMap, VecDeque};

use crate::geom::Point;
use crate::Error;

pub const NONE: u32 = u32::MAX;

/// Plane multigraph stored as darts. Dart `2e` runs `edges[e].0 -> edges[e].1`, dart `2e+1` the reverse.
/// `next[d]` is the successor of `d` on the face to its left.
#[derive(Debug, Clone)]
pub struct PlaneGraph {
    pub n: usize,
    pub coords: Vec<Option<Point>>,
    pub edges: Vec<(u32, u32)>,
    pub next: Vec<u32>,
    pub face_of: Vec<u32>,
    /// One start dart per boundary walk of each face.
    pub faces: Vec<Vec<u32>>,
    pub outer: u32,
}

pub fn twin(d: u32) -> u32 {
    d ^ 1
}

pub fn edge_of(d: u32) -> u32 {
    d >> 1
}

impl PlaneGraph {
    pub fn tail(&self, d: u32) -> u32 {
        let (a, b) = self.edges[(d >> 1) as usize];
        if d & 1 == 0 {
            a
        } else {
            b
        }
    }

    pub fn head(&self, d: u32) -> u32 {
        self.tail(d ^ 1)
    }

    pub fn num_darts(&self) -> usize {
        self.edges.len() * 2
    }

    pub fn walk(&self, start: u32) -> Vec<u32> {
        let mut w = vec![start];
        let mut d = self.next[start as usize];
        while d != start {
            w.push(d);
            d = self.next[d as usize];
        }
        w
    }

    pub fn face_darts(&self, f: u32) -> Vec<u32> {
        self.faces[f as usize].iter().flat_map(|&s| self.walk(s)).collect()
    }

    /// Predecessor of every dart along its face walk.
    pub fn prev(&self) -> Vec<u32> {
        let mut p = vec![NONE; self.next.len()];
        for (d, &nx) in self.next.iter().enumerate() {
            p[nx as usize] = d as u32;
        }
        p
    }

    /// Outgoing darts of every vertex, in rotation order (counter-clockwise).
    pub fn rotations(&self) -> Vec<Vec<u32>> {
        let prev = self.prev();
        let mut seen = vec![false; self.next.len()];
        let mut rot = vec![Vec::new(); self.n];
        for d in 0..self.next.len() as u32 {
            if seen[d as usize] {
                continue;
            }
            let v = self.tail(d);
            let mut x = d;
            loop {
                seen[x as usize] = true;
                rot[v as usize].push(x);
                // counter-clockwise successor of x around its tail
                x = twin(prev[x as usize]);
                if x == d {
                    break;
                }
            }
        }
        rot
    }

    pub fn degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(a, b) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }

    /// Build faces from a rotation system (outgoing darts of each vertex in counter-clockwise order).
    /// Every walk becomes its own face; `outer` is chosen by the caller.
    pub fn from_rotation(n: usize, edges: Vec<(u32, u32)>, rot: &[Vec<u32>]) -> PlaneGraph {
        let nd = edges.len() * 2;
        let mut pos = vec![0usize; nd];
        for r in rot {
            for (i, &d) in r.iter().enumerate() {
                pos[d as usize] = i;
            }
        }
        let mut g = PlaneGraph { n, coords: vec![None; n], edges, next: vec![NONE; nd], face_of: vec![NONE; nd], faces: vec![], outer: 0 };
        for d in 0..nd as u32 {
            let t = twin(d);
            let v = g.tail(t) as usize;
            let r = &rot[v];
            let i = pos[t as usize];
            g.next[d as usize] = r[(i + r.len() - 1) % r.len()];
        }
        g.assign_walk_faces();
        g
    }

    fn assign_walk_faces(&mut self) {
        self.faces.clear();
        self.face_of.iter_mut().for_each(|f| *f = NONE);
        for d in 0..self.next.len() as u32 {
            if self.face_of[d as usize] != NONE {
                continue;
            }
            let f = self.faces.len() as u32;
            for x in self.walk(d) {
                self.face_of[x as usize] = f;
            }
            self.faces.push(vec![d]);
        }
    }

    /// Straight-line drawing (assumed crossing-free). Components nested inside a face become extra walks of it.
    pub fn from_straight_line(points: &[Point], edges: &[(u32, u32)]) -> PlaneGraph {
        let n = points.len();
        let mut rot: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (e, &(a, b)) in edges.iter().enumerate() {
            rot[a as usize].push(2 * e as u32);
            rot[b as usize].push(2 * e as u32 + 1);
        }
        let angle = |d: u32, v: usize| {
            let (a, b) = edges[(d >> 1) as usize];
            let w = if d & 1 == 0 { b } else { a } as usize;
            let _ = v;
            (points[w].y - points[v].y).atan2(points[w].x - points[v].x)
        };
        for (v, r) in rot.iter_mut().enumerate() {
            r.sort_by(|&x, &y| angle(x, v).total_cmp(&angle(y, v)));
        }
        let mut g = PlaneGraph::from_rotation(n, edges.to_vec(), &rot);
        g.coords = points.iter().map(|&p| Some(p)).collect();
        g.nest_walks();
        g
    }

    fn walk_polygon(&self, start: u32) -> Vec<Point> {
        self.walk(start).iter().map(|&d| self.coords[self.tail(d) as usize].expect("coordinates")).collect()
    }

    /// Merge walks into faces using geometry: every component's outer walk joins the innermost
    /// bounded walk of another component that contains it; the rest form the unbounded face.
    fn nest_walks(&mut self) {
        let walks: Vec<u32> = self.faces.iter().map(|f| f[0]).collect();
        let comp = self.components();
        let area: Vec<f64> = walks.iter().map(|&w| signed_area(&self.walk_polygon(w))).collect();
        let ncomp = comp.iter().filter(|&&c| c != NONE).max().map_or(0, |&c| c as usize + 1);
        // outer walk of a component: the one with the smallest signed area
        let mut outer_walk = vec![NONE; ncomp];
        for (i, &w) in walks.iter().enumerate() {
            let c = comp[self.tail(w) as usize] as usize;
            if outer_walk[c] == NONE || area[i] < area[outer_walk[c] as usize] {
                outer_walk[c] = i as u32;
            }
        }
        let bboxes: Vec<(f64, f64, f64, f64)> = walks.iter().map(|&w| bbox(&self.walk_polygon(w))).collect();
        let mut owner = vec![NONE; walks.len()];
        for c in 0..ncomp {
            let ow = outer_walk[c] as usize;
            let p = self.coords[self.tail(walks[ow]) as usize].unwrap();
            let mut best: Option<(f64, usize)> = None;
            for (i, &w) in walks.iter().enumerate() {
                if comp[self.tail(w) as usize] as usize == c || outer_walk[comp[self.tail(w) as usize] as usize] as usize == i {
                    continue;
                }
                let bb = bboxes[i];
                if p.x < bb.0 || p.x > bb.2 || p.y < bb.1 || p.y > bb.3 {
                    continue;
                }
                if point_in_polygon(p, &self.walk_polygon(w)) && best.map_or(true, |(a, _)| area[i] < a) {
                    best = Some((area[i], i));
                }
            }
            if let Some((_, i)) = best {
                owner[ow] = i as u32;
            }
        }
        // faces: every bounded walk, plus one unbounded face collecting top-level outer walks
        let mut face_id = vec![NONE; walks.len()];
        let mut faces: Vec<Vec<u32>> = Vec::new();
        let outer = 0u32;
        faces.push(Vec::new());
        for (i, &w) in walks.iter().enumerate() {
            let c = comp[self.tail(w) as usize] as usize;
            if outer_walk[c] as usize != i {
                face_id[i] = faces.len() as u32;
                faces.push(vec![w]);
            }
        }
        for c in 0..ncomp {
            let ow = outer_walk[c] as usize;
            let f = if owner[ow] == NONE { outer } else { face_id[owner[ow] as usize] };
            face_id[ow] = f;
            faces[f as usize].push(walks[ow]);
        }
        for (i, &w) in walks.iter().enumerate() {
            for d in self.walk(w) {
                self.face_of[d as usize] = face_id[i];
            }
        }
        if faces[0].is_empty() && faces.len() > 1 {
            // no edges at all never reaches here; keep the empty outer face for uniformity
        }
        self.faces = faces;
        self.outer = outer;
    }

    /// Connected component id per vertex (NONE for isolated vertices).
    pub fn components(&self) -> Vec<u32> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        let mut comp = vec![NONE; self.n];
        let mut k = 0;
        for s in 0..self.n {
            if comp[s] != NONE || adj[s].is_empty() {
                continue;
            }
            comp[s] = k;
            let mut q = vec![s];
            while let Some(v) = q.pop() {
                for &w in &adj[v] {
                    if comp[w as usize] == NONE {
                        comp[w as usize] = k;
                        q.push(w as usize);
                    }
                }
            }
            k += 1;
        }
        comp
    }

    /// Glue oriented triangles along shared edge keys. Each key must occur in exactly two triangles
    /// with opposite orientation.
    pub fn from_triangles(n: usize, tris: &[[(u32, u64); 3]]) -> Result<PlaneGraph, Error> {
        let mut key_edge: HashMap<u64, u32> = HashMap::with_capacity(tris.len() * 2);
        let mut edges: Vec<(u32, u32)> = Vec::with_capacity(tris.len() * 3 / 2);
        let mut dart_of = vec![[NONE; 3]; tris.len()];
        let mut used = Vec::new();
        for (t, tri) in tris.iter().enumerate() {
            for i in 0..3 {
                let (a, k) = tri[i];
                let b = tri[(i + 1) % 3].0;
                let d = match key_edge.get(&k) {
                    None => {
                        let e = edges.len() as u32;
                        key_edge.insert(k, e);
                        edges.push((a, b));
                        used.push(1u8);
                        2 * e
                    }
                    Some(&e) => {
                        if edges[e as usize] != (b, a) || used[e as usize] != 1 {
                            return Err(Error::Audit(format!("edge key {k} glued inconsistently")));
                        }
                        used[e as usize] = 2;
                        2 * e + 1
                    }
                };
                dart_of[t][i] = d;
            }
        }
        if used.iter().any(|&u| u != 2) {
            return Err(Error::Audit("triangle set is not a closed surface".into()));
        }
        let nd = edges.len() * 2;
        let mut g = PlaneGraph { n, coords: vec![None; n], edges, next: vec![NONE; nd], face_of: vec![NONE; nd], faces: Vec::with_capacity(tris.len()), outer: 0 };
        for (t, ds) in dart_of.iter().enumerate() {
            for i in 0..3 {
                g.next[ds[i] as usize] = ds[(i + 1) % 3];
                g.face_of[ds[i] as usize] = t as u32;
            }
            g.faces.push(vec![ds[0]]);
        }
        Ok(g)
    }

    pub fn is_triangulated(&self) -> bool {
        self.faces.iter().all(|f| f.len() == 1 && self.walk(f[0]).len() == 3)
    }

    /// V - E + F summed over the whole map, where nested walks share a face.
    pub fn euler(&self) -> i64 {
        let isolated = self.degree().iter().filter(|&&d| d == 0).count();
        (self.n - isolated) as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn connected(&self) -> bool {
        let c = self.components();
        c.iter().all(|&x| x == 0)
    }
}

impl PlaneGraph {
    /// Contract every maximal path through unkept vertices into a single edge. Unkept vertices must
    /// have degree two, and every cycle must contain a kept vertex. Face ids are preserved.
    /// Returns the contracted graph, the old id of each new vertex and the old darts behind each new dart `2e`.
    pub fn contract_chains(&self, keep: &[bool]) -> (PlaneGraph, Vec<u32>, Vec<Vec<u32>>) {
        let mut new_id = vec![NONE; self.n];
        let mut old_of = Vec::new();
        for v in 0..self.n {
            if keep[v] {
                new_id[v] = old_of.len() as u32;
                old_of.push(v as u32);
            }
        }
        let nd = self.num_darts();
        let mut new_dart = vec![NONE; nd];
        let mut edges = Vec::new();
        let mut chains: Vec<Vec<u32>> = Vec::new();
        for d in 0..nd as u32 {
            if !keep[self.tail(d) as usize] || new_dart[d as usize] != NONE {
                continue;
            }
            let mut chain = vec![d];
            let mut x = d;
            while !keep[self.head(x) as usize] {
                x = self.next[x as usize];
                chain.push(x);
            }
            let e = edges.len() as u32;
            edges.push((new_id[self.tail(d) as usize], new_id[self.head(x) as usize]));
            new_dart[d as usize] = 2 * e;
            new_dart[twin(x) as usize] = 2 * e + 1;
            for &c in &chain[1..] {
                new_dart[c as usize] = 2 * e;
            }
            chains.push(chain);
        }
        let m = edges.len();
        let mut next = vec![NONE; 2 * m];
        let mut face_of = vec![NONE; 2 * m];
        for (e, chain) in chains.iter().enumerate() {
            let fwd_last = *chain.last().unwrap();
            let back_last = twin(chain[0]);
            for (nd_, first, last) in [(2 * e, chain[0], fwd_last), (2 * e + 1, twin(fwd_last), back_last)] {
                next[nd_] = new_dart[self.next[last as usize] as usize];
                face_of[nd_] = self.face_of[first as usize];
            }
        }
        let faces = self
            .faces
            .iter()
            .map(|walks| {
                walks
                    .iter()
                    .map(|&s| {
                        let w = self.walk(s);
                        let d = *w.iter().find(|&&d| keep[self.tail(d) as usize]).expect("every walk meets a kept vertex");
                        let e = edge_of(new_dart[d as usize]) as usize;
                        if chains[e][0] == d {
                            2 * e as u32
                        } else {
                            2 * e as u32 + 1
                        }
                    })
                    .collect()
            })
            .collect();
        let coords = old_of.iter().map(|&v| self.coords[v as usize]).collect();
        let g = PlaneGraph { n: old_of.len(), coords, edges, next, face_of, faces, outer: self.outer };
        (g, old_of, chains)
    }

    /// Face containing `p`, for a straight-line graph: the smallest bounded walk around `p`.
    pub fn locate(&self, p: Point) -> u32 {
        let mut best: Option<(f64, u32)> = None;
        for (f, walks) in self.faces.iter().enumerate() {
            for &s in walks {
                let poly = self.walk_polygon(s);
                let a = signed_area(&poly);
                if a <= 0.0 || best.is_some_and(|(b, _)| a >= b) {
                    continue;
                }
                let (x0, y0, x1, y1) = bbox(&poly);
                if p.x < x0 || p.x > x1 || p.y < y0 || p.y > y1 {
                    continue;
                }
                if point_in_polygon(p, &poly) {
                    best = Some((a, f as u32));
                }
            }
        }
        best.map_or(self.outer, |(_, f)| f)
    }
}

pub fn signed_area(poly: &[Point]) -> f64 {
    let mut s = 0.0;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        s += p.x * q.y - q.x * p.y;
    }
    s / 2.0
}

fn bbox(poly: &[Point]) -> (f64, f64, f64, f64) {
    poly.iter().fold((f64::MAX, f64::MAX, f64::MIN, f64::MIN), |b, p| (b.0.min(p.x), b.1.min(p.y), b.2.max(p.x), b.3.max(p.y)))
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Result of inserting auxiliary vertices: `aux[v]` is true for inserted vertices, and
/// `sector[f]` names the original dart whose edge lies on triangle `f` (NONE for filler triangles).
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub graph: PlaneGraph,
    pub aux: Vec<bool>,
    pub sector: Vec<u32>,
    /// Original face of each auxiliary vertex (NONE for second-level ones).
    pub aux_face: Vec<u32>,
    /// Original edge id for triangulation edges that come from the input graph.
    pub orig_edge: Vec<u32>,
}

/// Put one auxiliary vertex into every face and join it to every corner. Faces with several
/// boundary walks leave non-triangular junction faces, which get a second auxiliary vertex.
pub fn triangulate_with_aux(h: &PlaneGraph) -> Triangulation {
    let (g1, aux1, face1, orig1) = insert_aux(h, |_| true, &(0..h.edges.len() as u32).collect::<Vec<_>>());
    let needs: Vec<bool> = (0..g1.faces.len()).map(|f| !(g1.faces[f].len() == 1 && g1.walk(g1.faces[f][0]).len() == 3)).collect();
    let (g2, aux2, _, orig2) = insert_aux(&g1, |f| needs[f as usize], &orig1);
    let mut aux = aux1.clone();
    aux.resize(g2.n, true);
    let _ = aux2;
    let mut aux_face = face1;
    aux_face.resize(g2.n, NONE);
    let mut sector = vec![NONE; g2.faces.len()];
    for (f, s) in sector.iter_mut().enumerate() {
        for d in g2.walk(g2.faces[f][0]) {
            let o = orig2[edge_of(d) as usize];
            if o != NONE {
                let (a, _) = h.edges[o as usize];
                *s = if g2.tail(d) == a { 2 * o } else { 2 * o + 1 };
            }
        }
    }
    Triangulation { graph: g2, aux, sector, aux_face, orig_edge: orig2 }
}

/// Returns the new graph, aux flags, the source face of each new vertex, and the original-edge map.
fn insert_aux(h: &PlaneGraph, pick: impl Fn(u32) -> bool, orig: &[u32]) -> (PlaneGraph, Vec<bool>, Vec<u32>, Vec<u32>) {
    let mut rot = h.rotations();
    let mut edges = h.edges.clone();
    let mut orig_edge = orig.to_vec();
    let mut aux = vec![false; h.n];
    let mut src_face = vec![NONE; h.n];
    let mut n = h.n;
    let mut insert_after: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut aux_rot: Vec<Vec<u32>> = Vec::new();
    for f in 0..h.faces.len() as u32 {
        if !pick(f) {
            continue;
        }
        let a = n as u32;
        n += 1;
        aux.push(true);
        src_face.push(f);
        let mut ar = Vec::new();
        for &s in &h.faces[f as usize] {
            for d in h.walk(s) {
                let x = h.tail(d);
                let e = edges.len() as u32;
                edges.push((x, a));
                orig_edge.push(NONE);
                insert_after.entry(d).or_default().push(2 * e);
                ar.push(2 * e + 1);
            }
        }
        aux_rot.push(ar);
    }
    for r in rot.iter_mut() {
        let mut out = Vec::with_capacity(r.len());
        for &d in r.iter() {
            out.push(d);
            if let Some(extra) = insert_after.get(&d) {
                out.extend_from_slice(extra);
            }
        }
        *r = out;
    }
    rot.extend(aux_rot);
    let g = PlaneGraph::from_rotation(n, edges, &rot);
    (g, aux, src_face, orig_edge)
}

/// A noose: closed curve given by the triangulation edges it runs along.
#[derive(Debug, Clone, Default)]
pub struct Noose {
    pub vertices: Vec<u32>,
    pub edges: Vec<u32>,
}

/// A piece of a triangulated sphere: a set of triangles plus its holes (complement components).
#[derive(Debug, Clone, Default)]
pub struct Piece {
    pub tris: Vec<u32>,
    pub rank: usize,
    /// Boundary edges of the piece with the hole lying across them.
    pub boundary: Vec<(u32, u32)>,
}

impl Piece {
    pub fn whole(t: &PlaneGraph) -> Piece {
        Piece { tris: (0..t.faces.len() as u32).collect(), rank: 0, boundary: vec![] }
    }
}

/// Per-map helper: which face lies across each dart, and triangle adjacency.
pub struct TriMap<'a> {
    pub g: &'a PlaneGraph,
}

impl<'a> TriMap<'a> {
    pub fn across(&self, f: u32) -> [(u32, u32); 3] {
        let w = self.g.walk(self.g.faces[f as usize][0]);
        let mut out = [(NONE, NONE); 3];
        for (i, &d) in w.iter().take(3).enumerate() {
            out[i] = (edge_of(d), self.g.face_of[twin(d) as usize]);
        }
        out
    }

    pub fn corners(&self, f: u32) -> [u32; 3] {
        let w = self.g.walk(self.g.faces[f as usize][0]);
        [self.g.tail(w[0]), self.g.tail(w[1]), self.g.tail(w[2])]
    }
}

/// Connected components of `tris` under edge adjacency, never crossing an edge in `blocked`.
pub fn tri_components(t: &PlaneGraph, tris: &[u32], blocked: &dyn Fn(u32) -> bool, member: &dyn Fn(u32) -> bool) -> Vec<Vec<u32>> {
    let mut label: HashMap<u32, usize> = HashMap::with_capacity(tris.len());
    let mut comps: Vec<Vec<u32>> = Vec::new();
    for &s in tris {
        if label.contains_key(&s) {
            continue;
        }
        let id = comps.len();
        label.insert(s, id);
        let mut comp = vec![s];
        let mut q = VecDeque::from([s]);
        while let Some(f) = q.pop_front() {
            for d in t.walk(t.faces[f as usize][0]) {
                let e = edge_of(d);
                if blocked(e) {
                    continue;
                }
                let g = t.face_of[twin(d) as usize];
                if member(g) && !label.contains_key(&g) {
                    label.insert(g, id);
                    comp.push(g);
                    q.push_back(g);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

struct Dsu(Vec<u32>);

impl Dsu {
    fn find(&mut self, x: u32) -> u32 {
        let mut r = x;
        while self.0[r as usize] != r {
            r = self.0[r as usize];
        }
        let mut y = x;
        while self.0[y as usize] != r {
            let nx = self.0[y as usize];
            self.0[y as usize] = r;
            y = nx;
        }
        r
    }
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb) as usize] = ra.min(rb);
        }
    }
}

/// Derive hole structure of child pieces that partition `parent`.
pub fn child_pieces(t: &PlaneGraph, parent: &Piece, parts: Vec<Vec<u32>>) -> Vec<Piece> {
    let hole_at: HashMap<u32, u32> = parent.boundary.iter().copied().collect();
    let mut part_of: HashMap<u32, usize> = HashMap::with_capacity(parent.tris.len());
    for (i, p) in parts.iter().enumerate() {
        for &f in p {
            part_of.insert(f, i);
        }
    }
    let local: HashMap<u32, u32> = parent.tris.iter().enumerate().map(|(i, &f)| (f, i as u32)).collect();
    let r = parent.rank as u32;
    parts
        .iter()
        .enumerate()
        .map(|(pi, part)| {
            let mut dsu = Dsu((0..r + parent.tris.len() as u32).collect());
            for &f in &parent.tris {
                if part_of[&f] == pi {
                    continue;
                }
                let lf = r + local[&f];
                for d in t.walk(t.faces[f as usize][0]) {
                    let g = t.face_of[twin(d) as usize];
                    match part_of.get(&g) {
                        Some(&pj) if pj != pi => dsu.union(lf, r + local[&g]),
                        Some(_) => {}
                        None => dsu.union(lf, hole_at[&edge_of(d)]),
                    }
                }
            }
            let mut roots: HashMap<u32, u32> = HashMap::new();
            let mut boundary = Vec::new();
            for &f in part {
                for d in t.walk(t.faces[f as usize][0]) {
                    let g = t.face_of[twin(d) as usize];
                    let node = match part_of.get(&g) {
                        Some(&pj) if pj == pi => continue,
                        Some(_) => r + local[&g],
                        None => hole_at[&edge_of(d)],
                    };
                    let root = dsu.find(node);
                    let k = roots.len() as u32;
                    let id = *roots.entry(root).or_insert(k);
                    boundary.push((edge_of(d), id));
                }
            }
            // complement parts that touch the piece only at vertices still count as holes
            let mut all_roots: Vec<u32> = (0..r).map(|h| dsu.find(h)).collect();
            for &f in &parent.tris {
                if part_of[&f] != pi {
                    all_roots.push(dsu.find(r + local[&f]));
                }
            }
            all_roots.sort_unstable();
            all_roots.dedup();
            boundary.sort_unstable();
            boundary.dedup();
            Piece { tris: part.clone(), rank: all_roots.len(), boundary }
        })
        .collect()
}

/// Split a piece along a noose. Triangles on the two sides of any uncuttable edge lying on the
/// noose are kept together by moving one of them across.
pub fn cut_piece(t: &PlaneGraph, a: &Piece, noose: &Noose, uncuttable: &dyn Fn(u32) -> bool) -> Result<Vec<Piece>, Error> {
    let inside: std::collections::HashSet<u32> = a.tris.iter().copied().collect();
    for &e in &noose.edges {
        let (f, g) = (t.face_of[2 * e as usize], t.face_of[2 * e as usize + 1]);
        if !inside.contains(&f) && !inside.contains(&g) {
            return Err(Error::Audit(format!("noose edge {e} escapes the piece")));
        }
    }
    let on: std::collections::HashSet<u32> = noose.edges.iter().copied().collect();
    let mut sides = tri_components(t, &a.tris, &|e| on.contains(&e), &|f| inside.contains(&f));
    let mut side_of: HashMap<u32, usize> = HashMap::new();
    for (i, s) in sides.iter().enumerate() {
        for &f in s {
            side_of.insert(f, i);
        }
    }
    for &e in &noose.edges {
        if !uncuttable(e) {
            continue;
        }
        let (f, g) = (t.face_of[2 * e as usize], t.face_of[2 * e as usize + 1]);
        if let (Some(&sf), Some(&sg)) = (side_of.get(&f), side_of.get(&g)) {
            if sf != sg {
                let (keep, mv) = if sides[sf].len() >= sides[sg].len() { (sf, g) } else { (sg, f) };
                side_of.insert(mv, keep);
            }
        }
    }
    for s in sides.iter_mut() {
        s.clear();
    }
    for &f in &a.tris {
        sides[side_of[&f]].push(f);
    }
    let mut parts = Vec::new();
    for s in sides.into_iter().filter(|s| !s.is_empty()) {
        let set: std::collections::HashSet<u32> = s.iter().copied().collect();
        parts.extend(tri_components(t, &s, &|_| false, &|f| set.contains(&f)));
    }
    Ok(child_pieces(t, a, parts))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::gen::random_triangulation;

    fn grid_graph(w: usize, h: usize) -> PlaneGraph {
        let mut pts = Vec::new();
        let mut edges = Vec::new();
        for j in 0..h {
            for i in 0..w {
                pts.push(Point::new(i as f64, j as f64));
                let v = (j * w + i) as u32;
                if i + 1 < w {
                    edges.push((v, v + 1));
                }
                if j + 1 < h {
                    edges.push((v, v + w as u32));
                }
            }
        }
        PlaneGraph::from_straight_line(&pts, &edges)
    }

    #[test]
    fn square_face_gets_one_aux_vertex() {
        let pts = [Point::new(0., 0.), Point::new(1., 0.), Point::new(1., 1.), Point::new(0., 1.)];
        let g = PlaneGraph::from_straight_line(&pts, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(g.faces.len(), 2);
        assert_eq!(g.euler(), 2);
        let t = triangulate_with_aux(&g);
        assert_eq!(t.graph.n, 6);
        assert_eq!(t.graph.edges.len(), 12);
        assert!(t.graph.is_triangulated());
        assert_eq!(t.graph.faces.len(), 8);
        assert_eq!(t.graph.euler(), 2);
    }

    #[test]
    fn triangle_still_gets_aux() {
        let pts = [Point::new(0., 0.), Point::new(1., 0.), Point::new(0., 1.)];
        let g = PlaneGraph::from_straight_line(&pts, &[(0, 1), (1, 2), (2, 0)]);
        let t = triangulate_with_aux(&g);
        assert_eq!(t.graph.n, 5);
        assert_eq!(t.aux.iter().filter(|&&a| a).count(), 2);
        assert!(t.graph.is_triangulated());
    }

    #[test]
    fn nested_components_share_faces() {
        // square inside a square, plus a separate segment outside
        let pts = [
            Point::new(0., 0.), Point::new(10., 0.), Point::new(10., 10.), Point::new(0., 10.),
            Point::new(4., 4.), Point::new(6., 4.), Point::new(6., 6.), Point::new(4., 6.),
            Point::new(20., 0.), Point::new(21., 0.),
        ];
        let e = [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4), (8, 9)];
        let g = PlaneGraph::from_straight_line(&pts, &e);
        // faces: unbounded (2 walks), annulus (2 walks), inner square
        assert_eq!(g.faces.len(), 3);
        assert_eq!(g.faces[g.outer as usize].len(), 2);
        assert_eq!(g.faces.iter().filter(|f| f.len() == 2).count(), 2);
        assert_eq!(g.euler(), 4);
        let t = triangulate_with_aux(&g);
        assert!(t.graph.is_triangulated());
        assert!(t.graph.connected());
        assert_eq!(t.graph.euler(), 2);
        // every original edge sits on exactly two triangles, both tagged with it
        for e in 0..g.edges.len() as u32 {
            let n = t.sector.iter().filter(|&&s| s != NONE && edge_of(s) == e).count();
            assert_eq!(n, 2);
        }
    }

    #[test]
    fn random_plane_graphs_triangulate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let w = rng.gen_range(2..6);
            let h = rng.gen_range(2..6);
            let g = grid_graph(w, h);
            assert_eq!(g.euler(), 2);
            let t = triangulate_with_aux(&g);
            assert!(t.graph.is_triangulated());
            assert_eq!(t.graph.euler(), 2);
            let tg = &t.graph;
            for (f, walks) in tg.faces.iter().enumerate() {
                for d in tg.walk(walks[0]) {
                    assert_eq!(tg.face_of[d as usize], f as u32);
                }
            }
        }
    }

    #[test]
    fn stacked_triangulations_are_spheres() {
        for s in 0..10 {
            let g = random_triangulation(40, s);
            assert!(g.is_triangulated());
            assert_eq!(g.euler(), 2);
            assert_eq!(g.rotations().iter().map(|r| r.len()).sum::<usize>(), g.num_darts());
        }
    }

    fn tri_faces_around(t: &PlaneGraph, v: u32) -> Vec<u32> {
        let rot = t.rotations();
        rot[v as usize].iter().map(|&d| t.face_of[d as usize]).collect()
    }

    #[test]
    fn disk_cut_by_interior_circle() {
        let g = random_triangulation(30, 9);
        let whole = Piece::whole(&g);
        // piece = everything but the star of vertex 0 (a disk); noose = link of vertex 5 inside it
        let star0 = tri_faces_around(&g, 0);
        let disk: Vec<u32> = whole.tris.iter().copied().filter(|f| !star0.contains(f)).collect();
        let parts = cut_piece(&g, &whole, &Noose { vertices: vec![], edges: link_edges(&g, 0) }, &|_| false).unwrap();
        assert_eq!(parts.len(), 2);
        let disk_piece = parts.into_iter().find(|p| p.tris == disk).unwrap();
        assert_eq!(disk_piece.rank, 1);
        // a vertex whose link stays clear of the disk boundary
        let v = (1..30).find(|&v| {
            let s = tri_faces_around(&g, v);
            let l = link_edges(&g, v);
            s.iter().all(|f| !star0.contains(f)) && l.iter().all(|&e| {
                let (a, b) = g.edges[e as usize];
                [a, b].iter().all(|&x| x != 0 && !g.edges.iter().any(|&(p, q)| (p, q) == (0, x) || (p, q) == (x, 0)))
            })
        });
        if let Some(v) = v {
            let kids = cut_piece(&g, &disk_piece, &Noose { vertices: vec![], edges: link_edges(&g, v) }, &|_| false).unwrap();
            assert_eq!(kids.len(), 2);
            let mut ranks: Vec<usize> = kids.iter().map(|k| k.rank).collect();
            ranks.sort();
            assert_eq!(ranks, vec![1, 2]);
            let total: usize = kids.iter().map(|k| k.tris.len()).sum();
            assert_eq!(total, disk_piece.tris.len());
        }
    }

    fn link_edges(g: &PlaneGraph, v: u32) -> Vec<u32> {
        let rot = g.rotations();
        rot[v as usize].iter().map(|&d| edge_of(g.next[d as usize])).collect()
    }

    #[test]
    fn noose_outside_piece_rejected() {
        let g = random_triangulation(20, 1);
        let p = Piece { tris: vec![0], rank: 1, boundary: vec![] };
        let far = (0..g.edges.len() as u32).find(|&e| g.face_of[2 * e as usize] != 0 && g.face_of[2 * e as usize + 1] != 0).unwrap();
        assert!(cut_piece(&g, &p, &Noose { vertices: vec![], edges: vec![far] }, &|_| false).is_err());
    }
}
