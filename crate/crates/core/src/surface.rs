use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::plane::{child_pieces, cut_piece, edge_of, triangulate_with_aux, twin, Noose, Piece, PlaneGraph, Triangulation, NONE};
use crate::separator::{balanced_small_separator_traced, SeparatorConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SurfaceConfig {
    /// Pieces with at most this many graph vertices are split by peeling.
    pub base: usize,
    /// Pieces of larger rank are split by a hole separator.
    pub rank_trigger: usize,
    pub separator: SeparatorConfig,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig { base: 12, rank_trigger: 100, separator: SeparatorConfig::default() }
    }
}

/// How the children of a node were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rule {
    Leaf,
    Vertex,
    Hole,
    /// Peeling a single atom off a small piece.
    Peel,
    /// Binarizing a multi-way split from an ancestor.
    Split,
}

#[derive(Debug, Clone)]
pub struct SdNode {
    pub piece: Piece,
    pub children: Option<(usize, usize)>,
    pub vertices: Vec<u32>,
    /// Graph vertices on the piece boundary.
    pub boundary: Vec<u32>,
    pub rule: Rule,
    pub depth: usize,
    pub parent: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SurfaceDecomposition {
    pub tri: Triangulation,
    /// Cycle weights of the graph vertices.
    pub c: Vec<f64>,
    pub nodes: Vec<SdNode>,
    pub root: usize,
    /// Atom id per triangle; the two triangles on an edge of the graph share an atom.
    pub atom: Vec<u32>,
    pub n: usize,
}

impl SurfaceDecomposition {
    pub fn is_graph_edge(&self, e: u32) -> bool {
        self.tri.orig_edge[e as usize] != NONE
    }

    pub fn width(&self) -> f64 {
        self.nodes.iter().map(|t| t.boundary.iter().map(|&v| self.c[v as usize]).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|t| t.depth).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_none())
    }

    /// Checks binary shape, A1 (boundaries avoid graph edges), A2 (children partition the parent)
    /// and A3 (leaves hold at most two vertices and one edge), and that hole separators never
    /// follow each other directly.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Decomposition(m));
        let t = &self.tri.graph;
        for (i, node) in self.nodes.iter().enumerate() {
            let inside: HashSet<u32> = node.piece.tris.iter().copied().collect();
            for &f in &node.piece.tris {
                for d in t.walk(t.faces[f as usize][0]) {
                    if !inside.contains(&t.face_of[twin(d) as usize]) && self.is_graph_edge(edge_of(d)) {
                        return bad(format!("A1: boundary of node {i} runs along graph edge {}", self.tri.orig_edge[edge_of(d) as usize]));
                    }
                }
            }
            match node.children {
                Some((a, b)) => {
                    let mut u: Vec<u32> = self.nodes[a].piece.tris.iter().chain(&self.nodes[b].piece.tris).copied().collect();
                    u.sort_unstable();
                    let n0 = u.len();
                    u.dedup();
                    if u.len() != n0 || u != node.piece.tris {
                        return bad(format!("A2: children of node {i} do not partition it"));
                    }
                    if self.nodes[a].piece.tris.is_empty() || self.nodes[b].piece.tris.is_empty() {
                        return bad(format!("node {i} has an empty child"));
                    }
                    if node.rule == Rule::Hole && [a, b].iter().any(|&c| self.nodes[c].rule == Rule::Hole) {
                        return bad(format!("hole separators on consecutive levels below node {i}"));
                    }
                }
                None => {
                    if node.vertices.len() > 2 {
                        return bad(format!("A3: leaf {i} holds {} vertices", node.vertices.len()));
                    }
                    let mut inner = 0;
                    for &f in &node.piece.tris {
                        for d in t.walk(t.faces[f as usize][0]) {
                            if d & 1 == 0 && self.is_graph_edge(edge_of(d)) && inside.contains(&t.face_of[twin(d) as usize]) {
                                inner += 1;
                            }
                        }
                    }
                    if inner > 1 {
                        return bad(format!("A3: leaf {i} holds {inner} edges"));
                    }
                }
            }
        }
        if self.nodes[self.root].piece.tris.len() != t.faces.len() {
            return bad("root piece is not the whole sphere".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "root": self.root,
            "width": self.width(),
            "nodes": self.nodes.iter().map(|t| serde_json::json!({
                "children": t.children,
                "rule": t.rule,
                "rank": t.piece.rank,
                "triangles": t.piece.tris.len(),
                "vertices": t.vertices,
                "boundary": t.boundary,
            })).collect::<Vec<_>>(),
        })
    }
}

struct Builder<'a> {
    tri: &'a Triangulation,
    n: usize,
    c: &'a [f64],
    cfg: SurfaceConfig,
    atom: Vec<u32>,
    incident: Vec<Vec<u32>>,
    nodes: Vec<SdNode>,
}

enum Work {
    Fresh(usize),
    Binarize(usize, Vec<Vec<u32>>),
}

/// Recursive surface decomposition of a plane graph with vertex weights `c >= 1`.
pub fn build_surface_decomposition(g: &PlaneGraph, c: &[f64], cfg: SurfaceConfig) -> Result<SurfaceDecomposition> {
    if g.edges.is_empty() {
        return Err(Error::Decomposition("graph has no edges".into()));
    }
    let tri = triangulate_with_aux(g);
    let t = &tri.graph;
    let mut dsu: Vec<u32> = (0..t.faces.len() as u32).collect();
    fn find(d: &mut [u32], x: u32) -> u32 {
        let mut r = x;
        while d[r as usize] != r {
            r = d[r as usize];
        }
        d[x as usize] = r;
        r
    }
    for e in 0..t.edges.len() as u32 {
        if tri.orig_edge[e as usize] != NONE {
            let (a, b) = (find(&mut dsu, t.face_of[2 * e as usize]), find(&mut dsu, t.face_of[2 * e as usize + 1]));
            dsu[a.max(b) as usize] = a.min(b);
        }
    }
    let atom: Vec<u32> = (0..t.faces.len() as u32).map(|f| find(&mut dsu, f)).collect();
    let mut incident = vec![Vec::new(); t.n];
    for d in 0..t.num_darts() as u32 {
        incident[t.tail(d) as usize].push(t.face_of[d as usize]);
    }
    let mut b = Builder { tri: &tri, n: g.n, c, cfg, atom, incident, nodes: Vec::new() };
    let root = b.node(Piece::whole(t), 0);
    let mut work = vec![Work::Fresh(root)];
    while let Some(w) = work.pop() {
        match w {
            Work::Fresh(i) => b.split(i, &mut work)?,
            Work::Binarize(i, parts) => b.binarize(i, parts, &mut work),
        }
    }
    let Builder { nodes, atom, .. } = b;
    Ok(SurfaceDecomposition { c: c.to_vec(), nodes, root, atom, n: g.n, tri })
}

impl<'a> Builder<'a> {
    fn node(&mut self, piece: Piece, depth: usize) -> usize {
        let t = &self.tri.graph;
        let inside: HashSet<u32> = piece.tris.iter().copied().collect();
        let mut vertices: Vec<u32> = piece.tris.iter().flat_map(|&f| t.walk(t.faces[f as usize][0]).into_iter().map(|d| t.tail(d))).filter(|&v| (v as usize) < self.n).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let boundary = vertices.iter().copied().filter(|&v| self.incident[v as usize].iter().any(|f| !inside.contains(f))).collect();
        self.nodes.push(SdNode { piece, children: None, vertices, boundary, rule: Rule::Leaf, depth, parent: None });
        self.nodes.len() - 1
    }

    fn attach(&mut self, i: usize, rule: Rule, a: Piece, b: Piece) -> (usize, usize) {
        let d = self.nodes[i].depth + 1;
        let x = self.node(a, d);
        let y = self.node(b, d);
        self.nodes[i].children = Some((x, y));
        self.nodes[i].rule = rule;
        self.nodes[x].parent = Some(i);
        self.nodes[y].parent = Some(i);
        (x, y)
    }

    fn split(&mut self, i: usize, work: &mut Vec<Work>) -> Result<()> {
        if self.nodes[i].vertices.len() <= 2 {
            return Ok(());
        }
        if self.nodes[i].vertices.len() > self.cfg.base {
            let parent_hole = self.nodes[i].parent.is_some_and(|p| self.nodes[p].rule == Rule::Hole);
            let hole = self.nodes[i].piece.rank > self.cfg.rank_trigger && !parent_hole;
            if let Some(parts) = self.separate(i, hole)? {
                let rule = if hole { Rule::Hole } else { Rule::Vertex };
                if parts.len() == 2 {
                    let kids = child_pieces(&self.tri.graph, &self.nodes[i].piece, parts);
                    let [a, b]: [Piece; 2] = kids.try_into().unwrap();
                    let (x, y) = self.attach(i, rule, a, b);
                    work.push(Work::Fresh(x));
                    work.push(Work::Fresh(y));
                } else {
                    self.nodes[i].rule = rule;
                    work.push(Work::Binarize(i, parts));
                }
                return Ok(());
            }
        }
        self.peel(i, work);
        Ok(())
    }

    fn atoms_of(&self, tris: &[u32]) -> Vec<Vec<u32>> {
        let mut groups: HashMap<u32, Vec<u32>> = HashMap::new();
        for &f in tris {
            groups.entry(self.atom[f as usize]).or_default().push(f);
        }
        let mut out: Vec<Vec<u32>> = groups.into_values().collect();
        out.sort();
        out
    }

    /// Split off one atom that is a leaf of a spanning tree of the piece's atom adjacency.
    fn peel(&mut self, i: usize, work: &mut Vec<Work>) {
        let tris = self.nodes[i].piece.tris.clone();
        let atoms = self.atoms_of(&tris);
        if atoms.len() < 2 {
            return;
        }
        let leaf = self.dfs_leaf(&atoms);
        let rest: Vec<u32> = atoms.iter().enumerate().filter(|&(k, _)| k != leaf).flat_map(|(_, a)| a.iter().copied()).collect();
        let mut rest = rest;
        rest.sort_unstable();
        let kids = child_pieces(&self.tri.graph, &self.nodes[i].piece, vec![atoms[leaf].clone(), rest]);
        let [a, b]: [Piece; 2] = kids.try_into().unwrap();
        let (_, y) = self.attach(i, Rule::Peel, a, b);
        work.push(Work::Fresh(y));
    }

    /// Index of a non-root leaf of a DFS tree over `parts` (adjacent when sharing an edge).
    fn dfs_leaf(&self, parts: &[Vec<u32>]) -> usize {
        let t = &self.tri.graph;
        let mut part_of: HashMap<u32, usize> = HashMap::new();
        for (k, p) in parts.iter().enumerate() {
            for &f in p {
                part_of.insert(f, k);
            }
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); parts.len()];
        for (k, p) in parts.iter().enumerate() {
            for &f in p {
                for d in t.walk(t.faces[f as usize][0]) {
                    if let Some(&j) = part_of.get(&t.face_of[twin(d) as usize]) {
                        if j != k && !adj[k].contains(&j) {
                            adj[k].push(j);
                        }
                    }
                }
            }
        }
        let mut seen = vec![false; parts.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut last_leaf = parts.len() - 1;
        while let Some(&x) = stack.last() {
            if let Some(&y) = adj[x].iter().find(|&&y| !seen[y]) {
                seen[y] = true;
                stack.push(y);
            } else {
                stack.pop();
                if x != 0 && adj[x].iter().all(|&y| seen[y]) {
                    last_leaf = x;
                    break;
                }
            }
        }
        last_leaf
    }

    fn binarize(&mut self, i: usize, parts: Vec<Vec<u32>>, work: &mut Vec<Work>) {
        let leaf = self.dfs_leaf(&parts);
        let mut rest_parts: Vec<Vec<u32>> = parts.iter().enumerate().filter(|&(k, _)| k != leaf).map(|(_, p)| p.clone()).collect();
        let mut rest: Vec<u32> = rest_parts.iter().flatten().copied().collect();
        rest.sort_unstable();
        let kids = child_pieces(&self.tri.graph, &self.nodes[i].piece, vec![parts[leaf].clone(), rest]);
        let [a, b]: [Piece; 2] = kids.try_into().unwrap();
        let (x, y) = self.attach(i, self.nodes[i].rule, a, b);
        work.push(Work::Fresh(x));
        if rest_parts.len() == 1 {
            work.push(Work::Fresh(y));
        } else {
            self.nodes[y].rule = Rule::Split;
            rest_parts.sort();
            work.push(Work::Binarize(y, rest_parts));
        }
    }

    /// Run the weighted cycle separator on the piece closed up by one cone per boundary circle and
    /// cut the piece along the part of the cycle inside it.
    fn separate(&self, i: usize, hole: bool) -> Result<Option<Vec<Vec<u32>>>> {
        let piece = &self.nodes[i].piece;
        let closed = close_piece(self.tri, piece);
        let m_t = self.tri.graph.edges.len() as u64;
        let nv = closed.graph.n;
        let mut c = vec![1.0; nv];
        let mut b = vec![0.0; nv];
        for v in 0..nv {
            let o = closed.orig[v];
            if o == NONE {
                if hole {
                    b[v] = 1.0;
                }
            } else if (o as usize) < self.n {
                c[v] = self.c[o as usize];
                if !hole {
                    b[v] = c[v];
                }
            }
        }
        let sep = match balanced_small_separator_traced(&closed.graph, &c, &b, self.cfg.separator) {
            Ok((s, _)) => s,
            Err(_) => return Ok(None),
        };
        let edges: Vec<u32> = sep.edges.iter().map(|&e| closed.key[e as usize]).filter(|&k| k < m_t).map(|k| k as u32).collect();
        let noose = Noose { vertices: sep.cycle.iter().map(|&v| closed.orig[v as usize]).filter(|&v| v != NONE).collect(), edges };
        let tri = self.tri;
        let parts = cut_piece(&tri.graph, piece, &noose, &|e| tri.orig_edge[e as usize] != NONE)?;
        if parts.len() < 2 {
            return Ok(None);
        }
        Ok(Some(parts.into_iter().map(|p| p.tris).collect()))
    }
}

/// A piece closed into a sphere: vertices are split into one copy per wedge of triangles around
/// them, and every boundary circle is capped by a cone over a new vertex.
pub struct ClosedPiece {
    pub graph: PlaneGraph,
    /// Triangulation vertex of each vertex, NONE for cone apexes.
    pub orig: Vec<u32>,
    /// Gluing key per edge: a triangulation edge id, or larger for cone edges.
    pub key: Vec<u64>,
}

pub fn close_piece(tri: &Triangulation, piece: &Piece) -> ClosedPiece {
    let t = &tri.graph;
    let m = t.edges.len() as u64;
    let local: HashMap<u32, usize> = piece.tris.iter().enumerate().map(|(k, &f)| (f, k)).collect();
    let darts: Vec<[u32; 3]> = piece.tris.iter().map(|&f| {
        let w = t.walk(t.faces[f as usize][0]);
        [w[0], w[1], w[2]]
    }).collect();
    // corner (k, i) = tail of darts[k][i]
    let mut dsu: Vec<u32> = (0..3 * piece.tris.len() as u32).collect();
    fn find(d: &mut [u32], x: u32) -> u32 {
        let mut r = x;
        while d[r as usize] != r {
            r = d[r as usize];
        }
        let mut y = x;
        while d[y as usize] != r {
            let nx = d[y as usize];
            d[y as usize] = r;
            y = nx;
        }
        r
    }
    let pos = |k: usize, d: u32| darts[k].iter().position(|&x| x == d).unwrap();
    for (k, ds) in darts.iter().enumerate() {
        for (i, &d) in ds.iter().enumerate() {
            let tw = twin(d);
            if let Some(&k2) = local.get(&t.face_of[tw as usize]) {
                let j = pos(k2, tw);
                for (a, b) in [((3 * k + i) as u32, (3 * k2 + (j + 1) % 3) as u32), ((3 * k + (i + 1) % 3) as u32, (3 * k2 + j) as u32)] {
                    let (ra, rb) = (find(&mut dsu, a), find(&mut dsu, b));
                    dsu[ra.max(rb) as usize] = ra.min(rb);
                }
            }
        }
    }
    let mut wedge_id: HashMap<u32, u32> = HashMap::new();
    let mut orig = Vec::new();
    let mut corner = vec![0u32; 3 * piece.tris.len()];
    for (k, ds) in darts.iter().enumerate() {
        for (i, &d) in ds.iter().enumerate() {
            let r = find(&mut dsu, (3 * k + i) as u32);
            let id = *wedge_id.entry(r).or_insert_with(|| {
                orig.push(t.tail(d));
                orig.len() as u32 - 1
            });
            corner[3 * k + i] = id;
        }
    }
    let mut tris: Vec<[(u32, u64); 3]> = Vec::with_capacity(piece.tris.len() + 16);
    // boundary darts by tail wedge
    let mut out_of: HashMap<u32, (usize, usize)> = HashMap::new();
    for (k, ds) in darts.iter().enumerate() {
        tris.push([(corner[3 * k], edge_of(ds[0]) as u64), (corner[3 * k + 1], edge_of(ds[1]) as u64), (corner[3 * k + 2], edge_of(ds[2]) as u64)]);
        for (i, &d) in ds.iter().enumerate() {
            if !local.contains_key(&t.face_of[twin(d) as usize]) {
                out_of.insert(corner[3 * k + i], (k, i));
            }
        }
    }
    let mut done: HashSet<(usize, usize)> = HashSet::new();
    let mut starts: Vec<(usize, usize)> = out_of.values().copied().collect();
    starts.sort_unstable();
    for s in starts {
        if done.contains(&s) {
            continue;
        }
        let apex = orig.len() as u32;
        orig.push(NONE);
        let mut cur = s;
        loop {
            done.insert(cur);
            let (k, i) = cur;
            let (x, y) = (corner[3 * k + i], corner[3 * k + (i + 1) % 3]);
            let e = edge_of(darts[k][i]) as u64;
            tris.push([(y, e), (x, m + x as u64), (apex, m + y as u64)]);
            cur = out_of[&y];
            if cur == s {
                break;
            }
        }
    }
    let graph = PlaneGraph::from_triangles(orig.len(), &tris).expect("closed piece glues into a sphere");
    let mut key = vec![0u64; graph.edges.len()];
    for (f, tri_) in tris.iter().enumerate() {
        let w = graph.walk(graph.faces[f][0]);
        for (i, &d) in w.iter().enumerate() {
            key[edge_of(d) as usize] = tri_[i].1;
        }
    }
    ClosedPiece { graph, orig, key }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;

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
    fn single_edge_is_one_leaf() {
        let g = PlaneGraph::from_straight_line(&[Point::new(0., 0.), Point::new(1., 0.)], &[(0, 1)]);
        let sd = build_surface_decomposition(&g, &[1.0, 1.0], SurfaceConfig::default()).unwrap();
        assert_eq!(sd.nodes.len(), 1);
        sd.check().unwrap();
    }

    #[test]
    fn triangle_splits_into_two_levels() {
        let g = PlaneGraph::from_straight_line(&[Point::new(0., 0.), Point::new(1., 0.), Point::new(0., 1.)], &[(0, 1), (1, 2), (2, 0)]);
        let sd = build_surface_decomposition(&g, &[1.0; 3], SurfaceConfig::default()).unwrap();
        sd.check().unwrap();
        assert!(sd.nodes.len() >= 3);
        assert!(sd.width() <= 3.0);
    }

    #[test]
    fn closed_pieces_are_spheres() {
        let g = grid_graph(7, 5);
        let sd = build_surface_decomposition(&g, &vec![1.0; g.n], SurfaceConfig { base: 4, ..Default::default() }).unwrap();
        for node in &sd.nodes {
            let cp = close_piece(&sd.tri, &node.piece);
            assert!(cp.graph.is_triangulated());
            assert_eq!(cp.graph.euler(), 2, "closing a piece gives a sphere");
            let cones = cp.orig.iter().filter(|&&o| o == NONE).count();
            assert!(cones >= node.piece.rank.min(1));
        }
    }

    #[test]
    fn grids_decompose_with_all_conditions() {
        for (w, h) in [(3, 3), (6, 5), (12, 10), (20, 20)] {
            let g = grid_graph(w, h);
            let c = vec![1.0; g.n];
            let sd = build_surface_decomposition(&g, &c, SurfaceConfig::default()).unwrap();
            sd.check().unwrap();
            let n = (w * h) as f64;
            assert!(sd.width() <= 6.0 * n.sqrt() + 12.0, "{w}x{h}: width {}", sd.width());
        }
    }
}
