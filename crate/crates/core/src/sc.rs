use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::dp::{Anchor, DpNode, DpTree};
use crate::geom::{Point, UnitDiskGraph};
use crate::grid::{point_segment_dist, CellId, GridMap};
use crate::plane::{edge_of, NONE};
use crate::sparsifier::{build_sparsifier, contract_to_h3, h_weights, ContractedSparsifier, HVertex, MapSparsifier};
use crate::surface::{build_surface_decomposition, SurfaceConfig, SurfaceDecomposition};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct ScConfig {
    pub surface: SurfaceConfig,
    /// Largest number of leaves allowed to share the vertices of one cell.
    pub spread: usize,
}

impl Default for ScConfig {
    fn default() -> Self {
        ScConfig { surface: SurfaceConfig::default(), spread: 8 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScNode {
    pub children: Option<(usize, usize)>,
    pub vertices: Vec<u32>,
    /// Surface node this node comes from; lifted leaves point at the surface leaf they refine.
    pub surface: Option<usize>,
    pub cut: Vec<u32>,
    pub cells: Vec<CellId>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct ScDecomposition {
    pub nodes: Vec<ScNode>,
    pub root: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScReport {
    pub width: f64,
    pub spread: usize,
    pub leaves: usize,
    pub max_leaf_cells: usize,
    pub depth: usize,
}

/// Chain vertices of H that a surface leaf has to peel off, per leaf.
#[derive(Debug, Clone, Default)]
pub struct Lift {
    pub peeled: BTreeMap<usize, Vec<u32>>,
}

/// Everything built on the way from a point set to its sc-decomposition.
#[derive(Debug, Clone)]
pub struct ScBuild {
    pub map: GridMap,
    pub h: MapSparsifier,
    pub h3: ContractedSparsifier,
    pub weights: Vec<f64>,
    pub surface: Option<SurfaceDecomposition>,
    pub sc: ScDecomposition,
}

pub fn decompose(g: &UnitDiskGraph, cfg: &ScConfig) -> Result<ScBuild> {
    let map = GridMap::build(g);
    decompose_with(g, map, cfg)
}

pub fn decompose_with(g: &UnitDiskGraph, map: GridMap, cfg: &ScConfig) -> Result<ScBuild> {
    let h = build_sparsifier(g, &map);
    let h3 = contract_to_h3(&h);
    let weights = h_weights(&h, &map);
    let (surface, sc) = if h3.graph.edges.is_empty() {
        (None, cell_split(g, &map))
    } else {
        let c: Vec<f64> = h3.graph_h.iter().map(|&v| weights[v as usize]).collect();
        let sd = build_surface_decomposition(&h3.graph, &c, cfg.surface)?;
        let lift = lift_to_h(&sd, &h3);
        let sc = perturb_to_sc(&sd, &lift, &h, &h3, g, &map);
        (Some(sd), sc)
    };
    Ok(ScBuild { map, h, h3, weights, surface, sc })
}

/// Leaves of the surface decomposition that must peel chain vertices of H, edge by edge.
pub fn lift_to_h(sd: &SurfaceDecomposition, h3: &ContractedSparsifier) -> Lift {
    let leaf_of = leaf_of_triangle(sd);
    let t = &sd.tri.graph;
    let mut lift = Lift::default();
    for te in 0..t.edges.len() {
        let e = sd.tri.orig_edge[te];
        if e == NONE {
            continue;
        }
        let chain = &h3.chains[e as usize];
        if chain.len() <= 2 {
            continue;
        }
        let leaf = leaf_of[t.face_of[2 * te] as usize];
        lift.peeled.entry(leaf).or_default().extend_from_slice(&chain[1..chain.len() - 1]);
    }
    lift
}

fn leaf_of_triangle(sd: &SurfaceDecomposition) -> Vec<usize> {
    let mut leaf_of = vec![usize::MAX; sd.tri.graph.faces.len()];
    for l in sd.leaves() {
        for &f in &sd.nodes[l].piece.tris {
            leaf_of[f as usize] = l;
        }
    }
    leaf_of
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Group {
    Chain(usize, u32),
    Float(CellId, u32),
}

/// Assign every G-vertex to one lifted leaf: chain vertices to the leaf holding their chain,
/// everything else to the leaf of the fan triangle of its face nearest to it, grouped by cell.
pub fn perturb_to_sc(sd: &SurfaceDecomposition, lift: &Lift, h: &MapSparsifier, h3: &ContractedSparsifier, g: &UnitDiskGraph, map: &GridMap) -> ScDecomposition {
    let t = &sd.tri.graph;
    let leaf_of = leaf_of_triangle(sd);
    let mut h_of_g = vec![NONE; g.n()];
    for (v, k) in h.kinds.iter().enumerate() {
        if let HVertex::Base(x) = k {
            h_of_g[*x as usize] = v as u32;
        }
    }
    let mut chain_leaf: HashMap<u32, (usize, usize)> = HashMap::new();
    for (&leaf, verts) in &lift.peeled {
        for (i, &x) in verts.iter().enumerate() {
            chain_leaf.insert(x, (leaf, i));
        }
    }
    let realized: HashMap<u32, u32> = h3.graph_h.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
    let mut first_face = vec![NONE; t.n];
    for d in 0..t.num_darts() as u32 {
        let v = t.tail(d) as usize;
        if first_face[v] == NONE {
            first_face[v] = t.face_of[d as usize];
        }
    }
    let mut aux_of_face: HashMap<u32, u32> = HashMap::new();
    for (a, &f) in sd.tri.aux_face.iter().enumerate() {
        if f != NONE {
            aux_of_face.entry(f).or_insert(a as u32);
        }
    }
    let mut fan: HashMap<u32, Vec<u32>> = HashMap::new();
    for d in 0..t.num_darts() as u32 {
        let f = t.face_of[d as usize];
        if sd.tri.aux[t.tail(d) as usize] && sd.tri.sector[f as usize] != NONE {
            fan.entry(t.tail(d)).or_default().push(f);
        }
    }
    let polyline = |e: u32| -> Vec<Point> { h3.chains[e as usize].iter().map(|&x| h.points[x as usize]).collect() };

    let mut groups: BTreeMap<usize, BTreeMap<Group, Vec<u32>>> = BTreeMap::new();
    let mut floating: BTreeMap<(u32, CellId), Vec<u32>> = BTreeMap::new();
    for v in 0..g.n() {
        let hx = h_of_g[v];
        if hx != NONE {
            if let Some(&(leaf, i)) = chain_leaf.get(&hx) {
                groups.entry(leaf).or_default().entry(Group::Chain(i, hx)).or_default().push(v as u32);
                continue;
            }
            if let Some(&r) = realized.get(&hx) {
                let leaf = leaf_of[first_face[r as usize] as usize];
                groups.entry(leaf).or_default().entry(Group::Chain(usize::MAX, hx)).or_default().push(v as u32);
                continue;
            }
        }
        let f = h3.core.locate(g.point(v));
        floating.entry((f, map.cell_of(v))).or_default().push(v as u32);
    }
    for ((f, cell), vs) in floating {
        let a = aux_of_face[&f];
        let k = vs.len() as f64;
        let centre = Point::new(vs.iter().map(|&v| g.point(v as usize).x).sum::<f64>() / k, vs.iter().map(|&v| g.point(v as usize).y).sum::<f64>() / k);
        let best = fan[&a]
            .iter()
            .map(|&tf| {
                let line = polyline(edge_of(sd.tri.sector[tf as usize]));
                let d = line.windows(2).map(|w| point_segment_dist(centre, w[0], w[1])).fold(f64::INFINITY, f64::min);
                (d, tf)
            })
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
            .unwrap()
            .1;
        let leaf = leaf_of[best as usize];
        groups.entry(leaf).or_default().entry(Group::Float(cell, f)).or_default().extend_from_slice(&vs);
    }

    let mut nodes: Vec<ScNode> = Vec::with_capacity(sd.nodes.len() * 2);
    // mirror the surface tree, expanding leaves into peeling chains
    fn mirror(sd: &SurfaceDecomposition, s: usize, groups: &BTreeMap<usize, BTreeMap<Group, Vec<u32>>>, nodes: &mut Vec<ScNode>) -> usize {
        let me = nodes.len();
        nodes.push(ScNode { children: None, vertices: vec![], surface: Some(s), cut: vec![], cells: vec![], weight: 0.0 });
        match sd.nodes[s].children {
            Some((a, b)) => {
                let x = mirror(sd, a, groups, nodes);
                let y = mirror(sd, b, groups, nodes);
                nodes[me].children = Some((x, y));
            }
            None => {
                let gs: Vec<&Vec<u32>> = groups.get(&s).map(|m| m.values().collect()).unwrap_or_default();
                let mut cur = me;
                for (i, vs) in gs.iter().enumerate() {
                    if i + 1 == gs.len() {
                        nodes[cur].vertices = (*vs).clone();
                        break;
                    }
                    let leaf = nodes.len();
                    nodes.push(ScNode { children: None, vertices: (*vs).clone(), surface: Some(s), cut: vec![], cells: vec![], weight: 0.0 });
                    let rest = nodes.len();
                    nodes.push(ScNode { children: None, vertices: vec![], surface: Some(s), cut: vec![], cells: vec![], weight: 0.0 });
                    nodes[cur].children = Some((leaf, rest));
                    cur = rest;
                }
            }
        }
        me
    }
    let root = mirror(sd, sd.root, &groups, &mut nodes);
    let mut sc = ScDecomposition { nodes, root };
    sc.finish(g, map);
    sc
}

/// Without any sparsifier structure: one leaf per occupied cell, combined by halving.
pub fn cell_split(g: &UnitDiskGraph, map: &GridMap) -> ScDecomposition {
    let cells: Vec<Vec<u32>> = map.occupied().map(|(_, v)| v.to_vec()).collect();
    let mut nodes = Vec::new();
    fn build(cells: &[Vec<u32>], nodes: &mut Vec<ScNode>) -> usize {
        let me = nodes.len();
        nodes.push(ScNode { children: None, vertices: vec![], surface: None, cut: vec![], cells: vec![], weight: 0.0 });
        if cells.len() == 1 {
            nodes[me].vertices = cells[0].clone();
        } else if cells.len() > 1 {
            let mid = cells.len() / 2;
            let a = build(&cells[..mid], nodes);
            let b = build(&cells[mid..], nodes);
            nodes[me].children = Some((a, b));
        }
        me
    }
    let root = build(&cells, &mut nodes);
    let mut sc = ScDecomposition { nodes, root };
    sc.finish(g, map);
    sc
}

impl ScDecomposition {
    /// Fill in vertex sets bottom-up and the cut edges, cells and weight of every node.
    fn finish(&mut self, g: &UnitDiskGraph, map: &GridMap) {
        let order = self.postorder();
        for &i in &order {
            if let Some((a, b)) = self.nodes[i].children {
                let mut v: Vec<u32> = self.nodes[a].vertices.iter().chain(&self.nodes[b].vertices).copied().collect();
                v.sort_unstable();
                self.nodes[i].vertices = v;
            } else {
                self.nodes[i].vertices.sort_unstable();
            }
        }
        let mut inside = vec![false; g.n()];
        for i in order {
            for &v in &self.nodes[i].vertices {
                inside[v as usize] = true;
            }
            let mut cut = Vec::new();
            let mut cells = Vec::new();
            for (e, &(a, b)) in g.edges().iter().enumerate() {
                if inside[a as usize] != inside[b as usize] {
                    cut.push(e as u32);
                    cells.push(map.cell_of(a as usize));
                    cells.push(map.cell_of(b as usize));
                }
            }
            cells.sort_unstable();
            cells.dedup();
            let node = &mut self.nodes[i];
            node.weight = cells.iter().map(|&c| map.clique_weight(c)).sum();
            node.cut = cut;
            node.cells = cells;
            for &v in &node.vertices {
                inside[v as usize] = false;
            }
        }
    }

    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((i, done)) = stack.pop() {
            match (self.nodes[i].children, done) {
                (Some((a, b)), false) => {
                    stack.push((i, true));
                    stack.push((b, false));
                    stack.push((a, false));
                }
                _ => out.push(i),
            }
        }
        out
    }

    pub fn leaves(&self) -> impl Iterator<Item = &ScNode> {
        self.nodes.iter().filter(|n| n.children.is_none())
    }

    pub fn width(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).fold(0.0, f64::max)
    }

    fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut best = 0;
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            best = best.max(depth[i]);
            if let Some((a, b)) = self.nodes[i].children {
                depth[a] = depth[i] + 1;
                depth[b] = depth[i] + 1;
                stack.extend([a, b]);
            }
        }
        best
    }

    /// Checks C1 (every vertex lies in exactly one leaf, never on a boundary), C2 (children
    /// partition their parent), C3 (a leaf meets at most two cells) and C4 (a cell meets at most
    /// `spread` leaves).
    pub fn check(&self, g: &UnitDiskGraph, map: &GridMap, spread: usize) -> Result<ScReport> {
        let bad = |m: String| Err(Error::Decomposition(m));
        let mut owner = vec![usize::MAX; g.n()];
        let mut per_cell: HashMap<CellId, usize> = HashMap::new();
        let mut leaves = 0;
        let mut max_leaf_cells = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            match node.children {
                Some((a, b)) => {
                    let mut u: Vec<u32> = self.nodes[a].vertices.iter().chain(&self.nodes[b].vertices).copied().collect();
                    u.sort_unstable();
                    if u != node.vertices || u.windows(2).any(|w| w[0] == w[1]) {
                        return bad(format!("C2: children of node {i} do not partition it"));
                    }
                }
                None => {
                    leaves += 1;
                    for &v in &node.vertices {
                        if owner[v as usize] != usize::MAX {
                            return bad(format!("C1: vertex {v} lies in two leaves"));
                        }
                        owner[v as usize] = i;
                    }
                    let mut cells: Vec<CellId> = node.vertices.iter().map(|&v| map.cell_of(v as usize)).collect();
                    cells.sort_unstable();
                    cells.dedup();
                    if cells.len() > 2 {
                        return bad(format!("C3: leaf {i} meets {} cells", cells.len()));
                    }
                    max_leaf_cells = max_leaf_cells.max(cells.len());
                    for c in cells {
                        *per_cell.entry(c).or_default() += 1;
                    }
                }
            }
        }
        if let Some(v) = owner.iter().position(|&o| o == usize::MAX) {
            return bad(format!("C1: vertex {v} is in no leaf"));
        }
        if self.nodes[self.root].vertices.len() != g.n() {
            return bad("root does not hold every vertex".into());
        }
        let worst = per_cell.values().copied().max().unwrap_or(0);
        if worst > spread {
            return bad(format!("C4: a cell meets {worst} leaves (limit {spread})"));
        }
        Ok(ScReport { width: self.width(), spread: worst, leaves, max_leaf_cells, depth: self.depth() })
    }

    /// Tree for the dynamic program: empty subtrees are dropped and each cut edge gets an anchor
    /// at its angle around the centroid of the node's vertices.
    pub fn to_dp_tree(&self, g: &UnitDiskGraph, map: &GridMap) -> DpTree {
        let cell_index: HashMap<CellId, u32> = map.occupied().enumerate().map(|(i, (c, _))| (c, i as u32)).collect();
        let clique: Vec<u32> = (0..g.n()).map(|v| cell_index[&map.cell_of(v)]).collect();
        let mut nodes: Vec<DpNode> = Vec::new();
        fn walk(sc: &ScDecomposition, i: usize, g: &UnitDiskGraph, nodes: &mut Vec<DpNode>) -> Option<usize> {
            let node = &sc.nodes[i];
            if node.vertices.is_empty() {
                return None;
            }
            let children = match node.children {
                Some((a, b)) => match (walk(sc, a, g, nodes), walk(sc, b, g, nodes)) {
                    (Some(x), Some(y)) => Some((x, y)),
                    (Some(x), None) | (None, Some(x)) => return Some(x),
                    (None, None) => None,
                },
                None => None,
            };
            let k = node.vertices.len() as f64;
            let cx = node.vertices.iter().map(|&v| g.point(v as usize).x).sum::<f64>() / k;
            let cy = node.vertices.iter().map(|&v| g.point(v as usize).y).sum::<f64>() / k;
            let anchors = node
                .cut
                .iter()
                .map(|&e| {
                    let (a, b) = g.edge(e as usize);
                    let (p, q) = (g.point(a), g.point(b));
                    let pos = ((p.y + q.y) / 2.0 - cy).atan2((p.x + q.x) / 2.0 - cx);
                    (e, Anchor { curve: 0, pos, parity: 0 })
                })
                .collect();
            nodes.push(DpNode { children, vertices: node.vertices.clone(), anchors });
            Some(nodes.len() - 1)
        }
        let root = match walk(self, self.root, g, &mut nodes) {
            Some(r) => r,
            None => {
                nodes.push(DpNode { children: None, vertices: vec![], anchors: HashMap::new() });
                0
            }
        };
        DpTree { nodes, root, clique }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "root": self.root,
            "width": self.width(),
            "nodes": self.nodes,
        })
    }
}

/// Clique-weighted width recomputed from scratch: for every node, the cells holding endpoints of
/// edges with exactly one endpoint inside.
pub fn width_of(sc: &ScDecomposition, g: &UnitDiskGraph, map: &GridMap) -> f64 {
    let mut best: f64 = 0.0;
    for node in &sc.nodes {
        let set: std::collections::HashSet<u32> = node.vertices.iter().copied().collect();
        let mut cells: Vec<CellId> = Vec::new();
        for v in 0..g.n() {
            if set.contains(&(v as u32)) && g.neighbors(v).iter().any(|w| !set.contains(w)) {
                cells.push(map.cell_of(v));
            }
            if !set.contains(&(v as u32)) && g.neighbors(v).iter().any(|w| set.contains(w)) {
                cells.push(map.cell_of(v));
            }
        }
        cells.sort_unstable();
        cells.dedup();
        best = best.max(cells.iter().map(|&c| map.clique_weight(c)).sum());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{udg, Layout};

    #[test]
    fn one_cell_graph_has_no_cuts_at_root() {
        let g = UnitDiskGraph::new(vec![Point::new(0.1, 0.1), Point::new(0.2, 0.2), Point::new(0.3, 0.1), Point::new(0.25, 0.3)]).unwrap();
        let b = decompose(&g, &ScConfig::default()).unwrap();
        assert!(b.sc.nodes[b.sc.root].cut.is_empty());
        b.sc.check(&g, &b.map, 8).unwrap();
        b.surface.as_ref().unwrap().check().unwrap();
    }

    #[test]
    fn random_instances_satisfy_conditions() {
        for seed in 0..30 {
            let layout = if seed % 3 == 0 { Layout::Clustered } else { Layout::Uniform };
            let g = udg(layout, 20 + 5 * (seed as usize % 8), 3.0 + (seed % 4) as f64, seed);
            let b = decompose(&g, &ScConfig::default()).unwrap();
            if let Some(sd) = &b.surface {
                sd.check().unwrap();
            }
            let r = b.sc.check(&g, &b.map, 8).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            assert!((width_of(&b.sc, &g, &b.map) - r.width).abs() < 1e-9);
        }
    }
}
