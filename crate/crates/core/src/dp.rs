use std::collections::{HashMap, HashSet};

use crate::geom::UnitDiskGraph;
use crate::{Error, Result};

/// A node of the binary tree the program runs over. Leaves carry vertices of at most two cliques.
#[derive(Debug, Clone)]
pub struct DpNode {
    pub children: Option<(usize, usize)>,
    pub vertices: Vec<u32>,
    /// Boundary-curve id and circular position for each cut edge, used by refined signatures.
    pub anchors: HashMap<u32, Anchor>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub curve: u32,
    pub pos: f64,
    /// Crossing parity of the anchored segment with the connector curves of its piece.
    pub parity: u8,
}

#[derive(Debug, Clone)]
pub struct DpTree {
    pub nodes: Vec<DpNode>,
    pub root: usize,
    /// Clique label (cell index) of every vertex.
    pub clique: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
pub enum Mode {
    Standard,
    Refined,
}

#[derive(Debug, Clone, Copy)]
pub struct DpOptions {
    pub mode: Mode,
    pub z: usize,
    /// Max cut-path vertices per finer cell.
    pub cap: usize,
    /// Max signatures held by one node before giving up.
    pub budget: usize,
    /// States that cannot reach this many cycles are dropped.
    pub target: usize,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions { mode: Mode::Standard, z: 3, cap: usize::MAX, budget: 4_000_000, target: 0 }
    }
}

/// Canonical pairing of the used cut edges: sorted `(a, b)` with `a < b`.
/// The used edge set Λ is the set of all entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Signature(pub Vec<(u32, u32)>);

impl Signature {
    pub fn new(mut pairs: Vec<(u32, u32)>) -> Self {
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        Signature(pairs)
    }

    pub fn edges(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().flat_map(|&(a, b)| [a, b])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone)]
enum Back {
    Leaf { segments: Vec<u32>, inner: Vec<Vec<u32>> },
    Merge(u32, u32),
}

#[derive(Debug, Default)]
pub struct Table {
    pub sigs: Vec<Signature>,
    pub values: Vec<u32>,
    /// Inside vertex count of each pair's path, for one realization of the stored value.
    lens: Vec<Vec<u16>>,
    back: Vec<Back>,
    index: HashMap<Signature, u32>,
}

impl Table {
    fn offer(&mut self, mut pairs: Vec<(u32, u32, u16)>, value: u32, back: impl FnOnce() -> Back) {
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0, p.2);
            }
        }
        pairs.sort_unstable();
        let lens: Vec<u16> = pairs.iter().map(|p| p.2).collect();
        let sig = Signature(pairs.into_iter().map(|p| (p.0, p.1)).collect());
        match self.index.get(&sig) {
            Some(&i) => {
                let i = i as usize;
                let shorter = lens.iter().sum::<u16>() < self.lens[i].iter().sum::<u16>();
                if value > self.values[i] || (value == self.values[i] && shorter) {
                    self.values[i] = value;
                    self.lens[i] = lens;
                    self.back[i] = back();
                }
            }
            None => {
                self.index.insert(sig.clone(), self.sigs.len() as u32);
                self.sigs.push(sig);
                self.values.push(value);
                self.lens.push(lens);
                self.back.push(back());
            }
        }
    }

    pub fn len(&self) -> usize {
        self.sigs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigs.is_empty()
    }

    fn retain(self, keep: &[bool]) -> Table {
        let mut out = Table::default();
        for (i, sig) in self.sigs.into_iter().enumerate() {
            if keep[i] {
                out.index.insert(sig.clone(), out.sigs.len() as u32);
                out.sigs.push(sig);
                out.values.push(self.values[i]);
                out.lens.push(self.lens[i].clone());
                out.back.push(self.back[i].clone());
            }
        }
        out
    }

    pub fn get(&self, sig: &Signature) -> Option<u32> {
        self.index.get(sig).map(|&i| self.values[i as usize])
    }
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct DpStats {
    pub max_states: usize,
    pub total_states: usize,
    pub max_cut: usize,
    pub pruned: usize,
}

#[derive(Debug, Clone)]
pub struct DpResult {
    pub value: usize,
    pub cycles: Vec<Vec<usize>>,
    pub stats: DpStats,
}

/// A chordless path inside a leaf, attached to the outside by one cut edge at each end.
#[derive(Debug, Clone)]
struct Segment {
    path: Vec<u32>,
    ends: (u32, u32),
    outer: (u32, u32),
}

struct Ctx<'a> {
    g: &'a UnitDiskGraph,
    tree: &'a DpTree,
    opts: DpOptions,
    inside: Vec<Vec<bool>>,
    segments: Vec<Vec<Segment>>,
    stats: DpStats,
}

/// Edges with exactly one endpoint in `inside`.
pub fn cut_edges(g: &UnitDiskGraph, inside: &[bool]) -> Vec<u32> {
    (0..g.m() as u32)
        .filter(|&e| {
            let (a, b) = g.edge(e as usize);
            inside[a] != inside[b]
        })
        .collect()
}

/// Runs the program bottom-up. `Ok(None)` means no packing reaches `opts.target` cycles.
pub fn run(g: &UnitDiskGraph, tree: &DpTree, opts: DpOptions) -> Result<Option<DpResult>> {
    let n = g.n();
    let mut inside = vec![Vec::new(); tree.nodes.len()];
    for (i, node) in tree.nodes.iter().enumerate() {
        let mut mark = vec![false; n];
        for &v in &node.vertices {
            mark[v as usize] = true;
        }
        inside[i] = mark;
    }
    let mut ctx = Ctx { g, tree, opts, inside, segments: vec![Vec::new(); tree.nodes.len()], stats: DpStats::default() };
    let mut tables: Vec<Option<Table>> = (0..tree.nodes.len()).map(|_| None).collect();
    ctx.eval(tree.root, Vec::new(), &mut tables)?;
    let root = tables[tree.root].as_ref().unwrap();
    let Some(&ri) = root.index.get(&Signature::default()) else { return Ok(None) };
    if (root.values[ri as usize] as usize) < opts.target {
        return Ok(None);
    }
    let mut edges = Vec::new();
    let mut inner = Vec::new();
    ctx.trace(&tables, tree.root, ri, &mut edges, &mut inner);
    let mut cycles = cycles_from_edges(g, &edges);
    cycles.extend(inner.into_iter().map(|c| c.into_iter().map(|v| v as usize).collect()));
    let value = root.values[ri as usize] as usize;
    if cycles.len() != value {
        return Err(Error::Decomposition(format!("traceback found {} cycles, table says {value}", cycles.len())));
    }
    Ok(Some(DpResult { value, cycles, stats: ctx.stats }))
}

/// Shared cut-edge patterns a sibling subtree can realize, restricted to the current node.
struct Filter {
    other: usize,
    allowed: HashSet<Vec<u32>>,
}

impl Ctx<'_> {
    fn projection(&self, sig: &Signature, d: usize, other: usize) -> Vec<u32> {
        let (ind, ino) = (&self.inside[d], &self.inside[other]);
        let mut k: Vec<u32> = sig
            .edges()
            .filter(|&e| {
                let (x, y) = self.g.edge(e as usize);
                (ind[x] && ino[y]) || (ino[x] && ind[y])
            })
            .collect();
        k.sort_unstable();
        k
    }

    fn restrict(&self, filters: &[Filter], d: usize) -> Vec<Filter> {
        let ind = &self.inside[d];
        filters
            .iter()
            .map(|f| {
                let allowed = f
                    .allowed
                    .iter()
                    .map(|k| {
                        k.iter()
                            .copied()
                            .filter(|&e| {
                                let (x, y) = self.g.edge(e as usize);
                                ind[x] || ind[y]
                            })
                            .collect()
                    })
                    .collect();
                Filter { other: f.other, allowed }
            })
            .collect()
    }

    fn apply(&self, table: Table, d: usize, filters: &[Filter]) -> Table {
        if filters.is_empty() {
            return table;
        }
        let keep: Vec<bool> = table.sigs.iter().map(|s| filters.iter().all(|f| f.allowed.contains(&self.projection(s, d, f.other)))).collect();
        if keep.iter().all(|&k| k) {
            return table;
        }
        table.retain(&keep)
    }

    /// Builds the table of `t`. One child is evaluated first and its shared-edge patterns
    /// constrain the whole subtree of the other child.
    fn eval(&mut self, t: usize, filters: Vec<Filter>, tables: &mut Vec<Option<Table>>) -> Result<()> {
        let table = match self.tree.nodes[t].children {
            None => self.leaf(t)?,
            Some((a, b)) => {
                let (first, second) = if self.tree.nodes[a].vertices.len() <= self.tree.nodes[b].vertices.len() { (a, b) } else { (b, a) };
                let ff = self.restrict(&filters, first);
                self.eval(first, ff, tables)?;
                let allowed: HashSet<Vec<u32>> = tables[first].as_ref().unwrap().sigs.iter().map(|s| self.projection(s, first, second)).collect();
                let mut fs = self.restrict(&filters, second);
                fs.push(Filter { other: first, allowed });
                self.eval(second, fs, tables)?;
                self.merge(t, tables[a].as_ref().unwrap(), tables[b].as_ref().unwrap(), a, b)?
            }
        };
        let table = self.apply(table, t, &filters);
        self.stats.max_states = self.stats.max_states.max(table.len());
        self.stats.total_states += table.len();
        tables[t] = Some(table);
        Ok(())
    }

    fn leaf(&mut self, t: usize) -> Result<Table> {
        let g = self.g;
        let verts = &self.tree.nodes[t].vertices;
        let inside = &self.inside[t];
        let mut labels: Vec<u32> = verts.iter().map(|&v| self.tree.clique[v as usize]).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() > 2 {
            return Err(Error::Decomposition(format!("leaf {t} spans {} cells", labels.len())));
        }
        let cut: Vec<Vec<(u32, u32)>> = verts
            .iter()
            .map(|&v| g.neighbors(v as usize).iter().filter(|&&w| !inside[w as usize]).map(|&w| (g.edge_id(v as usize, w as usize).unwrap() as u32, w)).collect())
            .collect();
        self.stats.max_cut = self.stats.max_cut.max(cut.iter().map(|c| c.len()).sum());
        let pos: HashMap<u32, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let segs = leaf_segments(g, verts, &pos, &cut);
        let mut search = LeafSearch {
            g,
            inside,
            segs: &segs,
            pos: &pos,
            verts,
            clique: &self.tree.clique,
            used: vec![false; verts.len()],
            outdeg: HashMap::new(),
            per_cell: HashMap::new(),
            chosen: Vec::new(),
            singles: 0,
            n_out: g.n() - verts.len(),
            target: self.opts.target,
            cap: self.opts.cap,
            pruned: 0,
            table: Table::default(),
        };
        // Every cycle still to come needs three of the leaf and outside vertices.
        if g.n() / 3 >= self.opts.target {
            search.rec(0);
        }
        let pruned = search.pruned;
        let mut table = search.table;
        self.stats.pruned += pruned;
        if self.opts.mode == Mode::Refined {
            table = self.refine(t, table);
        }
        if table.len() > self.opts.budget {
            return Err(Error::Budget(table.len()));
        }
        self.segments[t] = segs;
        Ok(table)
    }

    fn merge(&mut self, t: usize, t1: &Table, t2: &Table, a: usize, b: usize) -> Result<Table> {
        let g = self.g;
        let in1 = &self.inside[a];
        let in2 = &self.inside[b];
        let shared = |e: u32| {
            let (x, y) = g.edge(e as usize);
            (in1[x] && in2[y]) || (in2[x] && in1[y])
        };
        let key = |sig: &Signature| -> Vec<u32> {
            let mut k: Vec<u32> = sig.edges().filter(|&e| shared(e)).collect();
            k.sort_unstable();
            k
        };
        let mut groups: HashMap<Vec<u32>, Vec<u32>> = HashMap::new();
        for (i, s) in t2.sigs.iter().enumerate() {
            groups.entry(key(s)).or_default().push(i as u32);
        }
        let inside = &self.inside[t];
        let mut table = Table::default();
        let mut pruned = 0usize;
        let n_out = g.n() - self.tree.nodes[t].vertices.len();
        let target = self.opts.target;
        let inner_end = |e: u32| {
            let (x, y) = g.edge(e as usize);
            if inside[x] {
                x
            } else {
                y
            }
        };
        const NIL: (u32, u16) = (u32::MAX, 0);
        let mut link: HashMap<u32, [(u32, u16); 2]> = HashMap::new();
        let mut seen: HashMap<u32, ()> = HashMap::new();
        let mut deg: HashMap<usize, u8> = HashMap::new();
        for (i, s1) in t1.sigs.iter().enumerate() {
            let Some(partners) = groups.get(&key(s1)) else { continue };
            for &j in partners {
                let s2 = &t2.sigs[j as usize];
                link.clear();
                let pairs1 = s1.0.iter().zip(t1.lens[i].iter());
                let pairs2 = s2.0.iter().zip(t2.lens[j as usize].iter());
                for (&(x, y), &len) in pairs1.chain(pairs2) {
                    for (p, q) in [(x, y), (y, x)] {
                        let e = link.entry(p).or_insert([NIL; 2]);
                        if e[0].0 == u32::MAX {
                            e[0] = (q, len)
                        } else {
                            e[1] = (q, len)
                        }
                    }
                }
                // Outside endpoints may carry at most two used edges.
                deg.clear();
                let mut bad = false;
                for &e in link.keys() {
                    let (x, y) = g.edge(e as usize);
                    if inside[x] && inside[y] {
                        continue;
                    }
                    let d = deg.entry(if inside[x] { y } else { x }).or_default();
                    *d += 1;
                    bad |= *d > 2;
                }
                if bad {
                    continue;
                }
                // Walk chains from open ends, then whatever is left closes into cycles.
                seen.clear();
                let mut pairs = Vec::new();
                let mut closed = 0u32;
                for pass in 0..2 {
                    for (&e, l) in link.iter() {
                        if seen.contains_key(&e) || (pass == 0 && l[1].0 != u32::MAX) {
                            continue;
                        }
                        seen.insert(e, ());
                        let (mut prev, mut cur, mut len) = (e, l[0].0, l[0].1);
                        loop {
                            if cur == e {
                                break;
                            }
                            seen.insert(cur, ());
                            let lc = link[&cur];
                            if lc[1].0 == u32::MAX {
                                break;
                            }
                            let nx = if lc[0].0 == prev { lc[1] } else { lc[0] };
                            prev = cur;
                            cur = nx.0;
                            len += nx.1;
                        }
                        if pass == 0 {
                            pairs.push((e, cur, len));
                        } else {
                            closed += 1;
                        }
                    }
                }
                let value = t1.values[i] + t2.values[j as usize] + closed;
                let singles = pairs.iter().filter(|&&(x, y, _)| inner_end(x) == inner_end(y)).count();
                let pv: usize = pairs.iter().map(|p| p.2 as usize).sum();
                if !reachable(value as usize, singles, pairs.len() - singles, pv, n_out, target) || !forced_closures_ok(g, inside, &pairs) {
                    pruned += 1;
                    continue;
                }
                table.offer(pairs, value, || Back::Merge(i as u32, j));
            }
            if table.len() > self.opts.budget {
                return Err(Error::Budget(table.len()));
            }
        }
        self.stats.pruned += pruned;
        if self.opts.mode == Mode::Refined {
            table = self.refine(t, table);
        }
        Ok(table)
    }

    /// Keeps signatures whose pairing admits a parity assignment with K_{z,z}-free arc graphs.
    fn refine(&self, t: usize, table: Table) -> Table {
        let anchors = &self.tree.nodes[t].anchors;
        let mut out = Table::default();
        for (i, sig) in table.sigs.iter().enumerate() {
            if refined_valid(sig, anchors, self.opts.z) {
                out.index.insert(sig.clone(), out.sigs.len() as u32);
                out.sigs.push(sig.clone());
                out.values.push(table.values[i]);
                out.lens.push(table.lens[i].clone());
                out.back.push(table.back[i].clone());
            }
        }
        out
    }

    fn trace(&self, tables: &[Option<Table>], t: usize, i: u32, edges: &mut Vec<u32>, inner: &mut Vec<Vec<u32>>) {
        let table = tables[t].as_ref().unwrap();
        match &table.back[i as usize] {
            Back::Merge(a, b) => {
                let (ca, cb) = self.tree.nodes[t].children.unwrap();
                self.trace(tables, ca, *a, edges, inner);
                self.trace(tables, cb, *b, edges, inner);
            }
            Back::Leaf { segments, inner: cyc } => {
                let g = self.g;
                for &s in segments {
                    let seg = &self.segments[t][s as usize];
                    edges.push(seg.ends.0);
                    edges.push(seg.ends.1);
                    for w in seg.path.windows(2) {
                        edges.push(g.edge_id(w[0] as usize, w[1] as usize).unwrap() as u32);
                    }
                }
                inner.extend(cyc.iter().cloned());
            }
        }
    }
}

struct LeafSearch<'a> {
    g: &'a UnitDiskGraph,
    inside: &'a [bool],
    segs: &'a [Segment],
    pos: &'a HashMap<u32, usize>,
    verts: &'a [u32],
    clique: &'a [u32],
    used: Vec<bool>,
    outdeg: HashMap<u32, u8>,
    per_cell: HashMap<u32, usize>,
    chosen: Vec<u32>,
    singles: usize,
    n_out: usize,
    target: usize,
    cap: usize,
    pruned: usize,
    table: Table,
}

impl LeafSearch<'_> {
    /// Depth-first choice of vertex-disjoint segments.
    fn rec(&mut self, start: usize) {
        let left: Vec<u32> = self.verts.iter().enumerate().filter(|&(i, _)| !self.used[i]).map(|(_, &v)| v).collect();
        let longs = self.chosen.len() - self.singles;
        let pv = self.verts.len() - left.len();
        if self.n_out < self.chosen.len() {
            return;
        }
        if reachable(left.len() / 3, self.singles, longs, pv, self.n_out, self.target) {
            let (val, inner) = pack_two_cliques(self.g, &left, self.clique);
            if reachable(val, self.singles, longs, pv, self.n_out, self.target) {
                let pairs = self.chosen.iter().map(|&s| {
                    let seg = &self.segs[s as usize];
                    (seg.ends.0, seg.ends.1, seg.path.len() as u16)
                });
                let pairs: Vec<_> = pairs.collect();
                if !forced_closures_ok(self.g, self.inside, &pairs) {
                    self.pruned += 1;
                    return;
                }
                let chosen = &self.chosen;
                self.table.offer(pairs, val as u32, || Back::Leaf { segments: chosen.clone(), inner });
            } else {
                self.pruned += 1;
            }
        } else {
            self.pruned += 1;
        }
        if self.chosen.len() + 1 > self.n_out {
            return;
        }
        for s in start..self.segs.len() {
            let seg = &self.segs[s];
            if seg.path.iter().any(|v| self.used[self.pos[v]]) {
                continue;
            }
            let (w1, w2) = seg.outer;
            let d1 = self.outdeg.get(&w1).copied().unwrap_or(0);
            let d2 = self.outdeg.get(&w2).copied().unwrap_or(0);
            // a forced closure takes both outer ends for itself
            let forced = w1 != w2 && self.g.has_edge(w1 as usize, w2 as usize);
            let step = if forced { 2 } else { 1 };
            if d1 + step + (w1 == w2) as u8 > 2 || (w1 != w2 && d2 + step > 2) {
                continue;
            }
            if self.cap != usize::MAX {
                let over = seg.path.iter().any(|&v| {
                    let c = self.clique[v as usize];
                    self.per_cell.get(&c).copied().unwrap_or(0) + seg.path.iter().filter(|&&u| self.clique[u as usize] == c).count() > self.cap
                });
                if over {
                    continue;
                }
            }
            for v in &seg.path {
                self.used[self.pos[v]] = true;
                *self.per_cell.entry(self.clique[*v as usize]).or_default() += 1;
            }
            *self.outdeg.entry(w1).or_default() += step;
            *self.outdeg.entry(w2).or_default() += step;
            let single = seg.path.len() == 1;
            self.singles += single as usize;
            self.chosen.push(s as u32);
            self.rec(s + 1);
            self.chosen.pop();
            self.singles -= single as usize;
            *self.outdeg.get_mut(&w1).unwrap() -= step;
            *self.outdeg.get_mut(&w2).unwrap() -= step;
            for v in &seg.path {
                self.used[self.pos[v]] = false;
                *self.per_cell.get_mut(&self.clique[*v as usize]).unwrap() -= 1;
            }
        }
    }
}

/// A pair whose outer ends are distinct neighbours must close through that edge in a chordless
/// solution, so neither end may carry another used cut edge.
fn forced_closures_ok(g: &UnitDiskGraph, inside: &[bool], pairs: &[(u32, u32, u16)]) -> bool {
    let outer = |e: u32| {
        let (x, y) = g.edge(e as usize);
        if inside[x] {
            y
        } else {
            x
        }
    };
    let mut deg: HashMap<usize, u8> = HashMap::new();
    for &(a, b, _) in pairs {
        *deg.entry(outer(a)).or_default() += 1;
        *deg.entry(outer(b)).or_default() += 1;
    }
    pairs.iter().all(|&(a, b, _)| {
        let (w1, w2) = (outer(a), outer(b));
        w1 == w2 || !g.has_edge(w1, w2) || (deg[&w1] == 1 && deg[&w2] == 1)
    })
}

/// Whether `value` closed cycles plus the open paths can still reach `target`.
fn reachable(value: usize, singles: usize, longs: usize, path_vertices: usize, outside: usize, target: usize) -> bool {
    match future_bound(singles, longs, outside) {
        Some(f) => value + f.min((outside + path_vertices) / 3) >= target,
        None => false,
    }
}

/// Upper bound on the cycles still to be closed given `singles` one-vertex paths, `longs` longer
/// paths and `outside` untouched vertices; `None` if the paths cannot all be closed. A cycle
/// through r paths needs at least r outside vertices and three vertices overall.
pub fn future_bound(singles: usize, longs: usize, outside: usize) -> Option<usize> {
    let paths = singles + longs;
    if outside < paths {
        return None;
    }
    let need = 2 * singles + longs;
    if need <= outside {
        return Some(paths + (outside - need) / 3);
    }
    let mut deficit = need - outside;
    let pair_merges = (singles / 2).min(deficit.div_ceil(2));
    deficit = deficit.saturating_sub(2 * pair_merges);
    Some(paths - pair_merges - deficit)
}

fn leaf_segments(g: &UnitDiskGraph, verts: &[u32], pos: &HashMap<u32, usize>, cut: &[Vec<(u32, u32)>]) -> Vec<Segment> {
    let adj = |a: u32, b: u32| g.has_edge(a as usize, b as usize);
    let mut paths: Vec<Vec<u32>> = Vec::new();
    // Chordless paths of at most four vertices; in two cliques longer ones always have chords.
    fn grow(g: &UnitDiskGraph, pos: &HashMap<u32, usize>, path: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if path[0] <= *path.last().unwrap() {
            out.push(path.clone());
        }
        if path.len() == 4 {
            return;
        }
        let last = *path.last().unwrap() as usize;
        for &w in g.neighbors(last) {
            if !pos.contains_key(&w) || path.contains(&w) {
                continue;
            }
            if path[..path.len() - 1].iter().any(|&p| g.has_edge(p as usize, w as usize)) {
                continue;
            }
            path.push(w);
            grow(g, pos, path, out);
            path.pop();
        }
    }
    for &v in verts {
        grow(g, pos, &mut vec![v], &mut paths);
    }
    let mut segs = Vec::new();
    for p in paths {
        let (a, b) = (p[0], *p.last().unwrap());
        let ca = &cut[pos[&a]];
        let cb = &cut[pos[&b]];
        let k = p.len();
        for (i, &(e1, w1)) in ca.iter().enumerate() {
            for (j, &(e2, w2)) in cb.iter().enumerate() {
                if k == 1 && j <= i {
                    continue;
                }
                // no chords in the closed walk w1, p.., w2 except w1w2 itself
                let same = w1 == w2;
                let chord1 = (1..k).any(|x| !(same && x == k - 1) && adj(p[x], w1));
                let chord2 = (0..k.saturating_sub(1)).any(|x| !(same && x == 0) && adj(p[x], w2));
                if chord1 || chord2 {
                    continue;
                }
                segs.push(Segment { path: p.clone(), ends: (e1, e2), outer: (w1, w2) });
            }
        }
    }
    segs
}

/// Maximum packing inside two cliques. Beyond intra-clique triangles an optimum needs at most
/// two crossing triangles of one orientation or a single chordless crossing 4-cycle.
pub fn pack_two_cliques(g: &UnitDiskGraph, verts: &[u32], clique: &[u32]) -> (usize, Vec<Vec<u32>>) {
    let Some(&first) = verts.first() else { return (0, Vec::new()) };
    let la = clique[first as usize];
    let a: Vec<u32> = verts.iter().copied().filter(|&v| clique[v as usize] == la).collect();
    let b: Vec<u32> = verts.iter().copied().filter(|&v| clique[v as usize] != la).collect();
    let mut best: (usize, Vec<Vec<u32>>) = (0, Vec::new());
    let mut consider = |cross: Vec<Vec<u32>>| {
        let ra: Vec<u32> = a.iter().copied().filter(|v| !cross.iter().any(|c| c.contains(v))).collect();
        let rb: Vec<u32> = b.iter().copied().filter(|v| !cross.iter().any(|c| c.contains(v))).collect();
        let val = cross.len() + ra.len() / 3 + rb.len() / 3;
        if val > best.0 {
            let mut cyc = cross;
            cyc.extend(ra.chunks_exact(3).map(|c| c.to_vec()));
            cyc.extend(rb.chunks_exact(3).map(|c| c.to_vec()));
            best = (val, cyc);
        }
    };
    consider(Vec::new());
    if !b.is_empty() {
        for (x, y) in [(&a, &b), (&b, &a)] {
            let tris = apex_triangles(g, x, y, 2);
            for t in tris {
                consider(t);
            }
        }
        if let Some(c4) = crossing_c4(g, &a, &b) {
            consider(vec![c4]);
        }
    }
    best
}

/// Up to `want` vertex-disjoint triangles with two vertices in `x` and apex in `y`, as every
/// achievable prefix (one triangle, then two).
fn apex_triangles(g: &UnitDiskGraph, x: &[u32], y: &[u32], want: usize) -> Vec<Vec<Vec<u32>>> {
    let nb: Vec<(u32, Vec<u32>)> = y.iter().map(|&w| (w, x.iter().copied().filter(|&u| g.has_edge(u as usize, w as usize)).collect())).filter(|(_, s): &(u32, Vec<u32>)| s.len() >= 2).collect();
    let mut out = Vec::new();
    if let Some((w, s)) = nb.first() {
        out.push(vec![vec![s[0], s[1], *w]]);
    }
    if want >= 2 {
        'outer: for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                let (wi, si) = &nb[i];
                let (wj, sj) = &nb[j];
                // Two distinct picks per apex: a small Hall check.
                for p in 0..si.len() {
                    for q in p + 1..si.len() {
                        let rest: Vec<u32> = sj.iter().copied().filter(|&u| u != si[p] && u != si[q]).collect();
                        if rest.len() >= 2 {
                            out.push(vec![vec![si[p], si[q], *wi], vec![rest[0], rest[1], *wj]]);
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    out
}

fn crossing_c4(g: &UnitDiskGraph, a: &[u32], b: &[u32]) -> Option<Vec<u32>> {
    let h = |p: u32, q: u32| g.has_edge(p as usize, q as usize);
    for (i, &x1) in a.iter().enumerate() {
        for &x2 in &a[i + 1..] {
            for &y1 in b {
                if !h(x1, y1) || h(x2, y1) {
                    continue;
                }
                for &y2 in b {
                    if y2 != y1 && h(x2, y2) && !h(x1, y2) {
                        return Some(vec![x1, y1, y2, x2]);
                    }
                }
            }
        }
    }
    None
}

/// Splits a set of degree-two edges into vertex cycles.
pub fn cycles_from_edges(g: &UnitDiskGraph, edges: &[u32]) -> Vec<Vec<usize>> {
    let mut es = edges.to_vec();
    es.sort_unstable();
    es.dedup();
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &e in &es {
        let (a, b) = g.edge(e as usize);
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut keys: Vec<usize> = adj.keys().copied().collect();
    keys.sort_unstable();
    let mut seen: HashMap<usize, ()> = HashMap::new();
    let mut out = Vec::new();
    for s in keys {
        if seen.contains_key(&s) {
            continue;
        }
        let mut cyc = vec![s];
        seen.insert(s, ());
        let mut prev = usize::MAX;
        let mut cur = s;
        loop {
            let nx = adj[&cur].iter().copied().find(|&w| w != prev && !seen.contains_key(&w));
            match nx {
                Some(w) => {
                    seen.insert(w, ());
                    cyc.push(w);
                    prev = cur;
                    cur = w;
                }
                None => break,
            }
        }
        out.push(cyc);
    }
    out
}

/// Refined validity: pairs are grouped by the unordered pair of boundary curves they join; some
/// parity assignment must make each group's circular-arc crossing graph K_{z,z}-free.
pub fn refined_valid(sig: &Signature, anchors: &HashMap<u32, Anchor>, z: usize) -> bool {
    let mut groups: HashMap<(u32, u32, u8), Vec<((u32, f64), (u32, f64))>> = HashMap::new();
    for &(a, b) in &sig.0 {
        let (Some(x), Some(y)) = (anchors.get(&a), anchors.get(&b)) else { continue };
        let (x, y) = if (x.curve, x.pos.to_bits()) <= (y.curve, y.pos.to_bits()) { (x, y) } else { (y, x) };
        let parity = (x.parity ^ y.parity) & 1;
        groups.entry((x.curve, y.curve, parity)).or_default().push(((x.curve, x.pos), (y.curve, y.pos)));
    }
    groups.values().all(|arcs| crate::cac::arcs_kzz_free(arcs, z))
}

/// Greedy packing by repeatedly removing a shortest cycle; a lower bound for pruning.
pub fn greedy_packing(g: &UnitDiskGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut out = Vec::new();
    loop {
        // low-degree vertices first: their short cycles block the fewest others
        let mut order: Vec<usize> = (0..n).filter(|&v| alive[v] && deg[v] >= 2).collect();
        order.sort_by_key(|&v| (deg[v], v));
        let cost = |c: &[usize], deg: &[usize]| (c.len(), c.iter().map(|&v| deg[v]).sum::<usize>());
        let mut best: Option<Vec<usize>> = None;
        for s in order {
            if let Some(c) = shortest_cycle_through(g, &alive, s) {
                if best.as_ref().map_or(true, |b| cost(&c, &deg) < cost(b, &deg)) {
                    best = Some(c);
                }
                if best.as_ref().is_some_and(|b| b.len() == 3) {
                    break;
                }
            }
        }
        let Some(c) = best else { break };
        for &v in &c {
            alive[v] = false;
            for &w in g.neighbors(v) {
                deg[w as usize] -= 1;
            }
        }
        out.push(c);
    }
    out
}

/// Shortest cycle through `s` in the alive subgraph: BFS, then the best non-tree edge joining
/// two different branches at `s`.
pub fn shortest_cycle_through(g: &UnitDiskGraph, alive: &[bool], s: usize) -> Option<Vec<usize>> {
    let n = g.n();
    let mut dist = vec![usize::MAX; n];
    let mut par = vec![usize::MAX; n];
    let mut branch = vec![usize::MAX; n];
    let mut q = std::collections::VecDeque::new();
    dist[s] = 0;
    q.push_back(s);
    let mut best: Option<(usize, usize, usize)> = None;
    while let Some(v) = q.pop_front() {
        for &w in g.neighbors(v) {
            let w = w as usize;
            if !alive[w] || w == par[v] {
                continue;
            }
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                par[w] = v;
                branch[w] = if v == s { w } else { branch[v] };
                q.push_back(w);
            } else if w != s && v != s && branch[w] != branch[v] {
                let len = dist[v] + dist[w] + 1;
                if best.map_or(true, |b| len < b.0) {
                    best = Some((len, v, w));
                }
            }
        }
    }
    let (_, v, w) = best?;
    let walk = |mut x: usize| {
        let mut p = Vec::new();
        while x != s {
            p.push(x);
            x = par[x];
        }
        p
    };
    let mut cyc = vec![s];
    let mut a = walk(v);
    a.reverse();
    cyc.extend(a);
    cyc.extend(walk(w));
    Some(cyc)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::gen;
    use crate::grid::GridMap;
    use crate::oracle;

    /// Leaves are single cells, merged by recursive halving of the sorted cell list.
    pub fn cell_tree(g: &UnitDiskGraph) -> DpTree {
        let map = GridMap::build(g);
        let cells: Vec<Vec<u32>> = map.occupied().map(|(_, v)| v.to_vec()).collect();
        let mut clique = vec![0u32; g.n()];
        for (i, c) in cells.iter().enumerate() {
            for &v in c {
                clique[v as usize] = i as u32;
            }
        }
        let mut nodes = Vec::new();
        fn build(cells: &[Vec<u32>], nodes: &mut Vec<DpNode>) -> usize {
            if cells.len() == 1 {
                nodes.push(DpNode { children: None, vertices: cells[0].clone(), anchors: HashMap::new() });
                return nodes.len() - 1;
            }
            let mid = cells.len() / 2;
            let a = build(&cells[..mid], nodes);
            let b = build(&cells[mid..], nodes);
            let mut v = nodes[a].vertices.clone();
            v.extend(nodes[b].vertices.iter().copied());
            nodes.push(DpNode { children: Some((a, b)), vertices: v, anchors: HashMap::new() });
            nodes.len() - 1
        }
        let root = if cells.is_empty() {
            nodes.push(DpNode { children: None, vertices: Vec::new(), anchors: HashMap::new() });
            0
        } else {
            build(&cells, &mut nodes)
        };
        DpTree { nodes, root, clique }
    }

    fn solve_with(g: &UnitDiskGraph, lb: bool) -> DpResult {
        let tree = cell_tree(g);
        let greedy = greedy_packing(g);
        if !lb {
            return run(g, &tree, DpOptions::default()).unwrap().unwrap();
        }
        for target in (greedy.len() + 1..=g.n() / 3).rev() {
            if let Some(r) = run(g, &tree, DpOptions { target, ..Default::default() }).unwrap() {
                return r;
            }
        }
        DpResult { value: greedy.len(), cycles: greedy, stats: DpStats::default() }
    }

    #[test]
    fn unpruned_matches_oracle() {
        for g in gen::small_suite(80, 9, 5) {
            let want = oracle::max_cycle_packing(&g).unwrap().value;
            let r = solve_with(&g, false);
            assert_eq!(r.value, want);
            assert!(oracle::verify_solution(&g, &r.cycles));
        }
    }

    #[test]
    fn small_cases() {
        let tri = UnitDiskGraph::new(vec![crate::Point::new(0.0, 0.0), crate::Point::new(0.5, 0.0), crate::Point::new(0.0, 0.5)]).unwrap();
        assert_eq!(solve_with(&tri, false).value, 1);
        assert_eq!(pack_two_cliques(&tri, &[0, 1, 2], &[0, 0, 0]).0, 1);
    }

    #[test]
    fn matches_oracle_on_suite() {
        for (i, g) in gen::small_suite(120, 14, 11).iter().enumerate() {
            let want = oracle::max_cycle_packing(g).unwrap().value;
            let r = solve_with(g, true);
            assert_eq!(r.value, want, "instance {i} n={} m={}", g.n(), g.m());
            assert!(oracle::verify_solution(g, &r.cycles), "instance {i}");
        }
    }
}
