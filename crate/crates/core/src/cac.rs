/// A perfect matching on points `0..2m` around a circle; each arc is stored as `(a, b)` with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct CircularPairing {
    pub m: usize,
    pub pairs: Vec<(u32, u32)>,
}

impl CircularPairing {
    pub fn new(m: usize, mut pairs: Vec<(u32, u32)>) -> Option<Self> {
        let mut hit = vec![false; 2 * m];
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
            for x in [p.0, p.1] {
                if x as usize >= 2 * m || std::mem::replace(&mut hit[x as usize], true) {
                    return None;
                }
            }
        }
        if pairs.len() != m {
            return None;
        }
        pairs.sort_unstable();
        Some(CircularPairing { m, pairs })
    }
}

pub fn arcs_cross(p: (u32, u32), q: (u32, u32)) -> bool {
    let inside = |x: u32| p.0 < x && x < p.1;
    inside(q.0) != inside(q.1)
}

/// Crossing graph of the arcs: an edge whenever two arcs interleave.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacGraph {
    pub adj: Vec<Vec<bool>>,
}

impl CacGraph {
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| self.adj[i][j]).collect()
    }
}

pub fn cac_graph(p: &CircularPairing) -> CacGraph {
    arcs_graph(&p.pairs)
}

fn arcs_graph(arcs: &[(u32, u32)]) -> CacGraph {
    let n = arcs.len();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if arcs_cross(arcs[i], arcs[j]) {
                adj[i][j] = true;
                adj[j][i] = true;
            }
        }
    }
    CacGraph { adj }
}

/// True iff no `z + z` vertices form a (not necessarily induced) complete bipartite subgraph.
pub fn is_kzz_free(g: &CacGraph, z: usize) -> bool {
    let z = z.max(1);
    let n = g.n();
    if n < 2 * z {
        return true;
    }
    let full: Vec<usize> = (0..n).collect();
    let mut side = Vec::with_capacity(z);
    !biclique(g, z, 0, &full, &mut side)
}

/// Grows one side in increasing order while tracking the common neighbourhood.
fn biclique(g: &CacGraph, z: usize, start: usize, common: &[usize], side: &mut Vec<usize>) -> bool {
    if side.len() == z {
        return common.iter().filter(|v| !side.contains(v)).count() >= z;
    }
    for v in start..g.n() {
        let next: Vec<usize> = if side.is_empty() { (0..g.n()).filter(|&w| g.adj[v][w]).collect() } else { common.iter().copied().filter(|&w| g.adj[v][w]).collect() };
        if next.len() < z {
            continue;
        }
        side.push(v);
        let found = biclique(g, z, v + 1, &next, side);
        side.pop();
        if found {
            return true;
        }
    }
    false
}

/// Every perfect matching of `2m` points, lexicographic.
pub fn all_pairings(m: usize) -> Vec<CircularPairing> {
    let mut out = Vec::new();
    let mut free = vec![true; 2 * m];
    let mut acc = Vec::new();
    fn rec(free: &mut [bool], acc: &mut Vec<(u32, u32)>, m: usize, out: &mut Vec<CircularPairing>) {
        let Some(a) = free.iter().position(|&f| f) else {
            out.push(CircularPairing { m, pairs: acc.clone() });
            return;
        };
        free[a] = false;
        for b in a + 1..free.len() {
            if free[b] {
                free[b] = false;
                acc.push((a as u32, b as u32));
                rec(free, acc, m, out);
                acc.pop();
                free[b] = true;
            }
        }
        free[a] = true;
    }
    rec(&mut free, &mut acc, m, &mut out);
    out
}

/// The filter oracle: all matchings whose crossing graph is K_{z,z}-free.
pub fn filter_kzz_free(m: usize, z: usize) -> Vec<CircularPairing> {
    all_pairings(m).into_iter().filter(|p| is_kzz_free(&cac_graph(p), z)).collect()
}

/// All K_{z,z}-free pairings, built level by level: each level is the set of arcs not contained in
/// any remaining arc, and every deeper arc sits inside an arc of the level above. Partial arc sets
/// that already hold a biclique are abandoned.
pub fn enumerate_kzz_free(m: usize, z: usize) -> Vec<CircularPairing> {
    let mut out = Vec::new();
    let rest: Vec<u32> = (0..2 * m as u32).collect();
    let mut acc = Vec::new();
    levels(&rest, None, &mut acc, m, z, &mut out);
    out.sort();
    out
}

fn levels(rest: &[u32], above: Option<&[(u32, u32)]>, acc: &mut Vec<(u32, u32)>, m: usize, z: usize, out: &mut Vec<CircularPairing>) {
    if rest.is_empty() {
        let mut pairs = acc.clone();
        pairs.sort_unstable();
        out.push(CircularPairing { m, pairs });
        return;
    }
    let mut layer = Vec::new();
    let mut used = vec![false; rest.len()];
    pick_layer(rest, above, 0, &mut used, &mut layer, acc, m, z, out);
}

/// Chooses the next level: pairwise non-nested arcs covering (by containment) every point left over.
#[allow(clippy::too_many_arguments)]
fn pick_layer(rest: &[u32], above: Option<&[(u32, u32)]>, i: usize, used: &mut Vec<bool>, layer: &mut Vec<(u32, u32)>, acc: &mut Vec<(u32, u32)>, m: usize, z: usize, out: &mut Vec<CircularPairing>) {
    if i == rest.len() {
        if layer.is_empty() {
            return;
        }
        let left: Vec<u32> = rest.iter().zip(used.iter()).filter(|(_, &u)| !u).map(|(&x, _)| x).collect();
        if left.len() % 2 == 1 || !left.iter().all(|&x| layer.iter().any(|&(a, b)| a < x && x < b)) {
            return;
        }
        let before = acc.len();
        acc.extend(layer.iter().copied());
        if is_kzz_free(&arcs_graph(acc), z) {
            let this = layer.clone();
            levels(&left, Some(&this), acc, m, z, out);
        }
        acc.truncate(before);
        return;
    }
    if used[i] {
        return pick_layer(rest, above, i + 1, used, layer, acc, m, z, out);
    }
    // point i stays for a deeper level
    pick_layer(rest, above, i + 1, used, layer, acc, m, z, out);
    used[i] = true;
    for j in i + 1..rest.len() {
        if used[j] {
            continue;
        }
        let arc = (rest[i], rest[j]);
        let nested = layer.iter().any(|&(a, b)| (a < arc.0 && arc.1 < b) || (arc.0 < a && b < arc.1));
        let inside_above = above.map_or(true, |ab| ab.iter().any(|&(a, b)| a < arc.0 && arc.1 < b));
        if nested || !inside_above {
            continue;
        }
        used[j] = true;
        layer.push(arc);
        pick_layer(rest, above, i + 1, used, layer, acc, m, z, out);
        layer.pop();
        used[j] = false;
    }
    used[i] = false;
}

/// K_{z,z}-freeness of arcs given by anchors `((curve, position), (curve, position))`. Anchors on
/// two curves are laid out on one circle: the first curve in increasing position, the second in
/// decreasing position, as if the annulus between them were cut open.
pub fn arcs_kzz_free(arcs: &[((u32, f64), (u32, f64))], z: usize) -> bool {
    if arcs.len() < 2 * z.max(1) {
        return true;
    }
    let mut pts: Vec<(u32, f64, usize)> = Vec::new();
    for (i, &(x, y)) in arcs.iter().enumerate() {
        pts.push((x.0, x.1, i));
        pts.push((y.0, y.1, i));
    }
    let first = pts.iter().map(|p| p.0).min().unwrap();
    pts.sort_by(|p, q| {
        let key = |r: &(u32, f64, usize)| if r.0 == first { (0, r.1) } else { (1, -r.1) };
        key(p).partial_cmp(&key(q)).unwrap()
    });
    let mut ends = vec![Vec::new(); arcs.len()];
    for (k, p) in pts.iter().enumerate() {
        ends[p.2].push(k as u32);
    }
    let arcs: Vec<(u32, u32)> = ends.iter().map(|e| (e[0].min(e[1]), e[0].max(e[1]))).collect();
    is_kzz_free(&arcs_graph(&arcs), z)
}

pub fn catalan(m: usize) -> u64 {
    (0..m as u64).fold(1, |c, i| c * 2 * (2 * i + 1) / (i + 2))
}

pub fn double_factorial_odd(m: usize) -> u64 {
    (1..=m as u64).map(|i| 2 * i - 1).product()
}
