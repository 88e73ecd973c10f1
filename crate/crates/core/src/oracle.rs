use std::collections::HashMap;

use crate::geom::UnitDiskGraph;
use crate::Error;

pub const ORACLE_LIMIT: usize = 16;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub value: usize,
    pub solution: Vec<Vec<usize>>,
}

struct Search {
    adj: Vec<u32>,
    memo: HashMap<u32, u8>,
    induced: bool,
}

impl Search {
    /// Cycles through `v` inside `mask` where `v` is the lowest vertex of `mask`.
    fn cycles_through(&self, v: usize, mask: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut path = vec![v];
        self.extend(&mut path, 1 << v, mask, &mut out);
        out
    }

    fn extend(&self, path: &mut Vec<usize>, used: u32, mask: u32, out: &mut Vec<u32>) {
        let v = path[0];
        let last = *path.last().unwrap();
        let mut inner = 0u32;
        if self.induced && path.len() > 2 {
            for &p in &path[1..path.len() - 1] {
                inner |= self.adj[p];
            }
        }
        let mut cand = self.adj[last] & mask & !used & !inner;
        while cand != 0 {
            let w = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            let closes = path.len() >= 2 && self.adj[w] >> v & 1 == 1;
            if closes && path[1] < w {
                out.push(used | 1 << w);
            }
            if !(self.induced && closes) {
                path.push(w);
                self.extend(path, used | 1 << w, mask, out);
                path.pop();
            }
        }
    }

    fn best(&mut self, mask: u32) -> u8 {
        if mask.count_ones() < 3 {
            return 0;
        }
        if let Some(&b) = self.memo.get(&mask) {
            return b;
        }
        let v = mask.trailing_zeros() as usize;
        let mut b = self.best(mask & !(1 << v));
        for c in self.cycles_through(v, mask) {
            b = b.max(1 + self.best(mask & !c));
        }
        self.memo.insert(mask, b);
        b
    }

    /// Vertex order of an induced cycle given as a bitmask.
    fn cycle_order(&self, set: u32) -> Vec<usize> {
        let start = set.trailing_zeros() as usize;
        let mut order = vec![start];
        let mut seen = 1u32 << start;
        let mut cur = start;
        while let Some(w) = (0..32).find(|&w| (set & !seen) >> w & 1 == 1 && self.adj[cur] >> w & 1 == 1) {
            seen |= 1 << w;
            order.push(w);
            cur = w;
        }
        order
    }

    fn trace(&mut self, mask: u32, out: &mut Vec<u32>) {
        if mask.count_ones() < 3 {
            return;
        }
        let target = self.best(mask);
        if target == 0 {
            return;
        }
        let v = mask.trailing_zeros() as usize;
        if self.best(mask & !(1 << v)) == target {
            return self.trace(mask & !(1 << v), out);
        }
        for c in self.cycles_through(v, mask) {
            if 1 + self.best(mask & !c) == target {
                out.push(c);
                return self.trace(mask & !c, out);
            }
        }
        unreachable!("memo inconsistent");
    }

    fn all(&mut self, mask: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        let target = self.best(mask);
        if target == 0 {
            out.push(acc.clone());
            return;
        }
        let v = mask.trailing_zeros() as usize;
        if self.best(mask & !(1 << v)) == target {
            self.all(mask & !(1 << v), acc, out, limit);
        }
        for c in self.cycles_through(v, mask) {
            if 1 + self.best(mask & !c) == target {
                acc.push(c);
                self.all(mask & !c, acc, out, limit);
                acc.pop();
            }
        }
    }
}

fn search(g: &UnitDiskGraph, induced: bool) -> Result<Search, Error> {
    if g.n() > ORACLE_LIMIT {
        return Err(Error::OracleLimit { n: g.n(), limit: ORACLE_LIMIT });
    }
    let adj = (0..g.n()).map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u)).collect();
    Ok(Search { adj, memo: HashMap::new(), induced })
}

pub fn max_cycle_packing(g: &UnitDiskGraph) -> Result<OracleResult, Error> {
    let mut s = search(g, true)?;
    let full = if g.n() == 32 { u32::MAX } else { (1u32 << g.n()) - 1 };
    let value = s.best(full) as usize;
    let mut sets = Vec::new();
    s.trace(full, &mut sets);
    let solution = sets.into_iter().map(|c| s.cycle_order(c)).collect();
    Ok(OracleResult { value, solution })
}

/// Maximum packing using arbitrary (not necessarily induced) cycles.
pub fn max_cycle_packing_all_cycles(g: &UnitDiskGraph) -> Result<usize, Error> {
    let mut s = search(g, false)?;
    Ok(s.best((1u32 << g.n()) - 1) as usize)
}

/// Up to `limit` optimal packings built from induced cycles, each cycle as a vertex list.
pub fn optimal_packings(g: &UnitDiskGraph, limit: usize) -> Result<Vec<Vec<Vec<usize>>>, Error> {
    let mut s = search(g, true)?;
    let mut out = Vec::new();
    s.all((1u32 << g.n()) - 1, &mut Vec::new(), &mut out, limit);
    Ok(out.into_iter().map(|sol| sol.into_iter().map(|c| s.cycle_order(c)).collect()).collect())
}

pub fn verify_solution(g: &UnitDiskGraph, cycles: &[Vec<usize>]) -> bool {
    let mut used = vec![false; g.n()];
    for c in cycles {
        if c.len() < 3 {
            return false;
        }
        for (i, &v) in c.iter().enumerate() {
            if v >= g.n() || used[v] {
                return false;
            }
            used[v] = true;
            if !g.has_edge(v, c[(i + 1) % c.len()]) {
                return false;
            }
        }
    }
    true
}
