use std::time::Instant;

use serde::Serialize;

use crate::dp::{self, DpOptions, DpResult, DpTree, Mode};
use crate::geom::UnitDiskGraph;
use crate::oracle::verify_solution;
use crate::sc::{self, ScConfig};
use crate::structure::{clean, dense_extract};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub mode: Mode,
    pub z: usize,
    /// Decision target. With a target, the dense shortcut may answer without the program.
    pub k: Option<usize>,
    pub sc: ScConfig,
    pub budget: usize,
    /// Overrides the dense-shortcut threshold multiplier.
    pub dense_factor: Option<f64>,
    /// Validate every decomposition before using it.
    pub check: bool,
    /// Seed the search with a greedy packing and skip the program when it meets the upper bound.
    pub greedy: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { mode: Mode::Standard, z: 3, k: None, sc: ScConfig::default(), budget: DpOptions::default().budget, dense_factor: None, check: false, greedy: true }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveReport {
    pub cleaned_away: usize,
    pub components: usize,
    pub dense: bool,
    pub max_width: f64,
    pub max_states: usize,
    pub dp_runs: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    /// Number of cycles found. When `report.dense` is set this is `k`, a lower bound on the optimum.
    pub value: usize,
    pub cycles: Vec<Vec<usize>>,
    pub report: SolveReport,
}

/// Maximum set of vertex-disjoint cycles, or `k` of them through the dense shortcut.
pub fn solve(g: &UnitDiskGraph, opts: &SolveOptions) -> Result<Solution> {
    let t0 = Instant::now();
    let mut report = SolveReport::default();
    let c = clean(g);
    report.cleaned_away = c.removed.len();
    let lift = |cycles: Vec<Vec<usize>>, ids: &[usize]| -> Vec<Vec<usize>> { cycles.into_iter().map(|cy| cy.into_iter().map(|v| ids[v]).collect()).collect() };

    if let Some(k) = opts.k.filter(|&k| k > 0) {
        if let Some(ex) = dense_extract(&c.graph, k, opts.dense_factor) {
            report.dense = true;
            report.seconds = t0.elapsed().as_secs_f64();
            let cycles = lift(ex.cycles, &c.kept);
            return finish(g, cycles, report);
        }
    }

    let mut cycles = Vec::new();
    for comp in components(&c.graph) {
        let (h, ids) = c.graph.induced(&comp);
        report.components += 1;
        let found = solve_component(&h, opts, &mut report)?;
        let ids: Vec<usize> = ids.iter().map(|&v| c.kept[v]).collect();
        cycles.extend(lift(found, &ids));
    }
    report.seconds = t0.elapsed().as_secs_f64();
    finish(g, cycles, report)
}

fn finish(g: &UnitDiskGraph, cycles: Vec<Vec<usize>>, report: SolveReport) -> Result<Solution> {
    if !verify_solution(g, &cycles) {
        return Err(Error::Decomposition("assembled cycles are not a valid packing".into()));
    }
    Ok(Solution { value: cycles.len(), cycles, report })
}

/// Vertex sets of the connected components, each sorted.
pub fn components(g: &UnitDiskGraph) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for s in 0..g.n() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for &w in g.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    comp.push(w as usize);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Upper bound from vertex count and cycle rank.
pub fn upper_bound(g: &UnitDiskGraph) -> usize {
    let rank = (g.m() + components(g).len()).saturating_sub(g.n());
    rank.min(g.n() / 3)
}

fn solve_component(h: &UnitDiskGraph, opts: &SolveOptions, report: &mut SolveReport) -> Result<Vec<Vec<usize>>> {
    let ub = upper_bound(h);
    let greedy = if opts.greedy { dp::greedy_packing(h) } else { Vec::new() };
    if greedy.len() >= ub {
        return Ok(greedy);
    }
    let build = sc::decompose(h, &opts.sc)?;
    if opts.check {
        build.sc.check(h, &build.map, opts.sc.spread)?;
    }
    // the cell split is also an sc-decomposition; keep whichever is narrower
    let split = sc::cell_split(h, &build.map);
    let max_cut = |d: &sc::ScDecomposition| d.nodes.iter().map(|n| n.cut.len()).max().unwrap_or(0);
    let chosen = if (split.width(), max_cut(&split)) < (build.sc.width(), max_cut(&build.sc)) { &split } else { &build.sc };
    report.max_width = report.max_width.max(chosen.width());
    let tree = chosen.to_dp_tree(h, &build.map);
    let base = DpOptions { mode: Mode::Standard, z: opts.z, budget: opts.budget, ..Default::default() };
    let standard = search(h, &tree, base, greedy.len(), ub, report)?;
    if opts.mode == Mode::Standard {
        return Ok(standard.unwrap_or(greedy));
    }
    let std_value = standard.as_ref().map_or(greedy.len(), |c| c.len());
    let refined = search(h, &tree, DpOptions { mode: Mode::Refined, ..base }, 0, std_value, report)?;
    let ref_value = refined.as_ref().map_or(0, |c| c.len());
    if ref_value < std_value {
        return Err(Error::ZTooSmall { z: opts.z, refined: ref_value, standard: std_value });
    }
    Ok(refined.unwrap_or(greedy))
}

/// Optimum above `lo` when one exists. A run with target `t` returns the exact optimum whenever it
/// is at least `t`, so the search stops at the first success. The upper bound goes first since high
/// targets prune hardest.
fn search(h: &UnitDiskGraph, tree: &DpTree, base: DpOptions, lo: usize, ub: usize, report: &mut SolveReport) -> Result<Option<Vec<Vec<usize>>>> {
    let (lo, mut hi) = (lo + 1, ub);
    let mut first = true;
    while lo <= hi {
        let target = if first { hi } else { lo + (hi - lo) / 2 };
        first = false;
        report.dp_runs += 1;
        let r: Option<DpResult> = dp::run(h, tree, DpOptions { target, ..base })?;
        match r {
            Some(r) => {
                report.max_states = report.max_states.max(r.stats.max_states);
                return Ok(Some(r.cycles));
            }
            None => hi = target - 1,
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{small_suite, udg, Layout};
    use crate::oracle::max_cycle_packing;

    #[test]
    fn matches_oracle() {
        for (i, g) in small_suite(80, 14, 3).iter().enumerate() {
            let want = max_cycle_packing(g).unwrap().value;
            let s = solve(g, &SolveOptions { check: true, ..Default::default() }).unwrap();
            assert_eq!(s.value, want, "instance {i}");
        }
    }

    #[test]
    fn refined_agrees_or_reports() {
        for g in small_suite(30, 12, 8) {
            let std = solve(&g, &SolveOptions::default()).unwrap().value;
            match solve(&g, &SolveOptions { mode: Mode::Refined, ..Default::default() }) {
                Ok(s) => assert_eq!(s.value, std),
                Err(Error::ZTooSmall { standard, .. }) => assert_eq!(standard, std),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn forest_has_no_cycles() {
        let g = UnitDiskGraph::new((0..5).map(|i| crate::Point::new(i as f64 * 0.8, 0.0)).collect()).unwrap();
        assert_eq!(solve(&g, &SolveOptions::default()).unwrap().value, 0);
    }

    #[test]
    fn components_are_solved_separately() {
        let mut pts = Vec::new();
        for c in 0..3 {
            let x = c as f64 * 5.0;
            pts.extend([crate::Point::new(x, 0.0), crate::Point::new(x + 0.5, 0.0), crate::Point::new(x + 0.25, 0.4)]);
        }
        let g = UnitDiskGraph::new(pts).unwrap();
        let s = solve(&g, &SolveOptions::default()).unwrap();
        assert_eq!(s.value, 3);
        assert_eq!(s.report.components, 3);
    }

    #[test]
    fn medium_instance_runs() {
        let g = udg(Layout::Uniform, 40, 4.5, 2);
        let s = solve(&g, &SolveOptions { check: true, ..Default::default() }).unwrap();
        assert!(s.value >= dp::greedy_packing(&g).len());
    }
}
