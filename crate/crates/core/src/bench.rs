use std::time::Instant;

use serde::Serialize;

use crate::gen::{udg, Layout};
use crate::geom::UnitDiskGraph;
use crate::sc::{decompose, ScConfig};
use crate::solve::{solve, SolveOptions};
use crate::Result;

#[derive(Debug, Clone, Serialize)]
pub struct WidthRow {
    pub n: usize,
    pub ell: usize,
    pub width: f64,
    /// width / sqrt(ell)
    pub k: f64,
    pub seconds: f64,
}

pub fn width_row(g: &UnitDiskGraph, cfg: &ScConfig) -> Result<WidthRow> {
    let t = Instant::now();
    let b = decompose(g, cfg)?;
    let width = b.sc.width();
    let ell = b.h.ell;
    Ok(WidthRow { n: g.n(), ell, width, k: width / (ell.max(1) as f64).sqrt(), seconds: t.elapsed().as_secs_f64() })
}

/// Random instance at average degree around `deg`.
pub fn instance(n: usize, deg: f64, layout: Layout, seed: u64) -> UnitDiskGraph {
    let side = (n as f64 * std::f64::consts::PI / deg).sqrt();
    udg(layout, n, side, seed)
}

/// Width against ell over instances of the given sizes, `per` seeds each.
pub fn width_suite(sizes: &[usize], per: usize, seed: u64, cfg: &ScConfig) -> Result<Vec<WidthRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        for s in 0..per as u64 {
            let layout = if s % 3 == 2 { Layout::Clustered } else { Layout::Uniform };
            let g = instance(n, 5.0, layout, seed ^ (n as u64) << 20 ^ s);
            rows.push(width_row(&g, cfg)?);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct RuntimeRow {
    pub n: usize,
    pub m: usize,
    pub value: usize,
    pub dp_runs: usize,
    pub max_states: usize,
    pub seconds: f64,
}

/// Solve time against the packing value on sparse instances.
pub fn runtime_suite(sizes: &[usize], per: usize, seed: u64, opts: &SolveOptions) -> Result<Vec<RuntimeRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        for s in 0..per as u64 {
            let g = instance(n, 4.0, Layout::Uniform, seed ^ (n as u64) << 20 ^ s);
            let t = Instant::now();
            let sol = solve(&g, opts)?;
            rows.push(RuntimeRow { n, m: g.m(), value: sol.value, dp_runs: sol.report.dp_runs, max_states: sol.report.max_states, seconds: t.elapsed().as_secs_f64() });
        }
    }
    Ok(rows)
}

pub fn write_csv<T: Serialize, W: std::io::Write>(rows: &[T], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(std::io::Error::other)?;
    }
    w.flush()
}
