use std::f64::consts::TAU;

use rand::Rng;
use serde::Serialize;

use crate::geom::{segments_cross, segments_touch, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

/// Number of proper crossings of the polyline `path` with the polyline `lambda`, mod 2.
/// A segment meeting `lambda` several times contributes each meeting.
pub fn crossing_parity(path: &[Point], lambda: &[Point]) -> Parity {
    let mut count = 0usize;
    for p in path.windows(2) {
        for l in lambda.windows(2) {
            if segments_cross(p[0], p[1], l[0], l[1]) {
                count += 1;
            }
        }
    }
    if count % 2 == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Whether two polylines share a point.
pub fn paths_meet(a: &[Point], b: &[Point]) -> bool {
    a.windows(2).any(|s| b.windows(2).any(|t| segments_touch(s[0], s[1], t[0], t[1])))
}

/// Pairs `(x, y)` and `(x2, y2)` of positions on a circle interleave.
pub fn cross_ordered(a: (f64, f64), b: (f64, f64)) -> bool {
    let inside = |lo: f64, hi: f64, t: f64| {
        let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
        lo < t && t < hi
    };
    inside(a.0, a.1, b.0) != inside(a.0, a.1, b.1)
}

/// The region between two concentric circles around the origin, with the connector `lambda`
/// along the positive x-axis from the inner to the outer circle.
#[derive(Debug, Clone, Copy)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
}

impl Default for Annulus {
    fn default() -> Self {
        Annulus { inner: 1.0, outer: 2.0 }
    }
}

impl Annulus {
    pub fn lambda(&self) -> [Point; 2] {
        [Point::new(self.inner, 0.0), Point::new(self.outer, 0.0)]
    }

    /// Position of an endpoint on the closed curve outer circle, lambda, inner circle (reversed),
    /// lambda. Angles are in `(0, TAU)`.
    pub fn position(&self, on_outer: bool, angle: f64) -> f64 {
        if on_outer {
            angle
        } else {
            2.0 * TAU - angle
        }
    }

    /// Random polyline from angle `from` on the outer circle to angle `to` on the inner one,
    /// winding `turns` extra times around the hole, with jitter that may reverse direction.
    pub fn random_path<R: Rng>(&self, rng: &mut R, from: f64, to: f64, turns: i32) -> Vec<Point> {
        let total = to - from + TAU * turns as f64;
        let steps = ((total.abs() / 0.2).ceil() as usize).max(4) + rng.gen_range(0..8);
        let (r_hi, r_lo) = (self.outer - 0.1 * (self.outer - self.inner), self.inner + 0.1 * (self.outer - self.inner));
        let at = |r: f64, a: f64| Point::new(r * a.cos(), r * a.sin());
        let mut pts = vec![at(self.outer, from)];
        let mut angle = from;
        for i in 1..steps {
            let target = from + total * i as f64 / steps as f64;
            let step = (target - angle + rng.gen_range(-0.08..0.08)).clamp(-0.28, 0.28);
            angle += step;
            pts.push(at(rng.gen_range(r_lo..r_hi), angle));
        }
        // walk the remaining angle in short steps, then drop radially onto the inner circle
        let end = from + total;
        while (end - angle).abs() > 0.28 {
            angle += 0.28 * (end - angle).signum();
            pts.push(at(rng.gen_range(r_lo..r_hi), angle));
        }
        pts.push(at(r_lo, end));
        pts.push(at(self.inner, end));
        pts
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FuzzReport {
    pub tested: usize,
    pub drawn: usize,
    pub counterexamples: usize,
}

/// Draws random path pairs in `annulus` until `count` of them are cross-ordered with equal
/// parity, and counts those that do not meet.
pub fn fuzz<R: Rng>(annulus: Annulus, count: usize, rng: &mut R) -> FuzzReport {
    let lambda = annulus.lambda();
    let mut rep = FuzzReport::default();
    let angle = |rng: &mut R| rng.gen_range(0.01..TAU - 0.01);
    while rep.tested < count {
        rep.drawn += 1;
        let (x, y, x2, y2) = (angle(rng), angle(rng), angle(rng), angle(rng));
        let (t, t2) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
        let p = annulus.random_path(rng, x, y, t);
        let q = annulus.random_path(rng, x2, y2, t2);
        let ends = |a: f64, b: f64| (annulus.position(true, a), annulus.position(false, b));
        if !cross_ordered(ends(x, y), ends(x2, y2)) || crossing_parity(&p, &lambda) != crossing_parity(&q, &lambda) {
            continue;
        }
        rep.tested += 1;
        if !paths_meet(&p, &q) {
            rep.counterexamples += 1;
        }
    }
    rep
}

/// First point where the segment `a -> b` meets one of `curves`: curve index, segment index, point.
pub fn first_hit(a: Point, b: Point, curves: &[Vec<Point>]) -> Option<(usize, usize, Point)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for (c, curve) in curves.iter().enumerate() {
        for (i, s) in curve.windows(2).enumerate() {
            if !segments_touch(a, b, s[0], s[1]) {
                continue;
            }
            let t = crate::geom::intersection_param(a, b, s[0], s[1]);
            let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
            if best.map_or(true, |(bt, _, _)| t < bt) {
                best = Some((t, c, i));
            }
        }
    }
    best.map(|(t, c, i)| (c, i, crate::geom::lerp(a, b, t)))
}

/// Extends a path inside a piece along its two outgoing edges to their first boundary hits.
/// `out_start` and `out_end` are the far endpoints of the cut edges at either end.
pub fn anchored_path(path: &[Point], out_start: Point, out_end: Point, curves: &[Vec<Point>]) -> Option<Vec<Point>> {
    let (&first, &last) = (path.first()?, path.last()?);
    let (_, _, s) = first_hit(first, out_start, curves)?;
    let (_, _, e) = first_hit(last, out_end, curves)?;
    let mut out = vec![s];
    out.extend_from_slice(path);
    out.push(e);
    Some(out)
}
