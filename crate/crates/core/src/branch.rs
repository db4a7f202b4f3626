//! Slit disk, branch-tracked square roots and the primitive
//! `F(z) = 2 ∫_{z0}^{z} f^{1/2}`.
//!
//! The square root is continued factor by factor: along a segment from `a`
//! to `w` that avoids the roots, `(w − r)/(a − r)` never crosses the negative
//! axis, so its principal half-power is the continuous branch. This makes
//! the continuation exact instead of sample-based.

use std::f64::consts::PI;

use petgraph::algo::astar;
use petgraph::graph::UnGraph;
use rayon::prelude::*;

use crate::analytic::{powu, ORDER_MATCH_TOL};
use crate::error::{HopfError, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::{arg_in_window, half_power};
use crate::{Func, C64};

/// Minimum distance between two cuts, and between a cut and a foreign root.
pub const CUT_CLEARANCE: f64 = 1e-6;
/// Obstacle inflation used by the visibility graph.
pub const PATH_INFLATION: f64 = 1e-8;
/// Longest allowed step between consecutive waypoints.
pub const MAX_WAYPOINT_GAP: f64 = 0.5;
pub const CUT_SEARCH_ATTEMPTS: usize = 256;
/// Default absolute tolerance for the primitive.
pub const DEFAULT_TOL: f64 = 1e-10;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
const SAME_POINT: f64 = 1e-12;

#[inline]
fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

#[inline]
fn dot(a: C64, b: C64) -> f64 {
    a.re * b.re + a.im * b.im
}

pub fn point_segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (dot(p - a, ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn segments_cross(p1: C64, q1: C64, p2: C64, q2: C64) -> bool {
    let d1 = cross(q2 - p2, p1 - p2);
    let d2 = cross(q2 - p2, q1 - p2);
    let d3 = cross(q1 - p1, p2 - p1);
    let d4 = cross(q1 - p1, q2 - p1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Euclidean distance between two closed segments.
pub fn segment_distance(p1: C64, q1: C64, p2: C64, q2: C64) -> f64 {
    if segments_cross(p1, q1, p2, q2) {
        return 0.0;
    }
    point_segment_distance(p1, p2, q2)
        .min(point_segment_distance(q1, p2, q2))
        .min(point_segment_distance(p2, p1, q1))
        .min(point_segment_distance(q2, p1, q1))
}

/// Straight slit from an odd-order zero out past the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub anchor: C64,
    pub direction: C64,
    pub end: C64,
    pub order: u32,
}

impl Cut {
    fn new(anchor: C64, direction: C64, order: u32, radius: f64) -> Self {
        let d = direction / direction.norm();
        // |a + s d| = radius, s > 0
        let b = dot(anchor, d);
        let s = -b + (b * b - (anchor.norm_sqr() - radius * radius)).sqrt();
        Self {
            anchor,
            direction: d,
            end: anchor + d * s,
            order,
        }
    }

    pub fn angle(&self) -> f64 {
        self.direction.arg()
    }

    pub fn length(&self) -> f64 {
        (self.end - self.anchor).norm()
    }

    /// Signed distance from the line carrying the cut; positive on the
    /// counter-clockwise side.
    pub fn side(&self, p: C64) -> f64 {
        cross(self.direction, p - self.anchor)
    }

    /// Whether `[p, q]` crosses the cut. Points on the cut count as lying on
    /// the positive side.
    pub fn crossed_by(&self, p: C64, q: C64) -> bool {
        let sp = self.side(p);
        let sq = self.side(q);
        if (sp >= 0.0) == (sq >= 0.0) {
            return false;
        }
        let t = sp / (sp - sq);
        let x = p + (q - p) * t;
        let s = dot(x - self.anchor, self.direction);
        s >= 0.0 && s <= self.length()
    }

    pub fn distance(&self, p: C64) -> f64 {
        point_segment_distance(p, self.anchor, self.end)
    }

    /// Whether `p` lies on the cut but away from its anchor.
    pub fn contains_interior(&self, p: C64, tol: f64) -> bool {
        (p - self.anchor).norm() > SAME_POINT && self.distance(p) <= tol
    }
}

/// The disk minus one slit per odd-order zero, with a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitDisk {
    base: C64,
    base_order: u32,
    cuts: Vec<Cut>,
    radius: f64,
    /// Path clearance from the cuts, shrunk for tightly clustered roots.
    inflation: f64,
}

impl SlitDisk {
    pub fn base(&self) -> C64 {
        self.base
    }

    /// Order of `f` at the base (0 for a regular base).
    pub fn base_order(&self) -> u32 {
        self.base_order
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    /// Radius at which every cut ends.
    pub fn cut_radius(&self) -> f64 {
        self.radius
    }

    pub fn cut_anchored_at(&self, z: C64) -> Option<&Cut> {
        self.cuts.iter().find(|c| (c.anchor - z).norm() < ORDER_MATCH_TOL)
    }

    /// Number of cuts crossed by the segment `[p, q]`.
    pub fn crossings(&self, p: C64, q: C64) -> usize {
        self.cuts.iter().filter(|c| c.crossed_by(p, q)).count()
    }

    /// `−1` when `[p, q]` crosses an odd number of cuts, else `+1`.
    pub fn parity(&self, p: C64, q: C64) -> f64 {
        if self.crossings(p, q) % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn on_cut_interior(&self, z: C64) -> bool {
        self.cuts.iter().any(|c| c.contains_interior(z, SAME_POINT))
    }

    /// Window lower bound for the argument around the root at `z`.
    fn window_at(&self, z: C64) -> f64 {
        self.cut_anchored_at(z).map_or(-PI, |c| c.angle())
    }

    /// Germ of the chosen determination of `f^{1/2}` at `z`.
    pub fn germ_at(&self, f: &Func, z: C64, sheet: f64) -> Result<Germ> {
        if f.order_at(z) > 0 {
            Germ::at_root(f, z, sheet, self.window_at(z))
        } else {
            Germ::regular(f, z, sheet)
        }
    }

    /// Germ at the base point on the given sheet.
    pub fn base_germ(&self, f: &Func, sheet: f64) -> Result<Germ> {
        self.germ_at(f, self.base, sheet)
    }

    fn visible(&self, p: C64, q: C64, q_is_target: bool) -> bool {
        for c in &self.cuts {
            let p_anchor = (p - c.anchor).norm() < SAME_POINT;
            let q_anchor = (q - c.anchor).norm() < SAME_POINT;
            if p_anchor || q_anchor {
                let other = if p_anchor { q } else { p };
                let rel = other - c.anchor;
                if rel.norm() < SAME_POINT {
                    continue;
                }
                if c.side(other).abs() <= SAME_POINT * rel.norm() && dot(rel, c.direction) > 0.0 {
                    return false;
                }
                continue;
            }
            if q_is_target && c.contains_interior(q, SAME_POINT) {
                if c.side(p) <= self.inflation {
                    return false;
                }
                continue;
            }
            if segment_distance(p, q, c.anchor, c.end) <= self.inflation {
                return false;
            }
        }
        true
    }
}

/// Smallest distance between distinct roots (and the base).
fn root_gap(f: &Func, base: C64) -> f64 {
    let mut pts: Vec<C64> = f.roots().iter().map(|r| r.root).collect();
    pts.push(base);
    let mut gap = f64::INFINITY;
    for i in 0..pts.len() {
        for j in 0..i {
            let d = (pts[i] - pts[j]).norm();
            if d >= SAME_POINT {
                gap = gap.min(d);
            }
        }
    }
    gap
}

/// Clearance between cuts and roots: the absolute floor, shrunk for roots that
/// sit closer together than it.
fn cut_clearance(f: &Func, base: C64) -> f64 {
    CUT_CLEARANCE.min(0.1 * root_gap(f, base))
}

fn path_inflation(f: &Func, base: C64) -> f64 {
    PATH_INFLATION.min(0.01 * root_gap(f, base))
}

fn cut_conflict(f: &Func, base: C64, cuts: &[Cut]) -> Option<usize> {
    let clearance = cut_clearance(f, base);
    for (i, c) in cuts.iter().enumerate() {
        for r in f.roots() {
            if (r.root - c.anchor).norm() < SAME_POINT {
                continue;
            }
            if c.distance(r.root) < clearance {
                return Some(i);
            }
        }
        if (base - c.anchor).norm() >= SAME_POINT && c.distance(base) < clearance {
            return Some(i);
        }
    }
    // Crossing checked after root contact: a cut through another anchor must
    // itself move, whichever cut the crossing rule would pick.
    for j in 0..cuts.len() {
        for i in 0..j {
            if segment_distance(cuts[i].anchor, cuts[i].end, cuts[j].anchor, cuts[j].end) < clearance {
                // Rotate the cut that is not anchored at the base when possible.
                return Some(if (cuts[j].anchor - base).norm() < SAME_POINT { i } else { j });
            }
        }
    }
    None
}

fn validate_base(base: C64) -> Result<()> {
    if !(base.re.is_finite() && base.im.is_finite()) || base.norm() > 1.0 + 1e-12 {
        return Err(HopfError::InvalidInput("base must lie in the closed unit disk".into()));
    }
    Ok(())
}

/// Builds the slit system for `f` seen from `base`.
///
/// Cuts point away from the base; the cut anchored at the base (if any) starts
/// in direction `+1`. Conflicting cuts are rotated by multiples of the golden
/// angle.
pub fn build_slit_disk(f: &Func, base: C64) -> Result<SlitDisk> {
    validate_base(base)?;
    let radius = 1.0 + 0.9 * f.margin();
    let odd: Vec<_> = f.odd_zeros();
    let defaults: Vec<C64> = odd
        .iter()
        .map(|z| {
            let d = z.location - base;
            if d.norm() < SAME_POINT {
                C64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        })
        .collect();
    let mut turns = vec![0u32; odd.len()];
    for _ in 0..=CUT_SEARCH_ATTEMPTS {
        let cuts: Vec<Cut> = odd
            .iter()
            .zip(&defaults)
            .zip(&turns)
            .map(|((z, d), &k)| {
                let rot = C64::from_polar(1.0, k as f64 * GOLDEN_ANGLE);
                Cut::new(z.location, d * rot, z.order, radius)
            })
            .collect();
        match cut_conflict(f, base, &cuts) {
            None => {
                return Ok(SlitDisk {
                    base,
                    base_order: f.order_at(base),
                    cuts,
                    radius,
                    inflation: path_inflation(f, base),
                })
            }
            Some(i) => turns[i] += 1,
        }
    }
    Err(HopfError::CutSearchFailed {
        attempts: CUT_SEARCH_ATTEMPTS,
    })
}

/// Slit system with caller-chosen cut directions, one per odd zero in the
/// order of [`RationalFactored::odd_zeros`](crate::RationalFactored::odd_zeros).
pub fn build_slit_disk_with_directions(f: &Func, base: C64, directions: &[C64]) -> Result<SlitDisk> {
    validate_base(base)?;
    let odd = f.odd_zeros();
    if directions.len() != odd.len() || directions.iter().any(|d| d.norm() == 0.0) {
        return Err(HopfError::InvalidInput("one non-zero direction per odd zero required".into()));
    }
    let radius = 1.0 + 0.9 * f.margin();
    let cuts: Vec<Cut> = odd
        .iter()
        .zip(directions)
        .map(|(z, d)| Cut::new(z.location, *d, z.order, radius))
        .collect();
    if cut_conflict(f, base, &cuts).is_some() {
        return Err(HopfError::InvalidInput("cuts intersect or touch another root".into()));
    }
    Ok(SlitDisk {
        base,
        base_order: f.order_at(base),
        cuts,
        radius,
        inflation: path_inflation(f, base),
    })
}

/// `x^{k/2}` on the principal branch.
#[inline]
fn principal_half_pow(x: C64, k: i32) -> C64 {
    let whole = if k >= 0 {
        powu(x, (k / 2) as u32)
    } else {
        C64::new(1.0, 0.0) / powu(x, ((-k + 1) / 2) as u32)
    };
    if k % 2 != 0 {
        whole * x.sqrt()
    } else {
        whole
    }
}

/// Local determination of `f^{1/2}` from which continuation starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Germ {
    /// Regular point with its square-root value.
    Regular { z: C64, v: C64 },
    /// Root of the given order. The value near `z` is
    /// `scale · (w − z)^{order/2} · (rest)`, with the argument of `w − z` in
    /// `(lower, lower + 2π]`.
    Root { z: C64, order: u32, scale: C64, lower: f64 },
}

impl Germ {
    pub fn regular(f: &Func, z: C64, sheet: f64) -> Result<Self> {
        let v = f.eval(z)?.sqrt() * sheet;
        Ok(Germ::Regular { z, v })
    }

    pub fn at_root(f: &Func, z: C64, sheet: f64, lower: f64) -> Result<Self> {
        let order = f.order_at(z);
        if order == 0 {
            return Err(HopfError::InvalidInput("germ point is not a root".into()));
        }
        let root = f
            .roots()
            .iter()
            .find(|r| (r.root - z).norm() < ORDER_MATCH_TOL)
            .map(|r| r.root)
            .unwrap_or(z);
        let scale = f.eval_deflated(root, root).sqrt() * sheet;
        Ok(Germ::Root {
            z: root,
            order,
            scale,
            lower,
        })
    }

    pub fn point(&self) -> C64 {
        match *self {
            Germ::Regular { z, .. } | Germ::Root { z, .. } => z,
        }
    }

    pub fn value(&self) -> C64 {
        match *self {
            Germ::Regular { v, .. } => v,
            Germ::Root { .. } => C64::new(0.0, 0.0),
        }
    }

    /// Value at `w`, continued along the straight segment from the germ point.
    pub fn value_at(&self, f: &Func, w: C64) -> C64 {
        match *self {
            Germ::Regular { z, v } => v * rest_ratio(f, w, z, None),
            Germ::Root {
                z,
                order,
                scale,
                lower,
            } => {
                let local = if order % 2 == 0 {
                    powu(w - z, order / 2)
                } else {
                    half_power(w - z, order as i32, lower)
                };
                scale * local * rest_ratio(f, w, z, Some(z))
            }
        }
    }
}

/// Continuous branch of `(f(w)/f(a))^{1/2}` along `[a, w]`, skipping the
/// root `skip`.
#[inline]
pub(crate) fn rest_ratio(f: &Func, w: C64, a: C64, skip: Option<C64>) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    for r in f.roots() {
        if let Some(s) = skip {
            if (r.root - s).norm() < ORDER_MATCH_TOL {
                continue;
            }
        }
        acc *= principal_half_pow((w - r.root) / (a - r.root), r.mult as i32);
    }
    for r in f.unit_num() {
        acc *= principal_half_pow((w - r.root) / (a - r.root), r.mult as i32);
    }
    for r in f.unit_den() {
        acc *= principal_half_pow((w - r.root) / (a - r.root), -(r.mult as i32));
    }
    for p in f.unit_poly() {
        acc *= principal_half_pow(p.poly.eval(w) / p.poly.eval(a), p.mult as i32);
    }
    acc
}

/// Whether odd-multiplicity polynomial factors keep their ratio off the
/// negative axis along `[a, b]`.
fn poly_branch_safe(f: &Func, a: C64, b: C64) -> bool {
    for p in f.unit_poly().iter().filter(|p| p.mult % 2 == 1) {
        let pa = p.poly.eval(a);
        for k in 1..=16 {
            let w = a + (b - a) * (k as f64 / 16.0);
            if (p.poly.eval(w) / pa).arg().abs() > 2.0 {
                return false;
            }
        }
    }
    true
}

/// Result of integrating along one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentIntegral {
    /// Increment of `F = 2∫ f^{1/2}`.
    pub delta: C64,
    /// Continued square-root value at the segment end.
    pub end: C64,
    pub error: f64,
}

/// Integrates `2 f^{1/2}` from the germ point to `b` along a straight line.
pub fn integrate_segment(f: &Func, germ: &Germ, b: C64, tol: f64) -> Result<SegmentIntegral> {
    let a = germ.point();
    let len = (b - a).norm();
    if len < SAME_POINT {
        return Ok(SegmentIntegral {
            delta: C64::new(0.0, 0.0),
            end: germ.value(),
            error: 0.0,
        });
    }
    for r in f.roots().iter().filter(|r| r.mult % 2 == 1) {
        let d_a = (r.root - a).norm();
        let d_b = (r.root - b).norm();
        if d_a > ORDER_MATCH_TOL && d_b > ORDER_MATCH_TOL && point_segment_distance(r.root, a, b) < 1e-14 {
            return Err(HopfError::StepCollapse);
        }
    }
    let start_singular = matches!(germ, Germ::Root { order, .. } if order % 2 == 1);
    let end_singular = f.order_at(b) % 2 == 1;
    if (start_singular && end_singular) || !poly_branch_safe(f, a, b) {
        if len < 1e-12 {
            return Err(HopfError::StepCollapse);
        }
        let mid = (a + b) * 0.5;
        let first = integrate_segment(f, germ, mid, tol / 2.0)?;
        let g = Germ::Regular { z: mid, v: first.end };
        let second = integrate_segment(f, &g, b, tol / 2.0)?;
        return Ok(SegmentIntegral {
            delta: first.delta + second.delta,
            end: second.end,
            error: first.error + second.error,
        });
    }
    let ab = b - a;
    let opts = QuadOptions {
        abs_tol: tol / 2.0,
        rel_tol: 0.0,
        max_intervals: 4000,
    };
    let res = if start_singular {
        integrate(|s: f64| germ.value_at(f, a + ab * (s * s)) * ab * (2.0 * s), 0.0, 1.0, opts)
    } else if end_singular {
        integrate(
            |s: f64| germ.value_at(f, a + ab * (1.0 - s * s)) * ab * (2.0 * s),
            0.0,
            1.0,
            opts,
        )
    } else {
        integrate(|t: f64| germ.value_at(f, a + ab * t) * ab, 0.0, 1.0, opts)
    };
    let error = 2.0 * res.error;
    if !res.converged || !(res.value.re.is_finite() && res.value.im.is_finite()) {
        return Err(HopfError::ToleranceNotMet {
            requested: tol,
            achieved: error,
        });
    }
    Ok(SegmentIntegral {
        delta: res.value * 2.0,
        end: germ.value_at(f, b),
        error,
    })
}

/// Polyline from the base to a target inside the slit disk.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPath {
    pub waypoints: Vec<C64>,
    /// `+1` or `−1`: which determination of `f^{1/2}` is used at the base.
    pub sheet_start: f64,
}

impl BranchPath {
    pub fn new(waypoints: Vec<C64>, sheet_start: f64) -> Self {
        Self { waypoints, sheet_start }
    }

    pub fn start(&self) -> C64 {
        self.waypoints[0]
    }

    pub fn end(&self) -> C64 {
        *self.waypoints.last().expect("path has at least one point")
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Minimum distance to cut interiors, ignoring cuts anchored at the path
    /// ends and the final point when it is a boundary point on a cut.
    pub fn clearance(&self, slit: &SlitDisk) -> f64 {
        let mut best = f64::INFINITY;
        for w in self.waypoints.windows(2) {
            for c in slit.cuts() {
                let touches_anchor = (w[0] - c.anchor).norm() < SAME_POINT || (w[1] - c.anchor).norm() < SAME_POINT;
                if touches_anchor {
                    continue;
                }
                best = best.min(segment_distance(w[0], w[1], c.anchor, c.end));
            }
        }
        best
    }
}

fn subdivide(points: &[C64]) -> Vec<C64> {
    let mut out = vec![points[0]];
    for w in points.windows(2) {
        let n = ((w[1] - w[0]).norm() / MAX_WAYPOINT_GAP).ceil().max(1.0) as usize;
        for k in 1..=n {
            out.push(w[0] + (w[1] - w[0]) * (k as f64 / n as f64));
        }
    }
    out
}

/// Shortest visibility-graph path from the base to `target`.
pub fn route_path(slit: &SlitDisk, target: C64) -> Result<BranchPath> {
    if !(target.re.is_finite() && target.im.is_finite()) || target.norm() >= slit.radius {
        return Err(HopfError::InvalidInput("target outside the domain of f".into()));
    }
    if slit.on_cut_interior(target) {
        // Boundary points of a cut are reached from the positive side;
        // points strictly inside the disk are not.
        if target.norm() < 1.0 - 1e-12 {
            return Err(HopfError::Unreachable {
                x: target.re,
                y: target.im,
            });
        }
    }
    let base = slit.base;
    if (target - base).norm() < SAME_POINT {
        return Ok(BranchPath::new(vec![base], 1.0));
    }
    if slit.visible(base, target, true) {
        return Ok(BranchPath::new(subdivide(&[base, target]), 1.0));
    }
    let mut nodes = vec![base, target];
    for c in &slit.cuts {
        let n = c.direction * C64::new(0.0, 1.0);
        for s in [1.0, -1.0] {
            let p = c.anchor + (-c.direction + n * s) * (4.0 * slit.inflation);
            let clear = slit
                .cuts
                .iter()
                .all(|o| point_segment_distance(p, o.anchor, o.end) > 2.0 * slit.inflation);
            if clear {
                nodes.push(p);
            }
        }
    }
    let mut graph = UnGraph::<C64, f64>::new_undirected();
    let idx: Vec<_> = nodes.iter().map(|p| graph.add_node(*p)).collect();
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let ok = if i == 1 {
                slit.visible(nodes[j], nodes[i], true)
            } else if j == 1 {
                slit.visible(nodes[i], nodes[j], true)
            } else {
                slit.visible(nodes[i], nodes[j], false)
            };
            if ok {
                graph.add_edge(idx[i], idx[j], (nodes[i] - nodes[j]).norm());
            }
        }
    }
    let found = astar(
        &graph,
        idx[0],
        |n| n == idx[1],
        |e| *e.weight(),
        |n| (graph[n] - target).norm(),
    );
    match found {
        Some((_, route)) => {
            let pts: Vec<C64> = route.iter().map(|n| graph[*n]).collect();
            Ok(BranchPath::new(subdivide(&pts), 1.0))
        }
        None => Err(HopfError::Unreachable {
            x: target.re,
            y: target.im,
        }),
    }
}

/// `F` at the end of a path, with error bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveValue {
    pub value: C64,
    /// Continued square-root value at the target (zero at a root).
    pub sqrt_end: C64,
    /// Sign relating `sqrt_end` to the principal root of `f(target)`.
    pub sheet_end: f64,
    pub est_error: f64,
}

/// Integrates along an explicit path starting at the slit base.
pub fn integrate_path(f: &Func, slit: &SlitDisk, path: &BranchPath, tol: f64) -> Result<PrimitiveValue> {
    // A waypoint on a root would carry a zero germ and lose the branch; the
    // segments on either side join through it instead (only even roots can
    // lie on a visible path).
    let last = path.waypoints.len().saturating_sub(1);
    let pts: Vec<C64> = path
        .waypoints
        .iter()
        .enumerate()
        .filter(|&(k, w)| k == 0 || k == last || f.roots().iter().all(|r| (r.root - w).norm() > 1e-9))
        .map(|(_, w)| *w)
        .collect();
    let mut germ = slit.germ_at(f, pts[0], path.sheet_start)?;
    let mut value = C64::new(0.0, 0.0);
    let mut error = 0.0;
    let nseg = pts.len().saturating_sub(1).max(1) as f64;
    for w in pts.windows(2) {
        let seg = integrate_segment(f, &germ, w[1], tol / nseg)?;
        value += seg.delta;
        error += seg.error;
        germ = Germ::Regular { z: w[1], v: seg.end };
    }
    let sqrt_end = germ.value();
    let end = path.end();
    let principal = f.eval(end)?.sqrt();
    let sheet_end = if (sqrt_end - principal).norm() <= (sqrt_end + principal).norm() {
        1.0
    } else {
        -1.0
    };
    Ok(PrimitiveValue {
        value,
        sqrt_end,
        sheet_end,
        est_error: error,
    })
}

/// `F(target)` in the slit domain on the `+` sheet at the base.
pub fn primitive(f: &Func, slit: &SlitDisk, target: C64, tol: f64) -> Result<PrimitiveValue> {
    if !(tol >= 1e-12) {
        return Err(HopfError::InvalidInput("tolerance must be at least 1e-12".into()));
    }
    let path = route_path(slit, target)?;
    let pv = integrate_path(f, slit, &path, tol)?;
    if pv.est_error > tol {
        return Err(HopfError::ToleranceNotMet {
            requested: tol,
            achieved: pv.est_error,
        });
    }
    Ok(pv)
}

/// Samples `f^{1/2}` continuously along a path, refining each step until the
/// argument of `f` moves by less than `π/2`.
pub fn continue_sqrt(f: &Func, path: &BranchPath) -> Result<Vec<(C64, C64)>> {
    let pts = &path.waypoints;
    let mut out: Vec<(C64, C64)> = Vec::with_capacity(pts.len());
    let mut current: Option<(C64, C64)> = None;
    let first = pts[0];
    if f.order_at(first) > 0 || f.eval(first)?.norm() == 0.0 {
        out.push((first, C64::new(0.0, 0.0)));
    } else {
        let v = f.eval(first)?.sqrt() * path.sheet_start;
        out.push((first, v));
        current = Some((first, v));
    }
    for (k, w) in pts.windows(2).enumerate() {
        let last_segment = k + 2 == pts.len();
        if current.is_none() {
            // Start on a root: the sheet is fixed at the next point.
            let v = f.eval(w[1])?.sqrt() * path.sheet_start;
            if v.norm() == 0.0 {
                return Err(HopfError::StepCollapse);
            }
            out.push((w[1], v));
            current = Some((w[1], v));
            continue;
        }
        let (mut a, mut va) = current.expect("set above");
        let mut stack = vec![w[1]];
        while let Some(b) = stack.pop() {
            let fa = f.eval(a)?;
            let fb = f.eval(b)?;
            let lands_on_root = fb.norm() == 0.0 || f.order_at(b) > 0;
            let small_turn = lands_on_root || (fb / fa).arg().abs() < PI / 2.0;
            if small_turn {
                let vb = if lands_on_root {
                    if !(last_segment && stack.is_empty()) {
                        return Err(HopfError::StepCollapse);
                    }
                    C64::new(0.0, 0.0)
                } else {
                    (Germ::Regular { z: a, v: va }).value_at(f, b)
                };
                out.push((b, vb));
                a = b;
                va = vb;
            } else {
                if (b - a).norm() < 1e-14 {
                    return Err(HopfError::StepCollapse);
                }
                stack.push(b);
                stack.push((a + b) * 0.5);
            }
        }
        current = Some((a, va));
    }
    Ok(out)
}

/// `Re F` at `samples` equispaced boundary angles, evaluated in the slit
/// domain.
pub fn boundary_trace(f: &Func, slit: &SlitDisk, samples: usize) -> Result<Vec<f64>> {
    if samples < 16 {
        return Err(HopfError::InvalidInput("at least 16 boundary samples required".into()));
    }
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let z = C64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64);
            primitive(f, slit, z, DEFAULT_TOL).map(|p| p.value.re)
        })
        .collect()
}

/// Sample of the analytic continuation of `F` around the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleSample {
    pub theta: f64,
    pub value: C64,
    pub sqrt: C64,
}

/// Continues `F` once around the unit circle along chords, starting from the
/// slit-domain value at angle `theta0`. Returns `samples + 1` points, the last
/// one back at `theta0` on the continued sheet.
pub fn circle_continuation(f: &Func, slit: &SlitDisk, samples: usize, theta0: f64, tol: f64) -> Result<Vec<CircleSample>> {
    let z0 = C64::from_polar(1.0, theta0);
    let start = primitive(f, slit, z0, tol)?;
    let mut out = Vec::with_capacity(samples + 1);
    out.push(CircleSample {
        theta: theta0,
        value: start.value,
        sqrt: start.sqrt_end,
    });
    let mut germ = Germ::Regular { z: z0, v: start.sqrt_end };
    let mut value = start.value;
    for k in 1..=samples {
        let theta = theta0 + 2.0 * PI * k as f64 / samples as f64;
        let z = C64::from_polar(1.0, theta);
        let seg = integrate_segment(f, &germ, z, tol / samples as f64)?;
        value += seg.delta;
        germ = Germ::Regular { z, v: seg.end };
        out.push(CircleSample {
            theta,
            value,
            sqrt: seg.end,
        });
    }
    Ok(out)
}

/// `F` at the unit-circle point of angle `theta`, continued from a nearby
/// circle sample along the chord.
pub fn continue_on_circle(f: &Func, from: &CircleSample, theta: f64, tol: f64) -> Result<CircleSample> {
    let z0 = C64::from_polar(1.0, from.theta);
    let germ = Germ::Regular { z: z0, v: from.sqrt };
    let z = C64::from_polar(1.0, theta);
    let seg = integrate_segment(f, &germ, z, tol)?;
    Ok(CircleSample {
        theta,
        value: from.value + seg.delta,
        sqrt: seg.end,
    })
}

/// Argument of `w − z` in the window used by the germ at a cut anchor.
pub fn windowed_angle(slit: &SlitDisk, anchor: C64, w: C64) -> f64 {
    arg_in_window(w - anchor, slit.window_at(anchor))
}
