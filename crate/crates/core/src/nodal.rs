//! Nodal graph of a segregated state and the counting identities
//! `M = N + T − 1`, `Σ i = N − T − 1`.

use std::f64::consts::PI;

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;

use crate::branch::{circle_continuation, continue_on_circle, integrate_segment, primitive, CircleSample, Germ};
use crate::error::{HopfError, Result};
use crate::segregation::SegregatedState;
use crate::C64;

/// Newton tolerance on `Re F`, relative to the boundary scale.
pub const NEWTON_REL_TOL: f64 = 1e-10;
const MIN_STEP: f64 = 1e-6;
const MAX_NEWTON: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    InteriorCritical,
    BoundaryZero,
}

impl VertexKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VertexKind::InteriorCritical => "interior-critical",
            VertexKind::BoundaryZero => "boundary-zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub location: C64,
    pub kind: VertexKind,
    pub multiplicity: u32,
    /// `m − 2`.
    pub index: i32,
}

/// Nodal arc between two vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub points: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalGraph {
    pub vertices: Vec<Vertex>,
    pub arcs: Vec<Arc>,
    /// Positivity components of `U` on the boundary.
    pub m: usize,
    /// Species.
    pub n: usize,
    /// Components of the nodal closure.
    pub t: usize,
    /// Tracing anomalies (empty on a clean trace).
    pub issues: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexReport {
    pub m: usize,
    pub n: usize,
    pub t: usize,
    pub index_sum: i64,
    pub euler_check: bool,
    pub formula_check: bool,
    /// Every vertex has the arc count its multiplicity predicts.
    pub degree_check: bool,
}

/// Boundary zeros of `U`, located by sign changes of the continued boundary
/// trace and refined by bisection in angle.
pub fn boundary_zeros(state: &SegregatedState, samples: usize) -> Result<Vec<CircleSample>> {
    let f = state.f();
    let slit = state.slit();
    let step = 2.0 * PI / samples as f64;
    let mut theta0 = 0.0;
    while slit.cuts().iter().any(|c| c.distance(C64::from_polar(1.0, theta0)) < 1e-9) {
        theta0 += 0.37 * step;
    }
    let ring = circle_continuation(f, slit, samples, theta0, 1e-11)?;
    let tol = 1e-14 * state.scale().max(1e-300);
    let brackets: Vec<(CircleSample, CircleSample)> = ring
        .windows(2)
        .filter(|w| (w[0].value.re >= 0.0) != (w[1].value.re >= 0.0))
        .map(|w| (w[0], w[1]))
        .collect();
    brackets
        .par_iter()
        .map(|(lo, hi)| {
            let mut lo = *lo;
            let mut hi_theta = hi.theta;
            let lo_sign = lo.value.re >= 0.0;
            for _ in 0..60 {
                let mid = 0.5 * (lo.theta + hi_theta);
                let s = continue_on_circle(f, &lo, mid, 1e-13)?;
                if s.value.re.abs() <= tol {
                    return Ok(s);
                }
                if (s.value.re >= 0.0) == lo_sign {
                    lo = s;
                } else {
                    hi_theta = mid;
                }
                if hi_theta - lo.theta < 1e-14 {
                    break;
                }
            }
            Ok(lo)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum End {
    Seed(usize, usize),
    Boundary(usize),
}

#[derive(Debug, Clone)]
struct SeedSet {
    critical: usize,
    center: C64,
    radius: f64,
    value: C64,
    germ: Germ,
    angles: Vec<f64>,
}

impl SeedSet {
    fn point(&self, k: usize) -> C64 {
        self.center + C64::from_polar(self.radius, self.angles[k])
    }

    fn nearest(&self, z: C64) -> usize {
        (0..self.angles.len())
            .min_by(|&a, &b| {
                (self.point(a) - z)
                    .norm()
                    .partial_cmp(&(self.point(b) - z).norm())
                    .expect("finite distances")
            })
            .expect("seed set not empty")
    }
}

struct Tracer<'a> {
    state: &'a SegregatedState,
    seeds: Vec<SeedSet>,
    boundary: Vec<CircleSample>,
    max_step: f64,
    newton_tol: f64,
    /// Per-segment quadrature accuracy, well below `newton_tol`.
    seg_tol: f64,
    /// Every root of `f`, critical or not.
    roots: Vec<C64>,
}

struct Traced {
    start: End,
    end: End,
    points: Vec<C64>,
}

impl<'a> Tracer<'a> {
    fn step_limit(&self, p: C64) -> f64 {
        let d = self.roots.iter().map(|r| (r - p).norm()).fold(f64::INFINITY, f64::min);
        self.max_step.min(0.25 * d)
    }

    fn tangent(v: C64) -> C64 {
        // F′ = 2v; the level set of Re F runs along i·conj(F′).
        let t = C64::new(0.0, 1.0) * v.conj();
        t / t.norm()
    }

    /// Newton projection onto `Re F = 0` starting from `(q, F, v)`.
    fn correct(&self, mut q: C64, mut fq: C64, mut vq: C64, limit: f64) -> Option<(C64, C64, C64)> {
        let f = self.state.f();
        let start = q;
        for _ in 0..MAX_NEWTON {
            if fq.re.abs() <= self.newton_tol {
                return Some((q, fq, vq));
            }
            let d = vq * 2.0;
            if d.norm() == 0.0 {
                return None;
            }
            let delta = -d.conj() * (fq.re / d.norm_sqr());
            let next = q + delta;
            if (next - start).norm() > limit {
                return None;
            }
            let seg = integrate_segment(f, &Germ::Regular { z: q, v: vq }, next, self.seg_tol).ok()?;
            q = next;
            fq += seg.delta;
            vq = seg.end;
        }
        (fq.re.abs() <= self.newton_tol).then_some((q, fq, vq))
    }

    fn boundary_match(&self, z: C64) -> Option<usize> {
        let tol = (4.0 * self.max_step).max(1e-3);
        (0..self.boundary.len())
            .map(|k| (k, (C64::from_polar(1.0, self.boundary[k].theta) - z).norm()))
            .filter(|(_, d)| *d < tol)
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
            .map(|(k, _)| k)
    }

    /// Follows the nodal arc from `(p, F, v)` heading along `dir` until a
    /// vertex is reached.
    fn follow(&self, start: End, mut p: C64, mut fp: C64, mut vp: C64, dir: C64, origin: Option<usize>) -> Result<Traced> {
        let f = self.state.f();
        let mut points = Vec::new();
        match start {
            End::Seed(s, _) => points.push(self.seeds[s].center),
            End::Boundary(_) => {}
        }
        points.push(p);
        let mut heading = dir;
        let mut left_origin = origin.is_none();
        let mut travelled = 0.0;
        let max_steps = 200 * self.state.resolution() + 10_000;
        for _ in 0..max_steps {
            let mut sigma = self.step_limit(p);
            let accepted = loop {
                if sigma < MIN_STEP {
                    return Err(HopfError::TraceStall { x: p.re, y: p.im });
                }
                let mut t = Self::tangent(vp);
                if t.re * heading.re + t.im * heading.im < 0.0 {
                    t = -t;
                }
                let q = p + t * sigma;
                let Ok(seg) = integrate_segment(f, &Germ::Regular { z: p, v: vp }, q, self.seg_tol) else {
                    sigma *= 0.5;
                    continue;
                };
                match self.correct(q, fp + seg.delta, seg.end, 0.5 * sigma) {
                    Some(next) => break (next, t),
                    None => sigma *= 0.5,
                }
            };
            let ((q, fq, vq), t) = accepted;
            travelled += (q - p).norm();
            heading = t;
            // Boundary exit.
            if q.norm() >= 1.0 && travelled > 2.0 * self.max_step {
                let d = q - p;
                let b = p.re * d.re + p.im * d.im;
                let s = (-b + (b * b - d.norm_sqr() * (p.norm_sqr() - 1.0)).sqrt()) / d.norm_sqr();
                let hit = p + d * s;
                return match self.boundary_match(hit) {
                    Some(k) => {
                        points.push(C64::from_polar(1.0, self.boundary[k].theta));
                        Ok(Traced {
                            start,
                            end: End::Boundary(k),
                            points,
                        })
                    }
                    None => Err(HopfError::TraceStall { x: hit.re, y: hit.im }),
                };
            }
            // Arrival at a critical point.
            for (si, s) in self.seeds.iter().enumerate() {
                if Some(si) == origin && !left_origin {
                    if (q - s.center).norm() > 1.5 * s.radius {
                        left_origin = true;
                    }
                    continue;
                }
                if (q - s.center).norm() <= s.radius {
                    let k = s.nearest(q);
                    points.push(s.center);
                    return Ok(Traced {
                        start,
                        end: End::Seed(si, k),
                        points,
                    });
                }
            }
            points.push(q);
            p = q;
            fp = fq;
            vp = vq;
        }
        Err(HopfError::TraceStall { x: p.re, y: p.im })
    }
}

fn build_seeds(state: &SegregatedState, base_radius: f64) -> Result<(Vec<SeedSet>, Vec<String>)> {
    let f = state.f();
    let slit = state.slit();
    let mut issues = Vec::new();
    let mut out = Vec::new();
    for (ci, c) in state.criticals().iter().enumerate() {
        let z = c.location;
        let others = f
            .roots()
            .iter()
            .filter(|r| (r.root - z).norm() > 1e-12)
            .map(|r| (r.root - z).norm())
            .fold(f64::INFINITY, f64::min);
        let mut radius = base_radius.min(0.3 * others).min(0.3 * (slit.cut_radius() - z.norm()));
        let value = primitive(f, slit, z, 1e-12)?.value;
        let germ = slit.germ_at(f, z, 1.0)?;
        let lower = match germ {
            Germ::Root { lower, .. } => lower,
            _ => 0.0,
        };
        let n = c.order;
        let expected = (n + 2) as usize;
        let samples = (16 * expected).max(64);
        let flip = if n % 2 == 1 { -1.0 } else { 1.0 };
        let mut angles = Vec::new();
        for _attempt in 0..8 {
            let g = |a: f64| -> Result<f64> {
                let w = z + C64::from_polar(radius, a);
                Ok((value + integrate_segment(f, &germ, w, (1e-14 * state.scale()).max(1e-9 * radius.powf(expected as f64 / 2.0)))?.delta).re)
            };
            let alphas: Vec<f64> = (0..samples)
                .map(|k| lower + 2.0 * PI * (k as f64 + 0.5) / samples as f64)
                .collect();
            let vals: Vec<f64> = alphas.iter().map(|&a| g(a)).collect::<Result<_>>()?;
            let mut found = Vec::new();
            for k in 0..samples {
                let (a0, v0) = (alphas[k], vals[k]);
                let (a1, v1) = if k + 1 < samples {
                    (alphas[k + 1], vals[k + 1])
                } else {
                    (alphas[0] + 2.0 * PI, flip * vals[0])
                };
                if (v0 >= 0.0) == (v1 >= 0.0) {
                    continue;
                }
                // Bisection; across the window seam the sign flips for odd order.
                let (mut lo, mut hi) = (a0, a1);
                let lo_sign = v0 >= 0.0;
                for _ in 0..50 {
                    let mid = 0.5 * (lo + hi);
                    let vm = if mid > lower + 2.0 * PI { flip * g(mid - 2.0 * PI)? } else { g(mid)? };
                    if (vm >= 0.0) == lo_sign {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let mut a = 0.5 * (lo + hi);
                if a > lower + 2.0 * PI {
                    a -= 2.0 * PI;
                }
                found.push(a);
            }
            if found.len() == expected {
                angles = found;
                break;
            }
            angles = found;
            radius *= 0.5;
        }
        if angles.len() != expected {
            issues.push(format!(
                "critical {ci} at ({:.6}, {:.6}): {} seed directions, expected {expected}",
                z.re,
                z.im,
                angles.len()
            ));
        }
        out.push(SeedSet {
            critical: ci,
            center: z,
            radius,
            value,
            germ,
            angles,
        });
    }
    Ok((out, issues))
}

/// Traces the nodal set of `state` into a planar graph.
pub fn trace(state: &SegregatedState) -> Result<NodalGraph> {
    let res = state.resolution();
    let f = state.f();
    let samples = (4 * res).max(1024);
    let boundary = boundary_zeros(state, samples)?;
    let (seeds, mut issues) = build_seeds(state, 4.0 / res as f64)?;
    let tracer = Tracer {
        state,
        seeds,
        boundary,
        max_step: 1.0 / res as f64,
        newton_tol: NEWTON_REL_TOL * state.scale(),
        seg_tol: 1e-3 * NEWTON_REL_TOL * state.scale(),
        roots: f.roots().iter().map(|r| r.root).collect(),
    };

    // Arcs leaving every critical point.
    let starts: Vec<(usize, usize)> = tracer
        .seeds
        .iter()
        .enumerate()
        .flat_map(|(si, s)| (0..s.angles.len()).map(move |k| (si, k)))
        .collect();
    let from_seeds: Vec<Result<Traced>> = starts
        .par_iter()
        .map(|&(si, k)| {
            let s = &tracer.seeds[si];
            let p = s.point(k);
            let seg = integrate_segment(f, &s.germ, p, tracer.seg_tol)?;
            let fp = s.value + seg.delta;
            let (p, fp, vp) = tracer
                .correct(p, fp, seg.end, 0.5 * s.radius)
                .ok_or(HopfError::TraceStall { x: p.re, y: p.im })?;
            let dir = (p - s.center) / (p - s.center).norm();
            tracer.follow(End::Seed(si, k), p, fp, vp, dir, Some(si))
        })
        .collect();

    let mut traced: Vec<Traced> = Vec::new();
    for r in from_seeds {
        match r {
            Ok(t) => traced.push(t),
            Err(e) => issues.push(format!("arc from critical point failed: {e}")),
        }
    }

    // Boundary zeros not reached from any critical point start arcs of their own.
    let reached: Vec<usize> = traced
        .iter()
        .filter_map(|t| match t.end {
            End::Boundary(k) => Some(k),
            _ => None,
        })
        .collect();
    let pending: Vec<usize> = (0..tracer.boundary.len()).filter(|k| !reached.contains(k)).collect();
    let from_boundary: Vec<Result<Traced>> = pending
        .par_iter()
        .map(|&k| {
            let b = tracer.boundary[k];
            let p = C64::from_polar(1.0, b.theta);
            tracer.follow(End::Boundary(k), p, b.value, b.sqrt, -p, None)
        })
        .collect();
    for r in from_boundary {
        match r {
            Ok(t) => traced.push(t),
            Err(e) => issues.push(format!("arc from boundary zero failed: {e}")),
        }
    }

    // Each arc is found once from each end; keep one copy.
    let mut kept: Vec<Traced> = Vec::new();
    for t in traced {
        let dup = kept.iter().any(|k| k.start == t.end && k.end == t.start);
        if !dup {
            kept.push(t);
        }
    }

    let nc = tracer.seeds.len();
    let mut vertices: Vec<Vertex> = state
        .criticals()
        .iter()
        .enumerate()
        .map(|(i, c)| Vertex {
            id: i,
            location: c.location,
            kind: VertexKind::InteriorCritical,
            multiplicity: c.multiplicity,
            index: c.multiplicity as i32 - 2,
        })
        .collect();
    let vid = |e: End| -> usize {
        match e {
            End::Seed(s, _) => tracer.seeds[s].critical,
            End::Boundary(k) => nc + k,
        }
    };
    let arcs: Vec<Arc> = kept
        .into_iter()
        .map(|t| Arc {
            from: vid(t.start),
            to: vid(t.end),
            points: t.points,
        })
        .collect();
    for (k, b) in tracer.boundary.iter().enumerate() {
        let deg = arcs.iter().filter(|a| a.from == nc + k).count() + arcs.iter().filter(|a| a.to == nc + k).count();
        let multiplicity = deg as u32 + 1;
        vertices.push(Vertex {
            id: nc + k,
            location: C64::from_polar(1.0, b.theta),
            kind: VertexKind::BoundaryZero,
            multiplicity,
            index: multiplicity as i32 - 2,
        });
    }
    let mut uf = UnionFind::<usize>::new(vertices.len());
    for a in &arcs {
        uf.union(a.from, a.to);
    }
    let mut roots: Vec<usize> = (0..vertices.len()).map(|v| uf.find(v)).collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(NodalGraph {
        vertices,
        arcs,
        m: tracer.boundary.len(),
        n: state.species_count(),
        t: roots.len(),
        issues,
    })
}

/// `(M, N, T)`.
pub fn counts(graph: &NodalGraph) -> (usize, usize, usize) {
    (graph.m, graph.n, graph.t)
}

impl NodalGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.arcs.iter().map(|a| (a.from == v) as usize + (a.to == v) as usize).sum()
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(|v| v.kind == VertexKind::InteriorCritical)
    }

    pub fn boundary_vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(|v| v.kind == VertexKind::BoundaryZero)
    }
}

/// Checks both counting identities and Euler's relation `E − V = F − 2`
/// with `F = N + 1` faces (boundary arcs included in `E`).
pub fn verify_index(graph: &NodalGraph) -> IndexReport {
    let (m, n, t) = counts(graph);
    let index_sum: i64 = graph.vertices.iter().map(|v| v.index as i64).sum();
    let edges = graph.arcs.len() as i64 + m as i64;
    let verts = graph.vertices.len() as i64;
    let euler_check = edges - verts == n as i64 - 1;
    let formula_check = m as i64 == n as i64 + t as i64 - 1 && index_sum == n as i64 - t as i64 - 1;
    let degree_check = graph.vertices.iter().all(|v| match v.kind {
        VertexKind::InteriorCritical => graph.degree(v.id) == v.multiplicity as usize,
        VertexKind::BoundaryZero => graph.degree(v.id) + 1 == v.multiplicity as usize && graph.degree(v.id) >= 1,
    });
    IndexReport {
        m,
        n,
        t,
        index_sum,
        euler_check,
        formula_check,
        degree_check,
    }
}
