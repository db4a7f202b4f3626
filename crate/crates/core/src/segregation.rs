//! Admissibility, reconstruction of `U = |Re F|` on a grid, species labels,
//! multiplicities and energy diagnostics.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::branch::{build_slit_disk, integrate_segment, primitive, Germ, SlitDisk};
use crate::error::{HopfError, Result};
use crate::quadrature::gauss_legendre;
use crate::{Func, C64};

/// Admissibility tolerance relative to the boundary scale of `F`.
pub const ADMISSIBILITY_REL_TOL: f64 = 1e-8;
/// Species threshold relative to the boundary scale of `F`.
pub const SPECIES_REL_THRESHOLD: f64 = 1e-6;
/// Lattice components smaller than this are unresolved slivers, typically
/// a node caught between a nodal line and the circle near a boundary zero.
pub const MIN_SPECIES_NODES: usize = 8;
/// Accuracy requested from the primitive for residuals and seeds.
const PRIMITIVE_TOL: f64 = 1e-12;
/// Accuracy requested per grid edge.
const EDGE_TOL: f64 = 1e-13;
const SCALE_SAMPLES: usize = 32;

/// `max |F|` over equispaced boundary samples.
pub fn boundary_scale(f: &Func, slit: &SlitDisk) -> Result<f64> {
    let vals: Vec<f64> = (0..SCALE_SAMPLES)
        .into_par_iter()
        .map(|k| {
            let z = C64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / SCALE_SAMPLES as f64);
            primitive(f, slit, z, 1e-10).map(|p| p.value.norm())
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Outcome of the admissibility test at one base point.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    /// Every interior zero lies on the nodal set.
    pub admissible: bool,
    /// Every odd-order zero lies on the nodal set, which is what
    /// reconstruction needs.
    pub odd_admissible: bool,
    /// `|Re F|` at every interior zero, odd zeros first.
    pub residuals: Vec<(C64, f64)>,
    /// Absolute tolerance used.
    pub tolerance: f64,
    /// Boundary scale `max |F|`.
    pub scale: f64,
}

impl AdmissibilityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

/// Signed `Re F` at every interior zero (odd zeros first), seen from `slit`.
pub fn signed_residuals(f: &Func, slit: &SlitDisk) -> Result<Vec<(C64, f64)>> {
    let mut zeros = f.odd_zeros();
    zeros.extend(f.zeros().into_iter().filter(|z| z.order % 2 == 0));
    zeros
        .iter()
        .map(|z| primitive(f, slit, z.location, PRIMITIVE_TOL).map(|p| (z.location, p.value.re)))
        .collect()
}

/// Tests `Re F = 0` at the zeros of `f`; `rel_tol` multiplies the boundary
/// scale of `F`.
pub fn admissibility(f: &Func, base: C64, rel_tol: f64) -> Result<AdmissibilityReport> {
    let slit = build_slit_disk(f, base)?;
    admissibility_in(f, &slit, rel_tol)
}

pub fn admissibility_in(f: &Func, slit: &SlitDisk, rel_tol: f64) -> Result<AdmissibilityReport> {
    let scale = boundary_scale(f, slit)?;
    let tolerance = rel_tol * scale;
    let odd = f.odd_zeros().len();
    let residuals: Vec<(C64, f64)> = signed_residuals(f, slit)?
        .into_iter()
        .map(|(z, r)| (z, r.abs()))
        .collect();
    Ok(AdmissibilityReport {
        admissible: residuals.iter().all(|r| r.1 <= tolerance),
        odd_admissible: residuals[..odd].iter().all(|r| r.1 <= tolerance),
        residuals,
        tolerance,
        scale,
    })
}

/// First odd zero that works as an admissible base, or the origin when there
/// are no odd zeros.
pub fn find_base_point(f: &Func) -> Option<C64> {
    let odd = f.odd_zeros();
    if odd.is_empty() {
        return Some(C64::new(0.0, 0.0));
    }
    odd.iter()
        .map(|z| z.location)
        .find(|&b| admissibility(f, b, ADMISSIBILITY_REL_TOL).is_ok_and(|r| r.admissible))
}

/// Critical point of the state: a root of `f` on the nodal set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Critical {
    pub location: C64,
    pub order: u32,
    /// `2 + order`.
    pub multiplicity: u32,
    pub residual: f64,
}

/// Cell-centred lattice on `[−1, 1]²` with one ghost layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    resolution: usize,
    h: f64,
    values: Vec<Option<C64>>,
    sqrt: Vec<C64>,
}

impl Grid {
    fn new(resolution: usize) -> Self {
        let ext = resolution + 2;
        Self {
            resolution,
            h: 2.0 / resolution as f64,
            values: vec![None; ext * ext],
            sqrt: vec![C64::new(0.0, 0.0); ext * ext],
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    #[inline]
    fn ext(&self) -> usize {
        self.resolution + 2
    }

    #[inline]
    fn idx(&self, i: isize, j: isize) -> Option<usize> {
        let g = self.resolution as isize;
        if i < -1 || j < -1 || i > g || j > g {
            None
        } else {
            Some((i + 1) as usize + (j + 1) as usize * self.ext())
        }
    }

    fn unidx(&self, k: usize) -> (isize, isize) {
        ((k % self.ext()) as isize - 1, (k / self.ext()) as isize - 1)
    }

    #[inline]
    pub fn point(&self, i: isize, j: isize) -> C64 {
        C64::new(-1.0 + (i as f64 + 0.5) * self.h, -1.0 + (j as f64 + 0.5) * self.h)
    }

    /// Whether node `(i, j)` lies in the closed disk (ghost nodes excluded).
    pub fn inside(&self, i: isize, j: isize) -> bool {
        let g = self.resolution as isize;
        i >= 0 && j >= 0 && i < g && j < g && self.point(i, j).norm() <= 1.0
    }

    /// Slit-domain value of `F` at the node, when evaluated.
    pub fn value(&self, i: isize, j: isize) -> Option<C64> {
        self.idx(i, j).and_then(|k| self.values[k])
    }

    pub fn re_f(&self, i: isize, j: isize) -> Option<f64> {
        self.value(i, j).map(|v| v.re)
    }

    pub fn u(&self, i: isize, j: isize) -> Option<f64> {
        self.re_f(i, j).map(f64::abs)
    }

    /// Nearest node to `z`.
    pub fn nearest(&self, z: C64) -> (isize, isize) {
        let g = self.resolution as isize;
        let i = ((z.re + 1.0) / self.h - 0.5).round() as isize;
        let j = ((z.im + 1.0) / self.h - 0.5).round() as isize;
        (i.clamp(-1, g), j.clamp(-1, g))
    }
}

const NEIGHBOURS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Sampled segregated state `U = |Re F_{z0,f}|`.
#[derive(Debug, Clone)]
pub struct SegregatedState {
    f: Func,
    base: C64,
    slit: SlitDisk,
    grid: Grid,
    scale: f64,
    tolerance: f64,
    criticals: Vec<Critical>,
    residuals: Vec<(C64, f64)>,
    root_residuals: Vec<(C64, f64)>,
    species: Vec<i32>,
    species_count: usize,
    dropped_islands: usize,
}

/// Reconstructs the state from an admissible `(f, base)` pair.
pub fn reconstruct(f: &Func, base: C64, resolution: usize) -> Result<SegregatedState> {
    if resolution < 8 {
        return Err(HopfError::InvalidInput("resolution must be at least 8".into()));
    }
    let slit = build_slit_disk(f, base)?;
    let report = admissibility_in(f, &slit, ADMISSIBILITY_REL_TOL)?;
    if !report.odd_admissible {
        let odd = f.odd_zeros().len();
        return Err(HopfError::NotAdmissible {
            max_residual: report.residuals[..odd].iter().map(|r| r.1).fold(0.0, f64::max),
        });
    }
    let grid = fill_grid(f, &slit, resolution)?;
    let root_residuals: Vec<(C64, f64)> = f
        .roots()
        .iter()
        .map(|r| {
            let res = report
                .residuals
                .iter()
                .find(|(z, _)| (*z - r.root).norm() < 1e-12)
                .map_or(f64::INFINITY, |x| x.1);
            (r.root, res)
        })
        .collect();
    let criticals: Vec<Critical> = f
        .roots()
        .iter()
        .zip(&root_residuals)
        .filter(|(_, (_, res))| *res <= report.tolerance)
        .map(|(r, (_, res))| Critical {
            location: r.root,
            order: r.mult,
            multiplicity: r.mult + 2,
            residual: *res,
        })
        .collect();
    let mut state = SegregatedState {
        f: f.clone(),
        base,
        slit,
        grid,
        scale: report.scale,
        tolerance: report.tolerance,
        criticals,
        residuals: report.residuals,
        root_residuals,
        species: Vec::new(),
        species_count: 0,
        dropped_islands: 0,
    };
    state.label_species();
    Ok(state)
}

fn fill_grid(f: &Func, slit: &SlitDisk, resolution: usize) -> Result<Grid> {
    let mut grid = Grid::new(resolution);
    let h = grid.h;
    let reach = (1.0 + 2.0 * h).min(1.0 + 0.8 * f.margin());
    let g = resolution as isize;
    let in_reach = |z: C64| z.norm() <= reach;
    let near_root = |z: C64| f.roots().iter().any(|r| (r.root - z).norm() < 1e-12);

    // Seed at the evaluated node closest to the base.
    let (bi, bj) = grid.nearest(slit.base());
    let mut seed = None;
    'search: for rad in 0..4isize {
        for dj in -rad..=rad {
            for di in -rad..=rad {
                let (i, j) = (bi + di, bj + dj);
                let z = grid.point(i, j);
                if grid.idx(i, j).is_some() && in_reach(z) && !slit.on_cut_interior(z) && !near_root(z) {
                    seed = Some((i, j));
                    break 'search;
                }
            }
        }
    }
    let (si, sj) = seed.ok_or_else(|| HopfError::InvalidInput("no grid node near the base".into()))?;
    let sz = grid.point(si, sj);
    let pv = primitive(f, slit, sz, PRIMITIVE_TOL)?;
    let k0 = grid.idx(si, sj).expect("seed index");
    grid.values[k0] = Some(pv.value);
    grid.sqrt[k0] = pv.sqrt_end;

    let mut queue = VecDeque::from([k0]);
    while let Some(k) = queue.pop_front() {
        let (i, j) = grid.unidx(k);
        let z = grid.point(i, j);
        if near_root(z) {
            continue;
        }
        let germ = Germ::Regular { z, v: grid.sqrt[k] };
        let base_val = grid.values[k].expect("queued nodes are set");
        for (di, dj) in NEIGHBOURS {
            let (ni, nj) = (i + di, j + dj);
            let Some(nk) = grid.idx(ni, nj) else { continue };
            if grid.values[nk].is_some() {
                continue;
            }
            let w = grid.point(ni, nj);
            if !in_reach(w) || slit.crossings(z, w) > 0 {
                continue;
            }
            if let Ok(seg) = integrate_segment(f, &germ, w, EDGE_TOL) {
                grid.values[nk] = Some(base_val + seg.delta);
                grid.sqrt[nk] = seg.end;
                queue.push_back(nk);
            }
        }
    }
    // Pockets the lattice walk could not reach.
    let missing: Vec<usize> = (-1..=g)
        .flat_map(|j| (-1..=g).map(move |i| (i, j)))
        .filter_map(|(i, j)| {
            let k = grid.idx(i, j)?;
            (grid.values[k].is_none() && in_reach(grid.point(i, j))).then_some(k)
        })
        .collect();
    let filled: Vec<(usize, Option<(C64, C64)>)> = missing
        .par_iter()
        .map(|&k| {
            let (i, j) = grid.unidx(k);
            let z = grid.point(i, j);
            (k, primitive(f, slit, z, 1e-10).ok().map(|p| (p.value, p.sqrt_end)))
        })
        .collect();
    for (k, v) in filled {
        if let Some((val, s)) = v {
            grid.values[k] = Some(val);
            grid.sqrt[k] = s;
        }
    }
    Ok(grid)
}

impl SegregatedState {
    pub fn f(&self) -> &Func {
        &self.f
    }
    pub fn base(&self) -> C64 {
        self.base
    }
    pub fn slit(&self) -> &SlitDisk {
        &self.slit
    }
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn resolution(&self) -> usize {
        self.grid.resolution
    }
    /// Boundary scale `max |F|`.
    pub fn scale(&self) -> f64 {
        self.scale
    }
    /// Absolute admissibility tolerance.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
    pub fn criticals(&self) -> &[Critical] {
        &self.criticals
    }
    /// `|Re F|` at every interior zero, odd zeros first.
    pub fn residuals(&self) -> &[(C64, f64)] {
        &self.residuals
    }
    /// `|Re F|` at every interior root, in storage order.
    pub fn root_residuals(&self) -> &[(C64, f64)] {
        &self.root_residuals
    }
    /// Number of species (positivity components touching the boundary).
    pub fn species_count(&self) -> usize {
        self.species_count
    }
    /// Components discarded because they did not reach the boundary or were
    /// smaller than [`MIN_SPECIES_NODES`].
    pub fn dropped_islands(&self) -> usize {
        self.dropped_islands
    }

    /// Species label of a node, `−1` on the nodal set and outside the disk.
    pub fn species(&self, i: isize, j: isize) -> i32 {
        self.grid.idx(i, j).map_or(-1, |k| self.species[k])
    }

    /// `U` at an arbitrary point of the evaluation domain.
    pub fn u_at(&self, z: C64) -> Result<f64> {
        primitive(&self.f, &self.slit, z, 1e-11).map(|p| p.value.re.abs())
    }

    /// Signed `Re F` at a node as seen from a neighbouring node.
    fn re_seen_from(&self, from: (isize, isize), to: (isize, isize)) -> Option<f64> {
        let v = self.grid.re_f(to.0, to.1)?;
        let p = self.grid.point(from.0, from.1);
        let q = self.grid.point(to.0, to.1);
        Some(self.slit.parity(p, q) * v)
    }

    fn near_critical(&self, z: C64, dist: f64) -> bool {
        self.criticals.iter().any(|c| (c.location - z).norm() < dist)
    }

    /// Whether `Re F` keeps one sign along the lattice edge.
    fn edge_keeps_sign(&self, a: (isize, isize), b: (isize, isize)) -> bool {
        let za = self.grid.point(a.0, a.1);
        let zb = self.grid.point(b.0, b.1);
        let (Some(ra), Some(rb)) = (self.grid.re_f(a.0, a.1), self.re_seen_from(a, b)) else {
            return false;
        };
        if ra.signum() != rb.signum() {
            return false;
        }
        if !self.near_critical((za + zb) * 0.5, 3.0 * self.grid.h) {
            return true;
        }
        let k = self.grid.idx(a.0, a.1).expect("node index");
        let germ = Germ::Regular { z: za, v: self.grid.sqrt[k] };
        let fa = self.grid.values[k].expect("evaluated node");
        (1..8).all(|s| {
            let w = za + (zb - za) * (s as f64 / 8.0);
            match integrate_segment(&self.f, &germ, w, EDGE_TOL) {
                Ok(seg) => {
                    let val = (fa + seg.delta).re;
                    val.signum() == ra.signum() && val.abs() > SPECIES_REL_THRESHOLD * self.scale
                }
                Err(_) => false,
            }
        })
    }

    fn label_species(&mut self) {
        let g = self.grid.resolution as isize;
        let thr = SPECIES_REL_THRESHOLD * self.scale;
        let n = self.grid.values.len();
        let mut label = vec![-1i32; n];
        let mut next = 0i32;
        let mut islands = 0usize;
        for j in 0..g {
            for i in 0..g {
                let k = self.grid.idx(i, j).expect("interior index");
                if label[k] >= 0 || !self.grid.inside(i, j) {
                    continue;
                }
                if self.grid.u(i, j).is_none_or(|u| u <= thr) {
                    continue;
                }
                let mut comp = vec![k];
                let mut touches = false;
                label[k] = next;
                let mut head = 0;
                while head < comp.len() {
                    let (ci, cj) = self.grid.unidx(comp[head]);
                    head += 1;
                    for (di, dj) in NEIGHBOURS {
                        let (ni, nj) = (ci + di, cj + dj);
                        if !self.grid.inside(ni, nj) {
                            touches = true;
                            continue;
                        }
                        let nk = self.grid.idx(ni, nj).expect("inside index");
                        if label[nk] >= 0 || self.grid.u(ni, nj).is_none_or(|u| u <= thr) {
                            continue;
                        }
                        if self.edge_keeps_sign((ci, cj), (ni, nj)) {
                            label[nk] = next;
                            comp.push(nk);
                        }
                    }
                }
                if touches && comp.len() >= MIN_SPECIES_NODES {
                    next += 1;
                } else {
                    islands += 1;
                    for c in comp {
                        label[c] = -2;
                    }
                }
            }
        }
        for l in label.iter_mut() {
            if *l == -2 {
                *l = -1;
            }
        }
        self.species = label;
        self.species_count = next as usize;
        self.dropped_islands = islands;
    }

    /// Finite-difference gradient of the signed field at a node, in the
    /// determination of that node.
    pub fn grad_re_f(&self, i: isize, j: isize) -> Option<(f64, f64)> {
        let c = self.grid.re_f(i, j)?;
        let h = self.grid.h;
        let diff = |di: isize, dj: isize| -> Option<f64> {
            let fwd = self.re_seen_from((i, j), (i + di, j + dj));
            let bwd = self.re_seen_from((i, j), (i - di, j - dj));
            match (fwd, bwd) {
                (Some(p), Some(m)) => Some((p - m) / (2.0 * h)),
                (Some(p), None) => Some((p - c) / h),
                (None, Some(m)) => Some((c - m) / h),
                (None, None) => None,
            }
        };
        Some((diff(1, 0)?, diff(0, 1)?))
    }

    /// Finite-difference gradient of `U` at a node. Differencing `U` itself
    /// keeps nodes lying on the nodal set, where `U` has a kink, stable
    /// under small perturbations.
    pub fn grad_u(&self, i: isize, j: isize) -> Option<(f64, f64)> {
        let c = self.grid.u(i, j)?;
        let h = self.grid.h;
        let diff = |di: isize, dj: isize| -> Option<f64> {
            match (self.grid.u(i + di, j + dj), self.grid.u(i - di, j - dj)) {
                (Some(p), Some(m)) => Some((p - m) / (2.0 * h)),
                (Some(p), None) => Some((p - c) / h),
                (None, Some(m)) => Some((c - m) / h),
                (None, None) => None,
            }
        };
        Some((diff(1, 0)?, diff(0, 1)?))
    }

    /// Area fraction of the node's cell inside the unit disk.
    pub fn cell_fraction(&self, i: isize, j: isize) -> f64 {
        cell_fraction(self.grid.point(i, j), self.grid.h)
    }

    /// CSV of the nodes inside the disk: `x,y,u,species`.
    pub fn to_csv(&self) -> String {
        let g = self.grid.resolution as isize;
        let mut out = String::from("x,y,u,species\n");
        for j in 0..g {
            for i in 0..g {
                if !self.grid.inside(i, j) {
                    continue;
                }
                let z = self.grid.point(i, j);
                let u = self.grid.u(i, j).unwrap_or(f64::NAN);
                let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{}", z.re, z.im, u, self.species(i, j));
            }
        }
        out
    }
}

fn cell_fraction(z: C64, h: f64) -> f64 {
    let half_diag = h * std::f64::consts::FRAC_1_SQRT_2;
    let r = z.norm();
    if r + half_diag <= 1.0 {
        return 1.0;
    }
    if r - half_diag >= 1.0 {
        return 0.0;
    }
    const SUB: usize = 16;
    let mut hits = 0;
    for a in 0..SUB {
        for b in 0..SUB {
            let p = z + C64::new(((a as f64 + 0.5) / SUB as f64 - 0.5) * h, ((b as f64 + 0.5) / SUB as f64 - 0.5) * h);
            if p.norm() <= 1.0 {
                hits += 1;
            }
        }
    }
    hits as f64 / (SUB * SUB) as f64
}

/// `2 + ord(f; z)` for a point on the nodal set.
pub fn multiplicity_at(state: &SegregatedState, z: C64) -> Result<u32> {
    let u = state.u_at(z)?;
    if u > state.tolerance.max(1e-12) {
        return Err(HopfError::NotOnNodalSet { value: u });
    }
    Ok(2 + state.f.order_at(z))
}

/// Minimum angular samples per lobe for [`local_exponent`].
const SAMPLES_PER_LOBE: usize = 8;
const DEFAULT_ANGULAR_SAMPLES: usize = 256;

/// Least-squares slope of `log max_θ U(z + r e^{iθ})` against `log r`.
pub fn local_exponent(state: &SegregatedState, z: C64, radii: &[f64]) -> Result<f64> {
    local_exponent_with(state, z, radii, DEFAULT_ANGULAR_SAMPLES)
}

pub fn local_exponent_with(state: &SegregatedState, z: C64, radii: &[f64], angular: usize) -> Result<f64> {
    let m = 2 + state.f.order_at(z) as usize;
    if angular < SAMPLES_PER_LOBE * m {
        return Err(HopfError::GridTooCoarse { samples: angular });
    }
    if radii.len() < 2 || radii.iter().any(|&r| !(r > 0.0) || z.norm() + r > state.slit.cut_radius()) {
        return Err(HopfError::InvalidInput("need at least two radii inside the domain".into()));
    }
    let f = &state.f;
    let at = primitive(f, &state.slit, z, PRIMITIVE_TOL)?;
    let germ = state.slit.germ_at(f, z, at.sheet_end)?;
    let germ = match germ {
        Germ::Regular { z, .. } => Germ::Regular { z, v: at.sqrt_end },
        g => g,
    };
    let mut xs = Vec::with_capacity(radii.len());
    let mut ys = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut best: f64 = 0.0;
        for k in 0..angular {
            let w = z + C64::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / angular as f64);
            let seg = integrate_segment(f, &germ, w, 1e-14_f64.max(1e-6 * r.powf(m as f64 / 2.0)))?;
            best = best.max((at.value + seg.delta).re.abs());
        }
        xs.push(r.ln());
        ys.push(best.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// `½ ∫ |∇U|²` from lattice differences of the signed field.
pub fn dirichlet_energy(state: &SegregatedState) -> f64 {
    let g = state.grid.resolution as isize;
    let h = state.grid.h;
    let mut total = 0.0;
    for j in 0..g {
        for i in 0..g {
            let w = state.cell_fraction(i, j);
            if w == 0.0 {
                continue;
            }
            if let Some((gx, gy)) = state.grad_re_f(i, j) {
                total += w * (gx * gx + gy * gy);
            }
        }
    }
    0.5 * total * h * h
}

/// `∫_D |g|` by Gauss–Legendre in the radius and the trapezoid rule in angle.
pub fn disk_l1<G: Fn(C64) -> f64 + Sync>(g: G) -> f64 {
    const NR: usize = 96;
    const NT: usize = 384;
    let rule = gauss_legendre::<f64>(NR);
    // Rings are summed in order so the result does not depend on scheduling.
    let rings: Vec<f64> = rule
        .par_iter()
        .map(|&(x, wx)| {
            let r = 0.5 * (x + 1.0);
            let ring: f64 = (0..NT)
                .map(|k| g(C64::from_polar(r, 2.0 * PI * k as f64 / NT as f64)))
                .sum::<f64>()
                * (2.0 * PI / NT as f64);
            0.5 * wx * r * ring
        })
        .collect();
    rings.iter().sum()
}

/// `∫_D |f|`.
pub fn hopf_l1(f: &Func) -> f64 {
    disk_l1(|z| f.eval_unchecked(z).norm())
}

/// `∫_D |f − g|`.
pub fn hopf_l1_distance(f: &Func, g: &Func) -> f64 {
    disk_l1(|z| (f.eval_unchecked(z) - g.eval_unchecked(z)).norm())
}

/// Energy predicted by the Hopf differential, `2 ∫_D |f|`.
pub fn energy_from_hopf(f: &Func) -> f64 {
    2.0 * hopf_l1(f)
}

/// Sup and `W^{1,2}` distances between two states on the same lattice.
pub fn state_distance(a: &SegregatedState, b: &SegregatedState) -> Result<(f64, f64)> {
    if a.resolution() != b.resolution() {
        return Err(HopfError::InvalidInput("states must share the lattice".into()));
    }
    let g = a.grid.resolution as isize;
    let h = a.grid.h;
    let mut sup: f64 = 0.0;
    let mut l2 = 0.0;
    let mut grad = 0.0;
    for j in 0..g {
        for i in 0..g {
            let w = a.cell_fraction(i, j);
            if w == 0.0 {
                continue;
            }
            let (Some(ua), Some(ub)) = (a.grid.u(i, j), b.grid.u(i, j)) else { continue };
            let d = ua - ub;
            if a.grid.inside(i, j) {
                sup = sup.max(d.abs());
            }
            l2 += w * d * d;
            if let (Some(ga), Some(gb)) = (a.grad_u(i, j), b.grad_u(i, j)) {
                grad += w * ((ga.0 - gb.0).powi(2) + (ga.1 - gb.1).powi(2));
            }
        }
    }
    Ok((sup, ((l2 + grad) * h * h).sqrt()))
}
