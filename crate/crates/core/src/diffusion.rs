//! Competition–diffusion system `Δu_j = μ u_j Σ_{k≠j} u_k` on the unit disk,
//! used to cross-check the analytic segregated states at large `μ`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::branch::{boundary_trace, point_segment_distance};
use crate::error::{HopfError, Result};
use crate::nodal::{boundary_zeros, NodalGraph};
use crate::C64;
use crate::segregation::SegregatedState;

pub const MAX_SPECIES: usize = 12;
pub const MAX_MU: f64 = 1e6;
pub const MAX_RESOLUTION: usize = 512;
pub const DEFAULT_SWEEP_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_SWEEPS: usize = 100_000;
/// Coarsest level of the nested-iteration warm start.
const COARSEST: usize = 32;
/// Smallest fraction of a cell between a node and the circle.
const MIN_FRACTION: f64 = 1e-6;

/// Boundary data and parameters of one diffusion run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionConfig {
    /// `g[j][k]` is the datum of species `j` at angle `2πk/samples`.
    pub g: Vec<Vec<f64>>,
    pub mu: f64,
    pub resolution: usize,
}

impl DiffusionConfig {
    pub fn new(g: Vec<Vec<f64>>, mu: f64, resolution: usize) -> Result<Self> {
        let cfg = Self { g, mu, resolution };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn species(&self) -> usize {
        self.g.len()
    }

    pub fn samples(&self) -> usize {
        self.g.first().map_or(0, Vec::len)
    }

    /// Sample angles `2πk/samples`.
    pub fn angles(&self) -> Vec<f64> {
        let s = self.samples();
        (0..s).map(|k| 2.0 * PI * k as f64 / s as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.species();
        if n == 0 || n > MAX_SPECIES {
            return Err(HopfError::InvalidInput(format!("species count {n} outside 1..={MAX_SPECIES}")));
        }
        let s = self.samples();
        if s < 16 || self.g.iter().any(|g| g.len() != s) {
            return Err(HopfError::InvalidInput("boundary data need a common sample count ≥ 16".into()));
        }
        if !(self.mu >= 0.0 && self.mu <= MAX_MU) {
            return Err(HopfError::InvalidInput(format!("mu = {} outside [0, {MAX_MU:e}]", self.mu)));
        }
        if self.resolution < 8 || self.resolution > MAX_RESOLUTION {
            return Err(HopfError::InvalidInput(format!("resolution {} outside 8..={MAX_RESOLUTION}", self.resolution)));
        }
        for k in 0..s {
            let mut positive = 0;
            for g in &self.g {
                if !(g[k] >= 0.0) || !g[k].is_finite() {
                    return Err(HopfError::InvalidInput(format!("negative or non-finite datum at sample {k}")));
                }
                if g[k] > 0.0 {
                    positive += 1;
                }
            }
            if positive > 1 {
                return Err(HopfError::InvalidInput(format!("supports overlap at sample {k}")));
            }
        }
        Ok(())
    }

    /// Datum of species `j` at the sample nearest to `theta`.
    pub fn datum(&self, j: usize, theta: f64) -> f64 {
        let s = self.samples();
        let k = (theta.rem_euclid(2.0 * PI) / (2.0 * PI) * s as f64).round() as usize % s;
        self.g[j][k]
    }

    /// Same data on another grid or `μ`.
    pub fn with(&self, mu: f64, resolution: usize) -> Result<Self> {
        Self::new(self.g.clone(), mu, resolution)
    }
}

/// Boundary data `g_j = U` on the boundary arcs of species `j`.
pub fn boundary_from_state(state: &SegregatedState, samples: usize) -> Result<DiffusionConfig> {
    boundary_from_state_with(state, samples, 1e4, state.resolution().min(MAX_RESOLUTION))
}

pub fn boundary_from_state_with(state: &SegregatedState, samples: usize, mu: f64, resolution: usize) -> Result<DiffusionConfig> {
    let u: Vec<f64> = boundary_trace(state.f(), state.slit(), samples)?.into_iter().map(f64::abs).collect();
    let mut zeros: Vec<f64> = boundary_zeros(state, samples.max(1024))?
        .iter()
        .map(|s| s.theta.rem_euclid(2.0 * PI))
        .collect();
    zeros.sort_by(f64::total_cmp);
    let n = state.species_count().max(1);
    let mut g = vec![vec![0.0; samples]; n];
    let arc_of = |theta: f64| -> usize {
        // Arc `a` runs from zeros[a] to zeros[a+1]; the last one wraps.
        match zeros.iter().rposition(|&z| z <= theta) {
            Some(a) => a,
            None => zeros.len().saturating_sub(1),
        }
    };
    let labels: Vec<usize> = if zeros.is_empty() {
        vec![0]
    } else {
        (0..zeros.len())
            .map(|a| {
                let lo = zeros[a];
                let hi = if a + 1 < zeros.len() { zeros[a + 1] } else { zeros[0] + 2.0 * PI };
                arc_label(state, 0.5 * (lo + hi)).min(n - 1)
            })
            .collect()
    };
    for k in 0..samples {
        let theta = 2.0 * PI * k as f64 / samples as f64;
        let label = if zeros.is_empty() { labels[0] } else { labels[arc_of(theta)] };
        g[label][k] = u[k];
    }
    DiffusionConfig::new(g, mu, resolution)
}

/// Species of the nodes just inside the boundary at angle `theta`.
fn arc_label(state: &SegregatedState, theta: f64) -> usize {
    let grid = state.grid();
    let h = grid.spacing();
    for depth in [3.0, 2.0, 4.0, 6.0, 1.5, 8.0] {
        let (i, j) = grid.nearest(C64::from_polar(1.0 - depth * h, theta));
        for (di, dj) in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)] {
            let s = state.species(i + di, j + dj);
            if s >= 0 {
                return s as usize;
            }
        }
    }
    0
}

#[derive(Debug, Clone, Copy)]
enum Link {
    Node(usize),
    /// Boundary crossing at this angle.
    Wall(f64),
}

#[derive(Debug, Clone)]
struct Stencil {
    links: [(Link, f64); 4],
    /// Sum of the link weights.
    diag: f64,
}

/// Disk mask with Shortley–Weller weights, all scaled by `h²`.
#[derive(Debug, Clone)]
struct Mesh {
    resolution: usize,
    h: f64,
    /// Node index per lattice cell, `usize::MAX` outside.
    index: Vec<usize>,
    cells: Vec<(usize, usize)>,
    stencils: Vec<Stencil>,
    colour: [Vec<usize>; 2],
}

impl Mesh {
    fn new(resolution: usize) -> Self {
        let h = 2.0 / resolution as f64;
        let point = |i: usize, j: usize| C64::new(-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h);
        let mut index = vec![usize::MAX; resolution * resolution];
        let mut cells = Vec::new();
        for j in 0..resolution {
            for i in 0..resolution {
                if point(i, j).norm() < 1.0 {
                    index[i + j * resolution] = cells.len();
                    cells.push((i, j));
                }
            }
        }
        let dirs = [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)];
        let mut stencils = Vec::with_capacity(cells.len());
        for &(i, j) in &cells {
            let p = point(i, j);
            let mut arm = [(Link::Node(0), 1.0); 4];
            for (d, &(di, dj)) in dirs.iter().enumerate() {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                let inside = ni >= 0
                    && nj >= 0
                    && (ni as usize) < resolution
                    && (nj as usize) < resolution
                    && index[ni as usize + nj as usize * resolution] != usize::MAX;
                arm[d] = if inside {
                    (Link::Node(index[ni as usize + nj as usize * resolution]), 1.0)
                } else {
                    let e = C64::new(di as f64, dj as f64);
                    let pe = p.re * e.re + p.im * e.im;
                    let t = -pe + (pe * pe - p.norm_sqr() + 1.0).max(0.0).sqrt();
                    let frac = (t / h).clamp(MIN_FRACTION, 1.0);
                    let hit = p + e * t;
                    (Link::Wall(hit.im.atan2(hit.re)), frac)
                };
            }
            // Shortley–Weller: arms of length a (this side) and b (other side).
            let mut links = [(Link::Node(0), 0.0); 4];
            for axis in 0..2 {
                let (l1, a) = arm[2 * axis];
                let (l2, b) = arm[2 * axis + 1];
                links[2 * axis] = (l1, 2.0 / (a * (a + b)));
                links[2 * axis + 1] = (l2, 2.0 / (b * (a + b)));
            }
            let diag = links.iter().map(|l| l.1).sum();
            stencils.push(Stencil { links, diag });
        }
        let mut colour = [Vec::new(), Vec::new()];
        for (k, &(i, j)) in cells.iter().enumerate() {
            colour[(i + j) % 2].push(k);
        }
        Self {
            resolution,
            h,
            index,
            cells,
            stencils,
            colour,
        }
    }

    fn point(&self, k: usize) -> C64 {
        let (i, j) = self.cells[k];
        C64::new(-1.0 + (i as f64 + 0.5) * self.h, -1.0 + (j as f64 + 0.5) * self.h)
    }

    /// Boundary contribution `Σ w g_j` per node.
    fn wall_terms(&self, cfg: &DiffusionConfig, j: usize) -> Vec<f64> {
        self.stencils
            .iter()
            .map(|s| {
                s.links
                    .iter()
                    .map(|&(l, w)| match l {
                        Link::Wall(theta) => w * cfg.datum(j, theta),
                        Link::Node(_) => 0.0,
                    })
                    .sum()
            })
            .collect()
    }

    /// `h²·Δu` at node `k`.
    fn laplacian(&self, u: &[f64], wall: &[f64], k: usize) -> f64 {
        let s = &self.stencils[k];
        let mut acc = wall[k] - s.diag * u[k];
        for &(l, w) in &s.links {
            if let Link::Node(n) = l {
                acc += w * u[n];
            }
        }
        acc
    }

    /// Bilinear prolongation from a coarser mesh, restricted to inside nodes.
    fn prolong(&self, coarse: &Mesh, v: &[f64]) -> Vec<f64> {
        let r = coarse.resolution as isize;
        (0..self.cells.len())
            .map(|k| {
                let p = self.point(k);
                let x = (p.re + 1.0) / coarse.h - 0.5;
                let y = (p.im + 1.0) / coarse.h - 0.5;
                let (i0, j0) = (x.floor() as isize, y.floor() as isize);
                let (fx, fy) = (x - i0 as f64, y - j0 as f64);
                let mut acc = 0.0;
                let mut weight = 0.0;
                for (di, dj, w) in [(0, 0, (1.0 - fx) * (1.0 - fy)), (1, 0, fx * (1.0 - fy)), (0, 1, (1.0 - fx) * fy), (1, 1, fx * fy)] {
                    let (i, j) = (i0 + di, j0 + dj);
                    if i < 0 || j < 0 || i >= r || j >= r {
                        continue;
                    }
                    let c = coarse.index[(i + j * r) as usize];
                    if c != usize::MAX && w > 0.0 {
                        acc += w * v[c];
                        weight += w;
                    }
                }
                if weight > 0.0 {
                    acc / weight
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stop once a sweep changes no value by more than this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Warm-start from a coarse-to-fine hierarchy.
    pub nested: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_SWEEP_TOL,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            nested: true,
        }
    }
}

/// Converged species densities on the disk lattice.
#[derive(Debug, Clone)]
pub struct DiffusionField {
    mesh: Mesh,
    mu: f64,
    u: Vec<Vec<f64>>,
    walls: Vec<Vec<f64>>,
    /// Sup of `|T(u) − u|` for one more pointwise update `T`.
    pub residual: f64,
    /// `∫ Σ_{j<k} u_j u_k`.
    pub segregation_defect: f64,
    /// Sweeps on the finest level.
    pub sweeps: usize,
}

pub fn solve(config: &DiffusionConfig) -> Result<DiffusionField> {
    solve_with(config, SolveOptions::default())
}

pub fn solve_with(config: &DiffusionConfig, opts: SolveOptions) -> Result<DiffusionField> {
    config.validate()?;
    let mut levels = vec![config.resolution];
    if opts.nested {
        while levels[levels.len() - 1] / 2 >= COARSEST && levels[levels.len() - 1] % 2 == 0 {
            let next = levels[levels.len() - 1] / 2;
            levels.push(next);
        }
    }
    levels.reverse();
    let mut prev: Option<(Mesh, Vec<Vec<f64>>)> = None;
    let mut last = None;
    for &res in &levels {
        let mesh = Mesh::new(res);
        let walls: Vec<Vec<f64>> = (0..config.species()).map(|j| mesh.wall_terms(config, j)).collect();
        let init = match &prev {
            Some((coarse, v)) => v.iter().map(|vj| mesh.prolong(coarse, vj)).collect(),
            None => vec![vec![0.0; mesh.cells.len()]; config.species()],
        };
        let (u, sweeps) = iterate(&mesh, &walls, config.mu, init, opts)?;
        prev = Some((mesh.clone(), u.clone()));
        last = Some((mesh, walls, u, sweeps));
    }
    let (mesh, walls, u, sweeps) = last.expect("at least one level");
    let residual = fixed_point_residual(&mesh, &walls, config.mu, &u);
    let mut field = DiffusionField {
        mesh,
        mu: config.mu,
        u,
        walls,
        residual,
        segregation_defect: 0.0,
        sweeps,
    };
    field.segregation_defect = field.compute_defect();
    Ok(field)
}

#[inline]
fn update(mesh: &Mesh, wall: &[f64], u: &[f64], mu: f64, coupling: f64, k: usize) -> f64 {
    let s = &mesh.stencils[k];
    let mut num = wall[k];
    for &(l, w) in &s.links {
        if let Link::Node(n) = l {
            num += w * u[n];
        }
    }
    (num / (s.diag + mu * mesh.h * mesh.h * coupling)).max(0.0)
}

/// Red-black Gauss–Seidel with the coupling frozen at the start of each sweep.
fn iterate(mesh: &Mesh, walls: &[Vec<f64>], mu: f64, mut u: Vec<Vec<f64>>, opts: SolveOptions) -> Result<(Vec<Vec<f64>>, usize)> {
    let nodes = mesh.cells.len();
    let mut total = vec![0.0; nodes];
    for sweep in 1..=opts.max_sweeps {
        total.iter_mut().enumerate().for_each(|(k, t)| *t = u.iter().map(|v| v[k]).sum());
        let change = u
            .par_iter_mut()
            .zip(walls.par_iter())
            .map(|(uj, wall)| {
                let mut change: f64 = 0.0;
                for colour in &mesh.colour {
                    for &k in colour {
                        // Each node is visited once per sweep, so `old` is still
                        // the start-of-sweep value and `total − old` the frozen coupling.
                        let old = uj[k];
                        let new = update(mesh, wall, uj, mu, total[k] - old, k);
                        change = change.max((new - old).abs());
                        uj[k] = new;
                    }
                }
                change
            })
            .reduce(|| 0.0, f64::max);
        if change <= opts.tol {
            return Ok((u, sweep));
        }
    }
    Err(HopfError::NoConvergence { sweeps: opts.max_sweeps })
}

fn fixed_point_residual(mesh: &Mesh, walls: &[Vec<f64>], mu: f64, u: &[Vec<f64>]) -> f64 {
    (0..mesh.cells.len())
        .into_par_iter()
        .map(|k| {
            let total: f64 = u.iter().map(|v| v[k]).sum();
            u.iter()
                .zip(walls)
                .map(|(uj, wall)| (update(mesh, wall, uj, mu, total - uj[k], k) - uj[k]).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

impl DiffusionField {
    pub fn resolution(&self) -> usize {
        self.mesh.resolution
    }

    pub fn spacing(&self) -> f64 {
        self.mesh.h
    }

    pub fn species(&self) -> usize {
        self.u.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Density of species `j` at lattice node `(i, k)`, `None` outside the disk.
    pub fn value(&self, j: usize, i: usize, k: usize) -> Option<f64> {
        let r = self.mesh.resolution;
        if i >= r || k >= r {
            return None;
        }
        let n = self.mesh.index[i + k * r];
        (n != usize::MAX).then(|| self.u[j][n])
    }

    /// Species of largest density at `(i, k)`.
    pub fn argmax(&self, i: usize, k: usize) -> Option<usize> {
        let r = self.mesh.resolution;
        if i >= r || k >= r {
            return None;
        }
        let n = self.mesh.index[i + k * r];
        if n == usize::MAX {
            return None;
        }
        (0..self.u.len()).max_by(|&a, &b| self.u[a][n].total_cmp(&self.u[b][n]))
    }

    pub fn max_value(&self, j: usize) -> f64 {
        self.u[j].iter().copied().fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.u.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    fn compute_defect(&self) -> f64 {
        let h2 = self.mesh.h * self.mesh.h;
        (0..self.mesh.cells.len())
            .map(|k| {
                let mut s = 0.0;
                for a in 0..self.u.len() {
                    for b in a + 1..self.u.len() {
                        s += self.u[a][k] * self.u[b][k];
                    }
                }
                s * h2
            })
            .sum()
    }

    /// Largest positive part of `Δ(u_j − Σ_{k≠j} u_k)`, in `h²`-scaled units.
    /// The competition system makes this combination superharmonic, so the
    /// value is at the level of the solver tolerance.
    pub fn superharmonic_violation(&self, j: usize) -> f64 {
        (0..self.mesh.cells.len())
            .into_par_iter()
            .map(|k| {
                let mut lap = 0.0;
                for (s, (us, wall)) in self.u.iter().zip(&self.walls).enumerate() {
                    let l = self.mesh.laplacian(us, wall, k);
                    lap += if s == j { l } else { -l };
                }
                lap.max(0.0)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Midpoints of lattice edges where the dominant species changes.
    pub fn interface_points(&self) -> Vec<C64> {
        let r = self.mesh.resolution;
        let mut out = Vec::new();
        for k in 0..self.mesh.cells.len() {
            let (i, j) = self.mesh.cells[k];
            let a = self.argmax(i, j);
            for (ni, nj) in [(i + 1, j), (i, j + 1)] {
                if ni >= r || nj >= r {
                    continue;
                }
                let b = self.argmax(ni, nj);
                if b.is_some() && b != a {
                    let n = self.mesh.index[ni + nj * r];
                    out.push((self.mesh.point(k) + self.mesh.point(n)) * 0.5);
                }
            }
        }
        out
    }

    /// CSV `x,y,u1,…,uN` over the nodes inside the disk.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y");
        for j in 1..=self.u.len() {
            let _ = write!(out, ",u{j}");
        }
        out.push('\n');
        for k in 0..self.mesh.cells.len() {
            let p = self.mesh.point(k);
            let _ = write!(out, "{:.16e},{:.16e}", p.re, p.im);
            for uj in &self.u {
                let _ = write!(out, ",{:.16e}", uj[k]);
            }
            out.push('\n');
        }
        out
    }
}

/// Symmetric Hausdorff distance, in cells, between the diffusion interface
/// and the traced nodal graph of `state`.
pub fn interface_distance(field: &DiffusionField, state: &SegregatedState, graph: &NodalGraph) -> Result<f64> {
    if field.resolution() != state.resolution() {
        return Err(HopfError::InvalidInput(format!(
            "field resolution {} differs from state resolution {}",
            field.resolution(),
            state.resolution()
        )));
    }
    let segments: Vec<(C64, C64)> = graph
        .arcs
        .iter()
        .flat_map(|a| a.points.windows(2).map(|w| (w[0], w[1])))
        .collect();
    let points = field.interface_points();
    Ok(hausdorff(&points, &segments) / field.spacing())
}

/// Symmetric Hausdorff distance between a point cloud and a polyline set.
pub fn hausdorff(points: &[C64], segments: &[(C64, C64)]) -> f64 {
    if points.is_empty() && segments.is_empty() {
        return 0.0;
    }
    if points.is_empty() || segments.is_empty() {
        return f64::INFINITY;
    }
    let forward = points
        .par_iter()
        .map(|&p| segments.iter().map(|&(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max);
    // Densify the polylines so the backward pass sees every part of them.
    let step = segments.iter().map(|(a, b)| (b - a).norm()).fold(0.0, f64::max).max(1e-12);
    let probe_len = step.min(1e-2);
    let backward = segments
        .par_iter()
        .map(|&(a, b)| {
            let pieces = ((b - a).norm() / probe_len).ceil().max(1.0) as usize;
            (0..=pieces)
                .map(|s| {
                    let q = a + (b - a) * (s as f64 / pieces as f64);
                    points.iter().map(|p| (p - q).norm()).fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    forward.max(backward)
}
