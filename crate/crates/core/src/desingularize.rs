//! Splitting a critical zero of order `m₀+1` into a zero of order `m₀` and an
//! admissible simple zero, and iterating the split until every critical zero
//! is simple.
//!
//! Work happens in coordinates `ζ = z − z0`. The perturbed function is
//! `f_{ω0,W} = ζ^{m₀} (ζ − ω0) h² q(ζ,W)² Π(ζ − ω_j)^{q_j}` with
//! `q = 1 + Σ w_ℓ ζ^{ℓR}`; the weights restore `Re F = 0` at the other
//! critical zeros and the direction of `ω0 = εe^{iθ}` is found by Newton on
//! `K(ε, θ) = ε^{−(m₀+3)/2} Re ∫_0^{ω0} f_{ω0,W}^{1/2}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::analytic::{Factor, PolyFactor, Polynomial};
use crate::branch::rest_ratio;
use crate::error::{HopfError, Result};
use crate::mobius::{is_general_position, make_general_position, pushforward_hopf};
use crate::quadrature::{beta_half, integrate, QuadOptions};
use crate::scalar::half_power;
use crate::segregation::{admissibility, hopf_l1_distance, reconstruct, state_distance, AdmissibilityReport, ADMISSIBILITY_REL_TOL};
use crate::{Func, C64};

/// Floor on the diagonally normalized `|det A(0)|`.
pub const DET_FLOOR: f64 = 1e-8;
pub const R_CANDIDATES: [u32; 6] = [2, 4, 8, 16, 32, 64];
/// Central-difference step for `∂K/∂θ`.
pub const NEWTON_STEP: f64 = 1e-6;
/// Newton stops once `|K| ≤ K_REL_TOL · c_{m₀} |H(0)|`.
pub const K_REL_TOL: f64 = 1e-9;
pub const MAX_BACKTRACK: usize = 20;
/// Absolute tolerance for the system entries.
pub const ENTRY_TOL: f64 = 1e-13;
pub const SOLVE_RESIDUAL: f64 = 1e-10;
const MAX_NEWTON: usize = 40;
/// Lattice used for the closeness check between the old and new states.
pub const DEFAULT_CHECK_RESOLUTION: usize = 64;

/// `c_m = ∫_0^1 t^{m/2} √(1−t) dt = (√π/2) Γ(1+m/2) / Γ((5+m)/2)`.
pub fn moment_c(m0: u32) -> f64 {
    beta_half(m0 + 2, 3)
}

/// `∫_0^1 t^{k} (1−t)^{q/2} dt = Γ(1+k) Γ(1+q/2) / Γ(2+k+q/2)`.
pub fn beta_moment(k: u32, q: u32) -> f64 {
    beta_half(2 + 2 * k, 2 + q)
}

/// `∫_a^b g`, with `t = s²` / `t = 1 − s²` at endpoints carrying a
/// square-root singularity.
fn path_integral<G: Fn(C64) -> C64>(g: &G, a: C64, b: C64, start_sing: bool, end_sing: bool, tol: f64) -> Result<C64> {
    path_integral_rel(g, a, b, start_sing, end_sing, tol, 0.0)
}

fn path_integral_rel<G: Fn(C64) -> C64>(
    g: &G,
    a: C64,
    b: C64,
    start_sing: bool,
    end_sing: bool,
    tol: f64,
    rel: f64,
) -> Result<C64> {
    if start_sing && end_sing {
        let mid = (a + b) * 0.5;
        return Ok(path_integral_rel(g, a, mid, true, false, tol / 2.0, rel)?
            + path_integral_rel(g, mid, b, false, true, tol / 2.0, rel)?);
    }
    let ab = b - a;
    let opts = QuadOptions {
        abs_tol: tol,
        rel_tol: rel,
        max_intervals: 4000,
    };
    let res = if start_sing {
        integrate(|s: f64| g(a + ab * (s * s)) * ab * (2.0 * s), 0.0, 1.0, opts)
    } else if end_sing {
        integrate(|s: f64| g(a + ab * (1.0 - s * s)) * ab * (2.0 * s), 0.0, 1.0, opts)
    } else {
        integrate(|t: f64| g(a + ab * t) * ab, 0.0, 1.0, opts)
    };
    if !res.converged || !(res.value.re.is_finite() && res.value.im.is_finite()) {
        return Err(HopfError::QuadratureFailure(format!(
            "segment ({:.6},{:.6}) -> ({:.6},{:.6}) reached error {:e}",
            a.re, a.im, b.re, b.im, res.error
        )));
    }
    Ok(res.value)
}

/// Functions `h_ℓ` in `q = 1 + Σ w_ℓ h_ℓ(z − z0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Basis {
    /// `h_ℓ = ζ^{ℓR}`, `ℓ = 1..M`, with `R` from [`PerturbationContext::choose_r`].
    #[default]
    Monomial,
    /// `h_ℓ = ζ^{ℓ−1}`. Of order one near clustered zeros, so the weights
    /// scale like `ε/|ω_1|` instead of `ε/|ω_1|^{R+1}`.
    Graded,
}

#[inline]
fn basis_exponent(basis: Basis, r: u32, l: usize) -> u32 {
    match basis {
        Basis::Monomial => (l as u32 + 1) * r,
        Basis::Graded => l as u32,
    }
}

/// Recentred data for splitting the zero at `z0`.
#[derive(Debug, Clone)]
pub struct PerturbationContext {
    f: Func,
    z0: C64,
    m0: u32,
    /// Other critical zeros (absolute position, order), by distance from `z0`.
    others: Vec<(C64, u32)>,
    basis: Basis,
    /// `R` for the monomial basis, `0` for the graded one.
    r: u32,
    diag_det: f64,
    hadamard_det: f64,
    /// `√(f/(z−z0)^{m₀+1})` at `z0`, principal branch.
    s_f: C64,
    report: AdmissibilityReport,
}

/// `A`, `B`, and the row for the endpoint `ω0`.
#[derive(Debug, Clone)]
pub struct System {
    pub a: DMatrix<C64>,
    pub b: DVector<C64>,
    pub a0: DVector<C64>,
    pub b0: C64,
}

impl PerturbationContext {
    pub fn new(f: &Func, z0: C64) -> Result<Self> {
        Self::with_basis(f, z0, Basis::Monomial)
    }

    pub fn with_basis(f: &Func, z0: C64, basis: Basis) -> Result<Self> {
        let order = f.order_at(z0);
        if order < 2 {
            return Err(HopfError::InvalidInput(format!("zero at z0 has order {order}, need at least 2")));
        }
        let z0 = f
            .roots()
            .iter()
            .find(|r| (r.root - z0).norm() < 1e-10)
            .map(|r| r.root)
            .unwrap_or(z0);
        let report = admissibility(f, z0, ADMISSIBILITY_REL_TOL)?;
        if !report.odd_admissible {
            return Err(HopfError::NotAdmissible {
                max_residual: report.max_residual(),
            });
        }
        let mut others: Vec<(C64, u32)> = report
            .residuals
            .iter()
            .filter(|(z, res)| (*z - z0).norm() > 1e-12 && *res <= report.tolerance)
            .map(|(z, _)| (*z, f.order_at(*z)))
            .collect();
        others.sort_by(|a, b| (a.0 - z0).norm().partial_cmp(&(b.0 - z0).norm()).expect("finite"));
        let locs: Vec<C64> = others.iter().map(|o| o.0).collect();
        if !is_general_position(&locs, z0) {
            return Err(HopfError::InvalidInput(
                "critical zeros are not in general position with respect to z0".into(),
            ));
        }
        let s_f = f.eval_deflated(z0, z0).sqrt();
        let mut ctx = Self {
            f: f.clone(),
            z0,
            m0: order - 1,
            others,
            basis,
            r: R_CANDIDATES[0],
            diag_det: 1.0,
            hadamard_det: 1.0,
            s_f,
            report,
        };
        let (r, d, h) = match basis {
            Basis::Monomial => ctx.choose_r()?,
            Basis::Graded => {
                let (d, h) = ctx.normalized_dets_for(0)?;
                if !(d.is_finite() && d >= DET_FLOOR) {
                    return Err(HopfError::DeterminantFloor);
                }
                (0, d, h)
            }
        };
        ctx.r = r;
        ctx.diag_det = d;
        ctx.hadamard_det = h;
        Ok(ctx)
    }

    pub fn f(&self) -> &Func {
        &self.f
    }
    pub fn z0(&self) -> C64 {
        self.z0
    }
    pub fn m0(&self) -> u32 {
        self.m0
    }
    pub fn others(&self) -> &[(C64, u32)] {
        &self.others
    }
    pub fn r(&self) -> u32 {
        self.r
    }
    /// `|det(D⁻¹A(0))|` with `D` the diagonal of `A(0)`.
    pub fn diag_det(&self) -> f64 {
        self.diag_det
    }
    /// `|det A(0)| / Π ‖row_j‖`.
    pub fn hadamard_det(&self) -> f64 {
        self.hadamard_det
    }
    pub fn report(&self) -> &AdmissibilityReport {
        &self.report
    }
    pub fn dim(&self) -> usize {
        self.others.len()
    }

    /// `H(0)` for the working determination.
    pub fn h0(&self) -> C64 {
        if self.m0 % 2 == 1 {
            -self.s_f
        } else {
            self.s_f
        }
    }

    /// `φ` with `H(0) = |H(0)| e^{−iφ}`.
    pub fn phi(&self) -> f64 {
        -self.h0().arg()
    }

    /// Zeros of `K(0, ·)`: `θ_k = (2φ + 2kπ)/(3 + m₀)`.
    pub fn theta_k(&self, k: u32) -> f64 {
        (2.0 * self.phi() + 2.0 * PI * k as f64) / (3 + self.m0) as f64
    }

    pub fn branch_count(&self) -> u32 {
        self.m0 + 3
    }

    /// Square root of `f` near `z0`, with `ζ^{m₀/2}` windowed at `θ+π` and
    /// `ζ^{1/2}` at `θ`: the `ε → 0` limit of [`Self::sqrt_split`].
    fn sqrt_unsplit(&self, w: C64, theta: f64) -> C64 {
        let zeta = w - self.z0;
        self.s_f
            * half_power(zeta, self.m0 as i32, theta + PI)
            * half_power(zeta, 1, theta)
            * rest_ratio(&self.f, w, self.z0, Some(self.z0))
    }

    /// Square root of `f_{ω0,0}` for `ω0 = εe^{iθ}`, continuous in `θ ∈ ℝ`.
    fn sqrt_split(&self, w: C64, eps: f64, theta: f64) -> C64 {
        let zeta = w - self.z0;
        let omega0 = C64::from_polar(eps, theta);
        let lead = self.s_f * C64::from_polar(eps.sqrt(), 0.5 * (theta + PI));
        let local = half_power(zeta, self.m0 as i32, theta + PI);
        let ratio = ((zeta - omega0) / (-omega0)).sqrt();
        lead * local * ratio * rest_ratio(&self.f, w, self.z0, Some(self.z0))
    }

    fn weight(&self, w: C64, l: usize) -> C64 {
        crate::analytic::powu(w - self.z0, basis_exponent(self.basis, self.r, l))
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// `A(0)` and `B(0)` in the determination of direction `θ`.
    fn unsplit_system(&self, r: u32, theta: f64) -> Result<(DMatrix<C64>, DVector<C64>)> {
        let m = self.dim();
        let start = self.m0 % 2 == 0;
        let mut a = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
        let mut b = DVector::from_element(m, C64::new(0.0, 0.0));
        for (j, &(zj, qj)) in self.others.iter().enumerate() {
            let end = qj % 2 == 1;
            b[j] = path_integral(&|w| self.sqrt_unsplit(w, theta), self.z0, zj, start, end, ENTRY_TOL)? * 2.0;
            for l in 0..m {
                let k = basis_exponent(self.basis, r, l);
                let g = |w: C64| crate::analytic::powu(w - self.z0, k) * self.sqrt_unsplit(w, theta);
                a[(j, l)] = path_integral(&g, self.z0, zj, start, end, ENTRY_TOL)? * 2.0;
            }
        }
        Ok((a, b))
    }

    fn normalized_dets(a: &DMatrix<C64>) -> (f64, f64) {
        if a.nrows() == 0 {
            return (1.0, 1.0);
        }
        let det = a.determinant().norm();
        let diag: f64 = (0..a.nrows()).map(|j| a[(j, j)].norm()).product();
        let rows: f64 = a.row_iter().map(|r| r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()).product();
        (det / diag, det / rows)
    }

    /// Smallest `R` from [`R_CANDIDATES`] with `|det(D⁻¹A(0))| ≥ DET_FLOOR`.
    /// Returns `(R, diagonal-normalized det, Hadamard ratio)`.
    pub fn choose_r(&self) -> Result<(u32, f64, f64)> {
        if self.dim() == 0 {
            return Ok((R_CANDIDATES[0], 1.0, 1.0));
        }
        for &r in &R_CANDIDATES {
            let (d, h) = self.normalized_dets_for(r)?;
            if d.is_finite() && d >= DET_FLOOR {
                return Ok((r, d, h));
            }
        }
        Err(HopfError::DeterminantFloor)
    }

    /// Both normalized determinants of `A(0)` for a given `R`.
    pub fn normalized_dets_for(&self, r: u32) -> Result<(f64, f64)> {
        let (a, _) = self.unsplit_system(r, self.theta_k(0))?;
        Ok(Self::normalized_dets(&a))
    }

    /// `B(0)` in the determination of direction `θ`; purely imaginary for
    /// admissible input.
    pub fn b_unsplit(&self, theta: f64) -> Result<DVector<C64>> {
        Ok(self.unsplit_system(self.r, theta)?.1)
    }

    /// System at `ω0 = εe^{iθ}`: rows for every `ω_j` plus the `ω0` row.
    pub fn assemble(&self, eps: f64, theta: f64) -> Result<System> {
        let m = self.dim();
        let start = self.m0 % 2 == 1;
        let mut a = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
        let mut b = DVector::from_element(m, C64::new(0.0, 0.0));
        let sq = |w: C64| self.sqrt_split(w, eps, theta);
        for (j, &(zj, qj)) in self.others.iter().enumerate() {
            let end = qj % 2 == 1;
            b[j] = path_integral(&sq, self.z0, zj, start, end, ENTRY_TOL)? * 2.0;
            for l in 0..m {
                let g = |w: C64| self.weight(w, l) * sq(w);
                a[(j, l)] = path_integral(&g, self.z0, zj, start, end, ENTRY_TOL)? * 2.0;
            }
        }
        let target = self.z0 + C64::from_polar(eps, theta);
        // The ω0 row scales like ε^{(m₀+3)/2}; ask for relative accuracy.
        let tol0 = ENTRY_TOL.min(1e-10 * moment_c(self.m0) * self.s_f.norm() * eps.powf((self.m0 + 3) as f64 / 2.0));
        // Points near ω0 are formed as z0 + O(ε): relative accuracy is capped near u·|z0|/ε.
        let rel0 = 1e-10f64.max(256.0 * f64::EPSILON * (1.0 + self.z0.norm()) / eps);
        let b0 = path_integral_rel(&sq, self.z0, target, start, true, tol0, rel0)? * 2.0;
        let mut a0 = DVector::from_element(m, C64::new(0.0, 0.0));
        for l in 0..m {
            let g = |w: C64| self.weight(w, l) * sq(w);
            a0[l] = path_integral_rel(&g, self.z0, target, start, true, tol0, rel0)? * 2.0;
        }
        Ok(System { a, b, a0, b0 })
    }

    /// `(A, B)` at `ω0` (direction taken as `Arg ω0`).
    pub fn assemble_system(&self, omega0: C64) -> Result<(DMatrix<C64>, DVector<C64>)> {
        let s = self.assemble(omega0.norm(), omega0.arg())?;
        Ok((s.a, s.b))
    }

    /// Weights and `F(ω0)` for `ω0 = εe^{iθ}`.
    fn weights_at(&self, eps: f64, theta: f64) -> Result<(DVector<C64>, C64)> {
        let s = self.assemble(eps, theta)?;
        let b_ref = self.b_unsplit(theta)?;
        let w = solve_weights(&s.a, &s.b, &b_ref)?;
        let f0 = s.b0 + s.a0.dot(&w);
        Ok((w, f0))
    }

    /// `K(ε, θ)`; `ε = 0` gives the closed form `−|H(0)| c_{m₀} sin((3+m₀)θ/2 − φ)`.
    pub fn k_value(&self, eps: f64, theta: f64) -> Result<f64> {
        if eps == 0.0 {
            let h = self.h0();
            return Ok(-h.norm() * moment_c(self.m0) * ((3 + self.m0) as f64 * theta / 2.0 - self.phi()).sin());
        }
        let (_, f0) = self.weights_at(eps, theta)?;
        Ok(0.5 * f0.re / eps.powf((self.m0 + 3) as f64 / 2.0))
    }

    /// Newton on `θ ↦ K(ε, θ)` from `θ_k`. Returns `(θ*, |K|, iterations)`.
    pub fn newton_theta(&self, eps: f64, branch: u32) -> Result<(f64, f64, usize)> {
        let start = self.theta_k(branch);
        let tol = K_REL_TOL * moment_c(self.m0) * self.h0().norm();
        let basin = PI / (3 + self.m0) as f64;
        let mut theta = start;
        for it in 0..MAX_NEWTON {
            let k = self.k_value(eps, theta)?;
            if k.abs() <= tol {
                return Ok((theta, k.abs(), it));
            }
            let dk = (self.k_value(eps, theta + NEWTON_STEP)? - self.k_value(eps, theta - NEWTON_STEP)?) / (2.0 * NEWTON_STEP);
            if dk == 0.0 || !dk.is_finite() {
                break;
            }
            theta -= k / dk;
            if (theta - start).abs() > basin {
                break;
            }
        }
        Err(HopfError::BranchLost { branch: branch as usize })
    }

    /// Parts of `f_{ω0,W}` translated back to the original coordinates.
    fn assemble_function(&self, eps: f64, theta: f64, w: &DVector<C64>) -> Result<Func> {
        let f = &self.f;
        let mut roots: Vec<Factor<f64>> = f
            .roots()
            .iter()
            .map(|r| {
                if (r.root - self.z0).norm() < 1e-12 {
                    Factor::new(r.root, r.mult - 1)
                } else {
                    *r
                }
            })
            .collect();
        roots.push(Factor::new(self.z0 + C64::from_polar(eps, theta), 1));
        let mut unit_poly = f.unit_poly().to_vec();
        if !w.is_empty() {
            let deg = basis_exponent(self.basis, self.r, self.dim() - 1) as usize;
            let mut coeffs = vec![C64::new(0.0, 0.0); deg + 1];
            coeffs[0] = C64::new(1.0, 0.0);
            for (l, wl) in w.iter().enumerate() {
                coeffs[basis_exponent(self.basis, self.r, l) as usize] += *wl;
            }
            let q = Polynomial::new(coeffs).shifted(self.z0);
            unit_poly.push(PolyFactor { poly: q, mult: 2 });
        }
        Func::with_parts(
            f.leading(),
            roots,
            f.unit_num().to_vec(),
            f.unit_den().to_vec(),
            unit_poly,
            f.margin(),
        )
    }
}

/// `W = A⁻¹(B0 − B)`, solving `AW + B = B0` (so `Re F(ω_j) = Re B0_j`).
pub fn solve_weights(a: &DMatrix<C64>, b: &DVector<C64>, b0: &DVector<C64>) -> Result<DVector<C64>> {
    if a.nrows() == 0 {
        return Ok(DVector::from_element(0, C64::new(0.0, 0.0)));
    }
    let rhs = b0 - b;
    let w = a.clone().lu().solve(&rhs).ok_or(HopfError::SingularSolve)?;
    let sup = |v: &DVector<C64>| v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let residual = sup(&(a * &w + b - b0));
    let scale = 1.0f64.max(sup(b0)).max(sup(b));
    if !(residual <= SOLVE_RESIDUAL * scale) {
        return Err(HopfError::SingularSolve);
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOptions {
    /// Required bound on `sup + W^{1,2}` distance between old and new states.
    pub eps_target: f64,
    pub branch: u32,
    /// Initial splitting radius; default `0.01·|ω_1|` (or `0.01` without other zeros).
    pub eps: Option<f64>,
    pub check_resolution: usize,
    /// Fixed basis for the unit-factor perturbation; `None` tries the graded
    /// basis and falls back to the monomial one.
    pub basis: Option<Basis>,
}

impl SplitOptions {
    pub fn new(eps_target: f64, branch: u32) -> Self {
        Self {
            eps_target,
            branch,
            eps: None,
            check_resolution: DEFAULT_CHECK_RESOLUTION,
            basis: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DesingularizationResult {
    pub f_new: Func,
    pub z0: C64,
    /// Offset of the new simple zero from `z0`.
    pub omega0: C64,
    pub weights: Vec<C64>,
    pub basis: Basis,
    pub r: u32,
    pub epsilon: f64,
    pub theta: f64,
    pub branch: u32,
    pub k_residual: f64,
    pub newton_iterations: usize,
    pub backtracks: usize,
    pub diag_det: f64,
    pub hadamard_det: f64,
    pub sup_dist: f64,
    pub h1_dist: f64,
    pub hopf_l1_dist: f64,
    pub admissibility: AdmissibilityReport,
}

impl DesingularizationResult {
    pub fn new_zero(&self) -> C64 {
        self.z0 + self.omega0
    }
}

pub fn split_zero(f: &Func, z0: C64, eps_target: f64, branch: u32) -> Result<DesingularizationResult> {
    split_zero_with(f, z0, &SplitOptions::new(eps_target, branch))
}

pub fn split_zero_with(f: &Func, z0: C64, opts: &SplitOptions) -> Result<DesingularizationResult> {
    let attempt = |basis| split_in_context(&PerturbationContext::with_basis(f, z0, basis)?, opts);
    match opts.basis {
        Some(basis) => attempt(basis),
        // Clustered zeros make monomial weights blow up like ε/|ω₁|^{R+1};
        // graded weights stay of size ε/|ω₁|.
        None => attempt(Basis::Graded).or_else(|first| attempt(Basis::Monomial).map_err(|_| first)),
    }
}

fn split_in_context(ctx: &PerturbationContext, opts: &SplitOptions) -> Result<DesingularizationResult> {
    if opts.branch >= ctx.branch_count() {
        return Err(HopfError::InvalidInput(format!(
            "branch {} out of range 0..{}",
            opts.branch,
            ctx.branch_count()
        )));
    }
    let z0 = ctx.z0;
    let nearest = ctx.others.first().map(|o| (o.0 - z0).norm());
    let mut eps = opts.eps.unwrap_or_else(|| nearest.map_or(0.01, |d| 0.01 * d));
    if let Some(d) = nearest {
        eps = eps.min(0.9 * d);
    }
    eps = eps.min(0.9 * (1.0 - ctx.f.margin() - z0.norm()));
    let old_state = reconstruct(&ctx.f, z0, opts.check_resolution)?;
    let mut last = HopfError::BranchLost { branch: opts.branch as usize };
    for backtracks in 0..=MAX_BACKTRACK {
        if backtracks > 0 {
            eps *= 0.5;
        }
        if ctx
            .others
            .iter()
            .any(|o| ((o.0 - z0).norm() - eps).abs() < crate::mobius::GENERAL_POSITION_GAP)
        {
            continue;
        }
        let (theta, k_residual, iters) = match ctx.newton_theta(eps, opts.branch) {
            Ok(x) => x,
            Err(e) => {
                last = e;
                continue;
            }
        };
        let (w, _) = ctx.weights_at(eps, theta)?;
        let f_new = match ctx.assemble_function(eps, theta, &w) {
            Ok(g) => g,
            Err(e) => {
                last = e;
                continue;
            }
        };
        let omega0 = C64::from_polar(eps, theta);
        let orders_ok = f_new.order_at(z0) == ctx.m0
            && f_new.order_at(z0 + omega0) == 1
            && ctx.f.roots().iter().filter(|r| (r.root - z0).norm() > 1e-12).all(|r| f_new.order_at(r.root) == r.mult);
        if !orders_ok {
            last = HopfError::InvalidFunction("order bookkeeping failed after split".into());
            continue;
        }
        let report = admissibility(&f_new, z0, ADMISSIBILITY_REL_TOL)?;
        let residual_at = |z: C64| {
            report
                .residuals
                .iter()
                .find(|(p, _)| (*p - z).norm() < 1e-10)
                .map_or(f64::INFINITY, |r| r.1)
        };
        let criticals_ok = residual_at(z0 + omega0) <= report.tolerance
            && ctx.others.iter().all(|o| residual_at(o.0) <= report.tolerance);
        if !report.odd_admissible || !criticals_ok {
            last = HopfError::NotAdmissible {
                max_residual: report.max_residual(),
            };
            continue;
        }
        let new_state = reconstruct(&f_new, z0, opts.check_resolution)?;
        let (sup, h1) = state_distance(&old_state, &new_state)?;
        if sup + h1 > opts.eps_target {
            last = HopfError::ClosenessFailed {
                achieved: sup + h1,
                target: opts.eps_target,
            };
            continue;
        }
        let hopf = hopf_l1_distance(&ctx.f, &f_new);
        return Ok(DesingularizationResult {
            f_new,
            z0,
            omega0,
            weights: w.iter().copied().collect(),
            basis: ctx.basis,
            r: ctx.r,
            epsilon: eps,
            theta,
            branch: opts.branch,
            k_residual,
            newton_iterations: iters,
            backtracks,
            diag_det: ctx.diag_det,
            hadamard_det: ctx.hadamard_det,
            sup_dist: sup,
            h1_dist: h1,
            hopf_l1_dist: hopf,
            admissibility: report,
        });
    }
    Err(last)
}

/// Critical zeros of `f`: its zeros on the nodal set of some admissible base.
/// Returns the base used and `(location, order)` pairs.
pub fn critical_zeros(f: &Func) -> Result<(C64, Vec<(C64, u32)>)> {
    let mut candidates: Vec<(C64, u32)> = f.roots().iter().map(|r| (r.root, r.mult)).collect();
    // Odd zeros force themselves onto the nodal set; try them first.
    candidates.sort_by_key(|c| (c.1 % 2 == 0, std::cmp::Reverse(c.1)));
    let mut worst = 0.0f64;
    for (z, _) in &candidates {
        let report = admissibility(f, *z, ADMISSIBILITY_REL_TOL)?;
        if report.odd_admissible {
            let crit = report
                .residuals
                .iter()
                .filter(|(_, res)| *res <= report.tolerance)
                .map(|(p, _)| (*p, f.order_at(*p)))
                .collect();
            return Ok((*z, crit));
        }
        worst = worst.max(report.max_residual());
    }
    if candidates.is_empty() {
        return Ok((C64::new(0.0, 0.0), Vec::new()));
    }
    Err(HopfError::NotAdmissible { max_residual: worst })
}

/// `α = Σ (m − 3)` over critical zeros, i.e. `Σ (ord − 1)`.
pub fn excess_index(criticals: &[(C64, u32)]) -> u32 {
    criticals.iter().map(|c| c.1.saturating_sub(1)).sum()
}

#[derive(Debug, Clone)]
pub struct ReductionStep {
    pub z0: C64,
    pub order: u32,
    pub alpha_before: u32,
    pub alpha_after: u32,
    pub general_position_alpha: C64,
    pub basis: Basis,
    pub epsilon: f64,
    pub theta: f64,
    pub sup_dist: f64,
    pub h1_dist: f64,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub f: Func,
    pub base: C64,
    pub steps: Vec<ReductionStep>,
    /// Sum of per-step `sup + W^{1,2}` distances.
    pub accumulated: f64,
    /// `accumulated / eps_budget`.
    pub condition: f64,
}

/// Options for [`reduce_to_simple_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReduceOptions {
    /// Splitting radius relative to the nearest other critical zero
    /// (absolute when there is none) before backtracking.
    pub relative_eps: f64,
    pub check_resolution: usize,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        Self {
            relative_eps: 0.25,
            check_resolution: DEFAULT_CHECK_RESOLUTION,
        }
    }
}

pub fn reduce_to_simple(f: &Func, eps_budget: f64) -> Result<Reduction> {
    reduce_to_simple_with(f, eps_budget, &ReduceOptions::default())
}

/// Splits the highest-order critical zero until all are simple. Each step
/// normalizes to general position with a disk automorphism, splits with a
/// budget of `eps_budget/α`, and pulls the result back.
pub fn reduce_to_simple_with(f: &Func, eps_budget: f64, opts: &ReduceOptions) -> Result<Reduction> {
    let mut current = f.clone();
    let (mut base, mut crit) = critical_zeros(&current)?;
    let alpha0 = excess_index(&crit);
    let per_step = if alpha0 > 0 { eps_budget / alpha0 as f64 } else { eps_budget };
    let mut steps = Vec::new();
    let mut accumulated = 0.0;
    while excess_index(&crit) > 0 {
        let alpha_before = excess_index(&crit);
        let &(z0, order) = crit
            .iter()
            .filter(|c| c.1 >= 2)
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.norm().partial_cmp(&a.0.norm()).expect("finite")))
            .expect("positive excess implies a multiple critical zero");
        let others: Vec<C64> = crit.iter().filter(|c| (c.0 - z0).norm() > 1e-12).map(|c| c.0).collect();
        let m = make_general_position(&others, z0)?;
        let moved = m.alpha().norm() > 0.0;
        let (work, w0) = if moved {
            (pushforward_hopf(&current, &m.invert())?, m.apply(z0))
        } else {
            (current.clone(), z0)
        };
        let attempt = |basis: Basis| -> Result<DesingularizationResult> {
            let ctx = PerturbationContext::with_basis(&work, w0, basis)?;
            let nearest = ctx.others().first().map(|o| (o.0 - ctx.z0()).norm());
            let split_opts = SplitOptions {
                eps_target: per_step,
                branch: 0,
                eps: Some(nearest.map_or(opts.relative_eps, |d| opts.relative_eps * d)),
                check_resolution: opts.check_resolution,
                basis: Some(basis),
            };
            split_in_context(&ctx, &split_opts)
        };
        // Graded first; the monomial basis is the fallback.
        let (res, basis) = match attempt(Basis::Graded) {
            Ok(r) => (r, Basis::Graded),
            Err(first) => match attempt(Basis::Monomial) {
                Ok(r) => (r, Basis::Monomial),
                Err(_) => return Err(first),
            },
        };
        current = if moved { pushforward_hopf(&res.f_new, &m)? } else { res.f_new.clone() };
        let next = critical_zeros(&current)?;
        base = next.0;
        crit = next.1;
        let alpha_after = excess_index(&crit);
        if alpha_after + 1 != alpha_before {
            return Err(HopfError::InvalidFunction(format!(
                "excess index went from {alpha_before} to {alpha_after}"
            )));
        }
        accumulated += res.sup_dist + res.h1_dist;
        steps.push(ReductionStep {
            z0,
            order,
            alpha_before,
            alpha_after,
            general_position_alpha: m.alpha(),
            basis,
            epsilon: res.epsilon,
            theta: res.theta,
            sup_dist: res.sup_dist,
            h1_dist: res.h1_dist,
        });
    }
    Ok(Reduction {
        f: current,
        base,
        steps,
        accumulated,
        condition: if eps_budget > 0.0 { accumulated / eps_budget } else { 0.0 },
    })
}
