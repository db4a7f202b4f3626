//! Disk automorphisms `φ_{α,θ}(z) = e^{iθ}(z+α)/(ᾱz+1)`, the induced
//! action on Hopf differentials, dilation, and general-position normalization.

use crate::analytic::{Factor, PolyFactor, Polynomial, RationalFactored};
use crate::branch::segment_distance;
use crate::error::{HopfError, Result};
use crate::scalar::{cx, Cx, Real};
use crate::C64;

/// Minimum separation used by the general-position checks.
pub const GENERAL_POSITION_GAP: f64 = 1e-6;
pub const MAX_CANDIDATES: usize = 10_000;
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
/// Angular clearance from the forbidden directions during the search.
const FORBIDDEN_CLEARANCE: f64 = 1e-3;
/// Below this, a linear factor whose root is sent to infinity is treated as constant.
const DEGENERATE_COEFF: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap<T: Real> {
    alpha: Cx<T>,
    theta: T,
}

impl<T: Real> MobiusMap<T> {
    pub fn new(alpha: Cx<T>, theta: T) -> Result<Self> {
        if !(alpha.norm() < T::one()) || !theta.is_finite() {
            return Err(HopfError::InvalidInput(format!(
                "automorphism needs |alpha| < 1, got {:?}",
                alpha.norm()
            )));
        }
        Ok(Self { alpha, theta })
    }

    pub fn identity() -> Self {
        Self {
            alpha: cx(T::zero(), T::zero()),
            theta: T::zero(),
        }
    }

    pub fn rotation(theta: T) -> Self {
        Self {
            alpha: cx(T::zero(), T::zero()),
            theta,
        }
    }

    pub fn alpha(&self) -> Cx<T> {
        self.alpha
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    fn rot(&self) -> Cx<T> {
        Cx::from_polar(T::one(), self.theta)
    }

    pub fn apply(&self, z: Cx<T>) -> Cx<T> {
        self.rot() * (z + self.alpha) / (self.alpha.conj() * z + T::one())
    }

    pub fn derivative(&self, z: Cx<T>) -> Cx<T> {
        let d = self.alpha.conj() * z + T::one();
        self.rot() * (T::one() - self.alpha.norm_sqr()) / (d * d)
    }

    pub fn invert(&self) -> Self {
        Self {
            alpha: -self.alpha * self.rot(),
            theta: -self.theta,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        // α = −ψ⁻¹(0) and e^{iθ} = ψ′(0)/(1 − |α|²) for ψ = self ∘ other.
        let pre = other.invert().apply(self.invert().apply(cx(T::zero(), T::zero())));
        let alpha = -pre;
        let d0 = self.derivative(other.apply(cx(T::zero(), T::zero()))) * other.derivative(cx(T::zero(), T::zero()));
        let rot = d0 / (T::one() - alpha.norm_sqr());
        Self { alpha, theta: rot.arg() }
    }
}

/// Image of the linear factor `(φ(z) − r)` as `coef·(z − root)` over `(ᾱz+1)`;
/// `root` is `None` when `r` is sent to infinity.
fn pull_linear<T: Real>(m: &MobiusMap<T>, r: Cx<T>) -> (Cx<T>, Option<Cx<T>>) {
    let e = m.rot();
    let a = e - r * m.alpha.conj();
    let b = e * m.alpha - r;
    if a.norm() <= T::lit(DEGENERATE_COEFF) * (T::one() + r.norm()) {
        (b, None)
    } else {
        (a, Some(-b / a))
    }
}

fn powi<T: Real>(z: Cx<T>, n: i64) -> Cx<T> {
    if n >= 0 {
        crate::analytic::powu(z, n as u32)
    } else {
        crate::analytic::powu(z, (-n) as u32).inv()
    }
}

/// Factored form of `(f∘φ)·(φ′)²`, the Hopf differential of `U∘φ`.
pub fn pushforward_hopf<T: Real>(f: &RationalFactored<T>, m: &MobiusMap<T>) -> Result<RationalFactored<T>> {
    let zero = cx(T::zero(), T::zero());
    let e = m.rot();
    let abar = m.alpha.conj();
    let mut leading = f.leading() * e * e * (T::one() - m.alpha.norm_sqr()) * (T::one() - m.alpha.norm_sqr());
    // Net power of (ᾱz+1): −4 from (φ′)², −deg from every factor of f.
    let mut den_power: i64 = 4;
    let mut roots = Vec::new();
    let mut unit_num = Vec::new();
    let mut unit_den = Vec::new();
    for r in f.roots() {
        let (c, root) = pull_linear(m, r.root);
        leading = leading * crate::analytic::powu(c, r.mult);
        den_power += r.mult as i64;
        if let Some(z) = root {
            roots.push(Factor::new(z, r.mult));
        } else {
            return Err(HopfError::RootTooCloseToBoundary);
        }
    }
    for (list, sign) in [(f.unit_num(), 1i64), (f.unit_den(), -1i64)] {
        for u in list {
            let (c, root) = pull_linear(m, u.root);
            leading = leading * powi(c, sign * u.mult as i64);
            den_power += sign * u.mult as i64;
            if let Some(z) = root {
                if z.norm() < T::one() {
                    return Err(HopfError::RootTooCloseToBoundary);
                }
                if sign > 0 {
                    unit_num.push(Factor::new(z, u.mult));
                } else {
                    unit_den.push(Factor::new(z, u.mult));
                }
            }
        }
    }
    let mut unit_poly = Vec::new();
    for p in f.unit_poly() {
        // q(φ(z))·(ᾱz+1)^deg = Σ c_k (e^{iθ}(z+α))^k (ᾱz+1)^{deg−k}
        let deg = p.poly.degree() as u32;
        let num = Polynomial::linear(e, e * m.alpha);
        let den = Polynomial::linear(abar, cx(T::one(), T::zero()));
        let mut acc = Polynomial::new(vec![zero]);
        for (k, c) in p.poly.coeffs.iter().enumerate() {
            let term = num.pow(k as u32).mul(&den.pow(deg - k as u32)).scale(*c);
            acc = acc.add(&term);
        }
        den_power += (deg * p.mult) as i64;
        unit_poly.push(PolyFactor { poly: acc, mult: p.mult });
    }
    // (ᾱz+1)^{−p} = ᾱ^{−p} (z + 1/ᾱ)^{−p}
    if abar.norm() > T::zero() && den_power != 0 {
        let pole = -abar.inv();
        leading = leading * powi(abar, -den_power);
        if den_power > 0 {
            unit_den.push(Factor::new(pole, den_power as u32));
        } else {
            unit_num.push(Factor::new(pole, (-den_power) as u32));
        }
    }
    let margin = fitted_margin(f.margin(), &roots, unit_num.iter().chain(unit_den.iter()))?;
    RationalFactored::with_parts(leading, roots, unit_num, unit_den, unit_poly, margin)
}

/// Largest margin `≤ margin` compatible with the new factor locations;
/// interior roots may not come closer than `margin/2` to the circle.
fn fitted_margin<'a, T: Real>(
    margin: T,
    roots: &[Factor<T>],
    units: impl Iterator<Item = &'a Factor<T>>,
) -> Result<T> {
    let half = margin / T::lit(2.0);
    let mut out = margin;
    for r in roots {
        let gap = T::one() - r.root.norm();
        if gap < half {
            return Err(HopfError::RootTooCloseToBoundary);
        }
        out = out.min(gap);
    }
    for u in units {
        let gap = u.root.norm() - T::one();
        if gap < half {
            return Err(HopfError::RootTooCloseToBoundary);
        }
        out = out.min(gap);
    }
    Ok(out)
}

/// `(1+ε)^{−2} f(z/(1+ε))`. Roots scale by `1+ε`; those pushed out of the
/// disk become unit factors and the margin shrinks to fit.
pub fn dilate<T: Real>(f: &RationalFactored<T>, eps: T) -> Result<RationalFactored<T>> {
    if !(eps >= T::zero()) {
        return Err(HopfError::InvalidInput("dilation needs eps >= 0".into()));
    }
    if eps == T::zero() {
        return Ok(f.clone());
    }
    let s = T::one() + eps;
    let mut leading = f.leading() / (s * s);
    let mut roots = Vec::new();
    let mut unit_num = Vec::new();
    for r in f.roots() {
        leading = leading / s.powi(r.mult as i32);
        let z = r.root * s;
        if z.norm() < T::one() {
            roots.push(Factor::new(z, r.mult));
        } else {
            unit_num.push(Factor::new(z, r.mult));
        }
    }
    for u in f.unit_num() {
        leading = leading / s.powi(u.mult as i32);
        unit_num.push(Factor::new(u.root * s, u.mult));
    }
    let mut unit_den = Vec::new();
    for u in f.unit_den() {
        leading = leading * s.powi(u.mult as i32);
        unit_den.push(Factor::new(u.root * s, u.mult));
    }
    let unit_poly: Vec<PolyFactor<T>> = f
        .unit_poly()
        .iter()
        .map(|p| PolyFactor {
            poly: p.poly.dilated(cx(s.recip(), T::zero())),
            mult: p.mult,
        })
        .collect();
    let mut margin = f.margin();
    for r in &roots {
        margin = margin.min(T::one() - r.root.norm());
    }
    for u in unit_num.iter().chain(unit_den.iter()) {
        margin = margin.min(u.root.norm() - T::one());
    }
    if margin < T::lit(1e-4) {
        return Err(HopfError::RootTooCloseToBoundary);
    }
    RationalFactored::with_parts(leading, roots, unit_num, unit_den, unit_poly, margin)
}

/// Exit point of the ray `p + t(p − p0)`, `t ≥ 0`, through the unit circle.
fn ray_exit(p: C64, p0: C64) -> C64 {
    let d = (p - p0) / (p - p0).norm();
    let b = p.re * d.re + p.im * d.im;
    let t = -b + (b * b - (p.norm_sqr() - 1.0)).max(0.0).sqrt();
    p + d * t
}

/// Distinct distances to `p0` and disjoint outward rays, both with a gap of
/// [`GENERAL_POSITION_GAP`]. Points coinciding with `p0` are ignored.
pub fn is_general_position(points: &[C64], p0: C64) -> bool {
    let pts: Vec<C64> = points.iter().copied().filter(|p| (p - p0).norm() > 1e-12).collect();
    for (j, &a) in pts.iter().enumerate() {
        for &b in &pts[j + 1..] {
            if ((a - p0).norm() - (b - p0).norm()).abs() < GENERAL_POSITION_GAP {
                return false;
            }
            if segment_distance(a, ray_exit(a, p0), b, ray_exit(b, p0)) < GENERAL_POSITION_GAP {
                return false;
            }
        }
    }
    true
}

fn angle_gap_mod_pi(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::PI);
    d.min(std::f64::consts::PI - d)
}

/// Returns `φ` such that the images `φ(p_j)` are in general position with
/// respect to `φ(p0)`. The identity is returned when no change is needed.
///
/// Candidates are `α = ρe^{iψ}` with `ρ = 10⁻³·2^k` and golden-angle steps
/// in `ψ`, skipping the directions `(Arg q_j + Arg q_ℓ)/2 (mod π)` of the
/// points recentred at `p0`.
pub fn make_general_position(points: &[C64], p0: C64) -> Result<MobiusMap<f64>> {
    if is_general_position(points, p0) {
        return Ok(MobiusMap::identity());
    }
    let recentre = MobiusMap::new(-p0, 0.0)?;
    let q: Vec<C64> = points
        .iter()
        .filter(|p| (*p - p0).norm() > 1e-12)
        .map(|&p| recentre.apply(p))
        .collect();
    let mut forbidden = Vec::new();
    for (j, a) in q.iter().enumerate() {
        for b in &q[j + 1..] {
            forbidden.push(0.5 * (a.arg() + b.arg()));
        }
    }
    const PER_RADIUS: usize = 24;
    const RADII: usize = 9;
    let mut psi = 0.0f64;
    for c in 0..MAX_CANDIDATES {
        let k = (c / PER_RADIUS) % RADII;
        let rho = 1e-3 * 2f64.powi(k as i32);
        psi = (psi + GOLDEN_ANGLE).rem_euclid(2.0 * std::f64::consts::PI);
        if forbidden.iter().any(|&f| angle_gap_mod_pi(psi, f) < FORBIDDEN_CLEARANCE) {
            continue;
        }
        let m = MobiusMap::new(C64::from_polar(rho, psi), 0.0)?;
        let img: Vec<C64> = points.iter().map(|&p| m.apply(p)).collect();
        if is_general_position(&img, m.apply(p0)) {
            return Ok(m);
        }
    }
    Err(HopfError::SearchExhausted {
        candidates: MAX_CANDIDATES,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Func;
    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn map_examples() {
        let a = c(0.2, -0.1);
        assert!((MobiusMap::new(a, 0.0).unwrap().apply(c(0.0, 0.0)) - a).norm() < 1e-16);
        let z = c(0.3, 0.4);
        let r = MobiusMap::rotation(0.7).apply(z);
        assert!((r - C64::from_polar(1.0, 0.7) * z).norm() < 1e-15);
        assert!(MobiusMap::new(c(0.3, 0.0), 0.0).unwrap().apply(c(-0.3, 0.0)).norm() < 1e-16);
        assert!(MobiusMap::new(c(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn inverse_and_composition() {
        let m = MobiusMap::new(c(0.3, -0.5), 1.1).unwrap();
        let n = MobiusMap::new(c(-0.2, 0.1), -0.4).unwrap();
        for k in 0..20 {
            let z = C64::from_polar(0.05 * k as f64, 0.9 * k as f64);
            assert!((m.invert().apply(m.apply(z)) - z).norm() < 1e-14);
            assert!((m.compose(&n).apply(z) - m.apply(n.apply(z))).norm() < 1e-14);
        }
        let w = C64::from_polar(1.0, 2.0);
        assert!((m.apply(w).norm() - 1.0).abs() < 1e-14);
    }

    fn check_pushforward(f: &Func, m: &MobiusMap<f64>, g: &Func) {
        for k in 0..20 {
            let z = C64::from_polar(0.9 * ((k * 7 % 20) as f64 / 20.0), 1.3 * k as f64);
            let d = m.derivative(z);
            let want = f.eval(m.apply(z)).unwrap() * d * d;
            let got = g.eval(z).unwrap();
            assert!((want - got).norm() <= 1e-12 * (1.0 + want.norm()), "{want} vs {got}");
        }
    }

    #[test]
    fn pushforward_identity_and_rotation() {
        let f = Func::monomial(c(0.25, 0.0), c(0.0, 0.0), 3).unwrap();
        let id = pushforward_hopf(&f, &MobiusMap::identity()).unwrap();
        assert!((id.leading() - f.leading()).norm() < 1e-16);
        assert_eq!(id.roots(), f.roots());
        let th = 0.4;
        let g = pushforward_hopf(&f, &MobiusMap::rotation(th)).unwrap();
        assert!((g.leading() - f.leading() * C64::from_polar(1.0, 5.0 * th)).norm() < 1e-15);
        assert_eq!(g.order_at(c(0.0, 0.0)), 3);
        check_pushforward(&f, &MobiusMap::rotation(th), &g);
    }

    #[test]
    fn pushforward_moves_root_to_preimage() {
        let f = Func::monomial(c(0.25, 0.0), c(0.0, 0.0), 3).unwrap();
        let m = MobiusMap::new(c(0.1, 0.0), 0.0).unwrap();
        let g = pushforward_hopf(&f, &m).unwrap();
        assert_eq!(g.roots().len(), 1);
        assert!((g.roots()[0].root - c(-0.1, 0.0)).norm() < 1e-15);
        assert_eq!(g.winding_count(c(-0.1, 0.0), 0.05).unwrap(), 3);
        check_pushforward(&f, &m, &g);
    }

    #[test]
    fn pushforward_with_unit_and_poly_factors() {
        let q = Polynomial::new(vec![c(2.0, 0.0), c(0.3, 0.1), c(0.2, 0.0)]);
        let f = Func::with_parts(
            c(0.5, 0.2),
            vec![Factor::new(c(0.2, 0.1), 1), Factor::new(c(-0.3, 0.4), 2)],
            vec![Factor::new(c(2.0, 1.0), 1)],
            vec![Factor::new(c(-1.5, 0.3), 2)],
            vec![PolyFactor { poly: q, mult: 2 }],
            0.05,
        )
        .unwrap();
        let m = MobiusMap::new(c(0.15, -0.2), 0.8).unwrap();
        let g = pushforward_hopf(&f, &m).unwrap();
        check_pushforward(&f, &m, &g);
        let n = MobiusMap::new(c(-0.1, 0.05), -0.3).unwrap();
        let gn = pushforward_hopf(&g, &n).unwrap();
        let direct = pushforward_hopf(&f, &m.compose(&n)).unwrap();
        for k in 0..20 {
            let z = C64::from_polar(0.04 * k as f64, 2.1 * k as f64);
            let a = gn.eval(z).unwrap();
            let b = direct.eval(z).unwrap();
            assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn pushforward_rejects_roots_near_boundary() {
        let f = Func::monomial(c(0.25, 0.0), c(0.9, 0.0), 1).unwrap();
        let m = MobiusMap::new(c(-0.7, 0.0), 0.0).unwrap();
        assert!(matches!(pushforward_hopf(&f, &m), Err(HopfError::RootTooCloseToBoundary)));
    }

    #[test]
    fn dilation_examples() {
        let f = Func::monomial(c(0.25, 0.0), c(0.0, 0.0), 3).unwrap();
        let g = dilate(&f, 0.1).unwrap();
        assert!((g.leading() - c(0.25 * 1.1f64.powi(-5), 0.0)).norm() < 1e-16);
        assert_eq!(g.order_at(c(0.0, 0.0)), 3);
        let one = c(1.0, 0.0);
        let want = f.eval(one / 1.1).unwrap() / (1.1 * 1.1);
        assert!((g.eval(one).unwrap() - want).norm() < 1e-15);
        assert_eq!(dilate(&f, 0.0).unwrap(), f);

        let h = Func::monomial(c(1.0, 0.0), c(0.9, 0.0), 1).unwrap();
        let d = dilate(&h, 0.2).unwrap();
        assert_eq!(d.interior_order(), 0);
        assert!((d.unit_num()[0].root - c(1.08, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn general_position() {
        assert!(is_general_position(&[c(0.3, 0.1)], c(0.0, 0.0)));
        let eq = [c(0.5, 0.0), c(0.0, 0.5)];
        assert!(!is_general_position(&eq, c(0.0, 0.0)));
        let m = make_general_position(&eq, c(0.0, 0.0)).unwrap();
        assert!(m.alpha().norm() > 0.0);
        let img: Vec<C64> = eq.iter().map(|&p| m.apply(p)).collect();
        assert!(is_general_position(&img, m.apply(c(0.0, 0.0))));

        let line = [c(0.2, 0.0), c(0.5, 0.0)];
        assert!(!is_general_position(&line, c(0.0, 0.0)));
        let m = make_general_position(&line, c(0.0, 0.0)).unwrap();
        let img: Vec<C64> = line.iter().map(|&p| m.apply(p)).collect();
        assert!(is_general_position(&img, m.apply(c(0.0, 0.0))));
        // opposite rays never meet
        assert!(is_general_position(&[c(0.2, 0.0), c(-0.5, 0.0)], c(0.0, 0.0)));
    }

    #[test]
    fn f32_map() {
        let m = MobiusMap::<f32>::new(cx(0.3, 0.1), 0.5).unwrap();
        let z = cx(0.1f32, -0.2);
        assert!((m.invert().apply(m.apply(z)) - z).norm() < 1e-6);
    }
}
