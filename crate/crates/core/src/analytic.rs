//! Exact-form holomorphic functions on a neighbourhood of the closed unit
//! disk.
//!
//! A [`RationalFactored`] stores `c · Π (z − r_i)^{n_i} · Π p_k(z)^{m_k} ·
//! Π (z − u_j)^{a_j} / Π (z − d_l)^{b_l}` where the `r_i` are the interior
//! zeros and every other factor is zero-free on `|z| ≤ 1 + margin`. Zero
//! orders are therefore exact instead of numerically detected.

use num_complex::Complex;

use crate::error::{HopfError, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::{all_finite, cx, Cx, Real};

/// Default gap between interior zeros and the unit circle, and between the
/// unit circle and every singularity or exterior zero.
pub const DEFAULT_MARGIN: f64 = 0.05;
/// Roots closer than this are merged at construction.
pub const MERGE_TOL: f64 = 1e-12;
/// Distance below which a stored root is identified with a query point.
pub const ORDER_MATCH_TOL: f64 = 1e-10;
/// Distance below which evaluation reports a pole (or root) hit.
pub const HIT_TOL: f64 = 1e-14;
/// Minimum distance between the winding contour and any root or pole.
pub const CONTOUR_CLEARANCE: f64 = 1e-6;

/// A linear factor `(z − root)^mult`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor<T: Real> {
    pub root: Cx<T>,
    pub mult: u32,
}

impl<T: Real> Factor<T> {
    pub fn new(root: Cx<T>, mult: u32) -> Self {
        Self { root, mult }
    }
}

/// Parity of the order of a zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Odd,
    Even,
}

/// A zero together with its exact order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroRecord<T: Real> {
    pub location: Cx<T>,
    pub order: u32,
    pub parity: Parity,
}

impl<T: Real> ZeroRecord<T> {
    pub fn new(location: Cx<T>, order: u32) -> Self {
        let parity = if order % 2 == 1 { Parity::Odd } else { Parity::Even };
        Self { location, order, parity }
    }
}

/// Dense polynomial with ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T: Real> {
    pub coeffs: Vec<Cx<T>>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(mut coeffs: Vec<Cx<T>>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() == T::zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(cx(T::zero(), T::zero()));
        }
        Self { coeffs }
    }

    pub fn one() -> Self {
        Self::new(vec![cx(T::one(), T::zero())])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Cx<T>) -> Cx<T> {
        let mut acc = cx(T::zero(), T::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc * z + *c;
        }
        acc
    }

    /// Value and first derivative by a single Horner pass.
    pub fn eval_with_derivative(&self, z: Cx<T>) -> (Cx<T>, Cx<T>) {
        let mut p = cx(T::zero(), T::zero());
        let mut dp = cx(T::zero(), T::zero());
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + *c;
        }
        (p, dp)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![cx(T::zero(), T::zero()); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + *a * *b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = cx(T::zero(), T::zero());
        let out = (0..n)
            .map(|i| {
                *self.coeffs.get(i).unwrap_or(&zero) + *other.coeffs.get(i).unwrap_or(&zero)
            })
            .collect();
        Self::new(out)
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self::new(self.coeffs.iter().map(|c| *c * s).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// `(a z + b)`.
    pub fn linear(a: Cx<T>, b: Cx<T>) -> Self {
        Self::new(vec![b, a])
    }

    /// Coefficients of `p(z − shift)`.
    pub fn shifted(&self, shift: Cx<T>) -> Self {
        let base = Self::linear(cx(T::one(), T::zero()), -shift);
        let mut out = Self::new(vec![cx(T::zero(), T::zero())]);
        let mut power = Self::one();
        for c in &self.coeffs {
            out = out.add(&power.scale(*c));
            power = power.mul(&base);
        }
        out
    }

    /// Coefficients of `p(s z)`.
    pub fn dilated(&self, s: Cx<T>) -> Self {
        let mut k = cx(T::one(), T::zero());
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let v = *c * k;
                k = k * s;
                v
            })
            .collect();
        Self::new(coeffs)
    }
}

/// A polynomial factor `p(z)^mult`, zero-free on the closed disk.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFactor<T: Real> {
    pub poly: Polynomial<T>,
    pub mult: u32,
}

/// A holomorphic function on a neighbourhood of the closed disk in fully
/// factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFactored<T: Real> {
    leading: Cx<T>,
    roots: Vec<Factor<T>>,
    unit_num: Vec<Factor<T>>,
    unit_den: Vec<Factor<T>>,
    unit_poly: Vec<PolyFactor<T>>,
    margin: T,
}

#[inline]
pub(crate) fn powu<T: Real>(z: Cx<T>, n: u32) -> Cx<T> {
    match n {
        0 => cx(T::one(), T::zero()),
        1 => z,
        2 => z * z,
        _ => {
            let mut base = z;
            let mut e = n;
            let mut acc = cx(T::one(), T::zero());
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * base;
                }
                base = base * base;
                e >>= 1;
            }
            acc
        }
    }
}

fn merge_factors<T: Real>(list: Vec<Factor<T>>) -> Result<Vec<Factor<T>>> {
    let tol = T::lit(MERGE_TOL);
    let mut out: Vec<Factor<T>> = Vec::with_capacity(list.len());
    for f in list {
        if !all_finite(f.root) {
            return Err(HopfError::InvalidFunction("non-finite root".into()));
        }
        if f.mult == 0 {
            continue;
        }
        if let Some(existing) = out.iter_mut().find(|g| (g.root - f.root).norm() < tol) {
            existing.mult += f.mult;
        } else {
            out.push(f);
        }
    }
    Ok(out)
}

/// Cancels numerator/denominator factors sitting on the same point.
fn cancel<T: Real>(num: &mut Vec<Factor<T>>, den: &mut Vec<Factor<T>>) {
    let tol = T::lit(MERGE_TOL);
    for n in num.iter_mut() {
        if let Some(d) = den.iter_mut().find(|d| (d.root - n.root).norm() < tol) {
            let k = n.mult.min(d.mult);
            n.mult -= k;
            d.mult -= k;
        }
    }
    num.retain(|f| f.mult > 0);
    den.retain(|f| f.mult > 0);
}

impl<T: Real> RationalFactored<T> {
    /// Validated construction with the default boundary margin.
    pub fn new(
        leading: Cx<T>,
        roots: Vec<Factor<T>>,
        unit_num: Vec<Factor<T>>,
        unit_den: Vec<Factor<T>>,
    ) -> Result<Self> {
        Self::with_parts(leading, roots, unit_num, unit_den, Vec::new(), T::lit(DEFAULT_MARGIN))
    }

    /// Validated construction from every part, with an explicit margin.
    pub fn with_parts(
        leading: Cx<T>,
        roots: Vec<Factor<T>>,
        unit_num: Vec<Factor<T>>,
        unit_den: Vec<Factor<T>>,
        unit_poly: Vec<PolyFactor<T>>,
        margin: T,
    ) -> Result<Self> {
        if !all_finite(leading) || leading.norm() == T::zero() {
            return Err(HopfError::InvalidFunction(
                "leading coefficient must be finite and non-zero".into(),
            ));
        }
        if !(margin > T::zero() && margin < T::lit(0.5)) {
            return Err(HopfError::InvalidFunction("margin must lie in (0, 0.5)".into()));
        }
        let roots = merge_factors(roots)?;
        let mut unit_num = merge_factors(unit_num)?;
        let mut unit_den = merge_factors(unit_den)?;
        cancel(&mut unit_num, &mut unit_den);
        let inner = T::one() - margin;
        let outer = T::one() + margin;
        // Tolerate rounding right at the band edges.
        let slack = T::lit(1e-12);
        if let Some(r) = roots.iter().find(|r| r.root.norm() > inner + slack) {
            return Err(HopfError::InvalidFunction(format!(
                "interior root at modulus {:?} exceeds 1 - margin",
                r.root.norm()
            )));
        }
        if unit_num
            .iter()
            .chain(unit_den.iter())
            .any(|r| r.root.norm() < outer - slack)
        {
            return Err(HopfError::InvalidFunction(
                "unit-factor roots and poles must satisfy |r| >= 1 + margin".into(),
            ));
        }
        let unit_poly: Vec<PolyFactor<T>> = unit_poly.into_iter().filter(|p| p.mult > 0).collect();
        for p in &unit_poly {
            if p.poly.coeffs.iter().any(|c| !all_finite(*c)) {
                return Err(HopfError::InvalidFunction("non-finite polynomial coefficient".into()));
            }
            let w = poly_winding(&p.poly, T::one() + margin * T::lit(0.9))?;
            if w != 0 {
                return Err(HopfError::InvalidFunction(
                    "polynomial unit factor vanishes inside the disk".into(),
                ));
            }
        }
        let f = Self {
            leading,
            roots,
            unit_num,
            unit_den,
            unit_poly,
            margin,
        };
        let expected: i64 = f.roots.iter().map(|r| r.mult as i64).sum();
        let counted = f.winding_count(cx(T::zero(), T::zero()), T::one() - margin / T::lit(2.0))?;
        if counted != expected {
            return Err(HopfError::InvalidFunction(format!(
                "argument principle counts {counted} interior zeros, {expected} stored"
            )));
        }
        Ok(f)
    }

    /// Classifies every factor by modulus: `|r| < 1` interior, otherwise unit.
    pub fn from_all_roots(leading: Cx<T>, roots: Vec<Factor<T>>, poles: Vec<Factor<T>>) -> Result<Self> {
        let (inside, outside): (Vec<_>, Vec<_>) = roots.into_iter().partition(|f| f.root.norm() < T::one());
        Self::new(leading, inside, outside, poles)
    }

    pub fn constant(c: Cx<T>) -> Result<Self> {
        Self::new(c, Vec::new(), Vec::new(), Vec::new())
    }

    /// `c · (z − center)^order`.
    pub fn monomial(c: Cx<T>, center: Cx<T>, order: u32) -> Result<Self> {
        Self::new(c, vec![Factor::new(center, order)], Vec::new(), Vec::new())
    }

    pub fn leading(&self) -> Cx<T> {
        self.leading
    }
    pub fn roots(&self) -> &[Factor<T>] {
        &self.roots
    }
    pub fn unit_num(&self) -> &[Factor<T>] {
        &self.unit_num
    }
    pub fn unit_den(&self) -> &[Factor<T>] {
        &self.unit_den
    }
    pub fn unit_poly(&self) -> &[PolyFactor<T>] {
        &self.unit_poly
    }
    pub fn margin(&self) -> T {
        self.margin
    }

    /// Same factors with a different leading coefficient.
    pub fn with_leading(&self, leading: Cx<T>) -> Result<Self> {
        if !all_finite(leading) || leading.norm() == T::zero() {
            return Err(HopfError::InvalidFunction("leading coefficient must be non-zero".into()));
        }
        let mut g = self.clone();
        g.leading = leading;
        Ok(g)
    }

    fn check_point(z: Cx<T>) -> Result<()> {
        if all_finite(z) {
            Ok(())
        } else {
            Err(HopfError::InvalidInput("non-finite evaluation point".into()))
        }
    }

    /// Value without pole or finiteness checks.
    #[inline]
    pub fn eval_unchecked(&self, z: Cx<T>) -> Cx<T> {
        let mut acc = self.leading;
        for r in &self.roots {
            acc = acc * powu(z - r.root, r.mult);
        }
        for r in &self.unit_num {
            acc = acc * powu(z - r.root, r.mult);
        }
        for p in &self.unit_poly {
            acc = acc * powu(p.poly.eval(z), p.mult);
        }
        let mut den = cx(T::one(), T::zero());
        for d in &self.unit_den {
            den = den * powu(z - d.root, d.mult);
        }
        acc / den
    }

    pub fn eval(&self, z: Cx<T>) -> Result<Cx<T>> {
        Self::check_point(z)?;
        let hit = T::lit(HIT_TOL);
        if let Some(d) = self.unit_den.iter().find(|d| (z - d.root).norm() < hit) {
            return Err(HopfError::PoleHit {
                dist: (z - d.root).norm().to_f64_lossy(),
            });
        }
        Ok(self.eval_unchecked(z))
    }

    /// Value with one interior root factor left out (the root must be stored).
    pub fn eval_deflated(&self, z: Cx<T>, root: Cx<T>) -> Cx<T> {
        let tol = T::lit(ORDER_MATCH_TOL);
        let mut acc = self.leading;
        for r in &self.roots {
            if (r.root - root).norm() < tol {
                continue;
            }
            acc = acc * powu(z - r.root, r.mult);
        }
        for r in &self.unit_num {
            acc = acc * powu(z - r.root, r.mult);
        }
        for p in &self.unit_poly {
            acc = acc * powu(p.poly.eval(z), p.mult);
        }
        let mut den = cx(T::one(), T::zero());
        for d in &self.unit_den {
            den = den * powu(z - d.root, d.mult);
        }
        acc / den
    }

    /// `f′/f` as a sum of partial fractions.
    pub fn log_derivative(&self, z: Cx<T>) -> Result<Cx<T>> {
        Self::check_point(z)?;
        let hit = T::lit(HIT_TOL);
        let mut acc = cx(T::zero(), T::zero());
        for r in self.roots.iter().chain(self.unit_num.iter()) {
            let d = z - r.root;
            if d.norm() < hit {
                return Err(HopfError::RootHit { dist: d.norm().to_f64_lossy() });
            }
            acc = acc + cx(T::lit(r.mult as f64), T::zero()) / d;
        }
        for r in &self.unit_den {
            let d = z - r.root;
            if d.norm() < hit {
                return Err(HopfError::PoleHit { dist: d.norm().to_f64_lossy() });
            }
            acc = acc - cx(T::lit(r.mult as f64), T::zero()) / d;
        }
        for p in &self.unit_poly {
            let (v, dv) = p.poly.eval_with_derivative(z);
            if v.norm() == T::zero() {
                return Err(HopfError::RootHit { dist: 0.0 });
            }
            acc = acc + dv / v * T::lit(p.mult as f64);
        }
        Ok(acc)
    }

    /// `f′(z)`.
    pub fn derivative(&self, z: Cx<T>) -> Result<Cx<T>> {
        let tol = T::lit(HIT_TOL);
        if self.roots.iter().chain(self.unit_num.iter()).any(|r| (z - r.root).norm() < tol) {
            // Differentiate the product directly at a root.
            let mut total = cx(T::zero(), T::zero());
            let h = T::lit(1e-7);
            for k in 0..4 {
                let dir = Complex::from_polar(T::one(), T::FRAC_PI_2() * T::lit(k as f64));
                total = total + (self.eval(z + dir * h)? - self.eval(z - dir * h)?) / (dir * h * T::lit(2.0));
            }
            return Ok(total / T::lit(4.0));
        }
        Ok(self.eval(z)? * self.log_derivative(z)?)
    }

    /// Multiplicity of `z` as a stored interior root, else 0.
    pub fn order_at(&self, z: Cx<T>) -> u32 {
        let tol = T::lit(ORDER_MATCH_TOL);
        self.roots
            .iter()
            .find(|r| (r.root - z).norm() < tol)
            .map_or(0, |r| r.mult)
    }

    pub fn zeros(&self) -> Vec<ZeroRecord<T>> {
        self.roots.iter().map(|r| ZeroRecord::new(r.root, r.mult)).collect()
    }

    pub fn odd_zeros(&self) -> Vec<ZeroRecord<T>> {
        self.zeros().into_iter().filter(|z| z.parity == Parity::Odd).collect()
    }

    pub fn interior_order(&self) -> u32 {
        self.roots.iter().map(|r| r.mult).sum()
    }

    /// Argument-principle count of zeros minus poles inside the circle.
    pub fn winding_count(&self, center: Cx<T>, radius: T) -> Result<i64> {
        Self::check_point(center)?;
        if !(radius > T::zero()) {
            return Err(HopfError::InvalidInput("radius must be positive".into()));
        }
        let clearance = T::lit(CONTOUR_CLEARANCE);
        for r in self.roots.iter().chain(self.unit_num.iter()).chain(self.unit_den.iter()) {
            let d = ((r.root - center).norm() - radius).abs();
            if d < clearance {
                return Err(HopfError::RootOnContour { dist: d.to_f64_lossy() });
            }
        }
        let two_pi = T::PI() + T::PI();
        let mut failure = None;
        let res = integrate(
            |t: T| {
                let e = Complex::from_polar(T::one(), t);
                let z = center + e * radius;
                match self.log_derivative(z) {
                    Ok(ld) => ld * e * radius,
                    Err(err) => {
                        failure = Some(err);
                        cx(T::zero(), T::zero())
                    }
                }
            },
            T::zero(),
            two_pi,
            QuadOptions {
                abs_tol: T::lit(1e-6).max(T::epsilon() * T::lit(1e3)),
                rel_tol: T::zero(),
                max_intervals: 20_000,
            },
        );
        if let Some(err) = failure {
            return Err(err);
        }
        // (1/2πi) ∮ f′/f dz with dz = i ρ e^{iθ} dθ.
        let value = (res.value.re / two_pi).to_f64_lossy();
        let rounded = value.round();
        if (value - rounded).abs() > 0.25 || !value.is_finite() {
            return Err(HopfError::NonIntegerWinding { value });
        }
        Ok(rounded as i64)
    }

    /// Product of two functions; the margin is the smaller of the two.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut roots = self.roots.clone();
        roots.extend_from_slice(&other.roots);
        let mut num = self.unit_num.clone();
        num.extend_from_slice(&other.unit_num);
        let mut den = self.unit_den.clone();
        den.extend_from_slice(&other.unit_den);
        let mut poly = self.unit_poly.clone();
        poly.extend(other.unit_poly.iter().cloned());
        Self::with_parts(
            self.leading * other.leading,
            roots,
            num,
            den,
            poly,
            self.margin.min(other.margin),
        )
    }
}

/// Winding number of a polynomial around the circle `|z| = radius`.
fn poly_winding<T: Real>(p: &Polynomial<T>, radius: T) -> Result<i64> {
    p.winding(cx(T::zero(), T::zero()), radius)
}

impl<T: Real> Polynomial<T> {
    /// Zeros inside `|z − center| = radius`, by the argument principle.
    pub fn winding(&self, center: Cx<T>, radius: T) -> Result<i64> {
        winding_around(self, center, radius)
    }
}

fn winding_around<T: Real>(p: &Polynomial<T>, center: Cx<T>, radius: T) -> Result<i64> {
    if p.degree() == 0 {
        return if p.coeffs[0].norm() > T::zero() {
            Ok(0)
        } else {
            Err(HopfError::InvalidFunction("zero polynomial factor".into()))
        };
    }
    let two_pi = T::PI() + T::PI();
    let mut min_abs = T::infinity();
    let res = integrate(
        |t: T| {
            let e = Complex::from_polar(T::one(), t);
            let z = center + e * radius;
            let (v, dv) = p.eval_with_derivative(z);
            min_abs = min_abs.min(v.norm());
            dv / v * e * radius
        },
        T::zero(),
        two_pi,
        QuadOptions {
            abs_tol: T::lit(1e-6).max(T::epsilon() * T::lit(1e3)),
            rel_tol: T::zero(),
            max_intervals: 20_000,
        },
    );
    if !(min_abs > T::zero()) {
        return Err(HopfError::RootOnContour { dist: 0.0 });
    }
    let value = (res.value.re / two_pi).to_f64_lossy();
    let rounded = value.round();
    if (value - rounded).abs() > 0.25 || !value.is_finite() {
        return Err(HopfError::NonIntegerWinding { value });
    }
    Ok(rounded as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = RationalFactored<f64>;

    fn c(re: f64, im: f64) -> Cx<f64> {
        cx(re, im)
    }

    fn cubic() -> F {
        F::monomial(c(0.25, 0.0), c(0.0, 0.0), 3).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert!((cubic().eval(c(1.0, 0.0)).unwrap() - c(0.25, 0.0)).norm() < 1e-15);
        assert_eq!(cubic().eval(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let fw = F::new(
            c(0.25, 0.0),
            vec![Factor::new(c(0.0, 0.0), 1), Factor::new(c(0.1, 0.0), 2)],
            vec![],
            vec![],
        )
        .unwrap();
        let v = fw.eval(c(0.2, 0.0)).unwrap();
        assert!((v.re - 5e-4).abs() < 1e-17 && v.im == 0.0);
    }

    #[test]
    fn log_derivative_examples() {
        assert!((cubic().log_derivative(c(1.0, 0.0)).unwrap() - c(3.0, 0.0)).norm() < 1e-15);
        let g = F::new(
            c(1.0, 0.0),
            vec![Factor::new(c(0.0, 0.0), 1), Factor::new(c(0.3, 0.0), 2)],
            vec![],
            vec![],
        )
        .unwrap();
        let v = g.log_derivative(c(1.0, 0.0)).unwrap();
        assert!((v.re - 3.857_142_857_142_857).abs() < 1e-12);
        let k = F::constant(c(0.25, 0.0)).unwrap();
        assert_eq!(k.log_derivative(c(0.3, -0.2)).unwrap(), c(0.0, 0.0));
        assert!(matches!(cubic().log_derivative(c(0.0, 0.0)), Err(HopfError::RootHit { .. })));
    }

    #[test]
    fn order_examples() {
        assert_eq!(cubic().order_at(c(0.0, 0.0)), 3);
        assert_eq!(cubic().order_at(c(0.5, 0.0)), 0);
        let w = c(0.1, 0.0);
        let fw = F::new(c(0.25, 0.0), vec![Factor::new(c(0.0, 0.0), 1), Factor::new(w, 2)], vec![], vec![]).unwrap();
        assert_eq!(fw.order_at(w), 2);
    }

    #[test]
    fn winding_examples() {
        let g = F::new(
            c(1.0, 0.0),
            vec![Factor::new(c(0.0, 0.0), 1), Factor::new(c(0.3, 0.0), 2)],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(g.winding_count(c(0.0, 0.0), 0.5).unwrap(), 3);
        assert_eq!(g.winding_count(c(0.0, 0.0), 0.1).unwrap(), 1);
        assert_eq!(cubic().winding_count(c(0.0, 0.0), 0.9).unwrap(), 3);
        assert!(matches!(
            g.winding_count(c(0.0, 0.0), 0.3),
            Err(HopfError::RootOnContour { .. })
        ));
    }

    #[test]
    fn construction_rules() {
        // duplicates within the merge tolerance are merged
        let g = F::new(
            c(1.0, 0.0),
            vec![Factor::new(c(0.2, 0.0), 1), Factor::new(c(0.2 + 1e-13, 0.0), 2)],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(g.roots().len(), 1);
        assert_eq!(g.order_at(c(0.2, 0.0)), 3);
        assert!(F::constant(c(0.0, 0.0)).is_err());
        assert!(F::monomial(c(1.0, 0.0), c(0.97, 0.0), 1).is_err());
        assert!(F::new(c(1.0, 0.0), vec![], vec![Factor::new(c(1.02, 0.0), 1)], vec![]).is_err());
        let with_pole = F::new(c(1.0, 0.0), vec![], vec![], vec![Factor::new(c(2.0, 0.0), 2)]).unwrap();
        assert!(with_pole.eval(c(0.5, 0.0)).is_ok());
    }

    #[test]
    fn polynomial_factor_must_be_zero_free() {
        let q = Polynomial::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.1, 0.05)]);
        let f = F::with_parts(c(1.0, 0.0), vec![], vec![], vec![], vec![PolyFactor { poly: q.clone(), mult: 2 }], 0.05)
            .unwrap();
        let z = c(0.3, 0.4);
        let expected = q.eval(z) * q.eval(z);
        assert!((f.eval(z).unwrap() - expected).norm() < 1e-15);
        let bad = Polynomial::new(vec![c(-0.25, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(F::with_parts(c(1.0, 0.0), vec![], vec![], vec![], vec![PolyFactor { poly: bad, mult: 1 }], 0.05).is_err());
    }

    #[test]
    fn polynomial_shift_and_dilation() {
        let p = Polynomial::new(vec![c(1.0, 0.0), c(0.5, -0.2), c(0.0, 0.3)]);
        let s = c(0.2, 0.1);
        let z = c(-0.4, 0.7);
        assert!((p.shifted(s).eval(z) - p.eval(z - s)).norm() < 1e-14);
        assert!((p.dilated(s).eval(z) - p.eval(z * s)).norm() < 1e-14);
    }

    #[test]
    fn works_in_single_precision() {
        let f: RationalFactored<f32> =
            RationalFactored::monomial(cx(0.25f32, 0.0), cx(0.0, 0.0), 3).unwrap();
        assert!((f.eval(cx(1.0f32, 0.0)).unwrap().re - 0.25).abs() < 1e-7);
        assert_eq!(f.winding_count(cx(0.0, 0.0), 0.5).unwrap(), 3);
    }
}
