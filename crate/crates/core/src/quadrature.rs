//! Adaptive Gauss–Kronrod (7/15) quadrature of complex-valued integrands on
//! real intervals, Gauss–Legendre rules, and Gamma/Beta values at
//! half-integer arguments.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;

use crate::scalar::{Cx, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T: Real> {
    pub value: Cx<T>,
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T: Real> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-10),
            rel_tol: T::zero(),
            max_intervals: 4000,
        }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn abs(tol: T) -> Self {
        Self {
            abs_tol: tol,
            ..Self::default()
        }
    }
}

/// Single 15-point Kronrod evaluation with the embedded 7-point Gauss error.
pub fn gk15<T, F>(f: &mut F, a: T, b: T) -> (Cx<T>, T)
where
    T: Real,
    F: FnMut(T) -> Cx<T>,
{
    let half = (b - a) / T::lit(2.0);
    let center = (a + b) / T::lit(2.0);
    let mut kronrod = Complex::new(T::zero(), T::zero());
    let mut gauss = Complex::new(T::zero(), T::zero());
    let fc = f(center);
    kronrod = kronrod + fc * T::lit(WGK[7]);
    gauss = gauss + fc * T::lit(WG[3]);
    for i in 0..7 {
        let dx = half * T::lit(XGK[i]);
        let s = f(center - dx) + f(center + dx);
        kronrod = kronrod + s * T::lit(WGK[i]);
        if i % 2 == 1 {
            gauss = gauss + s * T::lit(WG[i / 2]);
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).norm();
    (value, err)
}

struct Piece<T: Real> {
    a: T,
    b: T,
    value: Cx<T>,
    error: T,
}

impl<T: Real> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Piece<T> {}
impl<T: Real> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive bisection driven by the largest local error estimate.
pub fn integrate<T, F>(mut f: F, a: T, b: T, opts: QuadOptions<T>) -> QuadResult<T>
where
    T: Real,
    F: FnMut(T) -> Cx<T>,
{
    if a == b {
        return QuadResult {
            value: Complex::new(T::zero(), T::zero()),
            error: T::zero(),
            evaluations: 0,
            converged: true,
        };
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut total = v;
    let mut total_err = e;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, error: e });
    let min_width = (b - a).abs() * T::epsilon() * T::lit(64.0);
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.norm());
        if total_err <= tol || heap.len() >= opts.max_intervals {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        if (worst.b - worst.a).abs() <= min_width {
            heap.push(worst);
            break;
        }
        let mid = (worst.a + worst.b) / T::lit(2.0);
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed the drift of the running totals.
    let mut value = Complex::new(T::zero(), T::zero());
    let mut error = T::zero();
    for p in heap.iter() {
        value = value + p.value;
        error = error + p.error;
    }
    let tol = opts.abs_tol.max(opts.rel_tol * value.norm());
    QuadResult {
        value,
        error,
        evaluations,
        converged: error <= tol,
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<T, F>(mut f: F, a: T, b: T, opts: QuadOptions<T>) -> QuadResult<T>
where
    T: Real,
    F: FnMut(T) -> T,
{
    integrate(move |t| Complex::new(f(t), T::zero()), a, b, opts)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> Vec<(T, T)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    let nf = T::lit(n as f64);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let k = T::lit(i as f64 + 0.75);
        let mut x = (T::PI() * k / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let mut p0 = T::one();
            let mut p1 = x;
            for j in 2..=n {
                let jf = T::lit(j as f64);
                let p2 = ((T::lit(2.0) * jf - T::one()) * x * p1 - (jf - T::one()) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { T::one() } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - T::one());
            let dx = pn / dp;
            x = x - dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

/// `ln Γ(k/2)` for a positive integer `k`, by the exact recurrences
/// `Γ(1) = 1`, `Γ(1/2) = √π`, `Γ(x + 1) = x Γ(x)`.
pub fn ln_gamma_half(k: u32) -> f64 {
    assert!(k >= 1, "Gamma argument must be positive");
    let (mut acc, mut x) = if k % 2 == 0 {
        (0.0, 1.0)
    } else {
        (0.5 * std::f64::consts::PI.ln(), 0.5)
    };
    let target = k as f64 / 2.0;
    while x < target - 0.25 {
        acc += x.ln();
        x += 1.0;
    }
    acc
}

/// `Γ(k/2)`.
pub fn gamma_half(k: u32) -> f64 {
    ln_gamma_half(k).exp()
}

/// `B(a/2, b/2) = Γ(a/2) Γ(b/2) / Γ((a+b)/2)`.
pub fn beta_half(a: u32, b: u32) -> f64 {
    (ln_gamma_half(a) + ln_gamma_half(b) - ln_gamma_half(a + b)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate_real(|t: f64| t.powi(5) - 3.0 * t * t, 0.0, 2.0, QuadOptions::abs(1e-13));
        assert!((r.value.re - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn endpoint_sqrt_singularity_converges() {
        let r = integrate_real(|t: f64| t.sqrt(), 0.0, 1.0, QuadOptions::abs(1e-11));
        assert!((r.value.re - 2.0 / 3.0).abs() < 1e-10, "{:?}", r);
    }

    #[test]
    fn complex_exponential() {
        let r = integrate(|t: f64| Complex::from_polar(1.0, t), 0.0, PI, QuadOptions::abs(1e-13));
        assert!((r.value - Complex::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn legendre_rule_integrates_degree_2n_minus_1() {
        let rule = gauss_legendre::<f64>(6);
        let s: f64 = rule.iter().map(|&(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        let total: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_rule_f32() {
        let rule = gauss_legendre::<f32>(4);
        let s: f32 = rule.iter().map(|&(x, w)| w * x * x).sum();
        assert!((s - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn gamma_half_integers() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma_half(2) - 1.0).abs() < 1e-14);
        assert!((gamma_half(5) - 0.75 * PI.sqrt()).abs() < 1e-14);
        assert!((gamma_half(10) - 24.0).abs() < 1e-12);
        // B(3/2, 3/2) = π/8
        assert!((beta_half(3, 3) - PI / 8.0).abs() < 1e-15);
    }
}
