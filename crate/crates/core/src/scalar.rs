//! Scalar abstraction shared by the exact-form function layer, the quadrature
//! rules and the disk automorphisms.

use std::fmt::Debug;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumCast + Debug + Default + Send + Sync + 'static
{
    /// Lossy conversion of an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Widening conversion used at reporting boundaries.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        NumCast::from(self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

#[inline]
pub fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

/// Argument of `z` mapped into the half-open window `(lower, lower + 2π]`.
pub fn arg_in_window<T: Real>(z: Cx<T>, lower: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut a = z.arg();
    while a <= lower {
        a = a + two_pi;
    }
    while a > lower + two_pi {
        a = a - two_pi;
    }
    a
}

/// `z^p` for half-integer exponent `p = num/2`, with the argument of `z` taken
/// in the window `(lower, lower + 2π]`.
pub fn half_power<T: Real>(z: Cx<T>, num: i32, lower: T) -> Cx<T> {
    if num == 0 {
        return cx(T::one(), T::zero());
    }
    let r = z.norm();
    if r == T::zero() {
        return cx(T::zero(), T::zero());
    }
    let p = T::lit(num as f64) / T::lit(2.0);
    let a = arg_in_window(z, lower) * p;
    Complex::from_polar(r.powf(p), a)
}

pub fn all_finite<T: Real>(z: Cx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
