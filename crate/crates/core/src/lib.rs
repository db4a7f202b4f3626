//! Segregated harmonic configurations on the unit disk, reconstructed from
//! and verified against their Hopf differentials.

pub mod analytic;
pub mod branch;
pub mod desingularize;
pub mod diffusion;
pub mod error;
pub mod quadrature;
pub mod scalar;
pub mod mobius;
pub mod nodal;
pub mod segregation;

pub use num_complex::Complex;

pub use analytic::{Factor, Parity, PolyFactor, Polynomial, RationalFactored, ZeroRecord};
pub use error::{HopfError, Result};
pub use scalar::{cx, Cx, Real};

/// Double-precision complex number.
pub type C64 = Complex<f64>;
/// Double-precision factored function, the type every pipeline operates on.
pub type Func = RationalFactored<f64>;
