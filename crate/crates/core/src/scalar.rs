//! Floating-point scalar abstraction used by the numeric modules.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `log⁺ x = max(log x, 0)`.
pub fn log_plus<F: Real>(x: F) -> F {
    if x > F::one() {
        x.ln()
    } else {
        F::zero()
    }
}

/// `2^{-n}` without going through `powi` underflow for moderate `n`.
pub fn pow2_neg<F: Real>(n: usize) -> F {
    F::lit(0.5).powi(n as i32)
}

pub(crate) fn is_finite_complex<F: Real>(z: Complex<F>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
