//! Floating point abstraction used by the numerical kernel.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// f32 or f64.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an f64 literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in target float type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in target float type")
    }

    /// Convergence tolerance for iterative special functions.
    fn tolerance() -> Self {
        Self::epsilon() * Self::lit(4.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}
