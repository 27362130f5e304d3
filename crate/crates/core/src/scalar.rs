use std::fmt::{Debug, Display};

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar the numeric kernels are generic over: f32 or f64.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + ScalarOperand
    + LinalgScalar
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    fn real(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 conversion")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
