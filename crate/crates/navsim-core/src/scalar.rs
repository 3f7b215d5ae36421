//! Floating-point scalar abstraction for the math-core modules.

use num_traits::{Float, FromPrimitive, NumCast};

/// Scalar type the generic math modules are written against.
///
/// Implemented for `f32` and `f64`; the rest of the crate uses the
/// crate-level `Real` alias.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Default + std::fmt::Debug + std::fmt::Display + 'static
{
    /// Shorthand for converting an `f64` literal into the scalar type.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from(value).expect("literal representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    fn midpoint<S: Scalar>(a: S, b: S) -> S {
        (a + b) / S::lit(2.0)
    }

    #[test]
    fn generic_code_works_for_both_widths() {
        assert_eq!(midpoint(1.0_f64, 3.0_f64), 2.0);
        assert_eq!(midpoint(1.0_f32, 3.0_f32), 2.0);
    }
}
