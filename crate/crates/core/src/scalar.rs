//! Scalar abstraction shared by the operator, witness and solver code.
//!
//! Everything that only needs a ring with absolute values (matrix assembly,
//! matvec, audits, witness stencils) is generic over [`Scalar`], so the same
//! code runs in `f64`, `f32` or exact [`BigRational`] arithmetic. Iterative
//! spectral routines additionally require [`num_traits::Float`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};
use std::fmt::Debug;

pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// Nearest representable value of an exact rational.
    fn from_rational(r: &BigRational) -> Self;

    fn from_integer(n: i64) -> Self;

    /// Lossy view used for reporting.
    fn to_f64_lossy(&self) -> f64;
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn from_integer(n: i64) -> Self {
        n as f64
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }

    fn from_integer(n: i64) -> Self {
        n as f32
    }

    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_integer(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Floating scalars usable by the iterative solvers.
pub trait FloatScalar: Scalar + num_traits::Float + FromPrimitive {}

impl FloatScalar for f32 {}
impl FloatScalar for f64 {}

/// Largest element of an iterator under `PartialOrd`, ignoring incomparable pairs.
pub(crate) fn partial_max<T: PartialOrd + Clone>(items: impl IntoIterator<Item = T>) -> Option<T> {
    items.into_iter().fold(None, |best, x| match best {
        Some(b) if b >= x => Some(b),
        _ => Some(x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_conversion_is_exact_for_dyadics() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(4));
        assert_eq!(f64::from_rational(&q), 0.25);
        assert_eq!(f32::from_rational(&q), 0.25);
        assert_eq!(BigRational::from_rational(&q), q);
    }

    #[test]
    fn partial_max_picks_largest() {
        assert_eq!(partial_max([1.0, 3.0, 2.0]), Some(3.0));
        assert_eq!(partial_max(Vec::<f64>::new()), None);
    }
}
